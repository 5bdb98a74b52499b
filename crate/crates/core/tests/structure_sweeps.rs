use finsub_core::make_field;
use finsub_core::structure::{conjecture_check, verify_theorem, ConjectureId, Theorem};

fn assert_agrees(p: u64, n: usize, t: Theorem) {
    let ctx = make_field(p, n).unwrap();
    let rep = verify_theorem(&ctx, t).unwrap();
    assert!(
        rep.agrees(),
        "{t:?} GF({p},{n}): {} of {} disagree, first {:?}",
        rep.disagreements.len(),
        rep.checked,
        rep.disagreements.first()
    );
    assert!(rep.checked > 0);
}

#[test]
fn field_theorem() {
    for (p, n) in [(2, 4), (2, 6), (3, 4)] {
        assert_agrees(p, n, Theorem::Field);
    }
}

#[test]
fn comp_theorem() {
    assert_agrees(2, 6, Theorem::Comp);
    assert_agrees(3, 4, Theorem::Comp);
}

#[test]
fn codim1_theorem() {
    assert_agrees(2, 6, Theorem::Codim1);
    assert_agrees(3, 4, Theorem::Codim1);
}

#[test]
fn embedding_theorem() {
    for (p, n) in [(2, 3), (2, 4), (2, 6), (3, 3), (3, 4)] {
        assert_agrees(p, n, Theorem::Embedding);
    }
}

#[test]
fn embedding_needs_last_condition() {
    let ctx = make_field(2, 4).unwrap();
    let rep = verify_theorem(&ctx, Theorem::Embedding).unwrap();
    let mismatches: u64 = rep
        .tallies
        .iter()
        .filter(|(k, _)| k.contains("without-last"))
        .map(|(_, v)| *v)
        .sum();
    assert!(mismatches > 0, "{:?}", rep.tallies);
}

#[test]
fn rank_two_dichotomy() {
    for (p, n) in [(2, 4), (2, 6), (3, 4)] {
        assert_agrees(p, n, Theorem::Rk2);
    }
}

#[test]
fn classification_rank3_rank4() {
    assert_agrees(2, 6, Theorem::Rk3);
    assert_agrees(2, 6, Theorem::Rk4);
    assert_agrees(3, 4, Theorem::Rk3);
    assert_agrees(3, 4, Theorem::Rk4);
}

#[test]
fn rank4_fp2_criterion() {
    assert_agrees(2, 6, Theorem::Rk4p2);
    assert_agrees(3, 4, Theorem::Rk4p2);
}

#[test]
fn rank5_partial() {
    assert_agrees(2, 6, Theorem::Rk5);
}

#[test]
fn conjectures_gf2_6() {
    let ctx = make_field(2, 6).unwrap();
    for id in [ConjectureId::Rank5Fp3, ConjectureId::Rank5SubspaceVariety, ConjectureId::Rank5Fp2Variety] {
        let rep = conjecture_check(&ctx, id).unwrap();
        assert_eq!(rep.tested, 63);
        assert!(rep.counterexamples.is_empty(), "{id:?}: {:?}", rep.counterexamples.first());
    }
}
