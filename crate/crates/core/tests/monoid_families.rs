use finsub_core::monoid::{
    enumerate_primitive, from_tilde, generating_family, height, is_solution, tilde_constraints_hold,
    to_tilde, ExponentVector,
};
use num_bigint::{BigInt, BigUint};
use std::collections::BTreeSet;

fn family_set(p: u32, r: usize) -> BTreeSet<ExponentVector> {
    generating_family(p, r).unwrap().into_iter().map(|m| m.vector).collect()
}

fn check_against_enumeration(p: u32, r: usize) {
    let fam = family_set(p, r);
    let cap: BigUint = fam.iter().map(|v| v.max_coord()).max().unwrap() * 2u32;
    let e = enumerate_primitive(p, r, &cap).unwrap();
    let got: BTreeSet<_> = e.primitives.into_iter().collect();
    assert_eq!(got, fam, "p={p} r={r} cap={cap}");
}

#[test]
fn families_are_solutions() {
    for p in [2, 3, 5, 7] {
        for r in 3..=5 {
            for m in generating_family(p, r).unwrap() {
                assert!(is_solution(&m.vector), "p={p} r={r} {} {}", m.tag, m.vector);
                assert!(height(&m.vector) >= BigInt::from(1));
            }
        }
    }
}

#[test]
fn rank3_matches_enumeration() {
    check_against_enumeration(2, 3);
    check_against_enumeration(3, 3);
    check_against_enumeration(5, 3);
}

#[test]
fn rank4_matches_enumeration() {
    check_against_enumeration(2, 4);
    check_against_enumeration(3, 4);
}

#[test]
fn rank5_p2_matches_enumeration() {
    let fam = family_set(2, 5);
    let e = enumerate_primitive(2, 5, &BigUint::from(62u32)).unwrap();
    let got: BTreeSet<_> = e.primitives.into_iter().collect();
    assert_eq!(got, fam);
}

#[test]
fn tilde_identities_on_enumerated_solutions() {
    for (p, r) in [(2u32, 3usize), (2, 4), (3, 4), (2, 5)] {
        let fam = family_set(p, r);
        for v in &fam {
            let t = to_tilde(v).unwrap();
            let s: BigInt = t.0[..r - 1].iter().sum();
            assert_eq!(s, t.0[r - 1]);
            assert_eq!(t.0[0], height(v));
            assert!(tilde_constraints_hold(&t, p));
            assert_eq!(&from_tilde(&t, p).unwrap(), v);
        }
    }
}
