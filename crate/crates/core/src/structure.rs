//! Structural theorems about subgroups, each paired with a brute-force check.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dickson::{dickson_eval, omega_map, DicksonError, DicksonVector, SubgroupBasis};
use crate::field::{FieldCtx, FieldError, FqElem};
use crate::separating::{eval_on_dickson, v_exponents, vij_exponents, InvariantSpec, SeparatingError};
use crate::subspace::{
    dilated_subfields_in, enumerate_subspaces, gaussian_binomial, subfield_subspace, CanonicalSubspace, Partition,
    PartitionOracle, SubspaceError,
};

/// Above this many subgroups a sweep uses dilation-orbit representatives.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("rank {rank} is not a multiple of {s}")]
    RankNotMultiple { rank: usize, s: usize },
    #[error("GF(p^{s}) is not a subfield of GF(p^{n})")]
    SubfieldMissing { s: usize, n: usize },
    #[error("expected rank {expected}, got {got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("rank {0} is too small for this test")]
    RankTooSmall(usize),
    #[error("complement meets GF(p^{s}) nontrivially")]
    MeetsSubfield { s: usize },
    #[error("conjecture checks need n >= 5, got {0}")]
    AmbientTooSmall(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dickson(#[from] DicksonError),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
    #[error(transparent)]
    Separating(#[from] SeparatingError),
}

fn pw(ctx: &FieldCtx, x: &FqElem, e: u64) -> FqElem {
    ctx.pow(x, e)
}

fn dickson_of(ctx: &FieldCtx, v: &CanonicalSubspace) -> Result<DicksonVector, StructureError> {
    Ok(dickson_eval(ctx, &v.basis())?)
}

fn inv_value(ctx: &FieldCtx, spec: &InvariantSpec, d: &DicksonVector) -> Result<FqElem, StructureError> {
    Ok(eval_on_dickson(ctx, spec, d)?)
}

fn check_rank(v: &CanonicalSubspace, expected: usize) -> Result<(), StructureError> {
    if v.rank() != expected {
        return Err(StructureError::RankMismatch { expected, got: v.rank() });
    }
    Ok(())
}

fn hex_rows(ctx: &FieldCtx, v: &CanonicalSubspace) -> Vec<String> {
    v.rows().iter().map(|x| ctx.to_hex(x)).collect()
}

/// (all `d_{i,r}` with `s ∤ i` vanish, `GF(p^s)·V ⊆ V`).
pub fn is_fq_space_test(ctx: &FieldCtx, v: &CanonicalSubspace, s: usize) -> Result<(bool, bool), StructureError> {
    let r = v.rank();
    if s == 0 || r % s != 0 {
        return Err(StructureError::RankNotMultiple { rank: r, s });
    }
    if ctx.n() % s != 0 {
        return Err(StructureError::SubfieldMissing { s, n: ctx.n() });
    }
    let d = dickson_of(ctx, v)?;
    let theorem = (1..=r).filter(|i| i % s != 0).all(|i| d.d(i as i64).is_zero());
    let theta = ctx.subfield_generator(s)?;
    let direct = v.rows().iter().all(|x| v.contains(ctx, &ctx.mul(&theta, x)));
    Ok((theorem, direct))
}

/// Checks `d_{i,r}(GF(p^s) ⊕ W) = d_{i,ℓ}(ω_s W) − d_{i−s,ℓ}(ω_s W)` for every `i`.
pub fn comp_identity_check(ctx: &FieldCtx, s: usize, w: &SubgroupBasis) -> Result<bool, StructureError> {
    if s == 0 || ctx.n() % s != 0 {
        return Err(StructureError::SubfieldMissing { s, n: ctx.n() });
    }
    if w.is_empty() {
        return Err(StructureError::RankTooSmall(0));
    }
    let mut gens = ctx.subfield_basis(s)?;
    gens.extend_from_slice(w.elems());
    let v = SubgroupBasis::new(gens);
    let dv = dickson_eval(ctx, &v).map_err(|e| match e {
        DicksonError::DependentBasis { .. } => StructureError::MeetsSubfield { s },
        other => other.into(),
    })?;
    let dw = dickson_eval(ctx, &omega_map(ctx, s, w)?)?;
    let r = v.len() as i64;
    Ok((1..=r).all(|i| dv.d(i) == ctx.sub(&dw.d(i), &dw.d(i - s as i64))))
}

/// `d_{i,s+1} = 0` for `1 < i < s` and `d_{1,s+1}^p d_{s,s+1} / d_{s+1,s+1}^p = 1`.
pub fn codim1_predicate(ctx: &FieldCtx, v: &CanonicalSubspace) -> Result<bool, StructureError> {
    let r = v.rank();
    if r < 3 {
        return Err(StructureError::RankTooSmall(r));
    }
    let s = r - 1;
    let d = dickson_of(ctx, v)?;
    if !(2..s).all(|i| d.d(i as i64).is_zero()) {
        return Ok(false);
    }
    let v1s = inv_value(ctx, &vij_exponents(ctx.p(), r, 1, s)?, &d)?;
    Ok(v1s == ctx.one())
}

/// `codim1_predicate` next to the oracle's verdict `λ(V) = (s,1)`.
pub fn codim1_classify(
    ctx: &FieldCtx,
    oracle: &mut PartitionOracle,
    v: &CanonicalSubspace,
) -> Result<(bool, bool), StructureError> {
    let predicate = codim1_predicate(ctx, v)?;
    let s = v.rank() as u32 - 1;
    Ok((predicate, oracle.partition_of(ctx, v) == Partition(vec![s, 1])))
}

/// `v_{1i}` for `1 ≤ i ≤ r`, with `v_{11} = v_1` and `v_{1r} = 1`.
fn v1_chain(ctx: &FieldCtx, d: &DicksonVector) -> Result<Vec<FqElem>, StructureError> {
    let r = d.rank();
    let p = ctx.p();
    let mut out = vec![inv_value(ctx, &v_exponents(p, r, 1)?, d)?];
    for i in 2..r {
        out.push(inv_value(ctx, &vij_exponents(p, r, 1, i)?, d)?);
    }
    out.push(ctx.one());
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingOutcome {
    /// `d_{1,r} ≠ 0` and `v_{1i}^p = v_{1(i−1)}` for `2 ≤ i ≤ r`, where `v_{1r} = 1`.
    pub equations: bool,
    /// The same without the `i = r` condition.
    pub equations_without_last: bool,
    /// `V` lies in some dilation of `GF(p^{r+1})`.
    pub direct: bool,
}

/// Whether `V` (rank `r ≥ 2`) sits inside a dilation of `GF(p^{r+1})`.
///
/// Direct test: for any nonzero `v0 ∈ V`, `V ⊆ α·GF(p^{r+1})` for some `α` iff
/// `v0^{-1}V ⊆ GF(p^{r+1})`. The quotients lie in `GF(p^n)`, so membership in
/// `GF(p^{gcd(r+1,n)})` decides the question over the algebraic closure.
pub fn embedding_test(ctx: &FieldCtx, v: &CanonicalSubspace) -> Result<EmbeddingOutcome, StructureError> {
    let r = v.rank();
    if r < 2 {
        return Err(StructureError::RankTooSmall(r));
    }
    let d = dickson_of(ctx, v)?;
    let p = ctx.p() as u64;
    let (equations, equations_without_last) = if d.d(1).is_zero() {
        (false, false)
    } else {
        let chain = v1_chain(ctx, &d)?;
        let holds = |i: usize| pw(ctx, &chain[i - 1], p) == chain[i - 2];
        let head = (2..r).all(holds);
        (head && holds(r), head)
    };
    let g = gcd(r + 1, ctx.n());
    let v0_inv = ctx.inv(&v.rows()[0]).expect("echelon rows are nonzero");
    let direct = v.rows().iter().all(|x| ctx.in_subfield(&ctx.mul(x, &v0_inv), g));
    Ok(EmbeddingOutcome { equations, equations_without_last, direct })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `d_{1,4}^{p^2} d_{2,4}^p d_{3,4} − d_{4,4}^p d_{1,4}^{p^2+1} − d_{3,4}^{p^2+1}`.
pub fn rank4_h(ctx: &FieldCtx, d: &DicksonVector) -> FqElem {
    let p = ctx.p() as u64;
    let p2 = p * p;
    let t1 = ctx.mul(&ctx.mul(&pw(ctx, &d.d(1), p2), &pw(ctx, &d.d(2), p)), &d.d(3));
    let t2 = ctx.mul(&pw(ctx, &d.d(4), p), &pw(ctx, &d.d(1), p2 + 1));
    let t3 = pw(ctx, &d.d(3), p2 + 1);
    ctx.sub(&ctx.sub(&t1, &t2), &t3)
}

/// (`H(V) = 0`, `V` contains a dilation of `GF(p^2)`).
pub fn rank4_contains_fp2(ctx: &FieldCtx, v: &CanonicalSubspace) -> Result<(bool, bool), StructureError> {
    check_rank(v, 4)?;
    let d = dickson_of(ctx, v)?;
    Ok((rank4_h(ctx, &d).is_zero(), !dilated_subfields_in(ctx, v, 2).is_empty()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub basis: Vec<String>,
    /// `None` when no case of the theorem decides the partition.
    pub theorem: Option<Partition>,
    pub oracle: Partition,
    pub agree: bool,
    /// Values used by the theorem, hex encoded.
    pub witness: BTreeMap<String, String>,
}

fn finish(
    ctx: &FieldCtx,
    oracle: &mut PartitionOracle,
    v: &CanonicalSubspace,
    theorem: Option<Partition>,
    witness: BTreeMap<String, String>,
) -> ClassificationResult {
    let actual = oracle.partition_of(ctx, v);
    let agree = match &theorem {
        Some(t) => *t == actual,
        // undetermined cases must not be one the theorem claims to characterise
        None => true,
    };
    ClassificationResult { basis: hex_rows(ctx, v), theorem, oracle: actual, agree, witness }
}

fn dickson_witness(ctx: &FieldCtx, d: &DicksonVector) -> BTreeMap<String, String> {
    (1..=d.rank()).map(|i| (format!("d_{i}"), ctx.to_hex(&d.d(i as i64)))).collect()
}

pub fn rank3_classify(
    ctx: &FieldCtx,
    oracle: &mut PartitionOracle,
    v: &CanonicalSubspace,
) -> Result<ClassificationResult, StructureError> {
    check_rank(v, 3)?;
    let d = dickson_of(ctx, v)?;
    let v12 = inv_value(ctx, &vij_exponents(ctx.p(), 3, 1, 2)?, &d)?;
    let mut w = dickson_witness(ctx, &d);
    w.insert("v_12".into(), ctx.to_hex(&v12));
    let theorem = if d.d(1).is_zero() && d.d(2).is_zero() {
        Partition(vec![3])
    } else if v12 == ctx.one() {
        Partition(vec![2, 1])
    } else {
        Partition::ones(3)
    };
    Ok(finish(ctx, oracle, v, Some(theorem), w))
}

pub fn rank4_classify(
    ctx: &FieldCtx,
    oracle: &mut PartitionOracle,
    v: &CanonicalSubspace,
) -> Result<ClassificationResult, StructureError> {
    check_rank(v, 4)?;
    let p = ctx.p();
    let d = dickson_of(ctx, v)?;
    let v1 = inv_value(ctx, &v_exponents(p, 4, 1)?, &d)?;
    let v12 = inv_value(ctx, &vij_exponents(p, 4, 1, 2)?, &d)?;
    let v13 = inv_value(ctx, &vij_exponents(p, 4, 1, 3)?, &d)?;
    let mut w = dickson_witness(ctx, &d);
    w.insert("v_1".into(), ctx.to_hex(&v1));
    w.insert("v_12".into(), ctx.to_hex(&v12));
    w.insert("v_13".into(), ctx.to_hex(&v13));
    let z = |i: i64| d.d(i).is_zero();
    let v13p = pw(ctx, &v13, p as u64);
    let two_one_one = ctx.sub(&ctx.mul(&pw(ctx, &ctx.sub(&v12, &v13p), p as u64), &v13), &v1);
    let theorem = if z(1) && z(2) && z(3) {
        Partition(vec![4])
    } else if z(1) && z(3) {
        Partition(vec![2, 2])
    } else if z(2) && v13 == ctx.one() {
        Partition(vec![3, 1])
    } else if !z(1) && !z(2) && two_one_one.is_zero() {
        Partition(vec![2, 1, 1])
    } else {
        Partition::ones(4)
    };
    Ok(finish(ctx, oracle, v, Some(theorem), w))
}

/// Only `(5)` and `(4,1)` are characterised; other cases are `None`.
pub fn rank5_partial_classify(
    ctx: &FieldCtx,
    oracle: &mut PartitionOracle,
    v: &CanonicalSubspace,
) -> Result<ClassificationResult, StructureError> {
    check_rank(v, 5)?;
    let d = dickson_of(ctx, v)?;
    let v14 = inv_value(ctx, &vij_exponents(ctx.p(), 5, 1, 4)?, &d)?;
    let mut w = dickson_witness(ctx, &d);
    w.insert("v_14".into(), ctx.to_hex(&v14));
    let z = |i: i64| d.d(i).is_zero();
    let theorem = if (1..=4).all(z) {
        Some(Partition(vec![5]))
    } else if z(2) && z(3) && v14 == ctx.one() {
        Some(Partition(vec![4, 1]))
    } else {
        None
    };
    let mut out = finish(ctx, oracle, v, theorem, w);
    // the two characterised partitions must not escape detection
    if out.theorem.is_none() && (out.oracle == Partition(vec![5]) || out.oracle == Partition(vec![4, 1])) {
        out.agree = false;
    }
    Ok(out)
}

/// The rank-5 polynomials used by the conjectures.
#[derive(Clone, Debug)]
pub struct Rank5Polys {
    /// `d_{4,5}^p − d_{3,5} d_{1,5}^p`, `d_{5,5}^p d_{1,5} − d_{4,5} d_{2,5}^p`, and for
    /// `i = 1..p`: `d_{5,5}^{ip} d_{4,5}^{p−i} − d_{3,5} d_{2,5}^{ip} d_{1,5}^{p−i}`.
    pub fp3: Vec<FqElem>,
    /// `d_{5,5}^p − d_{4,5} d_{1,5}^p`.
    pub r1: FqElem,
    /// `d_{3,5}^p − d_{2,5} d_{1,5}^p`.
    pub r2: FqElem,
    /// `r1^{p^2+1} − r2^{p^2} (d_{5,5}^p d_{2,5} − d_{4,5} d_{3,5}^p)`.
    pub fp2: FqElem,
}

pub fn rank5_polys(ctx: &FieldCtx, d: &DicksonVector) -> Rank5Polys {
    let p = ctx.p() as u64;
    let dd = |i: i64| d.d(i);
    let m = |a: &FqElem, b: &FqElem| ctx.mul(a, b);
    let mut fp3 = vec![
        ctx.sub(&pw(ctx, &dd(4), p), &m(&dd(3), &pw(ctx, &dd(1), p))),
        ctx.sub(&m(&pw(ctx, &dd(5), p), &dd(1)), &m(&dd(4), &pw(ctx, &dd(2), p))),
    ];
    for i in 1..=p {
        let lhs = m(&pw(ctx, &dd(5), i * p), &pw(ctx, &dd(4), p - i));
        let rhs = m(&m(&dd(3), &pw(ctx, &dd(2), i * p)), &pw(ctx, &dd(1), p - i));
        fp3.push(ctx.sub(&lhs, &rhs));
    }
    let r1 = ctx.sub(&pw(ctx, &dd(5), p), &m(&dd(4), &pw(ctx, &dd(1), p)));
    let r2 = ctx.sub(&pw(ctx, &dd(3), p), &m(&dd(2), &pw(ctx, &dd(1), p)));
    let tail = ctx.sub(&m(&pw(ctx, &dd(5), p), &dd(2)), &m(&dd(4), &pw(ctx, &dd(3), p)));
    let fp2 = ctx.sub(&pw(ctx, &r1, p * p + 1), &m(&pw(ctx, &r2, p * p), &tail));
    Rank5Polys { fp3, r1, r2, fp2 }
}

/// Rank of the largest `GF(p^2)`-subspace of `V`, namely `{x ∈ V : θx ∈ V}`.
pub fn largest_fp2_subspace_rank(ctx: &FieldCtx, v: &CanonicalSubspace) -> Result<usize, StructureError> {
    if ctx.n() % 2 != 0 {
        return Ok(0);
    }
    let theta = ctx.subfield_generator(2)?;
    let inside: Vec<FqElem> = v
        .elements(ctx)
        .into_iter()
        .filter(|x| v.contains(ctx, &ctx.mul(&theta, x)))
        .collect();
    Ok(CanonicalSubspace::from_elems(ctx, &inside).rank())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConjectureId {
    /// Rank 5: contains a dilation of `GF(p^3)`.
    Rank5Fp3,
    /// Rank 5: contains a rank-4 `GF(p^2)`-subspace.
    Rank5SubspaceVariety,
    /// Rank 5: contains a dilation of `GF(p^2)`.
    Rank5Fp2Variety,
}

impl ConjectureId {
    fn needed_subfield(self) -> usize {
        match self {
            ConjectureId::Rank5Fp3 => 3,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureDirection {
    /// The structure is present but the polynomials do not all vanish.
    StructureWithoutVanishing,
    /// The polynomials vanish but the structure is absent.
    VanishingWithoutStructure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureWitness {
    pub basis: Vec<String>,
    pub dickson: Vec<String>,
    /// Every polynomial value, hex encoded, by name.
    pub values: BTreeMap<String, String>,
    pub in_variety: bool,
    pub has_structure: bool,
    pub direction: FailureDirection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub conjecture: ConjectureId,
    pub p: u32,
    pub n: usize,
    pub tested: usize,
    pub with_structure: usize,
    pub in_variety: usize,
    pub counterexamples: Vec<ConjectureWitness>,
    pub note: String,
    #[serde(skip)]
    pub runtime_ms: u128,
}

const CONJECTURE_NOTE: &str = "pointwise check on GF(p^n)-points of the variety; agreement is evidence for, not proof of, \
the ideal equality. For the subspace and fp2 statements only structure-implies-vanishing follows from ideal membership; \
vanishing-without-structure would refute the conjectured equality";

fn rank5_values(ctx: &FieldCtx, id: ConjectureId, polys: &Rank5Polys) -> (bool, BTreeMap<String, String>) {
    let mut values = BTreeMap::new();
    let in_variety = match id {
        ConjectureId::Rank5Fp3 => {
            for (k, x) in polys.fp3.iter().enumerate() {
                values.insert(format!("f{}", k + 1), ctx.to_hex(x));
            }
            polys.fp3.iter().all(FqElem::is_zero)
        }
        ConjectureId::Rank5SubspaceVariety => {
            values.insert("r1".into(), ctx.to_hex(&polys.r1));
            values.insert("r2".into(), ctx.to_hex(&polys.r2));
            polys.r1.is_zero() && polys.r2.is_zero()
        }
        ConjectureId::Rank5Fp2Variety => {
            values.insert("r1".into(), ctx.to_hex(&polys.r1));
            values.insert("r2".into(), ctx.to_hex(&polys.r2));
            values.insert("g".into(), ctx.to_hex(&polys.fp2));
            polys.fp2.is_zero()
        }
    };
    (in_variety, values)
}

/// Every rank-`r` subgroup, or orbit representatives above [`EXHAUSTIVE_LIMIT`].
pub fn sweep_subgroups(ctx: &FieldCtx, r: usize) -> Result<Vec<CanonicalSubspace>, StructureError> {
    if gaussian_binomial(ctx.n(), r, ctx.p()) <= EXHAUSTIVE_LIMIT.into() {
        Ok(enumerate_subspaces(ctx, r)?)
    } else {
        Ok(crate::subspace::dilation_orbit_reps(ctx, r)?.entries.into_iter().map(|e| e.rep).collect())
    }
}

/// Compares a rank-5 conjecture with brute force on every rank-5 subgroup.
pub fn conjecture_check(ctx: &FieldCtx, id: ConjectureId) -> Result<ConjectureReport, StructureError> {
    let start = Instant::now();
    let n = ctx.n();
    if n < 5 {
        return Err(StructureError::AmbientTooSmall(n));
    }
    let s = id.needed_subfield();
    if n % s != 0 {
        return Err(StructureError::SubfieldMissing { s, n });
    }
    let subs = sweep_subgroups(ctx, 5)?;
    let rows: Vec<(bool, bool, Option<ConjectureWitness>)> = subs
        .par_iter()
        .map(|v| {
            let d = dickson_of(ctx, v)?;
            let polys = rank5_polys(ctx, &d);
            let (in_variety, values) = rank5_values(ctx, id, &polys);
            let has_structure = match id {
                ConjectureId::Rank5Fp3 => !dilated_subfields_in(ctx, v, 3).is_empty(),
                ConjectureId::Rank5SubspaceVariety => largest_fp2_subspace_rank(ctx, v)? >= 4,
                ConjectureId::Rank5Fp2Variety => !dilated_subfields_in(ctx, v, 2).is_empty(),
            };
            let witness = (in_variety != has_structure).then(|| ConjectureWitness {
                basis: hex_rows(ctx, v),
                dickson: d.to_hex(ctx),
                values,
                in_variety,
                has_structure,
                direction: if has_structure {
                    FailureDirection::StructureWithoutVanishing
                } else {
                    FailureDirection::VanishingWithoutStructure
                },
            });
            Ok((in_variety, has_structure, witness))
        })
        .collect::<Result<_, StructureError>>()?;
    Ok(ConjectureReport {
        conjecture: id,
        p: ctx.p(),
        n,
        tested: rows.len(),
        with_structure: rows.iter().filter(|r| r.1).count(),
        in_variety: rows.iter().filter(|r| r.0).count(),
        counterexamples: rows.into_iter().filter_map(|r| r.2).collect(),
        note: CONJECTURE_NOTE.to_string(),
        runtime_ms: start.elapsed().as_millis(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// `V` is a `GF(p^s)`-space iff `d_{i,r}` vanishes for `s ∤ i`.
    Field,
    /// Dickson invariants of `GF(p^s) ⊕ W` from those of `ω_s(W)`.
    Comp,
    /// Partition `(s,1)` criterion for rank `s+1`.
    Codim1,
    /// Rank `r` inside a dilation of `GF(p^{r+1})`.
    Embedding,
    /// Rank 2: `v_1 = 0` iff `V` is a dilation of `GF(p^2)`.
    Rk2,
    Rk3,
    Rk4,
    /// Rank 4: `H = 0` iff `V` contains a dilation of `GF(p^2)`.
    Rk4p2,
    Rk5,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disagreement {
    pub basis: Vec<String>,
    pub dickson: Vec<String>,
    pub case: String,
    pub theorem: String,
    pub direct: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub p: u32,
    pub n: usize,
    pub checked: usize,
    pub disagreements: Vec<Disagreement>,
    /// Named counts, e.g. how often each side held.
    pub tallies: BTreeMap<String, u64>,
    #[serde(skip)]
    pub runtime_ms: u128,
}

impl TheoremReport {
    pub fn agrees(&self) -> bool {
        self.disagreements.is_empty()
    }
}

struct Row {
    tallies: Vec<String>,
    disagreement: Option<Disagreement>,
}

fn row(
    ctx: &FieldCtx,
    v: &CanonicalSubspace,
    case: &str,
    theorem: impl ToString,
    direct: impl ToString,
    tallies: Vec<String>,
) -> Result<Row, StructureError> {
    let (theorem, direct) = (theorem.to_string(), direct.to_string());
    let disagreement = if theorem != direct {
        Some(Disagreement {
            basis: hex_rows(ctx, v),
            dickson: dickson_of(ctx, v)?.to_hex(ctx),
            case: case.to_string(),
            theorem,
            direct,
        })
    } else {
        None
    };
    Ok(Row { tallies, disagreement })
}

fn collect(theorem: Theorem, ctx: &FieldCtx, rows: Vec<Row>, start: Instant) -> TheoremReport {
    let mut tallies = BTreeMap::new();
    for r in &rows {
        for t in &r.tallies {
            *tallies.entry(t.clone()).or_insert(0) += 1;
        }
    }
    TheoremReport {
        theorem,
        p: ctx.p(),
        n: ctx.n(),
        checked: rows.len(),
        disagreements: rows.into_iter().filter_map(|r| r.disagreement).collect(),
        tallies,
        runtime_ms: start.elapsed().as_millis(),
    }
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn run_field(ctx: &FieldCtx, s: usize, r: usize) -> Result<Vec<Row>, StructureError> {
    sweep_subgroups(ctx, r)?
        .par_iter()
        .map(|v| {
            let (t, d) = is_fq_space_test(ctx, v, s)?;
            row(ctx, v, &format!("s={s} r={r}"), t, d, vec![format!("s={s} r={r} space={d}")])
        })
        .collect()
}

/// `field` theorem for one `(s, r)`.
pub fn verify_field(ctx: &FieldCtx, s: usize, r: usize) -> Result<TheoremReport, StructureError> {
    let start = Instant::now();
    if ctx.n() % s != 0 {
        return Err(StructureError::SubfieldMissing { s, n: ctx.n() });
    }
    Ok(collect(Theorem::Field, ctx, run_field(ctx, s, r)?, start))
}

fn run_comp(ctx: &FieldCtx, s: usize) -> Result<Vec<Row>, StructureError> {
    let n = ctx.n();
    let field = subfield_subspace(ctx, s)?;
    let mut rows = Vec::new();
    for l in 1..=(n - s) {
        let ws: Vec<CanonicalSubspace> = sweep_subgroups(ctx, l)?
            .into_iter()
            .filter(|w| {
                let mut gens = field.rows().to_vec();
                gens.extend_from_slice(w.rows());
                CanonicalSubspace::from_elems(ctx, &gens).rank() == s + l
            })
            .collect();
        let part: Vec<Row> = ws
            .par_iter()
            .map(|w| {
                let ok = comp_identity_check(ctx, s, &w.basis())?;
                row(ctx, w, &format!("s={s} l={l}"), ok, true, vec![format!("s={s} l={l}")])
            })
            .collect::<Result<_, _>>()?;
        rows.extend(part);
    }
    Ok(rows)
}

/// `comp` identity for every `s | n` with `s < n` and every complement `W`.
pub fn verify_comp(ctx: &FieldCtx, s: Option<usize>) -> Result<TheoremReport, StructureError> {
    let start = Instant::now();
    let n = ctx.n();
    let ss: Vec<usize> = match s {
        Some(s) if n % s != 0 => return Err(StructureError::SubfieldMissing { s, n }),
        Some(s) => vec![s],
        None => divisors(n).into_iter().filter(|&s| s < n).collect(),
    };
    let mut rows = Vec::new();
    for s in ss {
        rows.extend(run_comp(ctx, s)?);
    }
    Ok(collect(Theorem::Comp, ctx, rows, start))
}

/// `codim1` criterion on every subgroup of rank `s + 1`.
pub fn verify_codim1(ctx: &FieldCtx, s: usize) -> Result<TheoremReport, StructureError> {
    let start = Instant::now();
    let rows = sweep_subgroups(ctx, s + 1)?
        .par_iter()
        .map_init(PartitionOracle::new, |oracle, v| {
            let (t, d) = codim1_classify(ctx, oracle, v)?;
            row(ctx, v, &format!("s={s}"), t, d, vec![format!("s={s} partition(s,1)={d}")])
        })
        .collect::<Result<_, StructureError>>()?;
    Ok(collect(Theorem::Codim1, ctx, rows, start))
}

/// Embedding criterion on every subgroup of rank `r`.
pub fn verify_embedding(ctx: &FieldCtx, r: usize) -> Result<TheoremReport, StructureError> {
    let start = Instant::now();
    let rows = sweep_subgroups(ctx, r)?
        .par_iter()
        .map(|v| {
            let o = embedding_test(ctx, v)?;
            let mut tallies = vec![format!("r={r} embedded={}", o.direct)];
            if o.equations_without_last != o.direct {
                tallies.push(format!("r={r} without-last-condition-mismatch"));
            }
            row(ctx, v, &format!("r={r}"), o.equations, o.direct, tallies)
        })
        .collect::<Result<_, StructureError>>()?;
    Ok(collect(Theorem::Embedding, ctx, rows, start))
}

/// Rank 2: `v_1(V) = 0` iff `λ(V) = (2)`.
pub fn verify_rk2(ctx: &FieldCtx) -> Result<TheoremReport, StructureError> {
    let start = Instant::now();
    let v1 = v_exponents(ctx.p(), 2, 1)?;
    let rows = sweep_subgroups(ctx, 2)?
        .par_iter()
        .map_init(PartitionOracle::new, |oracle, v| {
            let d = dickson_of(ctx, v)?;
            let t = inv_value(ctx, &v1, &d)?.is_zero();
            let direct = oracle.partition_of(ctx, v) == Partition(vec![2]);
            row(ctx, v, "r=2", t, direct, vec![format!("field-dilation={direct}")])
        })
        .collect::<Result<_, StructureError>>()?;
    Ok(collect(Theorem::Rk2, ctx, rows, start))
}

type Classifier = fn(&FieldCtx, &mut PartitionOracle, &CanonicalSubspace) -> Result<ClassificationResult, StructureError>;

fn run_classifier(ctx: &FieldCtx, r: usize, f: Classifier) -> Result<Vec<(CanonicalSubspace, ClassificationResult)>, StructureError> {
    sweep_subgroups(ctx, r)?
        .into_par_iter()
        .map_init(PartitionOracle::new, |oracle, v| {
            let c = f(ctx, oracle, &v)?;
            Ok((v, c))
        })
        .collect()
}

fn classification_rows(
    ctx: &FieldCtx,
    r: usize,
    results: &[(CanonicalSubspace, ClassificationResult)],
) -> Result<Vec<Row>, StructureError> {
    results
        .iter()
        .map(|(v, c)| {
            let t = c.theorem.as_ref().map_or("undetermined".to_string(), |t| t.to_string());
            let mut tallies = vec![format!("oracle {}", c.oracle)];
            if c.theorem.is_none() {
                tallies.push("undetermined".into());
            }
            let direct = if c.agree { t.clone() } else { c.oracle.to_string() };
            row(ctx, v, &format!("r={r}"), t, direct, tallies)
        })
        .collect()
}

pub fn verify_classification(ctx: &FieldCtx, theorem: Theorem) -> Result<TheoremReport, StructureError> {
    let start = Instant::now();
    let (r, f): (usize, Classifier) = match theorem {
        Theorem::Rk3 => (3, rank3_classify),
        Theorem::Rk4 => (4, rank4_classify),
        Theorem::Rk5 => (5, rank5_partial_classify),
        other => unreachable!("{other:?} is not a classification theorem"),
    };
    if ctx.n() < r {
        return Err(StructureError::RankMismatch { expected: r, got: ctx.n() });
    }
    let results = run_classifier(ctx, r, f)?;
    let rows = classification_rows(ctx, r, &results)?;
    let mut report = collect(theorem, ctx, rows, start);
    if r == 5 {
        report.tallies.extend(rank5_expectation_tallies(ctx, &results)?);
    }
    Ok(report)
}

/// Empirical truth tables for the expectations stated for `(2,2,1)` and `(2,1,1,1)`.
fn rank5_expectation_tallies(
    ctx: &FieldCtx,
    results: &[(CanonicalSubspace, ClassificationResult)],
) -> Result<BTreeMap<String, u64>, StructureError> {
    let mut out = BTreeMap::new();
    for (v, c) in results {
        let d = dickson_of(ctx, v)?;
        if c.oracle == Partition(vec![2, 2, 1]) {
            let key = format!("(2,2,1) d_2!=0 {}", !d.d(2).is_zero());
            *out.entry(key).or_insert(0) += 1;
        }
        if c.oracle == Partition(vec![2, 1, 1, 1]) {
            let polys = rank5_polys(ctx, &d);
            let held = polys.fp2.is_zero() && !(polys.r1.is_zero() && polys.r2.is_zero());
            *out.entry(format!("(2,1,1,1) expectation {held}")).or_insert(0) += 1;
        }
    }
    Ok(out)
}

/// `H` criterion on every rank-4 subgroup.
pub fn verify_rk4p2(ctx: &FieldCtx) -> Result<TheoremReport, StructureError> {
    let start = Instant::now();
    let rows = sweep_subgroups(ctx, 4)?
        .par_iter()
        .map(|v| {
            let (t, d) = rank4_contains_fp2(ctx, v)?;
            row(ctx, v, "r=4", t, d, vec![format!("contains-dilated-fp2={d}")])
        })
        .collect::<Result<_, StructureError>>()?;
    Ok(collect(Theorem::Rk4p2, ctx, rows, start))
}

/// Runs a theorem over every applicable parameter in `GF(p^n)`.
pub fn verify_theorem(ctx: &FieldCtx, theorem: Theorem) -> Result<TheoremReport, StructureError> {
    let n = ctx.n();
    let start = Instant::now();
    let merge = |reports: Vec<TheoremReport>| {
        let mut out = TheoremReport {
            theorem,
            p: ctx.p(),
            n,
            checked: 0,
            disagreements: Vec::new(),
            tallies: BTreeMap::new(),
            runtime_ms: 0,
        };
        for r in reports {
            out.checked += r.checked;
            out.disagreements.extend(r.disagreements);
            for (k, v) in r.tallies {
                *out.tallies.entry(k).or_insert(0) += v;
            }
        }
        out.runtime_ms = start.elapsed().as_millis();
        out
    };
    match theorem {
        Theorem::Field => {
            let mut reports = Vec::new();
            for s in divisors(n).into_iter().filter(|&s| s > 1) {
                for r in (s..=n).step_by(s) {
                    reports.push(verify_field(ctx, s, r)?);
                }
            }
            Ok(merge(reports))
        }
        Theorem::Comp => verify_comp(ctx, None),
        Theorem::Codim1 => Ok(merge((2..n).map(|s| verify_codim1(ctx, s)).collect::<Result<_, _>>()?)),
        Theorem::Embedding => Ok(merge((2..=n).map(|r| verify_embedding(ctx, r)).collect::<Result<_, _>>()?)),
        Theorem::Rk2 => verify_rk2(ctx),
        Theorem::Rk3 | Theorem::Rk4 | Theorem::Rk5 => verify_classification(ctx, theorem),
        Theorem::Rk4p2 => verify_rk4p2(ctx),
    }
}

/// Smallest `n ≥ r` divisible by every entry of `divisors`.
pub fn smallest_ambient(r: usize, divisors: &[usize]) -> usize {
    let l = divisors.iter().fold(1usize, |acc, &d| acc / gcd(acc, d) * d);
    r.div_ceil(l) * l
}

/// `Span{1, a, a^3, b, ab}` in `GF(p^6)`, with `a` of degree 3 chosen so that
/// the five generators are independent and `b` generating `GF(p^2)`.
pub fn rank5_example(ctx: &FieldCtx) -> Result<Option<CanonicalSubspace>, StructureError> {
    if ctx.n() % 6 != 0 {
        return Err(StructureError::SubfieldMissing { s: 6, n: ctx.n() });
    }
    let b = ctx.subfield_generator(2)?;
    for a in ctx.subfield_elements(3)? {
        if a.is_zero() || ctx.in_subfield(&a, 1) {
            continue;
        }
        let a3 = ctx.pow(&a, 3);
        let gens = [ctx.one(), a, a3, b, ctx.mul(&a, &b)];
        let v = CanonicalSubspace::from_elems(ctx, &gens);
        if v.rank() == 5 {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    #[test]
    fn fq_space_examples() {
        let ctx = make_field(2, 4).unwrap();
        let f4 = subfield_subspace(&ctx, 2).unwrap();
        assert_eq!(is_fq_space_test(&ctx, &f4, 2).unwrap(), (true, true));
        let line = CanonicalSubspace::from_elems(&ctx, &[ctx.one(), ctx.generator_t()]);
        assert_eq!(is_fq_space_test(&ctx, &line, 2).unwrap(), (false, false));
        assert!(is_fq_space_test(&ctx, &line, 3).is_err());
    }

    #[test]
    fn comp_identity_small() {
        let ctx = make_field(2, 6).unwrap();
        let w = SubgroupBasis::new(vec![ctx.generator_t()]);
        assert!(comp_identity_check(&ctx, 1, &w).unwrap());
        let w = SubgroupBasis::new(vec![ctx.generator_t(), ctx.pow(&ctx.generator_t(), 3)]);
        assert!(comp_identity_check(&ctx, 2, &w).unwrap());
        let bad = SubgroupBasis::new(vec![ctx.one()]);
        assert_eq!(comp_identity_check(&ctx, 2, &bad), Err(StructureError::MeetsSubfield { s: 2 }));
    }

    #[test]
    fn codim1_examples() {
        let ctx = make_field(2, 6).unwrap();
        let mut gens = ctx.subfield_basis(2).unwrap();
        gens.push(ctx.generator_t());
        let v = CanonicalSubspace::from_elems(&ctx, &gens);
        let mut oracle = PartitionOracle::new();
        assert_eq!(codim1_classify(&ctx, &mut oracle, &v).unwrap(), (true, true));
        let f8 = subfield_subspace(&ctx, 3).unwrap();
        let moved = crate::subspace::dilate(&ctx, &ctx.generator_t(), &f8).unwrap();
        assert_eq!(codim1_classify(&ctx, &mut oracle, &moved).unwrap(), (false, false));
    }

    #[test]
    fn embedding_in_f8() {
        let ctx = make_field(2, 3).unwrap();
        for v in enumerate_subspaces(&ctx, 2).unwrap() {
            let o = embedding_test(&ctx, &v).unwrap();
            assert!(o.direct && o.equations);
        }
        let ctx = make_field(2, 4).unwrap();
        let f4 = subfield_subspace(&ctx, 2).unwrap();
        let o = embedding_test(&ctx, &f4).unwrap();
        assert!(!o.equations);
    }

    #[test]
    fn v1j_matches_definition() {
        // v_{1j} = d_j d_1^{p(p^{r-j}-1)/(p-1)} / d_r^{p^{r-j}}
        for p in [2u64, 3, 5] {
            for r in 3..=7usize {
                for j in 2..r {
                    let e = p * (p.pow((r - j) as u32) - 1) / (p - 1);
                    let mut a = vec![0u64; r];
                    a[0] = e;
                    a[j - 1] = 1;
                    a[r - 1] = p.pow((r - j) as u32);
                    let want = crate::monoid::ExponentVector::from_u64(p as u32, &a);
                    assert_eq!(vij_exponents(p as u32, r, 1, j).unwrap().exponents, want);
                }
            }
        }
    }

    #[test]
    fn cubic_plus_quadratic_subfields() {
        let ctx = make_field(2, 6).unwrap();
        let mut gens = ctx.subfield_basis(3).unwrap();
        gens.extend(ctx.subfield_basis(2).unwrap());
        let v = CanonicalSubspace::from_elems(&ctx, &gens);
        let mut oracle = PartitionOracle::new();
        let c = rank4_classify(&ctx, &mut oracle, &v).unwrap();
        assert_eq!(c.theorem, Some(Partition(vec![3, 1])));
        assert!(c.agree);
    }

    #[test]
    fn example_has_partition_three_two() {
        let ctx = make_field(2, 6).unwrap();
        let v = rank5_example(&ctx).unwrap().unwrap();
        assert_eq!(crate::subspace::partition_of(&ctx, &v), Partition(vec![3, 2]));
    }

    #[test]
    fn ambient_helper() {
        assert_eq!(smallest_ambient(5, &[3]), 6);
        assert_eq!(smallest_ambient(5, &[2]), 6);
        assert_eq!(smallest_ambient(4, &[2, 3]), 6);
        assert_eq!(smallest_ambient(7, &[2]), 8);
        assert_eq!(smallest_ambient(3, &[]), 3);
    }
}
