//! Separating invariants `v_i`, `v_{ij}`, `u_{ij}` and exhaustive separation checks.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dickson::{dickson_eval, DicksonError, DicksonVector, SubgroupBasis};
use crate::field::{FieldCtx, FqElem};
use crate::monoid::{axis_solution, is_solution, ExponentVector};
use crate::subspace::{dilate, dilation_orbit_reps, SubspaceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeparatingError {
    #[error("index {i} outside 1..{r}")]
    IndexOutOfRange { i: usize, r: usize },
    #[error("indices must differ")]
    EqualIndices,
    #[error("gcd(r, i) = {g} does not divide j = {j}; no invariant with a_j = 1")]
    NoVij { g: usize, j: usize },
    #[error("u_ij needs gcd(r, i) = 2 and j odd (got gcd {g}, j = {j})")]
    NoUij { g: usize, j: usize },
    #[error("no separating set for rank {0} (available for 2..=11)")]
    UnsupportedRank(usize),
    #[error("rank {r} exceeds the field degree {n}")]
    RankTooLarge { r: usize, n: usize },
    #[error("invariant has rank {spec}, subgroup has rank {basis}")]
    RankMismatch { spec: usize, basis: usize },
    #[error(transparent)]
    Dickson(#[from] DicksonError),
    #[error(transparent)]
    Subspace(#[from] SubspaceError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InvariantKind {
    V { i: usize },
    Vij { i: usize, j: usize },
    Uij { i: usize, j: usize },
    Custom,
}

/// A weight-zero monomial `∏ d_{i,r}^{a_i} · d_{r,r}^{-a_r}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantSpec {
    pub kind: InvariantKind,
    pub exponents: ExponentVector,
    pub label: String,
}

impl InvariantSpec {
    pub fn custom(exponents: ExponentVector, label: impl Into<String>) -> Self {
        InvariantSpec { kind: InvariantKind::Custom, exponents, label: label.into() }
    }

    pub fn r(&self) -> usize {
        self.exponents.r()
    }
}

fn pair_label(prefix: &str, i: usize, j: usize) -> String {
    if i < 10 && j < 10 {
        format!("{prefix}_{i}{j}")
    } else {
        format!("{prefix}_{{{i},{j}}}")
    }
}

fn check_index(i: usize, r: usize) -> Result<(), SeparatingError> {
    if i == 0 || i >= r {
        Err(SeparatingError::IndexOutOfRange { i, r })
    } else {
        Ok(())
    }
}

/// `p^{r−i}(p^i − 1)`.
fn weight(p: &BigUint, r: usize, i: usize) -> BigUint {
    p.pow((r - i) as u32) * (p.pow(i as u32) - 1u32)
}

pub fn v_exponents(p: u32, r: usize, i: usize) -> Result<InvariantSpec, SeparatingError> {
    check_index(i, r)?;
    Ok(InvariantSpec {
        kind: InvariantKind::V { i },
        exponents: axis_solution(p, r, i),
        label: format!("v_{i}"),
    })
}

/// Least `b > 0` (and the matching `a > 0`) with `b(p^r − 1) − a·w_i = c·w_j`.
///
/// Solved directly with a modular inverse rather than by scanning `b`.
fn minimal_pair(p: u32, r: usize, i: usize, j: usize, c: u32) -> Option<(BigUint, BigUint)> {
    let pb = BigUint::from(p);
    let top = BigInt::from(pb.pow(r as u32) - 1u32);
    let wi = BigInt::from(weight(&pb, r, i));
    let rhs = BigInt::from(weight(&pb, r, j) * c);
    let g = top.gcd(&wi);
    if !(&rhs % &g).is_zero() {
        return None;
    }
    let modulus = &wi / &g;
    let unit = &top / &g;
    // b ≡ (rhs/g)·unit^{-1} (mod wi/g)
    let ext = unit.extended_gcd(&modulus);
    let mut b = ((&rhs / &g) * ext.x).mod_floor(&modulus);
    if b.is_zero() {
        b = modulus.clone();
    }
    // a grows with b, so the least admissible b also minimises a
    while &b * &top <= rhs {
        b += &modulus;
    }
    let a = (&b * &top - &rhs) / &wi;
    debug_assert!((&b * &top - &rhs) % &wi == BigInt::zero());
    Some((to_unsigned(a), to_unsigned(b)))
}

fn to_unsigned(x: BigInt) -> BigUint {
    match x.to_biguint() {
        Some(u) if x.sign() != Sign::Minus => u,
        _ => unreachable!("minimal pair is positive"),
    }
}

fn pair_spec(p: u32, r: usize, i: usize, j: usize, c: u32, a: BigUint, b: BigUint) -> ExponentVector {
    let mut v = vec![BigUint::zero(); r];
    v[i - 1] = a;
    v[j - 1] = BigUint::from(c);
    v[r - 1] = b;
    ExponentVector::new(p, v)
}

pub fn vij_exponents(p: u32, r: usize, i: usize, j: usize) -> Result<InvariantSpec, SeparatingError> {
    check_index(i, r)?;
    check_index(j, r)?;
    if i == j {
        return Err(SeparatingError::EqualIndices);
    }
    let g = r.gcd(&i);
    if j % g != 0 {
        return Err(SeparatingError::NoVij { g, j });
    }
    let (a, b) = minimal_pair(p, r, i, j, 1).expect("gcd condition guarantees a solution");
    Ok(InvariantSpec {
        kind: InvariantKind::Vij { i, j },
        exponents: pair_spec(p, r, i, j, 1, a, b),
        label: pair_label("v", i, j),
    })
}

pub fn uij_exponents(p: u32, r: usize, i: usize, j: usize) -> Result<InvariantSpec, SeparatingError> {
    check_index(i, r)?;
    check_index(j, r)?;
    if i == j {
        return Err(SeparatingError::EqualIndices);
    }
    let g = r.gcd(&i);
    if g != 2 || j % 2 == 0 {
        return Err(SeparatingError::NoUij { g, j });
    }
    let (a, b) = minimal_pair(p, r, i, j, p + 1).expect("gcd condition guarantees a solution");
    Ok(InvariantSpec {
        kind: InvariantKind::Uij { i, j },
        exponents: pair_spec(p, r, i, j, p + 1, a, b),
        label: pair_label("u", i, j),
    })
}

/// Order in which the index variables are eliminated for each supported rank.
pub fn elimination_order(r: usize) -> Result<Vec<usize>, SeparatingError> {
    let order = match r {
        4 => vec![1, 3, 2],
        6 => vec![1, 5, 2, 4, 3],
        8 => vec![1, 3, 5, 7, 2, 6, 4],
        9 => vec![1, 2, 4, 5, 7, 8, 3, 6],
        10 => vec![1, 3, 7, 9, 2, 4, 6, 8, 5],
        2 | 3 | 5 | 7 | 11 => (1..r).collect(),
        _ => return Err(SeparatingError::UnsupportedRank(r)),
    };
    Ok(order)
}

/// All `v_i`, then for each index `i` in elimination order and each later
/// index `j`: `v_{ij}` when `gcd(r,i) | j`, otherwise `u_{ij}`.
pub fn separating_set(p: u32, r: usize) -> Result<Vec<InvariantSpec>, SeparatingError> {
    let order = elimination_order(r)?;
    let mut out: Vec<InvariantSpec> = (1..r).map(|i| v_exponents(p, r, i)).collect::<Result<_, _>>()?;
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            let g = r.gcd(&i);
            let spec = if j % g == 0 {
                vij_exponents(p, r, i, j)?
            } else {
                uij_exponents(p, r, i, j)?
            };
            out.push(spec);
        }
    }
    debug_assert!(out.iter().all(|s| is_solution(&s.exponents)));
    Ok(out)
}

/// Value of the invariant at a subgroup with the given Dickson invariants.
pub fn eval_on_dickson(ctx: &FieldCtx, spec: &InvariantSpec, d: &DicksonVector) -> Result<FqElem, SeparatingError> {
    let r = spec.r();
    if d.rank() != r {
        return Err(SeparatingError::RankMismatch { spec: r, basis: d.rank() });
    }
    let a = spec.exponents.coords();
    let mut acc = ctx.one();
    for i in 1..r {
        if !a[i - 1].is_zero() {
            acc = ctx.mul(&acc, &ctx.pow_big(&d.d(i as i64), &a[i - 1]));
        }
    }
    let top_inv = ctx.inv(&d.top()).expect("d_{r,r} of an independent basis is nonzero");
    Ok(ctx.mul(&acc, &ctx.pow_big(&top_inv, &a[r - 1])))
}

pub fn eval_invariant(ctx: &FieldCtx, spec: &InvariantSpec, basis: &SubgroupBasis) -> Result<FqElem, SeparatingError> {
    if basis.len() != spec.r() {
        return Err(SeparatingError::RankMismatch { spec: spec.r(), basis: basis.len() });
    }
    let d = dickson_eval(ctx, basis)?;
    eval_on_dickson(ctx, spec, &d)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitFingerprint {
    /// Basis of the orbit representative, hex encoded.
    pub rep: Vec<String>,
    pub orbit_size: u64,
    /// Invariant values in the order of `SeparatingReport::invariants`.
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatingReport {
    pub p: u32,
    pub n: usize,
    pub r: usize,
    pub invariants: Vec<String>,
    pub orbit_count: usize,
    /// Index pairs into `fingerprints` with identical values.
    pub unseparated_pairs: Vec<(usize, usize)>,
    /// Orbits whose values changed under a dilation or a change of basis.
    pub invariance_failures: Vec<usize>,
    pub fingerprints: Vec<OrbitFingerprint>,
    pub note: String,
}

impl SeparatingReport {
    pub fn separated(&self) -> bool {
        self.unseparated_pairs.is_empty() && self.invariance_failures.is_empty()
    }
}

const IN_FIELD_NOTE: &str = "if alpha*V = W for subgroups V, W of GF(p^n) then alpha = w/v for nonzero v in V, w in W, \
so alpha lies in GF(p^n); orbits of the ambient multiplicative group therefore coincide with orbits over the algebraic closure";

/// Evaluates the separating set on every dilation orbit of rank-`r` subgroups.
pub fn separation_check(ctx: &FieldCtx, r: usize) -> Result<SeparatingReport, SeparatingError> {
    if r > ctx.n() {
        return Err(SeparatingError::RankTooLarge { r, n: ctx.n() });
    }
    let set = separating_set(ctx.p(), r)?;
    let table = dilation_orbit_reps(ctx, r)?;
    let g = ctx.primitive_element();
    let evaluate = |basis: &SubgroupBasis| -> Result<Vec<String>, SeparatingError> {
        let d = dickson_eval(ctx, basis)?;
        set.iter().map(|s| eval_on_dickson(ctx, s, &d).map(|v| ctx.to_hex(&v))).collect()
    };
    let rows: Vec<(OrbitFingerprint, bool)> = table
        .entries
        .par_iter()
        .map(|e| {
            let values = evaluate(&e.rep.basis())?;
            let moved = dilate(ctx, &g, &e.rep)?;
            // a different basis of the dilate: partial sums of the rows
            let mut acc = ctx.zero();
            let sums: Vec<FqElem> = moved
                .rows()
                .iter()
                .map(|row| {
                    acc = ctx.add(&acc, row);
                    acc
                })
                .collect();
            let stable = evaluate(&SubgroupBasis::new(sums))? == values;
            let fp = OrbitFingerprint {
                rep: e.rep.rows().iter().map(|x| ctx.to_hex(x)).collect(),
                orbit_size: e.orbit_size,
                values,
            };
            Ok((fp, stable))
        })
        .collect::<Result<_, SeparatingError>>()?;

    let mut by_value: HashMap<&[String], Vec<usize>> = HashMap::new();
    for (k, (fp, _)) in rows.iter().enumerate() {
        by_value.entry(&fp.values).or_default().push(k);
    }
    let mut unseparated = Vec::new();
    for ks in by_value.values() {
        for (x, &a) in ks.iter().enumerate() {
            for &b in &ks[x + 1..] {
                unseparated.push((a.min(b), a.max(b)));
            }
        }
    }
    unseparated.sort_unstable();
    let invariance_failures = rows.iter().enumerate().filter(|(_, (_, ok))| !ok).map(|(k, _)| k).collect();
    Ok(SeparatingReport {
        p: ctx.p(),
        n: ctx.n(),
        r,
        invariants: set.iter().map(|s| s.label.clone()).collect(),
        orbit_count: rows.len(),
        unseparated_pairs: unseparated,
        invariance_failures,
        fingerprints: rows.into_iter().map(|(fp, _)| fp).collect(),
        note: IN_FIELD_NOTE.to_string(),
    })
}

/// `true` iff no `b' < b` gives a positive solution of the pair equation.
/// Scans every smaller `b`; only practical for small parameters.
pub fn pair_is_minimal_by_scan(spec: &InvariantSpec) -> bool {
    let (i, j) = match spec.kind {
        InvariantKind::Vij { i, j } | InvariantKind::Uij { i, j } => (i, j),
        _ => return true,
    };
    let a = spec.exponents.coords();
    let r = spec.r();
    let pb = BigUint::from(spec.exponents.p());
    let top = pb.pow(r as u32) - 1u32;
    let wi = weight(&pb, r, i);
    let rhs = weight(&pb, r, j) * &a[j - 1];
    let mut b = BigUint::one();
    while b < a[r - 1] {
        let lhs = &b * &top;
        if lhs > rhs && ((&lhs - &rhs) % &wi).is_zero() {
            return false;
        }
        b += 1u32;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;

    fn ev(p: u32, a: &[u64]) -> ExponentVector {
        ExponentVector::from_u64(p, a)
    }

    #[test]
    fn v_examples() {
        for p in [2u64, 3, 5, 7] {
            let q = p as u32;
            assert_eq!(v_exponents(q, 2, 1).unwrap().exponents, ev(q, &[p + 1, p]));
            let (p2, p3, p4) = (p * p, p * p * p, p * p * p * p);
            assert_eq!(v_exponents(q, 5, 1).unwrap().exponents, ev(q, &[p4 + p3 + p2 + p + 1, 0, 0, 0, p4]));
            assert_eq!(v_exponents(q, 4, 2).unwrap().exponents, ev(q, &[0, p2 + 1, 0, p2]));
        }
        assert!(v_exponents(2, 4, 4).is_err());
    }

    #[test]
    fn vij_examples() {
        for p in [2u64, 3, 5] {
            let q = p as u32;
            assert_eq!(vij_exponents(q, 5, 1, 4).unwrap().exponents, ev(q, &[p, 0, 0, 1, p]));
            assert_eq!(vij_exponents(q, 4, 1, 3).unwrap().exponents, ev(q, &[p, 0, 1, p]));
            assert_eq!(vij_exponents(q, 3, 1, 2).unwrap().exponents, ev(q, &[p, 1, p]));
        }
        assert_eq!(vij_exponents(2, 4, 2, 3), Err(SeparatingError::NoVij { g: 2, j: 3 }));
    }

    #[test]
    fn uij_examples() {
        for p in [2u64, 3, 5] {
            let q = p as u32;
            assert_eq!(uij_exponents(q, 4, 2, 3).unwrap().exponents, ev(q, &[0, p * p, p + 1, p * p + p]));
        }
        assert!(is_solution(&uij_exponents(2, 6, 2, 3).unwrap().exponents));
        assert!(is_solution(&uij_exponents(3, 6, 4, 3).unwrap().exponents));
        assert!(uij_exponents(2, 6, 3, 1).is_err());
        assert!(uij_exponents(2, 6, 2, 4).is_err());
    }

    #[test]
    fn set_sizes() {
        assert_eq!(separating_set(2, 2).unwrap().len(), 1);
        assert_eq!(separating_set(2, 4).unwrap().len(), 6);
        assert_eq!(separating_set(3, 7).unwrap().len(), 21);
        let six: Vec<String> = separating_set(2, 6).unwrap().into_iter().map(|s| s.label).collect();
        for want in ["v_1", "v_5", "v_12", "v_15", "v_52", "v_53", "v_54", "v_24", "u_23", "u_43"] {
            assert!(six.contains(&want.to_string()), "{want}");
        }
        assert_eq!(six.len(), 15);
        assert!(separating_set(2, 12).is_err());
        let ten: Vec<String> = separating_set(2, 10).unwrap().into_iter().map(|s| s.label).collect();
        assert!(ten.contains(&"v_{1,9}".to_string()) || ten.contains(&"v_19".to_string()));
        assert!(ten.contains(&"u_85".to_string()));
    }

    #[test]
    fn minimality_by_scan() {
        for p in [2u32, 3] {
            for r in 2..=6 {
                for s in separating_set(p, r).unwrap() {
                    assert!(pair_is_minimal_by_scan(&s), "{} p={p} r={r}", s.label);
                }
            }
        }
    }

    #[test]
    fn rank_two_vanishing_on_f_p2() {
        let ctx = make_field(3, 4).unwrap();
        let v1 = v_exponents(3, 2, 1).unwrap();
        let f9 = SubgroupBasis::new(ctx.subfield_basis(2).unwrap());
        assert!(eval_invariant(&ctx, &v1, &f9).unwrap().is_zero());
        let line = SubgroupBasis::new(vec![ctx.one(), ctx.generator_t()]);
        assert!(!eval_invariant(&ctx, &v1, &line).unwrap().is_zero());
    }

    #[test]
    fn small_separation() {
        let ctx = make_field(2, 4).unwrap();
        let rep = separation_check(&ctx, 2).unwrap();
        assert!(rep.separated());
        assert_eq!(rep.orbit_count, 3);
    }
}
