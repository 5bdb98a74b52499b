//! Exponent vectors of invariant monomials `d_{1,r}^{a_1}⋯d_{r-1,r}^{a_{r-1}} t^{a_r}`.
//!
//! A vector is a solution when the monomial has weight zero:
//! `Σ_{i<r} a_i (p^r − p^{r−i}) = a_r (p^r − 1)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonoidError {
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(usize),
    #[error("no closed-form generating family for rank {0} (available for 3, 4, 5)")]
    UnsupportedRank(usize),
    #[error("coordinate {index} fails the divisibility chain; not a solution")]
    NotDivisible { index: usize },
    #[error("negative coordinate {index} after converting back")]
    Negative { index: usize },
    #[error("enumeration would need more than 128-bit intermediates")]
    Overflow,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector {
    p: u32,
    a: Vec<BigUint>,
}

impl ExponentVector {
    pub fn new(p: u32, a: Vec<BigUint>) -> Self {
        ExponentVector { p, a }
    }

    pub fn from_u64(p: u32, a: &[u64]) -> Self {
        ExponentVector { p, a: a.iter().map(|&x| BigUint::from(x)).collect() }
    }

    fn from_i64(p: u32, a: &[i64]) -> Self {
        let a = a
            .iter()
            .map(|&x| BigUint::from(u64::try_from(x).expect("family coordinates are non-negative")))
            .collect();
        ExponentVector { p, a }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> usize {
        self.a.len()
    }

    /// `a_1, …, a_r` (index 0 holds `a_1`).
    pub fn coords(&self) -> &[BigUint] {
        &self.a
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(Zero::is_zero)
    }

    pub fn max_coord(&self) -> BigUint {
        self.a.iter().max().cloned().unwrap_or_default()
    }

    /// Coordinatewise `self ≤ other`.
    pub fn le(&self, other: &ExponentVector) -> bool {
        self.a.iter().zip(&other.a).all(|(x, y)| x <= y)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.a.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Coordinates in the basis where the solution equation reads `Σ_{i<r} ã_i = ã_r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TildeVector(pub Vec<BigInt>);

impl TildeVector {
    pub fn from_i64(t: &[i64]) -> Self {
        TildeVector(t.iter().map(|&x| BigInt::from(x)).collect())
    }
}

impl fmt::Display for TildeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// `p^r − p^{r−i}`, the weight of `d_{i,r}`.
pub fn weight(p: u32, r: usize, i: usize) -> BigUint {
    let p = BigUint::from(p);
    p.pow(r as u32) - p.pow((r - i) as u32)
}

pub fn is_solution(v: &ExponentVector) -> bool {
    let r = v.r();
    if r < 2 {
        return v.is_zero();
    }
    let lhs: BigUint = (1..r).map(|i| &v.a[i - 1] * weight(v.p, r, i)).sum();
    let rhs = &v.a[r - 1] * (BigUint::from(v.p).pow(r as u32) - 1u32);
    lhs == rhs
}

/// `a_1 + ⋯ + a_{r−1} − a_r`.
pub fn height(v: &ExponentVector) -> BigInt {
    let r = v.r();
    if r == 0 {
        return BigInt::zero();
    }
    let s: BigUint = v.a[..r - 1].iter().sum();
    BigInt::from(s) - BigInt::from(v.a[r - 1].clone())
}

/// `ã_r = a_r/p`, `ã_{r−1} = (a_{r−1} − ã_r)/p`, `ã_i = (a_i + ã_{i+1})/p` for `i ≤ r−2`.
pub fn to_tilde(v: &ExponentVector) -> Result<TildeVector, MonoidError> {
    let r = v.r();
    if r < 2 {
        return Err(MonoidError::RankTooSmall(r));
    }
    let p = BigInt::from(v.p);
    let a: Vec<BigInt> = v.a.iter().cloned().map(BigInt::from).collect();
    let mut t = vec![BigInt::zero(); r];
    let div = |x: BigInt, index: usize| -> Result<BigInt, MonoidError> {
        let (q, rem) = x.div_rem(&p);
        if rem.is_zero() {
            Ok(q)
        } else {
            Err(MonoidError::NotDivisible { index })
        }
    };
    t[r - 1] = div(a[r - 1].clone(), r)?;
    t[r - 2] = div(&a[r - 2] - &t[r - 1], r - 1)?;
    for i in (0..r - 2).rev() {
        t[i] = div(&a[i] + &t[i + 1], i + 1)?;
    }
    Ok(TildeVector(t))
}

pub fn from_tilde(t: &TildeVector, p: u32) -> Result<ExponentVector, MonoidError> {
    let r = t.0.len();
    if r < 2 {
        return Err(MonoidError::RankTooSmall(r));
    }
    let pb = BigInt::from(p);
    let mut a = vec![BigInt::zero(); r];
    a[r - 1] = &pb * &t.0[r - 1];
    a[r - 2] = &pb * &t.0[r - 2] + &t.0[r - 1];
    for i in 0..r - 2 {
        a[i] = &pb * &t.0[i] - &t.0[i + 1];
    }
    let a = a
        .into_iter()
        .enumerate()
        .map(|(i, x)| x.to_biguint().ok_or(MonoidError::Negative { index: i + 1 }))
        .collect::<Result<_, _>>()?;
    Ok(ExponentVector { p, a })
}

/// The minimal nonzero solution supported on `{a_i, a_r}`.
pub fn axis_solution(p: u32, r: usize, i: usize) -> ExponentVector {
    assert!(1 <= i && i < r, "axis index {i} outside 1..{r}");
    let pb = BigUint::from(p);
    let top = pb.pow(r as u32) - 1u32;
    let lower = pb.pow(i as u32) - 1u32;
    let g = top.gcd(&lower);
    let mut a = vec![BigUint::zero(); r];
    a[i - 1] = &top / &g;
    a[r - 1] = pb.pow((r - i) as u32) * lower / g;
    ExponentVector { p, a }
}

/// Default enumeration bound: twice the largest coordinate of the expected
/// generators (closed-form family for ranks 3–5, axis solutions otherwise).
pub fn default_cap(p: u32, r: usize) -> Result<BigUint, MonoidError> {
    if r < 2 {
        return Err(MonoidError::RankTooSmall(r));
    }
    let max = match generating_family(p, r) {
        Ok(fam) => fam.iter().map(|g| g.vector.max_coord()).max().unwrap_or_default(),
        Err(_) => (1..r).map(|i| axis_solution(p, r, i).max_coord()).max().unwrap_or_default(),
    };
    Ok(max * 2u32)
}

#[derive(Clone, Debug)]
pub struct PrimitiveEnumeration {
    pub p: u32,
    pub r: usize,
    pub cap: BigUint,
    /// Sorted by `a_r`, then lexicographically.
    pub primitives: Vec<ExponentVector>,
    /// Number of solutions inspected (all coordinates ≤ cap, nonzero).
    pub solutions_seen: usize,
    pub warnings: Vec<String>,
}

/// Primitive solutions with every coordinate at most `cap`.
///
/// Solutions are graded by `a_r`; a solution is decomposable iff it dominates
/// a primitive of strictly smaller grade, since every nonzero solution has
/// `a_r > 0`.
pub fn enumerate_primitive(p: u32, r: usize, cap: &BigUint) -> Result<PrimitiveEnumeration, MonoidError> {
    if r < 2 {
        return Err(MonoidError::RankTooSmall(r));
    }
    let cap_u = cap.to_u64().ok_or(MonoidError::Overflow)?;
    let pr = (p as u128).checked_pow(r as u32).ok_or(MonoidError::Overflow)?;
    let weights: Vec<u128> = (1..r).map(|i| pr - (p as u128).pow((r - i) as u32)).collect();
    let wsum: u128 = weights.iter().sum();
    (cap_u as u128)
        .checked_mul(pr)
        .and_then(|x| x.checked_mul(r as u128))
        .ok_or(MonoidError::Overflow)?;

    let grades: Vec<Vec<Vec<u64>>> = (1..=cap_u)
        .into_par_iter()
        .map(|ar| {
            let target = ar as u128 * (pr - 1);
            let mut out = Vec::new();
            let mut cur = Vec::with_capacity(r);
            if target <= wsum * cap_u as u128 {
                fill(&weights, cap_u, target, &mut cur, &mut out);
            }
            for v in &mut out {
                v.push(ar);
            }
            out
        })
        .collect();

    let mut primitives: Vec<Vec<u64>> = Vec::new();
    let mut seen = 0usize;
    for grade in grades {
        seen += grade.len();
        let fresh: Vec<Vec<u64>> = grade
            .into_par_iter()
            .filter(|x| !primitives.iter().any(|y| y.iter().zip(x).all(|(a, b)| a <= b)))
            .collect();
        primitives.extend(fresh);
    }

    let mut warnings = Vec::new();
    let max_found = primitives.iter().flatten().copied().max().unwrap_or(0);
    if max_found.saturating_mul(2) > cap_u {
        warnings.push(format!(
            "largest primitive coordinate {max_found} exceeds half the cap {cap_u}; primitives beyond the cap may be missing"
        ));
    }
    if primitives.is_empty() {
        warnings.push(format!("no solutions with coordinates <= {cap_u}"));
    }
    Ok(PrimitiveEnumeration {
        p,
        r,
        cap: cap.clone(),
        primitives: primitives.iter().map(|v| ExponentVector::from_u64(p, v)).collect(),
        solutions_seen: seen,
        warnings,
    })
}

// chooses a_1..a_{r-1} in lexicographic order with Σ a_i w_i = target
fn fill(weights: &[u128], cap: u64, target: u128, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    let k = cur.len();
    let last = weights.len() - 1;
    if k == last {
        let w = weights[last];
        if target % w == 0 && target / w <= cap as u128 {
            let mut v = cur.clone();
            v.push((target / w) as u64);
            out.push(v);
        }
        return;
    }
    let rest: u128 = weights[k + 1..].iter().sum::<u128>() * cap as u128;
    let w = weights[k];
    let hi = (target / w).min(cap as u128) as u64;
    for x in 0..=hi {
        let remaining = target - x as u128 * w;
        if remaining > rest {
            continue;
        }
        cur.push(x);
        fill(weights, cap, remaining, cur, out);
        cur.pop();
    }
}

/// One member of a closed-form generating family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyMember {
    pub vector: ExponentVector,
    /// Sub-family names, joined with `+` when families overlap.
    pub tag: String,
}

/// The explicit minimal generating set for rank 3, 4 or 5, deduplicated and
/// sorted by `a_r` then lexicographically.
pub fn generating_family(p: u32, r: usize) -> Result<Vec<FamilyMember>, MonoidError> {
    let raw = match r {
        3 => family_rank3(p as i64),
        4 => family_rank4(p as i64),
        5 => family_rank5(p as i64),
        _ => return Err(MonoidError::UnsupportedRank(r)),
    };
    let mut merged: BTreeMap<(BigUint, ExponentVector), Vec<String>> = BTreeMap::new();
    for (tag, a) in raw {
        let v = ExponentVector::from_i64(p, &a);
        let tags = merged.entry((v.a[r - 1].clone(), v)).or_default();
        if !tags.contains(&tag) {
            tags.push(tag);
        }
    }
    Ok(merged
        .into_iter()
        .map(|((_, vector), tags)| FamilyMember { vector, tag: tags.join("+") })
        .collect())
}

pub fn family_cardinality(p: u32, r: usize) -> Result<usize, MonoidError> {
    generating_family(p, r).map(|f| f.len())
}

fn family_rank3(p: i64) -> Vec<(String, Vec<i64>)> {
    let mut out = vec![
        ("v_1".to_string(), vec![p * p + p + 1, 0, p * p]),
        ("v_12".to_string(), vec![p, 1, p]),
        ("v_2".to_string(), vec![0, p * p + p + 1, p * p + p]),
    ];
    for i in 1..p {
        out.push((format!("f_{i}"), vec![p - i, i * (p + 1) + 1, (i + 1) * p]));
    }
    out
}

fn family_rank4(p: i64) -> Vec<(String, Vec<i64>)> {
    let p2 = p * p;
    let p3 = p2 * p;
    let mut out = vec![("v_1".to_string(), vec![p3 + p2 + p + 1, 0, 0, p3])];
    for j in 0..=p {
        out.push(("L".to_string(), vec![(p + 1) * j, p2 + 1 - j * p, 0, p2]));
    }
    for i in 0..=p {
        for j in 0..=(p2 - i * p) {
            let c = p3 + (1 - i) * p2;
            out.push((
                "Delta".to_string(),
                vec![i, j, c + (1 - i - j) * (p + 1), c + (1 - i - j) * p],
            ));
        }
    }
    out
}

fn family_rank5(p: i64) -> Vec<(String, Vec<i64>)> {
    let p2 = p * p;
    let p3 = p2 * p;
    let p4 = p3 * p;
    let mut out = Vec::new();
    for i in 0..=p {
        for j in 0..=(p2 - i * p) {
            for k in 0..=(p3 - i * p2 - j * p) {
                let c = p4 + (1 - i) * p3 + (1 - i - j) * p2 + (1 - i - j - k) * p;
                out.push(("T1".to_string(), vec![i, j, k, c + (1 - i - j - k), c]));
            }
        }
    }
    for i in 0..=p {
        for j in 0..=(p * i) {
            for k in -p..=-1 {
                if i + j + (p + 1) * k < 0 {
                    continue;
                }
                out.push((
                    "T2".to_string(),
                    vec![p - i, p * i - j, p * j - k, 1 + i + j + k * (p + 1), p * (1 + i + j + k)],
                ));
            }
        }
    }
    for i in 0..p {
        for j in 0..(p - i) {
            out.push((
                "Delta1".to_string(),
                vec![j, i * (p + 1) + 1, p3 - j * (p2 + 1) - i * (p2 + p + 1), 0, p2 * (p - i - j)],
            ));
        }
    }
    for i in 1..=p {
        for j in 1..=(p + 1 - i) {
            out.push((
                "Delta2".to_string(),
                vec![p * i - j, (j - 1) * (p + 1) + i, p * (p + 1 - i - j) + 1, 0, p2],
            ));
        }
    }
    for i in 0..=p {
        for j in 0..=(p - i) {
            out.push((
                "Delta3".to_string(),
                vec![
                    i,
                    p4 + p2 + (p3 + 1) * (1 - i - j) + p * (1 - i),
                    0,
                    j,
                    p4 + p3 * (1 - i - j) + p * j,
                ],
            ));
        }
    }
    for i in 0..=(p2 + p) {
        out.push((
            "L1".to_string(),
            vec![i, 0, (p2 + p - i) * (p2 + 1) + 1, 0, (p2 + p + 1 - i) * p2],
        ));
    }
    for j in 0..=p2 {
        out.push(("L2".to_string(), vec![p3 + p2 + p - j * (p + 1), 1 + j * p, 0, 0, p3]));
    }
    out.push(("v_1".to_string(), vec![p4 + p3 + p2 + p + 1, 0, 0, 0, p4]));
    out
}

/// `true` iff `ã` satisfies `pã_i ≥ ã_{i+1}` (i ≤ r−2), `pã_{r−1} ≥ −ã_r`
/// and `ã_r > 0`, the image of `a ≥ 0, a ≠ 0`.
pub fn tilde_constraints_hold(t: &TildeVector, p: u32) -> bool {
    let r = t.0.len();
    if r < 2 {
        return false;
    }
    let p = BigInt::from(p);
    (0..r - 2).all(|i| &p * &t.0[i] >= t.0[i + 1])
        && &p * &t.0[r - 2] >= -t.0[r - 1].clone()
        && t.0[r - 1].is_positive()
}
