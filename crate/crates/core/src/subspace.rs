//! Subgroups of GF(p^n) as F_p-subspaces: enumeration, dilation orbits,
//! stabilisers and the partition of a subgroup into dilated subfields.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dickson::SubgroupBasis;
use crate::field::{FieldCtx, FieldError, FqElem};
use crate::linalg;

/// Enumeration refuses to materialise more subspaces than this.
pub const MAX_SUBSPACES: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubspaceError {
    #[error("rank {r} out of range 1..={n}")]
    RankOutOfRange { r: usize, n: usize },
    #[error("{count} subspaces exceed the enumeration limit {MAX_SUBSPACES}")]
    TooMany { count: BigUint },
    #[error("cannot dilate by zero")]
    ZeroDilation,
    #[error("the zero subspace has no stabiliser order")]
    ZeroSubspace,
    #[error("stabiliser of size {size} is not a subfield")]
    StabiliserNotSubfield { size: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A subgroup in reduced row-echelon form over F_p.
///
/// Rows are coefficient vectors in the ambient power basis; two subgroups are
/// equal iff their canonical forms are identical.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalSubspace {
    rows: Vec<FqElem>,
    pivots: Vec<usize>,
}

impl CanonicalSubspace {
    pub fn from_elems(ctx: &FieldCtx, elems: &[FqElem]) -> Self {
        let rows = linalg::echelon(ctx, elems);
        let pivots = linalg::pivots(ctx, &rows);
        CanonicalSubspace { rows, pivots }
    }

    pub fn from_basis(ctx: &FieldCtx, basis: &SubgroupBasis) -> Self {
        Self::from_elems(ctx, basis.elems())
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[FqElem] {
        &self.rows
    }

    pub fn basis(&self) -> SubgroupBasis {
        SubgroupBasis::new(self.rows.clone())
    }

    pub fn contains(&self, ctx: &FieldCtx, v: &FqElem) -> bool {
        linalg::reduce_with(ctx, &self.rows, &self.pivots, v).is_zero()
    }

    pub fn contains_subspace(&self, ctx: &FieldCtx, other: &CanonicalSubspace) -> bool {
        other.rows.iter().all(|v| self.contains(ctx, v))
    }

    /// Every element, listed once.
    pub fn elements(&self, ctx: &FieldCtx) -> Vec<FqElem> {
        crate::dickson::subgroup_elements(ctx, &self.basis())
    }

    /// Rows encoded as base-p integers; this is also the ordering key.
    pub fn row_indices(&self, ctx: &FieldCtx) -> Vec<u64> {
        self.rows.iter().map(|r| ctx.index(r)).collect()
    }
}

/// Weakly decreasing positive parts; compared lexicographically from the left.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(pub Vec<u32>);

impl Partition {
    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn ones(r: usize) -> Self {
        Partition(vec![1; r])
    }

    fn prepend(&self, s: u32) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(s);
        v.extend_from_slice(&self.0);
        Partition(v)
    }

    fn insert_sorted(&self, s: u32) -> Self {
        let mut v = self.0.clone();
        let pos = v.partition_point(|&x| x >= s);
        v.insert(pos, s);
        Partition(v)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// `[n choose r]_p`.
pub fn gaussian_binomial(n: usize, r: usize, p: u32) -> BigUint {
    if r > n {
        return BigUint::from(0u32);
    }
    let p = BigUint::from(p);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..r {
        num *= p.pow((n - i) as u32) - 1u32;
        den *= p.pow((r - i) as u32) - 1u32;
    }
    num / den
}

/// All rank-`r` subgroups, one canonical form each, generated from pivot
/// patterns of reduced row-echelon matrices.
pub fn enumerate_subspaces(ctx: &FieldCtx, r: usize) -> Result<Vec<CanonicalSubspace>, SubspaceError> {
    let n = ctx.n();
    if r == 0 || r > n {
        return Err(SubspaceError::RankOutOfRange { r, n });
    }
    let count = gaussian_binomial(n, r, ctx.p());
    if count > BigUint::from(MAX_SUBSPACES) {
        return Err(SubspaceError::TooMany { count });
    }
    let mut out = Vec::with_capacity(count.to_usize().unwrap_or(0));
    let p = ctx.p() as u64;
    for pivots in combinations(n, r) {
        // free slots: (row, column) with column past the row's pivot and not a pivot
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(row, &pc)| {
                let pivots = &pivots;
                (pc + 1..n).filter(move |c| !pivots.contains(c)).map(move |c| (row, c))
            })
            .collect();
        let combos = p.pow(free.len() as u32);
        for mut code in 0..combos {
            let mut mat = vec![vec![0i64; n]; r];
            for (row, &pc) in pivots.iter().enumerate() {
                mat[row][pc] = 1;
            }
            for &(row, col) in &free {
                mat[row][col] = (code % p) as i64;
                code /= p;
            }
            let rows: Vec<FqElem> = mat.iter().map(|c| ctx.from_coeffs(c)).collect::<Result<_, _>>()?;
            out.push(CanonicalSubspace { rows, pivots: pivots.clone() });
        }
    }
    Ok(out)
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < r - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    out
}

/// Canonical form of `alpha * V`.
pub fn dilate(
    ctx: &FieldCtx,
    alpha: &FqElem,
    v: &CanonicalSubspace,
) -> Result<CanonicalSubspace, SubspaceError> {
    if alpha.is_zero() {
        return Err(SubspaceError::ZeroDilation);
    }
    let scaled: Vec<FqElem> = v.rows.iter().map(|r| ctx.mul(alpha, r)).collect();
    Ok(CanonicalSubspace::from_elems(ctx, &scaled))
}

/// One F^x-orbit of rank-`r` subgroups.
#[derive(Clone, Debug)]
pub struct OrbitEntry {
    /// Lexicographically least member (by row indices).
    pub rep: CanonicalSubspace,
    pub orbit_size: u64,
    pub stabilizer_q: u64,
}

#[derive(Clone, Debug)]
pub struct OrbitTable {
    pub r: usize,
    pub entries: Vec<OrbitEntry>,
}

impl OrbitTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_subspaces(&self) -> u64 {
        self.entries.iter().map(|e| e.orbit_size).sum()
    }
}

/// Orbit representatives of the dilation action on rank-`r` subgroups.
pub fn dilation_orbit_reps(ctx: &FieldCtx, r: usize) -> Result<OrbitTable, SubspaceError> {
    let all = enumerate_subspaces(ctx, r)?;
    let g = ctx.primitive_element();
    let mut seen: HashSet<CanonicalSubspace> = HashSet::with_capacity(all.len());
    let mut entries = Vec::new();
    for v in all {
        if seen.contains(&v) {
            continue;
        }
        let mut members = vec![v.clone()];
        let mut w = dilate(ctx, &g, &v)?;
        while w != v {
            members.push(w.clone());
            w = dilate(ctx, &g, &w)?;
        }
        let orbit_size = members.len() as u64;
        let rep = members
            .iter()
            .min_by_key(|m| m.row_indices(ctx))
            .expect("orbit is nonempty")
            .clone();
        seen.extend(members);
        let stabilizer_q = (ctx.order() - 1) / orbit_size + 1;
        entries.push(OrbitEntry { rep, orbit_size, stabilizer_q });
    }
    entries.sort_by_cached_key(|e| e.rep.row_indices(ctx));
    Ok(OrbitTable { r, entries })
}

/// `q` such that `{alpha : alpha V = V} ∪ {0} = GF(q)`.
pub fn stabilizer_order(ctx: &FieldCtx, v: &CanonicalSubspace) -> Result<u64, SubspaceError> {
    let first = *v.rows.first().ok_or(SubspaceError::ZeroSubspace)?;
    let first_inv = ctx.inv(&first).expect("echelon rows are nonzero");
    // alpha * first lies in V, so the stabiliser sits inside first^{-1} V
    let mut stab: Vec<FqElem> = v
        .elements(ctx)
        .into_iter()
        .filter(|w| !w.is_zero())
        .map(|w| ctx.mul(&w, &first_inv))
        .filter(|alpha| v.rows.iter().all(|row| v.contains(ctx, &ctx.mul(alpha, row))))
        .collect();
    stab.push(ctx.zero());
    let size = stab.len() as u64;
    let p = ctx.p() as u64;
    let mut s = 0usize;
    let mut q = 1u64;
    while q < size {
        q *= p;
        s += 1;
    }
    if q != size || ctx.n() % s != 0 {
        return Err(SubspaceError::StabiliserNotSubfield { size });
    }
    stab.sort_by_key(|e| ctx.index(e));
    if stab != ctx.subfield_elements(s)? {
        return Err(SubspaceError::StabiliserNotSubfield { size });
    }
    Ok(q)
}

/// All rank-`s` subgroups `U ⊆ V` of the form `alpha * GF(p^s)`, with one
/// witness `alpha` each, sorted by canonical form.
pub fn dilated_subfields_in(
    ctx: &FieldCtx,
    v: &CanonicalSubspace,
    s: usize,
) -> Vec<(FqElem, CanonicalSubspace)> {
    if s == 0 || s > v.rank() || ctx.n() % s != 0 {
        return Vec::new();
    }
    let field_basis = ctx.subfield_basis(s).expect("s divides n");
    let mut found: HashMap<CanonicalSubspace, FqElem> = HashMap::new();
    let mut order = Vec::new();
    for x in v.elements(ctx) {
        if x.is_zero() {
            continue;
        }
        let span: Vec<FqElem> = field_basis.iter().map(|b| ctx.mul(&x, b)).collect();
        if !span.iter().all(|y| v.contains(ctx, y)) {
            continue;
        }
        let u = CanonicalSubspace::from_elems(ctx, &span);
        if !found.contains_key(&u) {
            found.insert(u.clone(), x);
            order.push(u);
        }
    }
    let mut out: Vec<(FqElem, CanonicalSubspace)> =
        order.into_iter().map(|u| (found[&u], u)).collect();
    out.sort_by_cached_key(|(_, u)| u.row_indices(ctx));
    out
}

/// Every F_p-complement of `u` inside `v` (`u ⊆ v` assumed).
pub fn complements(
    ctx: &FieldCtx,
    v: &CanonicalSubspace,
    u: &CanonicalSubspace,
) -> Vec<CanonicalSubspace> {
    // extend a basis of u to one of v
    let mut span = u.rows.clone();
    let mut extra = Vec::new();
    for row in &v.rows {
        let mut trial = span.clone();
        trial.push(*row);
        if linalg::echelon(ctx, &trial).len() > span.len() {
            span.push(*row);
            extra.push(*row);
        }
    }
    let k = extra.len();
    if k == 0 {
        return vec![CanonicalSubspace { rows: Vec::new(), pivots: Vec::new() }];
    }
    let s = u.rank();
    let p = ctx.p() as u64;
    let total = p.pow((k * s) as u32);
    let mut out = Vec::with_capacity(total as usize);
    for mut code in 0..total {
        let shifted: Vec<FqElem> = extra
            .iter()
            .map(|c| {
                let mut x = *c;
                for ub in &u.rows {
                    let lam = (code % p) as u32;
                    code /= p;
                    if lam != 0 {
                        x = ctx.add(&x, &ctx.scale(ub, lam));
                    }
                }
                x
            })
            .collect();
        out.push(CanonicalSubspace::from_elems(ctx, &shifted));
    }
    out
}

/// Memoised partition search keyed on canonical form.
#[derive(Default)]
pub struct PartitionOracle {
    best: HashMap<CanonicalSubspace, Partition>,
    realized: HashMap<CanonicalSubspace, BTreeSet<Partition>>,
}

impl PartitionOracle {
    pub fn new() -> Self {
        Self::default()
    }

    /// The lexicographically greatest decomposition type `λ(V)`.
    ///
    /// The first part of any decomposition is the rank of some dilated subfield
    /// inside `V`, and every dilated subfield is a direct summand, so the
    /// leading part is the largest `s` with `dilated_subfields_in(V, s)`
    /// nonempty. The rest is the best partition over all summands of that rank
    /// and all of their complements.
    pub fn partition_of(&mut self, ctx: &FieldCtx, v: &CanonicalSubspace) -> Partition {
        let r = v.rank();
        if r <= 1 {
            return Partition(vec![1; r]);
        }
        if let Some(hit) = self.best.get(v) {
            return hit.clone();
        }
        let mut result = None;
        for s in (2..=r).rev() {
            let summands = dilated_subfields_in(ctx, v, s);
            if summands.is_empty() {
                continue;
            }
            let mut best_rest: Option<Partition> = None;
            for (_, u) in &summands {
                for w in complements(ctx, v, u) {
                    let rest = self.partition_of(ctx, &w);
                    if best_rest.as_ref().is_none_or(|b| rest > *b) {
                        best_rest = Some(rest);
                    }
                }
            }
            result = Some(best_rest.expect("at least one complement").prepend(s as u32));
            break;
        }
        // no dilated subfield of rank >= 2 inside V, hence none inside any W ⊆ V
        let result = result.unwrap_or_else(|| Partition::ones(r));
        self.best.insert(v.clone(), result.clone());
        result
    }

    /// Every partition realised by some decomposition of `V` into dilated subfields.
    pub fn realized_partitions(&mut self, ctx: &FieldCtx, v: &CanonicalSubspace) -> BTreeSet<Partition> {
        let r = v.rank();
        if r == 0 {
            return BTreeSet::from([Partition(Vec::new())]);
        }
        if let Some(hit) = self.realized.get(v) {
            return hit.clone();
        }
        let mut out = BTreeSet::new();
        for s in 1..=r {
            for (_, u) in dilated_subfields_in(ctx, v, s) {
                for w in complements(ctx, v, &u) {
                    for rest in self.realized_partitions(ctx, &w) {
                        out.insert(rest.insert_sorted(s as u32));
                    }
                }
            }
        }
        self.realized.insert(v.clone(), out.clone());
        out
    }
}

/// `λ(V)` with a fresh memo table.
pub fn partition_of(ctx: &FieldCtx, v: &CanonicalSubspace) -> Partition {
    PartitionOracle::new().partition_of(ctx, v)
}

/// `GF(p^s)` as a subgroup of the ambient field.
pub fn subfield_subspace(ctx: &FieldCtx, s: usize) -> Result<CanonicalSubspace, SubspaceError> {
    Ok(CanonicalSubspace::from_elems(ctx, &ctx.subfield_basis(s)?))
}
