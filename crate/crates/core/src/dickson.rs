//! Dickson invariants evaluated at subgroup bases.
//!
//! For a finite subgroup `E` with F_p-basis `(c_1, ..., c_r)` the polynomial
//! `F_E(t) = prod_{c in E} (t - c)` is additive:
//!
//! ```text
//! F_E(t) = t^{p^r} + sum_{i=0}^{r-1} d_{r-i,r}(E) t^{p^i}
//! ```
//!
//! [`norm_poly`] builds `F_E` from the full product over `E` and serves as the
//! ground truth. [`dickson_eval`] is the production path: it adjoins one basis
//! vector at a time using `d_{i,s+1} = d_{i,s}^p - d_{i-1,s} D_s(c_{s+1})^{p-1}`.

use thiserror::Error;

use crate::field::{FieldCtx, FqElem};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DicksonError {
    #[error("basis of length {claimed} spans a subgroup of rank {actual}")]
    DependentBasis { claimed: usize, actual: usize },
    #[error("empty basis")]
    EmptyBasis,
    #[error("product over the subgroup is not an additive polynomial")]
    NotAdditive,
    #[error("subgroup meets GF(p^{s}) nontrivially")]
    MeetsSubfield { s: usize },
    #[error("omega_s needs s >= 1")]
    ZeroShift,
}

/// An ordered list of field elements spanning a finite subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubgroupBasis {
    elems: Vec<FqElem>,
}

impl SubgroupBasis {
    pub fn new(elems: Vec<FqElem>) -> Self {
        SubgroupBasis { elems }
    }

    pub fn elems(&self) -> &[FqElem] {
        &self.elems
    }

    /// The rank claim, i.e. the number of basis elements.
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }
}

impl From<Vec<FqElem>> for SubgroupBasis {
    fn from(v: Vec<FqElem>) -> Self {
        SubgroupBasis::new(v)
    }
}

/// A monic p-polynomial `sum_i coeffs[i] t^{p^i}` with `coeffs[r] = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdditivePoly {
    coeffs: Vec<FqElem>,
}

impl AdditivePoly {
    /// Coefficient of `t^{p^i}`.
    pub fn coeff(&self, i: usize) -> FqElem {
        self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[FqElem] {
        &self.coeffs
    }

    /// r, so that the degree is p^r.
    pub fn p_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, ctx: &FieldCtx, x: &FqElem) -> FqElem {
        let mut acc = ctx.zero();
        let mut power = *x;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                power = ctx.pow(&power, ctx.p() as u64);
            }
            acc = ctx.add(&acc, &ctx.mul(c, &power));
        }
        acc
    }

    /// The Dickson vector read off the coefficients: `d_{r-i,r}` is the
    /// coefficient of `t^{p^i}`.
    pub fn dickson_vector(&self) -> DicksonVector {
        let r = self.p_degree();
        let values = (1..=r).map(|i| self.coeffs[r - i]).collect();
        DicksonVector::from_values(self.coeffs[r], values)
    }
}

/// `(d_{1,r}(E), ..., d_{r,r}(E))`.
///
/// Out-of-range indices follow the usual convention: `d_{0,r} = 1` and
/// `d_{i,r} = 0` for `i < 0` or `i > r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DicksonVector {
    one: FqElem,
    values: Vec<FqElem>,
}

impl DicksonVector {
    fn from_values(one: FqElem, values: Vec<FqElem>) -> Self {
        DicksonVector { one, values }
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[FqElem] {
        &self.values
    }

    /// `d_{i,r}` with the out-of-range convention applied.
    pub fn d(&self, i: i64) -> FqElem {
        if i == 0 {
            self.one
        } else if i < 0 || i as usize > self.values.len() {
            self.one.zero_like()
        } else {
            self.values[i as usize - 1]
        }
    }

    /// `d_{r,r}`.
    pub fn top(&self) -> FqElem {
        *self.values.last().expect("rank >= 1")
    }

    pub fn to_hex(&self, ctx: &FieldCtx) -> Vec<String> {
        self.values.iter().map(|v| ctx.to_hex(v)).collect()
    }
}

/// Elements of `Span_{F_p}{c_1, ..., c_r}`, each listed once.
pub fn subgroup_elements(ctx: &FieldCtx, basis: &SubgroupBasis) -> Vec<FqElem> {
    let mut out = vec![ctx.zero()];
    for c in basis.elems() {
        let mut seen: std::collections::HashSet<FqElem> = out.iter().copied().collect();
        if seen.contains(c) {
            continue;
        }
        let base = out.clone();
        for k in 1..ctx.p() {
            let kc = ctx.scale(c, k);
            for b in &base {
                let e = ctx.add(b, &kc);
                if seen.insert(e) {
                    out.push(e);
                }
            }
        }
    }
    out
}

/// F_p-rank of the span, by Gaussian elimination on coefficient vectors.
pub fn rank(ctx: &FieldCtx, basis: &SubgroupBasis) -> usize {
    crate::linalg::echelon(ctx, basis.elems()).len()
}

/// `F_E(t)` from the product over all of `E`.
pub fn norm_poly(ctx: &FieldCtx, basis: &SubgroupBasis) -> Result<AdditivePoly, DicksonError> {
    let r = basis.len();
    if r == 0 {
        return Err(DicksonError::EmptyBasis);
    }
    let actual = rank(ctx, basis);
    if actual != r {
        return Err(DicksonError::DependentBasis { claimed: r, actual });
    }
    let elems = subgroup_elements(ctx, basis);
    // dense product, ascending degree
    let mut poly = vec![ctx.one()];
    for c in &elems {
        let neg_c = ctx.neg(c);
        let mut next = vec![ctx.zero(); poly.len() + 1];
        for (k, a) in poly.iter().enumerate() {
            next[k + 1] = ctx.add(&next[k + 1], a);
            next[k] = ctx.add(&next[k], &ctx.mul(a, &neg_c));
        }
        poly = next;
    }
    let p = ctx.p() as usize;
    let mut coeffs = Vec::with_capacity(r + 1);
    let mut next_power = 1usize;
    for (deg, c) in poly.iter().enumerate() {
        if deg == next_power {
            coeffs.push(*c);
            next_power *= p;
        } else if !c.is_zero() {
            return Err(DicksonError::NotAdditive);
        }
    }
    debug_assert_eq!(coeffs.len(), r + 1);
    Ok(AdditivePoly { coeffs })
}

/// Dickson invariants by the column-by-column recursion.
pub fn dickson_eval(ctx: &FieldCtx, basis: &SubgroupBasis) -> Result<DicksonVector, DicksonError> {
    let r = basis.len();
    if r == 0 {
        return Err(DicksonError::EmptyBasis);
    }
    let p = ctx.p() as u64;
    // stage s: d[i] = d_{i,s}, i = 0..=s, d[0] = 1
    let mut d = vec![ctx.one()];
    for c in basis.elems() {
        let s = d.len() - 1;
        // D_s(c) = sum_{i=0}^{s} d_{s-i,s} c^{p^i}
        let mut value = ctx.zero();
        let mut power = *c;
        for i in 0..=s {
            if i > 0 {
                power = ctx.pow(&power, p);
            }
            value = ctx.add(&value, &ctx.mul(&d[s - i], &power));
        }
        let h = ctx.pow(&value, p - 1);
        let mut next = Vec::with_capacity(s + 2);
        next.push(ctx.one());
        for i in 1..=s + 1 {
            let lead = if i <= s { ctx.pow(&d[i], p) } else { ctx.zero() };
            next.push(ctx.sub(&lead, &ctx.mul(&d[i - 1], &h)));
        }
        d = next;
    }
    if d[r].is_zero() {
        return Err(DicksonError::DependentBasis { claimed: r, actual: rank(ctx, basis) });
    }
    let one = d[0];
    Ok(DicksonVector::from_values(one, d.split_off(1)))
}

/// Convenience wrapper around [`norm_poly`] returning its Dickson vector.
pub fn dickson_from_product(
    ctx: &FieldCtx,
    basis: &SubgroupBasis,
) -> Result<DicksonVector, DicksonError> {
    Ok(norm_poly(ctx, basis)?.dickson_vector())
}

/// `t -> t^{p^s} - t`.
pub fn omega(ctx: &FieldCtx, s: usize, x: &FqElem) -> FqElem {
    ctx.sub(&ctx.frobenius(x, s), x)
}

/// Applies `omega_s` to every basis vector of a subgroup meeting GF(p^s) trivially.
pub fn omega_map(
    ctx: &FieldCtx,
    s: usize,
    basis: &SubgroupBasis,
) -> Result<SubgroupBasis, DicksonError> {
    if s == 0 {
        return Err(DicksonError::ZeroShift);
    }
    let meets = subgroup_elements(ctx, basis)
        .iter()
        .any(|e| !e.is_zero() && ctx.in_subfield(e, s));
    if meets {
        return Err(DicksonError::MeetsSubfield { s });
    }
    Ok(SubgroupBasis::new(
        basis.elems().iter().map(|c| omega(ctx, s, c)).collect(),
    ))
}
