//! Row reduction over F_p on coefficient vectors of field elements.

use crate::field::{FieldCtx, FqElem};

fn pivot_of(ctx: &FieldCtx, v: &FqElem) -> Option<usize> {
    ctx.coeffs(v).iter().position(|&c| c != 0)
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    (1..p).find(|&x| a * x % p == 1).expect("nonzero residue")
}

/// Reduced row-echelon form of the span; zero rows dropped, rows ordered by
/// ascending pivot column (column = coefficient of `t^j`).
pub fn echelon(ctx: &FieldCtx, vectors: &[FqElem]) -> Vec<FqElem> {
    let p = ctx.p();
    let mut rows: Vec<FqElem> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for v in vectors {
        let mut v = reduce_with(ctx, &rows, &pivots, v);
        let Some(col) = pivot_of(ctx, &v) else { continue };
        let lead = ctx.coeffs(&v)[col] as u32;
        v = ctx.scale(&v, inv_mod_p(lead, p));
        // clear the new pivot column from existing rows
        for row in rows.iter_mut() {
            let c = ctx.coeffs(row)[col] as u32;
            if c != 0 {
                *row = ctx.sub(row, &ctx.scale(&v, c));
            }
        }
        let pos = pivots.partition_point(|&q| q < col);
        pivots.insert(pos, col);
        rows.insert(pos, v);
    }
    rows
}

/// Pivot columns of rows produced by [`echelon`].
pub fn pivots(ctx: &FieldCtx, rows: &[FqElem]) -> Vec<usize> {
    rows.iter()
        .map(|r| pivot_of(ctx, r).expect("echelon rows are nonzero"))
        .collect()
}

/// Remainder of `v` after eliminating the pivot columns of an echelon basis.
pub fn reduce_with(ctx: &FieldCtx, rows: &[FqElem], pivots: &[usize], v: &FqElem) -> FqElem {
    let mut v = *v;
    for (row, &col) in rows.iter().zip(pivots) {
        let c = ctx.coeffs(&v)[col] as u32;
        if c != 0 {
            v = ctx.sub(&v, &ctx.scale(row, c));
        }
    }
    v
}
