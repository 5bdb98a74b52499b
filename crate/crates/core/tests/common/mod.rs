//! Property checks shared by the `properties` and `acceptance` test targets.
//! Every runner is seeded, so failures reproduce exactly.

#![allow(dead_code)]

use finsub_core::dickson::{norm_poly, rank};
use finsub_core::monoid::{
    enumerate_primitive, from_tilde, generating_family, height, is_solution, to_tilde, ExponentVector,
};
use finsub_core::separating::{eval_invariant, separating_set};
use finsub_core::{dickson_eval, make_field, FieldCtx, FqElem, SubgroupBasis};
use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const SEED: [u8; 32] = *b"finsub-property-suite-seed-00001";

pub fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED))
}

fn fields() -> Vec<FieldCtx> {
    [(2, 3), (2, 4), (2, 6), (3, 3), (3, 4), (5, 3), (7, 2)]
        .into_iter()
        .map(|(p, n)| make_field(p, n).unwrap())
        .collect()
}

fn elem(ctx: &FieldCtx, raw: u64) -> FqElem {
    ctx.from_index(raw % ctx.order())
}

fn nonzero(ctx: &FieldCtx, raw: u64) -> FqElem {
    ctx.from_index(1 + raw % (ctx.order() - 1))
}

fn to_err<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

/// Ring axioms, inverses, and additivity of Frobenius.
pub fn field_axioms() -> Result<(), String> {
    let fs = fields();
    let strat = (0..fs.len(), any::<u64>(), any::<u64>(), any::<u64>());
    to_err(runner(512).run(&strat, |(k, x, y, z)| {
        let ctx = &fs[k];
        let (a, b, c) = (elem(ctx, x), elem(ctx, y), elem(ctx, z));
        prop_assert_eq!(ctx.mul(&a, &ctx.add(&b, &c)), ctx.add(&ctx.mul(&a, &b), &ctx.mul(&a, &c)));
        prop_assert_eq!(ctx.mul(&ctx.mul(&a, &b), &c), ctx.mul(&a, &ctx.mul(&b, &c)));
        prop_assert_eq!(ctx.add(&a, &ctx.neg(&a)), ctx.zero());
        if let Some(ai) = ctx.inv(&a) {
            prop_assert_eq!(ctx.mul(&a, &ai), ctx.one());
        } else {
            prop_assert!(a.is_zero());
        }
        let p = ctx.p() as u64;
        prop_assert_eq!(ctx.pow(&ctx.add(&a, &b), p), ctx.add(&ctx.pow(&a, p), &ctx.pow(&b, p)));
        prop_assert_eq!(ctx.frobenius(&a, ctx.n()), a);
        Ok(())
    }))
}

fn basis_strategy(nf: usize) -> impl Strategy<Value = (usize, usize, Vec<u64>)> {
    (0..nf, 1usize..=4).prop_flat_map(|(k, r)| (Just(k), Just(r), prop::collection::vec(any::<u64>(), r)))
}

fn independent(ctx: &FieldCtx, raws: &[u64]) -> Option<SubgroupBasis> {
    if raws.len() > ctx.n() {
        return None;
    }
    let b = SubgroupBasis::new(raws.iter().map(|&x| elem(ctx, x)).collect());
    (rank(ctx, &b) == raws.len()).then_some(b)
}

/// `d_{i,r}(αB) = α^{p^r − p^{r−i}} d_{i,r}(B)`, and the recursion matches `F_E`.
pub fn weight_covariance() -> Result<(), String> {
    let fs = fields();
    let strat = (basis_strategy(fs.len()), any::<u64>());
    to_err(runner(256).run(&strat, |((k, r, raws), a)| {
        let ctx = &fs[k];
        let Some(b) = independent(ctx, &raws) else { return Err(TestCaseError::reject("dependent")) };
        let alpha = nonzero(ctx, a);
        let d = dickson_eval(ctx, &b).unwrap();
        let scaled = SubgroupBasis::new(b.elems().iter().map(|x| ctx.mul(&alpha, x)).collect());
        let ds = dickson_eval(ctx, &scaled).unwrap();
        let p = ctx.p() as u64;
        for i in 1..=r {
            let w = p.pow(r as u32) - p.pow((r - i) as u32);
            prop_assert_eq!(ds.d(i as i64), ctx.mul(&ctx.pow(&alpha, w), &d.d(i as i64)));
        }
        prop_assert_eq!(norm_poly(ctx, &b).unwrap().dickson_vector(), d);
        Ok(())
    }))
}

/// `F_E(x + y) = F_E(x) + F_E(y)`, and `F_E` vanishes exactly on `E`.
pub fn norm_poly_additive() -> Result<(), String> {
    let fs = fields();
    let strat = (basis_strategy(fs.len()), any::<u64>(), any::<u64>(), prop::collection::vec(any::<bool>(), 4));
    to_err(runner(256).run(&strat, |((k, _r, raws), x, y, pick)| {
        let ctx = &fs[k];
        let Some(b) = independent(ctx, &raws) else { return Err(TestCaseError::reject("dependent")) };
        let f = norm_poly(ctx, &b).unwrap();
        let (x, y) = (elem(ctx, x), elem(ctx, y));
        prop_assert_eq!(f.eval(ctx, &ctx.add(&x, &y)), ctx.add(&f.eval(ctx, &x), &f.eval(ctx, &y)));
        let member = b
            .elems()
            .iter()
            .zip(&pick)
            .filter(|(_, &on)| on)
            .fold(ctx.zero(), |acc, (e, _)| ctx.add(&acc, e));
        prop_assert!(f.eval(ctx, &member).is_zero());
        Ok(())
    }))
}

/// Random invertible change of basis: a shuffled upper-unitriangular combination
/// scaled by nonzero constants.
fn change_basis(ctx: &FieldCtx, b: &SubgroupBasis, coeffs: &[u64], perm_seed: u64) -> SubgroupBasis {
    let p = ctx.p() as u64;
    let e = b.elems();
    let r = e.len();
    let mut out = Vec::with_capacity(r);
    for i in 0..r {
        let lead = 1 + coeffs[i * r + i] % (p - 1);
        let mut x = ctx.scale(&e[i], lead as u32);
        for j in i + 1..r {
            x = ctx.add(&x, &ctx.scale(&e[j], (coeffs[i * r + j] % p) as u32));
        }
        out.push(x);
    }
    let shift = (perm_seed as usize) % r;
    out.rotate_left(shift);
    SubgroupBasis::new(out)
}

/// Every separating invariant for r ∈ {2, 3, 4} is unchanged by dilation and by
/// a change of basis.
pub fn separating_invariance() -> Result<(), String> {
    let fs = fields();
    let strat = (0..fs.len(), 2usize..=4)
        .prop_flat_map(|(k, r)| {
            (Just(k), Just(r), prop::collection::vec(any::<u64>(), r), prop::collection::vec(any::<u64>(), r * r))
        })
        .prop_flat_map(|t| (Just(t), any::<u64>(), any::<u64>()));
    to_err(runner(192).run(&strat, |((k, r, raws, coeffs), a, s)| {
        let ctx = &fs[k];
        let Some(b) = independent(ctx, &raws) else { return Err(TestCaseError::reject("dependent")) };
        let alpha = nonzero(ctx, a);
        let scaled = SubgroupBasis::new(b.elems().iter().map(|x| ctx.mul(&alpha, x)).collect());
        let moved = change_basis(ctx, &b, &coeffs, s);
        for spec in separating_set(ctx.p(), r).unwrap() {
            let base = eval_invariant(ctx, &spec, &b).unwrap();
            prop_assert_eq!(&eval_invariant(ctx, &spec, &scaled).unwrap(), &base, "{} under dilation", spec.label);
            prop_assert_eq!(&eval_invariant(ctx, &spec, &moved).unwrap(), &base, "{} under basis change", spec.label);
        }
        Ok(())
    }))
}

/// Random non-negative combinations of family members.
fn combo_strategy() -> impl Strategy<Value = (u32, usize, Vec<u8>)> {
    (prop::sample::select(vec![2u32, 3, 5]), 3usize..=5)
        .prop_flat_map(|(p, r)| {
            let len = generating_family(p, r).unwrap().len();
            (Just(p), Just(r), prop::collection::vec(0u8..4, len))
        })
}

fn combine(p: u32, r: usize, mult: &[u8]) -> ExponentVector {
    let fam = generating_family(p, r).unwrap();
    let mut acc = vec![BigUint::from(0u32); r];
    for (m, c) in fam.iter().zip(mult) {
        for (x, y) in acc.iter_mut().zip(m.vector.coords()) {
            *x += y * BigUint::from(*c);
        }
    }
    ExponentVector::new(p, acc)
}

/// `from_tilde(to_tilde(v)) = v` on solutions, with `Σ_{i<r} ã_i = ã_r` and `ã_1 = height`.
pub fn tilde_round_trip() -> Result<(), String> {
    to_err(runner(256).run(&combo_strategy(), |(p, r, mult)| {
        let v = combine(p, r, &mult);
        prop_assert!(is_solution(&v));
        let t = to_tilde(&v).unwrap();
        let lower: BigInt = t.0[..r - 1].iter().sum();
        prop_assert_eq!(&lower, &t.0[r - 1]);
        prop_assert_eq!(&t.0[0], &height(&v));
        prop_assert_eq!(from_tilde(&t, p).unwrap(), v);
        Ok(())
    }))
}

/// All solutions of the weight equation with coordinates at most `cap`, by brute force.
fn all_solutions(p: u32, r: usize, cap: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![0u64; r];
    loop {
        let v = ExponentVector::from_u64(p, &cur);
        if !v.is_zero() && is_solution(&v) {
            out.push(cur.clone());
        }
        let mut k = 0;
        loop {
            if k == r {
                return out;
            }
            cur[k] += 1;
            if cur[k] <= cap {
                break;
            }
            cur[k] = 0;
            k += 1;
        }
    }
}

/// Height is additive and positive on nonzero solutions, so height 1 forces
/// primitivity. Checked against a brute-force decomposition search and the
/// enumerator's output.
pub fn height_one_primitive() -> Result<(), String> {
    let grids = [(2u32, 3usize, 14u64), (3, 3, 13), (2, 4, 12)];
    let data: Vec<(u32, Vec<Vec<u64>>, Vec<ExponentVector>)> = grids
        .iter()
        .map(|&(p, r, cap)| {
            let prim = enumerate_primitive(p, r, &BigUint::from(cap)).unwrap().primitives;
            (p, all_solutions(p, r, cap), prim)
        })
        .collect();
    let strat = (0..data.len(), any::<prop::sample::Index>());
    to_err(runner(256).run(&strat, |(g, idx)| {
        let (p, sols, prim) = &data[g];
        let s = idx.get(sols);
        let v = ExponentVector::from_u64(*p, s);
        let h = height(&v);
        prop_assert!(h >= BigInt::from(1));
        let decomposable = sols.iter().any(|w| w != s && w.iter().zip(s).all(|(a, b)| a <= b));
        prop_assert_eq!(decomposable, !prim.contains(&v));
        if h == BigInt::from(1) {
            prop_assert!(!decomposable, "{} has height 1 but splits", v);
        }
        Ok(())
    }))
}

pub fn property_suite() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        ("field axioms and Frobenius", field_axioms()),
        ("weight covariance of d_{i,r}", weight_covariance()),
        ("additivity of F_E", norm_poly_additive()),
        ("dilation and basis-change invariance", separating_invariance()),
        ("tilde round-trip", tilde_round_trip()),
        ("height 1 implies primitive", height_one_primitive()),
    ]
}
