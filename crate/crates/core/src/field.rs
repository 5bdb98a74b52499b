//! Exact arithmetic in GF(p^n).
//!
//! A [`FieldCtx`] fixes the characteristic `p`, the degree `n` and a monic
//! irreducible modulus; every [`FqElem`] is a dense coefficient vector in the
//! power basis `1, t, ..., t^{n-1}` and remembers which context built it.
//!
//! The modulus is the smallest monic irreducible polynomial of degree `n` when
//! coefficient vectors are read as base-`p` integers (`c_0 + c_1 p + ...`,
//! leading coefficient excluded). Subfields are never realised through nested
//! moduli; they are located as Frobenius fixed points instead.

use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 16;

static NEXT_CTX_ID: AtomicU32 = AtomicU32::new(1);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("characteristic {0} is too large (coefficients are stored as bytes)")]
    CharacteristicTooLarge(u64),
    #[error("extension degree must be positive")]
    ZeroDegree,
    #[error("extension degree {0} exceeds the supported maximum {MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("field order {p}^{n} does not fit in 64 bits")]
    OrderTooLarge { p: u32, n: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different field contexts")]
    ContextMismatch,
    #[error("{m} does not divide the extension degree {n}")]
    NotADivisor { m: usize, n: usize },
    #[error("malformed element encoding {0:?}")]
    BadEncoding(String),
}

/// The four basic operations exposed by [`FieldCtx::element_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// An element of GF(p^n), stored as `n` residues mod `p` in ascending degree.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElem {
    ctx: u32,
    coeffs: [u8; MAX_DEGREE],
}

impl FqElem {
    /// Coefficients in ascending degree; entries past the field degree are zero.
    pub fn raw_coeffs(&self) -> &[u8; MAX_DEGREE] {
        &self.coeffs
    }

    pub fn ctx_id(&self) -> u32 {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The zero element of the same context.
    pub fn zero_like(&self) -> FqElem {
        FqElem { ctx: self.ctx, coeffs: [0; MAX_DEGREE] }
    }
}

impl fmt::Debug for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.coeffs.iter().rposition(|&c| c != 0).unwrap_or(0);
        write!(f, "Fq[")?;
        for (i, c) in self.coeffs[..=last].iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// An explicit model of GF(p^n).
#[derive(Debug)]
pub struct FieldCtx {
    id: u32,
    p: u32,
    n: usize,
    /// Monic modulus, ascending degree, length `n + 1`.
    modulus: Vec<u32>,
    order: u64,
    primitive: FqElem,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors by trial division.
pub fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Builds GF(p^n) with the smallest monic irreducible modulus.
pub fn make_field(p: u64, n: usize) -> Result<FieldCtx, FieldError> {
    FieldCtx::new(p, n)
}

impl FieldCtx {
    pub fn new(p: u64, n: usize) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p > 251 {
            return Err(FieldError::CharacteristicTooLarge(p));
        }
        if n == 0 {
            return Err(FieldError::ZeroDegree);
        }
        if n > MAX_DEGREE {
            return Err(FieldError::DegreeTooLarge(n));
        }
        let p = p as u32;
        let order = (p as u64)
            .checked_pow(n as u32)
            .ok_or(FieldError::OrderTooLarge { p, n })?;
        let modulus = smallest_irreducible(p, n);
        let id = NEXT_CTX_ID.fetch_add(1, Ordering::Relaxed);
        let mut ctx = FieldCtx {
            id,
            p,
            n,
            modulus,
            order,
            primitive: FqElem { ctx: id, coeffs: [0; MAX_DEGREE] },
        };
        ctx.primitive = ctx.find_primitive();
        Ok(ctx)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    /// Modulus coefficients in ascending degree (monic, length `n + 1`).
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// p^n.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// A generator of the multiplicative group.
    pub fn primitive_element(&self) -> FqElem {
        self.primitive
    }

    pub fn zero(&self) -> FqElem {
        FqElem { ctx: self.id, coeffs: [0; MAX_DEGREE] }
    }

    pub fn one(&self) -> FqElem {
        self.from_int(1)
    }

    /// The image of an integer in the prime field.
    pub fn from_int(&self, k: i64) -> FqElem {
        let mut e = self.zero();
        e.coeffs[0] = k.rem_euclid(self.p as i64) as u8;
        e
    }

    /// The class of `t` modulo the modulus.
    pub fn generator_t(&self) -> FqElem {
        if self.n == 1 {
            // t reduces to -modulus[0]
            return self.from_int(-(self.modulus[0] as i64));
        }
        let mut e = self.zero();
        e.coeffs[1] = 1;
        e
    }

    /// Builds an element from ascending coefficients; extra coefficients must
    /// be absent and all entries are reduced mod p.
    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<FqElem, FieldError> {
        if coeffs.len() > self.n {
            return Err(FieldError::BadEncoding(format!("{coeffs:?}")));
        }
        let mut e = self.zero();
        for (slot, &c) in e.coeffs.iter_mut().zip(coeffs) {
            *slot = c.rem_euclid(self.p as i64) as u8;
        }
        Ok(e)
    }

    pub fn coeffs<'a>(&self, a: &'a FqElem) -> &'a [u8] {
        &a.coeffs[..self.n]
    }

    /// The base-p integer `sum c_i p^i`.
    pub fn index(&self, a: &FqElem) -> u64 {
        self.coeffs(a)
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * self.p as u64 + c as u64)
    }

    pub fn from_index(&self, mut idx: u64) -> FqElem {
        let mut e = self.zero();
        for slot in e.coeffs.iter_mut().take(self.n) {
            *slot = (idx % self.p as u64) as u8;
            idx /= self.p as u64;
        }
        e
    }

    /// Every element in index order. Only sensible for small fields.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.order).map(move |i| self.from_index(i))
    }

    /// Little-endian base-p digit string, one hex digit per coefficient.
    pub fn to_hex(&self, a: &FqElem) -> String {
        self.coeffs(a)
            .iter()
            .map(|&c| char::from_digit(c as u32, 16).expect("p <= 16 for hex output"))
            .collect()
    }

    pub fn parse_hex(&self, s: &str) -> Result<FqElem, FieldError> {
        let s = s.trim();
        if s.is_empty() || s.chars().count() > self.n {
            return Err(FieldError::BadEncoding(s.to_string()));
        }
        let mut e = self.zero();
        for (slot, ch) in e.coeffs.iter_mut().zip(s.chars()) {
            let d = ch
                .to_digit(16)
                .filter(|&d| d < self.p)
                .ok_or_else(|| FieldError::BadEncoding(s.to_string()))?;
            *slot = d as u8;
        }
        Ok(e)
    }

    fn check(&self, a: &FqElem) -> Result<(), FieldError> {
        if a.ctx == self.id {
            Ok(())
        } else {
            Err(FieldError::ContextMismatch)
        }
    }

    /// Checked arithmetic: verifies both operands belong to this context.
    pub fn element_arith(&self, op: ArithOp, a: &FqElem, b: &FqElem) -> Result<FqElem, FieldError> {
        self.check(a)?;
        self.check(b)?;
        Ok(match op {
            ArithOp::Add => self.add(a, b),
            ArithOp::Sub => self.sub(a, b),
            ArithOp::Mul => self.mul(a, b),
            ArithOp::Div => self.div(a, b)?,
        })
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> FqElem {
        debug_assert!(a.ctx == self.id && b.ctx == self.id);
        let p = self.p as u16;
        let mut e = self.zero();
        for i in 0..self.n {
            e.coeffs[i] = ((a.coeffs[i] as u16 + b.coeffs[i] as u16) % p) as u8;
        }
        e
    }

    pub fn neg(&self, a: &FqElem) -> FqElem {
        let p = self.p as u16;
        let mut e = self.zero();
        for i in 0..self.n {
            e.coeffs[i] = ((p - a.coeffs[i] as u16) % p) as u8;
        }
        e
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> FqElem {
        self.add(a, &self.neg(b))
    }

    /// Multiplies by the prime-field scalar `k`.
    pub fn scale(&self, a: &FqElem, k: u32) -> FqElem {
        let p = self.p;
        let k = k % p;
        let mut e = self.zero();
        for i in 0..self.n {
            e.coeffs[i] = ((a.coeffs[i] as u32 * k) % p) as u8;
        }
        e
    }

    pub fn mul(&self, a: &FqElem, b: &FqElem) -> FqElem {
        debug_assert!(a.ctx == self.id && b.ctx == self.id);
        let n = self.n;
        let p = self.p;
        let mut prod = [0u32; 2 * MAX_DEGREE];
        for i in 0..n {
            let ai = a.coeffs[i] as u32;
            if ai == 0 {
                continue;
            }
            for j in 0..n {
                prod[i + j] += ai * b.coeffs[j] as u32;
            }
        }
        for c in prod.iter_mut().take(2 * n) {
            *c %= p;
        }
        // t^n = -(m_0 + ... + m_{n-1} t^{n-1})
        for k in (n..2 * n - 1).rev() {
            let top = prod[k];
            if top == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..n {
                let m = self.modulus[i];
                if m != 0 {
                    prod[k - n + i] = (prod[k - n + i] + (p - m) * top) % p;
                }
            }
        }
        let mut e = self.zero();
        for i in 0..n {
            e.coeffs[i] = prod[i] as u8;
        }
        e
    }

    pub fn square(&self, a: &FqElem) -> FqElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &FqElem, mut e: u64) -> FqElem {
        let mut base = *a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.square(&base);
            }
        }
        acc
    }

    /// `a^e` for an arbitrary-precision exponent; `0^0 = 1`.
    pub fn pow_big(&self, a: &FqElem, e: &BigUint) -> FqElem {
        if e.is_zero() {
            return self.one();
        }
        if a.is_zero() {
            return self.zero();
        }
        let reduced = e.mod_floor(&BigUint::from(self.order - 1));
        self.pow(a, reduced.to_u64().expect("reduced exponent fits u64"))
    }

    pub fn inv(&self, a: &FqElem) -> Option<FqElem> {
        if a.is_zero() {
            None
        } else {
            Some(self.pow(a, self.order - 2))
        }
    }

    pub fn div(&self, a: &FqElem, b: &FqElem) -> Result<FqElem, FieldError> {
        let binv = self.inv(b).ok_or(FieldError::DivisionByZero)?;
        Ok(self.mul(a, &binv))
    }

    /// `a^{p^s}` by repeated p-th powering.
    pub fn frobenius(&self, a: &FqElem, s: usize) -> FqElem {
        let mut x = *a;
        for _ in 0..s % self.n {
            x = self.pow(&x, self.p as u64);
        }
        x
    }

    pub fn in_subfield(&self, a: &FqElem, m: usize) -> bool {
        self.frobenius(a, m) == *a
    }

    fn check_divisor(&self, m: usize) -> Result<(), FieldError> {
        if m == 0 || self.n % m != 0 {
            Err(FieldError::NotADivisor { m, n: self.n })
        } else {
            Ok(())
        }
    }

    /// An element generating GF(p^m)^x inside this field, for `m | n`.
    /// Its powers `1, θ, ..., θ^{m-1}` form an F_p-basis of the subfield.
    pub fn subfield_generator(&self, m: usize) -> Result<FqElem, FieldError> {
        self.check_divisor(m)?;
        let sub_order = (self.p as u64).pow(m as u32);
        let cofactor = (self.order - 1) / (sub_order - 1);
        Ok(self.pow(&self.primitive, cofactor))
    }

    /// An F_p-basis `1, θ, ..., θ^{m-1}` of the subfield of order p^m.
    pub fn subfield_basis(&self, m: usize) -> Result<Vec<FqElem>, FieldError> {
        let theta = self.subfield_generator(m)?;
        let mut out = Vec::with_capacity(m);
        let mut x = self.one();
        for _ in 0..m {
            out.push(x);
            x = self.mul(&x, &theta);
        }
        Ok(out)
    }

    /// The p^m elements fixed by `a -> a^{p^m}`, sorted by index.
    pub fn subfield_elements(&self, m: usize) -> Result<Vec<FqElem>, FieldError> {
        let theta = self.subfield_generator(m)?;
        let sub_order = (self.p as u64).pow(m as u32);
        let mut out = Vec::with_capacity(sub_order as usize);
        out.push(self.zero());
        let mut x = self.one();
        for _ in 0..sub_order - 1 {
            out.push(x);
            x = self.mul(&x, &theta);
        }
        out.sort_by_key(|e| self.index(e));
        Ok(out)
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, a: &FqElem) -> u64 {
        let mut ord = self.order - 1;
        for q in prime_factors(self.order - 1) {
            while ord % q == 0 && self.pow(a, ord / q) == self.one() {
                ord /= q;
            }
        }
        ord
    }

    fn find_primitive(&self) -> FqElem {
        let group = self.order - 1;
        if group == 1 {
            return self.one();
        }
        let factors = prime_factors(group);
        let one = self.one();
        for idx in 1..self.order {
            let g = self.from_index(idx);
            if factors.iter().all(|q| self.pow(&g, group / q) != one) {
                return g;
            }
        }
        unreachable!("a finite field always has a primitive element")
    }
}

// ---- polynomials over F_p, ascending coefficients, no trailing zeros ----

fn trim(mut f: Vec<u32>) -> Vec<u32> {
    while f.last() == Some(&0) {
        f.pop();
    }
    f
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = trim(a.to_vec());
    let m = trim(m.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while r.len() > dm {
        let dr = r.len() - 1;
        let q = r[dr] * lead_inv % p;
        for i in 0..=dm {
            let sub = q * m[i] % p;
            r[dr - dm + i] = (r[dr - dm + i] + p - sub) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(&prod, m, p)
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or: f of degree n is irreducible iff gcd(f, t^{p^k} - t) = 1 for all k <= n/2.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let f = trim(f.to_vec());
    let n = f.len() - 1;
    if n == 0 {
        return false;
    }
    let mut x_pk = vec![0, 1]; // t
    for _ in 1..=n / 2 {
        // raise to the p-th power
        let mut acc = vec![1u32];
        for _ in 0..p {
            acc = poly_mulmod(&acc, &x_pk, &f, p);
        }
        x_pk = acc;
        let mut diff = x_pk.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = (diff[1] + p - 1) % p;
        let g = poly_gcd(&f, &diff, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

fn smallest_irreducible(p: u32, n: usize) -> Vec<u32> {
    let count = (p as u64).pow(n as u32);
    for idx in 0..count {
        let mut f = Vec::with_capacity(n + 1);
        let mut k = idx;
        for _ in 0..n {
            f.push((k % p as u64) as u32);
            k /= p as u64;
        }
        f.push(1);
        if is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moduli_are_lex_smallest() {
        assert_eq!(make_field(2, 1).unwrap().modulus(), &[0, 1]);
        assert_eq!(make_field(2, 2).unwrap().modulus(), &[1, 1, 1]);
        assert_eq!(make_field(3, 2).unwrap().modulus(), &[1, 0, 1]);
    }

    // Exhaustive oracle: a monic quadratic is irreducible iff it has no root.
    #[test]
    fn quadratic_moduli_match_root_search() {
        for p in [2u32, 3, 5, 7] {
            let first = (0..p * p)
                .map(|idx| (idx % p, idx / p))
                .find(|&(c0, c1)| (0..p).all(|x| (x * x + c1 * x + c0) % p != 0))
                .unwrap();
            let ctx = make_field(p as u64, 2).unwrap();
            assert_eq!(ctx.modulus(), &[first.0, first.1, 1], "p = {p}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(make_field(4, 2).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(make_field(1, 2).unwrap_err(), FieldError::NotPrime(1));
        assert_eq!(make_field(3, 0).unwrap_err(), FieldError::ZeroDegree);
    }

    #[test]
    fn make_field_is_deterministic() {
        for (p, n) in [(2, 6), (3, 4), (5, 3), (13, 2)] {
            let a = make_field(p, n).unwrap();
            let b = make_field(p, n).unwrap();
            assert_eq!(a.modulus(), b.modulus());
            assert_ne!(a.id(), b.id());
        }
    }

    #[test]
    fn small_arithmetic_examples() {
        let f2 = make_field(2, 1).unwrap();
        assert_eq!(f2.add(&f2.one(), &f2.one()), f2.zero());

        let f9 = make_field(3, 2).unwrap();
        let t = f9.generator_t();
        assert_eq!(f9.mul(&t, &t), f9.from_int(2));

        let f4 = make_field(2, 2).unwrap();
        let t = f4.generator_t();
        assert_eq!(f4.frobenius(&t, 1), f4.add(&t, &f4.one()));
        assert_eq!(f4.frobenius(&t, 0), t);
    }

    #[test]
    fn checked_arith_reports_errors() {
        let a = make_field(3, 2).unwrap();
        let b = make_field(3, 2).unwrap();
        let x = a.generator_t();
        assert_eq!(
            a.element_arith(ArithOp::Div, &x, &a.zero()),
            Err(FieldError::DivisionByZero)
        );
        assert_eq!(
            a.element_arith(ArithOp::Add, &x, &b.one()),
            Err(FieldError::ContextMismatch)
        );
        let q = a.element_arith(ArithOp::Div, &x, &x).unwrap();
        assert_eq!(q, a.one());
    }

    #[test]
    fn inverses_everywhere() {
        let ctx = make_field(3, 3).unwrap();
        for a in ctx.elements().skip(1) {
            assert_eq!(ctx.mul(&a, &ctx.inv(&a).unwrap()), ctx.one());
        }
        assert!(ctx.inv(&ctx.zero()).is_none());
    }

    #[test]
    fn primitive_element_has_full_order() {
        for (p, n) in [(2, 1), (2, 4), (3, 3), (5, 2), (2, 6)] {
            let ctx = make_field(p, n).unwrap();
            let g = ctx.primitive_element();
            assert_eq!(ctx.mult_order(&g), ctx.order() - 1);
        }
    }

    #[test]
    fn subfields() {
        let ctx = make_field(2, 4).unwrap();
        let f2 = ctx.subfield_elements(1).unwrap();
        assert_eq!(f2, vec![ctx.zero(), ctx.one()]);

        let f4 = ctx.subfield_elements(2).unwrap();
        assert_eq!(f4.len(), 4);
        // agrees with a direct fixed-point scan
        let scan: Vec<_> = ctx.elements().filter(|a| ctx.in_subfield(a, 2)).collect();
        assert_eq!(f4, scan);
        for a in &f4 {
            for b in &f4 {
                assert!(f4.contains(&ctx.add(a, b)));
                assert!(f4.contains(&ctx.mul(a, b)));
            }
        }
        assert_eq!(
            ctx.subfield_elements(3).unwrap_err(),
            FieldError::NotADivisor { m: 3, n: 4 }
        );

        let f9 = make_field(3, 2).unwrap();
        assert_eq!(f9.subfield_elements(2).unwrap().len(), 9);
    }

    #[test]
    fn hex_round_trip() {
        let ctx = make_field(13, 2).unwrap();
        for a in ctx.elements() {
            let s = ctx.to_hex(&a);
            assert_eq!(s.len(), 2);
            assert_eq!(ctx.parse_hex(&s).unwrap(), a);
        }
        assert!(ctx.parse_hex("d0").is_err());
        assert!(ctx.parse_hex("000").is_err());
    }

    #[test]
    fn degree_one_field_has_trivial_generator() {
        let ctx = make_field(5, 1).unwrap();
        assert_eq!(ctx.generator_t(), ctx.zero());
        assert_eq!(ctx.elements().count(), 5);
    }
}
