//! Exact arithmetic in the cyclotomic field Q(zeta_n) and exact linear algebra over it.
//!
//! Scalars are represented by their coordinate vector in the power basis
//! `1, z, ..., z^(phi(n)-1)` of `Q[x]/(Phi_n(x))`, with `Phi_n` the n-th
//! cyclotomic polynomial. All coefficients are arbitrary-precision rationals;
//! nothing in this module (or this crate) touches floating point.

use num::{BigInt, BigRational, One, Signed, Zero};
use once_cell::sync::Lazy;
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Q = BigRational;

/// Convenience constructors for `Q`.
pub fn q_int(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

pub fn q_ratio(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u32, u32),
    #[error("division by zero in Q(zeta_{0})")]
    DivisionByZero(u32),
    #[error("matrix shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("scalar parse error: {0}")]
    Parse(String),
    #[error("invalid conductor {0}")]
    InvalidConductor(u32),
}

// ---------------------------------------------------------------------------
// dense rational polynomials (little-endian coefficient vectors)
// ---------------------------------------------------------------------------

fn poly_trim(p: &mut Vec<Q>) {
    while p.len() > 1 && p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn poly_mul(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if bj.is_zero() {
                continue;
            }
            out[i + j] += ai * bj;
        }
    }
    poly_trim(&mut out);
    out
}

/// Exact division `a / b`; panics if the remainder is nonzero (callers divide
/// known factors only).
fn poly_div_exact(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut rem: Vec<Q> = a.to_vec();
    poly_trim(&mut rem);
    let mut bb = b.to_vec();
    poly_trim(&mut bb);
    let db = bb.len() - 1;
    assert!(!bb[db].is_zero(), "division by zero polynomial");
    if rem.len() - 1 < db {
        assert!(rem.iter().all(|c| c.is_zero()), "inexact polynomial division");
        return vec![Q::zero()];
    }
    let mut quot = vec![Q::zero(); rem.len() - db];
    while rem.len() > 1 || !rem[0].is_zero() {
        let dr = rem.len() - 1;
        if dr < db {
            break;
        }
        let c = &rem[dr] / &bb[db];
        quot[dr - db] = c.clone();
        for k in 0..=db {
            let t = &bb[k] * &c;
            rem[dr - db + k] -= t;
        }
        poly_trim(&mut rem);
        if rem.len() == 1 && rem[0].is_zero() {
            break;
        }
    }
    assert!(
        rem.iter().all(|c| c.is_zero()),
        "inexact polynomial division"
    );
    poly_trim(&mut quot);
    quot
}

fn divisors(n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    for d in 1..=n {
        if n % d == 0 {
            out.push(d);
        }
    }
    out
}

/// n-th cyclotomic polynomial, computed by exact division of `x^n - 1` by the
/// cyclotomic polynomials of the proper divisors of n.
pub fn cyclotomic_polynomial(n: u32) -> Vec<Q> {
    assert!(n >= 1);
    let mut xn_minus_1 = vec![Q::zero(); n as usize + 1];
    xn_minus_1[0] = -Q::one();
    xn_minus_1[n as usize] = Q::one();
    let mut denom = vec![Q::one()];
    for d in divisors(n) {
        if d < n {
            denom = poly_mul(&denom, &cyclotomic_polynomial(d));
        }
    }
    poly_div_exact(&xn_minus_1, &denom)
}

/// Euler totient; the degree of `Phi_n`.
pub fn euler_phi(n: u32) -> u32 {
    (1..=n).filter(|k| num::integer::gcd(*k, n) == 1).count() as u32
}

// ---------------------------------------------------------------------------
// field context
// ---------------------------------------------------------------------------

/// Shared data for one conductor: the minimal polynomial and reduction tables.
#[derive(Debug)]
pub struct FieldContext {
    n: u32,
    degree: usize,
    phi: Vec<Q>,
    /// `x^(degree + k) mod Phi_n` for `k = 0 .. degree - 2`.
    reduction: Vec<Vec<Q>>,
    /// `x^k mod Phi_n` for `k = 0 .. n - 1`.
    zeta_powers: Vec<Vec<Q>>,
}

static CONTEXTS: Lazy<Mutex<HashMap<u32, Arc<FieldContext>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

impl FieldContext {
    /// Fetch (or build) the context for conductor `n`.
    pub fn get(n: u32) -> Result<Arc<FieldContext>, FieldError> {
        if n == 0 {
            return Err(FieldError::InvalidConductor(0));
        }
        let mut cache = CONTEXTS.lock().unwrap();
        if let Some(ctx) = cache.get(&n) {
            return Ok(ctx.clone());
        }
        let phi = cyclotomic_polynomial(n);
        let degree = phi.len() - 1;
        // multiply-by-x modulo the monic Phi_n
        let mul_x = |p: &[Q]| -> Vec<Q> {
            let mut next = vec![Q::zero(); degree];
            for i in 1..degree {
                next[i] = p[i - 1].clone();
            }
            let top = p[degree - 1].clone();
            if !top.is_zero() {
                for i in 0..degree {
                    let t = &top * &phi[i];
                    next[i] -= t;
                }
            }
            next
        };
        // rows hold x^(degree + k) mod Phi_n for k = 0 .. degree - 2
        let mut reduction: Vec<Vec<Q>> = Vec::new();
        let mut cur: Vec<Q> = phi[..degree].iter().map(|c| -c).collect();
        for _ in 0..degree.saturating_sub(1) {
            reduction.push(cur.clone());
            cur = mul_x(&cur);
        }
        let mut zeta_powers: Vec<Vec<Q>> = Vec::new();
        let mut zp = vec![Q::zero(); degree];
        zp[0] = Q::one();
        for _ in 0..n {
            zeta_powers.push(zp.clone());
            zp = mul_x(&zp);
        }
        let ctx = Arc::new(FieldContext {
            n,
            degree,
            phi,
            reduction,
            zeta_powers,
        });
        cache.insert(n, ctx.clone());
        Ok(ctx)
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Monic minimal polynomial `Phi_n`, little-endian.
    pub fn minimal_polynomial(&self) -> &[Q] {
        &self.phi
    }

    fn reduce(&self, raw: &[Q]) -> Vec<Q> {
        let d = self.degree;
        if raw.len() > 2 * d - 1 && d >= 1 {
            // beyond the precomputed table: generic polynomial remainder
            let (_, rem) = poly_divrem(raw, &self.phi);
            let mut out = vec![Q::zero(); d];
            for (k, c) in rem.iter().enumerate() {
                out[k] = c.clone();
            }
            return out;
        }
        let mut out = vec![Q::zero(); d];
        for (k, c) in raw.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if k < d {
                out[k] += c;
            } else {
                let table = &self.reduction[k - d];
                for (i, t) in table.iter().enumerate() {
                    if !t.is_zero() {
                        out[i] += c * t;
                    }
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// scalars
// ---------------------------------------------------------------------------

/// An element of Q(zeta_n), tagged with its conductor.
#[derive(Clone)]
pub struct CycScalar {
    ctx: Arc<FieldContext>,
    coeffs: Vec<Q>,
}

impl CycScalar {
    pub fn zero(n: u32) -> Self {
        let ctx = FieldContext::get(n).expect("valid conductor");
        let coeffs = vec![Q::zero(); ctx.degree()];
        CycScalar { ctx, coeffs }
    }

    pub fn one(n: u32) -> Self {
        Self::from_rational(n, Q::one())
    }

    pub fn from_rational(n: u32, value: Q) -> Self {
        let ctx = FieldContext::get(n).expect("valid conductor");
        let mut coeffs = vec![Q::zero(); ctx.degree()];
        // For n = 1 the basis is {1} with zeta = 1; constants embed directly.
        coeffs[0] = value;
        CycScalar { ctx, coeffs }
    }

    pub fn from_int(n: u32, value: i64) -> Self {
        Self::from_rational(n, q_int(value))
    }

    /// The designated primitive n-th root of unity (the basis element z).
    pub fn zeta(n: u32) -> Self {
        Self::zeta_pow(n, 1)
    }

    /// `zeta^k` for any integer k (reduced mod n).
    pub fn zeta_pow(n: u32, k: i64) -> Self {
        let ctx = FieldContext::get(n).expect("valid conductor");
        let k = k.rem_euclid(n as i64) as usize;
        let coeffs = ctx.zeta_powers[k].clone();
        CycScalar { ctx, coeffs }
    }

    pub fn from_coeffs(n: u32, mut coeffs: Vec<Q>) -> Result<Self, FieldError> {
        let ctx = FieldContext::get(n)?;
        if coeffs.len() > ctx.degree() {
            let reduced = ctx.reduce(&coeffs);
            return Ok(CycScalar { ctx, coeffs: reduced });
        }
        coeffs.resize(ctx.degree(), Q::zero());
        Ok(CycScalar { ctx, coeffs })
    }

    pub fn conductor(&self) -> u32 {
        self.ctx.n
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }

    /// Some(q) when the element lies in Q.
    pub fn as_rational(&self) -> Option<Q> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.ctx.n != other.ctx.n {
            Err(FieldError::ConductorMismatch(self.ctx.n, other.ctx.n))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycScalar { ctx: self.ctx.clone(), coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CycScalar { ctx: self.ctx.clone(), coeffs })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.ctx.n));
        }
        let raw = poly_mul(&self.coeffs, &other.coeffs);
        let coeffs = self.ctx.reduce(&raw);
        Ok(CycScalar { ctx: self.ctx.clone(), coeffs })
    }

    pub fn negate(&self) -> Self {
        CycScalar {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// `Phi_n` in Q[x].
    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero(self.ctx.n));
        }
        // extended euclid: r0 = phi, r1 = self (as polynomials)
        let mut r0: Vec<Q> = self.ctx.phi.clone();
        let mut r1: Vec<Q> = self.coeffs.clone();
        poly_trim(&mut r1);
        let mut t0: Vec<Q> = vec![Q::zero()];
        let mut t1: Vec<Q> = vec![Q::one()];
        while !(r1.len() == 1 && r1[0].is_zero()) {
            // quotient and remainder of r0 / r1
            let (quot, rem) = poly_divrem(&r0, &r1);
            let t2 = poly_sub(&t0, &poly_mul(&quot, &t1));
            r0 = r1;
            r1 = rem;
            t0 = t1;
            t1 = t2;
        }
        // r0 is the gcd; Phi_n is not prime for composite coefficient choices
        // only when self reduces into a proper factor, which cannot happen for
        // nonzero field elements, so r0 must be a nonzero constant.
        assert!(r0.len() == 1 && !r0[0].is_zero(), "gcd with Phi_n not constant");
        let inv_c = Q::one() / &r0[0];
        let scaled: Vec<Q> = t0.iter().map(|c| c * &inv_c).collect();
        let coeffs = self.ctx.reduce(&scaled);
        Ok(CycScalar { ctx: self.ctx.clone(), coeffs })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, FieldError> {
        self.checked_mul(&other.inv()?)
    }

    /// Integer power, negative exponents via inversion.
    pub fn pow(&self, e: i64) -> Result<Self, FieldError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(self.ctx.n);
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.checked_mul(&b)?;
            }
            k >>= 1;
            if k > 0 {
                b = b.checked_mul(&b)?;
            }
        }
        Ok(acc)
    }
}

fn poly_sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    let len = a.len().max(b.len());
    let mut out = vec![Q::zero(); len];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] -= c;
    }
    poly_trim(&mut out);
    out
}

fn poly_divrem(a: &[Q], b: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let mut rem = a.to_vec();
    poly_trim(&mut rem);
    let mut bb = b.to_vec();
    poly_trim(&mut bb);
    let db = bb.len() - 1;
    let mut quot = vec![Q::zero(); rem.len().saturating_sub(db).max(1)];
    loop {
        let dr = rem.len() - 1;
        if (rem.len() == 1 && rem[0].is_zero()) || dr < db {
            break;
        }
        let c = &rem[dr] / &bb[db];
        quot[dr - db] = c.clone();
        for k in 0..=db {
            let t = &bb[k] * &c;
            rem[dr - db + k] -= t;
        }
        poly_trim(&mut rem);
    }
    poly_trim(&mut quot);
    (quot, rem)
}

impl PartialEq for CycScalar {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.n == other.ctx.n && self.coeffs == other.coeffs
    }
}

impl Eq for CycScalar {}

impl fmt::Debug for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyc({}; {})", self.ctx.n, self)
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl std::ops::$trait for &CycScalar {
            type Output = CycScalar;
            fn $method(self, rhs: &CycScalar) -> CycScalar {
                self.$checked(rhs).expect("scalar conductor mismatch")
            }
        }
        impl std::ops::$trait for CycScalar {
            type Output = CycScalar;
            fn $method(self, rhs: CycScalar) -> CycScalar {
                (&self).$checked(&rhs).expect("scalar conductor mismatch")
            }
        }
    };
}

scalar_binop!(Add, add, checked_add);
scalar_binop!(Sub, sub, checked_sub);
scalar_binop!(Mul, mul, checked_mul);

impl std::ops::Neg for &CycScalar {
    type Output = CycScalar;
    fn neg(self) -> CycScalar {
        self.negate()
    }
}

// ---------------------------------------------------------------------------
// scalar formatting and parsing: "a0 + a1*z + a2*z^2"
// ---------------------------------------------------------------------------

fn format_q(c: &Q) -> String {
    if c.denom().is_one() {
        format!("{}", c.numer())
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let neg = c.is_negative();
            if first {
                if neg {
                    out.push('-');
                }
                first = false;
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let coeff_part = if mag.is_one() && k > 0 {
                String::new()
            } else {
                format_q(&mag)
            };
            let var_part = match k {
                0 => String::new(),
                1 => "z".to_string(),
                _ => format!("z^{}", k),
            };
            match (coeff_part.is_empty(), var_part.is_empty()) {
                (true, _) => out.push_str(&var_part),
                (false, true) => out.push_str(&coeff_part),
                (false, false) => {
                    out.push_str(&coeff_part);
                    out.push('*');
                    out.push_str(&var_part);
                }
            }
        }
        if first {
            out.push('0');
        }
        f.write_str(&out)
    }
}

impl Serialize for CycScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Parse a scalar in the polynomial-string form produced by `Display`,
/// e.g. `"1 - 2/3*z^2 + z"`. `z` denotes the designated primitive root.
pub fn parse_scalar(n: u32, input: &str) -> Result<CycScalar, FieldError> {
    let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(FieldError::Parse("empty scalar".into()));
    }
    // split into signed terms
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut sign = false;
    let mut chars = s.chars().peekable();
    if let Some('+') = chars.peek() {
        chars.next();
    } else if let Some('-') = chars.peek() {
        sign = true;
        chars.next();
    }
    let mut prev: Option<char> = None;
    for ch in chars {
        if (ch == '+' || ch == '-') && prev.map(|p| p != '^' && p != '/').unwrap_or(false) {
            terms.push((sign, cur.clone()));
            cur.clear();
            sign = ch == '-';
        } else {
            cur.push(ch);
        }
        prev = Some(ch);
    }
    terms.push((sign, cur));
    let mut acc = CycScalar::zero(n);
    for (neg, body) in terms {
        if body.is_empty() {
            return Err(FieldError::Parse(format!("dangling sign in '{input}'")));
        }
        let (coeff_str, power) = if let Some(idx) = body.find('z') {
            let coeff_part = &body[..idx];
            let rest = &body[idx + 1..];
            let power: i64 = if rest.is_empty() {
                1
            } else if let Some(stripped) = rest.strip_prefix('^') {
                stripped
                    .parse()
                    .map_err(|_| FieldError::Parse(format!("bad exponent in '{input}'")))?
            } else {
                return Err(FieldError::Parse(format!("unexpected '{rest}' in '{input}'")));
            };
            let coeff_part = coeff_part.strip_suffix('*').unwrap_or(coeff_part);
            (coeff_part.to_string(), power)
        } else {
            (body.clone(), 0)
        };
        let coeff: Q = if coeff_str.is_empty() {
            Q::one()
        } else {
            parse_q(&coeff_str).ok_or_else(|| {
                FieldError::Parse(format!("bad coefficient '{coeff_str}' in '{input}'"))
            })?
        };
        let coeff = if neg { -coeff } else { coeff };
        let term = CycScalar::from_rational(n, coeff).checked_mul(&CycScalar::zeta_pow(n, power))?;
        acc = acc.checked_add(&term)?;
    }
    Ok(acc)
}

fn parse_q(s: &str) -> Option<Q> {
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.parse().ok()?;
        let den: BigInt = b.parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(Q::new(num, den))
    } else {
        let num: BigInt = s.parse().ok()?;
        Some(Q::from_integer(num))
    }
}

// ---------------------------------------------------------------------------
// matrices
// ---------------------------------------------------------------------------

/// Dense matrix over Q(zeta_n). Row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct CycMatrix {
    n: u32,
    rows: usize,
    cols: usize,
    data: Vec<CycScalar>,
}

impl CycMatrix {
    pub fn zeros(n: u32, rows: usize, cols: usize) -> Self {
        let z = CycScalar::zero(n);
        CycMatrix {
            n,
            rows,
            cols,
            data: vec![z; rows * cols],
        }
    }

    pub fn identity(n: u32, size: usize) -> Self {
        let mut m = Self::zeros(n, size, size);
        for i in 0..size {
            m.set(i, i, CycScalar::one(n));
        }
        m
    }

    pub fn from_fn(n: u32, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CycScalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = f(r, c);
                assert_eq!(v.conductor(), n, "matrix entry conductor mismatch");
                data.push(v);
            }
        }
        CycMatrix { n, rows, cols, data }
    }

    pub fn scalar(n: u32, size: usize, value: &CycScalar) -> Self {
        let mut m = Self::zeros(n, size, size);
        for i in 0..size {
            m.set(i, i, value.clone());
        }
        m
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &CycScalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: CycScalar) {
        assert_eq!(v.conductor(), self.n, "matrix entry conductor mismatch");
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// Some(diagonal value) when the matrix is scalar.
    pub fn as_scalar(&self) -> Option<CycScalar> {
        if self.rows != self.cols || self.rows == 0 {
            return None;
        }
        let d = self.get(0, 0).clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r == c {
                    if self.get(r, c) != &d {
                        return None;
                    }
                } else if !self.get(r, c).is_zero() {
                    return None;
                }
            }
        }
        Some(d)
    }

    pub fn is_diagonal(&self) -> bool {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c && !self.get(r, c).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    fn same_field(&self, other: &Self) -> Result<(), FieldError> {
        if self.n != other.n {
            Err(FieldError::ConductorMismatch(self.n, other.n))
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(FieldError::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<_, _>>()?;
        Ok(CycMatrix { n: self.n, rows: self.rows, cols: self.cols, data })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(FieldError::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.checked_sub(b))
            .collect::<Result<_, _>>()?;
        Ok(CycMatrix { n: self.n, rows: self.rows, cols: self.cols, data })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.same_field(other)?;
        if self.cols != other.rows {
            return Err(FieldError::ShapeMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = Self::zeros(self.n, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a.checked_mul(b)?;
                    let cur = out.get(r, c).checked_add(&prod)?;
                    out.set(r, c, cur);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: &CycScalar) -> Self {
        let data = self
            .data
            .iter()
            .map(|v| v.checked_mul(s).expect("scale conductor mismatch"))
            .collect();
        CycMatrix { n: self.n, rows: self.rows, cols: self.cols, data }
    }

    pub fn negate(&self) -> Self {
        let data = self.data.iter().map(|v| v.negate()).collect();
        CycMatrix { n: self.n, rows: self.rows, cols: self.cols, data }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn trace(&self) -> CycScalar {
        assert_eq!(self.rows, self.cols, "trace of non-square matrix");
        let mut acc = CycScalar::zero(self.n);
        for i in 0..self.rows {
            acc = acc.checked_add(self.get(i, i)).unwrap();
        }
        acc
    }

    pub fn pow(&self, e: i64) -> Result<Self, FieldError> {
        assert_eq!(self.rows, self.cols);
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut acc = Self::identity(self.n, self.rows);
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.checked_mul(&b)?;
            }
            k >>= 1;
            if k > 0 {
                b = b.checked_mul(&b)?;
            }
        }
        Ok(acc)
    }

    /// Inverse by Gauss-Jordan elimination; `Singular` if rank-deficient.
    pub fn inverse(&self) -> Result<Self, FieldError> {
        if self.rows != self.cols {
            return Err(FieldError::ShapeMismatch(self.rows, self.cols, self.cols, self.rows));
        }
        let size = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(self.n, size);
        for col in 0..size {
            let pivot = (col..size).find(|&r| !a.get(r, col).is_zero());
            let Some(pr) = pivot else {
                return Err(FieldError::Singular);
            };
            if pr != col {
                for c in 0..size {
                    let tmp = a.get(pr, c).clone();
                    a.set(pr, c, a.get(col, c).clone());
                    a.set(col, c, tmp);
                    let tmp = inv.get(pr, c).clone();
                    inv.set(pr, c, inv.get(col, c).clone());
                    inv.set(col, c, tmp);
                }
            }
            let p = a.get(col, col).clone();
            let pi = p.inv()?;
            for c in 0..size {
                a.set(col, c, a.get(col, c).checked_mul(&pi)?);
                inv.set(col, c, inv.get(col, c).checked_mul(&pi)?);
            }
            for r in 0..size {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for c in 0..size {
                    let t = a.get(col, c).checked_mul(&f)?;
                    a.set(r, c, a.get(r, c).checked_sub(&t)?);
                    let t = inv.get(col, c).checked_mul(&f)?;
                    inv.set(r, c, inv.get(r, c).checked_sub(&t)?);
                }
            }
        }
        Ok(inv)
    }

    /// Group commutator `a b a^-1 b^-1`.
    pub fn commutator_group(a: &Self, b: &Self) -> Result<Self, FieldError> {
        a.checked_mul(b)?
            .checked_mul(&a.inverse()?)?
            .checked_mul(&b.inverse()?)
    }

    /// Rows as serializable strings.
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c).to_string()).collect())
            .collect()
    }
}

impl fmt::Debug for CycMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CycMatrix({}x{}, n={})", self.rows, self.cols, self.n)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for CycMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

// ---------------------------------------------------------------------------
// exact linear algebra: RREF, rank/kernel, solving
// ---------------------------------------------------------------------------

pub struct RankKernel {
    pub rank: usize,
    /// Basis column vectors of the right kernel.
    pub kernel: Vec<Vec<CycScalar>>,
}

/// Reduced row echelon form; returns (rref, pivot columns).
pub fn rref(m: &CycMatrix) -> (CycMatrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols() {
        if row >= a.rows() {
            break;
        }
        let pivot = (row..a.rows()).find(|&r| !a.get(r, col).is_zero());
        let Some(pr) = pivot else { continue };
        if pr != row {
            for c in 0..a.cols() {
                let tmp = a.get(pr, c).clone();
                a.set(pr, c, a.get(row, c).clone());
                a.set(row, c, tmp);
            }
        }
        let inv = a.get(row, col).inv().expect("pivot nonzero");
        for c in 0..a.cols() {
            let v = a.get(row, c).checked_mul(&inv).unwrap();
            a.set(row, c, v);
        }
        for r in 0..a.rows() {
            if r == row || a.get(r, col).is_zero() {
                continue;
            }
            let f = a.get(r, col).clone();
            for c in 0..a.cols() {
                let t = a.get(row, c).checked_mul(&f).unwrap();
                let v = a.get(r, c).checked_sub(&t).unwrap();
                a.set(r, c, v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Exact rank and right-kernel basis of a matrix.
pub fn rank_kernel(m: &CycMatrix) -> RankKernel {
    let (r, pivots) = rref(m);
    let rank = pivots.len();
    let n = m.conductor();
    let mut kernel = Vec::new();
    let pivot_set: Vec<Option<usize>> = {
        let mut v = vec![None; m.cols()];
        for (row_idx, &col) in pivots.iter().enumerate() {
            v[col] = Some(row_idx);
        }
        v
    };
    for free in 0..m.cols() {
        if pivot_set[free].is_some() {
            continue;
        }
        let mut vec_out = vec![CycScalar::zero(n); m.cols()];
        vec_out[free] = CycScalar::one(n);
        for (col, &p) in pivot_set.iter().enumerate() {
            if let Some(row_idx) = p {
                vec_out[col] = r.get(row_idx, free).negate();
            }
        }
        kernel.push(vec_out);
    }
    RankKernel { rank, kernel }
}

pub enum Solve {
    Unique(Vec<CycScalar>),
    /// Affine solution set: a particular solution plus the kernel basis.
    Affine(Vec<CycScalar>, Vec<Vec<CycScalar>>),
    Inconsistent,
}

/// Solve `M x = b` exactly.
pub fn solve(m: &CycMatrix, b: &[CycScalar]) -> Result<Solve, FieldError> {
    if b.len() != m.rows() {
        return Err(FieldError::ShapeMismatch(m.rows(), 1, b.len(), 1));
    }
    let n = m.conductor();
    let mut aug = CycMatrix::zeros(n, m.rows(), m.cols() + 1);
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            aug.set(r, c, m.get(r, c).clone());
        }
        aug.set(r, m.cols(), b[r].clone());
    }
    let (rr, pivots) = rref(&aug);
    if pivots.contains(&m.cols()) {
        return Ok(Solve::Inconsistent);
    }
    let mut particular = vec![CycScalar::zero(n); m.cols()];
    for (row_idx, &col) in pivots.iter().enumerate() {
        particular[col] = rr.get(row_idx, m.cols()).clone();
    }
    let kernel = rank_kernel(m).kernel;
    if kernel.is_empty() {
        Ok(Solve::Unique(particular))
    } else {
        Ok(Solve::Affine(particular, kernel))
    }
}

// ---------------------------------------------------------------------------
// incremental sparse row-space accumulator
// ---------------------------------------------------------------------------

/// Sparse vector: sorted (column, value) pairs with nonzero values.
pub type SparseVec = Vec<(usize, CycScalar)>;

pub fn densify(n: u32, len: usize, v: &SparseVec) -> Vec<CycScalar> {
    let mut out = vec![CycScalar::zero(n); len];
    for (i, s) in v {
        out[*i] = s.clone();
    }
    out
}

pub fn sparsify(v: &[CycScalar]) -> SparseVec {
    v.iter()
        .enumerate()
        .filter(|(_, s)| !s.is_zero())
        .map(|(i, s)| (i, s.clone()))
        .collect()
}

/// A row space kept in reduced echelon form, built incrementally. Used for
/// the large, very sparse constraint systems; rows are reduced as they arrive
/// so duplicate or dependent constraints cost little.
#[derive(Clone)]
pub struct EchelonSpace {
    n: u32,
    ambient: usize,
    /// pivot column -> row (normalized: leading coefficient 1, fully reduced)
    rows: BTreeMap<usize, SparseVec>,
}

fn sparse_axpy(target: &mut SparseVec, coeff: &CycScalar, source: &SparseVec) {
    // target += coeff * source, merging sorted representations
    let mut out: SparseVec = Vec::with_capacity(target.len() + source.len());
    let mut i = 0;
    let mut j = 0;
    while i < target.len() || j < source.len() {
        if j >= source.len() || (i < target.len() && target[i].0 < source[j].0) {
            out.push(target[i].clone());
            i += 1;
        } else if i >= target.len() || source[j].0 < target[i].0 {
            let v = coeff.checked_mul(&source[j].1).unwrap();
            if !v.is_zero() {
                out.push((source[j].0, v));
            }
            j += 1;
        } else {
            let v = target[i].1.checked_add(&coeff.checked_mul(&source[j].1).unwrap()).unwrap();
            if !v.is_zero() {
                out.push((target[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    *target = out;
}

impl EchelonSpace {
    pub fn new(n: u32, ambient: usize) -> Self {
        EchelonSpace { n, ambient, rows: BTreeMap::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce a vector against the current basis (returns the residue).
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        // rows are fully reduced, so eliminating a pivot column never
        // reintroduces one that was already cleared
        loop {
            let hit = v.iter().position(|(col, _)| self.rows.contains_key(col));
            let Some(idx) = hit else { return v };
            let col = v[idx].0;
            let coeff = v[idx].1.negate();
            let row = &self.rows[&col];
            sparse_axpy(&mut v, &coeff, row);
        }
    }

    /// Insert a vector; returns true when it enlarged the space.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let mut v = self.reduce(v);
        if v.is_empty() {
            return false;
        }
        let lead_inv = v[0].1.inv().expect("nonzero leading coefficient");
        for e in v.iter_mut() {
            e.1 = e.1.checked_mul(&lead_inv).unwrap();
        }
        let pivot = v[0].0;
        // back-substitute into existing rows to keep full reduction
        let cols: Vec<usize> = self.rows.keys().cloned().collect();
        for p in cols {
            let row = self.rows.get(&p).unwrap();
            if let Some(pos) = row.iter().position(|(c, _)| *c == pivot) {
                let coeff = row[pos].1.negate();
                let mut updated = row.clone();
                sparse_axpy(&mut updated, &coeff, &v);
                self.rows.insert(p, updated);
            }
        }
        self.rows.insert(pivot, v);
        true
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v.clone()).is_empty()
    }

    /// Whether every row of this space is orthogonal to the given dense
    /// vector (interpreting rows as linear functionals).
    pub fn annihilates(&self, v: &[CycScalar]) -> bool {
        assert_eq!(v.len(), self.ambient);
        for row in self.rows.values() {
            let mut acc = CycScalar::zero(self.n);
            for (col, coeff) in row {
                if !v[*col].is_zero() {
                    acc = acc.checked_add(&coeff.checked_mul(&v[*col]).unwrap()).unwrap();
                }
            }
            if !acc.is_zero() {
                return false;
            }
        }
        true
    }

    /// Dense basis of the null space of the row space (vectors x with
    /// row . x = 0 for all rows).
    pub fn kernel_basis(&self) -> Vec<Vec<CycScalar>> {
        let mut out = Vec::new();
        for free in 0..self.ambient {
            if self.rows.contains_key(&free) {
                continue;
            }
            let mut v = vec![CycScalar::zero(self.n); self.ambient];
            v[free] = CycScalar::one(self.n);
            for (&pivot, row) in &self.rows {
                if let Some((_, c)) = row.iter().find(|(col, _)| *col == free) {
                    v[pivot] = c.negate();
                }
            }
            out.push(v);
        }
        out
    }

    pub fn basis_rows(&self) -> impl Iterator<Item = &SparseVec> {
        self.rows.values()
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: Phi_n via the Moebius product
    /// prod_{d | n} (x^d - 1)^{mu(n/d)}.
    fn cyclotomic_moebius(n: u32) -> Vec<Q> {
        fn moebius(m: u32) -> i32 {
            let mut m = m;
            let mut count = 0;
            let mut p = 2;
            while p * p <= m {
                if m % p == 0 {
                    m /= p;
                    if m % p == 0 {
                        return 0;
                    }
                    count += 1;
                }
                p += 1;
            }
            if m > 1 {
                count += 1;
            }
            if count % 2 == 0 {
                1
            } else {
                -1
            }
        }
        let mut num = vec![Q::one()];
        let mut den = vec![Q::one()];
        for d in divisors(n) {
            let mut f = vec![Q::zero(); d as usize + 1];
            f[0] = -Q::one();
            f[d as usize] = Q::one();
            match moebius(n / d) {
                1 => num = poly_mul(&num, &f),
                -1 => den = poly_mul(&den, &f),
                _ => {}
            }
        }
        poly_div_exact(&num, &den)
    }

    fn qv(vals: &[i64]) -> Vec<Q> {
        vals.iter().map(|v| q_int(*v)).collect()
    }

    #[test]
    fn cyclotomic_small_values_frozen() {
        assert_eq!(cyclotomic_polynomial(1), qv(&[-1, 1]));
        assert_eq!(cyclotomic_polynomial(2), qv(&[1, 1]));
        assert_eq!(cyclotomic_polynomial(3), qv(&[1, 1, 1]));
        assert_eq!(cyclotomic_polynomial(4), qv(&[1, 0, 1]));
        assert_eq!(cyclotomic_polynomial(5), qv(&[1, 1, 1, 1, 1]));
        assert_eq!(cyclotomic_polynomial(6), qv(&[1, -1, 1]));
        assert_eq!(cyclotomic_polynomial(12), qv(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn cyclotomic_matches_moebius_oracle() {
        for n in 1..=30 {
            assert_eq!(
                cyclotomic_polynomial(n),
                cyclotomic_moebius(n),
                "Phi_{n} disagrees with the Moebius-product oracle"
            );
        }
    }

    #[test]
    fn cyclotomic_degree_is_euler_phi() {
        for n in 1..=30 {
            assert_eq!(cyclotomic_polynomial(n).len() as u32 - 1, euler_phi(n));
        }
    }

    #[test]
    fn zeta_power_cycle() {
        for n in [1u32, 2, 3, 4, 5, 6, 7, 12] {
            let z = CycScalar::zeta(n);
            assert!(z.pow(n as i64).unwrap().is_one(), "zeta^{n} != 1");
            let mut acc = CycScalar::one(n);
            for k in 0..n as i64 {
                assert_eq!(acc, CycScalar::zeta_pow(n, k));
                acc = acc.checked_mul(&z).unwrap();
            }
        }
    }

    #[test]
    fn primitive_root_power_sum_vanishes() {
        // 1 + zeta + ... + zeta^(n-1) = 0 for n > 1
        for n in [2u32, 3, 4, 5, 6, 7] {
            let mut acc = CycScalar::zero(n);
            for k in 0..n as i64 {
                acc = acc.checked_add(&CycScalar::zeta_pow(n, k)).unwrap();
            }
            assert!(acc.is_zero());
        }
    }

    #[test]
    fn inverse_of_zeta() {
        let z = CycScalar::zeta(5);
        assert_eq!(z.inv().unwrap(), z.pow(4).unwrap());
        assert!(z.checked_mul(&z.inv().unwrap()).unwrap().is_one());
    }

    #[test]
    fn inversion_of_zero_is_an_error() {
        assert_eq!(
            CycScalar::zero(5).inv().unwrap_err(),
            FieldError::DivisionByZero(5)
        );
    }

    #[test]
    fn conductor_mismatch_is_an_error() {
        let a = CycScalar::one(4);
        let b = CycScalar::one(5);
        assert!(matches!(
            a.checked_add(&b),
            Err(FieldError::ConductorMismatch(4, 5))
        ));
    }

    #[test]
    fn conductor_one_collapses_to_q() {
        let z = CycScalar::zeta(1);
        assert!(z.is_one());
        let a = CycScalar::from_rational(1, q_ratio(3, 7));
        let b = a.inv().unwrap();
        assert_eq!(b.as_rational().unwrap(), q_ratio(7, 3));
    }

    #[test]
    fn display_parse_round_trip_examples() {
        let n = 5;
        let samples = [
            CycScalar::zero(n),
            CycScalar::one(n),
            CycScalar::zeta(n).negate(),
            parse_scalar(n, "1/2 - 3*z^2 + z").unwrap(),
            CycScalar::zeta_pow(n, 4),
        ];
        for s in samples {
            let text = s.to_string();
            let back = parse_scalar(n, &text).unwrap();
            assert_eq!(back, s, "round trip failed for '{text}'");
        }
    }

    #[test]
    fn matrix_inverse_and_commutator() {
        let n = 5;
        let mut m = CycMatrix::identity(n, 3);
        m.set(0, 1, CycScalar::zeta(n));
        m.set(1, 2, CycScalar::from_int(n, -2));
        let inv = m.inverse().unwrap();
        assert_eq!(m.checked_mul(&inv).unwrap(), CycMatrix::identity(n, 3));
        // commutator of commuting matrices is the identity
        let d = CycMatrix::scalar(n, 3, &CycScalar::zeta(n));
        assert_eq!(
            CycMatrix::commutator_group(&d, &m).unwrap(),
            CycMatrix::identity(n, 3)
        );
    }

    #[test]
    fn rank_kernel_examples() {
        let n = 5;
        let z3 = CycMatrix::zeros(n, 3, 3);
        let rk = rank_kernel(&z3);
        assert_eq!(rk.rank, 0);
        assert_eq!(rk.kernel.len(), 3);

        let id5 = CycMatrix::identity(n, 5);
        let rk = rank_kernel(&id5);
        assert_eq!(rk.rank, 5);
        assert!(rk.kernel.is_empty());

        // [1, zeta] has kernel spanned by (-zeta, 1)
        let mut m = CycMatrix::zeros(n, 1, 2);
        m.set(0, 0, CycScalar::one(n));
        m.set(0, 1, CycScalar::zeta(n));
        let rk = rank_kernel(&m);
        assert_eq!(rk.rank, 1);
        assert_eq!(rk.kernel.len(), 1);
        let k = &rk.kernel[0];
        // substitute back: 1*k0 + zeta*k1 = 0
        let lhs = k[0]
            .checked_add(&CycScalar::zeta(n).checked_mul(&k[1]).unwrap())
            .unwrap();
        assert!(lhs.is_zero());
    }

    #[test]
    fn solve_examples() {
        let n = 5;
        let id = CycMatrix::identity(n, 4);
        let b: Vec<CycScalar> = (0..4).map(|k| CycScalar::zeta_pow(n, k)).collect();
        match solve(&id, &b).unwrap() {
            Solve::Unique(x) => assert_eq!(x, b),
            _ => panic!("identity system must be uniquely solvable"),
        }
        let zero = CycMatrix::zeros(n, 2, 2);
        let b = vec![CycScalar::one(n), CycScalar::zero(n)];
        assert!(matches!(solve(&zero, &b).unwrap(), Solve::Inconsistent));
        // diagonal system: E2 x = e_i has solution with entry rho^{-i}
        let e2 = CycMatrix::from_fn(n, 5, 5, |r, c| {
            if r == c {
                CycScalar::zeta_pow(n, r as i64)
            } else {
                CycScalar::zero(n)
            }
        });
        let mut b = vec![CycScalar::zero(n); 5];
        b[3] = CycScalar::one(n);
        match solve(&e2, &b).unwrap() {
            Solve::Unique(x) => {
                assert_eq!(x[3], CycScalar::zeta_pow(n, -3));
                for (i, v) in x.iter().enumerate() {
                    if i != 3 {
                        assert!(v.is_zero());
                    }
                }
            }
            _ => panic!("diagonal system must be uniquely solvable"),
        }
    }

    #[test]
    fn echelon_space_matches_dense_rank() {
        let n = 5;
        // build a fixed pseudo-random matrix and compare rank/kernel
        let rows = 7;
        let cols = 9;
        let mut counter: i64 = 1;
        let m = CycMatrix::from_fn(n, rows, cols, |r, c| {
            counter = (counter * 31 + 17) % 23;
            if (r + 2 * c + counter as usize) % 4 == 0 {
                CycScalar::zeta_pow(n, counter).negate()
            } else if (r + c) % 3 == 0 {
                CycScalar::from_int(n, counter % 5 - 2)
            } else {
                CycScalar::zero(n)
            }
        });
        let dense = rank_kernel(&m);
        let mut es = EchelonSpace::new(n, cols);
        for r in 0..rows {
            let row: Vec<CycScalar> = (0..cols).map(|c| m.get(r, c).clone()).collect();
            es.insert(sparsify(&row));
        }
        assert_eq!(es.rank(), dense.rank);
        assert_eq!(es.kernel_basis().len(), dense.kernel.len());
        // each kernel vector annihilates every row
        for k in es.kernel_basis() {
            for r in 0..rows {
                let mut acc = CycScalar::zero(n);
                for c in 0..cols {
                    acc = acc
                        .checked_add(&m.get(r, c).checked_mul(&k[c]).unwrap())
                        .unwrap();
                }
                assert!(acc.is_zero());
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn scalar_strategy(n: u32) -> impl Strategy<Value = CycScalar> {
            let deg = euler_phi(n) as usize;
            proptest::collection::vec((-6i64..=6, 1i64..=4), deg).prop_map(move |cs| {
                let coeffs: Vec<Q> = cs.into_iter().map(|(a, b)| q_ratio(a, b)).collect();
                CycScalar::from_coeffs(n, coeffs).unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn field_axioms_n5(a in scalar_strategy(5), b in scalar_strategy(5), c in scalar_strategy(5)) {
                let ab = a.checked_mul(&b).unwrap();
                let ba = b.checked_mul(&a).unwrap();
                prop_assert_eq!(&ab, &ba);
                let left = a.checked_mul(&b.checked_add(&c).unwrap()).unwrap();
                let right = ab.checked_add(&a.checked_mul(&c).unwrap()).unwrap();
                prop_assert_eq!(left, right);
                if !a.is_zero() {
                    let inv = a.inv().unwrap();
                    prop_assert!(a.checked_mul(&inv).unwrap().is_one());
                }
            }

            #[test]
            fn field_axioms_n6(a in scalar_strategy(6), b in scalar_strategy(6)) {
                let assoc1 = a.checked_mul(&b).unwrap().checked_mul(&a).unwrap();
                let assoc2 = a.checked_mul(&b.checked_mul(&a).unwrap()).unwrap();
                prop_assert_eq!(assoc1, assoc2);
            }

            #[test]
            fn display_parse_round_trip(a in scalar_strategy(5)) {
                let s = a.to_string();
                let back = parse_scalar(5, &s).unwrap();
                prop_assert_eq!(back, a);
            }

            #[test]
            fn rank_plus_kernel_is_cols(
                entries in proptest::collection::vec((0i64..=4, -3i64..=3), 30)
            ) {
                let n = 5u32;
                let rows = 5;
                let cols = 6;
                let m = CycMatrix::from_fn(n, rows, cols, |r, c| {
                    let (zp, coeff) = entries[r * cols + c];
                    if coeff == 0 {
                        CycScalar::zero(n)
                    } else {
                        CycScalar::from_int(n, coeff)
                            .checked_mul(&CycScalar::zeta_pow(n, zp))
                            .unwrap()
                    }
                });
                let rk = rank_kernel(&m);
                prop_assert_eq!(rk.rank + rk.kernel.len(), cols);
                for k in &rk.kernel {
                    for r in 0..rows {
                        let mut acc = CycScalar::zero(n);
                        for c in 0..cols {
                            acc = acc.checked_add(&m.get(r, c).checked_mul(&k[c]).unwrap()).unwrap();
                        }
                        prop_assert!(acc.is_zero());
                    }
                }
            }
        }
    }
}
