//! Univariate polynomials over F_q in the variable t, plus enumeration of monic
//! irreducibles.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::{Fe, Gf};
use crate::laurent::OrdValue;

/// Largest search space accepted by [`enumerate_monic_irreducibles`].
pub const MAX_ENUMERATION: u64 = 1 << 24;

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: Gf,
    /// coeffs[k] is the coefficient of t^k; the last entry is nonzero.
    coeffs: Vec<Fe>,
}

impl Poly {
    pub fn new(field: &Gf, mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn zero(field: &Gf) -> Self {
        Poly::new(field, Vec::new())
    }

    pub fn one(field: &Gf) -> Self {
        Poly::constant(field, Fe::ONE)
    }

    pub fn constant(field: &Gf, c: Fe) -> Self {
        Poly::new(field, vec![c])
    }

    /// `c * t^k`
    pub fn monomial(field: &Gf, c: Fe, k: usize) -> Self {
        let mut v = vec![Fe::ZERO; k + 1];
        v[k] = c;
        Poly::new(field, v)
    }

    /// The polynomial `t`.
    pub fn t(field: &Gf) -> Self {
        Poly::monomial(field, Fe::ONE, 1)
    }

    /// Shorthand for tests and examples: integer coefficients, constant term first.
    pub fn from_ints(field: &Gf, c: &[i64]) -> Self {
        Poly::new(field, c.iter().map(|&x| field.from_int(x)).collect())
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Fe {
        self.coeffs.get(k).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn degree(&self) -> OrdValue {
        match self.deg() {
            Some(d) => OrdValue::Finite(d as i64),
            None => OrdValue::NegInf,
        }
    }

    pub fn leading(&self) -> Fe {
        self.coeffs.last().copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Fe::ONE
    }

    fn same_field(&self, other: &Poly) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn scale(&self, c: Fe) -> Poly {
        let f = &self.field;
        Poly::new(f, self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    /// `self * t^k`
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![Fe::ZERO; k];
        v.extend_from_slice(&self.coeffs);
        Poly::new(&self.field, v)
    }

    pub fn monic(&self) -> Result<Poly> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let inv = self.field.inv(self.leading())?;
        Ok(self.scale(inv))
    }

    pub fn eval(&self, x: Fe) -> Fe {
        let f = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(Fe::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly> {
        self.same_field(other)?;
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        Ok(Poly::new(
            f,
            (0..n).map(|k| f.add(self.coeff(k), other.coeff(k))).collect(),
        ))
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        self.same_field(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero(&self.field));
        }
        let f = &self.field;
        let mut out = vec![Fe::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Ok(Poly::new(f, out))
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn divmod(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        self.same_field(divisor)?;
        let dd = divisor.deg().ok_or(Error::DivisionByZero)?;
        let f = &self.field;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Poly::zero(f), self.clone()));
        }
        let lead_inv = f.inv(divisor.leading())?;
        let mut quot = vec![Fe::ZERO; rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let c = rem[k];
            if c.is_zero() {
                continue;
            }
            let m = f.mul(c, lead_inv);
            quot[k - dd] = m;
            for (i, &b) in divisor.coeffs.iter().enumerate() {
                let idx = k - dd + i;
                rem[idx] = f.sub(rem[idx], f.mul(m, b));
            }
        }
        rem.truncate(dd);
        Ok((Poly::new(f, quot), Poly::new(f, rem)))
    }

    pub fn rem(&self, divisor: &Poly) -> Result<Poly> {
        Ok(self.divmod(divisor)?.1)
    }

    /// Whether `divisor` divides `self` exactly.
    pub fn divisible_by(&self, divisor: &Poly) -> Result<bool> {
        Ok(self.rem(divisor)?.is_zero())
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Poly) -> Result<Poly> {
        self.same_field(other)?;
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            Ok(a)
        } else {
            a.monic()
        }
    }

    pub fn mul_mod(&self, other: &Poly, modulus: &Poly) -> Result<Poly> {
        self.try_mul(other)?.rem(modulus)
    }

    pub fn pow_mod(&self, mut n: u64, modulus: &Poly) -> Result<Poly> {
        let mut base = self.rem(modulus)?;
        let mut acc = Poly::one(&self.field).rem(modulus)?;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_mod(&base, modulus)?;
            }
            base = base.mul_mod(&base, modulus)?;
            n >>= 1;
        }
        Ok(acc)
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(&self.field);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Irreducibility via the Ben-Or test: `gcd(t^{q^k} - t, f) = 1` for `k <= deg f / 2`.
    pub fn is_irreducible(&self) -> Result<bool> {
        let n = match self.deg() {
            Some(n) if n >= 1 => n,
            _ => return Err(Error::ConstantPolynomial),
        };
        let f = self.monic()?;
        let t = Poly::t(&self.field);
        let q = self.field.q() as u64;
        let mut h = t.rem(&f)?;
        for _ in 1..=n / 2 {
            h = h.pow_mod(q, &f)?;
            let g = (&h - &t).gcd(&f)?;
            if g.deg() != Some(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A monic proper factor found by trial division over every monic polynomial of
    /// degree at most `deg / 2`, or `None` when the polynomial is irreducible.
    pub fn trial_factor(&self) -> Result<Option<Poly>> {
        let n = match self.deg() {
            Some(n) if n >= 1 => n,
            _ => return Err(Error::ConstantPolynomial),
        };
        let q = self.field.q() as u64;
        for k in 1..=n / 2 {
            for idx in 0..q.pow(k as u32) {
                let g = monic_from_index(&self.field, k, idx);
                if self.divisible_by(&g)? {
                    return Ok(Some(g));
                }
            }
        }
        Ok(None)
    }

    pub fn is_irreducible_trial(&self) -> Result<bool> {
        Ok(self.trial_factor()?.is_none())
    }

    /// Position of a monic polynomial in the canonical enumeration of its degree.
    pub fn monic_index(&self) -> u64 {
        let q = self.field.q() as u64;
        let n = self.coeffs.len().saturating_sub(1);
        self.coeffs[..n]
            .iter()
            .rev()
            .fold(0u64, |acc, c| acc * q + c.0 as u64)
    }
}

/// The `idx`-th monic polynomial of degree `degree`: lower coefficients are the
/// base-q digits of `idx`, constant term least significant.
pub fn monic_from_index(field: &Gf, degree: usize, mut idx: u64) -> Poly {
    let q = field.q() as u64;
    let mut c = Vec::with_capacity(degree + 1);
    for _ in 0..degree {
        c.push(Fe((idx % q) as u32));
        idx /= q;
    }
    c.push(Fe::ONE);
    Poly::new(field, c)
}

pub fn first_monic_irreducible(field: &Gf, degree: usize) -> Result<Poly> {
    if degree == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let mut idx = 0u64;
    loop {
        let g = monic_from_index(field, degree, idx);
        if g.is_irreducible()? {
            return Ok(g);
        }
        idx += 1;
    }
}

/// All monic irreducibles of exactly `degree`, in canonical order.
pub fn enumerate_monic_irreducibles(field: &Gf, degree: usize) -> Result<Vec<Poly>> {
    if degree == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let total = (field.q() as u64)
        .checked_pow(degree as u32)
        .filter(|&n| n <= MAX_ENUMERATION)
        .ok_or_else(|| Error::SizeExceeded(format!("q^{degree} exceeds 2^24")))?;
    let mut out = Vec::new();
    for idx in 0..total {
        let g = monic_from_index(field, degree, idx);
        if g.is_irreducible()? {
            out.push(g);
        }
    }
    Ok(out)
}

fn mobius(mut n: u64) -> i128 {
    let mut result = 1i128;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            result = -result;
        }
        d += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of monic irreducibles of degree `n` over F_q: `(1/n) sum_{d | n} mu(n/d) q^d`.
///
/// Panics if `q^n` does not fit in an `i128`.
pub fn count_monic_irreducibles(q: u64, n: u32) -> u128 {
    assert!(n >= 1, "degree must be positive");
    let mut total = 0i128;
    for d in (1..=n).filter(|d| n.is_multiple_of(*d)) {
        let term = (q as i128)
            .checked_pow(d)
            .expect("q^n overflows the necklace count");
        total += mobius((n / d) as u64) * term;
    }
    (total / n as i128) as u128
}

/// Least degree with at least `required` monic irreducibles.
pub fn minimal_degree_with_count(q: u64, required: u128) -> u32 {
    (1u32..)
        .find(|&n| count_monic_irreducibles(q, n) >= required)
        .expect("counts grow without bound")
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.try_add(rhs).expect("field mismatch")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.try_sub(rhs).expect("field mismatch")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.try_mul(rhs).expect("field mismatch")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        let f = &self.field;
        Poly::new(f, self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }
}

pub(crate) fn fmt_coeff_term(field: &Gf, c: Fe, var: &str, k: i64, first: bool) -> String {
    let mut s = String::new();
    if !first {
        s.push_str(" + ");
    }
    let name = field.fmt_elem(c);
    let coef = if field.e() > 1 && name.contains('u') && name != "u" {
        format!("({name})")
    } else {
        name
    };
    let mono = match k {
        0 => String::new(),
        1 => var.to_string(),
        _ if k < 0 => format!("{var}^({k})"),
        _ => format!("{var}^{k}"),
    };
    if mono.is_empty() {
        s.push_str(&coef);
    } else if c == Fe::ONE {
        s.push_str(&mono);
    } else {
        s.push_str(&coef);
        s.push_str(&mono);
    }
    s
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            write!(f, "{}", fmt_coeff_term(&self.field, c, "t", k as i64, first))?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}
