//! Finite fields F_q, q = p^e.
//!
//! An element is stored as its index `c_0 + c_1 p + ... + c_{e-1} p^{e-1}`, where
//! `(c_0, ..., c_{e-1})` are its coordinates in the basis `1, u, ..., u^{e-1}`.
//! Index order is the canonical element order: `F_4 = [0, 1, u, u+1]`.
//! Multiplication goes through discrete log tables built once per field.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly;

pub const MAX_FIELD_SIZE: u64 = 1 << 20;
pub const MAX_EXTENSION_DEGREE: u32 = 8;

/// An element of some `Gf`. Carries no reference to its field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Raise the left operand to the power given by the index of the right one.
    Pow,
}

#[derive(Debug)]
enum AddKind {
    Xor,
    Prime,
    Table(Vec<u32>),
    Digits,
}

pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    /// Monic modulus over F_p, low coefficient first, length e + 1.
    modulus: Vec<u32>,
    add_kind: AddKind,
    neg: Vec<u32>,
    /// exp[k] = g^k for k in [0, 2(q-1)).
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Shared handle to a finite field.
#[derive(Clone, Debug)]
pub struct Gf(Arc<FieldSpec>);

impl PartialEq for Gf {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.e == other.0.e)
    }
}

impl Eq for Gf {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Builds F_{p^e} with the canonical modulus: the first monic irreducible of degree e
/// in index order (constant coefficient least significant). For e = 1 this is `u`.
pub fn make_field(p: u64, e: u32) -> Result<Gf> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if e == 0 || e > MAX_EXTENSION_DEGREE {
        return Err(Error::SizeExceeded(format!(
            "extension degree {e} outside 1..={MAX_EXTENSION_DEGREE}"
        )));
    }
    let q = p
        .checked_pow(e)
        .filter(|&q| q <= MAX_FIELD_SIZE)
        .ok_or_else(|| Error::SizeExceeded(format!("{p}^{e} exceeds 2^20")))?;
    let p32 = p as u32;
    let modulus = if e == 1 {
        vec![0, 1]
    } else {
        let prime = build(p32, 1, vec![0, 1]);
        let m = poly::first_monic_irreducible(&prime, e as usize)?;
        m.coeffs().iter().map(|c| c.0).collect()
    };
    debug_assert_eq!(modulus.len(), e as usize + 1);
    let field = build(p32, e, modulus);
    debug_assert_eq!(field.0.q as u64, q);
    Ok(field)
}

/// Parses a prime power into `(p, e)`.
pub fn split_prime_power(q: u64) -> Result<(u64, u32)> {
    let factors = prime_factors(q);
    match factors.as_slice() {
        [p] => {
            let mut e = 0;
            let mut r = q;
            while r > 1 {
                r /= p;
                e += 1;
            }
            Ok((*p, e))
        }
        _ => Err(Error::NotPrime(q)),
    }
}

fn build(p: u32, e: u32, modulus: Vec<u32>) -> Gf {
    let q = p.pow(e);
    let e_us = e as usize;
    let to_coords = |x: u32| -> Vec<u32> {
        let mut c = vec![0u32; e_us];
        let mut r = x;
        for slot in c.iter_mut() {
            *slot = r % p;
            r /= p;
        }
        c
    };
    let from_coords = |c: &[u32]| -> u32 { c.iter().rev().fold(0u32, |acc, &d| acc * p + d) };
    let mul_raw = |a: u32, b: u32| -> u32 {
        let (ca, cb) = (to_coords(a), to_coords(b));
        let mut prod = vec![0u64; 2 * e_us];
        for (i, &x) in ca.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        // reduce by the monic modulus from the top
        for k in (e_us..2 * e_us).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &m) in modulus[..e_us].iter().enumerate() {
                let idx = k - e_us + i;
                prod[idx] = (prod[idx] + (p as u64 - c) * m as u64) % p as u64;
            }
        }
        let low: Vec<u32> = prod[..e_us].iter().map(|&x| x as u32).collect();
        from_coords(&low)
    };
    let pow_raw = |a: u32, mut n: u64| -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while n > 0 {
            if n & 1 == 1 {
                acc = mul_raw(acc, base);
            }
            base = mul_raw(base, base);
            n >>= 1;
        }
        acc
    };

    let order = (q - 1) as u64;
    let factors = prime_factors(order);
    let generator = if q == 2 {
        1
    } else {
        (2..q)
            .find(|&g| factors.iter().all(|&l| pow_raw(g, order / l) != 1))
            .expect("multiplicative group of a finite field is cyclic")
    };
    let n = (q - 1) as usize;
    let mut exp = vec![0u32; 2 * n.max(1)];
    let mut log = vec![0u32; q as usize];
    let mut x = 1u32;
    for k in 0..n {
        exp[k] = x;
        exp[k + n] = x;
        log[x as usize] = k as u32;
        x = mul_raw(x, generator);
    }

    let neg: Vec<u32> = (0..q)
        .map(|a| {
            let c: Vec<u32> = to_coords(a).iter().map(|&d| (p - d) % p).collect();
            from_coords(&c)
        })
        .collect();
    let add_digits = |a: u32, b: u32| -> u32 {
        let (ca, cb) = (to_coords(a), to_coords(b));
        let c: Vec<u32> = ca.iter().zip(&cb).map(|(&x, &y)| (x + y) % p).collect();
        from_coords(&c)
    };
    let add_kind = if p == 2 {
        AddKind::Xor
    } else if e == 1 {
        AddKind::Prime
    } else if q <= 256 {
        let mut t = vec![0u32; (q * q) as usize];
        for a in 0..q {
            for b in 0..q {
                t[(a * q + b) as usize] = add_digits(a, b);
            }
        }
        AddKind::Table(t)
    } else {
        AddKind::Digits
    };

    Gf(Arc::new(FieldSpec {
        p,
        e,
        q,
        modulus,
        add_kind,
        neg,
        exp,
        log,
    }))
}

impl Gf {
    pub fn p(&self) -> u32 {
        self.0.p
    }

    pub fn e(&self) -> u32 {
        self.0.e
    }

    pub fn q(&self) -> u32 {
        self.0.q
    }

    /// Modulus coefficients over F_p, constant term first, monic of degree e.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    pub fn contains(&self, a: Fe) -> bool {
        a.0 < self.0.q
    }

    /// All q elements in canonical (index) order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.0.q).map(Fe)
    }

    pub fn coords(&self, a: Fe) -> Vec<u32> {
        let p = self.0.p;
        let mut r = a.0;
        (0..self.0.e)
            .map(|_| {
                let d = r % p;
                r /= p;
                d
            })
            .collect()
    }

    pub fn from_coords(&self, c: &[u32]) -> Result<Fe> {
        if c.len() != self.0.e as usize || c.iter().any(|&d| d >= self.0.p) {
            return Err(Error::FieldMismatch);
        }
        Ok(Fe(c.iter().rev().fold(0u32, |acc, &d| acc * self.0.p + d)))
    }

    /// Image of an integer under Z -> F_p -> F_q.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.0.p as i64) as u32)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match &self.0.add_kind {
            AddKind::Xor => Fe(a.0 ^ b.0),
            AddKind::Prime => {
                let s = a.0 + b.0;
                Fe(if s >= self.0.p { s - self.0.p } else { s })
            }
            AddKind::Table(t) => Fe(t[(a.0 * self.0.q + b.0) as usize]),
            AddKind::Digits => {
                let p = self.0.p;
                let (mut x, mut y) = (a.0, b.0);
                let mut out = 0u32;
                let mut w = 1u32;
                for _ in 0..self.0.e {
                    out += ((x % p + y % p) % p) * w;
                    x /= p;
                    y /= p;
                    w *= p;
                }
                Fe(out)
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.0.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let l = self.0.log[a.0 as usize] + self.0.log[b.0 as usize];
        Fe(self.0.exp[l as usize])
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.0.q - 1;
        let l = self.0.log[a.0 as usize];
        Ok(Fe(self.0.exp[((n - l) % n) as usize]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    #[inline]
    pub fn pow(&self, a: Fe, n: u64) -> Fe {
        if n == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let order = (self.0.q - 1) as u64;
        let l = (self.0.log[a.0 as usize] as u64 * (n % order)) % order;
        Fe(self.0.exp[l as usize])
    }

    /// Checked binary operation; for `Pow` the exponent is `b.0`.
    pub fn arith(&self, a: Fe, b: Fe, op: FieldOp) -> Result<Fe> {
        if op != FieldOp::Pow && !self.contains(b) || !self.contains(a) {
            return Err(Error::FieldMismatch);
        }
        Ok(match op {
            FieldOp::Add => self.add(a, b),
            FieldOp::Sub => self.sub(a, b),
            FieldOp::Mul => self.mul(a, b),
            FieldOp::Div => self.div(a, b)?,
            FieldOp::Pow => self.pow(a, b.0 as u64),
        })
    }

    pub fn fmt_elem(&self, a: Fe) -> String {
        if self.0.e == 1 {
            return a.0.to_string();
        }
        let c = self.coords(a);
        let mut parts = Vec::new();
        for (k, &d) in c.iter().enumerate().rev() {
            if d == 0 {
                continue;
            }
            let coef = if d == 1 && k > 0 { String::new() } else { d.to_string() };
            parts.push(match k {
                0 => coef,
                1 => format!("{coef}u"),
                _ => format!("{coef}u^{k}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("+")
        }
    }
}
