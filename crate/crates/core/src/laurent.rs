//! Finite-support Laurent polynomials in F_q[t, 1/t], standing in for elements of
//! F_q((1/t)), together with the valuation data used throughout the crate.
//!
//! Magnitudes `<a> = g^{ord a}` are never materialized; every comparison of
//! magnitudes is a comparison of [`OrdValue`]s. A genuine series can be truncated
//! to a Laurent polynomial without changing any of the equations the reduction
//! builds, as long as the dropped exponents lie below `-M - d*B`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::{Fe, Gf};
use crate::poly::{fmt_coeff_term, Poly};

/// An exponent of the symbolic base, or `NegInf` for the zero element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OrdValue {
    NegInf,
    Finite(i64),
}

impl OrdValue {
    pub fn finite(self) -> Option<i64> {
        match self {
            OrdValue::Finite(n) => Some(n),
            OrdValue::NegInf => None,
        }
    }

    pub fn is_neg_inf(self) -> bool {
        self == OrdValue::NegInf
    }
}

impl Add for OrdValue {
    type Output = OrdValue;
    fn add(self, rhs: OrdValue) -> OrdValue {
        match (self, rhs) {
            (OrdValue::Finite(a), OrdValue::Finite(b)) => OrdValue::Finite(a + b),
            _ => OrdValue::NegInf,
        }
    }
}

impl Add<i64> for OrdValue {
    type Output = OrdValue;
    fn add(self, rhs: i64) -> OrdValue {
        self + OrdValue::Finite(rhs)
    }
}

impl From<i64> for OrdValue {
    fn from(n: i64) -> Self {
        OrdValue::Finite(n)
    }
}

impl fmt::Display for OrdValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdValue::NegInf => write!(f, "-inf"),
            OrdValue::Finite(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Laurent {
    field: Gf,
    terms: BTreeMap<i64, Fe>,
}

impl Laurent {
    pub fn zero(field: &Gf) -> Self {
        Laurent {
            field: field.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(field: &Gf) -> Self {
        Laurent::monomial(field, Fe::ONE, 0)
    }

    /// `c * t^k`
    pub fn monomial(field: &Gf, c: Fe, k: i64) -> Self {
        let mut l = Laurent::zero(field);
        if !c.is_zero() {
            l.terms.insert(k, c);
        }
        l
    }

    /// Sums repeated exponents and drops zeros.
    pub fn from_terms(field: &Gf, terms: impl IntoIterator<Item = (i64, Fe)>) -> Self {
        let mut l = Laurent::zero(field);
        for (k, c) in terms {
            l.add_term(k, c);
        }
        l
    }

    /// Shorthand for tests: `(exponent, integer coefficient)` pairs.
    pub fn from_ints(field: &Gf, terms: &[(i64, i64)]) -> Self {
        Laurent::from_terms(field, terms.iter().map(|&(k, c)| (k, field.from_int(c))))
    }

    pub fn from_poly(p: &Poly) -> Self {
        Laurent::from_terms(
            p.field(),
            p.coeffs().iter().enumerate().map(|(k, &c)| (k as i64, c)),
        )
    }

    pub(crate) fn add_term(&mut self, k: i64, c: Fe) {
        if c.is_zero() {
            return;
        }
        let f = &self.field;
        let entry = self.terms.entry(k).or_insert(Fe::ZERO);
        *entry = f.add(*entry, c);
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: i64) -> Fe {
        self.terms.get(&k).copied().unwrap_or(Fe::ZERO)
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (i64, Fe)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest exponent with a nonzero coefficient.
    pub fn ord(&self) -> OrdValue {
        match self.terms.keys().next_back() {
            Some(&k) => OrdValue::Finite(k),
            None => OrdValue::NegInf,
        }
    }

    /// Smallest exponent present, `None` for zero.
    pub fn min_exponent(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// `ord(a - x)` minimized over polynomials `x`: the largest negative exponent.
    pub fn frac_ord(&self) -> OrdValue {
        match self.terms.range(..0).next_back() {
            Some((&k, _)) => OrdValue::Finite(k),
            None => OrdValue::NegInf,
        }
    }

    /// The part with nonnegative exponents.
    pub fn polynomial_part(&self) -> Poly {
        let top = self.ord().finite().unwrap_or(-1).max(-1);
        let coeffs = (0..=top).map(|k| self.coeff(k)).collect();
        Poly::new(&self.field, coeffs)
    }

    /// `Some(poly)` when every exponent is nonnegative.
    pub fn to_poly(&self) -> Option<Poly> {
        match self.min_exponent() {
            Some(k) if k < 0 => None,
            _ => Some(self.polynomial_part()),
        }
    }

    pub fn scale(&self, c: Fe) -> Laurent {
        let f = &self.field;
        Laurent::from_terms(f, self.terms().map(|(k, a)| (k, f.mul(a, c))))
    }

    /// `self * t^k`
    pub fn shift(&self, k: i64) -> Laurent {
        Laurent {
            field: self.field.clone(),
            terms: self.terms.iter().map(|(&e, &c)| (e + k, c)).collect(),
        }
    }

    fn same_field(&self, other: &Laurent) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    pub fn try_add(&self, other: &Laurent) -> Result<Laurent> {
        self.same_field(other)?;
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.add_term(k, c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Laurent) -> Result<Laurent> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &Laurent) -> Result<Laurent> {
        self.same_field(other)?;
        let f = &self.field;
        let mut out = Laurent::zero(f);
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                out.add_term(i + j, f.mul(a, b));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Laurent {
        let mut acc = Laurent::one(&self.field);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        self.try_add(rhs).expect("field mismatch")
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        self.try_sub(rhs).expect("field mismatch")
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        self.try_mul(rhs).expect("field mismatch")
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        let f = &self.field;
        Laurent {
            field: f.clone(),
            terms: self.terms.iter().map(|(&k, &c)| (k, f.neg(c))).collect(),
        }
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms().rev().enumerate() {
            write!(f, "{}", fmt_coeff_term(&self.field, c, "t", k, i == 0))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Laurent({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use proptest::prelude::*;

    fn f2() -> Gf {
        make_field(2, 1).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let f = f2();
        let a = Laurent::from_ints(&f, &[(1, 1), (-1, 1)]);
        let b = Laurent::from_ints(&f, &[(1, 1), (0, 1)]);
        assert_eq!(&a + &b, Laurent::from_ints(&f, &[(0, 1), (-1, 1)]));
        let m1 = Laurent::from_ints(&f, &[(-1, 1)]);
        let m2 = Laurent::from_ints(&f, &[(-2, 1)]);
        assert_eq!(&m1 * &m2, Laurent::from_ints(&f, &[(-3, 1)]));
        let c = Laurent::from_ints(&f, &[(-1, 1), (0, 1)]);
        assert_eq!(&c * &b, Laurent::from_ints(&f, &[(1, 1), (-1, 1)]));
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(a.try_add(&Laurent::one(&f3)), Err(Error::FieldMismatch));
        assert_eq!(a.to_string(), "t + t^(-1)");
    }

    #[test]
    fn ord_examples() {
        let f = f2();
        assert_eq!(Laurent::from_ints(&f, &[(3, 1), (-1, 1)]).ord(), 3.into());
        assert_eq!(Laurent::zero(&f).ord(), OrdValue::NegInf);
        assert_eq!(Laurent::from_ints(&f, &[(-5, 1)]).ord(), (-5).into());
        assert!(OrdValue::NegInf < OrdValue::Finite(i64::MIN));
        assert_eq!(OrdValue::NegInf + 7, OrdValue::NegInf);
    }

    #[test]
    fn frac_ord_examples() {
        let f = f2();
        assert_eq!(
            Laurent::from_ints(&f, &[(2, 1), (-3, 1)]).frac_ord(),
            (-3).into()
        );
        assert_eq!(
            Laurent::from_ints(&f, &[(5, 1), (1, 1), (0, 1)]).frac_ord(),
            OrdValue::NegInf
        );
        assert_eq!(
            Laurent::from_ints(&f, &[(-1, 1), (-4, 1)]).frac_ord(),
            (-1).into()
        );
    }

    fn arb_laurent(f: Gf) -> impl Strategy<Value = Laurent> {
        let q = f.q();
        prop::collection::vec((-6i64..6, 0..q), 0..6)
            .prop_map(move |v| Laurent::from_terms(&f, v.into_iter().map(|(k, c)| (k, Fe(c)))))
    }

    fn arb_poly(f: Gf) -> impl Strategy<Value = Poly> {
        let q = f.q();
        prop::collection::vec(0..q, 0..6)
            .prop_map(move |c| Poly::new(&f, c.into_iter().map(Fe).collect()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ultrametric(a in arb_laurent(make_field(3, 1).unwrap()),
                       b in arb_laurent(make_field(3, 1).unwrap())) {
            let s = &a + &b;
            prop_assert!(s.ord() <= a.ord().max(b.ord()));
            if a.ord() != b.ord() {
                prop_assert_eq!(s.ord(), a.ord().max(b.ord()));
            }
        }

        #[test]
        fn ord_is_multiplicative(a in arb_laurent(make_field(2, 2).unwrap()),
                                 b in arb_laurent(make_field(2, 2).unwrap())) {
            prop_assert_eq!((&a * &b).ord(), a.ord() + b.ord());
        }

        #[test]
        fn frac_ord_ignores_polynomials(a in arb_laurent(make_field(2, 1).unwrap()),
                                        p in arb_poly(make_field(2, 1).unwrap())) {
            let fo = a.frac_ord();
            prop_assert!(fo < OrdValue::Finite(0));
            prop_assert_eq!((&a + &Laurent::from_poly(&p)).frac_ord(), fo);
            // removing the polynomial part attains the minimum distance
            let frac = &a - &Laurent::from_poly(&a.polynomial_part());
            prop_assert_eq!(frac.ord(), fo);
        }
    }
}
