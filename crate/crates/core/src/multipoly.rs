//! Sparse multivariate polynomials over F_q, F_q[t] or F_q[t, 1/t], and the
//! substitution `x_j = sum_b y_{j,b} t^b` that turns one polynomial over
//! F_q[t, 1/t] into a family of polynomials over F_q, one per power of t.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{Fe, Gf};
use crate::laurent::{Laurent, OrdValue};
use crate::poly::Poly;

pub type Monomial = Vec<u32>;

/// Ring operations needed for coefficients and evaluation points. The field is
/// passed explicitly because a bare [`Fe`] does not know it.
pub trait Coefficient: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn zero(field: &Gf) -> Self;
    fn one(field: &Gf) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self, field: &Gf) -> Self;
    fn mul(&self, other: &Self, field: &Gf) -> Self;
    fn neg(&self, field: &Gf) -> Self;
    /// `ord` of the coefficient viewed in F_q((1/t)).
    fn coeff_ord(&self) -> OrdValue;
    /// The field an element knows about, if it carries one.
    fn known_field(&self) -> Option<&Gf>;
    fn render(&self, _field: &Gf) -> String {
        self.to_string()
    }
}

impl Coefficient for Fe {
    fn zero(_: &Gf) -> Self {
        Fe::ZERO
    }
    fn one(_: &Gf) -> Self {
        Fe::ONE
    }
    fn is_zero(&self) -> bool {
        Fe::is_zero(*self)
    }
    fn add(&self, other: &Self, field: &Gf) -> Self {
        field.add(*self, *other)
    }
    fn mul(&self, other: &Self, field: &Gf) -> Self {
        field.mul(*self, *other)
    }
    fn neg(&self, field: &Gf) -> Self {
        field.neg(*self)
    }
    fn coeff_ord(&self) -> OrdValue {
        if Fe::is_zero(*self) {
            OrdValue::NegInf
        } else {
            OrdValue::Finite(0)
        }
    }
    fn known_field(&self) -> Option<&Gf> {
        None
    }
    fn render(&self, field: &Gf) -> String {
        field.fmt_elem(*self)
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Coefficient for Poly {
    fn zero(field: &Gf) -> Self {
        Poly::zero(field)
    }
    fn one(field: &Gf) -> Self {
        Poly::one(field)
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn add(&self, other: &Self, _: &Gf) -> Self {
        self + other
    }
    fn mul(&self, other: &Self, _: &Gf) -> Self {
        self * other
    }
    fn neg(&self, _: &Gf) -> Self {
        -self
    }
    fn coeff_ord(&self) -> OrdValue {
        self.degree()
    }
    fn known_field(&self) -> Option<&Gf> {
        Some(self.field())
    }
}

impl Coefficient for Laurent {
    fn zero(field: &Gf) -> Self {
        Laurent::zero(field)
    }
    fn one(field: &Gf) -> Self {
        Laurent::one(field)
    }
    fn is_zero(&self) -> bool {
        Laurent::is_zero(self)
    }
    fn add(&self, other: &Self, _: &Gf) -> Self {
        self + other
    }
    fn mul(&self, other: &Self, _: &Gf) -> Self {
        self * other
    }
    fn neg(&self, _: &Gf) -> Self {
        -self
    }
    fn coeff_ord(&self) -> OrdValue {
        self.ord()
    }
    fn known_field(&self) -> Option<&Gf> {
        Some(self.field())
    }
}

/// Ring inclusions used when evaluating: a coefficient of type `Self` read in `R`.
pub trait Embed<R> {
    fn embed(&self, field: &Gf) -> R;
}

impl Embed<Fe> for Fe {
    fn embed(&self, _: &Gf) -> Fe {
        *self
    }
}

impl Embed<Poly> for Fe {
    fn embed(&self, field: &Gf) -> Poly {
        Poly::constant(field, *self)
    }
}

impl Embed<Laurent> for Fe {
    fn embed(&self, field: &Gf) -> Laurent {
        Laurent::monomial(field, *self, 0)
    }
}

impl Embed<Poly> for Poly {
    fn embed(&self, _: &Gf) -> Poly {
        self.clone()
    }
}

impl Embed<Laurent> for Poly {
    fn embed(&self, _: &Gf) -> Laurent {
        Laurent::from_poly(self)
    }
}

impl Embed<Laurent> for Laurent {
    fn embed(&self, _: &Gf) -> Laurent {
        self.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeInfo {
    pub total_degree: OrdValue,
    pub is_chevalley: bool,
    pub is_homogeneous: bool,
    /// Largest `ord` among the coefficients (the `h` of the reduction).
    pub max_coeff_ord: OrdValue,
}

#[derive(Clone, PartialEq)]
pub struct MultiPoly<C> {
    field: Gf,
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

pub type FqPoly = MultiPoly<Fe>;
pub type LaurentPoly = MultiPoly<Laurent>;

impl<C: Coefficient> MultiPoly<C> {
    pub fn zero(field: &Gf, nvars: usize) -> Self {
        MultiPoly {
            field: field.clone(),
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        field: &Gf,
        nvars: usize,
        terms: impl IntoIterator<Item = (Monomial, C)>,
    ) -> Result<Self> {
        let mut p = MultiPoly::zero(field, nvars);
        for (m, c) in terms {
            if m.len() != nvars {
                return Err(Error::ArityMismatch {
                    expected: nvars,
                    got: m.len(),
                });
            }
            if c.known_field().is_some_and(|g| g != field) {
                return Err(Error::FieldMismatch);
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    /// `c * x_k` in `nvars` variables.
    pub fn var(field: &Gf, nvars: usize, k: usize, c: C) -> Self {
        let mut m = vec![0; nvars];
        m[k] = 1;
        let mut p = MultiPoly::zero(field, nvars);
        p.add_term(m, c);
        p
    }

    pub fn constant(field: &Gf, nvars: usize, c: C) -> Self {
        let mut p = MultiPoly::zero(field, nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: C) {
        debug_assert_eq!(m.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.add(&c, &self.field);
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn field(&self) -> &Gf {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &[u32]) -> Option<&C> {
        self.terms.get(m)
    }

    /// Terms in graded lexicographic order, highest first.
    pub fn terms_grlex(&self) -> Vec<(&Monomial, &C)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let (da, db) = (a.iter().sum::<u32>(), b.iter().sum::<u32>());
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        v
    }

    pub fn total_degree(&self) -> OrdValue {
        self.terms
            .keys()
            .map(|m| OrdValue::Finite(m.iter().sum::<u32>() as i64))
            .max()
            .unwrap_or(OrdValue::NegInf)
    }

    /// Zero constant term.
    pub fn is_chevalley(&self) -> bool {
        !self.terms.keys().any(|m| m.iter().all(|&e| e == 0))
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.iter().sum::<u32>());
        match degs.next() {
            Some(d) => degs.all(|e| e == d),
            None => true,
        }
    }

    pub fn degree_info(&self) -> DegreeInfo {
        DegreeInfo {
            total_degree: self.total_degree(),
            is_chevalley: self.is_chevalley(),
            is_homogeneous: self.is_homogeneous(),
            max_coeff_ord: self
                .terms
                .values()
                .map(|c| c.coeff_ord())
                .max()
                .unwrap_or(OrdValue::NegInf),
        }
    }

    /// Indices of variables that occur in some term.
    pub fn variables_used(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&k| self.terms.keys().any(|m| m[k] > 0))
            .collect()
    }

    /// The same polynomial viewed in `nvars >= self.nvars` variables.
    pub fn pad_vars(&self, nvars: usize) -> Result<Self> {
        if nvars < self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                got: nvars,
            });
        }
        let terms = self.terms.iter().map(|(m, c)| {
            let mut m = m.clone();
            m.resize(nvars, 0);
            (m, c.clone())
        });
        MultiPoly::from_terms(&self.field, nvars, terms)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.nvars != other.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                got: other.nvars,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut acc: HashMap<Monomial, C> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m: Monomial = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                let c = ca.mul(cb, &self.field);
                match acc.get_mut(&m) {
                    Some(e) => *e = e.add(&c, &self.field),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        Ok(MultiPoly {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.neg(&self.field)))
                .collect(),
        }
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = MultiPoly::zero(&self.field, self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.mul(s, &self.field));
        }
        out
    }

    /// Substitutes `x_k := polys[k]` where every `polys[k]` lives in `m` variables.
    pub fn compose(&self, polys: &[MultiPoly<C>]) -> Result<MultiPoly<C>> {
        if polys.len() != self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                got: polys.len(),
            });
        }
        let m = polys.first().map_or(0, |p| p.nvars);
        let mut out = MultiPoly::zero(&self.field, m);
        let mut powers: Vec<Vec<MultiPoly<C>>> = polys
            .iter()
            .map(|_| vec![MultiPoly::constant(&self.field, m, C::one(&self.field))])
            .collect();
        for (mono, c) in &self.terms {
            let mut prod = MultiPoly::constant(&self.field, m, c.clone());
            for (k, &e) in mono.iter().enumerate() {
                while powers[k].len() <= e as usize {
                    let next = powers[k].last().unwrap().try_mul(&polys[k])?;
                    powers[k].push(next);
                }
                if e > 0 {
                    prod = prod.try_mul(&powers[k][e as usize])?;
                }
            }
            out = out.try_add(&prod)?;
        }
        Ok(out)
    }

    /// Exact evaluation at a point of any ring the coefficients embed into.
    pub fn eval<R>(&self, point: &[R]) -> Result<R>
    where
        R: Coefficient,
        C: Embed<R>,
    {
        if point.len() != self.nvars {
            return Err(Error::ArityMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        if point
            .iter()
            .any(|r| r.known_field().is_some_and(|g| *g != self.field))
        {
            return Err(Error::FieldMismatch);
        }
        let f = &self.field;
        let mut powers: Vec<Vec<R>> = point.iter().map(|_| vec![R::one(f)]).collect();
        let mut acc = R::zero(f);
        for (m, c) in &self.terms {
            let mut v: R = c.embed(f);
            for (k, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[k].len() <= e as usize {
                    let next = powers[k].last().unwrap().mul(&point[k], f);
                    powers[k].push(next);
                }
                v = v.mul(&powers[k][e as usize], f);
            }
            acc = acc.add(&v, f);
        }
        Ok(acc)
    }
}

impl MultiPoly<Laurent> {
    /// Smallest exponent of t occurring in any coefficient.
    pub fn min_coeff_exponent(&self) -> Option<i64> {
        self.terms.values().filter_map(|c| c.min_exponent()).min()
    }

    /// Evaluation at a point of F_q[t]^s.
    pub fn eval_polys(&self, x: &[Poly]) -> Result<Laurent> {
        let pts: Vec<Laurent> = x.iter().map(Laurent::from_poly).collect();
        self.eval(&pts)
    }
}

impl MultiPoly<Poly> {
    pub fn to_laurent(&self) -> MultiPoly<Laurent> {
        MultiPoly {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), Laurent::from_poly(c)))
                .collect(),
        }
    }
}

impl MultiPoly<Fe> {
    pub fn to_laurent(&self) -> MultiPoly<Laurent> {
        MultiPoly {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), Laurent::monomial(&self.field, c, 0)))
                .collect(),
        }
    }

    pub fn to_poly_coeffs(&self) -> MultiPoly<Poly> {
        MultiPoly {
            field: self.field.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| (m.clone(), Poly::constant(&self.field, c)))
                .collect(),
        }
    }
}

impl<C: Coefficient> fmt::Display for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms_grlex().into_iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = m
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(k, &e)| {
                    if e == 1 {
                        format!("x{}", k + 1)
                    } else {
                        format!("x{}^{}", k + 1, e)
                    }
                })
                .collect();
            let cs = c.render(&self.field);
            let one = c == &C::one(&self.field);
            match (vars.is_empty(), one) {
                (true, _) => write!(f, "{cs}")?,
                (false, true) => write!(f, "{}", vars.join("*"))?,
                (false, false) if cs.contains(' ') => write!(f, "({cs})*{}", vars.join("*"))?,
                (false, false) => write!(f, "{cs}*{}", vars.join("*"))?,
            }
        }
        Ok(())
    }
}

impl<C: Coefficient> fmt::Debug for MultiPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({self})", self.nvars)
    }
}

/// Start of each variable's coefficient block in the flat y-indexing.
pub fn block_offsets(bs: &[usize]) -> Vec<usize> {
    let mut offs = Vec::with_capacity(bs.len() + 1);
    let mut acc = 0;
    for &b in bs {
        offs.push(acc);
        acc += b + 1;
    }
    offs.push(acc);
    offs
}

/// Flat index of `y_{j,b}`: `sum_{j' < j} (bs[j'] + 1) + b`.
pub fn flat_index(bs: &[usize], j: usize, b: usize) -> usize {
    assert!(b <= bs[j], "coefficient index out of range");
    bs[..j].iter().map(|&x| x + 1).sum::<usize>() + b
}

/// Polynomial in t with coefficients in F_q[y], indexed by the power of t.
type TSeries = BTreeMap<i64, MultiPoly<Fe>>;

fn series_mul(a: &TSeries, b: &TSeries) -> TSeries {
    let mut out: TSeries = BTreeMap::new();
    for (i, pa) in a {
        for (j, pb) in b {
            let prod = pa.try_mul(pb).expect("same ring");
            let slot = out
                .entry(i + j)
                .or_insert_with(|| MultiPoly::zero(pa.field(), pa.nvars()));
            *slot = slot.try_add(&prod).expect("same ring");
        }
    }
    out.retain(|_, p| !p.is_zero());
    out
}

/// Substitutes `x_j = sum_{b=0}^{bs[j]} y_{j,b} t^b` into `form` and collects
/// powers of t: returns `m -> G_m(y)` for every `m` with `G_m != 0`, so that
/// `form(x(y)) = sum_m G_m(y) t^m`.
pub fn expand_substitution(
    form: &MultiPoly<Laurent>,
    bs: &[usize],
) -> Result<BTreeMap<i64, MultiPoly<Fe>>> {
    if form.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if bs.len() != form.nvars() {
        return Err(Error::ArityMismatch {
            expected: form.nvars(),
            got: bs.len(),
        });
    }
    let field = form.field();
    let offs = block_offsets(bs);
    let n = offs[bs.len()];
    let unit = || {
        let mut s = TSeries::new();
        s.insert(0, MultiPoly::constant(field, n, Fe::ONE));
        s
    };
    let mut powers: Vec<Vec<TSeries>> = bs
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let xj: TSeries = (0..=b)
                .map(|k| (k as i64, MultiPoly::var(field, n, offs[j] + k, Fe::ONE)))
                .collect();
            vec![unit(), xj]
        })
        .collect();

    let mut out: BTreeMap<i64, MultiPoly<Fe>> = BTreeMap::new();
    for (mono, coeff) in form.terms() {
        let mut prod = unit();
        for (j, &e) in mono.iter().enumerate() {
            if e == 0 {
                continue;
            }
            while powers[j].len() <= e as usize {
                let next = series_mul(powers[j].last().unwrap(), &powers[j][1]);
                powers[j].push(next);
            }
            prod = series_mul(&prod, &powers[j][e as usize]);
        }
        for (shift, c) in coeff.terms() {
            for (m, g) in &prod {
                let slot = out
                    .entry(m + shift)
                    .or_insert_with(|| MultiPoly::zero(field, n));
                *slot = slot.try_add(&g.scale(&c))?;
            }
        }
    }
    out.retain(|_, p| !p.is_zero());
    Ok(out)
}

/// Inverse of the flat index map: `x_j = sum_b y[flat(j, b)] t^b`.
pub fn assemble_polys(field: &Gf, y: &[Fe], bs: &[usize]) -> Result<Vec<Poly>> {
    let offs = block_offsets(bs);
    if y.len() != offs[bs.len()] {
        return Err(Error::ArityMismatch {
            expected: offs[bs.len()],
            got: y.len(),
        });
    }
    Ok(bs
        .iter()
        .enumerate()
        .map(|(j, &b)| Poly::new(field, y[offs[j]..offs[j] + b + 1].to_vec()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type LaurentTerm<'a> = (&'a [u32], &'a [(i64, i64)]);

    fn lp(f: &Gf, terms: &[LaurentTerm]) -> MultiPoly<Laurent> {
        let nvars = terms[0].0.len();
        MultiPoly::from_terms(
            f,
            nvars,
            terms
                .iter()
                .map(|(m, c)| (m.to_vec(), Laurent::from_ints(f, c))),
        )
        .unwrap()
    }

    fn fp(f: &Gf, terms: &[(&[u32], i64)]) -> MultiPoly<Fe> {
        let nvars = terms[0].0.len();
        MultiPoly::from_terms(
            f,
            nvars,
            terms.iter().map(|(m, c)| (m.to_vec(), f.from_int(*c))),
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let f2 = make_field(2, 1).unwrap();
        let g = fp(&f2, &[(&[1, 1, 0], 1), (&[0, 0, 2], 1)]);
        assert_eq!(g.eval(&[Fe(1), Fe(1), Fe(1)]).unwrap(), Fe(0));
        assert_eq!(g.eval(&[Fe::ZERO; 3]).unwrap(), Fe(0));

        let h = lp(&f2, &[(&[2], &[(-1, 1)])]);
        let x = Poly::from_ints(&f2, &[1, 1]);
        assert_eq!(
            h.eval_polys(&[x]).unwrap(),
            Laurent::from_ints(&f2, &[(1, 1), (-1, 1)])
        );
        assert!(matches!(
            g.eval(&[Fe(1)]),
            Err(Error::ArityMismatch { expected: 3, got: 1 })
        ));
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(
            h.eval_polys(&[Poly::one(&f3)]),
            Err(Error::FieldMismatch)
        );
    }

    #[test]
    fn degree_info_examples() {
        let f2 = make_field(2, 1).unwrap();
        let a = fp(&f2, &[(&[1, 1, 0], 1), (&[0, 0, 1], 1)]);
        let ia = a.degree_info();
        assert_eq!(ia.total_degree, 2.into());
        assert!(ia.is_chevalley && !ia.is_homogeneous);
        let b = fp(&f2, &[(&[2, 0], 1), (&[0, 2], 1)]);
        assert!(b.degree_info().is_chevalley && b.degree_info().is_homogeneous);
        let c = lp(&f2, &[(&[1, 1, 0], &[(-1, 1)]), (&[0, 0, 2], &[(0, 1)])]);
        assert_eq!(c.degree_info().max_coeff_ord, 0.into());
        let d = fp(&f2, &[(&[0, 0], 1), (&[1, 0], 1)]);
        assert!(!d.is_chevalley());
        assert_eq!(MultiPoly::<Fe>::zero(&f2, 2).total_degree(), OrdValue::NegInf);
    }

    #[test]
    fn expansion_examples() {
        let f2 = make_field(2, 1).unwrap();
        let form = lp(&f2, &[(&[1, 1, 0], &[(-1, 1)]), (&[0, 0, 2], &[(0, 1)])]);
        let g = expand_substitution(&form, &[0, 0, 0]).unwrap();
        assert_eq!(g.keys().copied().collect::<Vec<_>>(), vec![-1, 0]);
        assert_eq!(g[&-1], fp(&f2, &[(&[1, 1, 0], 1)]));
        assert_eq!(g[&0], fp(&f2, &[(&[0, 0, 2], 1)]));

        let lin = lp(&f2, &[(&[1], &[(-2, 1)])]);
        let g = expand_substitution(&lin, &[1]).unwrap();
        assert_eq!(g[&-2], fp(&f2, &[(&[1, 0], 1)]));
        assert_eq!(g[&-1], fp(&f2, &[(&[0, 1], 1)]));

        let sq = lp(&f2, &[(&[2], &[(0, 1)])]);
        let g = expand_substitution(&sq, &[1]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[&0], fp(&f2, &[(&[2, 0], 1)]));
        assert_eq!(g[&2], fp(&f2, &[(&[0, 2], 1)]));

        assert_eq!(
            expand_substitution(&MultiPoly::zero(&f2, 1), &[0]),
            Err(Error::ZeroPolynomial)
        );
    }

    #[test]
    fn flat_index_is_bijective() {
        let bs = [2, 0, 3, 1];
        let n = block_offsets(&bs)[bs.len()];
        let mut seen = vec![false; n];
        for (j, &b) in bs.iter().enumerate() {
            for k in 0..=b {
                let i = flat_index(&bs, j, k);
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    fn random_form(rng: &mut ChaCha8Rng, f: &Gf, s: usize, deg: u32, homogeneous: bool) -> MultiPoly<Laurent> {
        loop {
            let mut terms = Vec::new();
            for _ in 0..rng.gen_range(1..6) {
                let d = if homogeneous { deg } else { rng.gen_range(1..=deg) };
                let mut m = vec![0u32; s];
                for _ in 0..d {
                    m[rng.gen_range(0..s)] += 1;
                }
                let coeff: Vec<(i64, Fe)> = (0..rng.gen_range(1..3))
                    .map(|_| (rng.gen_range(-3..=3), Fe(rng.gen_range(1..f.q()))))
                    .collect();
                terms.push((m, Laurent::from_terms(f, coeff)));
            }
            let p = MultiPoly::from_terms(f, s, terms).unwrap();
            if !p.is_zero() {
                return p;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn expansion_round_trip(seed in any::<u64>(), p_idx in 0usize..3) {
            let f = [make_field(2, 1), make_field(3, 1), make_field(2, 2)][p_idx].clone().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = rng.gen_range(1..=3);
            let homogeneous = rng.gen_bool(0.5);
            let deg = rng.gen_range(1..=3);
            let form = random_form(&mut rng, &f, s, deg, homogeneous);
            let bs: Vec<usize> = (0..s).map(|_| rng.gen_range(0..3)).collect();
            let g = expand_substitution(&form, &bs).unwrap();
            let n = block_offsets(&bs)[s];
            let y: Vec<Fe> = (0..n).map(|_| Fe(rng.gen_range(0..f.q()))).collect();
            let x = assemble_polys(&f, &y, &bs).unwrap();
            let lhs = form.eval_polys(&x).unwrap();
            let mut rhs = Laurent::zero(&f);
            for (m, gm) in &g {
                rhs = &rhs + &Laurent::monomial(&f, gm.eval(&y).unwrap(), *m);
            }
            prop_assert_eq!(lhs, rhs);

            let info = form.degree_info();
            let dmax = info.total_degree.finite().unwrap();
            let hmax = info.max_coeff_ord.finite().unwrap();
            let bmax = *bs.iter().max().unwrap() as i64;
            for (m, gm) in &g {
                prop_assert!(gm.is_chevalley() || !info.is_chevalley);
                prop_assert!(gm.total_degree() <= info.total_degree);
                if info.is_homogeneous {
                    prop_assert!(gm.is_homogeneous());
                    prop_assert_eq!(gm.total_degree(), info.total_degree);
                }
                prop_assert!(*m >= form.min_coeff_exponent().unwrap());
                prop_assert!(*m <= dmax * bmax + hmax);
            }
        }
    }
}
