//! Norm forms of F_{q^d} / F_q: forms of degree d in d variables with only the
//! trivial zero.

use crate::error::{Error, Result};
use crate::field::{Fe, Gf};
use crate::multipoly::MultiPoly;
use crate::poly::{first_monic_irreducible, Poly};
use crate::solver::{solve_nontrivial, Outcome, SolveMode};

pub const MAX_NORM_DEGREE: u32 = 4;
const MAX_EXTENSION_SIZE: u64 = 1 << 20;
const MAX_ANISOTROPY_SPACE: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq)]
pub struct NormFormBundle {
    pub psi: MultiPoly<Fe>,
    pub base: Gf,
    pub d: u32,
    /// F_{q^d} = F_q[z] / (ext_modulus).
    pub ext_modulus: Poly,
    pub basis_note: String,
}

impl NormFormBundle {
    /// The element `sum_k coords[k] z^k` of the extension.
    pub fn element(&self, coords: &[Fe]) -> Poly {
        Poly::new(&self.base, coords.to_vec())
    }

    /// Coordinates of a reduced element in the basis `1, z, ..., z^(d-1)`.
    pub fn coords(&self, a: &Poly) -> Vec<Fe> {
        (0..self.d as usize).map(|k| a.coeff(k)).collect()
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        a.mul_mod(b, &self.ext_modulus).expect("same base field")
    }

    /// `a^((q^d - 1)/(q - 1))`, the product of the Frobenius conjugates of `a`.
    pub fn norm(&self, a: &Poly) -> Fe {
        let q = self.base.q() as u64;
        let e = (q.pow(self.d) - 1) / (q - 1);
        let n = a.pow_mod(e, &self.ext_modulus).expect("nonconstant modulus");
        debug_assert!(n.deg().unwrap_or(0) == 0);
        n.coeff(0)
    }

    /// Every element of F_{q^d}, by coordinate index with the constant coordinate least significant.
    pub fn elements(&self) -> impl Iterator<Item = Vec<Fe>> + '_ {
        let q = self.base.q() as u64;
        let d = self.d as usize;
        (0..q.pow(self.d)).map(move |mut idx| {
            let mut c = vec![Fe::ZERO; d];
            for x in c.iter_mut() {
                *x = Fe((idx % q) as u32);
                idx /= q;
            }
            c
        })
    }
}

fn determinant(field: &Gf, n: usize, m: &[Vec<MultiPoly<Fe>>]) -> MultiPoly<Fe> {
    let size = m.len();
    if size == 1 {
        return m[0][0].clone();
    }
    let mut det = MultiPoly::zero(field, n);
    for c in 0..size {
        if m[0][c].is_zero() {
            continue;
        }
        let minor: Vec<Vec<MultiPoly<Fe>>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(k, _)| k != c)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let term = m[0][c].try_mul(&determinant(field, n, &minor)).expect("same ring");
        det = if c % 2 == 0 {
            det.try_add(&term)
        } else {
            det.try_add(&term.neg())
        }
        .expect("same ring");
    }
    det
}

/// The determinant of multiplication by `x_1 + x_2 z + ... + x_d z^(d-1)` on F_{q^d}.
pub fn build_norm_form(field: &Gf, d: u32) -> Result<NormFormBundle> {
    if d == 0 {
        return Err(Error::Invalid("norm form degree must be positive".into()));
    }
    if d > MAX_NORM_DEGREE || (field.q() as u64).checked_pow(d).is_none_or(|n| n > MAX_EXTENSION_SIZE) {
        return Err(Error::SizeExceeded(format!("norm form of degree {d} over F_{}", field.q())));
    }
    let du = d as usize;
    let modulus = first_monic_irreducible(field, du)?;
    // reduced powers z^0 .. z^(2d-2)
    let powers: Vec<Poly> = (0..2 * du - 1)
        .map(|j| Poly::monomial(field, Fe::ONE, j).rem(&modulus))
        .collect::<Result<_>>()?;
    // column c holds the coordinates of alpha * z^c; row r is the coordinate of z^r
    let matrix: Vec<Vec<MultiPoly<Fe>>> = (0..du)
        .map(|r| {
            (0..du)
                .map(|c| {
                    let terms = (0..du).map(|k| {
                        let mut mono = vec![0; du];
                        mono[k] = 1;
                        (mono, powers[k + c].coeff(r))
                    });
                    MultiPoly::from_terms(field, du, terms).expect("d variables")
                })
                .collect()
        })
        .collect();
    let psi = determinant(field, du, &matrix);
    debug_assert!(psi.is_homogeneous());
    Ok(NormFormBundle {
        psi,
        base: field.clone(),
        d,
        basis_note: format!("basis 1, z, ..., z^{} with z a root of {}", d - 1, modulus.to_string().replace('t', "z")),
        ext_modulus: modulus,
    })
}

/// True when `psi` vanishes only at the origin of F_q^n.
pub fn check_anisotropic(psi: &MultiPoly<Fe>) -> Result<bool> {
    if !psi.is_homogeneous() {
        return Err(Error::Invalid("anisotropy is checked for forms only".into()));
    }
    let n = psi.nvars();
    let space = (psi.field().q() as u64).checked_pow(n as u32);
    if space.is_none_or(|s| s > MAX_ANISOTROPY_SPACE) {
        return Err(Error::SizeExceeded(format!("F_{}^{n}", psi.field().q())));
    }
    let report = solve_nontrivial(psi.field(), std::slice::from_ref(psi), n, u64::MAX, SolveMode::Deterministic)?;
    Ok(report.outcome == Outcome::NotFound)
}
