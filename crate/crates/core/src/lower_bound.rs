//! Systems of forms whose nontrivial zeros over F_q[t] are all large.
//!
//! Linear forms `L_u` are built from products `varpi_{uw}` of distinct monic
//! irreducibles so that every polynomial kernel vector is divisible by a product
//! of `Delta` such blocks; blocks of a norm form then turn `L = 0` into the
//! equivalent system `Phi_m(L(x)) = 0`.
//!
//! Indices are 0-based: `u < Delta`, `w <= s - Delta`, `l < h_mult`, and the
//! variables are `x_0 .. x_{s-1}` with the kernel-defining ones last.

use crate::error::{Error, Result};
use crate::field::{Fe, Gf};
use crate::laurent::{Laurent, OrdValue};
use crate::multipoly::{expand_substitution, MultiPoly};
use crate::normic::{build_norm_form, NormFormBundle};
use crate::poly::{count_monic_irreducibles, enumerate_monic_irreducibles, minimal_degree_with_count, Poly};
use crate::solver::{solve_nontrivial, Outcome, SolveMode};

pub const MAX_LOWER_BOUND_DEGREE: u32 = 3;
pub const MAX_COMPOSED_TERMS: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundInstance {
    pub field: Gf,
    pub d: u32,
    /// Variables of the norm form.
    pub big_d: u32,
    pub r: usize,
    pub s: usize,
    pub h_mult: u32,
    /// `r * d * D`.
    pub delta_total: usize,
    /// Degree of every `pi`.
    pub delta: u32,
    pi: Vec<Poly>,
    /// `varpi[u][w]`.
    pub varpi: Vec<Vec<Poly>>,
    /// `a[u][v]`.
    pub a: Vec<Vec<Poly>>,
    pub linear_forms: Vec<MultiPoly<Poly>>,
    pub norm: NormFormBundle,
    pub phi: Vec<MultiPoly<Poly>>,
    pub composed_forms: Vec<MultiPoly<Laurent>>,
    pub h_ord: i64,
    pub lower_bound_ord: i64,
}

impl LowerBoundInstance {
    /// `pi_{u,w,l}`.
    pub fn pi(&self, u: usize, w: usize, l: usize) -> &Poly {
        &self.pi[self.pi_index(u, w, l)]
    }

    fn pi_index(&self, u: usize, w: usize, l: usize) -> usize {
        (u * (self.s - self.delta_total + 1) + w) * self.h_mult as usize + l
    }

    pub fn free_count(&self) -> usize {
        self.s - self.delta_total
    }
}

fn product<'a>(field: &Gf, it: impl IntoIterator<Item = &'a Poly>) -> Poly {
    it.into_iter().fold(Poly::one(field), |acc, p| &acc * p)
}

pub fn construct_instance(field: &Gf, d: u32, r: usize, s: usize, h_mult: u32) -> Result<LowerBoundInstance> {
    if d == 0 || r == 0 || h_mult == 0 {
        return Err(Error::Invalid("d, r and h must be positive".into()));
    }
    if d > MAX_LOWER_BOUND_DEGREE {
        return Err(Error::SizeExceeded(format!("degree {d} above {MAX_LOWER_BOUND_DEGREE}")));
    }
    let big_d = d;
    let delta_total = r * (d * big_d) as usize;
    if s <= delta_total {
        return Err(Error::HypothesisViolated(format!("s = {s} must exceed r*d*D = {delta_total}")));
    }
    let monomials = binomial(s as u64 + d as u64 - 1, d as u64).saturating_mul(r as u64);
    if monomials > MAX_COMPOSED_TERMS {
        return Err(Error::SizeExceeded(format!("{monomials} composed terms")));
    }
    let free = s - delta_total;
    let needed = h_mult as u128 * delta_total as u128 * (free as u128 + 1);
    let q = field.q() as u64;
    let delta = minimal_degree_with_count(q, needed);
    let pool = enumerate_monic_irreducibles(field, delta as usize)?;
    debug_assert_eq!(pool.len() as u128, count_monic_irreducibles(q, delta));
    let pi: Vec<Poly> = pool.into_iter().take(needed as usize).collect();

    let h = h_mult as usize;
    let varpi: Vec<Vec<Poly>> = (0..delta_total)
        .map(|u| {
            (0..=free)
                .map(|w| product(field, &pi[(u * (free + 1) + w) * h..(u * (free + 1) + w + 1) * h]))
                .collect()
        })
        .collect();
    let a: Vec<Vec<Poly>> = varpi
        .iter()
        .map(|row| {
            (0..=free)
                .map(|v| product(field, row.iter().enumerate().filter(|&(w, _)| w != v).map(|(_, p)| p)))
                .collect()
        })
        .collect();
    let linear_forms: Vec<MultiPoly<Poly>> = a
        .iter()
        .enumerate()
        .map(|(u, row)| {
            let mut terms = vec![(unit(s, free + u), row[0].clone())];
            terms.extend((1..=free).map(|v| (unit(s, v - 1), row[v].clone())));
            MultiPoly::from_terms(field, s, terms)
        })
        .collect::<Result<_>>()?;

    let norm = build_norm_form(field, d)?;
    let psi = norm.psi.to_poly_coeffs();
    let bd = big_d as usize;
    let phi: Vec<MultiPoly<Poly>> = (0..r)
        .map(|m| {
            let mut acc = MultiPoly::zero(field, delta_total);
            for j in 0..d as usize {
                let start = (m * d as usize + j) * bd;
                let block: Vec<MultiPoly<Poly>> = (0..bd)
                    .map(|k| MultiPoly::var(field, delta_total, start + k, Poly::one(field)))
                    .collect();
                let part = psi.compose(&block)?.scale(&Poly::monomial(field, Fe::ONE, j));
                acc = acc.try_add(&part)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let composed_forms: Vec<MultiPoly<Laurent>> = phi
        .iter()
        .map(|p| Ok(p.compose(&linear_forms)?.to_laurent()))
        .collect::<Result<_>>()?;

    let dl = d as i64;
    let unit_ord = delta as i64 * h_mult as i64;
    let h_ord = (dl - 1) + unit_ord * dl * free as i64;
    let lower_bound_ord = unit_ord * delta_total as i64;
    for f in &composed_forms {
        assert!(
            f.degree_info().max_coeff_ord <= OrdValue::Finite(h_ord),
            "coefficient ord above H"
        );
    }
    Ok(LowerBoundInstance {
        field: field.clone(),
        d,
        big_d,
        r,
        s,
        h_mult,
        delta_total,
        delta,
        pi,
        varpi,
        a,
        linear_forms,
        norm,
        phi,
        composed_forms,
        h_ord,
        lower_bound_ord,
    })
}

fn unit(n: usize, k: usize) -> Vec<u32> {
    let mut m = vec![0; n];
    m[k] = 1;
    m
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// The kernel vector of `L_1 = ... = L_Delta = 0` attached to `w`: its first
/// `s - Delta` entries are `w_v * prod_u varpi_{uv}`.
pub fn sample_kernel_solution(inst: &LowerBoundInstance, w: &[Poly]) -> Result<Vec<Poly>> {
    let free = inst.free_count();
    if w.len() != free {
        return Err(Error::ArityMismatch {
            expected: free,
            got: w.len(),
        });
    }
    if w.iter().all(|p| p.is_zero()) {
        return Err(Error::ZeroVector);
    }
    let f = &inst.field;
    let mut x: Vec<Poly> = (1..=free)
        .map(|v| &product(f, inst.varpi.iter().map(|row| &row[v])) * &w[v - 1])
        .collect();
    for u in 0..inst.delta_total {
        let mut acc = Poly::zero(f);
        for v in 1..=free {
            let others = product(
                f,
                inst.varpi
                    .iter()
                    .enumerate()
                    .filter(|&(u2, _)| u2 != u)
                    .map(|(_, row)| &row[v]),
            );
            acc = &acc + &(&(&inst.varpi[u][0] * &others) * &w[v - 1]);
        }
        x.push(-&acc);
    }
    Ok(x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelCheck {
    pub forms_vanish: bool,
    pub linear_vanish: bool,
    /// `varpi_{uv} | x_v` for all u and free v, and `varpi_{u0} | x_{s-Delta+u}`.
    pub divisible: bool,
    pub ord_x: OrdValue,
    pub ord_ok: bool,
}

impl KernelCheck {
    pub fn passed(&self) -> bool {
        self.forms_vanish && self.linear_vanish && self.divisible && self.ord_ok
    }
}

/// Checks a polynomial vector against the defining properties of the kernel.
pub fn check_kernel_vector(inst: &LowerBoundInstance, x: &[Poly]) -> Result<KernelCheck> {
    let free = inst.free_count();
    let forms_vanish = inst
        .composed_forms
        .iter()
        .map(|f| f.eval_polys(x).map(|v| v.is_zero()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|b| b);
    let linear_vanish = inst
        .linear_forms
        .iter()
        .map(|l| l.eval(x).map(|v| v.is_zero()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|b| b);
    let mut divisible = true;
    for (u, row) in inst.varpi.iter().enumerate() {
        divisible &= x[free + u].divisible_by(&row[0])?;
        for v in 1..=free {
            divisible &= x[v - 1].divisible_by(&row[v])?;
        }
    }
    let ord_x = x.iter().map(|p| p.degree()).max().unwrap_or(OrdValue::NegInf);
    Ok(KernelCheck {
        forms_vanish,
        linear_vanish,
        divisible,
        ord_x,
        ord_ok: ord_x >= OrdValue::Finite(inst.lower_bound_ord),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum MinSearch {
    /// The least `max_n deg x_n` over nontrivial zeros, with the lexicographically
    /// least zero of that degree.
    Minimal { ord: u64, x: Vec<Poly> },
    NoneBelow(u64),
}

/// Least ord of a nontrivial polynomial zero of the composed forms, searching all
/// `x` with `deg x_n <= max_ord`.
pub fn exhaustive_min_search(inst: &LowerBoundInstance, max_ord: u64, budget: u64) -> Result<MinSearch> {
    let q = inst.field.q() as u64;
    let space = (inst.s as u64)
        .checked_mul(max_ord + 1)
        .and_then(|e| u32::try_from(e).ok())
        .and_then(|e| q.checked_pow(e));
    if space.is_none_or(|n| n > budget) {
        return Err(Error::BudgetExceeded(budget));
    }
    let mut spent = 0u64;
    for ord in 0..=max_ord {
        let bs = vec![ord as usize; inst.s];
        let mut system = Vec::new();
        for f in &inst.composed_forms {
            system.extend(expand_substitution(f, &bs)?.into_values());
        }
        let n = inst.s * (ord as usize + 1);
        let report = solve_nontrivial(&inst.field, &system, n, budget - spent, SolveMode::Deterministic)?;
        spent += report.evaluations;
        match report.outcome {
            Outcome::Found(y) => {
                let x = crate::multipoly::assemble_polys(&inst.field, &y, &bs)?;
                return Ok(MinSearch::Minimal { ord, x });
            }
            Outcome::NotFound => {}
            Outcome::BudgetExceeded => return Err(Error::BudgetExceeded(budget)),
        }
    }
    Ok(MinSearch::NoneBelow(max_ord))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn micro() -> LowerBoundInstance {
        construct_instance(&make_field(2, 1).unwrap(), 1, 1, 2, 1).unwrap()
    }

    #[test]
    fn micro_instance() {
        let inst = micro();
        let f = inst.field.clone();
        assert_eq!((inst.delta_total, inst.delta), (1, 1));
        assert_eq!(inst.pi(0, 0, 0), &Poly::from_ints(&f, &[0, 1]));
        assert_eq!(inst.pi(0, 1, 0), &Poly::from_ints(&f, &[1, 1]));
        assert_eq!(inst.a[0][0], Poly::from_ints(&f, &[1, 1]));
        assert_eq!(inst.a[0][1], Poly::from_ints(&f, &[0, 1]));
        assert_eq!(inst.linear_forms[0].to_string(), "t*x1 + (t + 1)*x2");
        assert_eq!(inst.phi[0].to_string(), "x1");
        assert_eq!((inst.h_ord, inst.lower_bound_ord), (1, 1));

        let x = sample_kernel_solution(&inst, &[Poly::one(&f)]).unwrap();
        assert_eq!(x, vec![Poly::from_ints(&f, &[1, 1]), Poly::from_ints(&f, &[0, 1])]);
        assert!(check_kernel_vector(&inst, &x).unwrap().passed());

        assert_eq!(exhaustive_min_search(&inst, 0, 1 << 20).unwrap(), MinSearch::NoneBelow(0));
        match exhaustive_min_search(&inst, 1, 1 << 20).unwrap() {
            MinSearch::Minimal { ord, x } => {
                assert_eq!(ord, 1);
                assert_eq!(x, vec![Poly::from_ints(&f, &[1, 1]), Poly::from_ints(&f, &[0, 1])]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn property_instance() {
        let inst = construct_instance(&make_field(2, 1).unwrap(), 2, 1, 5, 1).unwrap();
        assert_eq!((inst.delta_total, inst.delta, inst.h_ord, inst.lower_bound_ord), (4, 6, 13, 24));
        assert_eq!(inst.composed_forms.len(), 1);
        assert!(inst.composed_forms[0].is_homogeneous());
        assert_eq!(inst.composed_forms[0].total_degree(), 2.into());
        let distinct: std::collections::BTreeSet<Vec<u32>> =
            inst.pi.iter().map(|p| p.coeffs().iter().map(|c| c.0).collect()).collect();
        assert_eq!(distinct.len(), 8);
        assert!(inst.pi.iter().all(|p| p.deg() == Some(6) && p.is_irreducible().unwrap()));
    }

    #[test]
    fn hypothesis_and_bound_identity() {
        let f2 = make_field(2, 1).unwrap();
        assert!(matches!(construct_instance(&f2, 2, 1, 4, 1), Err(Error::HypothesisViolated(_))));
        let f3 = make_field(3, 1).unwrap();
        for (f, d, r, s, h) in [(&f2, 1, 1, 2, 1), (&f2, 1, 2, 4, 2), (&f2, 2, 1, 5, 1), (&f3, 2, 1, 6, 1), (&f2, 1, 1, 3, 1)] {
            let inst = construct_instance(f, d, r, s, h).unwrap();
            let (dl, del) = (d as i64, inst.delta_total as i64);
            assert_eq!(
                inst.lower_bound_ord * dl * (s as i64 - del),
                del * (inst.h_ord - (dl - 1))
            );
        }
    }

    #[test]
    fn kernel_samples() {
        let f2 = make_field(2, 1).unwrap();
        let f3 = make_field(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for inst in [
            construct_instance(&f2, 2, 1, 5, 1).unwrap(),
            construct_instance(&f3, 1, 2, 4, 1).unwrap(),
            construct_instance(&f2, 1, 1, 3, 2).unwrap(),
        ] {
            let q = inst.field.q();
            let mut done = 0;
            while done < 50 {
                let w: Vec<Poly> = (0..inst.free_count())
                    .map(|_| Poly::new(&inst.field, (0..rng.gen_range(0..4)).map(|_| Fe(rng.gen_range(0..q))).collect()))
                    .collect();
                if w.iter().all(|p| p.is_zero()) {
                    continue;
                }
                done += 1;
                let x = sample_kernel_solution(&inst, &w).unwrap();
                let c = check_kernel_vector(&inst, &x).unwrap();
                assert!(c.passed(), "{c:?}");
            }
        }
    }

    /// Every nonzero x with all degrees at most `max_ord`, tried in full.
    fn brute_min(inst: &LowerBoundInstance, max_ord: u64) -> Option<u64> {
        let q = inst.field.q() as u64;
        let per = max_ord as usize + 1;
        let n = inst.s * per;
        (1..q.pow(n as u32))
            .filter_map(|mut idx| {
                let mut y = vec![Fe::ZERO; n];
                for c in y.iter_mut() {
                    *c = Fe((idx % q) as u32);
                    idx /= q;
                }
                let x: Vec<Poly> = y.chunks(per).map(|c| Poly::new(&inst.field, c.to_vec())).collect();
                let zero = inst.composed_forms.iter().all(|f| f.eval_polys(&x).unwrap().is_zero());
                zero.then(|| x.iter().map(|p| p.deg().unwrap_or(0) as u64).max().unwrap())
            })
            .min()
    }

    #[test]
    fn min_search_matches_brute_force() {
        let f2 = make_field(2, 1).unwrap();
        let f3 = make_field(3, 1).unwrap();
        for (inst, max_ord) in [
            (micro(), 2),
            (construct_instance(&f2, 1, 1, 3, 1).unwrap(), 4),
            (construct_instance(&f3, 1, 1, 2, 1).unwrap(), 2),
        ] {
            let got = exhaustive_min_search(&inst, max_ord, 1 << 24).unwrap();
            let expected = brute_min(&inst, max_ord);
            match (got, expected) {
                (MinSearch::Minimal { ord, x }, Some(e)) => {
                    assert_eq!(ord, e);
                    assert!(ord as i64 >= inst.lower_bound_ord);
                    let c = check_kernel_vector(&inst, &x).unwrap();
                    assert!(c.linear_vanish && c.divisible && c.forms_vanish);
                }
                (MinSearch::NoneBelow(m), None) => assert_eq!(m, max_ord),
                (g, e) => panic!("{g:?} vs {e:?}"),
            }
        }
        let inst = construct_instance(&f2, 2, 1, 5, 1).unwrap();
        assert_eq!(exhaustive_min_search(&inst, 2, 1 << 20).unwrap(), MinSearch::NoneBelow(2));
        assert!(matches!(exhaustive_min_search(&inst, 5, 1 << 20), Err(Error::BudgetExceeded(_))));
    }
}
