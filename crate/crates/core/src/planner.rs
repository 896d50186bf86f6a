//! Reduction of small-solution problems over F_q((1/t)) to equation systems over F_q.
//!
//! Every real threshold is a power of γ, so the planner works with integer
//! exponents only: `eps_ord` stands for ε = γ^eps_ord and `nu` for N = γ^nu.
//! Substituting `x_n = sum_{b <= B_n} y_{n,b} t^b` turns each form into
//! `sum_m G_m(y) t^m`; the plan decides the `B_n` and which `G_m` must vanish.

use crate::error::{Error, Result};
use crate::field::{Fe, Gf};
use crate::laurent::{Laurent, OrdValue};
use crate::multipoly::{assemble_polys, block_offsets, expand_substitution, MultiPoly};
use crate::poly::Poly;
use crate::solver::{solve_nontrivial, Outcome, SolveMode, SolveReport};

/// Plans with more y-variables than this are rejected before expansion.
pub const MAX_PLAN_VARS: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    General,
    Diagonal,
    Distmod,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    /// `ord F_j(x) < eps_ord` for every j.
    General {
        forms: Vec<MultiPoly<Laurent>>,
        eps_ord: i64,
    },
    /// `ord(sum_n lambda_n x_n^d) < eps_ord`.
    Diagonal {
        d: u32,
        lambdas: Vec<Laurent>,
        eps_ord: i64,
    },
    /// Fractional parts of every `F_j(x)` small, with `ord x <= nu`.
    Distmod {
        forms: Vec<MultiPoly<Laurent>>,
        nu: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub field: Gf,
    pub s: usize,
    /// The C_i exponent; 1 for finite fields.
    pub i: u32,
    pub problem: Problem,
}

fn check_forms(field: &Gf, s: usize, forms: Vec<MultiPoly<Laurent>>) -> Result<Vec<MultiPoly<Laurent>>> {
    if forms.is_empty() {
        return Err(Error::Invalid("at least one form is required".into()));
    }
    forms
        .into_iter()
        .enumerate()
        .map(|(j, f)| {
            if f.field() != field {
                return Err(Error::FieldMismatch);
            }
            if f.is_zero() || !f.is_chevalley() {
                return Err(Error::NonChevalleyForm(j));
            }
            f.pad_vars(s)
        })
        .collect()
}

impl ProblemInstance {
    pub fn general(field: &Gf, s: usize, forms: Vec<MultiPoly<Laurent>>, eps_ord: i64) -> Result<Self> {
        let forms = check_forms(field, s, forms)?;
        Ok(ProblemInstance {
            field: field.clone(),
            s,
            i: 1,
            problem: Problem::General { forms, eps_ord },
        })
    }

    pub fn diagonal(field: &Gf, d: u32, lambdas: Vec<Laurent>, eps_ord: i64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Invalid("diagonal degree must be positive".into()));
        }
        for (j, l) in lambdas.iter().enumerate() {
            if l.field() != field {
                return Err(Error::FieldMismatch);
            }
            if l.is_zero() {
                return Err(Error::ZeroCoefficient(j));
            }
        }
        Ok(ProblemInstance {
            field: field.clone(),
            s: lambdas.len(),
            i: 1,
            problem: Problem::Diagonal { d, lambdas, eps_ord },
        })
    }

    pub fn distmod(field: &Gf, s: usize, forms: Vec<MultiPoly<Laurent>>, nu: u64) -> Result<Self> {
        let forms = check_forms(field, s, forms)?;
        Ok(ProblemInstance {
            field: field.clone(),
            s,
            i: 1,
            problem: Problem::Distmod { forms, nu },
        })
    }

    pub fn with_i(mut self, i: u32) -> Result<Self> {
        if i == 0 {
            return Err(Error::Invalid("i must be positive".into()));
        }
        self.i = i;
        Ok(self)
    }

    pub fn variant(&self) -> Variant {
        match self.problem {
            Problem::General { .. } => Variant::General,
            Problem::Diagonal { .. } => Variant::Diagonal,
            Problem::Distmod { .. } => Variant::Distmod,
        }
    }

    /// The forms in `s` variables; the diagonal problem has the single form
    /// `sum_n lambda_n x_n^d`.
    pub fn forms(&self) -> Vec<MultiPoly<Laurent>> {
        match &self.problem {
            Problem::General { forms, .. } | Problem::Distmod { forms, .. } => forms.clone(),
            Problem::Diagonal { d, lambdas, .. } => {
                let terms = lambdas.iter().enumerate().map(|(n, l)| {
                    let mut m = vec![0; self.s];
                    m[n] = *d;
                    (m, l.clone())
                });
                vec![MultiPoly::from_terms(&self.field, self.s, terms).expect("valid diagonal")]
            }
        }
    }

    pub fn degrees(&self) -> Vec<u32> {
        match &self.problem {
            Problem::Diagonal { d, .. } => vec![*d],
            _ => self
                .forms()
                .iter()
                .map(|f| f.total_degree().finite().expect("nonzero form") as u32)
                .collect(),
        }
    }

    /// Largest coefficient ord over all forms.
    pub fn max_coeff_ord(&self) -> i64 {
        self.forms()
            .iter()
            .filter_map(|f| f.degree_info().max_coeff_ord.finite())
            .max()
            .expect("forms are nonzero")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanKind {
    General,
    Refined,
    Diagonal,
    Distmod,
}

/// An exact inequality `coeff * quantity <= rhs` on an ord-valued quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrdBound {
    pub coeff: i64,
    pub rhs: i64,
}

impl OrdBound {
    pub fn holds(&self, v: OrdValue) -> bool {
        match v {
            OrdValue::NegInf => true,
            OrdValue::Finite(v) => self.coeff * v <= self.rhs,
        }
    }

    /// The largest integer satisfying the bound.
    pub fn max_ord(&self) -> i64 {
        self.rhs.div_euclid(self.coeff)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionPlan {
    pub kind: PlanKind,
    pub s: usize,
    pub i: u32,
    /// Base expansion degree.
    pub b: u64,
    /// Expansion degree per variable.
    pub bs: Vec<usize>,
    pub m: i64,
    pub h: i64,
    /// `h_n = ord lambda_n` (diagonal only).
    pub hs: Vec<i64>,
    pub degrees: Vec<u32>,
    /// `max_j deg F_j`.
    pub d: u32,
    pub nvars: usize,
    /// Inclusive t-exponent range of the equations kept for each form; empty when lo > hi.
    pub ranges: Vec<(i64, i64)>,
    pub bound_applies: bool,
    /// Bound on `ord x` (diagonal: on `max_n ord(lambda_n x_n^d)`).
    pub bound: OrdBound,
}

impl ReductionPlan {
    pub fn equation_count(&self) -> u64 {
        self.ranges
            .iter()
            .map(|&(lo, hi)| (hi - lo + 1).max(0) as u64)
            .sum()
    }
}

fn ipow(base: u32, exp: u32) -> Result<i64> {
    (base as i64)
        .checked_pow(exp)
        .ok_or_else(|| Error::SizeExceeded(format!("{base}^{exp}")))
}

/// Least `B >= 0` with `den * B > num`, for `den > 0`.
fn least_exceeding(num: i64, den: i64) -> u64 {
    debug_assert!(den > 0);
    if num < 0 {
        0
    } else {
        (num / den + 1) as u64
    }
}

fn finish(mut plan: ReductionPlan) -> Result<ReductionPlan> {
    plan.nvars = block_offsets(&plan.bs)[plan.s];
    if plan.nvars > MAX_PLAN_VARS {
        return Err(Error::SizeExceeded(format!(
            "plan needs {} variables (limit {MAX_PLAN_VARS})",
            plan.nvars
        )));
    }
    Ok(plan)
}

fn general_parts(inst: &ProblemInstance) -> Result<(&[MultiPoly<Laurent>], i64)> {
    match &inst.problem {
        Problem::General { forms, eps_ord } => Ok((forms, *eps_ord)),
        _ => Err(Error::Invalid("expected a general instance".into())),
    }
}

pub fn plan_general(inst: &ProblemInstance) -> Result<ReductionPlan> {
    let (forms, eps_ord) = general_parts(inst)?;
    let degrees = inst.degrees();
    let r = forms.len() as i64;
    let d = *degrees.iter().max().unwrap();
    let delta: i64 = degrees.iter().map(|&x| x as i64).sum();
    let di = ipow(d, inst.i)?;
    let s = inst.s as i64;
    if s <= delta * di {
        return Err(Error::HypothesisViolated(format!(
            "s = {s} must exceed {delta} * {d}^{} = {}",
            inst.i,
            delta * di
        )));
    }
    let h = inst.max_coeff_ord();
    let m = 1 - eps_ord;
    let den = s - delta * di;
    let b = least_exceeding(r * di * (h + m) - s, den);
    finish(ReductionPlan {
        kind: PlanKind::General,
        s: inst.s,
        i: inst.i,
        b,
        bs: vec![b as usize; inst.s],
        m,
        h,
        hs: Vec::new(),
        ranges: degrees.iter().map(|&dj| (1 - m, dj as i64 * b as i64 + h)).collect(),
        degrees,
        d,
        nvars: 0,
        bound_applies: eps_ord <= h - d as i64,
        bound: OrdBound {
            coeff: den,
            rhs: r * di * (h + m) - delta * di,
        },
    })
}

/// Uses `D_m = sum_j d_j^m` in place of `Delta * d^i`; only valid for `i = 1`.
pub fn plan_refined(inst: &ProblemInstance) -> Result<ReductionPlan> {
    let (_, eps_ord) = general_parts(inst)?;
    if inst.i != 1 {
        return Err(Error::HypothesisViolated("refined planning requires i = 1".into()));
    }
    let degrees = inst.degrees();
    let d = *degrees.iter().max().unwrap();
    let d_sum = |k: u32| -> Result<i64> { degrees.iter().map(|&x| ipow(x, k)).sum() };
    let di = d_sum(inst.i)?;
    let di1 = d_sum(inst.i + 1)?;
    let s = inst.s as i64;
    if s <= di1 {
        return Err(Error::HypothesisViolated(format!("s = {s} must exceed D = {di1}")));
    }
    let h = inst.max_coeff_ord();
    let m = 1 - eps_ord;
    let b = least_exceeding((h + m) * di - s, s - di1);
    finish(ReductionPlan {
        kind: PlanKind::Refined,
        s: inst.s,
        i: inst.i,
        b,
        bs: vec![b as usize; inst.s],
        m,
        h,
        hs: Vec::new(),
        ranges: degrees.iter().map(|&dj| (1 - m, dj as i64 * b as i64 + h)).collect(),
        degrees,
        d,
        nvars: 0,
        bound_applies: eps_ord <= h - d as i64,
        bound: OrdBound {
            coeff: s - di1,
            rhs: (h + m) * di - di1,
        },
    })
}

pub fn plan_diagonal(inst: &ProblemInstance) -> Result<ReductionPlan> {
    let Problem::Diagonal { d, lambdas, eps_ord } = &inst.problem else {
        return Err(Error::Invalid("expected a diagonal instance".into()));
    };
    let (d, eps_ord) = (*d, *eps_ord);
    let di = ipow(d, inst.i)?;
    let di1 = ipow(d, inst.i + 1)?;
    let s = inst.s as i64;
    if s <= di1 {
        return Err(Error::HypothesisViolated(format!("s = {s} must exceed {d}^{} = {di1}", inst.i + 1)));
    }
    let hs: Vec<i64> = lambdas.iter().map(|l| l.ord().finite().unwrap()).collect();
    let h = *hs.iter().max().unwrap();
    let shifts: Vec<i64> = hs.iter().map(|&hj| (h - hj).div_euclid(d as i64)).collect();
    let m = 1 - eps_ord;
    let b = least_exceeding(di * (h + m) - s - shifts.iter().sum::<i64>(), s - di1);
    let sum_h: i64 = hs.iter().sum();
    let dl = d as i64;
    finish(ReductionPlan {
        kind: PlanKind::Diagonal,
        s: inst.s,
        i: inst.i,
        b,
        bs: shifts.iter().map(|&f| b as usize + f as usize).collect(),
        m,
        h,
        ranges: vec![(1 - m, dl * b as i64 + h)],
        degrees: vec![d],
        d,
        nvars: 0,
        bound_applies: eps_ord * di1 <= -dl * di1 + h * (di1 - s) + sum_h,
        bound: OrdBound {
            coeff: s - di1,
            rhs: sum_h + (dl - 1) * (s - di1) + (m - 1) * di1,
        },
        hs,
    })
}

pub fn plan_distmod(inst: &ProblemInstance) -> Result<ReductionPlan> {
    let Problem::Distmod { forms, nu } = &inst.problem else {
        return Err(Error::Invalid("expected a distmod instance".into()));
    };
    let degrees = inst.degrees();
    let d = *degrees.iter().max().unwrap();
    let rdi = forms.len() as i64 * ipow(d, inst.i)?;
    let b = *nu;
    let need = inst.s as i64 * (b as i64 + 1);
    let m = (need + rdi - 1) / rdi;
    finish(ReductionPlan {
        kind: PlanKind::Distmod,
        s: inst.s,
        i: inst.i,
        b,
        bs: vec![b as usize; inst.s],
        m,
        h: inst.max_coeff_ord(),
        hs: Vec::new(),
        ranges: vec![(1 - m, -1); forms.len()],
        degrees,
        d,
        nvars: 0,
        bound_applies: true,
        bound: OrdBound { coeff: 1, rhs: b as i64 },
    })
}

/// The plan matching the instance's variant; `refined` selects [`plan_refined`].
pub fn plan(inst: &ProblemInstance, refined: bool) -> Result<ReductionPlan> {
    match inst.variant() {
        Variant::General if refined => plan_refined(inst),
        Variant::General => plan_general(inst),
        Variant::Diagonal => plan_diagonal(inst),
        Variant::Distmod => plan_distmod(inst),
    }
}

/// One equation `G_m = 0` coming from form `form`.
#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub form: usize,
    pub m: i64,
    pub poly: MultiPoly<Fe>,
}

pub fn build_system(inst: &ProblemInstance, plan: &ReductionPlan) -> Result<Vec<Equation>> {
    let weight = |dj: u32| (dj as u64).pow(plan.i);
    let budget: u64 = plan
        .ranges
        .iter()
        .zip(&plan.degrees)
        .map(|(&(lo, hi), &dj)| (hi - lo + 1).max(0) as u64 * weight(dj))
        .sum();
    assert!(
        plan.nvars as u64 > budget,
        "plan has {} variables against degree budget {budget}",
        plan.nvars
    );
    let mut out = Vec::new();
    for (j, form) in inst.forms().iter().enumerate() {
        let (lo, hi) = plan.ranges[j];
        let g = expand_substitution(form, &plan.bs)?;
        for (m, poly) in g.iter().filter(|(m, _)| (lo..=hi).contains(*m)) {
            debug_assert!(poly.is_chevalley());
            out.push(Equation {
                form: j,
                m: *m,
                poly: poly.clone(),
            });
        }
    }
    Ok(out)
}

pub fn lift_solution(field: &Gf, y: &[Fe], plan: &ReductionPlan) -> Result<Vec<Poly>> {
    if y.iter().all(|c| c.is_zero()) {
        return Err(Error::ZeroVector);
    }
    assemble_polys(field, y, &plan.bs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub x: Vec<Poly>,
    /// `ord F_j(x)`, or the fractional ord for the distmod variant.
    pub achieved: Vec<OrdValue>,
    /// Every achieved value must be at most this (`-M`).
    pub threshold: i64,
    /// `max_n deg x_n`.
    pub ord_x: OrdValue,
    /// The quantity constrained by `bound`: `ord x`, or `max_n ord(lambda_n x_n^d)`.
    pub bound_quantity: OrdValue,
    pub bound: OrdBound,
    pub bound_applies: bool,
    pub within_degrees: bool,
    pub achieved_ok: bool,
    pub bound_ok: bool,
    pub verified: bool,
}

fn ord_x(x: &[Poly]) -> OrdValue {
    x.iter().map(|p| p.degree()).max().unwrap_or(OrdValue::NegInf)
}

/// Re-evaluates the forms at `x` and checks every guarantee of the plan.
pub fn certify(inst: &ProblemInstance, plan: &ReductionPlan, x: &[Poly]) -> Result<Certificate> {
    if x.len() != inst.s {
        return Err(Error::ArityMismatch {
            expected: inst.s,
            got: x.len(),
        });
    }
    let nonzero = x.iter().any(|p| !p.is_zero());
    let values: Vec<Laurent> = inst
        .forms()
        .iter()
        .map(|f| f.eval_polys(x))
        .collect::<Result<_>>()?;
    let distmod = plan.kind == PlanKind::Distmod;
    let achieved: Vec<OrdValue> = values
        .iter()
        .map(|v| if distmod { v.frac_ord() } else { v.ord() })
        .collect();
    let threshold = -plan.m;
    let achieved_ok = achieved.iter().all(|&a| a <= OrdValue::Finite(threshold));
    let within_degrees = x
        .iter()
        .zip(&plan.bs)
        .all(|(p, &b)| p.degree() <= OrdValue::Finite(b as i64));
    let ox = ord_x(x);
    let bound_quantity = match (&inst.problem, plan.kind) {
        (Problem::Diagonal { d, lambdas, .. }, PlanKind::Diagonal) => lambdas
            .iter()
            .zip(x)
            .map(|(l, p)| match p.degree() {
                OrdValue::NegInf => OrdValue::NegInf,
                OrdValue::Finite(e) => l.ord() + *d as i64 * e,
            })
            .max()
            .unwrap_or(OrdValue::NegInf),
        _ => ox,
    };
    let mut bound_ok = plan.bound.holds(bound_quantity);
    if distmod {
        // fractional parts below N^(-s / (r d^i)) with N = gamma^nu
        let rdi = plan.degrees.len() as i64 * (plan.d as i64).pow(plan.i);
        let nu = plan.b as i64;
        bound_ok &= achieved.iter().all(|a| match a {
            OrdValue::NegInf => true,
            OrdValue::Finite(f) => f * rdi < -nu * inst.s as i64,
        });
    }
    let verified = nonzero && achieved_ok && within_degrees && (bound_ok || !plan.bound_applies);
    Ok(Certificate {
        x: x.to_vec(),
        achieved,
        threshold,
        ord_x: ox,
        bound_quantity,
        bound: plan.bound,
        bound_applies: plan.bound_applies,
        within_degrees,
        achieved_ok,
        bound_ok,
        verified,
    })
}

/// Everything produced by one end-to-end run.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineRun {
    pub plan: ReductionPlan,
    pub equations: Vec<Equation>,
    pub report: SolveReport,
    pub certificate: Option<Certificate>,
}

/// Plans, builds, solves, lifts and certifies.
pub fn run_pipeline(
    inst: &ProblemInstance,
    refined: bool,
    budget: u64,
    mode: SolveMode,
) -> Result<PipelineRun> {
    let plan = plan(inst, refined)?;
    let equations = build_system(inst, &plan)?;
    let system: Vec<MultiPoly<Fe>> = equations.iter().map(|e| e.poly.clone()).collect();
    let report = solve_nontrivial(&inst.field, &system, plan.nvars, budget, mode)?;
    let certificate = match &report.outcome {
        Outcome::Found(y) => {
            let x = lift_solution(&inst.field, y, &plan)?;
            Some(certify(inst, &plan, &x)?)
        }
        _ => None,
    };
    Ok(PipelineRun {
        plan,
        equations,
        report,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::solver::DEFAULT_BUDGET;

    type LaurentTerm<'a> = (&'a [u32], &'a [(i64, i64)]);

    fn lp(f: &Gf, n: usize, terms: &[LaurentTerm]) -> MultiPoly<Laurent> {
        MultiPoly::from_terms(
            f,
            n,
            terms
                .iter()
                .map(|(m, c)| (m.to_vec(), Laurent::from_ints(f, c))),
        )
        .unwrap()
    }

    /// t^-1 x1 x2 + x3^2 in three variables.
    fn sample_form(f: &Gf) -> MultiPoly<Laurent> {
        lp(f, 3, &[(&[1, 1, 0], &[(-1, 1)]), (&[0, 0, 2], &[(0, 1)])])
    }

    /// Smallest B >= 0 with `holds(B)`, by direct search.
    fn least(holds: impl Fn(i64) -> bool) -> u64 {
        (0..).find(|&b| holds(b)).unwrap() as u64
    }

    #[test]
    fn general_examples() {
        let f2 = make_field(2, 1).unwrap();
        let inst = ProblemInstance::general(&f2, 5, vec![sample_form(&f2)], 0).unwrap();
        let p = plan_general(&inst).unwrap();
        assert_eq!((p.m, p.b, p.h, p.nvars), (1, 0, 0, 5));
        let eqs = build_system(&inst, &p).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].m, 0);
        assert_eq!(eqs[0].poly.to_string(), "x3^2");

        let inst = ProblemInstance::general(&f2, 5, vec![sample_form(&f2)], -2).unwrap();
        let p = plan_general(&inst).unwrap();
        assert_eq!((p.m, p.b, p.nvars, p.equation_count()), (3, 2, 15, 7));
        assert_eq!(p.ranges, vec![(-2, 4)]);

        let inst = ProblemInstance::general(&f2, 4, vec![sample_form(&f2)], 0).unwrap();
        assert!(matches!(plan_general(&inst), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn non_chevalley_rejected() {
        let f2 = make_field(2, 1).unwrap();
        let bad = lp(&f2, 2, &[(&[0, 0], &[(0, 1)]), (&[1, 0], &[(0, 1)])]);
        assert_eq!(
            ProblemInstance::general(&f2, 5, vec![bad], 0).unwrap_err(),
            Error::NonChevalleyForm(0)
        );
    }

    #[test]
    fn refined_examples() {
        let f2 = make_field(2, 1).unwrap();
        let lin = lp(&f2, 1, &[(&[1], &[(0, 1)])]);
        let quad = lp(&f2, 2, &[(&[1, 1], &[(0, 1)])]);
        let inst = ProblemInstance::general(&f2, 4, vec![lin.clone(), quad.clone()], 0).unwrap();
        assert!(matches!(plan_refined(&inst), Err(Error::HypothesisViolated(_))));
        let inst = ProblemInstance::general(&f2, 6, vec![lin, quad], 0).unwrap();
        let p = plan_refined(&inst).unwrap();
        assert_eq!((p.b, p.m, p.h), (0, 1, 0));

        // equal degrees: both plans agree
        for eps in [0, -1, -3] {
            let inst = ProblemInstance::general(&f2, 5, vec![sample_form(&f2)], eps).unwrap();
            let g = plan_general(&inst).unwrap();
            let r = plan_refined(&inst).unwrap();
            assert_eq!((g.b, g.m, &g.ranges, g.bound), (r.b, r.m, &r.ranges, r.bound));
        }
    }

    #[test]
    fn diagonal_examples() {
        let f2 = make_field(2, 1).unwrap();
        let mut lambdas = vec![Laurent::from_ints(&f2, &[(-1, 1)])];
        lambdas.extend((0..4).map(|_| Laurent::one(&f2)));
        let inst = ProblemInstance::diagonal(&f2, 2, lambdas, -1).unwrap();
        let p = plan_diagonal(&inst).unwrap();
        assert_eq!((p.h, p.m, p.b), (0, 2, 0));
        assert_eq!(p.hs, vec![-1, 0, 0, 0, 0]);
        assert_eq!(p.bs, vec![0; 5]);

        let f3 = make_field(3, 1).unwrap();
        let ones = vec![Laurent::one(&f3); 5];
        let p = plan_diagonal(&ProblemInstance::diagonal(&f3, 2, ones, -3).unwrap()).unwrap();
        assert!(p.bs.iter().all(|&b| b as u64 == p.b));

        let ones = vec![Laurent::one(&f3); 4];
        let inst = ProblemInstance::diagonal(&f3, 2, ones, 0).unwrap();
        assert!(matches!(plan_diagonal(&inst), Err(Error::HypothesisViolated(_))));
        let zero = vec![Laurent::one(&f3), Laurent::zero(&f3)];
        assert_eq!(
            ProblemInstance::diagonal(&f3, 2, zero, 0).unwrap_err(),
            Error::ZeroCoefficient(1)
        );
    }

    #[test]
    fn distmod_examples() {
        let f2 = make_field(2, 1).unwrap();
        let quad = lp(&f2, 1, &[(&[2], &[(0, 1)])]);
        let p = plan_distmod(&ProblemInstance::distmod(&f2, 1, vec![quad], 3).unwrap()).unwrap();
        assert_eq!((p.b, p.m), (3, 2));

        let f = lp(&f2, 1, &[(&[1], &[(-2, 1)])]);
        let inst = ProblemInstance::distmod(&f2, 1, vec![f], 1).unwrap();
        let p = plan_distmod(&inst).unwrap();
        assert_eq!((p.b, p.m), (1, 2));
        let eqs = build_system(&inst, &p).unwrap();
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].m, -1);
        assert_eq!(eqs[0].poly.to_string(), "x2");
        let x = lift_solution(&f2, &[Fe(1), Fe(0)], &p).unwrap();
        assert_eq!(x, vec![Poly::one(&f2)]);
        let c = certify(&inst, &p, &x).unwrap();
        assert_eq!(c.achieved, vec![OrdValue::Finite(-2)]);
        assert!(c.verified);

        let poly_only = lp(&f2, 1, &[(&[2], &[(0, 1), (3, 1)])]);
        let inst = ProblemInstance::distmod(&f2, 1, vec![poly_only], 2).unwrap();
        let run = run_pipeline(&inst, false, DEFAULT_BUDGET, SolveMode::Deterministic).unwrap();
        assert!(run.equations.is_empty());
        let cert = run.certificate.unwrap();
        assert!(cert.verified);
        assert_eq!(cert.achieved, vec![OrdValue::NegInf]);
    }

    #[test]
    fn lift_examples() {
        let f2 = make_field(2, 1).unwrap();
        let inst = ProblemInstance::general(&f2, 5, vec![sample_form(&f2)], 0).unwrap();
        let p = plan_general(&inst).unwrap();
        let y = [Fe(1), Fe(0), Fe(0), Fe(0), Fe(0)];
        let x = lift_solution(&f2, &y, &p).unwrap();
        assert_eq!(x[0], Poly::one(&f2));
        assert!(x[1..].iter().all(|p| p.is_zero()));
        assert_eq!(lift_solution(&f2, &[Fe(0); 5], &p), Err(Error::ZeroVector));
    }

    #[test]
    fn certify_examples() {
        let f2 = make_field(2, 1).unwrap();
        let inst = ProblemInstance::general(&f2, 5, vec![sample_form(&f2)], 0).unwrap();
        let p = plan_general(&inst).unwrap();
        let mut x = vec![Poly::zero(&f2); 5];
        x[0] = Poly::one(&f2);
        let c = certify(&inst, &p, &x).unwrap();
        assert_eq!(c.achieved, vec![OrdValue::NegInf]);
        assert!(c.verified);
        // x3 = 1 gives F = 1, ord 0 > -M
        let mut bad = vec![Poly::zero(&f2); 5];
        bad[2] = Poly::one(&f2);
        assert!(!certify(&inst, &p, &bad).unwrap().verified);
        // degree beyond B
        x[0] = Poly::t(&f2);
        assert!(!certify(&inst, &p, &x).unwrap().verified);
    }

    #[test]
    fn pipeline_end_to_end() {
        let f2 = make_field(2, 1).unwrap();
        for eps in [0, -1, -2] {
            let inst = ProblemInstance::general(&f2, 5, vec![sample_form(&f2)], eps).unwrap();
            let run = run_pipeline(&inst, false, 1 << 20, SolveMode::Deterministic).unwrap();
            let cert = run.certificate.expect("solution exists");
            assert!(cert.verified, "eps {eps}: {cert:?}");
        }
    }

    #[test]
    fn minimality_of_b() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let f3 = make_field(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let s = rng.gen_range(3..9usize);
            let r = rng.gen_range(1..3usize);
            let forms: Vec<MultiPoly<Laurent>> = (0..r)
                .map(|_| {
                    let deg = rng.gen_range(1..3u32);
                    let mut m = vec![0u32; s];
                    for _ in 0..deg {
                        m[rng.gen_range(0..s)] += 1;
                    }
                    let c = Laurent::from_ints(&f3, &[(rng.gen_range(-3..4), 1)]);
                    MultiPoly::from_terms(&f3, s, [(m, c)]).unwrap()
                })
                .collect();
            let eps = rng.gen_range(-4..2);
            let inst = ProblemInstance::general(&f3, s, forms, eps).unwrap();
            let (dj, h, m) = (inst.degrees(), inst.max_coeff_ord(), 1 - eps);
            let d = *dj.iter().max().unwrap() as i64;
            let si = s as i64;
            if let Ok(p) = plan_general(&inst) {
                let holds = |b: i64| si * (b + 1) > d * dj.iter().map(|&x| x as i64 * b + h + m).sum::<i64>();
                assert_eq!(p.b, least(holds));
            }
            if let Ok(p) = plan_refined(&inst) {
                let holds =
                    |b: i64| si * (b + 1) > dj.iter().map(|&x| (x as i64 * b + h + m) * x as i64).sum::<i64>();
                assert_eq!(p.b, least(holds));
            }

            let lambdas: Vec<Laurent> = (0..s)
                .map(|_| Laurent::from_ints(&f3, &[(rng.gen_range(-3..4), 1)]))
                .collect();
            let dd = rng.gen_range(1..3u32);
            let inst = ProblemInstance::diagonal(&f3, dd, lambdas, eps).unwrap();
            if let Ok(p) = plan_diagonal(&inst) {
                let dd = dd as i64;
                let hs = &p.hs;
                let hmax = *hs.iter().max().unwrap();
                let sum_f: i64 = hs.iter().map(|&x| (hmax - x).div_euclid(dd)).sum();
                let holds = |b: i64| (si - dd * dd) * b > dd * (hmax + m) - si - sum_f;
                assert_eq!(p.b, least(holds));
                // the t-degree budget: sum (B_n + 1) > d * (number of equations)
                assert!(p.nvars as u64 > dd as u64 * p.equation_count());
            }

            let nu = rng.gen_range(0..5u64);
            let f = MultiPoly::from_terms(&f3, s, [(vec![1; s], Laurent::from_ints(&f3, &[(-2, 1)]))])
                .unwrap();
            let p = plan_distmod(&ProblemInstance::distmod(&f3, s, vec![f], nu).unwrap()).unwrap();
            let rdi = s as i64;
            let need = si * (nu as i64 + 1);
            assert!(rdi * p.m >= need && need > (p.m - 1) * rdi);
        }
    }
}
