//! JSON problem files and reports.
//!
//! Field elements are integers when `e = 1` and coordinate arrays (constant
//! coordinate first) otherwise. A Laurent polynomial is a list of `[exponent,
//! element]` pairs with strictly decreasing exponents and nonzero elements. A
//! multivariate polynomial is a list of `{exponents, coeff}` terms in graded
//! lexicographic order. Canonical text is pretty-printed JSON with a trailing
//! newline; parsing and re-serializing a canonical file reproduces it exactly.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{make_field, Fe, Gf};
use crate::laurent::{Laurent, OrdValue};
use crate::multipoly::MultiPoly;
use crate::planner::{Certificate, PlanKind, Problem, ProblemInstance, ReductionPlan, Variant};
use crate::poly::Poly;
use crate::solver::{Outcome, SolveMode, SolveReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    pub p: u64,
    pub e: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub exponents: Vec<u32>,
    pub coeff: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalFile {
    pub d: u32,
    pub lambdas: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetFile {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eps_ord: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nu: Option<u64>,
}

fn default_i() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormFile {
    pub field: FieldFile,
    pub s: usize,
    pub variant: String,
    #[serde(default = "default_i")]
    pub i: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub forms: Option<Vec<Vec<TermFile>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagonal: Option<DiagonalFile>,
    #[serde(default)]
    pub target: TargetFile,
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{path}: {msg}"))
}

pub fn elem_to_json(field: &Gf, a: Fe) -> Value {
    if field.e() == 1 {
        Value::from(a.0)
    } else {
        Value::from(field.coords(a))
    }
}

pub fn elem_from_json(field: &Gf, v: &Value, path: &str) -> Result<Fe> {
    if field.e() == 1 {
        let n = v.as_i64().ok_or_else(|| invalid(path, "expected an integer"))?;
        return Ok(field.from_int(n));
    }
    let arr = v
        .as_array()
        .ok_or_else(|| invalid(path, "expected a coordinate array"))?;
    if arr.len() != field.e() as usize {
        return Err(invalid(path, format!("expected {} coordinates", field.e())));
    }
    let coords = arr
        .iter()
        .enumerate()
        .map(|(k, c)| {
            c.as_u64()
                .filter(|&x| x < field.p() as u64)
                .map(|x| x as u32)
                .ok_or_else(|| invalid(&format!("{path}[{k}]"), "coordinate out of range"))
        })
        .collect::<Result<Vec<u32>>>()?;
    field.from_coords(&coords)
}

pub fn laurent_to_json(a: &Laurent) -> Value {
    Value::Array(
        a.terms()
            .rev()
            .map(|(k, c)| Value::Array(vec![Value::from(k), elem_to_json(a.field(), c)]))
            .collect(),
    )
}

pub fn laurent_from_json(field: &Gf, v: &Value, path: &str) -> Result<Laurent> {
    let arr = v
        .as_array()
        .ok_or_else(|| invalid(path, "expected a list of [exponent, coefficient] pairs"))?;
    let mut terms = Vec::with_capacity(arr.len());
    let mut last: Option<i64> = None;
    for (k, pair) in arr.iter().enumerate() {
        let p = format!("{path}[{k}]");
        let pair = pair
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| invalid(&p, "expected [exponent, coefficient]"))?;
        let e = pair[0].as_i64().ok_or_else(|| invalid(&p, "exponent must be an integer"))?;
        if last.is_some_and(|l| e >= l) {
            return Err(invalid(&p, "exponents must be strictly decreasing"));
        }
        last = Some(e);
        let c = elem_from_json(field, &pair[1], &format!("{p}[1]"))?;
        if c.is_zero() {
            return Err(invalid(&p, "coefficient must be nonzero"));
        }
        terms.push((e, c));
    }
    Ok(Laurent::from_terms(field, terms))
}

fn terms_to_json<C>(p: &MultiPoly<C>, coeff: impl Fn(&C) -> Value) -> Vec<TermFile>
where
    C: crate::multipoly::Coefficient,
{
    p.terms_grlex()
        .into_iter()
        .map(|(m, c)| TermFile {
            exponents: m.clone(),
            coeff: coeff(c),
        })
        .collect()
}

pub fn laurent_poly_to_json(p: &MultiPoly<Laurent>) -> Vec<TermFile> {
    terms_to_json(p, laurent_to_json)
}

pub fn fq_poly_to_json(p: &MultiPoly<Fe>) -> Vec<TermFile> {
    terms_to_json(p, |c| elem_to_json(p.field(), *c))
}

pub fn laurent_poly_from_json(field: &Gf, nvars: usize, terms: &[TermFile], path: &str) -> Result<MultiPoly<Laurent>> {
    let mut seen = std::collections::BTreeSet::new();
    let parsed = terms
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let p = format!("{path}[{k}]");
            if t.exponents.len() != nvars {
                return Err(invalid(&p, format!("expected {nvars} exponents, got {}", t.exponents.len())));
            }
            if !seen.insert(t.exponents.clone()) {
                return Err(invalid(&p, "repeated monomial"));
            }
            let c = laurent_from_json(field, &t.coeff, &format!("{p}.coeff"))?;
            if c.is_zero() {
                return Err(invalid(&p, "zero coefficient"));
            }
            Ok((t.exponents.clone(), c))
        })
        .collect::<Result<Vec<_>>>()?;
    MultiPoly::from_terms(field, nvars, parsed)
}

pub fn parse_form_file(text: &str) -> Result<FormFile> {
    serde_json::from_str(text).map_err(|e| Error::Invalid(format!("line {} column {}: {e}", e.line(), e.column())))
}

pub fn to_canonical<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::General => "general",
        Variant::Diagonal => "diagonal",
        Variant::Distmod => "distmod",
    }
}

impl FormFile {
    pub fn variant(&self) -> Result<Variant> {
        match self.variant.as_str() {
            "general" => Ok(Variant::General),
            "diagonal" => Ok(Variant::Diagonal),
            "distmod" => Ok(Variant::Distmod),
            other => Err(invalid("variant", format!("unknown variant {other:?}"))),
        }
    }

    pub fn field(&self) -> Result<Gf> {
        make_field(self.field.p, self.field.e).map_err(|e| invalid("field", e))
    }

    /// Builds the problem; targets given here override the file's.
    pub fn to_instance(&self, eps_ord: Option<i64>, nu: Option<u64>) -> Result<ProblemInstance> {
        let field = self.field()?;
        let forms = || -> Result<Vec<MultiPoly<Laurent>>> {
            let forms = self.forms.as_ref().ok_or_else(|| invalid("forms", "missing"))?;
            forms
                .iter()
                .enumerate()
                .map(|(j, f)| laurent_poly_from_json(&field, self.s, f, &format!("forms[{j}]")))
                .collect()
        };
        let eps = || {
            eps_ord
                .or(self.target.eps_ord)
                .ok_or_else(|| invalid("target", "eps_ord is required"))
        };
        let inst = match self.variant()? {
            Variant::General => ProblemInstance::general(&field, self.s, forms()?, eps()?)?,
            Variant::Distmod => {
                let nu = nu.or(self.target.nu).ok_or_else(|| invalid("target", "nu is required"))?;
                ProblemInstance::distmod(&field, self.s, forms()?, nu)?
            }
            Variant::Diagonal => {
                let diag = self.diagonal.as_ref().ok_or_else(|| invalid("diagonal", "missing"))?;
                if diag.lambdas.len() != self.s {
                    return Err(invalid("diagonal.lambdas", format!("expected {} coefficients", self.s)));
                }
                let lambdas = diag
                    .lambdas
                    .iter()
                    .enumerate()
                    .map(|(j, l)| laurent_from_json(&field, l, &format!("diagonal.lambdas[{j}]")))
                    .collect::<Result<Vec<_>>>()?;
                ProblemInstance::diagonal(&field, diag.d, lambdas, eps()?)?
            }
        };
        inst.with_i(self.i)
    }

    pub fn from_instance(inst: &ProblemInstance) -> FormFile {
        let field = FieldFile {
            p: inst.field.p() as u64,
            e: inst.field.e(),
        };
        let (forms, diagonal, target) = match &inst.problem {
            Problem::General { forms, eps_ord } => (
                Some(forms.iter().map(laurent_poly_to_json).collect()),
                None,
                TargetFile {
                    eps_ord: Some(*eps_ord),
                    nu: None,
                },
            ),
            Problem::Distmod { forms, nu } => (
                Some(forms.iter().map(laurent_poly_to_json).collect()),
                None,
                TargetFile {
                    eps_ord: None,
                    nu: Some(*nu),
                },
            ),
            Problem::Diagonal { d, lambdas, eps_ord } => (
                None,
                Some(DiagonalFile {
                    d: *d,
                    lambdas: lambdas.iter().map(laurent_to_json).collect(),
                }),
                TargetFile {
                    eps_ord: Some(*eps_ord),
                    nu: None,
                },
            ),
        };
        FormFile {
            field,
            s: inst.s,
            variant: variant_name(inst.variant()).into(),
            i: inst.i,
            forms,
            diagonal,
            target,
        }
    }
}

/// `-inf` or an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrdJson(pub OrdValue);

impl Serialize for OrdJson {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            OrdValue::NegInf => s.serialize_str("-inf"),
            OrdValue::Finite(v) => s.serialize_i64(v),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceSummary {
    pub field: FieldFile,
    pub s: usize,
    pub variant: String,
    pub i: u32,
    pub degrees: Vec<u32>,
    pub h: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_ord: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<u64>,
}

impl InstanceSummary {
    pub fn new(inst: &ProblemInstance) -> Self {
        let (eps_ord, nu) = match &inst.problem {
            Problem::General { eps_ord, .. } | Problem::Diagonal { eps_ord, .. } => (Some(*eps_ord), None),
            Problem::Distmod { nu, .. } => (None, Some(*nu)),
        };
        InstanceSummary {
            field: FieldFile {
                p: inst.field.p() as u64,
                e: inst.field.e(),
            },
            s: inst.s,
            variant: variant_name(inst.variant()).into(),
            i: inst.i,
            degrees: inst.degrees(),
            h: inst.max_coeff_ord(),
            eps_ord,
            nu,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundJson {
    pub coeff: i64,
    pub rhs: i64,
    pub max_ord: i64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanJson {
    pub kind: &'static str,
    #[serde(rename = "B")]
    pub b: u64,
    #[serde(rename = "Bs")]
    pub bs: Vec<usize>,
    #[serde(rename = "M")]
    pub m: i64,
    pub h: i64,
    pub d: u32,
    pub nvars: usize,
    pub equation_ranges: Vec<(i64, i64)>,
    pub equations: usize,
    pub bound_applies: bool,
    pub bound: BoundJson,
}

impl PlanJson {
    pub fn new(plan: &ReductionPlan, equations: usize) -> Self {
        PlanJson {
            kind: match plan.kind {
                PlanKind::General => "general",
                PlanKind::Refined => "refined",
                PlanKind::Diagonal => "diagonal",
                PlanKind::Distmod => "distmod",
            },
            b: plan.b,
            bs: plan.bs.clone(),
            m: plan.m,
            h: plan.h,
            d: plan.d,
            nvars: plan.nvars,
            equation_ranges: plan.ranges.clone(),
            equations,
            bound_applies: plan.bound_applies,
            bound: BoundJson {
                coeff: plan.bound.coeff,
                rhs: plan.bound.rhs,
                max_ord: plan.bound.max_ord(),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverJson {
    pub outcome: &'static str,
    pub evaluations: u64,
    pub mode: &'static str,
    pub workers: usize,
}

impl SolverJson {
    pub fn new(r: &SolveReport) -> Self {
        let (mode, workers) = match r.mode {
            SolveMode::Deterministic => ("deterministic", 1),
            SolveMode::Parallel { workers } => ("parallel", workers),
        };
        SolverJson {
            outcome: match r.outcome {
                Outcome::Found(_) => "FOUND",
                Outcome::NotFound => "NOT_FOUND",
                Outcome::BudgetExceeded => "BUDGET_EXCEEDED",
            },
            evaluations: r.evaluations,
            mode,
            workers,
        }
    }
}

pub fn poly_coeffs_json(p: &Poly) -> Value {
    Value::Array(p.coeffs().iter().map(|&c| elem_to_json(p.field(), c)).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateJson {
    pub x: Vec<String>,
    /// Coefficients of each `x_n`, constant term first.
    pub x_coeffs: Vec<Value>,
    pub achieved: Vec<OrdJson>,
    pub threshold: i64,
    pub ord_x: OrdJson,
    pub bound_quantity: OrdJson,
    pub bound_ord: i64,
    pub bound_applies: bool,
    pub within_degrees: bool,
    pub achieved_ok: bool,
    pub bound_ok: bool,
    pub verified: bool,
}

impl CertificateJson {
    pub fn new(c: &Certificate) -> Self {
        CertificateJson {
            x: c.x.iter().map(|p| p.to_string()).collect(),
            x_coeffs: c.x.iter().map(poly_coeffs_json).collect(),
            achieved: c.achieved.iter().map(|&a| OrdJson(a)).collect(),
            threshold: c.threshold,
            ord_x: OrdJson(c.ord_x),
            bound_quantity: OrdJson(c.bound_quantity),
            bound_ord: c.bound.max_ord(),
            bound_applies: c.bound_applies,
            within_degrees: c.within_degrees,
            achieved_ok: c.achieved_ok,
            bound_ok: c.bound_ok,
            verified: c.verified,
        }
    }
}

/// Guarantee exponent `-M` against the target `-ceil(nu s / (r d^i))`.
#[derive(Clone, Debug, Serialize)]
pub struct DistmodJson {
    pub guarantee_exp: i64,
    pub target_exp: i64,
    pub guarantee_meets_target: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportFile {
    pub command: &'static str,
    pub instance: InstanceSummary,
    pub plan: PlanJson,
    pub solver: SolverJson,
    pub certificate: Option<CertificateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distmod: Option<DistmodJson>,
}
