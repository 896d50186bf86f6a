use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use fqineq::error::Error;
use fqineq::field::{make_field, split_prime_power, Fe, Gf};
use fqineq::io::{
    fq_poly_to_json, parse_form_file, poly_coeffs_json, to_canonical, CertificateJson, DistmodJson, FieldFile,
    FormFile, InstanceSummary, PlanJson, ReportFile, SolverJson, TermFile,
};
use fqineq::lower_bound::{check_kernel_vector, construct_instance, exhaustive_min_search, sample_kernel_solution, MinSearch};
use fqineq::normic::{build_norm_form, check_anisotropic};
use fqineq::planner::{run_pipeline, ProblemInstance, Variant};
use fqineq::poly::{count_monic_irreducibles, enumerate_monic_irreducibles, Poly};
use fqineq::solver::{Outcome, SolveMode, DEFAULT_BUDGET};

const EXIT_OK: u8 = 0;
const EXIT_PARSE: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;
const EXIT_UNVERIFIED: u8 = 4;

#[derive(Parser)]
#[command(name = "fqineq", version, about = "Small solutions of inequalities over F_q((1/t))")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simultaneous small values of general forms.
    Solve(SolveArgs),
    /// Small values of a diagonal form.
    Diagonal(SolveArgs),
    /// Small fractional parts of forms at bounded arguments.
    Distmod(SolveArgs),
    /// Build a system whose nontrivial polynomial zeros are all large.
    Lowerbound(LowerBoundArgs),
    /// Print the norm form of degree d over F_q.
    Normic(NormicArgs),
    /// Count or list monic irreducibles over F_q.
    Irreducibles(IrreduciblesArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    /// Overrides the file's target: epsilon = gamma^eps_ord.
    #[arg(long, allow_hyphen_values = true)]
    eps_ord: Option<i64>,
    /// Overrides the file's target: N = gamma^nu.
    #[arg(long)]
    nu: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// 1 runs the deterministic search.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    refined: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    d: u32,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 1)]
    h_mult: u32,
    /// Search all zeros with every degree at most this.
    #[arg(long)]
    probe: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random kernel vectors to check.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the instance as a problem file.
    #[arg(long)]
    instance_out: Option<PathBuf>,
}

#[derive(Args)]
struct NormicArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    d: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IrreduciblesArgs {
    #[arg(long)]
    q: u64,
    #[arg(long)]
    degree: u32,
    /// Include the polynomials themselves.
    #[arg(long)]
    list: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::HypothesisViolated(_) | Error::NonChevalleyForm(_) | Error::ZeroCoefficient(_) => EXIT_HYPOTHESIS,
            Error::BudgetExceeded(_) | Error::SizeExceeded(_) => EXIT_BUDGET,
            _ => EXIT_PARSE,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn parse_failure(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_PARSE,
        msg: msg.into(),
    }
}

type CmdResult = Result<u8, Failure>;

fn emit<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Result<(), Failure> {
    let text = to_canonical(value);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| parse_failure(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn field_for(q: u64) -> Result<Gf, Failure> {
    let (p, e) = split_prime_power(q)?;
    Ok(make_field(p, e)?)
}

fn load_instance(args: &SolveArgs, expected: Variant) -> Result<ProblemInstance, Failure> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| parse_failure(format!("{}: {e}", args.input.display())))?;
    let file = parse_form_file(&text).map_err(|e| parse_failure(format!("{}: {e}", args.input.display())))?;
    let variant = file.variant()?;
    if variant != expected {
        return Err(parse_failure(format!(
            "{}: variant {:?} does not match this command",
            args.input.display(),
            file.variant
        )));
    }
    Ok(file.to_instance(args.eps_ord, args.nu)?)
}

fn run_variant(args: &SolveArgs, expected: Variant, command: &'static str) -> CmdResult {
    if args.refined && expected != Variant::General {
        return Err(parse_failure("--refined applies to solve only"));
    }
    if args.workers == 0 {
        return Err(parse_failure("--workers must be at least 1"));
    }
    let inst = load_instance(args, expected)?;
    let mode = if args.workers > 1 {
        SolveMode::Parallel { workers: args.workers }
    } else {
        SolveMode::Deterministic
    };
    let run = run_pipeline(&inst, args.refined, args.budget, mode)?;
    let distmod = (expected == Variant::Distmod).then(|| {
        let rdi = run.plan.degrees.len() as i64 * (run.plan.d as i64).pow(run.plan.i);
        let need = run.plan.b as i64 * inst.s as i64;
        let target_exp = -((need + rdi - 1) / rdi);
        DistmodJson {
            guarantee_exp: -run.plan.m,
            target_exp,
            guarantee_meets_target: -run.plan.m <= target_exp,
        }
    });
    let report = ReportFile {
        command,
        instance: InstanceSummary::new(&inst),
        plan: PlanJson::new(&run.plan, run.equations.len()),
        solver: SolverJson::new(&run.report),
        certificate: run.certificate.as_ref().map(CertificateJson::new),
        distmod,
    };
    emit(&report, &args.out)?;
    match (&run.report.outcome, &run.certificate) {
        (Outcome::Found(_), Some(c)) if c.verified => Ok(EXIT_OK),
        (Outcome::BudgetExceeded, _) => {
            eprintln!("budget of {} evaluations exhausted", args.budget);
            Ok(EXIT_BUDGET)
        }
        (Outcome::NotFound, _) => {
            eprintln!("no nontrivial solution exists within the planned degrees");
            Ok(EXIT_UNVERIFIED)
        }
        _ => {
            eprintln!("certificate failed verification");
            Ok(EXIT_UNVERIFIED)
        }
    }
}

#[derive(Serialize)]
struct LowerBoundParams {
    q: u64,
    d: u32,
    #[serde(rename = "D")]
    big_d: u32,
    r: usize,
    s: usize,
    h_mult: u32,
}

#[derive(Serialize)]
struct KernelSamplesJson {
    seed: u64,
    count: usize,
    passed: usize,
    all_vanish: bool,
    all_divisible: bool,
    min_ord: Option<i64>,
}

#[derive(Serialize)]
struct ProbeJson {
    max_ord: u64,
    result: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    ord: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<Vec<String>>,
}

#[derive(Serialize)]
struct LowerBoundReport {
    command: &'static str,
    parameters: LowerBoundParams,
    #[serde(rename = "Delta")]
    delta_total: usize,
    delta: u32,
    h_ord: i64,
    lower_bound_ord: i64,
    max_coeff_ord: i64,
    bound_identity_holds: bool,
    irreducibles: Vec<String>,
    kernel_samples: KernelSamplesJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    probe: Option<ProbeJson>,
}

fn random_poly(rng: &mut ChaCha8Rng, field: &Gf, max_len: usize) -> Poly {
    let len = rng.gen_range(0..=max_len);
    Poly::new(field, (0..len).map(|_| Fe(rng.gen_range(0..field.q()))).collect())
}

fn run_lowerbound(args: &LowerBoundArgs) -> CmdResult {
    let field = field_for(args.q)?;
    let inst = construct_instance(&field, args.d, args.r, args.s, args.h_mult)?;
    if let Some(path) = &args.instance_out {
        let problem = ProblemInstance::general(&field, inst.s, inst.composed_forms.clone(), 0)?;
        emit(&FormFile::from_instance(&problem), &Some(path.clone()))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut passed = 0;
    let (mut all_vanish, mut all_divisible) = (true, true);
    let mut min_ord: Option<i64> = None;
    for _ in 0..args.samples {
        let w = loop {
            let w: Vec<Poly> = (0..inst.free_count()).map(|_| random_poly(&mut rng, &field, 4)).collect();
            if w.iter().any(|p| !p.is_zero()) {
                break w;
            }
        };
        let x = sample_kernel_solution(&inst, &w)?;
        let c = check_kernel_vector(&inst, &x)?;
        all_vanish &= c.forms_vanish && c.linear_vanish;
        all_divisible &= c.divisible;
        if let Some(o) = c.ord_x.finite() {
            min_ord = Some(min_ord.map_or(o, |m| m.min(o)));
        }
        passed += c.passed() as usize;
    }
    let mut ok = passed == args.samples;
    let mut code = EXIT_OK;
    let probe = match args.probe {
        None => None,
        Some(max_ord) => Some(match exhaustive_min_search(&inst, max_ord, args.budget) {
            Ok(MinSearch::NoneBelow(m)) => {
                ok &= (m as i64) < inst.lower_bound_ord;
                ProbeJson {
                    max_ord,
                    result: "NONE_BELOW",
                    ord: None,
                    x: None,
                }
            }
            Ok(MinSearch::Minimal { ord, x }) => {
                ok &= ord as i64 >= inst.lower_bound_ord;
                ProbeJson {
                    max_ord,
                    result: "MINIMAL",
                    ord: Some(ord),
                    x: Some(x.iter().map(|p| p.to_string()).collect()),
                }
            }
            Err(Error::BudgetExceeded(_)) => {
                eprintln!("probe to degree {max_ord} does not fit the budget of {}", args.budget);
                code = EXIT_BUDGET;
                ProbeJson {
                    max_ord,
                    result: "BUDGET_EXCEEDED",
                    ord: None,
                    x: None,
                }
            }
            Err(e) => return Err(e.into()),
        }),
    };
    let (dl, del, s) = (args.d as i64, inst.delta_total as i64, args.s as i64);
    let report = LowerBoundReport {
        command: "lowerbound",
        parameters: LowerBoundParams {
            q: args.q,
            d: args.d,
            big_d: inst.big_d,
            r: args.r,
            s: args.s,
            h_mult: args.h_mult,
        },
        delta_total: inst.delta_total,
        delta: inst.delta,
        h_ord: inst.h_ord,
        lower_bound_ord: inst.lower_bound_ord,
        max_coeff_ord: inst
            .composed_forms
            .iter()
            .filter_map(|f| f.degree_info().max_coeff_ord.finite())
            .max()
            .unwrap_or(0),
        bound_identity_holds: inst.lower_bound_ord * dl * (s - del) == del * (inst.h_ord - (dl - 1)),
        irreducibles: (0..inst.delta_total)
            .flat_map(|u| (0..=inst.free_count()).flat_map(move |w| (0..args.h_mult as usize).map(move |l| (u, w, l))))
            .map(|(u, w, l)| inst.pi(u, w, l).to_string())
            .collect(),
        kernel_samples: KernelSamplesJson {
            seed: args.seed,
            count: args.samples,
            passed,
            all_vanish,
            all_divisible,
            min_ord,
        },
        probe,
    };
    emit(&report, &args.out)?;
    if code != EXIT_OK {
        return Ok(code);
    }
    if !ok {
        eprintln!("lower-bound checks failed");
        return Ok(EXIT_UNVERIFIED);
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct NormicReport {
    command: &'static str,
    field: FieldFile,
    d: u32,
    psi: String,
    psi_terms: Vec<TermFile>,
    extension_modulus: String,
    basis: String,
    anisotropic: bool,
}

fn run_normic(args: &NormicArgs) -> CmdResult {
    let field = field_for(args.q)?;
    let b = build_norm_form(&field, args.d)?;
    let anisotropic = check_anisotropic(&b.psi)?;
    emit(
        &NormicReport {
            command: "normic",
            field: FieldFile {
                p: field.p() as u64,
                e: field.e(),
            },
            d: args.d,
            psi: b.psi.to_string(),
            psi_terms: fq_poly_to_json(&b.psi),
            extension_modulus: b.ext_modulus.to_string().replace('t', "z"),
            basis: b.basis_note.clone(),
            anisotropic,
        },
        &args.out,
    )?;
    Ok(if anisotropic { EXIT_OK } else { EXIT_UNVERIFIED })
}

#[derive(Serialize)]
struct IrreduciblesReport {
    command: &'static str,
    q: u64,
    degree: u32,
    count: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    polynomials: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<serde_json::Value>>,
}

fn run_irreducibles(args: &IrreduciblesArgs) -> CmdResult {
    let field = field_for(args.q)?;
    let count = count_monic_irreducibles(args.q, args.degree);
    let (polynomials, coefficients) = if args.list {
        let list = enumerate_monic_irreducibles(&field, args.degree as usize)?;
        if list.len() as u128 != count {
            eprintln!("enumeration found {} polynomials, expected {count}", list.len());
            return Ok(EXIT_UNVERIFIED);
        }
        (
            Some(list.iter().map(|p| p.to_string()).collect()),
            Some(list.iter().map(poly_coeffs_json).collect()),
        )
    } else {
        (None, None)
    };
    emit(
        &IrreduciblesReport {
            command: "irreducibles",
            q: args.q,
            degree: args.degree,
            count: count.to_string(),
            polynomials,
            coefficients,
        },
        &args.out,
    )?;
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_PARSE } else { EXIT_OK });
        }
    };
    let result = match &cli.cmd {
        Cmd::Solve(a) => run_variant(a, Variant::General, "solve"),
        Cmd::Diagonal(a) => run_variant(a, Variant::Diagonal, "diagonal"),
        Cmd::Distmod(a) => run_variant(a, Variant::Distmod, "distmod"),
        Cmd::Lowerbound(a) => run_lowerbound(a),
        Cmd::Normic(a) => run_normic(a),
        Cmd::Irreducibles(a) => run_irreducibles(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
