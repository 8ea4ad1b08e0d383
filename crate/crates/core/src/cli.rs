//! Command line front end. Every command prints one `bernlab/1` JSON report
//! unless a CSV output is requested.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cocycles::bump::build_special;
use crate::cocycles::folner::build_folner;
use crate::cocycles::{norm_sq_bruteforce, norm_sq_tol, DEFAULT_TOL};
use crate::criteria::montecarlo::mc_omega;
use crate::criteria::products::kesten_check;
use crate::criteria::{classify_conservativity, CriterionOptions, KappaChoice, Verdict};
use crate::error::{Error, Result};
use crate::group::{Element, GroupKind};
use crate::marginals::{
    measures_from_ab_exp, measures_from_lambda, ActionSpec, BaseMeasure, BoundedValue, GrowthBound, Real,
};
use crate::num::{format_rational, parse_rational, rat, to_f64};
use crate::presets::{preset, PRESETS};
use crate::report::{spec_digest, Report};
use crate::typeclass::{classify_action, classify_measures};
use crate::verify::verify_bounds;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bernlab", version, about = "Cocycles, conservativity and Krieger types of Bernoulli actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SpecArgs {
    /// Action spec as JSON.
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    /// Named action, e.g. f2-wsplit or f2-dissipative(36).
    #[arg(long)]
    preset: Option<String>,
    /// Replace the multiplicity (diagonal power) of the action.
    #[arg(long)]
    power: Option<u32>,
}

impl SpecArgs {
    fn load(&self) -> Result<ActionSpec> {
        let spec = match (&self.spec, &self.preset) {
            (Some(path), _) => ActionSpec::from_json(&std::fs::read_to_string(path)?)?,
            (None, Some(name)) => preset(name)?,
            (None, None) => return Err(Error::InvalidArgument("give --spec FILE or --preset NAME".into())),
        };
        match self.power {
            Some(m) => spec.with_multiplicity(m),
            None => Ok(spec),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate and inspect action specs.
    #[command(subcommand)]
    Spec(SpecCommand),
    /// Cocycle norms.
    #[command(subcommand)]
    Cocycle(CocycleCommand),
    /// Decide conservativity or dissipativity.
    Criterion(CriterionArgs),
    /// Krieger type, stable type and Sd invariant.
    Classify(ClassifyArgs),
    /// Monte Carlo estimates of omega(g, .).
    Simulate(SimulateArgs),
    /// Check the Hellinger and negative moment bounds on a grid.
    Verify(VerifyArgs),
    /// Construct the explicit cocycles.
    #[command(subcommand)]
    Build(BuildCommand),
}

#[derive(Subcommand, Debug)]
enum SpecCommand {
    /// Load a spec file, check it and print its digest.
    Validate { file: PathBuf },
    /// Print a preset as JSON.
    Show {
        #[arg(long)]
        preset: String,
    },
    /// List the presets.
    Presets,
}

#[derive(Subcommand, Debug)]
enum CocycleCommand {
    /// ||c_g||^2 with its error.
    Norm {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(short = 'g', long = "element", allow_negative_numbers = true)]
        element: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Also sum the coefficients directly over this radius.
        #[arg(long)]
        oracle_radius: Option<u32>,
    },
    /// ||c_g||^2 against |g| or k, as CSV (index, value, lower_bound, upper_bound).
    /// On free groups each row covers a sphere: value and lower_bound are
    /// the smallest, upper_bound the largest over the sphere.
    Growth {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        radius: u32,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct CriterionArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// `auto` or a rational above kappa0(delta).
    #[arg(long, default_value = "auto")]
    kappa: String,
    /// Radius of the reported partial sums.
    #[arg(long)]
    radius: Option<u32>,
    /// Print the partial sums as CSV instead of the report.
    #[arg(long)]
    csv: bool,
    /// Exit with status 3 when no certificate is found.
    #[arg(long)]
    certify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// Base measure mu0 as comma separated rationals.
    #[arg(long, requires = "mu1")]
    mu0: Option<String>,
    #[arg(long, requires = "mu0")]
    mu1: Option<String>,
    /// Two-point measures with T(0) = lambda and T(1) = 1/lambda.
    #[arg(long)]
    lambda: Option<String>,
    /// Measures with e^a and e^b given, as "EXP_A,EXP_B".
    #[arg(long)]
    ab_exp: Option<String>,
    #[arg(long, conflicts_with = "preset")]
    spec: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Group elements whose omega values are used; default the positive generators.
    #[arg(long = "element", short = 'g', allow_negative_numbers = true)]
    elements: Vec<String>,
    /// Include the stable type set.
    #[arg(long)]
    stable: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(short = 'g', long = "element", allow_negative_numbers = true)]
    element: String,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    window: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    spec: SpecArgs,
    /// Grid: the ball of this radius (free groups) or |k| <= radius.
    #[arg(long)]
    radius: Option<u32>,
    #[arg(short = 'g', long = "element", allow_negative_numbers = true)]
    elements: Vec<String>,
    /// Exit with status 3 when a bound fails.
    #[arg(long)]
    certify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum BuildCommand {
    /// Bump cocycle on Z with ||gamma_k||^2 >= D |k|^(3/2).
    Special {
        #[arg(long)]
        d: String,
        /// Check k = 1..=k_max.
        #[arg(long, default_value_t = 128)]
        k_max: i64,
        /// Relative tolerance for the norms.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Folner cocycle on Z with ||c_{g_k}|| <= phi(g_k).
    Folner {
        /// `log` for phi = alpha ln(1 + k), `sqrt-log` for phi^2 = alpha ln(1 + k).
        #[arg(long, default_value = "log")]
        growth: String,
        #[arg(long, default_value = "1")]
        alpha: String,
        #[arg(long, default_value = "1/4")]
        eps_bound: String,
        #[arg(long, default_value_t = 6)]
        sets: usize,
        #[arg(long, default_value_t = 200)]
        horizon: u64,
        /// Write the resulting action spec here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::InvalidSpec(_)
        | Error::InvalidArgument(_)
        | Error::NotInClass(_)
        | Error::Domain(_)
        | Error::Json(_) => EXIT_INVALID,
        Error::Unsupported(_) | Error::Budget(_) | Error::Io(_) => EXIT_FAILURE,
    }
}

/// Runs a command line, writing results to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

fn parse_element(spec: &ActionSpec, s: &str) -> Result<Element> {
    spec.group.parse(s)
}

fn parse_measure(s: &str) -> Result<BaseMeasure> {
    let w = s.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
    BaseMeasure::new(w)
}

fn bounded(r: &Real) -> Value {
    match r {
        Real::Exact(q) => json!({"value": to_f64(q), "err": 0.0, "exact": format_rational(q)}),
        Real::Approx(b) => json!({"value": b.value, "err": b.err}),
    }
}

fn csv_rows(rows: &[(String, f64, f64, f64)]) -> String {
    let mut s = String::from("index,value,lower_bound,upper_bound\n");
    for (i, v, lo, hi) in rows {
        s.push_str(&format!("{i},{v:e},{lo:e},{hi:e}\n"));
    }
    s
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    let start = Instant::now();
    match cmd {
        Command::Spec(SpecCommand::Validate { file }) => {
            let spec = ActionSpec::from_json(&std::fs::read_to_string(&file)?)?;
            let r = Report::new("spec validate", Some(&spec), json!({"valid": true, "spec": spec}))?;
            emit(out, None, &r.timed(start).to_json())?;
        }
        Command::Spec(SpecCommand::Show { preset: name }) => {
            emit(out, None, &preset(&name)?.to_json())?;
        }
        Command::Spec(SpecCommand::Presets) => {
            let list: Vec<Value> = PRESETS.iter().map(|(n, d)| json!({"name": n, "description": d})).collect();
            let r = Report::new("spec presets", None, list)?;
            emit(out, None, &r.timed(start).to_json())?;
        }
        Command::Cocycle(CocycleCommand::Norm { spec, element, tol, oracle_radius }) => {
            let spec = spec.load()?;
            let g = parse_element(&spec, &element)?;
            let n = norm_sq_tol(&spec, &g, tol)?;
            let mut res = bounded(&n);
            res["element"] = json!(g);
            res["method"] = json!("closed_form");
            if let Some(r) = oracle_radius {
                let o = norm_sq_bruteforce(&spec, &g, r)?;
                let mut ov = bounded(&o.partial);
                ov["radius"] = json!(r);
                ov["tail"] = json!(o.tail);
                res["oracle"] = ov;
            }
            let r = Report::new("cocycle norm", Some(&spec), res)?;
            emit(out, None, &r.timed(start).to_json())?;
        }
        Command::Cocycle(CocycleCommand::Growth { spec, radius, tol, out: path }) => {
            let spec = spec.load()?;
            let rows = growth_rows(&spec, radius, tol)?;
            let csv = csv_rows(&rows);
            match path {
                Some(p) => {
                    emit(out, Some(&p), &csv)?;
                    let res = json!({"rows": rows.len(), "out": p.display().to_string()});
                    emit(out, None, &Report::new("cocycle growth", Some(&spec), res)?.timed(start).to_json())?;
                }
                None => emit(out, None, &csv)?,
            }
        }
        Command::Criterion(a) => {
            let spec = a.spec.load()?;
            let kappa = match a.kappa.trim() {
                "auto" => KappaChoice::Auto,
                v => KappaChoice::Value(parse_rational(v)?),
            };
            let opts = CriterionOptions { kappa, radius: a.radius, ..CriterionOptions::default() };
            let v = classify_conservativity(&spec, &opts)?;
            if a.csv {
                let rows: Vec<(String, f64, f64, f64)> = v
                    .partial_sums
                    .iter()
                    .map(|p| (p.radius.to_string(), 0.5 * (p.lower + p.upper), p.lower, p.upper))
                    .collect();
                emit(out, a.out.as_ref(), &csv_rows(&rows))?;
            } else {
                let mut r = Report::new("criterion", Some(&spec), &v)?;
                if let Some(e) = &v.evidence {
                    r = r.with_certificate(e)?;
                }
                emit(out, a.out.as_ref(), &r.timed(start).to_json())?;
            }
            if a.certify && v.verdict == Verdict::Inconclusive {
                return Ok(EXIT_INCONCLUSIVE);
            }
        }
        Command::Classify(a) => return classify(a, out, start),
        Command::Simulate(a) => {
            let spec = a.spec.load()?;
            let g = parse_element(&spec, &a.element)?;
            let est = mc_omega(&spec, &g, a.window, a.samples, a.seed)?;
            let mut res = serde_json::to_value(&est)?;
            res["max_z"] = json!(est.max_z());
            let r = Report::new("simulate", Some(&spec), res)?.with_seeds(vec![a.seed]);
            emit(out, a.out.as_ref(), &r.timed(start).to_json())?;
        }
        Command::Verify(a) => {
            let spec = a.spec.load()?;
            let grid: Option<Vec<Element>> = if !a.elements.is_empty() {
                Some(a.elements.iter().map(|s| parse_element(&spec, s)).collect::<Result<_>>()?)
            } else {
                a.radius.map(|r| match spec.group.kind {
                    GroupKind::Free => spec.group.ball(r),
                    GroupKind::Integers => (-(r as i64)..=r as i64).map(Element::Int).collect(),
                })
            };
            let v = verify_bounds(&spec, grid.as_deref())?;
            let mut res = serde_json::to_value(&v)?;
            if spec.group.kind == GroupKind::Free {
                match kesten_check(&spec) {
                    Ok(k) => res["kesten"] = serde_json::to_value(k)?,
                    Err(e) => res["kesten_skipped"] = json!(e.to_string()),
                }
            }
            let r = Report::new("verify", Some(&spec), res)?;
            emit(out, a.out.as_ref(), &r.timed(start).to_json())?;
            if a.certify && !v.passed() {
                return Ok(EXIT_INCONCLUSIVE);
            }
        }
        Command::Build(BuildCommand::Special { d, k_max, tol, out: path }) => {
            let d = parse_rational(&d)?;
            let bc = build_special(&d)?;
            let df = to_f64(&d);
            let mut rows = Vec::new();
            let mut failures = 0;
            for k in 1..=k_max.max(1) {
                let target = df * (k as f64).powf(1.5);
                let v = bc.gamma_norm_sq(k, tol * target)?;
                let holds = v.lower() >= target;
                failures += usize::from(!holds);
                rows.push(GrowthRow { k, norm_sq: v, target, holds });
            }
            let widths: Vec<u64> = (0..8).map(|m| bc.width(m)).collect();
            let res = json!({
                "d": format_rational(&d),
                "delta": format_rational(bc.delta()),
                "first_widths": widths,
                "checked": rows.len(),
                "failures": failures,
                "rows": rows,
            });
            let r = Report::new("build special", None, res)?;
            emit(out, path.as_ref(), &r.timed(start).to_json())?;
        }
        Command::Build(BuildCommand::Folner { growth, alpha, eps_bound, sets, horizon, out: path }) => {
            let alpha = parse_rational(&alpha)?;
            let growth = match growth.as_str() {
                "log" => GrowthBound::Log { alpha },
                "sqrt-log" => GrowthBound::SqrtLog { alpha },
                other => return Err(Error::InvalidArgument(format!("unknown growth {other:?}; use log or sqrt-log"))),
            };
            let eps_bound = parse_rational(&eps_bound)?;
            let f = build_folner(&growth, &eps_bound, sets, horizon)?;
            let spec = f.spec(eps_bound.clone(), eps_bound.min(rat(1, 2)))?;
            if let Some(p) = &path {
                std::fs::write(p, spec.to_json())?;
            }
            let res = json!({"summary": f.describe(), "cocycle": f, "spec_digest": spec_digest(&spec)});
            emit(out, None, &Report::new("build folner", Some(&spec), res)?.timed(start).to_json())?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct GrowthRow {
    k: i64,
    norm_sq: BoundedValue,
    target: f64,
    holds: bool,
}

fn growth_rows(spec: &ActionSpec, radius: u32, tol: f64) -> Result<Vec<(String, f64, f64, f64)>> {
    let mut rows = Vec::new();
    match spec.group.kind {
        GroupKind::Integers => {
            for k in -(radius as i64)..=radius as i64 {
                let n = norm_sq_tol(spec, &Element::Int(k), tol)?;
                rows.push((k.to_string(), n.value(), n.lower(), n.upper()));
            }
        }
        GroupKind::Free => {
            for r in 0..=radius {
                let mut lo = f64::INFINITY;
                let mut min_v = f64::INFINITY;
                let mut hi: f64 = 0.0;
                for g in spec.group.sphere(r) {
                    let n = norm_sq_tol(spec, &g, tol)?;
                    min_v = min_v.min(n.value());
                    lo = lo.min(n.lower());
                    hi = hi.max(n.upper());
                }
                rows.push((r.to_string(), min_v, lo, hi));
            }
        }
    }
    Ok(rows)
}

fn classify(a: ClassifyArgs, out: &mut dyn Write, start: Instant) -> Result<i32> {
    let (c, spec) = if let (Some(m0), Some(m1)) = (&a.mu0, &a.mu1) {
        (classify_measures(&parse_measure(m0)?, &parse_measure(m1)?)?, None)
    } else if let Some(l) = &a.lambda {
        let (m0, m1) = measures_from_lambda(&parse_rational(l)?)?;
        (classify_measures(&m0, &m1)?, None)
    } else if let Some(ab) = &a.ab_exp {
        let (ea, eb) = ab
            .split_once(',')
            .ok_or_else(|| Error::Parse("--ab-exp takes EXP_A,EXP_B".into()))?;
        let (m0, m1) = measures_from_ab_exp(&parse_rational(ea)?, &parse_rational(eb)?)?;
        (classify_measures(&m0, &m1)?, None)
    } else {
        let spec = SpecArgs { spec: a.spec.clone(), preset: a.preset.clone(), power: None }.load()?;
        let elems: Vec<Element> = a.elements.iter().map(|s| parse_element(&spec, s)).collect::<Result<_>>()?;
        let c = classify_action(&spec, (!elems.is_empty()).then_some(elems.as_slice()))?;
        (c, Some(spec))
    };
    let mut res = serde_json::to_value(&c)?;
    if !a.stable {
        res.as_object_mut().expect("object").remove("stable_types");
    }
    let r = Report::new("classify", spec.as_ref(), res)?;
    emit(out, a.out.as_ref(), &r.timed(start).to_json())?;
    Ok(EXIT_OK)
}
