use std::fs;
use std::io::Read;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cwak::counting::{self, MethodChoice, DEFAULT_BUDGET};
use cwak::padic::{self, PadicCtx};
use cwak::theorems::{self, SharpnessShape, SubstitutionKind};
use cwak::{parse_instance, unipoly, weights, Error, FieldCtx, IndexSet, NatOrInf, SystemInstance, UniPoly};

#[derive(Parser)]
#[command(name = "cwak", version, about = "Solution counts and divisibility guarantees for substituted polynomial systems over finite fields")]
struct Cli {
    /// Compact single-line JSON instead of pretty-printed output.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FieldArgs {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long, default_value_t = 1)]
    s: u32,
    /// Monic modulus coefficients, low to high, comma separated.
    #[arg(long, value_delimiter = ',')]
    modulus: Option<Vec<u64>>,
}

impl FieldArgs {
    fn ctx(&self) -> Result<Arc<FieldCtx>, Error> {
        let p = self
            .p
            .ok_or_else(|| Error::InvalidInstance { field: "p".into(), message: "--p is required".into() })?;
        Ok(Arc::new(FieldCtx::new(p, self.s, self.modulus.as_deref())?))
    }
}

#[derive(Args)]
struct PolySource {
    /// Instance file ("-" for stdin); every f_i is analyzed.
    #[arg(conflicts_with = "coeffs")]
    input: Option<String>,
    /// Coefficients of f, low to high, comma separated.
    #[arg(long, value_delimiter = ',')]
    coeffs: Option<Vec<u64>>,
    #[command(flatten)]
    field: FieldArgs,
}

#[derive(Args)]
struct CountArgs {
    /// Instance file ("-" for stdin).
    input: String,
    #[arg(long, default_value = "auto")]
    method: MethodChoice,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Value set, fibers, u, C, omega, p-weight and WSC classification.
    Analyze(PolySource),
    /// Exact number of solutions and its p-adic valuation.
    Count(CountArgs),
    /// Count exactly and confront every divisibility guarantee with the count.
    Verify {
        #[command(flatten)]
        count: CountArgs,
        /// 1-based index set, comma separated.
        #[arg(long = "I", value_delimiter = ',', conflicts_with = "all_subsets")]
        index_set: Option<Vec<usize>>,
        /// Evaluate every nonempty index set and report the best guarantee.
        #[arg(long)]
        all_subsets: bool,
    },
    /// The minimization invariant omega(f) next to u(f).
    Omega(PolySource),
    /// Reproduce a worked example.
    Repro {
        #[command(subcommand)]
        which: Repro,
    },
    /// Random instances whose count meets the best guarantee exactly.
    SearchSharpness {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 1)]
        p_degree: u32,
        #[arg(long, default_value_t = 3)]
        max_terms: usize,
        #[arg(long, default_value = "identity")]
        f_kind: SubstitutionKind,
        #[arg(long, default_value_t = 1)]
        f_degree: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Seeded checks of the p-adic congruences in O/p^k.
    VerifyLemmas {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = padic::DEFAULT_PRECISION)]
        k: u32,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 4)]
        max_f_degree: usize,
        #[arg(long, default_value_t = 12)]
        max_delta: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Repro {
    Example1,
    Example2,
    MonomialTable {
        #[arg(long, default_value_t = 64)]
        max_q: u64,
    },
}

/// Result of a command: the JSON report and whether it signals a failure.
struct Outcome {
    report: Value,
    failed: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, failed: false }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::InvalidInstance { .. } => 2,
        Error::BudgetExceeded { .. } => 3,
        Error::InternalInconsistency(_) => 4,
        _ => 1,
    }
}

fn read_input(path: &str) -> Result<String, Error> {
    let mut text = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Error::InvalidInstance { field: "input".into(), message: format!("{path}: {e}") })?;
    Ok(text)
}

fn load(path: &str) -> Result<SystemInstance, Error> {
    parse_instance(&read_input(path)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn field_value(ctx: &FieldCtx) -> Value {
    to_value(&ctx.spec())
}

/// The polynomials named on the command line or in an instance file.
fn polys(src: &PolySource) -> Result<(Arc<FieldCtx>, Vec<UniPoly>), Error> {
    match (&src.input, &src.coeffs) {
        (Some(path), _) => {
            let sys = load(path)?;
            Ok((sys.ctx_arc(), sys.f_list().to_vec()))
        }
        (None, Some(coeffs)) => {
            let ctx = src.field.ctx()?;
            let f = UniPoly::from_reps(&ctx, coeffs).map_err(|e| Error::InvalidInstance {
                field: "coeffs".into(),
                message: e.to_string(),
            })?;
            Ok((ctx, vec![f]))
        }
        (None, None) => Err(Error::InvalidInstance {
            field: "input".into(),
            message: "give an instance file or --coeffs".into(),
        }),
    }
}

fn bound_checks(ctx: &FieldCtx, f: &UniPoly, omega: Option<u64>, u: NatOrInf) -> Value {
    let (Some(omega), Some(deg)) = (omega, f.degree()) else {
        return Value::Null;
    };
    let q1 = ctx.q() - 1;
    let deg = deg as u64;
    let lower = omega * deg >= q1;
    let upper = u.at_least(omega);
    let divides = q1 % deg == 0;
    let equality = !divides || (omega * deg == q1 && u == NatOrInf::Finite(q1 / deg));
    json!({
        "omega_at_least_q_minus_1_over_deg": lower,
        "omega_at_most_u": upper,
        "deg_divides_q_minus_1": divides,
        "equality_when_deg_divides": equality,
    })
}

fn analyze(src: &PolySource) -> Result<Outcome, Error> {
    let (ctx, fs) = polys(src)?;
    let mut entries = Vec::new();
    let mut failed = false;
    for f in &fs {
        let a = unipoly::analyze(&ctx, f)?;
        let checks = bound_checks(&ctx, f, a.omega, a.u);
        if let Value::Object(m) = &checks {
            failed |= m.iter().any(|(k, v)| k != "deg_divides_q_minus_1" && v == &Value::Bool(false));
        }
        entries.push(json!({
            "f": f,
            "value_set_size": a.value_set_size(),
            "analysis": a,
            "bound_checks": checks,
        }));
    }
    Ok(Outcome { report: json!({"field": field_value(&ctx), "polynomials": entries}), failed })
}

fn omega(src: &PolySource) -> Result<Outcome, Error> {
    let (ctx, fs) = polys(src)?;
    let mut entries = Vec::new();
    for f in &fs {
        let w = weights::omega_invariant(&ctx, f)?;
        let u = unipoly::u_invariant(&ctx, f).u;
        entries.push(json!({"f": f, "omega": w, "u": u, "degree": f.degree()}));
    }
    Ok(Outcome::ok(json!({"field": field_value(&ctx), "polynomials": entries})))
}

fn count(args: &CountArgs) -> Result<Outcome, Error> {
    let sys = load(&args.input)?;
    let result = counting::count(&sys, args.method, args.budget)?;
    Ok(Outcome::ok(json!({"field": field_value(sys.ctx()), "count_result": result})))
}

fn verify(args: &CountArgs, index_set: &Option<Vec<usize>>, all_subsets: bool) -> Result<Outcome, Error> {
    let sys = load(&args.input)?;
    let report = if all_subsets {
        theorems::verify_all_subsets(&sys, args.method, args.budget)?
    } else {
        let index = match index_set {
            Some(members) => Some(IndexSet::new(members, sys.n()).map_err(|e| Error::InvalidInstance {
                field: "I".into(),
                message: e.to_string(),
            })?),
            None => None,
        };
        theorems::verify(&sys, index.as_ref(), args.method, args.budget)?
    };
    Ok(Outcome { failed: !report.is_clean(), report: to_value(&report) })
}

fn repro(which: &Repro) -> Result<Outcome, Error> {
    let (name, report, pass) = match which {
        Repro::Example1 => {
            let r = cwak::repro::example1_grid()?;
            ("example1", to_value(&r), r.pass)
        }
        Repro::Example2 => {
            let r = cwak::repro::example2()?;
            let sys = cwak::repro::example2_instance()?;
            let mut v = to_value(&r);
            v["field"] = field_value(sys.ctx());
            ("example2", v, r.pass)
        }
        Repro::MonomialTable { max_q } => {
            let r = cwak::repro::monomial_table(*max_q)?;
            ("monomial-table", to_value(&r), r.pass)
        }
    };
    Ok(Outcome {
        report: json!({"name": name, "status": if pass { "PASS" } else { "FAIL" }, "report": report}),
        failed: !pass,
    })
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Analyze(src) => analyze(src),
        Command::Omega(src) => omega(src),
        Command::Count(args) => count(args),
        Command::Verify { count, index_set, all_subsets } => verify(count, index_set, *all_subsets),
        Command::Repro { which } => repro(which),
        Command::SearchSharpness { field, n, r, p_degree, max_terms, f_kind, f_degree, trials, seed, budget } => {
            let ctx = field.ctx()?;
            let shape = SharpnessShape {
                n: *n,
                r: *r,
                p_degree: *p_degree,
                max_terms: *max_terms,
                f_kind: *f_kind,
                f_degree: *f_degree,
            };
            let found = theorems::search_sharpness(&ctx, &shape, *trials, *seed, *budget)?;
            Ok(Outcome::ok(json!({
                "field": field_value(&ctx),
                "shape": shape,
                "trials": trials,
                "seed": seed,
                "found": found,
            })))
        }
        Command::VerifyLemmas { field, k, trials, max_f_degree, max_delta, seed } => {
            let ctx = field.ctx()?;
            let pctx = PadicCtx::new(ctx.clone(), *k)?;
            let report = padic::run_lemma_trials(&pctx, *trials, *max_f_degree, *max_delta, *seed)?;
            let failed = !report.all_passed();
            Ok(Outcome {
                report: json!({"field": field_value(&ctx), "report": report}),
                failed,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = if cli.json {
                serde_json::to_string(&out.report)
            } else {
                serde_json::to_string_pretty(&out.report)
            };
            println!("{}", text.expect("reports serialize"));
            if out.failed {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
