//! Batch front-end: `construct`, `analyze`, `invert`, `phi` and `selftest`.
//!
//! Exit codes: 0 on success, 1 when `--expect bell` is refuted or the self
//! test fails, 2 on usage errors, unreadable files and malformed JSON.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::constructors::{
    bell_from_factors, cm_from_measure, discrete_stable, negative_binomial, pf_from_params, BellCaseSampler,
};
use crate::genfun::{default_ladder, phi_recover, post_inversion, GenFunModel, PhiRecovery, PostMode};
use crate::json::{self, JsonError, SeqDocument};
use crate::phi::{decompose_phi, validate_phi, PhiValidation};
use crate::scalar::{Rational, Scalar, Sign};
use crate::selftest::{self, DEFAULT_SEED};
use crate::sequence::{
    is_bell_shaped_up_to, is_completely_monotone_up_to, is_totally_positive_up_to, whale_order_up_to, BellReport,
    BellVerdict, CmReport, EpsPolicy, FiniteSeq, SignPolicy, TpBudget, TpReport, WhaleReport,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BELLSEQ_OUT_DIR";

const AFTER_HELP: &str = "\
Output files go to --out when given, otherwise to the directory named by
--out-dir, then $BELLSEQ_OUT_DIR, then the current directory.

CSV columns:
  analyze --csv   n,expected_changes,count,first_sign,final_sign,saturated,verdict,seed
  invert  --csv   n,j,estimate,abs_error,seed   (abs_error empty without --reference)

Exit codes: 0 ok, 1 refuted under --expect bell or failed selftest, 2 usage or input error.";

#[derive(Debug, Parser)]
#[command(name = "bellseq", version, about = "Bell-shaped sequences: construct, classify, invert", after_help = AFTER_HELP)]
struct Cli {
    /// Seed for every randomized step; recorded in each artifact.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory for default output files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a sequence and write it as JSON.
    Construct {
        #[command(subcommand)]
        family: Family,
    },
    /// Run the classifiers on a sequence file.
    Analyze(AnalyzeArgs),
    /// Discrete Post inversion convergence study.
    Invert(InvertArgs),
    /// Validate, decompose or recover φ.
    Phi {
        #[command(subcommand)]
        action: PhiAction,
    },
    /// Run the acceptance suite and print a pass/fail table.
    Selftest {
        /// Also write the results as JSON (includes timings).
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Window {
    /// Last index K of the window.
    #[arg(long = "K", value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    /// Output file (default seq.json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Family {
    /// ((1 - p)/(1 - px))^λ.
    Negbin {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        window: Window,
    },
    /// exp(-λ(1 - x)^ν).
    Dstable {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        nu: f64,
        #[command(flatten)]
        window: Window,
    },
    /// Pólya frequency sequence from a PFParams descriptor.
    Pf {
        #[arg(long)]
        params: PathBuf,
        /// Exact rational arithmetic (needs b = c = 0).
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        window: Window,
    },
    /// Completely monotone sequence from a HausdorffMeasure descriptor.
    Cm {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        window: Window,
    },
    /// PF factor convolved with a CM factor.
    Bell {
        #[arg(long, required_unless_present = "random", requires = "measure")]
        params: Option<PathBuf>,
        #[arg(long, required_unless_present = "random", requires = "params")]
        measure: Option<PathBuf>,
        /// Draw the factors from the seeded sampler instead.
        #[arg(long, conflicts_with_all = ["params", "measure", "exact"])]
        random: bool,
        /// Which sampled case to use with --random.
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        window: Window,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ArithMode {
    Float,
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Expect {
    Bell,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Sequence file.
    seq: PathBuf,
    /// Highest difference order N.
    #[arg(long = "N", default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Truncate the window to a(0..=K).
    #[arg(long = "K", value_parser = clap::value_parser!(u64).range(1..))]
    k: Option<u64>,
    /// Row-relative snap factor; default 1e-12 in float mode, 0 in rational mode.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum, default_value = "float")]
    mode: ArithMode,
    /// Largest whale order tried.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    dmax: u64,
    /// Also check Toeplitz minors up to this size.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    tp_order: Option<u64>,
    /// Exit with 1 unless the sequence is consistent with this shape.
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    /// Report file (default report.json).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-order sign-change table (default counts.csv).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InvertMode {
    Integral,
    ExactDelta,
}

#[derive(Debug, Args)]
struct InvertArgs {
    /// Sequence file.
    seq: PathBuf,
    #[arg(long)]
    x: f64,
    /// Comma-separated orders n.
    #[arg(long = "n-list", value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    #[arg(long, value_enum, default_value = "integral")]
    mode: InvertMode,
    /// Largest n accepted by exact-delta mode.
    #[arg(long, default_value_t = crate::genfun::DEFAULT_EXACT_DELTA_BOUND)]
    exact_bound: usize,
    /// Known value of F(x); adds the abs_error column.
    #[arg(long)]
    reference: Option<f64>,
    /// Convergence table (default convergence.csv).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum PhiAction {
    /// Check the conditions on φ.
    Validate {
        spec: PathBuf,
        /// Report file (default phi-validate.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split φ into a PF part and a [0, 1]-valued part.
    Decompose {
        spec: PathBuf,
        #[arg(long)]
        exact: bool,
        /// Report file (default phi-decompose.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate φ(s) from the boundary argument of F.
    Recover {
        /// φ specification backing the model.
        #[arg(long, required_unless_present = "seq", conflicts_with = "seq")]
        spec: Option<PathBuf>,
        /// Sequence backing a coefficient model.
        #[arg(long)]
        seq: Option<PathBuf>,
        /// Comma-separated points s outside [0, 1].
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        s: Vec<f64>,
        /// Comma-separated decreasing heights t.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<f64>>,
        /// Report file (default phi-recover.json).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Json { file: PathBuf, err: JsonError },
    Io { file: PathBuf, err: std::io::Error },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Json { file, err } => write!(f, "{}: {err}", file.display()),
            CliError::Io { file, err } => write!(f, "{}: {err}", file.display()),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Context {
    seed: u64,
    out_dir: PathBuf,
}

impl Context {
    fn target(&self, explicit: &Option<PathBuf>, default: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out_dir.join(default))
    }
}

fn read(file: &Path) -> CliResult<String> {
    std::fs::read_to_string(file).map_err(|err| CliError::Io {
        file: file.to_path_buf(),
        err,
    })
}

fn write(file: &Path, contents: &str) -> CliResult<()> {
    let io = |err| CliError::Io {
        file: file.to_path_buf(),
        err,
    };
    if let Some(dir) = file.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(file, contents).map_err(io)
}

fn json_at<T>(file: &Path, r: Result<T, JsonError>) -> CliResult<T> {
    r.map_err(|err| CliError::Json {
        file: file.to_path_buf(),
        err,
    })
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let out_dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let ctx = Context {
        seed: cli.seed,
        out_dir,
    };
    let outcome = match cli.command {
        Command::Construct { family } => construct(&ctx, family),
        Command::Analyze(args) => analyze(&ctx, args),
        Command::Invert(args) => invert(&ctx, args),
        Command::Phi { action } => phi(&ctx, action),
        Command::Selftest { json } => run_selftest(&ctx, json),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn window_last(w: &Window) -> usize {
    w.k as usize
}

fn save_seq(ctx: &Context, w: &Window, doc: &SeqDocument) -> CliResult<i32> {
    let path = ctx.target(&w.out, "seq.json");
    write(&path, &json::to_pretty(doc))?;
    println!("wrote {} (K = {})", path.display(), doc.terms.len() - 1);
    Ok(0)
}

fn construct(ctx: &Context, family: Family) -> CliResult<i32> {
    match family {
        Family::Negbin { p, lambda, window } => {
            let seq = negative_binomial(p, lambda, window_last(&window))?;
            let source = json!({"family": "negbin", "p": p, "lambda": lambda});
            save_seq(ctx, &window, &SeqDocument::from_float(&seq, ctx.seed, Some(source)))
        }
        Family::Dstable { lambda, nu, window } => {
            let seq = discrete_stable(lambda, nu, window_last(&window))?;
            let source = json!({"family": "dstable", "lambda": lambda, "nu": nu});
            save_seq(ctx, &window, &SeqDocument::from_float(&seq, ctx.seed, Some(source)))
        }
        Family::Pf { params, exact, window } => {
            let text = read(&params)?;
            let last = window_last(&window);
            let doc = if exact {
                let pf = json_at(&params, json::read_pf::<Rational>(&text))?;
                let source = json!({"family": "pf", "params": json::pf_params_out(&pf)});
                SeqDocument::from_exact(&pf_from_params(&pf, last)?, ctx.seed, Some(source))
            } else {
                let pf = json_at(&params, json::read_pf::<f64>(&text))?;
                let source = json!({"family": "pf", "params": pf});
                SeqDocument::from_float(&pf_from_params(&pf, last)?, ctx.seed, Some(source))
            };
            save_seq(ctx, &window, &doc)
        }
        Family::Cm { measure, exact, window } => {
            let text = read(&measure)?;
            let last = window_last(&window);
            let doc = if exact {
                let mu = json_at(&measure, json::read_measure::<Rational>(&text))?;
                let source = json!({"family": "cm", "measure": json::parse::<serde_json::Value>(&text).ok()});
                SeqDocument::from_exact(&cm_from_measure(&mu, last)?, ctx.seed, Some(source))
            } else {
                let mu = json_at(&measure, json::read_measure::<f64>(&text))?;
                let source = json!({"family": "cm", "measure": mu});
                SeqDocument::from_float(&cm_from_measure(&mu, last)?, ctx.seed, Some(source))
            };
            save_seq(ctx, &window, &doc)
        }
        Family::Bell {
            params,
            measure,
            random,
            index,
            exact,
            window,
        } => {
            let last = window_last(&window);
            if random {
                let case = BellCaseSampler::new(ctx.seed)
                    .nth(index)
                    .expect("the sampler never ends");
                let seq = bell_from_factors(&case.pf, &case.mu, last)?;
                let source = json!({"family": "bell", "random": true, "case": case});
                return save_seq(ctx, &window, &SeqDocument::from_float(&seq, ctx.seed, Some(source)));
            }
            let (params, measure) = (params.expect("required by clap"), measure.expect("required by clap"));
            let (pf_text, mu_text) = (read(&params)?, read(&measure)?);
            let doc = if exact {
                let pf = json_at(&params, json::read_pf::<Rational>(&pf_text))?;
                let mu = json_at(&measure, json::read_measure::<Rational>(&mu_text))?;
                let source = json!({
                    "family": "bell",
                    "params": json::pf_params_out(&pf),
                    "measure": json::parse::<serde_json::Value>(&mu_text).ok(),
                });
                SeqDocument::from_exact(&bell_from_factors(&pf, &mu, last)?, ctx.seed, Some(source))
            } else {
                let pf = json_at(&params, json::read_pf::<f64>(&pf_text))?;
                let mu = json_at(&measure, json::read_measure::<f64>(&mu_text))?;
                let source = json!({"family": "bell", "params": pf, "measure": mu});
                SeqDocument::from_float(&bell_from_factors(&pf, &mu, last)?, ctx.seed, Some(source))
            };
            save_seq(ctx, &window, &doc)
        }
    }
}

fn load_seq(file: &Path) -> CliResult<SeqDocument> {
    let text = read(file)?;
    json_at(file, json::read_seq(&text))
}

#[derive(Debug, Serialize)]
struct AnalysisReport {
    seed: u64,
    mode: &'static str,
    eps: EpsPolicy,
    max_order: usize,
    window_last_index: usize,
    verdict: String,
    bell: BellReport,
    completely_monotone: CmReport,
    whale: WhaleReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    total_positivity: Option<TpReport>,
}

fn verdict_name(v: &BellVerdict) -> String {
    match v {
        BellVerdict::ConsistentWithBell => "consistent-with-bell".into(),
        BellVerdict::RefutedAtOrder { order } => format!("refuted-at-order-{order}"),
        BellVerdict::NotNonnegative { index } => format!("negative-term-at-{index}"),
        BellVerdict::Inconclusive => "inconclusive".into(),
    }
}

fn sign_name(s: Sign) -> &'static str {
    match s {
        Sign::Negative => "negative",
        Sign::Zero => "zero",
        Sign::Positive => "positive",
    }
}

fn run_analysis<T: Scalar>(seq: &FiniteSeq<T>, args: &AnalyzeArgs, seed: u64) -> CliResult<AnalysisReport> {
    let seq = match args.k {
        Some(k) if k as usize > seq.last_index() => {
            return Err(CliError::Usage(format!(
                "--K {k} exceeds the stored window (last index {})",
                seq.last_index()
            )))
        }
        Some(k) => seq.truncated(k as usize),
        None => seq.clone(),
    };
    let eps = match args.eps {
        Some(f) if !(f >= 0.0 && f.is_finite()) => {
            return Err(CliError::Usage(format!("--eps {f} must be a nonnegative number")))
        }
        Some(f) => EpsPolicy::RowRelative(f),
        None => EpsPolicy::Auto,
    };
    let policy = SignPolicy::with_eps(eps);
    let n = args.n as usize;
    let bell = is_bell_shaped_up_to(&seq, n, &policy)?;
    let total_positivity = match args.tp_order {
        Some(r) => {
            let budget = TpBudget {
                seed,
                ..TpBudget::default()
            };
            Some(is_totally_positive_up_to(&seq, r as usize, eps, &budget)?)
        }
        None => None,
    };
    Ok(AnalysisReport {
        seed,
        mode: if T::EXACT { "rational" } else { "float" },
        eps,
        max_order: n,
        window_last_index: seq.last_index(),
        verdict: verdict_name(&bell.overall),
        completely_monotone: is_completely_monotone_up_to(&seq, n, &policy)?,
        whale: whale_order_up_to(&seq, n, args.dmax as usize, &policy)?,
        bell,
        total_positivity,
    })
}

fn counts_csv(report: &AnalysisReport) -> String {
    let mut out = String::from("n,expected_changes,count,first_sign,final_sign,saturated,verdict,seed\n");
    for e in &report.bell.per_order {
        let verdict = serde_json::to_value(e.verdict).expect("serializable verdict");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            e.n,
            e.expected_changes,
            e.sign_changes.count,
            sign_name(e.sign_changes.first_sign),
            sign_name(e.sign_changes.final_sign),
            e.sign_changes.saturated,
            verdict.as_str().unwrap_or_default(),
            report.seed
        );
    }
    out
}

fn analyze(ctx: &Context, args: AnalyzeArgs) -> CliResult<i32> {
    let doc = load_seq(&args.seq)?;
    let report = match args.mode {
        ArithMode::Float => run_analysis(&json_at(&args.seq, doc.to_float())?, &args, ctx.seed)?,
        ArithMode::Rational => run_analysis(&json_at(&args.seq, doc.to_exact())?, &args, ctx.seed)?,
    };
    let report_path = ctx.target(&args.out, "report.json");
    let csv_path = ctx.target(&args.csv, "counts.csv");
    write(&report_path, &json::to_pretty(&report))?;
    write(&csv_path, &counts_csv(&report))?;
    println!("{}: {}", args.seq.display(), report.verdict);
    let refuted = args.expect == Some(Expect::Bell) && !report.bell.is_consistent();
    Ok(if refuted { 1 } else { 0 })
}

fn invert(ctx: &Context, args: InvertArgs) -> CliResult<i32> {
    let doc = load_seq(&args.seq)?;
    let seq = json_at(&args.seq, doc.to_float())?;
    let mode = match args.mode {
        InvertMode::Integral => PostMode::Integral,
        InvertMode::ExactDelta => PostMode::ExactDelta {
            bound: args.exact_bound,
        },
    };
    let mut out = String::from("n,j,estimate,abs_error,seed\n");
    for &n in &args.n_list {
        let e = post_inversion(&seq, args.x, n, mode)?;
        let err = args
            .reference
            .map(|r| format!("{:e}", (e.value - r).abs()))
            .unwrap_or_default();
        let _ = writeln!(out, "{},{},{:.17e},{},{}", e.n, e.j, e.value, err, ctx.seed);
    }
    let path = ctx.target(&args.csv, "convergence.csv");
    write(&path, &out)?;
    println!("wrote {}", path.display());
    Ok(0)
}

#[derive(Serialize)]
struct Validation {
    seed: u64,
    passed: bool,
    conditions: PhiValidation,
}

#[derive(Serialize)]
#[serde(untagged)]
enum RecoverOutcome {
    Ok(PhiRecovery),
    Err { s: f64, error: String },
}

fn phi(ctx: &Context, action: PhiAction) -> CliResult<i32> {
    match action {
        PhiAction::Validate { spec, out } => {
            let parsed = json_at(&spec, json::read_phi::<f64>(&read(&spec)?))?;
            let conditions = validate_phi(&parsed)?;
            let report = Validation {
                seed: ctx.seed,
                passed: conditions.passed(),
                conditions,
            };
            let path = ctx.target(&out, "phi-validate.json");
            write(&path, &json::to_pretty(&report))?;
            println!("{}: {}", spec.display(), if report.passed { "valid" } else { "invalid" });
            Ok(0)
        }
        PhiAction::Decompose { spec, exact, out } => {
            let text = read(&spec)?;
            let decomposition = if exact {
                let parsed = json_at(&spec, json::read_phi::<Rational>(&text))?;
                json::decomposition_out(&decompose_phi(&parsed)?)
            } else {
                let parsed = json_at(&spec, json::read_phi::<f64>(&text))?;
                json::decomposition_out(&decompose_phi(&parsed)?)
            };
            let path = ctx.target(&out, "phi-decompose.json");
            let report = json!({"seed": ctx.seed, "decomposition": decomposition});
            write(&path, &json::to_pretty(&report))?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        PhiAction::Recover {
            spec,
            seq,
            s,
            ladder,
            out,
        } => {
            let (model, backing) = match (spec, seq) {
                (Some(spec), _) => {
                    let parsed = json_at(&spec, json::read_phi::<f64>(&read(&spec)?))?;
                    (GenFunModel::from_phi(parsed), "phi")
                }
                (None, Some(seq)) => {
                    let doc = load_seq(&seq)?;
                    (GenFunModel::from_coeffs(json_at(&seq, doc.to_float())?), "coefficients")
                }
                (None, None) => unreachable!("clap requires --spec or --seq"),
            };
            let ladder = ladder.unwrap_or_else(default_ladder);
            let results: Vec<RecoverOutcome> = s
                .iter()
                .map(|&s| match phi_recover(&model, s, &ladder) {
                    Ok(r) => RecoverOutcome::Ok(r),
                    Err(e) => RecoverOutcome::Err {
                        s,
                        error: e.to_string(),
                    },
                })
                .collect();
            let report = json!({"seed": ctx.seed, "model": backing, "ladder": ladder, "results": results});
            let path = ctx.target(&out, "phi-recover.json");
            write(&path, &json::to_pretty(&report))?;
            println!("wrote {}", path.display());
            Ok(0)
        }
    }
}

fn run_selftest(ctx: &Context, json_out: Option<PathBuf>) -> CliResult<i32> {
    let results = selftest::run_all(ctx.seed);
    for r in &results {
        println!("{}", r.line());
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("{passed}/{} criteria passed", results.len());
    if let Some(path) = json_out {
        write(&path, &json::to_pretty(&json!({"seed": ctx.seed, "criteria": results})))?;
    }
    Ok(if passed == results.len() { 0 } else { 1 })
}
