mod report;
mod settings;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use qutrit_ch::ch::{
    analytic_threshold, appendix_decomposition, ch_coefficients, ch_lhs, deterministic_value, JointAtom,
};
use qutrit_ch::lhv::{min_noise_lp, ThresholdMethod, CERTIFICATE_TOL, FEASIBILITY_TOL};
use qutrit_ch::optimizer::{self, Method};
use qutrit_ch::preset::paper_preset;
use qutrit_ch::quantum::{experiment_probabilities, ExperimentProbabilities, Noise, PhaseSettings};
use qutrit_ch::ThresholdStatus;

use report::{matrix, num, Report};
use settings::SettingsFile;

/// Tolerance for re-validating probability tables before printing.
const OUTPUT_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "qutrit-ch",
    version,
    about = "Clauser-Horne inequality for two entangled qutrits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Analytic,
    Lp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Analytic => Method::Analytic,
            MethodArg::Lp => Method::Lp,
        }
    }
}

impl MethodArg {
    fn name(self) -> &'static str {
        match self {
            MethodArg::Analytic => "analytic",
            MethodArg::Lp => "lp",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Joint tables and singles for a settings file.
    Probs {
        #[arg(long)]
        settings: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Left-hand side of the inequality.
    Ch {
        #[arg(long)]
        settings: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Noise threshold of the settings.
    Threshold {
        #[arg(long)]
        settings: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
    },
    /// The 81 inequality coefficients in odometer order (a1 fastest).
    Coeffs {
        #[arg(long)]
        csv: bool,
    },
    /// Mechanical checks of the coefficient expansion.
    VerifyAppendix,
    /// Print (or write) the built-in published settings file.
    PaperPreset {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Random-restart search for the settings with the largest threshold.
    Optimize {
        #[arg(long)]
        restarts: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum)]
        method: MethodArg,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
    Verification(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

impl From<qutrit_ch::Error> for Failure {
    fn from(e: qutrit_ch::Error) -> Self {
        match e {
            qutrit_ch::Error::InvalidNoise(_) | qutrit_ch::Error::InvalidPermutation(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Numerical(other.to_string()),
        }
    }
}

enum Output {
    Report(Report),
    Text(String),
}

fn noise_arg(value: f64) -> Result<Noise, Failure> {
    Noise::new(value).map_err(|_| Failure::Usage(format!("--noise must lie in [0, 1], got {value}")))
}

fn load(report: &mut Report, path: &Path) -> Result<PhaseSettings, Failure> {
    let (file, bytes) =
        SettingsFile::read(path).map_err(|e| Failure::Usage(format!("settings file {}: {e}", path.display())))?;
    report.input_digest = Some(format!("sha256:{}", hex::encode(Sha256::digest(&bytes))));
    report.arg("settings", path.display().to_string());
    file.to_settings()
        .map_err(|e| Failure::Usage(format!("settings file {}: {e}", path.display())))
}

fn tables_json(exp: &ExperimentProbabilities) -> Value {
    let mut tables = serde_json::Map::new();
    for row in &exp.tables {
        for t in row {
            tables.insert(format!("{}{}", t.k, t.l), matrix(&t.p));
        }
    }
    Value::Object(tables)
}

fn threshold_status(s: ThresholdStatus) -> &'static str {
    match s {
        ThresholdStatus::Violated => "violated",
        ThresholdStatus::NoViolation => "no-violation",
        ThresholdStatus::AlwaysViolated => "always-violated",
    }
}

fn run(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Probs { settings, noise } => {
            let mut report = Report::new("probs");
            let s = load(&mut report, &settings)?;
            let noise = noise_arg(noise)?;
            report.arg("noise", num(noise.value()));
            let exp = experiment_probabilities(&s, noise)?;
            let defect = exp.invariant_defect();
            if defect.is_nan() || defect > OUTPUT_TOL {
                return Err(Failure::Numerical(format!("tables violate invariants by {defect:.3e}")));
            }
            report
                .result("tables", tables_json(&exp))
                .result("alice_singles", matrix(&exp.alice_singles))
                .result("bob_singles", matrix(&exp.bob_singles))
                .result("invariant_defect", num(defect))
                .tolerance("invariants", OUTPUT_TOL);
            Ok(Output::Report(report))
        }
        Command::Ch { settings, noise } => {
            let mut report = Report::new("ch");
            let s = load(&mut report, &settings)?;
            let noise = noise_arg(noise)?;
            report.arg("noise", num(noise.value()));
            let lhs = ch_lhs(&experiment_probabilities(&s, noise)?);
            report.result("lhs", num(lhs)).result("violated", lhs > 0.0);
            Ok(Output::Report(report))
        }
        Command::Threshold { settings, method } => {
            let mut report = Report::new("threshold");
            let s = load(&mut report, &settings)?;
            report.arg("method", method.name());
            let exp0 = experiment_probabilities(&s, Noise::NONE)?;
            match method {
                MethodArg::Analytic => {
                    let t = analytic_threshold(&exp0);
                    report
                        .result("f_thr", num(t.f_thr))
                        .result("status", threshold_status(t.status))
                        .result("lhs_at_zero_noise", num(t.lhs_clean))
                        .result("lhs_at_full_noise", num(t.lhs_noise));
                }
                MethodArg::Lp => {
                    let out = min_noise_lp(&exp0)?;
                    let f = out
                        .f_min
                        .ok_or_else(|| Failure::Numerical("threshold LP returned no value".into()))?;
                    let solver = match out.method {
                        Some(ThresholdMethod::Bisection) => "bisection",
                        _ => "direct-lp",
                    };
                    let certificate: Vec<Value> = out
                        .certificate
                        .iter()
                        .flat_map(|c| JointAtom::all().map(move |a| (a, c.weight(a))))
                        .filter(|(_, w)| *w > 0.0)
                        .map(|(a, w)| json!({ "atom": [a.a1, a.a2, a.b1, a.b2], "weight": num(w) }))
                        .collect();
                    report
                        .result("f_thr", num(f))
                        .result("solver", solver)
                        .result("iterations", out.iterations)
                        .result("certificate", certificate)
                        .tolerance("feasibility", FEASIBILITY_TOL)
                        .tolerance("certificate", CERTIFICATE_TOL);
                }
            }
            Ok(Output::Report(report))
        }
        Command::Coeffs { csv } => {
            let c = ch_coefficients();
            if csv {
                let mut out = String::from("a1,a2,b1,b2,coefficient\n");
                for (a, v) in c.iter() {
                    out.push_str(&format!("{},{},{},{},{}\n", a.a1, a.a2, a.b1, a.b2, v));
                }
                return Ok(Output::Text(out));
            }
            let mut report = Report::new("coeffs");
            let entries: Vec<Value> = c
                .iter()
                .map(|(a, v)| json!({ "a1": a.a1, "a2": a.a2, "b1": a.b1, "b2": a.b2, "coefficient": num(v) }))
                .collect();
            report
                .result("order", "a1 fastest, then a2, b1, b2")
                .result("coefficients", entries)
                .result("sum", num(c.sum()));
            Ok(Output::Report(report))
        }
        Command::VerifyAppendix => verify_appendix(),
        Command::PaperPreset { output } => {
            let file = SettingsFile::from_settings(&paper_preset());
            let text = serde_json::to_string_pretty(&file.to_json()).expect("settings serialise") + "\n";
            match output {
                None => Ok(Output::Text(text)),
                Some(path) => {
                    std::fs::write(&path, &text)
                        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
                    let mut report = Report::new("paper-preset");
                    report
                        .arg("output", path.display().to_string())
                        .result("settings", file.to_json());
                    Ok(Output::Report(report))
                }
            }
        }
        Command::Optimize { restarts, seed, method } => {
            if restarts == 0 {
                return Err(Failure::Usage("--restarts must be at least 1".into()));
            }
            let mut report = Report::new("optimize");
            report
                .arg("restarts", restarts)
                .arg("seed", seed)
                .arg("method", method.name());
            let r = optimizer::optimize(restarts, seed, method.into())?;
            report
                .result("best_threshold", num(r.best_threshold))
                .result("best_settings", SettingsFile::from_settings(&r.best_settings).to_json())
                .result("best_restart", r.best_restart)
                .result("evaluations", r.evaluations)
                .result("failed_restarts", r.failed_restarts)
                .tolerance("coordinate", optimizer::COORDINATE_TOL)
                .tolerance("sweep", optimizer::SWEEP_TOL);
            Ok(Output::Report(report))
        }
    }
}

fn verify_appendix() -> Result<Output, Failure> {
    let c = ch_coefficients();
    let (ch1, ch2, g) = appendix_decomposition();
    let max_det = JointAtom::all()
        .map(deterministic_value)
        .fold(f64::NEG_INFINITY, f64::max);
    let paths_agree = JointAtom::all().all(|a| (deterministic_value(a) - c[a]).abs() <= 1e-12);
    let checks = [
        ("non-positivity", c.0.iter().all(|&v| v <= 0.0)),
        (
            "values-in-{0,-1,-2}",
            c.0.iter().all(|&v| v == 0.0 || v == -1.0 || v == -2.0),
        ),
        ("sum-is-minus-54", c.sum() == -54.0),
        ("census-30-48-3", c.census() == (30, 48, 3)),
        ("deterministic-values-match-coefficients", paths_agree),
        ("ch1-plus-ch2-plus-g", (ch1 + ch2 + g).max_abs_diff(&c) <= 1e-12),
        ("ch1-and-ch2-non-positive", ch1.max() <= 0.0 && ch2.max() <= 0.0),
        ("max-deterministic-value-is-zero", max_det == 0.0),
    ];
    let mut report = Report::new("verify-appendix");
    let entries: Vec<Value> = checks
        .iter()
        .map(|(name, ok)| json!({ "check": name, "status": if *ok { "pass" } else { "fail" } }))
        .collect();
    let census = c.census();
    report
        .result("checks", entries)
        .result(
            "census",
            json!({ "zero": census.0, "minus_one": census.1, "minus_two": census.2 }),
        )
        .result("sum", num(c.sum()))
        .tolerance("decomposition", 1e-12);
    let failed: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        Ok(Output::Report(report))
    } else {
        emit(&(report.render(std::time::Duration::ZERO) + "\n"));
        Err(Failure::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> ExitCode {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            eprintln!("error: cannot write output: {e}");
            ExitCode::from(1)
        }
        _ => ExitCode::SUCCESS,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            if e.kind() == clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                eprintln!("error: a subcommand is required (try --help)");
            } else {
                let text = e.render().to_string();
                eprintln!("{}", text.lines().next().unwrap_or("error: invalid arguments"));
            }
            return ExitCode::from(1);
        }
    };
    let start = Instant::now();
    match run(cli.command) {
        Ok(Output::Report(report)) => emit(&(report.render(start.elapsed()) + "\n")),
        Ok(Output::Text(text)) => emit(&text),
        Err(failure) => {
            let msg = match &failure {
                Failure::Usage(m) | Failure::Numerical(m) | Failure::Verification(m) => m,
            };
            eprintln!("error: {msg}");
            ExitCode::from(failure.exit_code())
        }
    }
}
