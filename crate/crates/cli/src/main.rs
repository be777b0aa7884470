//! `qht-cert`: certify quantum classifiers and tabulate certified radii.
//!
//! Exit codes: 0 on success, 2 when certification abstains, 1 on any error (a
//! JSON error record is written to stderr).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use qht_core::bounds::BoundReport;
use qht_core::certification::{certify, certify_smoothed, CertificateRecord};
use qht_core::io::{read_classifier, read_json, read_state, PureStateFile};
use qht_core::oracle::{boundary_radius_search, brute_force_min_beta, hoeffding_coverage};
use qht_core::quantum::PureState;
use qht_core::report;
use qht_core::Error;

const EXIT_ERROR: u8 = 1;
const EXIT_ABSTAIN: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "qht-cert", version, about = "Certified robustness of quantum classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a classifier on a benign state and write a certificate as JSON.
    /// Exits with status 2 when the protocol abstains.
    Certify(CertifyArgs),
    /// Print every applicable radius for one (pA, pB[, p]) as a CSV row with
    /// columns pA,pB,p,r_qht_pure,r_qht_pure_mixed_main,r_qht_pure_mixed_appendix,
    /// r_hoelder,r_depol_qht,r_depol_hoelder,r_depol_dp.
    Bounds(BoundsArgs),
    /// Pure-state radii on the grid pA = i/n, pB = j/n (j < i) with columns
    /// pA,pB,r_qht_pure,r_hoelder,r_qht_pure_mixed_main,r_qht_pure_mixed_appendix,
    /// qht_minus_hoelder,hoelder_minus_mixed_main,hoelder_minus_mixed_appendix.
    ComparePure(ComparePureArgs),
    /// Depolarized radii with columns p,pA,r_depol_qht,r_depol_hoelder,r_depol_dp,
    /// entire_sphere.
    CompareDepol(CompareDepolArgs),
    /// Recompute the worked qubit example and compare with reference values.
    ToyExample(OutputArgs),
    /// Brute-force verifiers.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    /// Classifier JSON (labels, channel Kraus operators, POVM elements).
    #[arg(long)]
    classifier: PathBuf,
    /// Benign state JSON (density matrix or pure-state amplitudes).
    #[arg(long)]
    state: PathBuf,
    /// Number of measurement shots N.
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    /// Failure probability of the Hoeffding bound.
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Depolarization parameter; certifies the smoothed classifier when set.
    #[arg(long)]
    p: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long = "pA", alias = "pa")]
    p_a: f64,
    #[arg(long = "pB", alias = "pb")]
    p_b: f64,
    /// Depolarization parameter in [0, 1).
    #[arg(long, default_value_t = 0.0)]
    p: f64,
}

#[derive(Args, Debug)]
struct ComparePureArgs {
    /// Grid resolution n.
    #[arg(long, default_value_t = 100)]
    grid: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct CompareDepolArgs {
    /// Comma-separated depolarization levels (default 0.05, 0.10, ..., 0.95).
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// Number of pA values in (1/2, 1).
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Subcommand, Debug)]
enum OracleCommand {
    /// Smallest type-II error over random test operators with type-I error at most alpha0.
    MinBeta {
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        alpha0: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Boundary of the robustness condition around a pure reference state.
    Boundary {
        #[arg(long = "pA", alias = "pa")]
        p_a: f64,
        #[arg(long = "pB", alias = "pb")]
        p_b: f64,
        /// Pure reference state JSON (default |0> on a qubit).
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long, default_value_t = 16)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Empirical coverage of the Hoeffding lower bound.
    Coverage {
        #[arg(long)]
        classifier: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Usage(String),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn record(&self) -> serde_json::Value {
        let (kind, message) = match self {
            Failure::Core(e) => (e.kind().to_string(), e.to_string()),
            Failure::Usage(m) => ("Usage".to_string(), m.clone()),
            Failure::Checks(m) => ("CheckFailed".to_string(), m.clone()),
        };
        serde_json::json!({ "error": kind, "message": message })
    }
}

type CliResult = Result<u8, Failure>;

fn emit(out: &OutputArgs, text: &str) -> Result<(), Failure> {
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Core(e.into())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sha256_file(path: &Path) -> Result<String, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Core(e.into()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Core(e.into()))?;
    s.push('\n');
    Ok(s)
}

fn run_certify(args: &CertifyArgs) -> CliResult {
    let cl = read_classifier(&args.classifier)?;
    let sigma = read_state(&args.state)?;
    let certificate = match args.p {
        Some(p) => certify_smoothed(&cl, &sigma, p, args.shots, args.epsilon, args.seed)?,
        None => certify(&cl, &sigma, args.shots, args.epsilon, args.seed)?,
    };
    let mut input_hashes = BTreeMap::new();
    input_hashes.insert("classifier".to_string(), sha256_file(&args.classifier)?);
    input_hashes.insert("state".to_string(), sha256_file(&args.state)?);
    let abstained = certificate.abstained;
    let record = CertificateRecord {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        input_hashes,
        certificate,
    };
    emit(&args.out, &to_json(&record)?)?;
    Ok(if abstained { EXIT_ABSTAIN } else { 0 })
}

fn run_oracle(cmd: &OracleCommand) -> CliResult {
    let text = match cmd {
        OracleCommand::MinBeta {
            sigma,
            rho,
            alpha0,
            samples,
            seed,
        } => {
            let report = brute_force_min_beta(&read_state(sigma)?, &read_state(rho)?, *alpha0, *samples, *seed)?;
            to_json(&report)?
        }
        OracleCommand::Boundary {
            p_a,
            p_b,
            reference,
            samples,
            seed,
        } => {
            let reference = match reference {
                Some(path) => read_json::<PureStateFile>(path)?.to_state()?,
                None => PureState::basis(2, 0),
            };
            to_json(&boundary_radius_search(*p_a, *p_b, &reference, *samples, *seed)?)?
        }
        OracleCommand::Coverage {
            classifier,
            state,
            trials,
            shots,
            epsilon,
            seed,
        } => {
            let report = hoeffding_coverage(
                &read_classifier(classifier)?,
                &read_state(state)?,
                *trials,
                *shots,
                *epsilon,
                *seed,
            )?;
            to_json(&report)?
        }
    };
    print!("{text}");
    Ok(0)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Certify(args) => run_certify(&args),
        Command::Bounds(args) => {
            let r = BoundReport::compute(args.p_a, args.p_b, args.p)?;
            print!("{}", report::bounds_csv(&r));
            Ok(0)
        }
        Command::ComparePure(args) => {
            emit(&args.out, &report::pure_comparison_csv(args.grid)?)?;
            Ok(0)
        }
        Command::CompareDepol(args) => {
            let levels = if args.p.is_empty() {
                report::default_depol_levels()
            } else {
                args.p.clone()
            };
            emit(&args.out, &report::depol_comparison_csv(&levels, args.resolution)?)?;
            Ok(0)
        }
        Command::ToyExample(out) => {
            let checks = report::toy_example()?;
            emit(&out, &report::checks_csv(&checks))?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                Ok(0)
            } else {
                Err(Failure::Checks(format!("failed checks: {}", failed.join(", "))))
            }
        }
        Command::Oracle(cmd) => run_oracle(&cmd),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("QHT_CERT_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("QHT_CERT_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", Failure::Usage(e.to_string().trim_end().to_string()).record());
            return ExitCode::from(EXIT_ERROR);
        }
    };
    match configure_threads().and_then(|()| run(cli)) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(EXIT_ERROR)
        }
    }
}
