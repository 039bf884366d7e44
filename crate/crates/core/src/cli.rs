//! Command-line front end. Exit codes: 0 success, 1 runtime failure,
//! 2 usage error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bandit::{self, BanditConfig, MedoidResult, Sigma};
use crate::baselines;
use crate::bench::{Algorithm, CsvTable, Harness};
use crate::dataset::{self, PointSet};
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::oracle::DistanceOracle;
use crate::rng;

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "meddit", version, about = "Medoid computation by adaptive distance sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the medoid of a dataset with one algorithm.
    Medoid(MedoidArgs),
    /// Monte Carlo experiments writing CSV tables.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Generate synthetic datasets.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dense,
    Sparse,
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum DeltaArg {
    Value(f64),
    /// `2 / n^3`
    Theorem,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SigmaArg {
    Auto,
    Fixed(f64),
}

fn parse_delta(s: &str) -> std::result::Result<DeltaArg, String> {
    if s == "theorem" {
        return Ok(DeltaArg::Theorem);
    }
    match s.parse::<f64>() {
        Ok(d) if d > 0.0 && d < 1.0 => Ok(DeltaArg::Value(d)),
        _ => Err(format!("expected a number in (0, 1) or \"theorem\", got {s:?}")),
    }
}

fn parse_sigma(s: &str) -> std::result::Result<SigmaArg, String> {
    if s == "auto" {
        return Ok(SigmaArg::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(SigmaArg::Fixed(v)),
        _ => Err(format!("expected a positive number or \"auto\", got {s:?}")),
    }
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "dense")]
    format: Format,
    #[arg(long, value_parser = parse_metric, default_value = "l1")]
    metric: Metric,
    /// Rescale vectors to sum to one before computing distances.
    #[arg(long)]
    normalize_rows: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_delta, default_value = "1e-3")]
    delta: DeltaArg,
    #[arg(long, value_parser = parse_sigma, default_value = "auto")]
    sigma: SigmaArg,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    batch: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,
}

impl RunArgs {
    fn config(&self, n: usize) -> BanditConfig {
        let delta = match self.delta {
            DeltaArg::Value(d) => d,
            DeltaArg::Theorem => BanditConfig::theorem_delta(n.max(2)),
        };
        let sigma = match self.sigma {
            SigmaArg::Auto => Sigma::default(),
            SigmaArg::Fixed(s) => Sigma::Fixed(s),
        };
        BanditConfig {
            delta,
            sigma,
            batch: self.batch as usize,
            ..BanditConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct MedoidArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_parser = parse_algorithm, default_value = "meddit")]
    algo: Algorithm,
    /// Samples per point for RAND.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    budget: Option<u64>,
    /// Per-arm final state as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchCommon {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_parser = parse_algorithm, default_value = "meddit")]
    algo: Algorithm,
    /// Index of the true medoid; computed by brute force when omitted.
    #[arg(long)]
    truth: Option<usize>,
    /// Dataset name written into the tables (defaults to the input file stem).
    #[arg(long)]
    dataset_id: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Error probability as a function of pulls per point.
    Curve {
        #[command(flatten)]
        common: BenchCommon,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128")]
        budgets: Vec<u64>,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
    },
    /// Pull counts and failures of full runs.
    Stats {
        #[command(flatten)]
        common: BenchCommon,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
    },
    /// Arms under consideration at selected iterations of one run.
    Trace {
        #[command(flatten)]
        common: BenchCommon,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        checkpoints: Vec<u64>,
    },
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// One planted point at distance zero from all others (matrix CSV).
    Adversarial {
        #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
        n: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symmetric matrix with Gaussian row means around `gamma` (matrix CSV).
    GaussianPrior {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        #[arg(long, default_value_t = 20.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// I.i.d. standard normal vectors (dense CSV, or sparse with --sparse).
    GaussianPoints {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        n: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        d: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        sparse: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures after argument parsing, split by exit code.
enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command, writing
/// results to `stdout` and diagnostics to `stderr`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Medoid(args) => {
            let workers = args.run.workers as usize;
            let text = in_pool(workers, || cmd_medoid(&args))?;
            write_stdout(stdout, &text)
        }
        Command::Bench(cmd) => {
            let workers = match &cmd {
                BenchCommand::Curve { common, .. }
                | BenchCommand::Stats { common, .. }
                | BenchCommand::Trace { common, .. } => common.run.workers as usize,
            };
            let text = in_pool(workers, || cmd_bench(&cmd))?;
            write_stdout(stdout, &text)
        }
        Command::Gen(cmd) => {
            let text = cmd_gen(&cmd)?;
            write_stdout(stdout, &text)
        }
    }
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    if workers <= 1 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Runtime(Error::invalid(e.to_string())))?;
    pool.install(f)
}

fn write_stdout(stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Runtime(Error::io("<stdout>", e)))
}

/// Writes `text` to `out` if given, otherwise returns it for stdout.
fn emit(out: Option<&Path>, text: String) -> CliResult<String> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn load(data: &DataArgs) -> Result<PointSet> {
    let points = match data.format {
        Format::Dense => dataset::load_dense_csv(&data.input)?,
        Format::Sparse => dataset::load_sparse(&data.input)?,
        Format::Matrix => dataset::load_matrix_csv(&data.input)?,
    };
    if data.normalize_rows {
        dataset::normalize_rows(&points)
    } else {
        Ok(points)
    }
}

fn cmd_medoid(args: &MedoidArgs) -> CliResult<String> {
    let points = load(&args.data)?;
    let n = points.len();
    let oracle = DistanceOracle::new(&points, args.data.metric).with_workers(args.run.workers as usize);
    let config = args.run.config(n);
    let mut rng = rng::stream(args.run.seed, rng::STREAM_ALGORITHM);
    let result = match args.algo {
        Algorithm::Meddit => bandit::meddit(&oracle, &config, &mut rng)?,
        Algorithm::MedditCatoni => bandit::meddit_catoni(&oracle, &config, &mut rng)?,
        Algorithm::Brute => baselines::brute_force_medoid(&oracle)?,
        Algorithm::Rand => {
            let budget = args
                .budget
                .ok_or_else(|| Failure::Usage("--algo rand requires --budget".into()))?;
            baselines::rand_medoid(&oracle, budget as usize, &mut rng)?
        }
    };
    if let Some(path) = &args.out {
        std::fs::write(path, arms_csv(&result)).map_err(|e| Error::io(path, e))?;
    }
    Ok(format!(
        "index={} mu={} evals={} evals_per_point={}\n",
        result.medoid_index,
        result.mu_estimate,
        result.total_evaluations,
        result.evaluations_per_point()
    ))
}

/// Final per-arm state: `index,pulls,mu_hat,radius,exact`.
fn arms_csv(result: &MedoidResult) -> String {
    let mut out = String::from("index,pulls,mu_hat,radius,exact\n");
    for a in &result.arms_final {
        writeln!(out, "{},{},{},{},{}", a.index, a.pulls, a.mu_hat, a.radius, a.exact).unwrap();
    }
    out
}

fn cmd_bench(cmd: &BenchCommand) -> CliResult<String> {
    let common = match cmd {
        BenchCommand::Curve { common, .. }
        | BenchCommand::Stats { common, .. }
        | BenchCommand::Trace { common, .. } => common,
    };
    let points = load(&common.data)?;
    let dataset_id = common.dataset_id.clone().unwrap_or_else(|| {
        common
            .data
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });
    let harness = Harness::new(&points, common.data.metric, dataset_id)
        .with_config(common.run.config(points.len()))
        .with_seed(common.run.seed)
        .with_workers(common.run.workers as usize);
    let truth = || -> CliResult<usize> {
        match common.truth {
            Some(t) if t >= points.len() => Err(Failure::Usage(format!(
                "--truth {t} out of range for {} points",
                points.len()
            ))),
            Some(t) => Ok(t),
            None => Ok(harness.truth()?),
        }
    };
    let csv = match cmd {
        BenchCommand::Curve { budgets, trials, .. } => {
            if budgets.contains(&0) {
                return Err(Failure::Usage("budgets must be positive".into()));
            }
            if common.algo == Algorithm::Rand && points.len() < 2 {
                return Err(Failure::Usage("RAND needs at least two points".into()));
            }
            harness.error_curve(common.algo, budgets, *trials, truth()?)?.to_csv()?
        }
        BenchCommand::Stats { trials, .. } => {
            if !matches!(common.algo, Algorithm::Meddit | Algorithm::MedditCatoni) {
                return Err(Failure::Usage("bench stats needs --algo meddit or meddit-catoni".into()));
            }
            harness.stopping_stats(common.algo, *trials, truth()?)?.to_csv()?
        }
        BenchCommand::Trace { checkpoints, .. } => {
            if !matches!(common.algo, Algorithm::Meddit | Algorithm::MedditCatoni) {
                return Err(Failure::Usage("bench trace needs --algo meddit or meddit-catoni".into()));
            }
            harness.consideration_trace(common.algo, checkpoints)?.to_csv()?
        }
    };
    emit(common.out.as_deref(), csv)
}

fn cmd_gen(cmd: &GenCommand) -> CliResult<String> {
    let (points, out) = match cmd {
        GenCommand::Adversarial { n, seed, out } => {
            (dataset::gen_adversarial(*n as usize, *seed)?.points, out)
        }
        GenCommand::GaussianPrior {
            n,
            gamma,
            noise_sd,
            seed,
            out,
        } => {
            if !(noise_sd.is_finite() && *noise_sd >= 0.0) || !gamma.is_finite() {
                return Err(Failure::Usage("--gamma must be finite and --noise-sd nonnegative".into()));
            }
            (dataset::gen_gaussian_prior(*n as usize, *gamma, *noise_sd, *seed)?.points, out)
        }
        GenCommand::GaussianPoints {
            n,
            d,
            seed,
            sparse,
            out,
        } => {
            let points = dataset::gen_gaussian_points(*n as usize, *d as usize, *seed)?;
            (if *sparse { points.to_sparse() } else { points }, out)
        }
    };
    emit(out.as_deref(), dataset::to_text(&points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("meddit").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn brute_force_on_tiny_matrix() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "0,1\n2,0\n").unwrap();
        let p = path.to_str().unwrap();
        let (code, out, _) = call(&["medoid", "--input", p, "--format", "matrix", "--algo", "brute"]);
        assert_eq!(code, 0);
        assert_eq!(out, "index=0 mu=1 evals=2 evals_per_point=1\n");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["medoid", "--input", "x", "--metric", "foo"]).0, 2);
        assert_eq!(call(&["gen", "adversarial", "--n", "2"]).0, 2);
        assert_eq!(call(&["bench", "curve", "--input", "x", "--budgets", "1,a"]).0, 2);
        assert_eq!(call(&["medoid", "--input", "x", "--delta", "1.5"]).0, 2);
        assert_eq!(call(&["nonsense"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn runtime_errors_exit_1() {
        let (code, _, err) = call(&["medoid", "--input", "/nonexistent/file.csv"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn rand_requires_budget() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "0\n1\n10\n").unwrap();
        let p = path.to_str().unwrap();
        assert_eq!(call(&["medoid", "--input", p, "--algo", "rand"]).0, 2);
        let (code, out, _) = call(&["medoid", "--input", p, "--algo", "rand", "--budget", "5000"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("index=1 "), "{out}");
    }

    #[test]
    fn gen_then_brute_recovers_planted_point() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let p = path.to_str().unwrap();
        assert_eq!(call(&["gen", "adversarial", "--n", "50", "--seed", "3", "--out", p]).0, 0);
        let planted = dataset::gen_adversarial(50, 3).unwrap().planted;
        let (code, out, _) = call(&["medoid", "--input", p, "--format", "matrix", "--algo", "brute"]);
        assert_eq!(code, 0);
        assert!(out.starts_with(&format!("index={planted} ")), "{out}");
    }

    #[test]
    fn bench_tables() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("s.csv");
        std::fs::write(&data, "0\n1\n10\n").unwrap();
        let d = data.to_str().unwrap();
        let out = dir.path().join("c.csv");
        let o = out.to_str().unwrap();

        let args = ["bench", "curve", "--input", d, "--algo", "rand", "--budgets", "2,8,32", "--trials", "50", "--seed", "1", "--out", o];
        assert_eq!(call(&args).0, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("algorithm,dataset,budget_per_point,error_rate,trials\nrand,s,2,"));

        let (code, csv, _) = call(&["bench", "stats", "--input", d, "--trials", "10"]);
        assert_eq!(code, 0);
        let stats = crate::bench::StoppingStats::from_csv(&csv).unwrap();
        assert_eq!(stats.failures, 0);

        let (code, csv, _) = call(&["bench", "trace", "--input", d, "--checkpoints", "0,100,1000"]);
        assert_eq!(code, 0);
        assert!(csv.lines().count() <= 4);
        assert!(csv.starts_with("iteration,under_consideration\n0,"));
    }
}
