use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tauber::brownian::{
    bsqr_asymptotic_rate, chain_log_functional, condbb_rate, exact_log_laplace, mc_conditional,
    mc_smallball, smallball_expected_hits, BoxFamily, PathSampleConfig, TimeGrid,
    MIN_RELIABLE_HITS,
};
use tauber::exponents::{identity_residual, pair_from_alpha, r_from_s, s_from_r, RateValue};
use tauber::lattice::LatticeDistribution;
use tauber::numerics::{geometric_grid, QuadratureConfig, SeedSpec};
use tauber::verify::{format_num, run_suite, Num, Suite};
use tauber::Error;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_EMPTY_CONDITIONING: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser)]
#[command(
    name = "tauber",
    version,
    about = "Exponential Tauberian rates, the lattice example and the Brownian L2 small-ball problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between the Laplace rate r and the small-ball rate s.
    Convert(ConvertArgs),
    /// Tables for the lattice distribution on {q^n}.
    Example(ExampleArgs),
    /// Brownian L2 functional computations.
    Brownian {
        #[command(subcommand)]
        command: BrownianCommand,
    },
    /// Run a verification suite and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("rate").required(true).args(["r", "s"])))]
struct ConvertArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Pmf,
    Cdf,
    Laplace,
    Rates,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ExampleArgs {
    #[arg(long)]
    q: f64,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, value_enum)]
    emit: Emit,
    /// Number of support points for `pmf`.
    #[arg(long, default_value_t = 10)]
    n: u32,
    /// Explicit abscissae (epsilon for `cdf`, lambda for `laplace`).
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["lo", "hi", "points"])]
    at: Vec<f64>,
    /// Geometric grid lower end.
    #[arg(long)]
    lo: Option<f64>,
    /// Geometric grid upper end.
    #[arg(long)]
    hi: Option<f64>,
    #[arg(long, default_value_t = 20)]
    points: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum BrownianCommand {
    /// -1/2 log cosh(gamma t), cross-checked against the kernel chain.
    Laplace(LaplaceArgs),
    /// Log Laplace functional restricted to boxes at the given times.
    Chain(ChainArgs),
    /// Asymptotic rates of the chain and of the conditioned skeleton.
    Rate(RateArgs),
    /// Monte Carlo small-ball or conditional probability.
    Mc(McArgs),
}

#[derive(Args)]
struct LaplaceArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
}

#[derive(Args)]
struct SkeletonArgs {
    /// Horizon.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Observation times, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    times: Vec<f64>,
    /// Boxes `a:b`, `:b`, `a:` or `:`, comma-separated, one per time.
    #[arg(long, allow_hyphen_values = true)]
    boxes: String,
}

#[derive(Args)]
struct ChainArgs {
    #[command(flatten)]
    skeleton: SkeletonArgs,
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
}

#[derive(Args)]
struct RateArgs {
    #[command(flatten)]
    skeleton: SkeletonArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x0: f64,
}

#[derive(Args)]
#[command(group(ArgGroup::new("conditional").args(["times", "boxes"]).multiple(true).requires_all(["times", "boxes"])))]
struct McArgs {
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Condition on the small ball and report the skeleton probability.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    boxes: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Convert(args) => convert(args),
        Command::Example(args) => example(args),
        Command::Brownian { command } => brownian(command),
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::EmptyConditioning => EXIT_EMPTY_CONDITIONING,
                Error::Parse { .. } => EXIT_USAGE,
                _ => EXIT_DOMAIN,
            })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY_FAILED),
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string(value).expect("output serializes")
    );
}

fn rate(x: f64, name: &'static str) -> Result<RateValue<f64>, Failure> {
    RateValue::new(x).map_err(|_| {
        Failure::Lib(Error::Domain {
            name,
            value: x,
            expected: "finite and <= 0",
        })
    })
}

#[derive(Serialize)]
struct ConvertOut {
    alpha: Num,
    beta: Num,
    r: Num,
    s: Num,
    identity_residual: Num,
}

fn convert(args: ConvertArgs) -> CliResult {
    let pair = pair_from_alpha(args.alpha)?;
    let (r, s) = match (args.r, args.s) {
        (Some(r), None) => {
            let r = rate(r, "r")?;
            (r, s_from_r(r, pair))
        }
        (None, Some(s)) => {
            let s = rate(s, "s")?;
            (r_from_s(s, pair), s)
        }
        _ => {
            return Err(Failure::Usage(
                "exactly one of --r and --s is required".into(),
            ))
        }
    };
    print_json(&ConvertOut {
        alpha: Num(pair.alpha()),
        beta: Num(pair.beta()),
        r: Num(r.value()),
        s: Num(s.value()),
        identity_residual: Num(identity_residual(r, s, pair)),
    });
    Ok(())
}

/// A table printed as CSV with a header, or as a JSON array of records.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn print(&self, format: Format) {
        match format {
            Format::Csv => {
                println!("{}", self.columns.join(","));
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(|&x| csv_cell(x)).collect();
                    println!("{}", cells.join(","));
                }
            }
            Format::Json => {
                let records: Vec<Record> = self
                    .rows
                    .iter()
                    .map(|row| Record {
                        columns: &self.columns,
                        row,
                    })
                    .collect();
                print_json(&records);
            }
        }
    }
}

/// One table row as a JSON object, columns in table order.
struct Record<'a> {
    columns: &'a [&'static str],
    row: &'a [f64],
}

impl Serialize for Record<'_> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.columns.len()))?;
        for (c, &x) in self.columns.iter().zip(self.row) {
            map.serialize_entry(c, &Num(x))?;
        }
        map.end()
    }
}

fn csv_cell(x: f64) -> String {
    if x.is_finite() {
        format_num(x)
    } else {
        String::new()
    }
}

fn grid_from(args: &ExampleArgs, default_lo: f64, default_hi: f64) -> Result<Vec<f64>, Failure> {
    if !args.at.is_empty() {
        return Ok(args.at.clone());
    }
    let lo = args.lo.unwrap_or(default_lo);
    let hi = args.hi.unwrap_or(default_hi);
    Ok(geometric_grid(lo, hi, args.points)?)
}

fn example(args: ExampleArgs) -> CliResult {
    let d = LatticeDistribution::new(args.q, args.s, args.beta)?;
    let table = match args.emit {
        Emit::Pmf => {
            if args.n == 0 {
                return Err(Failure::Usage("--n must be at least 1".into()));
            }
            let rows = (1..=args.n)
                .map(|n| Ok(vec![n as f64, d.support(n), d.pmf(n)?]))
                .collect::<Result<_, Error>>()?;
            Table {
                columns: vec!["n", "epsilon", "pmf"],
                rows,
            }
        }
        Emit::Cdf => {
            let grid = grid_from(&args, d.support(20), args.q)?;
            let rows = grid
                .iter()
                .map(|&e| Ok(vec![e, d.cdf(e)?, d.eps_beta_log_cdf(e)?]))
                .collect::<Result<_, Error>>()?;
            Table {
                columns: vec!["epsilon", "cdf", "eps_beta_log_cdf"],
                rows,
            }
        }
        Emit::Laplace => {
            let alpha = args.beta / (1.0 + args.beta);
            let grid = grid_from(&args, 1e2, 1e6)?;
            let rows = grid
                .iter()
                .map(|&l| {
                    let ll = d.log_laplace(l, 1e-14)?;
                    Ok(vec![l, ll.exp(), ll, l.powf(-alpha) * ll])
                })
                .collect::<Result<_, Error>>()?;
            Table {
                columns: vec!["lambda", "laplace", "log_laplace", "scaled_log_laplace"],
                rows,
            }
        }
        Emit::Rates => {
            let pair = tauber::exponents::ExponentPair::from_beta(args.beta)?;
            let r = d.theoretic_rates(pair)?;
            Table {
                columns: vec![
                    "alpha",
                    "beta",
                    "s_lower",
                    "s_upper",
                    "r_upper",
                    "r_lower_band_lower",
                    "r_lower_band_upper",
                ],
                rows: vec![vec![
                    pair.alpha(),
                    pair.beta(),
                    r.s_lower,
                    r.s_upper,
                    r.r_upper,
                    r.r_lower_band.lower(),
                    r.r_lower_band.upper(),
                ]],
            }
        }
    };
    table.print(args.format);
    Ok(())
}

fn skeleton(args: &SkeletonArgs) -> Result<(TimeGrid<f64>, BoxFamily<f64>), Failure> {
    let grid = TimeGrid::new(args.t, args.times.clone())?;
    let boxes: BoxFamily<f64> = args.boxes.parse()?;
    if boxes.len() != grid.len() {
        return Err(Failure::Usage(format!(
            "{} boxes given for {} times",
            boxes.len(),
            grid.len()
        )));
    }
    Ok((grid, boxes))
}

#[derive(Serialize)]
struct LaplaceOut {
    gamma: Num,
    t: Num,
    log_laplace: Num,
    chain_quadrature: Num,
    abs_diff: Num,
}

#[derive(Serialize)]
struct ChainOut {
    gamma: Num,
    t: Num,
    x0: Num,
    times: Vec<Num>,
    boxes: Vec<String>,
    log_functional: Num,
}

#[derive(Serialize)]
struct RateOut {
    t: Num,
    x0: Num,
    times: Vec<Num>,
    boxes: Vec<String>,
    bsqr_rate: Num,
    condbb_rate: Num,
}

#[derive(Serialize)]
struct McOut {
    mode: &'static str,
    t: Num,
    epsilon: Num,
    paths: usize,
    steps: usize,
    seed: SeedSpec,
    times: Option<Vec<Num>>,
    boxes: Option<Vec<String>>,
    p_hat: Num,
    ci_halfwidth: Num,
    hits: usize,
    trials: usize,
    reliable: bool,
}

fn nums(xs: &[f64]) -> Vec<Num> {
    xs.iter().copied().map(Num).collect()
}

fn box_strings(b: &BoxFamily<f64>) -> Vec<String> {
    b.iter().map(|i| i.to_string()).collect()
}

fn brownian(command: BrownianCommand) -> CliResult {
    let quad = QuadratureConfig::default();
    match command {
        BrownianCommand::Laplace(a) => {
            let grid = TimeGrid::new(a.t, vec![a.t])?;
            let exact = exact_log_laplace(a.gamma, a.t);
            let chain =
                chain_log_functional(0.0, &grid, &BoxFamily::whole_line(1), a.gamma, &quad)?;
            print_json(&LaplaceOut {
                gamma: Num(a.gamma),
                t: Num(a.t),
                log_laplace: Num(exact),
                chain_quadrature: Num(chain),
                abs_diff: Num((chain - exact).abs()),
            });
        }
        BrownianCommand::Chain(a) => {
            let (grid, boxes) = skeleton(&a.skeleton)?;
            let v = chain_log_functional(a.x0, &grid, &boxes, a.gamma, &quad)?;
            print_json(&ChainOut {
                gamma: Num(a.gamma),
                t: Num(a.skeleton.t),
                x0: Num(a.x0),
                times: nums(grid.times()),
                boxes: box_strings(&boxes),
                log_functional: Num(v),
            });
        }
        BrownianCommand::Rate(a) => {
            let (grid, boxes) = skeleton(&a.skeleton)?;
            print_json(&RateOut {
                t: Num(a.skeleton.t),
                x0: Num(a.x0),
                times: nums(grid.times()),
                boxes: box_strings(&boxes),
                bsqr_rate: Num(bsqr_asymptotic_rate(a.x0, &grid, &boxes)?),
                condbb_rate: Num(condbb_rate(&grid, &boxes)?),
            });
        }
        BrownianCommand::Mc(a) => mc(a)?,
    }
    Ok(())
}

fn mc(a: McArgs) -> CliResult {
    if a.epsilon.is_nan() || a.epsilon <= 0.0 {
        return Err(Error::Domain {
            name: "epsilon",
            value: a.epsilon,
            expected: "> 0",
        }
        .into());
    }
    if !(a.t > 0.0 && a.t.is_finite()) {
        return Err(Error::Domain {
            name: "t",
            value: a.t,
            expected: "finite and > 0",
        }
        .into());
    }
    let seed = SeedSpec::new(a.seed, 0);
    let config = PathSampleConfig::new(a.steps, a.paths, seed)?.with_threads(a.threads);
    let (mode, est, times, boxes) = match (&a.times, &a.boxes) {
        (Some(times), Some(boxes)) => {
            let (grid, boxes) = skeleton(&SkeletonArgs {
                t: a.t,
                times: times.clone(),
                boxes: boxes.clone(),
            })?;
            let est = mc_conditional(&grid, &boxes, a.epsilon, &config)?;
            (
                "conditional",
                est,
                Some(nums(grid.times())),
                Some(box_strings(&boxes)),
            )
        }
        _ => {
            refuse_tiny_epsilon(&a)?;
            (
                "smallball",
                mc_smallball(a.epsilon, &config, a.t)?,
                None,
                None,
            )
        }
    };
    if !est.reliable {
        eprintln!(
            "warning: only {} hits; the estimate is unreliable",
            est.hits
        );
    }
    print_json(&McOut {
        mode,
        t: Num(a.t),
        epsilon: Num(a.epsilon),
        paths: a.paths,
        steps: a.steps,
        seed,
        times,
        boxes,
        p_hat: Num(est.p_hat),
        ci_halfwidth: Num(est.ci_halfwidth),
        hits: est.hits,
        trials: est.trials,
        reliable: est.reliable,
    });
    Ok(())
}

/// Plain rejection sampling cannot resolve probabilities far below
/// `MIN_RELIABLE_HITS / paths`; refuse instead of printing noise.
fn refuse_tiny_epsilon(a: &McArgs) -> CliResult {
    let expected = smallball_expected_hits(a.epsilon, a.paths, a.t);
    if expected < MIN_RELIABLE_HITS as f64 {
        eprintln!(
            "epsilon = {} leaves about {expected:.3e} expected hits among {} paths (need {MIN_RELIABLE_HITS}); increase --paths or --epsilon",
            a.epsilon, a.paths
        );
        return Err(Error::Domain {
            name: "epsilon",
            value: a.epsilon,
            expected: "large enough for 30 expected small-ball hits",
        }
        .into());
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> CliResult {
    let suite: Suite = args.suite.parse().map_err(|_| {
        Failure::Usage(format!(
            "unknown suite {:?}; expected core, lattice, brownian or all",
            args.suite
        ))
    })?;
    let report = run_suite(suite, args.seed, args.threads)?;
    let json = report.to_json();
    match &args.out {
        Some(path) => fs::write(path, json + "\n")
            .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?,
        None => println!("{json}"),
    }
    for c in report.failures() {
        eprintln!(
            "FAIL {}: observed {} expected {} tolerance {}",
            c.name, c.observed.0, c.expected.0, c.tolerance.0
        );
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}
