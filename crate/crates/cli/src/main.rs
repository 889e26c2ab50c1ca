//! `vqsim` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or configuration error,
//! 3 data error (too little data to fit, degenerate boundary, malformed
//! results file).

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use vqsim::harness::{
    self, cell_summaries, load_results_csv, save_results_csv, Method, Provenance, RunResult,
    SweepConfig,
};
use vqsim::hamiltonian::random_instance;
use vqsim::scaling::{
    self, advantage_boundary, fit_power_law, log_grid, threshold_curve, AdvantageRegion, FitParams,
};
use vqsim::Error;

#[derive(Parser)]
#[command(name = "vqsim", version, about = "VQS vs Trotter minimum-depth benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random Ising-chain instance as JSON.
    Gen(GenArgs),
    /// Run the minimum-depth sweep and write the results CSV.
    Run(RunArgs),
    /// Fit D = a·n^b·t^c to a results CSV.
    Fit(FitArgs),
    /// Equal-depth boundary between two fits.
    Boundary(BoundaryArgs),
    /// Classical-cost threshold as a function of the prefactor p.
    Threshold(ThresholdArgs),
    /// Write all plot tables for a results CSV.
    PlotData(PlotArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long = "nq")]
    n_qubits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Sweep configuration JSON; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; output does not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Base seed; instance i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Qubit counts, e.g. `2,3,4` or `2-5`.
    #[arg(long = "nq")]
    n_qubits: Option<ListArg<usize>>,
    /// Final times, e.g. `1,2,4.5` or `1-8`.
    #[arg(long = "tf")]
    t_final: Option<ListArg<f64>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long)]
    methods: Option<ListArg<Method>>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    max_layers: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    /// Fill the wall_time_s column (makes the CSV run-dependent).
    #[arg(long)]
    record_wall_time: bool,
    /// Write each accepted VQS trajectory as JSON into this directory.
    #[arg(long)]
    trajectories: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Results CSV.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "vqs,trotter")]
    methods: ListArg<Method>,
}

#[derive(Args)]
struct BoundaryArgs {
    /// Fits JSON as written by `fit`.
    #[arg(long)]
    fits: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "2-40")]
    nq: ListArg<usize>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    fits: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Evaluate these prefactors instead of the logarithmic grid.
    #[arg(long)]
    p: Option<ListArg<f64>>,
    #[arg(long, default_value_t = 1e-3)]
    p_min: f64,
    #[arg(long, default_value_t = 1e3)]
    p_max: f64,
    #[arg(long, default_value_t = 50)]
    p_points: usize,
    #[arg(long, default_value_t = 1)]
    nq_min: usize,
    #[arg(long, default_value_t = 40)]
    nq_max: usize,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Fits JSON; fitted from the input when omitted.
    #[arg(long)]
    fits: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    nq_max: usize,
}

/// Comma-separated values with inclusive `lo-hi` integer ranges.
#[derive(Debug, Clone)]
struct ListArg<T>(Vec<T>);

impl<T> FromStr for ListArg<T>
where
    T: FromStr + RangeItem,
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part.split_once('-').filter(|(lo, _)| !lo.is_empty()) {
                Some((lo, hi)) => {
                    let lo = lo.trim().parse::<T>().map_err(|e| format!("{part}: {e}"))?;
                    let hi = hi.trim().parse::<T>().map_err(|e| format!("{part}: {e}"))?;
                    out.extend(T::range(lo, hi).ok_or_else(|| format!("bad range {part}"))?);
                }
                None => out.push(part.parse::<T>().map_err(|e| format!("{part}: {e}"))?),
            }
        }
        if out.is_empty() {
            return Err("empty list".into());
        }
        Ok(ListArg(out))
    }
}

trait RangeItem: Sized {
    fn range(lo: Self, hi: Self) -> Option<Vec<Self>>;
}

impl RangeItem for usize {
    fn range(lo: Self, hi: Self) -> Option<Vec<Self>> {
        (lo <= hi).then(|| (lo..=hi).collect())
    }
}

impl RangeItem for f64 {
    fn range(lo: Self, hi: Self) -> Option<Vec<Self>> {
        let integral = lo.fract() == 0.0 && hi.fract() == 0.0 && lo <= hi;
        integral.then(|| (lo as i64..=hi as i64).map(|v| v as f64).collect())
    }
}

impl RangeItem for Method {
    fn range(_: Self, _: Self) -> Option<Vec<Self>> {
        None
    }
}

enum CliError {
    Usage(String),
    Data(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => CliError::Io(e.to_string()),
            Error::InsufficientData { .. }
            | Error::DegenerateBoundary(_)
            | Error::Format { .. }
            | Error::Shape { .. } => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Fit(a) => fit(a),
        Command::Boundary(a) => boundary(a),
        Command::Threshold(a) => threshold(a),
        Command::PlotData(a) => plot_data(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Data(msg) | CliError::Io(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}

fn write_file(path: &Path, body: impl AsRef<[u8]>) -> CliResult {
    std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn gen(args: GenArgs) -> CliResult {
    if args.n_qubits < 2 {
        return Err(CliError::Usage(format!(
            "--nq must be at least 2, got {}",
            args.n_qubits
        )));
    }
    let instance = random_instance(args.n_qubits, args.seed)?;
    write_file(&args.out, instance.to_json())
}

fn load_config(path: &Path) -> CliResult<SweepConfig> {
    let text = read_file(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        CliError::Usage(format!(
            "{}: invalid config at `{}`: {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "results".into());
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn run(args: RunArgs) -> CliResult {
    let mut config = match &args.config {
        Some(path) => load_config(path)?,
        None => SweepConfig::default(),
    };
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(ListArg(n)) = args.n_qubits {
        config.n_qubits_range = n;
    }
    if let Some(ListArg(t)) = args.t_final {
        config.t_final_values = t;
    }
    if let Some(n) = args.instances {
        config.n_instances = n;
    }
    if let Some(ListArg(m)) = args.methods {
        config.methods = m;
    }
    if let Some(th) = args.threshold {
        config.fidelity_threshold = th;
    }
    if let Some(l) = args.max_layers {
        config.max_layers = l;
    }
    if let Some(s) = args.max_steps {
        config.max_trotter_steps = s;
    }
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    config.keep_trajectories = args.trajectories.is_some();
    config.validate()?;

    let rows = harness::run_sweep_with_jobs(&config, args.jobs)?;
    save_results_csv(&rows, &args.out, args.record_wall_time)?;

    let mut summary = Vec::new();
    harness::write_summary_csv(&cell_summaries(&rows), &mut summary)?;
    write_file(&sibling(&args.out, "summary.csv"), summary)?;
    let provenance = Provenance::new(&config, &rows);
    write_file(&sibling(&args.out, "provenance.json"), provenance.to_json())?;

    if let Some(dir) = &args.trajectories {
        write_trajectories(dir, &rows)?;
    }
    eprintln!(
        "{} rows: {} success, {} unsolved",
        provenance.n_rows, provenance.n_success, provenance.n_unsolved
    );
    Ok(())
}

fn write_trajectories(dir: &Path, rows: &[RunResult]) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for r in rows {
        if let Some(traj) = &r.trajectory {
            let name = format!(
                "vqs_n{}_t{}_seed{}.json",
                r.n_qubits,
                vqsim::fmt::csv_float(r.t_final),
                r.instance_seed
            );
            write_file(&dir.join(name), traj.to_json())?;
        }
    }
    Ok(())
}

fn fit(args: FitArgs) -> CliResult {
    let rows = load_results_csv(&args.input)?;
    let mut methods = args.methods.0;
    methods.sort();
    methods.dedup();
    let fits = methods
        .into_iter()
        .map(|m| {
            fit_power_law(&rows, m).map_err(|e| match e {
                Error::InsufficientData { found, reason } => CliError::Data(format!(
                    "cannot fit {m}: {found} usable rows ({reason}) out of {} in {}",
                    rows.len(),
                    args.input.display()
                )),
                other => other.into(),
            })
        })
        .collect::<CliResult<Vec<FitParams>>>()?;
    for f in &fits {
        eprintln!(
            "{}: a = {:.4} ± {:.4}, b = {:.4} ± {:.4}, c = {:.4} ± {:.4} ({} rows)",
            f.method, f.a, f.se_a, f.b, f.se_b, f.c, f.se_c, f.n_rows
        );
    }
    let mut body = serde_json::to_string_pretty(&fits).expect("fits serialize");
    body.push('\n');
    write_file(&args.out, body)
}

fn load_fits(path: &Path) -> CliResult<(FitParams, FitParams)> {
    let text = read_file(path)?;
    let fits: Vec<FitParams> = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let pick = |m: Method| {
        fits.iter()
            .find(|f| f.method == m)
            .cloned()
            .ok_or_else(|| CliError::Data(format!("{}: no {m} fit", path.display())))
    };
    Ok((pick(Method::Vqs)?, pick(Method::Trotter)?))
}

fn region_text(region: AdvantageRegion) -> &'static str {
    match region {
        AdvantageRegion::AboveBoundary => "t_f above the boundary",
        AdvantageRegion::BelowBoundary => "t_f below the boundary",
        AdvantageRegion::Everywhere => "everywhere",
        AdvantageRegion::Nowhere => "nowhere",
    }
}

fn boundary(args: BoundaryArgs) -> CliResult {
    let (v, t) = load_fits(&args.fits)?;
    let grid: Vec<f64> = args.nq.0.iter().map(|&n| n as f64).collect();
    let b = advantage_boundary(&v, &t, &grid)?;
    let mut body = Vec::new();
    scaling::write_boundary_csv(&b, &mut body)?;
    write_file(&args.out, body)?;
    if let (Some(k), Some(g)) = (b.kappa, b.gamma) {
        eprintln!("t_f* = {k:.4} * n_q^{g:.4}");
    }
    eprintln!("VQS advantage: {}", region_text(b.vqs_region));
    Ok(())
}

fn threshold(args: ThresholdArgs) -> CliResult {
    if args.nq_min == 0 || args.nq_min > args.nq_max {
        return Err(CliError::Usage("need 1 <= --nq-min <= --nq-max".into()));
    }
    let p_values = match args.p {
        Some(ListArg(p)) => p,
        None => {
            if !(args.p_min > 0.0 && args.p_max >= args.p_min) {
                return Err(CliError::Usage("need 0 < --p-min <= --p-max".into()));
            }
            log_grid(args.p_min, args.p_max, args.p_points)
        }
    };
    let (v, t) = load_fits(&args.fits)?;
    let curve = threshold_curve(&v, &t, &p_values, args.nq_min..=args.nq_max)?;
    let mut body = Vec::new();
    scaling::write_threshold_csv(&curve, &mut body)?;
    write_file(&args.out, body)
}

fn plot_data(args: PlotArgs) -> CliResult {
    let rows = load_results_csv(&args.input)?;
    let fits = match &args.fits {
        Some(path) => Some(load_fits(path)?),
        None => match (
            fit_power_law(&rows, Method::Vqs),
            fit_power_law(&rows, Method::Trotter),
        ) {
            (Ok(v), Ok(t)) => Some((v, t)),
            _ => {
                eprintln!("not enough data to fit; boundary and threshold tables left empty");
                None
            }
        },
    };
    let grid: Vec<f64> = (2..=args.nq_max.max(2)).map(|n| n as f64).collect();
    let boundary = match &fits {
        Some((v, t)) => match advantage_boundary(v, t, &grid) {
            Ok(b) => Some(b),
            Err(Error::DegenerateBoundary(msg)) => {
                eprintln!("boundary left empty: {msg}");
                None
            }
            Err(e) => return Err(e.into()),
        },
        None => None,
    };
    let thresholds = match &fits {
        Some((v, t)) => threshold_curve(v, t, &log_grid(1e-3, 1e3, 50), 1..=args.nq_max)?,
        None => Vec::new(),
    };
    let files = scaling::emit_plot_data(&args.out, &rows, boundary.as_ref(), &thresholds)?;
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}
