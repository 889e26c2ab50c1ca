//! Adaptive minimum-depth benchmark.
//!
//! For every `(method, n_qubits, t_final, instance)` cell the structural
//! count (ansatz layers for VQS, Trotter steps for Trotter) is increased one
//! unit at a time from 1, restarting the simulation from scratch each time,
//! until the final state reaches the fidelity threshold against the exact
//! evolution. Cells run in parallel; results come back in canonical order.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{circuit_depth, HvaAnsatz, MOMENTS_PER_LAYER};
use crate::error::{Error, Result};
use crate::exact::{fidelity, ExactPropagator};
use crate::fmt::csv_float;
use crate::hamiltonian::{random_instance, ProblemInstance, INITIAL_LAYER_RANGE};
use crate::statevector::StateVector;
use crate::trotter::{trotter_depth, trotter_evolve, TrotterDepthConvention, TrotterPlan};
use crate::vqs::{self, VqsConfig, VqsTrajectory};

pub const RESULTS_HEADER: [&str; 11] = [
    "method",
    "n_qubits",
    "t_final",
    "instance_seed",
    "status",
    "min_depth",
    "structural_count",
    "final_fidelity",
    "mclachlan_final",
    "rhs_evaluations",
    "wall_time_s",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vqs,
    Trotter,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Vqs, Method::Trotter];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Vqs => "vqs",
            Method::Trotter => "trotter",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vqs" => Ok(Method::Vqs),
            "trotter" => Ok(Method::Trotter),
            other => Err(Error::Domain(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Success,
    Unsolved,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Success => "success",
            RunStatus::Unsolved => "unsolved",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub method: Method,
    pub n_qubits: usize,
    pub t_final: f64,
    pub instance_seed: u64,
    pub status: RunStatus,
    pub min_depth: usize,
    pub structural_count: usize,
    pub final_fidelity: f64,
    pub mclachlan_final: Option<f64>,
    pub rhs_evaluations: Option<usize>,
    pub wall_time_seconds: f64,
    /// Trajectory of the accepted VQS run, kept only on request.
    pub trajectory: Option<VqsTrajectory>,
}

impl RunResult {
    pub fn is_success(&self) -> bool {
        self.status == RunStatus::Success
    }
}

fn default_n_qubits() -> Vec<usize> {
    (2..=10).collect()
}

fn default_t_final() -> Vec<f64> {
    (1..=14).map(f64::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_qubits_range: Vec<usize>,
    pub t_final_values: Vec<f64>,
    pub n_instances: usize,
    pub fidelity_threshold: f64,
    pub max_layers: usize,
    pub max_trotter_steps: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub trotter_depth_convention: TrotterDepthConvention,
    pub vqs_config: VqsConfig,
    /// Keep the accepted VQS trajectory of every cell in memory.
    pub keep_trajectories: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_qubits_range: default_n_qubits(),
            t_final_values: default_t_final(),
            n_instances: 50,
            fidelity_threshold: 0.95,
            max_layers: 60,
            max_trotter_steps: 2000,
            base_seed: 0,
            methods: Method::ALL.to_vec(),
            trotter_depth_convention: TrotterDepthConvention::Merged,
            vqs_config: VqsConfig::default(),
            keep_trajectories: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fidelity_threshold > 0.0 && self.fidelity_threshold < 1.0) {
            return Err(Error::Domain(format!(
                "fidelity_threshold must lie in (0, 1), got {}",
                self.fidelity_threshold
            )));
        }
        if self.max_layers == 0 || self.max_trotter_steps == 0 {
            return Err(Error::Domain("max_layers and max_trotter_steps must be >= 1".into()));
        }
        if let Some(&n) = self.n_qubits_range.iter().find(|&&n| n < 2) {
            return Err(Error::Domain(format!("n_qubits must be >= 2, got {n}")));
        }
        if let Some(&n) = self
            .n_qubits_range
            .iter()
            .find(|&&n| n > crate::hamiltonian::DENSE_QUBIT_LIMIT)
        {
            return Err(Error::Resource {
                n_qubits: n,
                limit: crate::hamiltonian::DENSE_QUBIT_LIMIT,
            });
        }
        if let Some(&t) = self.t_final_values.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::Domain(format!("t_final values must be positive, got {t}")));
        }
        self.vqs_config.validate()
    }

    /// Seed of the `index`-th instance at every system size.
    pub fn instance_seed(&self, index: usize) -> u64 {
        self.base_seed.wrapping_add(index as u64)
    }

    pub fn instance_seeds(&self) -> Vec<u64> {
        (0..self.n_instances).map(|i| self.instance_seed(i)).collect()
    }
}

/// A problem instance with its reference state and exact propagator.
#[derive(Debug, Clone)]
pub struct PreparedInstance {
    pub instance: ProblemInstance,
    pub initial_state: StateVector,
    pub propagator: ExactPropagator,
}

impl PreparedInstance {
    pub fn new(instance: ProblemInstance) -> Result<Self> {
        let initial_state = HvaAnsatz::new(&instance, 1)?.initial_state().clone();
        let propagator = ExactPropagator::new(&instance.hamiltonian)?;
        Ok(Self {
            instance,
            initial_state,
            propagator,
        })
    }

    pub fn generate(n_qubits: usize, seed: u64) -> Result<Self> {
        Self::new(random_instance(n_qubits, seed)?)
    }

    pub fn exact_state(&self, t_final: f64) -> Result<StateVector> {
        self.propagator.evolve(&self.initial_state, t_final)
    }
}

/// Outcome of one VQS run at a fixed layer count.
#[derive(Debug, Clone)]
pub struct VqsAttempt {
    pub fidelity: f64,
    pub trajectory: Option<VqsTrajectory>,
    pub failure: Option<String>,
}

/// Runs VQS with `n_layers` layers to `t_final` and scores it against `target`.
///
/// Integration breakdowns (step underflow, inconsistent geometry) count as a
/// failed attempt with fidelity of the last reached state.
pub fn vqs_attempt(
    prepared: &PreparedInstance,
    target: &StateVector,
    t_final: f64,
    n_layers: usize,
    config: &VqsConfig,
) -> Result<VqsAttempt> {
    let ansatz = HvaAnsatz::new(&prepared.instance, n_layers)?;
    match vqs::integrate(&ansatz, &prepared.instance.hamiltonian, config, t_final) {
        Ok(traj) => {
            let state = vqs::final_state(&ansatz, &traj)?;
            Ok(VqsAttempt {
                fidelity: fidelity(target, &state)?,
                trajectory: Some(traj),
                failure: None,
            })
        }
        Err(Error::Stiffness {
            time,
            step,
            trajectory,
        }) => Ok(VqsAttempt {
            fidelity: 0.0,
            trajectory: Some(*trajectory),
            failure: Some(format!("step underflow ({step:e}) at t = {time}")),
        }),
        Err(e @ Error::NumericalConsistency { .. }) => Ok(VqsAttempt {
            fidelity: 0.0,
            trajectory: None,
            failure: Some(e.to_string()),
        }),
        Err(e) => Err(e),
    }
}

/// Final-state fidelity of an `n_steps` Trotter run.
pub fn trotter_fidelity(
    prepared: &PreparedInstance,
    target: &StateVector,
    t_final: f64,
    n_steps: usize,
) -> Result<f64> {
    let plan = TrotterPlan::new(n_steps, t_final)?;
    let state = trotter_evolve(&prepared.instance.hamiltonian, &plan, &prepared.initial_state)?;
    fidelity(target, &state)
}

/// Smallest layer count whose VQS solution reaches `threshold` at `t_final`.
pub fn min_depth_vqs(
    prepared: &PreparedInstance,
    t_final: f64,
    threshold: f64,
    config: &VqsConfig,
    max_layers: usize,
    keep_trajectory: bool,
) -> Result<RunResult> {
    check_threshold(threshold)?;
    let start = Instant::now();
    let target = prepared.exact_state(t_final)?;
    let mut rhs_total = 0;
    let mut last = None;
    for layers in 1..=max_layers.max(1) {
        let attempt = vqs_attempt(prepared, &target, t_final, layers, config)?;
        rhs_total += attempt
            .trajectory
            .as_ref()
            .map_or(0, |t| t.rhs_evaluations);
        let success = attempt.failure.is_none() && attempt.fidelity >= threshold;
        last = Some((layers, attempt));
        if success {
            break;
        }
    }
    let (layers, attempt) = last.expect("at least one attempt");
    let success = attempt.failure.is_none() && attempt.fidelity >= threshold;
    let mclachlan_final = attempt
        .trajectory
        .as_ref()
        .and_then(|t| t.mclachlan_distance.last().copied());
    Ok(RunResult {
        method: Method::Vqs,
        n_qubits: prepared.instance.n_qubits(),
        t_final,
        instance_seed: prepared.instance.seed,
        status: if success {
            RunStatus::Success
        } else {
            RunStatus::Unsolved
        },
        min_depth: circuit_depth(layers),
        structural_count: layers,
        final_fidelity: attempt.fidelity,
        mclachlan_final,
        rhs_evaluations: Some(rhs_total),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        trajectory: if keep_trajectory {
            attempt.trajectory
        } else {
            None
        },
    })
}

/// Smallest Trotter step count reaching `threshold` at `t_final`.
pub fn min_depth_trotter(
    prepared: &PreparedInstance,
    t_final: f64,
    threshold: f64,
    max_steps: usize,
    convention: TrotterDepthConvention,
) -> Result<RunResult> {
    check_threshold(threshold)?;
    let start = Instant::now();
    let target = prepared.exact_state(t_final)?;
    let mut steps = 1;
    let mut fid = trotter_fidelity(prepared, &target, t_final, steps)?;
    while fid < threshold && steps < max_steps.max(1) {
        steps += 1;
        fid = trotter_fidelity(prepared, &target, t_final, steps)?;
    }
    Ok(RunResult {
        method: Method::Trotter,
        n_qubits: prepared.instance.n_qubits(),
        t_final,
        instance_seed: prepared.instance.seed,
        status: if fid >= threshold {
            RunStatus::Success
        } else {
            RunStatus::Unsolved
        },
        min_depth: trotter_depth(steps, convention),
        structural_count: steps,
        final_fidelity: fid,
        mclachlan_final: None,
        rhs_evaluations: None,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        trajectory: None,
    })
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "fidelity threshold must lie in (0, 1), got {threshold}"
        )))
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    method: Method,
    size_index: usize,
    t_final: f64,
    instance_index: usize,
}

/// Runs every cell of the sweep on the current rayon pool.
///
/// Rows come back ordered by (method, n_qubits, t_final, seed) in the order the
/// config lists them; content does not depend on scheduling. A cell whose
/// simulation errors is reported as an unsolved row.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<RunResult>> {
    config.validate()?;
    let seeds = config.instance_seeds();
    let prepared: Vec<Vec<PreparedInstance>> = config
        .n_qubits_range
        .par_iter()
        .map(|&n| {
            seeds
                .par_iter()
                .map(|&seed| PreparedInstance::generate(n, seed))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();
    let mut cells = Vec::new();
    for &method in &methods {
        for size_index in 0..config.n_qubits_range.len() {
            for &t_final in &config.t_final_values {
                for instance_index in 0..seeds.len() {
                    cells.push(Cell {
                        method,
                        size_index,
                        t_final,
                        instance_index,
                    });
                }
            }
        }
    }

    Ok(cells
        .par_iter()
        .map(|cell| {
            let inst = &prepared[cell.size_index][cell.instance_index];
            let outcome = match cell.method {
                Method::Vqs => min_depth_vqs(
                    inst,
                    cell.t_final,
                    config.fidelity_threshold,
                    &config.vqs_config,
                    config.max_layers,
                    config.keep_trajectories,
                ),
                Method::Trotter => min_depth_trotter(
                    inst,
                    cell.t_final,
                    config.fidelity_threshold,
                    config.max_trotter_steps,
                    config.trotter_depth_convention,
                ),
            };
            outcome.unwrap_or_else(|_| failed_row(cell, inst, config))
        })
        .collect())
}

/// [`run_sweep`] on a dedicated pool of `jobs` worker threads.
pub fn run_sweep_with_jobs(config: &SweepConfig, jobs: usize) -> Result<Vec<RunResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(config))
}

fn failed_row(cell: &Cell, inst: &PreparedInstance, config: &SweepConfig) -> RunResult {
    let (structural_count, min_depth) = match cell.method {
        Method::Vqs => (config.max_layers, circuit_depth(config.max_layers)),
        Method::Trotter => (
            config.max_trotter_steps,
            trotter_depth(config.max_trotter_steps, config.trotter_depth_convention),
        ),
    };
    RunResult {
        method: cell.method,
        n_qubits: inst.instance.n_qubits(),
        t_final: cell.t_final,
        instance_seed: inst.instance.seed,
        status: RunStatus::Unsolved,
        min_depth,
        structural_count,
        final_fidelity: 0.0,
        mclachlan_final: None,
        rhs_evaluations: None,
        wall_time_seconds: 0.0,
        trajectory: None,
    }
}

/// Writes the results CSV. Wall times are left blank unless
/// `include_wall_time` is set, keeping the file a pure function of the config.
pub fn write_results_csv<W: Write>(
    rows: &[RunResult],
    out: W,
    include_wall_time: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::format("<results csv>", e);
    w.write_record(RESULTS_HEADER).map_err(wrap)?;
    for r in rows {
        let record = [
            r.method.as_str().to_string(),
            r.n_qubits.to_string(),
            csv_float(r.t_final),
            r.instance_seed.to_string(),
            r.status.as_str().to_string(),
            r.min_depth.to_string(),
            r.structural_count.to_string(),
            csv_float(r.final_fidelity),
            r.mclachlan_final.map(csv_float).unwrap_or_default(),
            r.rhs_evaluations.map(|v| v.to_string()).unwrap_or_default(),
            if include_wall_time {
                csv_float(r.wall_time_seconds)
            } else {
                String::new()
            },
        ];
        w.write_record(&record).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io("<results csv>", e))?;
    Ok(())
}

pub fn save_results_csv(rows: &[RunResult], path: &Path, include_wall_time: bool) -> Result<()> {
    let mut buf = Vec::new();
    write_results_csv(rows, &mut buf, include_wall_time)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    method: String,
    n_qubits: usize,
    t_final: f64,
    instance_seed: u64,
    status: String,
    min_depth: f64,
    structural_count: usize,
    final_fidelity: f64,
    mclachlan_final: Option<f64>,
    rhs_evaluations: Option<usize>,
    wall_time_s: Option<f64>,
}

/// Parses a results CSV. `min_depth` may be fractional (synthetic data); it
/// is rounded to the nearest moment.
pub fn read_results_csv<R: Read>(input: R, origin: &Path) -> Result<Vec<RunResult>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (line, rec) in reader.deserialize::<CsvRow>().enumerate() {
        let rec = rec.map_err(|e| Error::format(origin, format!("row {}: {e}", line + 1)))?;
        let status = match rec.status.as_str() {
            "success" => RunStatus::Success,
            "unsolved" => RunStatus::Unsolved,
            other => {
                return Err(Error::format(
                    origin,
                    format!("row {}: unknown status {other:?}", line + 1),
                ))
            }
        };
        rows.push(RunResult {
            method: rec
                .method
                .parse()
                .map_err(|e| Error::format(origin, format!("row {}: {e}", line + 1)))?,
            n_qubits: rec.n_qubits,
            t_final: rec.t_final,
            instance_seed: rec.instance_seed,
            status,
            min_depth: rec.min_depth.round().max(0.0) as usize,
            structural_count: rec.structural_count,
            final_fidelity: rec.final_fidelity,
            mclachlan_final: rec.mclachlan_final,
            rhs_evaluations: rec.rhs_evaluations,
            wall_time_seconds: rec.wall_time_s.unwrap_or(0.0),
            trajectory: None,
        });
    }
    Ok(rows)
}

pub fn load_results_csv(path: &Path) -> Result<Vec<RunResult>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_results_csv(std::io::BufReader::new(file), path)
}

/// Per-cell aggregate over instances (successful rows only).
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub method: Method,
    pub n_qubits: usize,
    pub t_final: f64,
    pub n_rows: usize,
    pub n_success: usize,
    pub mean_depth: Option<f64>,
    pub median_depth: Option<f64>,
}

pub fn cell_summaries(rows: &[RunResult]) -> Vec<CellSummary> {
    let mut keys: Vec<(Method, usize, f64)> = rows
        .iter()
        .map(|r| (r.method, r.n_qubits, r.t_final))
        .collect();
    keys.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
    });
    keys.dedup();
    keys.into_iter()
        .map(|(method, n_qubits, t_final)| {
            let cell: Vec<&RunResult> = rows
                .iter()
                .filter(|r| r.method == method && r.n_qubits == n_qubits && r.t_final == t_final)
                .collect();
            let mut depths: Vec<f64> = cell
                .iter()
                .filter(|r| r.is_success())
                .map(|r| r.min_depth as f64)
                .collect();
            depths.sort_by(f64::total_cmp);
            CellSummary {
                method,
                n_qubits,
                t_final,
                n_rows: cell.len(),
                n_success: depths.len(),
                mean_depth: mean(&depths),
                median_depth: median(&depths),
            }
        })
        .collect()
}

fn mean(sorted: &[f64]) -> Option<f64> {
    (!sorted.is_empty()).then(|| sorted.iter().sum::<f64>() / sorted.len() as f64)
}

fn median(sorted: &[f64]) -> Option<f64> {
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2]),
        _ => Some(0.5 * (sorted[n / 2 - 1] + sorted[n / 2])),
    }
}

pub const SUMMARY_HEADER: [&str; 7] = [
    "method",
    "n_qubits",
    "t_final",
    "n_rows",
    "n_success",
    "mean_depth",
    "median_depth",
];

pub fn write_summary_csv<W: Write>(summaries: &[CellSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::format("<summary csv>", e);
    w.write_record(SUMMARY_HEADER).map_err(wrap)?;
    for s in summaries {
        w.write_record([
            s.method.as_str().to_string(),
            s.n_qubits.to_string(),
            csv_float(s.t_final),
            s.n_rows.to_string(),
            s.n_success.to_string(),
            s.mean_depth.map(csv_float).unwrap_or_default(),
            s.median_depth.map(csv_float).unwrap_or_default(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io("<summary csv>", e))?;
    Ok(())
}

/// Conventions a results file depends on, recorded next to it.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub generator: String,
    pub config: SweepConfig,
    pub conventions: Conventions,
    pub n_rows: usize,
    pub n_success: usize,
    pub n_unsolved: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub rotation: &'static str,
    pub amplitude_ordering: &'static str,
    pub boundary: &'static str,
    pub coefficient_range: [f64; 2],
    pub initial_layer_param_range: [f64; 2],
    pub rng: &'static str,
    pub instance_seed_rule: &'static str,
    pub vqs_depth: String,
    pub trotter_depth: String,
    pub initial_layer_in_depth: bool,
    pub fidelity_evaluation: &'static str,
    pub layer_increment: &'static str,
    pub trotter_step_increment: &'static str,
}

impl Provenance {
    pub fn new(config: &SweepConfig, rows: &[RunResult]) -> Self {
        let n_success = rows.iter().filter(|r| r.is_success()).count();
        let trotter_depth = match config.trotter_depth_convention {
            TrotterDepthConvention::Merged => {
                "3*steps + 2 (half coupling steps merged between repetitions)"
            }
            TrotterDepthConvention::Unmerged => "5*steps (half coupling steps kept separate)",
        };
        Self {
            generator: format!("vqsim {}", env!("CARGO_PKG_VERSION")),
            config: config.clone(),
            conventions: Conventions {
                rotation: "exp(-i*theta*P/2)",
                amplitude_ordering: "little-endian (qubit 0 = least significant bit)",
                boundary: "open chain, n_qubits - 1 bonds",
                coefficient_range: [-1.0, 1.0],
                initial_layer_param_range: [-INITIAL_LAYER_RANGE, INITIAL_LAYER_RANGE],
                rng: "ChaCha8, key = seed (LE u64) || n_qubits (LE u64) || 0; stream 1 coefficients, stream 2 initial layer",
                instance_seed_rule: "base_seed + instance_index (wrapping)",
                vqs_depth: format!("{MOMENTS_PER_LAYER}*layers (1 X moment + 2 brickwall ZZ moments)"),
                trotter_depth: trotter_depth.to_string(),
                initial_layer_in_depth: false,
                fidelity_evaluation: "final time only, against exact diagonalization",
                layer_increment: "restart from scratch with one more layer",
                trotter_step_increment: "n -> n + 1",
            },
            n_rows: rows.len(),
            n_success,
            n_unsolved: rows.len() - n_success,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("provenance serializes");
        s.push('\n');
        s
    }
}
