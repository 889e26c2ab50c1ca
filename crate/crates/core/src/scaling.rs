//! Power-law fits of minimum depth, the VQS/Trotter equal-depth boundary and
//! the classical-cost threshold, plus plot-ready CSV export.
//!
//! Depths are modelled as `D = a · n^b · t^c`, fitted by ordinary least
//! squares on `log D = log a + b log n + c log t`.

use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector, Matrix3};
use serde::{Deserialize, Serialize};

use crate::ansatz::MOMENTS_PER_LAYER;
use crate::error::{Error, Result};
use crate::fmt::csv_float;
use crate::harness::{cell_summaries, CellSummary, Method, RunResult};

/// Differences in time exponents below this are treated as equal.
pub const EXPONENT_TOLERANCE: f64 = 1e-12;

/// Smallest number of distinct `(n_qubits, t_final)` pairs a fit accepts.
pub const MIN_DISTINCT_POINTS: usize = 4;

/// Relative singular-value floor of the log-space design matrix.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub method: Method,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    #[serde(default)]
    pub se_a: f64,
    #[serde(default)]
    pub se_b: f64,
    #[serde(default)]
    pub se_c: f64,
    #[serde(default)]
    pub n_rows: usize,
    #[serde(default)]
    pub rms_log_residual: f64,
    #[serde(default)]
    pub excluded_unsolved: usize,
    #[serde(default)]
    pub excluded_out_of_domain: usize,
}

impl FitParams {
    /// A fit with known coefficients and no error information.
    pub fn from_coefficients(method: Method, a: f64, b: f64, c: f64) -> Self {
        Self {
            method,
            a,
            b,
            c,
            se_a: 0.0,
            se_b: 0.0,
            se_c: 0.0,
            n_rows: 0,
            rms_log_residual: 0.0,
            excluded_unsolved: 0,
            excluded_out_of_domain: 0,
        }
    }

    pub fn depth(&self, n_qubits: f64, t_final: f64) -> f64 {
        self.a * n_qubits.powf(self.b) * t_final.powf(self.c)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.c, self.se_a, self.se_b, self.se_c]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.a > 0.0) {
            return Err(Error::Domain(format!(
                "fit for {} needs a finite positive prefactor and finite exponents",
                self.method
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("fit serializes");
        s.push('\n');
        s
    }
}

/// One observation for [`fit_points`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPoint {
    pub n_qubits: f64,
    pub t_final: f64,
    pub depth: f64,
}

/// Fits the successful rows of `method`. Unsolved rows and rows with
/// `t_final < 1` are dropped and counted.
pub fn fit_power_law(rows: &[RunResult], method: Method) -> Result<FitParams> {
    let mine: Vec<&RunResult> = rows.iter().filter(|r| r.method == method).collect();
    let excluded_unsolved = mine.iter().filter(|r| !r.is_success()).count();
    let solved: Vec<&RunResult> = mine.into_iter().filter(|r| r.is_success()).collect();
    let points: Vec<FitPoint> = solved
        .iter()
        .filter(|r| r.t_final >= 1.0)
        .map(|r| FitPoint {
            n_qubits: r.n_qubits as f64,
            t_final: r.t_final,
            depth: r.min_depth as f64,
        })
        .collect();
    let short = solved.len() - points.len();
    let mut fit = fit_points(&points, method)?;
    fit.excluded_unsolved = excluded_unsolved;
    fit.excluded_out_of_domain += short;
    Ok(fit)
}

/// Log-space least squares on raw points. Points with a non-positive
/// coordinate or depth are excluded and counted.
pub fn fit_points(points: &[FitPoint], method: Method) -> Result<FitParams> {
    let valid: Vec<FitPoint> = points
        .iter()
        .copied()
        .filter(|p| p.n_qubits > 0.0 && p.t_final > 0.0 && p.depth > 0.0)
        .filter(|p| p.n_qubits.is_finite() && p.t_final.is_finite() && p.depth.is_finite())
        .collect();
    let excluded = points.len() - valid.len();

    let mut pairs: Vec<(f64, f64)> = valid.iter().map(|p| (p.n_qubits, p.t_final)).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    pairs.dedup();
    if pairs.len() < MIN_DISTINCT_POINTS {
        return Err(Error::InsufficientData {
            found: valid.len(),
            reason: format!(
                "{} distinct (n_qubits, t_final) pairs, need at least {MIN_DISTINCT_POINTS}",
                pairs.len()
            ),
        });
    }

    let n = valid.len();
    let x = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => valid[i].n_qubits.ln(),
        _ => valid[i].t_final.ln(),
    });
    let y = DVector::from_iterator(n, valid.iter().map(|p| p.depth.ln()));

    let sv = x.singular_values();
    if sv.min() <= RANK_TOLERANCE * sv.max() {
        return Err(Error::InsufficientData {
            found: n,
            reason: "n_qubits and t_final do not vary independently".into(),
        });
    }
    let xtx: Matrix3<f64> = (x.transpose() * &x).fixed_view::<3, 3>(0, 0).into_owned();
    let xtx_inv = xtx
        .try_inverse()
        .ok_or_else(|| Error::InsufficientData {
            found: n,
            reason: "singular normal equations".into(),
        })?;
    let xty = x.transpose() * &y;
    let beta = xtx_inv * nalgebra::Vector3::new(xty[0], xty[1], xty[2]);
    let residual = &y - &x * DVector::from_column_slice(beta.as_slice());
    let rss = residual.norm_squared();
    let dof = n.saturating_sub(3).max(1) as f64;
    let cov = xtx_inv * (rss / dof);

    let a = beta[0].exp();
    Ok(FitParams {
        method,
        a,
        b: beta[1],
        c: beta[2],
        se_a: a * cov[(0, 0)].max(0.0).sqrt(),
        se_b: cov[(1, 1)].max(0.0).sqrt(),
        se_c: cov[(2, 2)].max(0.0).sqrt(),
        n_rows: n,
        rms_log_residual: (rss / n as f64).sqrt(),
        excluded_unsolved: 0,
        excluded_out_of_domain: excluded,
    })
}

/// Where VQS needs the shallower circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AdvantageRegion {
    /// `t_final > t*(n)`.
    AboveBoundary,
    /// `t_final < t*(n)`.
    BelowBoundary,
    Everywhere,
    Nowhere,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    /// `(n_qubits, t_f*)` along the requested grid.
    pub points: Vec<(f64, f64)>,
    pub vqs_region: AdvantageRegion,
    /// `t* = kappa · n^gamma`; `None` when the boundary is empty.
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
}

impl Boundary {
    /// Whether VQS has the smaller fitted depth at `(n_qubits, t_final)`
    /// according to the classified region.
    pub fn is_vqs_advantage(&self, n_qubits: f64, t_final: f64) -> bool {
        let star = match (self.kappa, self.gamma) {
            (Some(k), Some(g)) => k * n_qubits.powf(g),
            _ => f64::NAN,
        };
        match self.vqs_region {
            AdvantageRegion::Everywhere => true,
            AdvantageRegion::Nowhere => false,
            AdvantageRegion::AboveBoundary => t_final > star,
            AdvantageRegion::BelowBoundary => t_final < star,
        }
    }
}

/// Equal-depth curve `t*(n) = [(a₂/a₁) n^{b₂−b₁}]^{1/(c₁−c₂)}` with 1 = VQS,
/// 2 = Trotter.
pub fn advantage_boundary(
    fit_vqs: &FitParams,
    fit_trotter: &FitParams,
    n_q_grid: &[f64],
) -> Result<Boundary> {
    fit_vqs.validate()?;
    fit_trotter.validate()?;
    if let Some(&n) = n_q_grid.iter().find(|&&n| !(n > 0.0) || !n.is_finite()) {
        return Err(Error::Domain(format!("n_qubits grid values must be positive, got {n}")));
    }
    let dc = fit_vqs.c - fit_trotter.c;
    if dc.abs() <= EXPONENT_TOLERANCE {
        let db = fit_vqs.b - fit_trotter.b;
        if db.abs() > EXPONENT_TOLERANCE {
            return Err(Error::DegenerateBoundary(format!(
                "equal time exponents ({}) with different qubit exponents give a boundary in n_qubits only",
                fit_vqs.c
            )));
        }
        if fit_vqs.a == fit_trotter.a {
            return Err(Error::DegenerateBoundary("the two fits are identical".into()));
        }
        let region = if fit_vqs.a < fit_trotter.a {
            AdvantageRegion::Everywhere
        } else {
            AdvantageRegion::Nowhere
        };
        return Ok(Boundary {
            points: Vec::new(),
            vqs_region: region,
            kappa: None,
            gamma: None,
        });
    }
    let kappa = (fit_trotter.a / fit_vqs.a).powf(1.0 / dc);
    let gamma = (fit_trotter.b - fit_vqs.b) / dc;
    let points = n_q_grid
        .iter()
        .map(|&n| (n, kappa * n.powf(gamma)))
        .collect();

    // Probe above the curve at n = 1, where t* = kappa.
    let probe_t = 2.0 * kappa;
    let region = if fit_vqs.depth(1.0, probe_t) < fit_trotter.depth(1.0, probe_t) {
        AdvantageRegion::AboveBoundary
    } else {
        AdvantageRegion::BelowBoundary
    };
    Ok(Boundary {
        points,
        vqs_region: region,
        kappa: Some(kappa),
        gamma: Some(gamma),
    })
}

/// Cost comparison between the two methods along the diagonal `t_final = n_qubits`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub prefactor_p: f64,
}

impl CostModel {
    pub const DEPTH_PER_LAYER: usize = MOMENTS_PER_LAYER;
    pub const TROTTER_DEPTH_PER_STEP: usize = 3;
    pub const TROTTER_DEPTH_OFFSET: usize = 2;

    pub fn params_per_layer(n_qubits: usize) -> usize {
        2 * n_qubits - 1
    }

    /// Number of VQS parameters implied by the fitted depth.
    pub fn vqs_parameters(fit_vqs: &FitParams, n_qubits: usize) -> f64 {
        let n = n_qubits as f64;
        let layers = (fit_vqs.depth(n, n) / Self::DEPTH_PER_LAYER as f64).ceil();
        Self::params_per_layer(n_qubits) as f64 * layers
    }

    /// Number of Trotter steps implied by the fitted depth.
    pub fn trotter_steps(fit_trotter: &FitParams, n_qubits: usize) -> f64 {
        let n = n_qubits as f64;
        let steps = ((fit_trotter.depth(n, n) - Self::TROTTER_DEPTH_OFFSET as f64)
            / Self::TROTTER_DEPTH_PER_STEP as f64)
            .round();
        steps.max(1.0)
    }

    pub fn vqs_is_cheaper(&self, fit_vqs: &FitParams, fit_trotter: &FitParams, n_qubits: usize) -> bool {
        let m = Self::vqs_parameters(fit_vqs, n_qubits);
        let k = Self::trotter_steps(fit_trotter, n_qubits);
        self.prefactor_p * m.powi(3) < k * (n_qubits as f64).exp2()
    }
}

/// Smallest `n` in `range` with `p·m³ < k·2^n`, or `None`.
pub fn classical_cost_threshold(
    fit_vqs: &FitParams,
    fit_trotter: &FitParams,
    p: f64,
    range: RangeInclusive<usize>,
) -> Result<Option<usize>> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("prefactor p must be finite and >= 0, got {p}")));
    }
    if *range.start() == 0 {
        return Err(Error::Domain("n_qubits search range must start at 1 or above".into()));
    }
    let model = CostModel { prefactor_p: p };
    Ok(range.into_iter().find(|&n| model.vqs_is_cheaper(fit_vqs, fit_trotter, n)))
}

/// `count` points spaced evenly in `log10` between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (l, h) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| 10f64.powf(l + (h - l) * i as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

pub fn threshold_curve(
    fit_vqs: &FitParams,
    fit_trotter: &FitParams,
    p_values: &[f64],
    range: RangeInclusive<usize>,
) -> Result<Vec<(f64, Option<usize>)>> {
    p_values
        .iter()
        .map(|&p| Ok((p, classical_cost_threshold(fit_vqs, fit_trotter, p, range.clone())?)))
        .collect()
}

pub fn write_boundary_csv<W: Write>(boundary: &Boundary, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_qubits", "t_f_star"]).map_err(csv_err)?;
    for &(n, t) in &boundary.points {
        w.write_record([csv_float(n), csv_float(t)]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<boundary csv>", e))
}

pub fn write_threshold_csv<W: Write>(curve: &[(f64, Option<usize>)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "n_q_threshold"]).map_err(csv_err)?;
    for &(p, n) in curve {
        w.write_record([csv_float(p), n.map(|v| v.to_string()).unwrap_or_default()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<threshold csv>", e))
}

fn csv_err(e: csv::Error) -> Error {
    Error::format("<csv>", e)
}

pub const FIG2_FILE: &str = "depth_vs_nqubits.csv";
pub const FIG3_FILE: &str = "depth_vs_tfinal.csv";
pub const FIG4_FILE: &str = "advantage_boundary.csv";
pub const FIG5_FILE: &str = "cost_threshold.csv";

fn write_cells<W: Write>(cells: &[&CellSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "n_qubits",
        "t_final",
        "n_rows",
        "n_success",
        "mean_depth",
        "median_depth",
    ])
    .map_err(csv_err)?;
    for s in cells {
        w.write_record([
            s.method.to_string(),
            s.n_qubits.to_string(),
            csv_float(s.t_final),
            s.n_rows.to_string(),
            s.n_success.to_string(),
            s.mean_depth.map(csv_float).unwrap_or_default(),
            s.median_depth.map(csv_float).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<cell csv>", e))
}

/// Writes the four plot tables into `dir` and returns their paths:
/// aggregated depth on the `t_final = n_qubits` diagonal, depth for every
/// simulated cell, the boundary curve together with the simulated grid, and
/// the threshold curve.
pub fn emit_plot_data(
    dir: &Path,
    rows: &[RunResult],
    boundary: Option<&Boundary>,
    thresholds: &[(f64, Option<usize>)],
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let cells = cell_summaries(rows);
    let mut written = Vec::new();
    let mut emit = |name: &str, body: Vec<u8>| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };

    let diagonal: Vec<&CellSummary> = cells
        .iter()
        .filter(|s| s.t_final == s.n_qubits as f64)
        .collect();
    let mut buf = Vec::new();
    write_cells(&diagonal, &mut buf)?;
    emit(FIG2_FILE, buf)?;

    let all: Vec<&CellSummary> = cells.iter().collect();
    let mut buf = Vec::new();
    write_cells(&all, &mut buf)?;
    emit(FIG3_FILE, buf)?;

    let mut grid: Vec<(usize, f64)> = rows.iter().map(|r| (r.n_qubits, r.t_final)).collect();
    grid.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
    grid.dedup();
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["kind", "n_qubits", "t_final"]).map_err(csv_err)?;
        for &(n, t) in boundary.map(|b| b.points.as_slice()).unwrap_or_default() {
            w.write_record(["boundary".to_string(), csv_float(n), csv_float(t)])
                .map_err(csv_err)?;
        }
        for &(n, t) in &grid {
            w.write_record(["simulated".to_string(), n.to_string(), csv_float(t)])
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io(dir, e))?;
    }
    emit(FIG4_FILE, buf)?;

    let mut buf = Vec::new();
    write_threshold_csv(thresholds, &mut buf)?;
    emit(FIG5_FILE, buf)?;
    Ok(written)
}
