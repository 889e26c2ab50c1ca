//! Variational quantum simulation via McLachlan's principle.
//!
//! Each right-hand-side evaluation assembles the real quantum-geometric
//! matrix `A`, the force vector `C` and `⟨H²⟩` from statevector overlaps,
//! solves `A θ̇ = C` in the minimum-norm least-squares sense, and records the
//! residual `‖(d/dt + iH)|ψ(θ)⟩‖²`. Parameters start at zero and are advanced
//! with the adaptive Dormand–Prince stepper.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{Ansatz, ParameterVector};
use crate::error::{Error, Result};
use crate::hamiltonian::IsingHamiltonian;
use crate::ode::{self, Dopri5Options, OdeError};
use crate::statevector::StateVector;

/// Negative McLachlan distances above this (times the magnitude of the
/// largest summand, floored at 1) are treated as round-off and clipped to 0.
pub const DISTANCE_NEGATIVE_TOLERANCE: f64 = 1e-8;

/// Smallest step the integrator may take before giving up.
pub const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySystem {
    pub a_matrix: DMatrix<f64>,
    pub c_vector: DVector<f64>,
    pub h_expectation: f64,
    pub h2_expectation: f64,
}

impl GeometrySystem {
    pub fn n_params(&self) -> usize {
        self.c_vector.len()
    }
}

/// Relative singular-value cutoff of the least-squares solve.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LstsqCutoff {
    /// Machine epsilon times the matrix size.
    #[default]
    MachineEpsilonTimesSize,
    Relative(f64),
}

impl LstsqCutoff {
    pub fn ratio(&self, size: usize) -> f64 {
        match *self {
            LstsqCutoff::MachineEpsilonTimesSize => f64::EPSILON * size as f64,
            LstsqCutoff::Relative(r) => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqsConfig {
    pub lstsq_cutoff: LstsqCutoff,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    /// `None` leaves the step unbounded.
    pub max_step: Option<f64>,
}

impl Default for VqsConfig {
    fn default() -> Self {
        Self {
            lstsq_cutoff: LstsqCutoff::default(),
            ode_rel_tol: 1e-3,
            ode_abs_tol: 1e-6,
            max_step: None,
        }
    }
}

impl VqsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.ode_rel_tol) || !positive(self.ode_abs_tol) {
            return Err(Error::Domain("ODE tolerances must be positive".into()));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::Domain("max_step must be positive".into()));
            }
        }
        if let LstsqCutoff::Relative(r) = self.lstsq_cutoff {
            if !(r >= 0.0) {
                return Err(Error::Domain("lstsq cutoff must be nonnegative".into()));
            }
        }
        Ok(())
    }

    fn ode_options(&self) -> Dopri5Options {
        Dopri5Options {
            rtol: self.ode_rel_tol,
            atol: self.ode_abs_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            min_step: MIN_STEP,
            first_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VqsTrajectory {
    pub times: Vec<f64>,
    pub params: Vec<ParameterVector>,
    #[serde(rename = "mclachlan")]
    pub mclachlan_distance: Vec<f64>,
    pub step_count: usize,
    pub rhs_evaluations: usize,
}

impl VqsTrajectory {
    pub fn final_params(&self) -> Option<&ParameterVector> {
        self.params.last()
    }

    pub fn final_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trajectory serialization is infallible")
    }
}

/// Assembles `A`, `C`, `⟨H⟩` and `⟨H²⟩` at `params`.
///
/// `A_ij = Re(⟨∂_i ψ|∂_j ψ⟩ − ⟨∂_i ψ|ψ⟩⟨ψ|∂_j ψ⟩)` and
/// `C_i = Im(⟨∂_i ψ|H|ψ⟩ + ⟨ψ|∂_i ψ⟩⟨ψ|H|ψ⟩)`.
pub fn build_geometry(
    ansatz: &impl Ansatz,
    hamiltonian: &IsingHamiltonian,
    params: &[f64],
) -> Result<GeometrySystem> {
    let psi = ansatz.prepare_state(params)?;
    let derivs = ansatz.derivative_states(params)?;
    let h_psi = hamiltonian.apply(&psi)?;
    let energy = psi.inner_product(&h_psi)?.re;
    let h2 = h_psi.norm_sqr();
    let m = derivs.len();

    let overlaps: Vec<Complex64> = derivs
        .iter()
        .map(|d| psi.inner_product(d))
        .collect::<Result<_>>()?;

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (i..m)
                .map(|j| {
                    let raw = derivs[i].inner_product(&derivs[j])?;
                    Ok((raw - overlaps[i].conj() * overlaps[j]).re)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + offset;
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }

    let c = derivs
        .iter()
        .zip(&overlaps)
        .map(|(d, o)| Ok((d.inner_product(&h_psi)? + o * energy).im))
        .collect::<Result<Vec<f64>>>()?;

    Ok(GeometrySystem {
        a_matrix: a,
        c_vector: DVector::from_vec(c),
        h_expectation: energy,
        h2_expectation: h2,
    })
}

/// Minimum-norm least-squares solution of `A θ̇ = C`, discarding singular
/// values at or below `cutoff · σ_max`.
pub fn solve_parameter_velocities(system: &GeometrySystem, cutoff: LstsqCutoff) -> ParameterVector {
    let m = system.n_params();
    if m == 0 {
        return ParameterVector::default();
    }
    let svd = system.a_matrix.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let sigma_max = svd.singular_values.max();
    let threshold = cutoff.ratio(m) * sigma_max;
    let mut x = DVector::<f64>::zeros(m);
    if sigma_max > 0.0 {
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > threshold {
                let coeff = u.column(k).dot(&system.c_vector) / s;
                x.axpy(coeff, &v_t.row(k).transpose(), 1.0);
            }
        }
    }
    ParameterVector(x.as_slice().to_vec())
}

/// `Σ A_ij θ̇_i θ̇_j − 2 Σ C_i θ̇_i + ⟨H²⟩`, floored at zero.
pub fn mclachlan_distance(system: &GeometrySystem, theta_dot: &[f64]) -> Result<f64> {
    if theta_dot.len() != system.n_params() {
        return Err(Error::Shape {
            expected: system.n_params(),
            found: theta_dot.len(),
        });
    }
    let v = DVector::from_column_slice(theta_dot);
    let quad = v.dot(&(&system.a_matrix * &v));
    let lin = 2.0 * system.c_vector.dot(&v);
    let raw = quad - lin + system.h2_expectation;
    if raw >= 0.0 {
        return Ok(raw);
    }
    let scale = quad.abs().max(lin.abs()).max(system.h2_expectation).max(1.0);
    if raw < -DISTANCE_NEGATIVE_TOLERANCE * scale {
        return Err(Error::NumericalConsistency { value: raw });
    }
    Ok(0.0)
}

/// Parameter velocity and McLachlan distance at `params`.
pub fn evaluate_rhs(
    ansatz: &impl Ansatz,
    hamiltonian: &IsingHamiltonian,
    config: &VqsConfig,
    params: &[f64],
) -> Result<(ParameterVector, f64)> {
    let system = build_geometry(ansatz, hamiltonian, params)?;
    let theta_dot = solve_parameter_velocities(&system, config.lstsq_cutoff);
    let distance = mclachlan_distance(&system, &theta_dot)?;
    Ok((theta_dot, distance))
}

/// Integrates `θ(t)` from `θ(0) = 0` to `t_final`.
pub fn integrate(
    ansatz: &impl Ansatz,
    hamiltonian: &IsingHamiltonian,
    config: &VqsConfig,
    t_final: f64,
) -> Result<VqsTrajectory> {
    config.validate()?;
    if !(t_final > 0.0) || !t_final.is_finite() {
        return Err(Error::Domain(format!("t_final must be positive, got {t_final}")));
    }
    if ansatz.n_qubits() != hamiltonian.n_qubits() {
        return Err(Error::Shape {
            expected: 1 << hamiltonian.n_qubits(),
            found: 1 << ansatz.n_qubits(),
        });
    }
    let mut traj = VqsTrajectory::default();
    let rhs = |_t: f64, y: &[f64]| {
        evaluate_rhs(ansatz, hamiltonian, config, y).map(|(v, d)| (v.into_inner(), d))
    };
    let result = ode::integrate(
        rhs,
        0.0,
        &vec![0.0; ansatz.n_params()],
        t_final,
        &config.ode_options(),
        |t, y, dist: &f64| {
            traj.times.push(t);
            traj.params.push(ParameterVector(y.to_vec()));
            traj.mclachlan_distance.push(*dist);
        },
    );
    match result {
        Ok((_, stats)) => {
            traj.step_count = stats.accepted_steps;
            traj.rhs_evaluations = stats.rhs_evaluations;
            Ok(traj)
        }
        Err(OdeError::Rhs(e)) => Err(e),
        Err(OdeError::StepUnderflow { time, step }) => {
            traj.step_count = traj.times.len().saturating_sub(1);
            Err(Error::Stiffness {
                time,
                step,
                trajectory: Box::new(traj),
            })
        }
    }
}

/// Convenience: the variational state at the end of a trajectory.
pub fn final_state(ansatz: &impl Ansatz, trajectory: &VqsTrajectory) -> Result<StateVector> {
    let params = trajectory
        .final_params()
        .ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    ansatz.prepare_state(params)
}
