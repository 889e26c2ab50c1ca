//! Second-order (Strang) Trotter evolution with brickwall ZZ moments.
//!
//! The circuit is `B(dt/2) A(dt) [B(dt) A(dt)]^{n-1} B(dt/2)` with
//! `dt = t/n`: the half B steps between repetitions are merged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::IsingHamiltonian;
use crate::statevector::{PauliOp, StateVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterPlan {
    n_steps: usize,
    t_final: f64,
}

impl TrotterPlan {
    pub fn new(n_steps: usize, t_final: f64) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::Domain("Trotter plan needs at least one step".into()));
        }
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(Error::Domain(format!("t_final must be positive, got {t_final}")));
        }
        Ok(Self { n_steps, t_final })
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_steps as f64
    }
}

/// How half-step B blocks between repetitions are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrotterDepthConvention {
    /// Adjacent half B steps fused into one brickwall block.
    #[default]
    Merged,
    /// Every repetition keeps its own two half B blocks.
    Unmerged,
}

/// `exp(-i dt Σ a_k X_k)`: one moment of parallel X rotations.
fn apply_field_block(h: &IsingHamiltonian, state: &mut StateVector, dt: f64) -> Result<()> {
    for term in h.x_terms() {
        if let PauliOp::X(q) = term.op {
            state.apply_rx(q, 2.0 * term.coefficient * dt)?;
        }
    }
    Ok(())
}

/// `exp(-i dt Σ b_i Z_i Z_{i+1})`: even bonds, then odd bonds.
fn apply_coupling_block(h: &IsingHamiltonian, state: &mut StateVector, dt: f64) -> Result<()> {
    let terms = h.zz_terms();
    for parity in [0, 1] {
        for term in terms.iter().skip(parity).step_by(2) {
            if let PauliOp::ZZ(a, b) = term.op {
                state.apply_rzz(a, b, 2.0 * term.coefficient * dt)?;
            }
        }
    }
    Ok(())
}

pub fn trotter_evolve(
    hamiltonian: &IsingHamiltonian,
    plan: &TrotterPlan,
    initial: &StateVector,
) -> Result<StateVector> {
    if initial.n_qubits() != hamiltonian.n_qubits() {
        return Err(Error::Shape {
            expected: 1 << hamiltonian.n_qubits(),
            found: initial.dim(),
        });
    }
    let dt = plan.dt();
    let mut state = initial.clone();
    apply_coupling_block(hamiltonian, &mut state, dt / 2.0)?;
    apply_field_block(hamiltonian, &mut state, dt)?;
    for _ in 1..plan.n_steps {
        apply_coupling_block(hamiltonian, &mut state, dt)?;
        apply_field_block(hamiltonian, &mut state, dt)?;
    }
    apply_coupling_block(hamiltonian, &mut state, dt / 2.0)?;
    Ok(state)
}

/// Depth in moments: `3n + 2` merged (n X moments, n + 1 two-moment ZZ
/// blocks), `5n` unmerged.
pub fn trotter_depth(n_steps: usize, convention: TrotterDepthConvention) -> usize {
    match convention {
        TrotterDepthConvention::Merged => 3 * n_steps + 2,
        TrotterDepthConvention::Unmerged => 5 * n_steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_evolve, fidelity};
    use crate::hamiltonian::random_instance;
    use nalgebra::{DMatrix, DVector, SymmetricEigen};
    use num_complex::Complex64;

    fn initial(n: usize, seed: u64) -> StateVector {
        let inst = random_instance(n, seed).unwrap();
        crate::ansatz::HvaAnsatz::new(&inst, 1)
            .unwrap()
            .initial_state()
            .clone()
    }

    fn dense_exp(h: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
        let eig = SymmetricEigen::new(h.clone());
        let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            h.nrows(),
            eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
        ));
        &v * d * v.adjoint()
    }

    fn diff(a: &StateVector, b: &StateVector) -> f64 {
        let mut d = a.clone();
        d.axpy(Complex64::new(-1.0, 0.0), b).unwrap();
        d.norm()
    }

    #[test]
    fn depth_formula() {
        assert_eq!(trotter_depth(1, TrotterDepthConvention::Merged), 5);
        assert_eq!(trotter_depth(2, TrotterDepthConvention::Merged), 8);
        assert_eq!(trotter_depth(2, TrotterDepthConvention::Unmerged), 10);
    }

    #[test]
    fn plan_validation() {
        assert!(TrotterPlan::new(0, 1.0).is_err());
        assert!(TrotterPlan::new(1, 0.0).is_err());
        assert!((TrotterPlan::new(4, 2.0).unwrap().dt() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_block_hamiltonians_are_exact() {
        let psi = initial(4, 2);
        let plan = TrotterPlan::new(1, 3.0).unwrap();
        let fields = IsingHamiltonian::new(&[0.3, -0.8, 0.5, 0.9], &[0.0; 3]).unwrap();
        let couplings = IsingHamiltonian::new(&[0.0; 4], &[0.6, -0.2, 0.7]).unwrap();
        for h in [fields, couplings] {
            let t = trotter_evolve(&h, &plan, &psi).unwrap();
            let e = exact_evolve(&h, 3.0, &psi).unwrap();
            assert!(diff(&t, &e) <= 1e-12);
            assert!((fidelity(&t, &e).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn one_step_matches_dense_strang_product() {
        let h = random_instance(2, 5).unwrap().hamiltonian;
        let a_only = IsingHamiltonian::new(&h.field_coefficients(), &[0.0]).unwrap();
        let b_only = IsingHamiltonian::new(&[0.0, 0.0], &h.coupling_coefficients()).unwrap();
        let t = 0.9;
        let ha = a_only.dense_matrix_real().unwrap();
        let hb = b_only.dense_matrix_real().unwrap();
        let u = dense_exp(&hb, t / 2.0) * dense_exp(&ha, t) * dense_exp(&hb, t / 2.0);
        let psi = initial(2, 9);
        let want = u * DVector::from_column_slice(psi.amplitudes());
        let got = trotter_evolve(&h, &TrotterPlan::new(1, t).unwrap(), &psi).unwrap();
        assert!((DVector::from_column_slice(got.amplitudes()) - want).camax() <= 1e-12);
    }

    #[test]
    fn norm_is_preserved() {
        let h = random_instance(5, 1).unwrap().hamiltonian;
        let psi = initial(5, 1);
        for n in [1, 3, 17] {
            let out = trotter_evolve(&h, &TrotterPlan::new(n, 4.0).unwrap(), &psi).unwrap();
            assert!((out.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn error_drops_fourfold_per_doubling() {
        let h = random_instance(3, 8).unwrap().hamiltonian;
        let psi = initial(3, 8);
        let t = 2.0;
        let exact = exact_evolve(&h, t, &psi).unwrap();
        let err = |n| diff(&trotter_evolve(&h, &TrotterPlan::new(n, t).unwrap(), &psi).unwrap(), &exact);
        let ratio = err(32) / err(64);
        assert!((ratio - 4.0).abs() <= 0.8, "ratio {ratio}");
    }
}
