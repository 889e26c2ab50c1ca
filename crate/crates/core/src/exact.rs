//! Reference time evolution `e^{-iHt}|ψ₀⟩` by full diagonalization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::IsingHamiltonian;
use crate::statevector::StateVector;

pub use crate::statevector::fidelity;

/// Eigendecomposition `H = V Λ Vᵀ` of a real symmetric Hamiltonian, reusable
/// for any evolution time.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    n_qubits: usize,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl ExactPropagator {
    pub fn new(hamiltonian: &IsingHamiltonian) -> Result<Self> {
        let eig = SymmetricEigen::new(hamiltonian.dense_matrix_real()?);
        Ok(Self {
            n_qubits: hamiltonian.n_qubits(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn evolve(&self, initial: &StateVector, t: f64) -> Result<StateVector> {
        if initial.n_qubits() != self.n_qubits {
            return Err(Error::Shape {
                expected: 1 << self.n_qubits,
                found: initial.dim(),
            });
        }
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("evolution time must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(initial.clone());
        }
        let re = DVector::from_iterator(initial.dim(), initial.amplitudes().iter().map(|z| z.re));
        let im = DVector::from_iterator(initial.dim(), initial.amplitudes().iter().map(|z| z.im));
        let v = &self.eigenvectors;
        let cre = v.tr_mul(&re);
        let cim = v.tr_mul(&im);
        let (mut rot_re, mut rot_im) = (cre.clone(), cim.clone());
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -lambda * t);
            let z = Complex64::new(cre[k], cim[k]) * phase;
            rot_re[k] = z.re;
            rot_im[k] = z.im;
        }
        let out_re = v * rot_re;
        let out_im = v * rot_im;
        let amps = out_re
            .iter()
            .zip(out_im.iter())
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        StateVector::from_amplitudes(self.n_qubits, amps)
    }
}

/// One-shot `e^{-iHt}|initial⟩`.
pub fn exact_evolve(
    hamiltonian: &IsingHamiltonian,
    t: f64,
    initial: &StateVector,
) -> Result<StateVector> {
    ExactPropagator::new(hamiltonian)?.evolve(initial, t)
}
