//! The open-boundary 1D transverse-field Ising chain
//! `H = Σ_k a_k X_k + Σ_i b_i Z_i Z_{i+1}` and its random problem instances.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{PauliOp, StateVector};

/// Register size above which dense matrices are refused.
pub const DENSE_QUBIT_LIMIT: usize = 12;

/// RNG stream for the Hamiltonian coefficients of an instance.
pub const COEFFICIENT_STREAM: u64 = 1;
/// RNG stream for the non-trainable initial-layer angles of an instance.
pub const INITIAL_LAYER_STREAM: u64 = 2;

/// Half-width of the sampling interval for initial-layer angles.
pub const INITIAL_LAYER_RANGE: f64 = PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub op: PauliOp,
}

impl PauliTerm {
    pub fn x(qubit: usize, coefficient: f64) -> Self {
        Self {
            coefficient,
            op: PauliOp::X(qubit),
        }
    }

    pub fn zz(qubit: usize, coefficient: f64) -> Self {
        Self {
            coefficient,
            op: PauliOp::ZZ(qubit, qubit + 1),
        }
    }

    /// Returns `coefficient * P |state⟩`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let mut out = state.zeros_like();
        state.accumulate_pauli(self.coefficient, self.op, &mut out)?;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsingHamiltonian {
    n_qubits: usize,
    x_terms: Vec<PauliTerm>,
    zz_terms: Vec<PauliTerm>,
}

impl IsingHamiltonian {
    /// Builds the chain from the on-site fields `a` (length n) and the bond
    /// couplings `b` (length n - 1).
    pub fn new(a: &[f64], b: &[f64]) -> Result<Self> {
        let n_qubits = a.len();
        if n_qubits == 0 {
            return Err(Error::Domain("Hamiltonian needs at least one qubit".into()));
        }
        if b.len() + 1 != n_qubits {
            return Err(Error::Shape {
                expected: n_qubits - 1,
                found: b.len(),
            });
        }
        if let Some(bad) = a.iter().chain(b).find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite coefficient {bad}")));
        }
        Ok(Self {
            n_qubits,
            x_terms: a.iter().enumerate().map(|(k, &c)| PauliTerm::x(k, c)).collect(),
            zz_terms: b.iter().enumerate().map(|(i, &c)| PauliTerm::zz(i, c)).collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_terms(&self) -> &[PauliTerm] {
        &self.x_terms
    }

    pub fn zz_terms(&self) -> &[PauliTerm] {
        &self.zz_terms
    }

    pub fn terms(&self) -> impl Iterator<Item = &PauliTerm> {
        self.x_terms.iter().chain(&self.zz_terms)
    }

    pub fn field_coefficients(&self) -> Vec<f64> {
        self.x_terms.iter().map(|t| t.coefficient).collect()
    }

    pub fn coupling_coefficients(&self) -> Vec<f64> {
        self.zz_terms.iter().map(|t| t.coefficient).collect()
    }

    /// `H|state⟩`, unnormalized.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_dim(state)?;
        let mut out = state.zeros_like();
        for term in self.terms() {
            state.accumulate_pauli(term.coefficient, term.op, &mut out)?;
        }
        Ok(out)
    }

    /// `⟨ψ|H|ψ⟩`; the imaginary round-off residue is discarded.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        let h_psi = self.apply(state)?;
        Ok(state.inner_product(&h_psi)?.re)
    }

    /// `⟨ψ|H²|ψ⟩ = ‖H|ψ⟩‖²`
    pub fn expectation_squared(&self, state: &StateVector) -> Result<f64> {
        Ok(self.apply(state)?.norm_sqr())
    }

    /// Real symmetric matrix of `H` in the computational basis.
    pub fn dense_matrix_real(&self) -> Result<DMatrix<f64>> {
        if self.n_qubits > DENSE_QUBIT_LIMIT {
            return Err(Error::Resource {
                n_qubits: self.n_qubits,
                limit: DENSE_QUBIT_LIMIT,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for col in 0..dim {
            for term in &self.x_terms {
                if let PauliOp::X(q) = term.op {
                    m[(col ^ (1 << q), col)] += term.coefficient;
                }
            }
            let diagonal: f64 = self
                .zz_terms
                .iter()
                .map(|term| match term.op {
                    PauliOp::ZZ(a, b) if ((col >> a) ^ (col >> b)) & 1 == 1 => -term.coefficient,
                    _ => term.coefficient,
                })
                .sum();
            m[(col, col)] += diagonal;
        }
        Ok(m)
    }

    pub fn dense_matrix(&self) -> Result<DMatrix<Complex64>> {
        Ok(self.dense_matrix_real()?.map(|v| Complex64::new(v, 0.0)))
    }

    fn check_dim(&self, state: &StateVector) -> Result<()> {
        if state.n_qubits() != self.n_qubits {
            return Err(Error::Shape {
                expected: 1 << self.n_qubits,
                found: state.dim(),
            });
        }
        Ok(())
    }
}

/// One dynamical problem: a Hamiltonian plus the angles of the fixed first
/// ansatz layer that prepares the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub hamiltonian: IsingHamiltonian,
    pub initial_layer_params: Vec<f64>,
    pub seed: u64,
}

impl ProblemInstance {
    pub fn new(hamiltonian: IsingHamiltonian, initial_layer_params: Vec<f64>, seed: u64) -> Result<Self> {
        let expected = 2 * hamiltonian.n_qubits() - 1;
        if initial_layer_params.len() != expected {
            return Err(Error::Shape {
                expected,
                found: initial_layer_params.len(),
            });
        }
        Ok(Self {
            hamiltonian,
            initial_layer_params,
            seed,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn to_file_format(&self) -> InstanceFile {
        InstanceFile {
            n_qubits: self.n_qubits(),
            seed: self.seed,
            a: self.hamiltonian.field_coefficients(),
            b: self.hamiltonian.coupling_coefficients(),
            initial_layer_params: self.initial_layer_params.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file_format())
            .expect("instance serialization is infallible");
        s.push('\n');
        s
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: InstanceFile =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e))?;
        file.try_into()
    }
}

/// On-disk JSON layout of a [`ProblemInstance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n_qubits: usize,
    pub seed: u64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub initial_layer_params: Vec<f64>,
}

impl TryFrom<InstanceFile> for ProblemInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.a.len() != file.n_qubits {
            return Err(Error::Shape {
                expected: file.n_qubits,
                found: file.a.len(),
            });
        }
        let hamiltonian = IsingHamiltonian::new(&file.a, &file.b)?;
        ProblemInstance::new(hamiltonian, file.initial_layer_params, file.seed)
    }
}

/// Generator for the `(n_qubits, seed)` instance on the given stream.
///
/// The 32-byte ChaCha8 key is `seed` (LE) followed by `n_qubits` (LE) and zero
/// padding, so every `(n_qubits, seed)` pair owns an independent key and the
/// coefficient and initial-layer draws live on separate streams of that key.
pub fn instance_rng(n_qubits: usize, seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(n_qubits as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Uniform draw on the open interval `(-half_width, half_width)`.
fn open_symmetric(rng: &mut impl Rng, half_width: f64) -> f64 {
    loop {
        let v = rng.random_range(-half_width..half_width);
        if v != -half_width {
            return v;
        }
    }
}

/// Draws Ising coefficients i.i.d. uniform on (-1, 1) and initial-layer
/// angles i.i.d. uniform on (-π, π).
pub fn random_instance(n_qubits: usize, seed: u64) -> Result<ProblemInstance> {
    if n_qubits < 2 {
        return Err(Error::Domain(format!(
            "random instances need at least 2 qubits, got {n_qubits}"
        )));
    }
    if n_qubits > crate::statevector::MAX_QUBITS {
        return Err(Error::Resource {
            n_qubits,
            limit: crate::statevector::MAX_QUBITS,
        });
    }
    let mut coeff_rng = instance_rng(n_qubits, seed, COEFFICIENT_STREAM);
    let a: Vec<f64> = (0..n_qubits).map(|_| open_symmetric(&mut coeff_rng, 1.0)).collect();
    let b: Vec<f64> = (0..n_qubits - 1)
        .map(|_| open_symmetric(&mut coeff_rng, 1.0))
        .collect();
    let mut param_rng = instance_rng(n_qubits, seed, INITIAL_LAYER_STREAM);
    let initial: Vec<f64> = (0..2 * n_qubits - 1)
        .map(|_| open_symmetric(&mut param_rng, INITIAL_LAYER_RANGE))
        .collect();
    ProblemInstance::new(IsingHamiltonian::new(&a, &b)?, initial, seed)
}
