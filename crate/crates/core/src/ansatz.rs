//! Parametrized circuits: a generic rotation circuit and the layered
//! Hamiltonian Variational Ansatz built on top of it.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::ProblemInstance;
use crate::statevector::{PauliOp, StateVector};

/// Moments per ansatz layer: one X moment and two brickwall ZZ moments.
pub const MOMENTS_PER_LAYER: usize = 3;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParameterVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// A state family `θ ↦ |ψ(θ)⟩` with parameter-shift derivatives.
pub trait Ansatz: Sync {
    fn n_qubits(&self) -> usize;

    fn n_params(&self) -> usize;

    fn prepare_state(&self, params: &[f64]) -> Result<StateVector>;

    /// `∂|ψ(θ)⟩/∂θ_k`, evaluated as one half of the circuit with `θ_k + π`.
    ///
    /// Exact for generators that are Pauli strings under the half-angle
    /// convention: `½·exp(-i(θ+π)P/2) = (-iP/2)·exp(-iθP/2)`.
    fn derivative_state(&self, params: &[f64], k: usize) -> Result<StateVector> {
        self.check_params(params)?;
        if k >= self.n_params() {
            return Err(Error::ParameterIndex {
                index: k,
                n_params: self.n_params(),
            });
        }
        let mut shifted = params.to_vec();
        shifted[k] += PI;
        let mut state = self.prepare_state(&shifted)?;
        state.scale(Complex64::new(0.5, 0.0));
        Ok(state)
    }

    /// All derivative states, in parameter order.
    fn derivative_states(&self, params: &[f64]) -> Result<Vec<StateVector>> {
        (0..self.n_params())
            .into_par_iter()
            .map(|k| self.derivative_state(params, k))
            .collect()
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::Shape {
                expected: self.n_params(),
                found: params.len(),
            });
        }
        Ok(())
    }
}

/// A rotation `exp(-i θ_p P / 2)` whose angle is parameter `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParametrizedGate {
    pub generator: PauliOp,
    pub param: usize,
}

/// A fixed reference state followed by a sequence of parametrized rotations
/// (in time order).
#[derive(Debug, Clone)]
pub struct RotationCircuit {
    reference: StateVector,
    gates: Vec<ParametrizedGate>,
    n_params: usize,
}

impl RotationCircuit {
    pub fn new(reference: StateVector, gates: Vec<ParametrizedGate>) -> Result<Self> {
        for g in &gates {
            g.generator.check(reference.n_qubits())?;
        }
        let n_params = gates.iter().map(|g| g.param + 1).max().unwrap_or(0);
        Ok(Self {
            reference,
            gates,
            n_params,
        })
    }

    /// One gate per parameter, parameter `i` driving the `i`-th generator.
    pub fn from_generators(reference: StateVector, generators: &[PauliOp]) -> Result<Self> {
        let gates = generators
            .iter()
            .enumerate()
            .map(|(param, &generator)| ParametrizedGate { generator, param })
            .collect();
        Self::new(reference, gates)
    }

    pub fn reference(&self) -> &StateVector {
        &self.reference
    }

    pub fn gates(&self) -> &[ParametrizedGate] {
        &self.gates
    }
}

impl Ansatz for RotationCircuit {
    fn n_qubits(&self) -> usize {
        self.reference.n_qubits()
    }

    fn n_params(&self) -> usize {
        self.n_params
    }

    fn prepare_state(&self, params: &[f64]) -> Result<StateVector> {
        self.check_params(params)?;
        let mut state = self.reference.clone();
        for g in &self.gates {
            state.apply_rotation(g.generator, params[g.param])?;
        }
        Ok(state)
    }

    /// Same states as the shifted circuits, sharing the forward pass: the
    /// derivative through gate `g` is `-iP_g/2` inserted right after `g`.
    fn derivative_states(&self, params: &[f64]) -> Result<Vec<StateVector>> {
        self.check_params(params)?;
        let mut prefixes = Vec::with_capacity(self.gates.len());
        let mut state = self.reference.clone();
        for g in &self.gates {
            state.apply_rotation(g.generator, params[g.param])?;
            prefixes.push(state.clone());
        }
        let branches: Vec<StateVector> = prefixes
            .into_par_iter()
            .enumerate()
            .map(|(index, mut branch)| {
                branch.apply_pauli(self.gates[index].generator)?;
                branch.scale(Complex64::new(0.0, -0.5));
                for g in &self.gates[index + 1..] {
                    branch.apply_rotation(g.generator, params[g.param])?;
                }
                Ok(branch)
            })
            .collect::<Result<_>>()?;

        let mut out: Vec<Option<StateVector>> = vec![None; self.n_params];
        for (gate, branch) in self.gates.iter().zip(branches) {
            match &mut out[gate.param] {
                Some(acc) => acc.axpy(Complex64::new(1.0, 0.0), &branch)?,
                slot => *slot = Some(branch),
            }
        }
        Ok(out
            .into_iter()
            .map(|d| d.unwrap_or_else(|| self.reference.zeros_like()))
            .collect())
    }
}

/// Time order of the ZZ rotations inside one layer. All ZZ generators of a
/// layer commute, so both orders prepare the same state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZzOrdering {
    /// Even bonds, then odd bonds: two moments regardless of chain length.
    #[default]
    Brickwall,
    /// Bond 0, 1, 2, … one after the other.
    Sequential,
}

fn bond_order(n_qubits: usize, ordering: ZzOrdering) -> Vec<usize> {
    let bonds = 0..n_qubits.saturating_sub(1);
    match ordering {
        ZzOrdering::Brickwall => bonds
            .clone()
            .step_by(2)
            .chain(bonds.skip(1).step_by(2))
            .collect(),
        ZzOrdering::Sequential => bonds.collect(),
    }
}

/// Gates of one HVA layer whose parameters start at `offset`: the `n` X
/// angles come first, then the `n - 1` bond angles in bond order.
fn layer_gates(n_qubits: usize, offset: usize, ordering: ZzOrdering) -> Vec<ParametrizedGate> {
    let x = (0..n_qubits).map(|q| ParametrizedGate {
        generator: PauliOp::X(q),
        param: offset + q,
    });
    let zz = bond_order(n_qubits, ordering)
        .into_iter()
        .map(|i| ParametrizedGate {
            generator: PauliOp::ZZ(i, i + 1),
            param: offset + n_qubits + i,
        });
    x.chain(zz).collect()
}

/// Hamiltonian Variational Ansatz for the Ising chain.
///
/// The reference state is `|0…0⟩` after one fixed layer whose angles come
/// from the problem instance. Each trainable layer applies the X rotations of
/// every site, then the ZZ rotations of every bond.
#[derive(Debug, Clone)]
pub struct HvaAnsatz<'a> {
    instance: &'a ProblemInstance,
    n_layers: usize,
    circuit: RotationCircuit,
}

impl<'a> HvaAnsatz<'a> {
    pub fn new(instance: &'a ProblemInstance, n_layers: usize) -> Result<Self> {
        Self::with_ordering(instance, n_layers, ZzOrdering::Brickwall)
    }

    pub fn with_ordering(
        instance: &'a ProblemInstance,
        n_layers: usize,
        ordering: ZzOrdering,
    ) -> Result<Self> {
        if n_layers == 0 {
            return Err(Error::Domain("ansatz needs at least one layer".into()));
        }
        let n = instance.n_qubits();
        let initial = RotationCircuit::new(StateVector::zero(n)?, layer_gates(n, 0, ordering))?;
        let reference = initial.prepare_state(&instance.initial_layer_params)?;
        let per_layer = 2 * n - 1;
        let gates = (0..n_layers)
            .flat_map(|l| layer_gates(n, l * per_layer, ordering))
            .collect();
        Ok(Self {
            instance,
            n_layers,
            circuit: RotationCircuit::new(reference, gates)?,
        })
    }

    pub fn instance(&self) -> &'a ProblemInstance {
        self.instance
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn params_per_layer(&self) -> usize {
        2 * self.instance.n_qubits() - 1
    }

    /// `|ψ(θ₀)⟩`, the output of the fixed first layer.
    pub fn initial_state(&self) -> &StateVector {
        self.circuit.reference()
    }

    /// Circuit depth in moments, excluding the fixed first layer.
    pub fn circuit_depth(&self) -> usize {
        circuit_depth(self.n_layers)
    }
}

impl Ansatz for HvaAnsatz<'_> {
    fn n_qubits(&self) -> usize {
        self.circuit.n_qubits()
    }

    fn n_params(&self) -> usize {
        self.n_layers * self.params_per_layer()
    }

    fn prepare_state(&self, params: &[f64]) -> Result<StateVector> {
        self.circuit.prepare_state(params)
    }

    fn derivative_states(&self, params: &[f64]) -> Result<Vec<StateVector>> {
        self.circuit.derivative_states(params)
    }
}

/// Depth in moments of `n_layers` HVA layers.
pub fn circuit_depth(n_layers: usize) -> usize {
    MOMENTS_PER_LAYER * n_layers
}
