//! Dense statevector storage and the rotation/Pauli kernels used by every
//! other module.
//!
//! Amplitudes are little-endian: qubit `q` is bit `q` of the basis index.
//! Parametrized gates use the half-angle convention `exp(-i θ P / 2)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the dense representation accepts.
pub const MAX_QUBITS: usize = 30;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A Pauli operator from the gate set the Ising chain needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PauliOp {
    X(usize),
    Z(usize),
    ZZ(usize, usize),
}

impl PauliOp {
    pub fn check(&self, n_qubits: usize) -> Result<()> {
        let in_range = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(Error::QubitIndex { index: q, n_qubits })
            }
        };
        match *self {
            PauliOp::X(q) | PauliOp::Z(q) => in_range(q),
            PauliOp::ZZ(a, b) => {
                in_range(a)?;
                in_range(b)?;
                if a == b {
                    Err(Error::RepeatedQubit(a))
                } else {
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Shape {
                expected: dim,
                found: index,
            });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if amplitudes.len() != dim {
            return Err(Error::Shape {
                expected: dim,
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            amplitudes: vec![ZERO; self.amplitudes.len()],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for z in &mut self.amplitudes {
            *z *= factor;
        }
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: Complex64, other: &StateVector) -> Result<()> {
        self.check_same_shape(other)?;
        for (z, w) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *z += alpha * w;
        }
        Ok(())
    }

    /// `⟨self|ket⟩`, conjugating `self`.
    pub fn inner_product(&self, ket: &StateVector) -> Result<Complex64> {
        self.check_same_shape(ket)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&ket.amplitudes)
            .fold(ZERO, |acc, (b, k)| acc + b.conj() * k))
    }

    /// Applies `exp(-i angle X_q / 2)`.
    pub fn apply_rx(&mut self, qubit: usize, angle: f64) -> Result<()> {
        PauliOp::X(qubit).check(self.n_qubits)?;
        let (s, c) = (angle / 2.0).sin_cos();
        let mis = Complex64::new(0.0, -s);
        let mask = 1usize << qubit;
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a = self.amplitudes[i];
                let b = self.amplitudes[j];
                self.amplitudes[i] = a * c + b * mis;
                self.amplitudes[j] = a * mis + b * c;
            }
        }
        Ok(())
    }

    /// Applies `exp(-i angle Z_q / 2)`.
    pub fn apply_rz(&mut self, qubit: usize, angle: f64) -> Result<()> {
        PauliOp::Z(qubit).check(self.n_qubits)?;
        let minus = Complex64::from_polar(1.0, -angle / 2.0);
        let plus = minus.conj();
        let mask = 1usize << qubit;
        for (i, z) in self.amplitudes.iter_mut().enumerate() {
            *z *= if i & mask == 0 { minus } else { plus };
        }
        Ok(())
    }

    /// Applies `exp(-i angle Z_a Z_b / 2)`.
    pub fn apply_rzz(&mut self, qubit_a: usize, qubit_b: usize, angle: f64) -> Result<()> {
        PauliOp::ZZ(qubit_a, qubit_b).check(self.n_qubits)?;
        let even = Complex64::from_polar(1.0, -angle / 2.0);
        let odd = even.conj();
        for (i, z) in self.amplitudes.iter_mut().enumerate() {
            let parity = ((i >> qubit_a) ^ (i >> qubit_b)) & 1;
            *z *= if parity == 0 { even } else { odd };
        }
        Ok(())
    }

    /// Applies `exp(-i angle P / 2)` for the given generator.
    pub fn apply_rotation(&mut self, op: PauliOp, angle: f64) -> Result<()> {
        match op {
            PauliOp::X(q) => self.apply_rx(q, angle),
            PauliOp::Z(q) => self.apply_rz(q, angle),
            PauliOp::ZZ(a, b) => self.apply_rzz(a, b, angle),
        }
    }

    /// Applies the bare Pauli operator in place.
    pub fn apply_pauli(&mut self, op: PauliOp) -> Result<()> {
        op.check(self.n_qubits)?;
        match op {
            PauliOp::X(q) => {
                let mask = 1usize << q;
                for i in 0..self.amplitudes.len() {
                    if i & mask == 0 {
                        self.amplitudes.swap(i, i | mask);
                    }
                }
            }
            PauliOp::Z(q) => {
                for (i, z) in self.amplitudes.iter_mut().enumerate() {
                    if (i >> q) & 1 == 1 {
                        *z = -*z;
                    }
                }
            }
            PauliOp::ZZ(a, b) => {
                for (i, z) in self.amplitudes.iter_mut().enumerate() {
                    if ((i >> a) ^ (i >> b)) & 1 == 1 {
                        *z = -*z;
                    }
                }
            }
        }
        Ok(())
    }

    /// Adds `coefficient * P |self⟩` into `out` without materializing `P|self⟩`.
    pub(crate) fn accumulate_pauli(
        &self,
        coefficient: f64,
        op: PauliOp,
        out: &mut StateVector,
    ) -> Result<()> {
        op.check(self.n_qubits)?;
        self.check_same_shape(out)?;
        let src = &self.amplitudes;
        let dst = &mut out.amplitudes;
        match op {
            PauliOp::X(q) => {
                let mask = 1usize << q;
                for (i, z) in dst.iter_mut().enumerate() {
                    *z += coefficient * src[i ^ mask];
                }
            }
            PauliOp::Z(q) => {
                for (i, z) in dst.iter_mut().enumerate() {
                    let sign = if (i >> q) & 1 == 0 { 1.0 } else { -1.0 };
                    *z += (sign * coefficient) * src[i];
                }
            }
            PauliOp::ZZ(a, b) => {
                for (i, z) in dst.iter_mut().enumerate() {
                    let sign = if ((i >> a) ^ (i >> b)) & 1 == 0 { 1.0 } else { -1.0 };
                    *z += (sign * coefficient) * src[i];
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_same_shape(&self, other: &StateVector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Shape {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::Resource {
            n_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

/// `|⟨a|b⟩|²`
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner_product(b)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_close(a: &StateVector, b: &StateVector, tol: f64) {
        assert_eq!(a.dim(), b.dim());
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() <= tol, "{x} vs {y}");
        }
    }

    fn arb_state(n: usize) -> impl Strategy<Value = StateVector> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_map(move |v| {
            let mut s =
                StateVector::from_amplitudes(n, v.into_iter().map(|(r, i)| c(r, i)).collect())
                    .unwrap();
            let norm = s.norm().max(1e-3);
            s.scale(c(1.0 / norm, 0.0));
            s
        })
    }

    #[test]
    fn rx_examples() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_rx(0, 0.0).unwrap();
        assert_close(&s, &StateVector::zero(1).unwrap(), 0.0);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_rx(0, PI).unwrap();
        let expected = StateVector::from_amplitudes(1, vec![c(0.0, 0.0), c(0.0, -1.0)]).unwrap();
        assert_close(&s, &expected, 1e-15);

        let mut s = StateVector::zero(1).unwrap();
        s.apply_rx(0, FRAC_PI_2).unwrap();
        let expected =
            StateVector::from_amplitudes(1, vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)])
                .unwrap();
        assert_close(&s, &expected, 1e-15);
    }

    #[test]
    fn rzz_examples() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply_rzz(0, 1, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(s.amplitudes()[0].re, (-PI / 4.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitudes()[0].im, (-PI / 4.0).sin(), epsilon = 1e-15);

        for idx in 0..4 {
            let mut s = StateVector::basis(2, idx).unwrap();
            s.apply_rzz(0, 1, 2.0 * PI).unwrap();
            assert_abs_diff_eq!(s.amplitudes()[idx].re, -1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(s.amplitudes()[idx].im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn index_errors() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_rx(2, 0.1),
            Err(Error::QubitIndex { index: 2, .. })
        ));
        assert!(matches!(s.apply_rzz(1, 1, 0.1), Err(Error::RepeatedQubit(1))));
        assert!(s.apply_rzz(0, 5, 0.1).is_err());
        let other = StateVector::zero(3).unwrap();
        assert!(matches!(s.inner_product(&other), Err(Error::Shape { .. })));
        assert!(StateVector::zero(MAX_QUBITS + 1).is_err());
    }

    #[test]
    fn pauli_examples() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_pauli(PauliOp::X(0)).unwrap();
        assert_close(&s, &StateVector::basis(1, 1).unwrap(), 0.0);

        // |01⟩ in ket notation with qubit 0 leftmost: index 0b10.
        let s = StateVector::basis(2, 0b10).unwrap();
        let mut out = s.zeros_like();
        s.accumulate_pauli(0.5, PauliOp::ZZ(0, 1), &mut out).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[0b10].re, -0.5);
    }

    #[test]
    fn inner_product_basics() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(zero.inner_product(&one).unwrap(), c(0.0, 0.0));
        assert_eq!(zero.inner_product(&zero).unwrap(), c(1.0, 0.0));
        let s = StateVector::from_amplitudes(1, vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        // conjugation on the bra
        assert_eq!(s.inner_product(&zero).unwrap(), c(0.0, -1.0));
        assert_abs_diff_eq!(fidelity(&zero, &one).unwrap(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rotations_preserve_norm(s in arb_state(3), q in 0usize..3, r in 0usize..3, angle in -10.0f64..10.0) {
            let before = s.norm();
            let mut t = s.clone();
            t.apply_rx(q, angle).unwrap();
            t.apply_rz(r, angle * 0.7).unwrap();
            if q != r {
                t.apply_rzz(q, r, angle * 1.3).unwrap();
            }
            prop_assert!((t.norm() - before).abs() < 1e-12);
        }

        #[test]
        fn rx_composes(s in arb_state(2), q in 0usize..2, a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let mut one = s.clone();
            one.apply_rx(q, a).unwrap();
            one.apply_rx(q, b).unwrap();
            let mut two = s;
            two.apply_rx(q, a + b).unwrap();
            for (x, y) in one.amplitudes().iter().zip(two.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn pauli_is_linear(s in arb_state(3), t in arb_state(3), ar in -2.0f64..2.0, bi in -2.0f64..2.0, q in 0usize..2) {
            let op = PauliOp::ZZ(q, q + 1);
            let (alpha, beta) = (c(ar, 0.3), c(0.2, bi));
            let mut combo = s.zeros_like();
            combo.axpy(alpha, &s).unwrap();
            combo.axpy(beta, &t).unwrap();
            combo.apply_pauli(op).unwrap();
            combo.apply_pauli(PauliOp::X(q)).unwrap();
            let mut ps = s.clone();
            ps.apply_pauli(op).unwrap();
            ps.apply_pauli(PauliOp::X(q)).unwrap();
            let mut pt = t.clone();
            pt.apply_pauli(op).unwrap();
            pt.apply_pauli(PauliOp::X(q)).unwrap();
            let mut expected = s.zeros_like();
            expected.axpy(alpha, &ps).unwrap();
            expected.axpy(beta, &pt).unwrap();
            for (x, y) in combo.amplitudes().iter().zip(expected.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn disjoint_rzz_commute(s in arb_state(4), a in -4.0f64..4.0, b in -4.0f64..4.0) {
            let mut one = s.clone();
            one.apply_rzz(0, 1, a).unwrap();
            one.apply_rzz(2, 3, b).unwrap();
            let mut two = s;
            two.apply_rzz(2, 3, b).unwrap();
            two.apply_rzz(0, 1, a).unwrap();
            for (x, y) in one.amplitudes().iter().zip(two.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }
}
