//! Property-based checks spanning several modules.

use num_complex::Complex64;
use proptest::prelude::*;

use vqsim::ansatz::{Ansatz, HvaAnsatz};
use vqsim::exact::{fidelity, ExactPropagator};
use vqsim::harness::Method;
use vqsim::hamiltonian::random_instance;
use vqsim::scaling::{advantage_boundary, classical_cost_threshold, fit_points, FitParams, FitPoint};
use vqsim::statevector::StateVector;
use vqsim::trotter::{trotter_evolve, TrotterPlan};
use vqsim::vqs::{build_geometry, mclachlan_distance, solve_parameter_velocities, LstsqCutoff};

fn normalized_state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_map(move |v| {
        let mut s = StateVector::from_amplitudes(
            n,
            v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect(),
        )
        .unwrap();
        let norm = s.norm().max(1e-3);
        s.scale(Complex64::new(1.0 / norm, 0.0));
        s
    })
}

fn sized_state() -> impl Strategy<Value = (usize, u64, StateVector)> {
    (2usize..=5, any::<u64>()).prop_flat_map(|(n, seed)| (Just(n), Just(seed), normalized_state(n)))
}

fn max_diff(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn fit(method: Method, a: f64, b: f64, c: f64) -> FitParams {
    FitParams::from_coefficients(method, a, b, c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn energy_variance_is_nonnegative((n, seed, psi) in sized_state()) {
        let h = random_instance(n, seed).unwrap().hamiltonian;
        let e = h.expectation(&psi).unwrap();
        let e2 = h.expectation_squared(&psi).unwrap();
        prop_assert!(e2 - e * e >= -1e-12, "variance {}", e2 - e * e);
    }

    #[test]
    fn metric_is_symmetric_psd_and_solution_is_optimal(
        n in 2usize..=4,
        layers in 1usize..=3,
        seed in any::<u64>(),
        raw in prop::collection::vec(-3.0f64..3.0, 33),
        probes in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 33), 5),
    ) {
        let inst = random_instance(n, seed).unwrap();
        let ansatz = HvaAnsatz::new(&inst, layers).unwrap();
        let m = ansatz.n_params();
        let params = &raw[..m];
        let sys = build_geometry(&ansatz, &inst.hamiltonian, params).unwrap();
        let a = &sys.a_matrix;
        prop_assert!((a - a.transpose()).amax() <= 1e-12);
        let min_eig = a.clone().symmetric_eigen().eigenvalues.min();
        prop_assert!(min_eig >= -1e-10, "min eigenvalue {min_eig}");

        let x = solve_parameter_velocities(&sys, LstsqCutoff::default());
        let xv = nalgebra::DVector::from_column_slice(&x);
        let best = (a * &xv - &sys.c_vector).norm();
        for p in &probes {
            let v = nalgebra::DVector::from_column_slice(&p[..m]);
            prop_assert!(best <= (a * &v - &sys.c_vector).norm() + 1e-12);
        }
        prop_assert!(mclachlan_distance(&sys, &x).unwrap() >= 0.0);
    }

    #[test]
    fn exact_evolution_is_unitary_and_composes(
        (n, seed, psi) in sized_state(),
        t1 in 0.0f64..7.0,
        t2 in 0.0f64..7.0,
    ) {
        let h = random_instance(n, seed).unwrap().hamiltonian;
        let prop = ExactPropagator::new(&h).unwrap();
        let once = prop.evolve(&psi, t1 + t2).unwrap();
        let twice = prop.evolve(&prop.evolve(&psi, t1).unwrap(), t2).unwrap();
        prop_assert!((once.norm() - psi.norm()).abs() <= 1e-12);
        prop_assert!(max_diff(&once, &twice) <= 1e-10);
        let e0 = h.expectation(&psi).unwrap();
        prop_assert!((h.expectation(&once).unwrap() - e0).abs() <= 1e-10);
    }

    #[test]
    fn trotter_is_unitary((n, seed, psi) in sized_state(), steps in 1usize..40, t in 0.01f64..14.0) {
        let h = random_instance(n, seed).unwrap().hamiltonian;
        let out = trotter_evolve(&h, &TrotterPlan::new(steps, t).unwrap(), &psi).unwrap();
        prop_assert!((out.norm() - psi.norm()).abs() <= 1e-12);
    }

    #[test]
    fn boundary_balances_fits(
        a1 in 0.2f64..5.0, b1 in 0.0f64..2.0, c1 in 0.1f64..1.0,
        a2 in 0.2f64..5.0, b2 in 0.0f64..2.0, c2 in 1.05f64..2.0,
        n in 1.0f64..60.0,
    ) {
        let (v, t) = (fit(Method::Vqs, a1, b1, c1), fit(Method::Trotter, a2, b2, c2));
        let b = advantage_boundary(&v, &t, &[n]).unwrap();
        let (nn, star) = b.points[0];
        let (dv, dt) = (v.depth(nn, star), t.depth(nn, star));
        prop_assert!((dv - dt).abs() <= 1e-9 * dv.max(dt).max(1.0));
        // Smaller time exponent wins at long times.
        prop_assert!(b.is_vqs_advantage(n, 2.0 * star));
        prop_assert!(!b.is_vqs_advantage(n, 0.5 * star));
        prop_assert!(v.depth(n, 2.0 * star) < t.depth(n, 2.0 * star));
    }

    #[test]
    fn threshold_is_monotone_in_p(p in 0.0f64..1e4, q in 0.0f64..1e4) {
        let v = fit(Method::Vqs, 1.587, 0.997, 0.743);
        let t = fit(Method::Trotter, 3.469, 0.451, 1.287);
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        let key = |x: Option<usize>| x.unwrap_or(usize::MAX);
        let a = classical_cost_threshold(&v, &t, lo, 1..=60).unwrap();
        let b = classical_cost_threshold(&v, &t, hi, 1..=60).unwrap();
        prop_assert!(key(a) <= key(b));
    }

    #[test]
    fn fit_never_loses_to_a_constant(depths in prop::collection::vec(0.5f64..300.0, 12)) {
        let points: Vec<FitPoint> = depths
            .iter()
            .enumerate()
            .map(|(i, &d)| FitPoint { n_qubits: (2 + i % 4) as f64, t_final: (1 + i / 4) as f64, depth: d })
            .collect();
        let f = fit_points(&points, Method::Vqs).unwrap();
        let logs: Vec<f64> = depths.iter().map(|d| d.ln()).collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        let constant = (logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / logs.len() as f64).sqrt();
        prop_assert!(f.rms_log_residual <= constant + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn initial_state_matches_zero_parameters(n in 2usize..=6, layers in 1usize..4, seed in any::<u64>()) {
        let inst = random_instance(n, seed).unwrap();
        let ansatz = HvaAnsatz::new(&inst, layers).unwrap();
        let psi = ansatz.prepare_state(&vec![0.0; ansatz.n_params()]).unwrap();
        prop_assert!(max_diff(&psi, ansatz.initial_state()) <= 1e-15);
        prop_assert!((fidelity(&psi, ansatz.initial_state()).unwrap() - 1.0).abs() <= 1e-14);
    }
}
