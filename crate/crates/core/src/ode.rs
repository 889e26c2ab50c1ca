//! Embedded Dormand–Prince 4(5) integrator with adaptive step control.
//!
//! Step control follows the common RK45 recipe: RMS error norm scaled by
//! `atol + rtol·max(|y|, |y_new|)`, safety factor 0.9, step growth clamped to
//! `[0.2, 10]`, no growth right after a rejection, and the fifth-order solution
//! propagated (local extrapolation). The right-hand side may return an
//! auxiliary value alongside the derivative; the value belonging to each
//! accepted point is handed to the step observer.

const C: [f64; 6] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];

const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
];

const B: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];

/// Fifth-order weights minus embedded fourth-order weights (7 stages, FSAL).
const E: [f64; 7] = [
    -71.0 / 57600.0,
    0.0,
    71.0 / 16695.0,
    -71.0 / 1920.0,
    17253.0 / 339200.0,
    -22.0 / 525.0,
    1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Steps shorter than this abort the integration.
    pub min_step: f64,
    pub first_step: Option<f64>,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-3,
            atol: 1e-6,
            max_step: f64::INFINITY,
            min_step: 1e-12,
            first_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
}

#[derive(Debug)]
pub enum OdeError<E> {
    Rhs(E),
    StepUnderflow { time: f64, step: f64 },
}

impl<E> From<E> for OdeError<E> {
    fn from(e: E) -> Self {
        OdeError::Rhs(e)
    }
}

fn rms_norm(v: &[f64], scale: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let sum: f64 = v.iter().zip(scale).map(|(x, s)| (x / s).powi(2)).sum();
    (sum / v.len() as f64).sqrt()
}

/// Hairer–Wanner starting step estimate.
fn initial_step<F, X, E>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64],
    f0: &[f64],
    direction_span: f64,
    opts: &Dopri5Options,
    stats: &mut OdeStats,
) -> Result<f64, E>
where
    F: FnMut(f64, &[f64]) -> Result<(Vec<f64>, X), E>,
{
    if y0.is_empty() {
        return Ok(direction_span);
    }
    let scale: Vec<f64> = y0.iter().map(|y| opts.atol + y.abs() * opts.rtol).collect();
    let d0 = rms_norm(y0, &scale);
    let d1 = rms_norm(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    }
    .min(direction_span);
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let (f1, _) = rhs(t0 + h0, &y1)?;
    stats.rhs_evaluations += 1;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_norm(&diff, &scale) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(direction_span))
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end > t0`.
///
/// `on_step(t, y, aux)` is invoked for the initial point and after every
/// accepted step. Returns the final state.
pub fn integrate<F, S, X, E>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &Dopri5Options,
    mut on_step: S,
) -> Result<(Vec<f64>, OdeStats), OdeError<E>>
where
    F: FnMut(f64, &[f64]) -> Result<(Vec<f64>, X), E>,
    S: FnMut(f64, &[f64], &X),
{
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    let (mut f, mut aux) = rhs(t, &y)?;
    stats.rhs_evaluations += 1;
    on_step(t, &y, &aux);
    if t_end <= t0 {
        return Ok((y, stats));
    }

    let mut h = match opts.first_step {
        Some(h) => h,
        None => initial_step(&mut rhs, t0, &y, &f, t_end - t0, opts, &mut stats)?,
    }
    .min(opts.max_step);

    let n = y.len();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];

    while t < t_end {
        let mut rejected = false;
        loop {
            if h < opts.min_step {
                return Err(OdeError::StepUnderflow { time: t, step: h });
            }
            let mut t_new = t + h;
            if t_new >= t_end {
                t_new = t_end;
            }
            let h_eff = t_new - t;

            k[0].copy_from_slice(&f);
            for s in 1..6 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, a) in A[s][..s].iter().enumerate() {
                        acc += a * k[j][i];
                    }
                    stage[i] = y[i] + h_eff * acc;
                }
                let (ks, _) = rhs(t + C[s] * h_eff, &stage)?;
                stats.rhs_evaluations += 1;
                k[s] = ks;
            }
            let y_new: Vec<f64> = (0..n)
                .map(|i| y[i] + h_eff * (0..6).map(|s| B[s] * k[s][i]).sum::<f64>())
                .collect();
            let (f_new, aux_new) = rhs(t_new, &y_new)?;
            stats.rhs_evaluations += 1;
            k[6] = f_new;

            let scale: Vec<f64> = y
                .iter()
                .zip(&y_new)
                .map(|(a, b)| opts.atol + a.abs().max(b.abs()) * opts.rtol)
                .collect();
            let err: Vec<f64> = (0..n)
                .map(|i| h_eff * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>())
                .collect();
            let err_norm = rms_norm(&err, &scale);

            if err_norm < 1.0 {
                let factor = if err_norm == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err_norm.powf(ERROR_EXPONENT)).min(MAX_FACTOR)
                };
                let factor = if rejected { factor.min(1.0) } else { factor };
                h = (h * factor).min(opts.max_step);
                t = t_new;
                y = y_new;
                f = k[6].clone();
                aux = aux_new;
                stats.accepted_steps += 1;
                on_step(t, &y, &aux);
                break;
            }
            stats.rejected_steps += 1;
            h *= (SAFETY * err_norm.powf(ERROR_EXPONENT)).max(MIN_FACTOR);
            rejected = true;
        }
    }
    let _ = aux;
    Ok((y, stats))
}
