//! Dormand–Prince 5(4) with FSAL and embedded error control, specialised to
//! small fixed-size complex states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at z = {z} (h = {h:e})")]
    StepUnderflow { z: f64, h: f64 },
    #[error("exceeded {max_steps} steps before z = {z}")]
    TooManySteps { z: f64, max_steps: usize },
    #[error("non-finite state at z = {z}")]
    NonFinite { z: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub rtol: f64,
    /// Absolute tolerance on amplitudes, W^½.
    pub atol: f64,
    /// Largest allowed step, cells.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-14,
            max_step: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State<const N: usize> = [Complex64; N];

#[inline]
fn combine<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (w, k) in terms {
        let s = h * w;
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += ki * s;
        }
    }
    out
}

fn error_norm<const N: usize>(
    y: &State<N>,
    y_new: &State<N>,
    err: &State<N>,
    tol: &Tolerances,
) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let sc = tol.atol + tol.rtol * y[i].norm().max(y_new[i].norm());
            (err[i].norm() / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    z: f64,
    y: &State<N>,
    k1: &State<N>,
    span: f64,
    tol: &Tolerances,
) -> f64
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    let scale = |v: &State<N>| -> f64 {
        let s: f64 = (0..N)
            .map(|i| (v[i].norm() / (tol.atol + tol.rtol * y[i].norm())).powi(2))
            .sum();
        (s / N as f64).sqrt()
    };
    let d0 = scale(y);
    let d1 = scale(k1);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1 = combine(y, h0, &[(1.0, k1)]);
    let k2 = f(z + h0, &y1);
    let diff: State<N> = std::array::from_fn(|i| k2[i] - k1[i]);
    let d2 = scale(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `dy/dz = f(z, y)` from `z0` to `z1`, returning the final state
/// and a step size suitable for continuing past `z1`.
pub fn integrate<const N: usize, F>(
    mut f: F,
    z0: f64,
    z1: f64,
    y0: State<N>,
    h_start: Option<f64>,
    tol: &Tolerances,
) -> Result<(State<N>, f64, StepStats), OdeError>
where
    F: FnMut(f64, &State<N>) -> State<N>,
{
    let mut stats = StepStats::default();
    let span = z1 - z0;
    if span <= 0.0 {
        return Ok((y0, h_start.unwrap_or(1.0), stats));
    }
    let max_step = tol.max_step.unwrap_or(f64::INFINITY).min(span);
    let mut z = z0;
    let mut y = y0;
    let mut k1 = f(z, &y);
    stats.evaluations += 1;
    let mut h = match h_start {
        Some(h) if h > 0.0 => h,
        _ => {
            stats.evaluations += 1;
            initial_step(&mut f, z, &y, &k1, span, tol)
        }
    }
    .min(max_step);
    let mut last_rejected = false;

    loop {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(OdeError::TooManySteps {
                z,
                max_steps: tol.max_steps,
            });
        }
        let remaining = z1 - z;
        let finishing = h >= remaining;
        let h_try = if finishing { remaining } else { h };
        if h_try < 1e-12 * z1.abs().max(1.0) && !finishing {
            return Err(OdeError::StepUnderflow { z, h: h_try });
        }

        let k2 = f(z + C2 * h_try, &combine(&y, h_try, &[(A21, &k1)]));
        let k3 = f(
            z + C3 * h_try,
            &combine(&y, h_try, &[(A31, &k1), (A32, &k2)]),
        );
        let k4 = f(
            z + C4 * h_try,
            &combine(&y, h_try, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            z + C5 * h_try,
            &combine(&y, h_try, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            z + h_try,
            &combine(
                &y,
                h_try,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = combine(
            &y,
            h_try,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(z + h_try, &y_new);
        stats.evaluations += 6;

        let err_vec: State<N> = std::array::from_fn(|i| {
            (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h_try
        });
        let err = error_norm(&y, &y_new, &err_vec, tol);
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            if h_try < 1e-12 {
                return Err(OdeError::NonFinite { z });
            }
            h = 0.1 * h_try;
            stats.rejected += 1;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            stats.accepted += 1;
            z = if finishing { z1 } else { z + h_try };
            y = y_new;
            k1 = k7;
            let mut fac = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
            };
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            let h_next = (h_try * fac).min(tol.max_step.unwrap_or(f64::INFINITY));
            if finishing {
                // report the step we would have taken, not the truncated one
                return Ok((y, h_next.max(h), stats));
            }
            h = h_next;
        } else {
            stats.rejected += 1;
            last_rejected = true;
            h = h_try * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
}
