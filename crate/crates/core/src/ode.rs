//! Adaptive Dormand–Prince 5(4) integrator for small complex systems.
//!
//! The state is a fixed-size array of complex amplitudes, which covers the
//! two-level equations (`N = 2`) and the simultaneous propagation of both
//! columns of the propagator (`N = 4`).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

// Dormand–Prince tableau.
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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 5.0;
const MIN_SHRINK: f64 = 0.2;

/// Stateful stepper. The accepted step size carries over between calls to
/// [`Integrator::advance`], so integrating a trajectory segment by segment
/// costs little more than a single long call.
#[derive(Clone, Debug)]
pub struct Integrator<const N: usize> {
    tol: Tolerances,
    h: Option<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

fn lincomb<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    let mut out = *y;
    for (w, k) in terms {
        if *w == 0.0 {
            continue;
        }
        let hw = h * w;
        for i in 0..N {
            out[i] += k[i] * hw;
        }
    }
    out
}

impl<const N: usize> Integrator<N> {
    pub fn new(tol: Tolerances) -> Self {
        Integrator {
            tol,
            h: None,
            accepted: 0,
            rejected: 0,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tol
    }

    fn error_norm(&self, y0: &[C64; N], y1: &[C64; N], err: &[C64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let scale = self.tol.atol + self.tol.rtol * y0[i].norm().max(y1[i].norm());
            acc += (err[i].norm() / scale).powi(2);
        }
        (acc / N as f64).sqrt()
    }

    fn initial_step<F>(&self, f: &F, t: f64, y: &[C64; N], f0: &[C64; N], span: f64) -> f64
    where
        F: Fn(f64, &[C64; N]) -> [C64; N],
    {
        let scale = |i: usize| self.tol.atol + self.tol.rtol * y[i].norm();
        let d0 = (0..N).map(|i| (y[i].norm() / scale(i)).powi(2)).sum::<f64>().sqrt();
        let d1 = (0..N).map(|i| (f0[i].norm() / scale(i)).powi(2)).sum::<f64>().sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = lincomb(y, h0, &[(1.0, f0)]);
        let f1 = f(t + h0, &y1);
        let d2 = (0..N)
            .map(|i| ((f1[i] - f0[i]).norm() / scale(i)).powi(2))
            .sum::<f64>()
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span.abs())
    }

    /// Integrates `dy/dt = f(t, y)` from `t0` to `t1`, overwriting `y`.
    pub fn advance<F>(&mut self, f: &F, t0: f64, y: &mut [C64; N], t1: f64) -> Result<()>
    where
        F: Fn(f64, &[C64; N]) -> [C64; N],
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(());
        }
        if span < 0.0 {
            return Err(Error::invalid("integration must run forward in time"));
        }
        let mut t = t0;
        let mut k1 = f(t, y);
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(f, t, y, &k1, span),
        };
        loop {
            let remaining = t1 - t;
            if remaining <= 1e-15 * t1.abs().max(1.0) {
                return Ok(());
            }
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration {
                    t,
                    reason: format!("step size underflow (h = {step:e})"),
                });
            }

            let k2 = f(t + C2 * step, &lincomb(y, step, &[(A21, &k1)]));
            let k3 = f(t + C3 * step, &lincomb(y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * step,
                &lincomb(y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * step,
                &lincomb(y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + step,
                &lincomb(
                    y,
                    step,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            );
            let y_new = lincomb(
                y,
                step,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + step, &y_new);
            let mut err = [C64::new(0.0, 0.0); N];
            for i in 0..N {
                err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7)
                    * step;
            }
            let en = self.error_norm(y, &y_new, &err);
            if !en.is_finite() {
                self.rejected += 1;
                h = step * MIN_SHRINK;
                continue;
            }
            let factor = if en == 0.0 {
                MAX_GROWTH
            } else {
                (SAFETY * en.powf(-0.2)).clamp(MIN_SHRINK, MAX_GROWTH)
            };
            if en <= 1.0 {
                self.accepted += 1;
                t = if last { t1 } else { t + step };
                *y = y_new;
                k1 = k7;
                // Keep the unclipped step as the hint when the last step was
                // shortened to land on t1.
                h = if last { h.max(step * factor) } else { step * factor };
                self.h = Some(h);
                if last {
                    return Ok(());
                }
            } else {
                self.rejected += 1;
                h = step * factor.min(1.0);
            }
        }
    }
}
