//! Sixth-order Magnus integrator for `dU/dt = A(t)U` with traceless 2×2 `A`.
//!
//! Each step exponentiates a traceless matrix exactly, so the step
//! propagator has unit determinant, and is unitary whenever `A` is
//! anti-Hermitian. Norm conservation for Hermitian drives therefore holds to
//! rounding error over arbitrarily long runs.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2};

/// Fixed-step control: the step is the largest value not exceeding
/// `max_step` that divides the requested span evenly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stepping {
    pub max_step: f64,
}

impl Default for Stepping {
    fn default() -> Self {
        Stepping { max_step: 0.025 }
    }
}

impl Stepping {
    pub fn new(max_step: f64) -> Result<Self> {
        if !(max_step > 0.0 && max_step.is_finite()) {
            return Err(Error::invalid(format!("step must be positive, got {max_step}")));
        }
        Ok(Stepping { max_step })
    }

    pub(crate) fn steps_for(&self, span: f64) -> usize {
        ((span / self.max_step).ceil() as usize).max(1)
    }
}

/// `exp(Ω)` for traceless `Ω`: `cosh(r) + sinh(r)/r · Ω` with `r² = −det Ω`.
pub fn expm_traceless(omega: &Mat2) -> Mat2 {
    let r2 = -omega.det();
    let (c, s) = if r2.norm() < 1e-8 {
        // Taylor series; the next terms are O(r⁶).
        let one = C64::new(1.0, 0.0);
        (
            one + r2 / 2.0 + r2 * r2 / 24.0,
            one + r2 / 6.0 + r2 * r2 / 120.0,
        )
    } else {
        let r = r2.sqrt();
        (r.cosh(), r.sinh() / r)
    };
    omega.scale(s).shift(c)
}

fn commutator(a: &Mat2, b: &Mat2) -> Mat2 {
    a.matmul(b).add(&b.matmul(a).scale(C64::new(-1.0, 0.0)))
}

const SQRT15: f64 = 3.872_983_346_207_417;

/// One step `U(t + h, t)`.
pub fn step<F>(gen: &F, t: f64, h: f64) -> Mat2
where
    F: Fn(f64) -> Mat2,
{
    let d = SQRT15 / 10.0;
    let a1 = gen(t + (0.5 - d) * h);
    let a2 = gen(t + 0.5 * h);
    let a3 = gen(t + (0.5 + d) * h);
    let re = |x: f64| C64::new(x, 0.0);
    let b1 = a2.scale(re(h));
    let b2 = a3.add(&a1.scale(re(-1.0))).scale(re(h * SQRT15 / 3.0));
    let b3 = a3
        .add(&a2.scale(re(-2.0)))
        .add(&a1)
        .scale(re(h * 10.0 / 3.0));
    let c12 = commutator(&b1, &b2);
    let left = b1.scale(re(-20.0)).add(&b3.scale(re(-1.0))).add(&c12);
    let inner = commutator(&b1, &b3.scale(re(2.0)).add(&c12));
    let right = b2.add(&inner.scale(re(-1.0 / 60.0)));
    let omega = b1
        .add(&b3.scale(re(1.0 / 12.0)))
        .add(&commutator(&left, &right).scale(re(1.0 / 240.0)));
    expm_traceless(&omega)
}

/// Propagator from `t0` to `t1` in `n` equal steps.
pub fn propagator<F>(gen: &F, t0: f64, t1: f64, n: usize) -> Mat2
where
    F: Fn(f64) -> Mat2,
{
    let h = (t1 - t0) / n as f64;
    let mut u = Mat2::identity();
    for k in 0..n {
        u = step(gen, t0 + k as f64 * h, h).matmul(&u);
    }
    u
}

/// Advances the vector `y` from `t0` to `t1` in `n` equal steps.
pub fn advance<F>(gen: &F, t0: f64, t1: f64, n: usize, y: &mut Vec2)
where
    F: Fn(f64) -> Mat2,
{
    let h = (t1 - t0) / n as f64;
    for k in 0..n {
        *y = step(gen, t0 + k as f64 * h, h).apply(y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{Integrator, Tolerances};

    fn gen(t: f64) -> Mat2 {
        let i = C64::new(0.0, 1.0);
        let g = C64::new(0.6 * (0.7 * t).cos(), 0.2 * (0.7 * t).sin());
        Mat2([[i * 0.5, -i * g], [-i * g, -i * 0.5]])
    }

    fn reference(t1: f64) -> Mat2 {
        let f = |t: f64, u: &[C64; 4]| {
            let a = gen(t);
            let c0 = a.apply(&[u[0], u[1]]);
            let c1 = a.apply(&[u[2], u[3]]);
            [c0[0], c0[1], c1[0], c1[1]]
        };
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let mut u = [one, zero, zero, one];
        let tol = Tolerances { rtol: 1e-13, atol: 1e-15 };
        Integrator::new(tol).advance(&f, 0.0, &mut u, t1).unwrap();
        Mat2::from_columns([u[0], u[1]], [u[2], u[3]])
    }

    fn dist(a: &Mat2, b: &Mat2) -> f64 {
        a.add(&b.scale(C64::new(-1.0, 0.0))).frobenius()
    }

    #[test]
    fn exponential_of_nilpotent_and_diagonal() {
        let z = C64::new(0.0, 0.0);
        let n = Mat2([[z, C64::new(2.0, 0.0)], [z, z]]);
        let e = expm_traceless(&n);
        assert_eq!(e.0[0][1], C64::new(2.0, 0.0));
        assert_eq!(e.0[0][0], C64::new(1.0, 0.0));
        let d = Mat2([[C64::new(0.0, 0.3), z], [z, C64::new(0.0, -0.3)]]);
        let e = expm_traceless(&d);
        assert!((e.0[0][0] - C64::new(0.0, 0.3).exp()).norm() < 1e-15);
    }

    #[test]
    fn sixth_order_convergence() {
        let exact = reference(6.0);
        let e1 = dist(&propagator(&gen, 0.0, 6.0, 20), &exact);
        let e2 = dist(&propagator(&gen, 0.0, 6.0, 40), &exact);
        let order = (e1 / e2).log2();
        assert!(order > 5.5, "observed order {order} ({e1:e}, {e2:e})");
    }

    #[test]
    fn step_is_unimodular() {
        let u = propagator(&gen, 0.0, 3.0, 7);
        assert!((u.det() - 1.0).norm() < 1e-14);
    }
}
