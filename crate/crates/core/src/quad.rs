//! Small quadrature helpers.

use num_complex::Complex64 as C64;

/// Adaptive Simpson integration of a complex integrand to absolute tolerance `tol`.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> C64
where
    F: Fn(f64) -> C64,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(f: &F, a: f64, b: f64, fa: C64, fm: C64, fb: C64, whole: C64, tol: f64, depth: u32) -> C64
where
    F: Fn(f64) -> C64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Mean of a periodic function over one period by the trapezoidal rule,
/// which converges geometrically for smooth periodic integrands.
pub fn periodic_mean<F>(f: &F, period: f64, n: usize) -> C64
where
    F: Fn(f64) -> C64,
{
    let h = period / n as f64;
    (0..n).map(|k| f(k as f64 * h)).sum::<C64>() / n as f64
}

/// Composite trapezoidal rule on uniformly spaced samples.
pub fn trapezoid(samples: &[C64], dx: f64) -> C64 {
    match samples.len() {
        0 | 1 => C64::new(0.0, 0.0),
        n => {
            let inner: C64 = samples[1..n - 1].iter().sum();
            (inner + 0.5 * (samples[0] + samples[n - 1])) * dx
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_gaussian() {
        let f = |x: f64| C64::new((-x * x).exp(), 0.0);
        let v = adaptive_simpson(&f, -10.0, 10.0, 1e-13);
        assert!((v.re - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn periodic_mean_of_cos_squared() {
        let f = |t: f64| C64::new(t.cos().powi(2), 0.0);
        let m = periodic_mean(&f, std::f64::consts::TAU, 16);
        assert!((m.re - 0.5).abs() < 1e-15);
    }
}
