//! Supersymmetric double well with two bound states.
//!
//! ```text
//! V(x)  = −2ω₀[σ₁²cosh²(σ₂x) + σ₂²sinh²(σ₁x)] / D(x)²
//! D(x)  = σ₂ sinh(σ₁x) sinh(σ₂x) − σ₁ cosh(σ₁x) cosh(σ₂x)
//! u₁(x) = N₁ cosh(σ₂x) / D(x),   E₁ = −σ₁²
//! u₂(x) = N₂ sinh(σ₁x) / D(x),   E₂ = −σ₂²
//! ```
//!
//! All evaluations go through forms scaled by `e^{−(σ₁+σ₂)|Re z|}`, so they
//! stay finite far out on the real axis and anywhere inside the
//! analyticity stripe.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::twolevel::{DriveSpec, ShakingPath};

/// Integration cut-off for the normalization and coupling integrals.
const TAIL: f64 = 40.0;
const POLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellSpec {
    pub sigma1: f64,
    pub sigma2: f64,
    pub e1: f64,
    pub e2: f64,
    pub omega0: f64,
    /// Normalization constants, negative so that `u₁(0) > 0` and `u₂′(0) > 0`.
    pub n1: f64,
    pub n2: f64,
    /// `κ = ∫u₂ u₁′ dx`.
    pub kappa: f64,
}

/// Scaled building blocks at `w` with `Re w ≥ 0`.
struct Blocks {
    /// `cosh(σ₂w)/D`, `sinh(σ₂w)/D`, `cosh(σ₁w)/D`, `sinh(σ₁w)/D`.
    c2: C64,
    s2: C64,
    c1: C64,
    s1: C64,
    /// `sinh(σ₁w)cosh(σ₂w)/D`, which is O(1).
    s1c2: C64,
    /// `V(w)`.
    v: C64,
}

fn blocks(s1: f64, s2: f64, omega0: f64, w: C64) -> Result<Blocks> {
    let one = C64::new(1.0, 0.0);
    let p1 = (-2.0 * s1 * w).exp();
    let p2 = (-2.0 * s2 * w).exp();
    let dbr = s2 * (one - p1) * (one - p2) - s1 * (one + p1) * (one + p2);
    if dbr.norm() < POLE_TOL {
        return Err(Error::PoleProximity { re: w.re, im: w.im });
    }
    let e1 = (-s1 * w).exp();
    let e2 = (-s2 * w).exp();
    let num = s1 * s1 * p1 * (one + p2) * (one + p2) + s2 * s2 * p2 * (one - p1) * (one - p1);
    Ok(Blocks {
        c2: 2.0 * e1 * (one + p2) / dbr,
        s2: 2.0 * e1 * (one - p2) / dbr,
        c1: 2.0 * e2 * (one + p1) / dbr,
        s1: 2.0 * e2 * (one - p1) / dbr,
        s1c2: (one - p1) * (one + p2) / dbr,
        v: -8.0 * omega0 * num / (dbr * dbr),
    })
}

/// Reflects `z` into the right half-plane; returns the reflected point and
/// the sign used.
fn reflect(z: C64) -> (C64, f64) {
    if z.re >= 0.0 {
        (z, 1.0)
    } else {
        (-z, -1.0)
    }
}

/// Values of an eigenfunction and its derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenValue {
    pub value: C64,
    pub derivative: C64,
}

impl WellSpec {
    /// Builds the well and fixes normalizations and the coupling numerically.
    pub fn new(sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma1 > sigma2 && sigma1.is_finite()) {
            return Err(Error::invalid(format!(
                "need sigma1 > sigma2 > 0, got sigma1 = {sigma1}, sigma2 = {sigma2}"
            )));
        }
        let mut spec = WellSpec {
            sigma1,
            sigma2,
            e1: -sigma1 * sigma1,
            e2: -sigma2 * sigma2,
            omega0: sigma1 * sigma1 - sigma2 * sigma2,
            n1: -1.0,
            n2: -1.0,
            kappa: 0.0,
        };
        let n1 = spec.integrate(|x| Ok(spec.eigenfunction(1, x)?.value.powi(2)), 1e-14)?;
        let n2 = spec.integrate(|x| Ok(spec.eigenfunction(2, x)?.value.powi(2)), 1e-14)?;
        spec.n1 = -1.0 / n1.re.sqrt();
        spec.n2 = -1.0 / n2.re.sqrt();
        spec.kappa = coupling_kappa(&spec)?;
        Ok(spec)
    }

    /// The well of the reference configuration, `σ₁ = √3`, `σ₂ = √2`
    /// (so `ω₀ = 1`).
    pub fn reference() -> Self {
        Self::new(3f64.sqrt(), 2f64.sqrt()).expect("valid reference well")
    }

    /// `∫ g(x) dx` over the real line, cut at `±TAIL`.
    fn integrate<F>(&self, g: F, tol: f64) -> Result<C64>
    where
        F: Fn(C64) -> Result<C64>,
    {
        // Unit panels, so that the adaptive rule never sees a nearly empty
        // coarse sample of the localized integrand.
        let failure = std::cell::RefCell::new(None);
        let h = |x: f64| match g(C64::new(x, 0.0)) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        };
        let panels = (2.0 * TAIL) as usize;
        let total: C64 = (0..panels)
            .map(|k| {
                let a = -TAIL + k as f64;
                adaptive_simpson(&h, a, a + 1.0, tol / panels as f64)
            })
            .sum();
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(total),
        }
    }

    /// `V(z)`.
    pub fn potential(&self, z: C64) -> Result<C64> {
        let (w, _) = reflect(z);
        Ok(blocks(self.sigma1, self.sigma2, self.omega0, w)?.v)
    }

    /// `uₙ(z)` and `uₙ′(z)` for `which ∈ {1, 2}`.
    pub fn eigenfunction(&self, which: u8, z: C64) -> Result<EigenValue> {
        let (w, s) = reflect(z);
        let b = blocks(self.sigma1, self.sigma2, self.omega0, w)?;
        let (value, derivative) = match which {
            1 => {
                let v = self.n1 * b.c2;
                let d = self.n1 * (self.sigma2 * b.s2 + self.omega0 * b.c2 * b.s1c2);
                // u₁ is even.
                (v, d * s)
            }
            2 => {
                let v = self.n2 * b.s1;
                let d = self.n2 * (self.sigma1 * b.c1 + self.omega0 * b.s1 * b.s1c2);
                // u₂ is odd.
                (v * s, d)
            }
            _ => {
                return Err(Error::invalid(format!(
                    "the well has two bound states, asked for {which}"
                )))
            }
        };
        Ok(EigenValue { value, derivative })
    }

    pub fn energy(&self, which: u8) -> f64 {
        if which == 1 {
            self.e1
        } else {
            self.e2
        }
    }

    /// `∫uₙ(x − x₀)u_m(x − x₀) dx` along the real axis (bilinear, no
    /// conjugation). Equals `δₙₘ` for shifts inside the stripe.
    pub fn shifted_overlap(&self, n: u8, m: u8, shift: C64) -> Result<C64> {
        self.integrate(
            |x| Ok(self.eigenfunction(n, x - shift)?.value * self.eigenfunction(m, x - shift)?.value),
            1e-12,
        )
    }

    /// `max |−u″ + (V − E)u| / max |u|` on a periodic grid of spacing `dx`
    /// over `[−half_width, half_width)`, with the second derivative taken
    /// spectrally.
    pub fn eigenfunction_residual(&self, which: u8, half_width: f64, dx: f64) -> Result<f64> {
        let n = (2.0 * half_width / dx).round() as usize;
        if n < 16 {
            return Err(Error::invalid("residual grid needs at least 16 points"));
        }
        let h = 2.0 * half_width / n as f64;
        let xs: Vec<f64> = (0..n).map(|k| -half_width + k as f64 * h).collect();
        let u: Vec<C64> = xs
            .iter()
            .map(|&x| Ok(self.eigenfunction(which, C64::new(x, 0.0))?.value))
            .collect::<Result<_>>()?;
        let d2 = spectral_second_derivative(&u, h);
        let e = self.energy(which);
        let mut worst: f64 = 0.0;
        let mut top: f64 = 0.0;
        for (k, &x) in xs.iter().enumerate() {
            let v = self.potential(C64::new(x, 0.0))?;
            let r = -d2[k] + (v - e) * u[k];
            worst = worst.max(r.norm());
            top = top.max(u[k].norm());
        }
        Ok(worst / top)
    }
}

/// `f″` on a periodic grid via FFT.
pub(crate) fn spectral_second_derivative(f: &[C64], dx: f64) -> Vec<C64> {
    let n = f.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf = f.to_vec();
    fwd.process(&mut buf);
    let dk = std::f64::consts::TAU / (n as f64 * dx);
    for (j, c) in buf.iter_mut().enumerate() {
        let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        let k = m * dk;
        *c *= -k * k / n as f64;
    }
    inv.process(&mut buf);
    buf
}

/// `κ = ∫u₂u₁′ dx`, checked against a second evaluation at tighter
/// tolerance and against `∫u₁u₂′ dx = −κ`.
pub fn coupling_kappa(spec: &WellSpec) -> Result<f64> {
    let integrand = |x: C64| {
        Ok(spec.eigenfunction(2, x)?.value * spec.eigenfunction(1, x)?.derivative)
    };
    let coarse = spec.integrate(integrand, 1e-10)?;
    let fine = spec.integrate(integrand, 1e-13)?;
    if (coarse - fine).norm() > 1e-6 {
        return Err(Error::Accuracy(format!(
            "coupling integral not converged ({} vs {})",
            coarse.re, fine.re
        )));
    }
    let reverse = spec.integrate(
        |x| Ok(spec.eigenfunction(1, x)?.value * spec.eigenfunction(2, x)?.derivative),
        1e-13,
    )?;
    if (reverse + fine).norm() > 1e-6 {
        return Err(Error::Accuracy(format!(
            "integration by parts fails for the coupling ({} vs {})",
            fine.re, reverse.re
        )));
    }
    Ok(fine.re)
}

/// Diagonal coupling `∫uₙuₙ′ dx`, which vanishes for a bound state.
pub fn diagonal_coupling(spec: &WellSpec, which: u8) -> Result<f64> {
    Ok(spec
        .integrate(
            |x| {
                let e = spec.eigenfunction(which, x)?;
                Ok(e.value * e.derivative)
            },
            1e-13,
        )?
        .re)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripeReport {
    /// Smallest `|Im z|` among the poles of the potential.
    pub half_width: f64,
    /// A pole attaining it.
    pub nearest_pole: (f64, f64),
    pub max_imag: f64,
    pub ok: bool,
}

/// Locates the analyticity stripe of the potential and checks that the path
/// stays within 90% of it.
pub fn validate_stripe(spec: &WellSpec, path: &ShakingPath) -> StripeReport {
    let (s1, s2) = (spec.sigma1, spec.sigma2);
    let d = |z: C64| s2 * (s1 * z).sinh() * (s2 * z).sinh() - s1 * (s1 * z).cosh() * (s2 * z).cosh();
    let dd = |z: C64| -spec.omega0 * (s1 * z).sinh() * (s2 * z).cosh();
    // Scaled modulus so that the scan is not dominated by exponential growth.
    let scaled = |z: C64| d(z).norm() / (1.0 + ((s1 + s2) * z.re.abs()).exp());

    // D is even with real Taylor coefficients, so poles come in ±z, ±z̄; scan
    // the first quadrant.
    let (nx, ny) = (200usize, 200usize);
    let (xmax, ymax) = (4.0, 2.0 * std::f64::consts::PI / s2);
    let at = |i: usize, j: usize| C64::new(xmax * i as f64 / nx as f64, ymax * j as f64 / ny as f64);
    let grid: Vec<Vec<f64>> = (0..=nx)
        .map(|i| (0..=ny).map(|j| scaled(at(i, j))).collect())
        .collect();
    let mut best: Option<C64> = None;
    for i in 0..=nx {
        for j in 0..=ny {
            let g = grid[i][j];
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) != (0, 0)
                        && (0..=nx as i64).contains(&ii)
                        && (0..=ny as i64).contains(&jj)
                        && grid[ii as usize][jj as usize] < g
                    {
                        is_min = false;
                    }
                }
            }
            if !is_min {
                continue;
            }
            let mut z = at(i, j);
            for _ in 0..60 {
                let step = d(z) / dd(z);
                if !step.is_finite() {
                    break;
                }
                z -= step;
                if step.norm() < 1e-15 * (1.0 + z.norm()) {
                    break;
                }
            }
            if d(z).norm() < 1e-10 * (1.0 + (s1 * z).cosh().norm() * (s2 * z).cosh().norm())
                && best.is_none_or(|b| z.im.abs() < b.im.abs())
            {
                best = Some(z);
            }
        }
    }
    let pole = best.unwrap_or(C64::new(0.0, f64::INFINITY));
    let half_width = pole.im.abs();
    let max_imag = path.max_imag();
    StripeReport {
        half_width,
        nearest_pole: (pole.re.abs(), half_width),
        max_imag,
        ok: max_imag < 0.9 * half_width,
    }
}

/// Two-level drive `V₁ = κA₁`, `V₂ = κA₂` of a shaking path.
pub fn reduce_to_drive(spec: &WellSpec, path: &ShakingPath) -> Result<DriveSpec> {
    let report = validate_stripe(spec, path);
    if !report.ok {
        return Err(Error::StripeViolation {
            max_im: report.max_imag,
            half_width: report.half_width,
        });
    }
    DriveSpec::new(spec.kappa * path.a1, spec.kappa * path.a2, spec.omega0, path.eps)
}

/// Spatial grid and time step for the wave-equation solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dt: f64,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize, dt: f64) -> Result<Self> {
        if !(x_max > x_min) {
            return Err(Error::invalid(format!("empty domain [{x_min}, {x_max}]")));
        }
        if n_points < 128 {
            return Err(Error::invalid(format!("need at least 128 grid points, got {n_points}")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        Ok(GridSpec { x_min, x_max, n_points, dt })
    }

    /// `−8 < x < 8` with 256 points and `dt = 0.01`.
    pub fn reference() -> Self {
        GridSpec {
            x_min: -8.0,
            x_max: 8.0,
            n_points: 256,
            dt: 0.01,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n_points).map(|k| self.x_min + k as f64 * dx).collect()
    }
}
