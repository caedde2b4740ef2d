//! Reduced two-level dynamics of the shaken well.
//!
//! In the rotating amplitudes `a = (a₁, a₂)` the equations read
//!
//! ```text
//! i da₁/dt = −(ω₀/2) a₁ + ε f(εt) a₂
//! i da₂/dt =  (ω₀/2) a₂ + ε f(εt) a₁
//! f(εt)    = V₁ e^{iεt} + V₂ e^{−iεt}
//! ```
//!
//! Everything Floquet-related (monodromy, quasi-energies, Floquet states,
//! resonances, exceptional points) is built on top of [`propagate`] and the
//! one-period propagator.

mod dynamics;
mod floquet;
mod monodromy;
mod resonance;
mod wkb;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, I};

pub use dynamics::{
    map_a_to_c, map_c_to_a, propagate, propagate_with, propagator_samples, TrajectoryRecord,
};
pub use floquet::{floquet_states, floquet_states_unchecked, unbalance_factor, FloquetState};
pub use monodromy::{
    fold, generalized_eigenvector, monodromy, monodromy_with, GeneralizedEigenvector,
    MonodromyResult, SpectrumKind, DEFECT_THRESHOLD, EP_GAP_REL, SCALAR_TOL,
};
pub use resonance::{
    classify_resonance, classify_resonance_in, find_exceptional_point, golden_section_min, resonance_estimate, sweep, CrossingKind,
    ExceptionalPointReport, ResonanceReport, SweepPoint, CROSSING_GAP_REL,
};
pub use wkb::{wkb_quasi_energies, wkb_states, WkbQuasiEnergies};

/// Harmonic displacement of the well in the complex plane,
/// `x₀(εt) = −iA₁e^{iεt} + iA₂e^{−iεt} + i(A₁ − A₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShakingPath {
    pub a1: C64,
    pub a2: C64,
    pub eps: f64,
}

impl ShakingPath {
    pub fn new(a1: C64, a2: C64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid(format!("drive frequency must be positive, got {eps}")));
        }
        Ok(ShakingPath { a1, a2, eps })
    }

    /// `x₀ = A sin(εt)`.
    pub fn sinusoidal(amplitude: f64, eps: f64) -> Result<Self> {
        let half = C64::new(amplitude / 2.0, 0.0);
        Self::new(half, half, eps)
    }

    /// `x₀ = A − A e^{−iεt}`, a circle of radius `A` touching the origin.
    pub fn circular(amplitude: f64, eps: f64) -> Result<Self> {
        Self::new(C64::new(0.0, 0.0), I * amplitude, eps)
    }

    /// A path that stays at the origin; used for frozen-well checks.
    pub fn frozen(eps: f64) -> Result<Self> {
        Self::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), eps)
    }

    pub fn eval(&self, t: f64) -> C64 {
        let ph = C64::new(0.0, self.eps * t).exp();
        -I * self.a1 * ph + I * self.a2 / ph + I * (self.a1 - self.a2)
    }

    /// Velocity `dx₀/dt`.
    pub fn velocity(&self, t: f64) -> C64 {
        let ph = C64::new(0.0, self.eps * t).exp();
        self.eps * (self.a1 * ph + self.a2 / ph)
    }

    /// The displacement stays on the real axis, i.e. `A₂ = A₁*`.
    pub fn is_hermitian(&self) -> bool {
        let scale = self.a1.norm().max(self.a2.norm()).max(1e-300);
        (self.a2 - self.a1.conj()).norm() <= 1e-14 * scale
    }

    pub fn period(&self) -> f64 {
        TAU / self.eps
    }

    /// Largest `|Im x₀(t)|` over one period, sampled on a fine phase grid.
    pub fn max_imag(&self) -> f64 {
        if self.is_hermitian() {
            return 0.0;
        }
        let n = 4096;
        (0..n)
            .map(|k| self.eval(self.period() * k as f64 / n as f64).im.abs())
            .fold(0.0, f64::max)
    }
}

/// Reduced two-level drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub v1: C64,
    pub v2: C64,
    pub omega0: f64,
    pub eps: f64,
}

impl DriveSpec {
    pub fn new(v1: C64, v2: C64, omega0: f64, eps: f64) -> Result<Self> {
        if !(omega0 > 0.0 && omega0.is_finite()) {
            return Err(Error::invalid(format!("level spacing must be positive, got {omega0}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid(format!("drive frequency must be positive, got {eps}")));
        }
        Ok(DriveSpec { v1, v2, omega0, eps })
    }

    /// `f = 2V cos(εt)`.
    pub fn hermitian(v: f64, omega0: f64, eps: f64) -> Result<Self> {
        Self::new(C64::new(v, 0.0), C64::new(v, 0.0), omega0, eps)
    }

    /// `f = iV e^{−iεt}` (`V₁ = 0`, `V₂ = iV`).
    pub fn one_sided(v: f64, omega0: f64, eps: f64) -> Result<Self> {
        Self::new(C64::new(0.0, 0.0), I * v, omega0, eps)
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        DriveSpec { eps, ..*self }
    }

    pub fn period(&self) -> f64 {
        TAU / self.eps
    }

    /// The modulation `f(εt)` evaluated at time `t`.
    pub fn modulation(&self, t: f64) -> C64 {
        let ph = C64::new(0.0, self.eps * t).exp();
        self.v1 * ph + self.v2 / ph
    }

    /// `f` is real-valued for all `t`, i.e. `V₂ = V₁*`.
    pub fn is_hermitian(&self) -> bool {
        let scale = self.v1.norm().max(self.v2.norm()).max(1e-300);
        (self.v2 - self.v1.conj()).norm() <= 1e-14 * scale
    }

    /// `V₁V₂`, which controls whether quasi-energies are real.
    pub fn coupling_product(&self) -> C64 {
        self.v1 * self.v2
    }

    pub(crate) fn product_is_real(&self) -> bool {
        let p = self.coupling_product();
        p.im.abs() <= 1e-12 * p.norm().max(1e-300)
    }

    /// Generator `A(t) = −iH(t)` of the two-level equations `da/dt = A a`.
    pub fn generator(&self, t: f64) -> Mat2 {
        let h = C64::new(0.5 * self.omega0, 0.0);
        let g = self.modulation(t) * self.eps;
        Mat2([[I * h, -I * g], [-I * g, -I * h]])
    }
}
