//! Directional coupler with a longitudinally modulated complex index.
//!
//! ```text
//! i db₁/dz = −κₑ b₂ + ε f(εz) b₁
//! i db₂/dz = −κₑ b₁ − ε f(εz) b₂
//! ```
//!
//! In the supermode basis `S = (b₁ + b₂)/√2`, `A = (b₁ − b₂)/√2` these are
//! the two-level equations with `ω₀ = 2κₑ` and `t = z`, so propagation is
//! delegated to [`crate::twolevel`].

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2, I};
use crate::twolevel::{propagate, DriveSpec};

/// Shape of the index modulation `f(εz)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulationProfile {
    /// `f = V e^{iεz} + V* e^{−iεz}`, a real modulation.
    HermitianCos,
    /// `f = V e^{−iεz}`: only upward transitions, favouring the A mode.
    OneSidedNegative,
    /// `f = V e^{iεz}`: only downward transitions, favouring the S mode.
    OneSidedPositive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplerSpec {
    pub kappa_e: f64,
    pub eps: f64,
    pub v: C64,
    pub profile: ModulationProfile,
}

impl CouplerSpec {
    pub fn new(kappa_e: f64, eps: f64, v: C64, profile: ModulationProfile) -> Result<Self> {
        if !(kappa_e > 0.0 && kappa_e.is_finite()) {
            return Err(Error::invalid(format!("coupling must be positive, got {kappa_e}")));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::invalid(format!("modulation frequency must be positive, got {eps}")));
        }
        Ok(CouplerSpec { kappa_e, eps, v, profile })
    }

    /// The equivalent two-level drive, `ω₀ = 2κₑ`.
    pub fn drive(&self) -> Result<DriveSpec> {
        let zero = C64::new(0.0, 0.0);
        let (v1, v2) = match self.profile {
            ModulationProfile::HermitianCos => (self.v, self.v.conj()),
            ModulationProfile::OneSidedNegative => (zero, self.v),
            ModulationProfile::OneSidedPositive => (self.v, zero),
        };
        DriveSpec::new(v1, v2, 2.0 * self.kappa_e, self.eps)
    }

    /// Generator `−iH(z)` of the waveguide-basis equations.
    pub fn guide_generator(&self, z: f64) -> Result<Mat2> {
        let ef = self.eps * self.drive()?.modulation(z);
        let k = C64::new(self.kappa_e, 0.0);
        Ok(Mat2([[-I * ef, I * k], [I * k, I * ef]]))
    }
}

/// `(b₁, b₂) ↦ ((b₁ + b₂)/√2, (b₁ − b₂)/√2)`.
pub fn supermode_transform(b1: C64, b2: C64) -> Vec2 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [(b1 + b2) * r, (b1 - b2) * r]
}

/// Inverse of [`supermode_transform`]; the map is its own inverse.
pub fn guide_transform(a1: C64, a2: C64) -> Vec2 {
    supermode_transform(a1, a2)
}

/// Coupler field along `z` in both bases.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CouplerTrajectory {
    pub z: Vec<f64>,
    /// `(S, A)` amplitudes.
    pub supermodes: Vec<Vec2>,
    /// `(b₁, b₂)` amplitudes.
    pub guides: Vec<Vec2>,
}

impl CouplerTrajectory {
    /// `|A|² / (|S|² + |A|²)` at each sample.
    pub fn antisymmetric_fraction(&self) -> Vec<f64> {
        self.supermodes
            .iter()
            .map(|a| {
                let total = a[0].norm_sqr() + a[1].norm_sqr();
                if total > 0.0 {
                    a[1].norm_sqr() / total
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn guide_powers(&self) -> Vec<(f64, f64)> {
        self.guides
            .iter()
            .map(|b| (b[0].norm_sqr(), b[1].norm_sqr()))
            .collect()
    }
}

/// Propagates the waveguide amplitudes `b0` to `z_final`, recording every
/// `record_every`.
pub fn propagate_coupler(
    spec: &CouplerSpec,
    b0: Vec2,
    z_final: f64,
    record_every: f64,
) -> Result<CouplerTrajectory> {
    if !(z_final > 0.0) {
        return Err(Error::invalid(format!("propagation length must be positive, got {z_final}")));
    }
    let drive = spec.drive()?;
    let a0 = supermode_transform(b0[0], b0[1]);
    let record = propagate(&drive, a0, z_final, record_every)?;
    let guides = record
        .amplitudes
        .iter()
        .map(|a| guide_transform(a[0], a[1]))
        .collect();
    Ok(CouplerTrajectory {
        z: record.times,
        supermodes: record.amplitudes,
        guides,
    })
}

/// Mean antisymmetric power fraction over the last tenth of the run.
pub fn mode_selectivity(trajectory: &CouplerTrajectory) -> Result<f64> {
    if trajectory.z.is_empty() {
        return Err(Error::invalid("empty trajectory"));
    }
    let fractions = trajectory.antisymmetric_fraction();
    let z_end = *trajectory.z.last().unwrap();
    let z_start = trajectory.z[0] + 0.9 * (z_end - trajectory.z[0]);
    let tail: Vec<f64> = trajectory
        .z
        .iter()
        .zip(&fractions)
        .filter(|(z, _)| **z >= z_start)
        .map(|(_, f)| *f)
        .collect();
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}
