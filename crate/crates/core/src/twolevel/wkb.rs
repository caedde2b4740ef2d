use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::DriveSpec;
use crate::error::{Error, Result};
use crate::linalg::{Vec2, I};
use crate::quad::{adaptive_simpson, periodic_mean};

const MEAN_SAMPLES: usize = 512;

/// Adiabatic (WKB) estimates of the quasi-energies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WkbQuasiEnergies {
    /// `∓⟨λ⟩` with `λ(t) = √((ω₀/2)² + ε²f²(εt))` averaged over one period.
    pub quadrature: (f64, f64),
    /// Small-ε expansion `∓(ω₀/2)(1 + 4V₁V₂ε²/ω₀²)`.
    pub series: (f64, f64),
}

fn radicand(drive: &DriveSpec, t: f64) -> C64 {
    let f = drive.modulation(t);
    let h = 0.5 * drive.omega0;
    C64::new(h * h, 0.0) + drive.eps * drive.eps * f * f
}

fn check_branch(drive: &DriveSpec) -> Result<()> {
    if !drive.product_is_real() {
        return Err(Error::domain(
            "WKB quasi-energies need a real coupling product V1*V2; use the monodromy route",
        ));
    }
    let period = drive.period();
    for k in 0..MEAN_SAMPLES {
        let r = radicand(drive, period * k as f64 / MEAN_SAMPLES as f64);
        if r.re <= 0.0 {
            return Err(Error::domain(format!(
                "WKB radicand leaves the right half-plane ({r}); use the monodromy route"
            )));
        }
    }
    Ok(())
}

fn lambda(drive: &DriveSpec, t: f64) -> C64 {
    radicand(drive, t).sqrt()
}

pub fn wkb_quasi_energies(drive: &DriveSpec) -> Result<WkbQuasiEnergies> {
    check_branch(drive)?;
    let mean = periodic_mean(&|t| lambda(drive, t), drive.period(), MEAN_SAMPLES).re;
    let w = drive.omega0;
    let p = drive.coupling_product().re;
    let s = 0.5 * w * (1.0 + 4.0 * p * drive.eps * drive.eps / (w * w));
    Ok(WkbQuasiEnergies {
        quadrature: (-mean, mean),
        series: (-s, s),
    })
}

/// `∫₀ᵗ λ dη`, split into whole periods plus a remainder.
fn accumulated_phase(drive: &DriveSpec, mean: C64, t: f64) -> C64 {
    let period = drive.period();
    let whole = (t / period).floor();
    let rest = t - whole * period;
    let partial = adaptive_simpson(&|s| lambda(drive, s), 0.0, rest, 1e-13);
    mean * (whole * period) + partial
}

/// Adiabatic Floquet vectors `W₁^{WKB}(t)` and `W₂^{WKB}(t)`, including
/// their accumulated phase.
pub fn wkb_states(drive: &DriveSpec, t: f64) -> Result<(Vec2, Vec2)> {
    check_branch(drive)?;
    let mean = periodic_mean(&|s| lambda(drive, s), drive.period(), MEAN_SAMPLES);
    let w = drive.omega0;
    let lam = lambda(drive, t);
    let ef = drive.eps * drive.modulation(t);
    let phase = accumulated_phase(drive, mean, t);
    // μ₁ = −⟨λ⟩, μ₂ = +⟨λ⟩, so the phases are periodic.
    let p1 = (I * (phase - mean * t)).exp() / w;
    let p2 = (-I * (phase - mean * t)).exp() / w;
    let half = C64::new(0.5 * w, 0.0);
    Ok(([(half + lam) * p1, -ef * p1], [ef * p2, (half + lam) * p2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;

    #[test]
    fn undriven_levels() {
        let d = DriveSpec::hermitian(0.0, 1.0, 0.3).unwrap();
        let w = wkb_quasi_energies(&d).unwrap();
        assert_eq!(w.quadrature, (-0.5, 0.5));
        assert_eq!(w.series, (-0.5, 0.5));
    }

    #[test]
    fn quadrature_matches_series_at_small_eps() {
        let d = DriveSpec::hermitian(0.5, 1.0, 0.05).unwrap();
        let w = wkb_quasi_energies(&d).unwrap();
        assert!((w.series.0 + 0.50125).abs() < 1e-15);
        assert!((w.quadrature.0 - w.series.0).abs() < 1e-5);
        assert!((w.quadrature.0 + w.quadrature.1).abs() < 1e-15);
    }

    #[test]
    fn one_sided_drive_gives_exact_levels() {
        let d = DriveSpec::one_sided(0.5, 1.0, 0.17).unwrap();
        let w = wkb_quasi_energies(&d).unwrap();
        assert!((w.quadrature.0 + 0.5).abs() < 1e-14);
    }

    #[test]
    fn complex_product_is_a_domain_error() {
        let d = DriveSpec::new(C64::new(0.3, 0.0), C64::new(0.0, 0.4), 1.0, 0.2).unwrap();
        assert!(matches!(wkb_quasi_energies(&d), Err(Error::Domain(_))));
        let strong = DriveSpec::new(C64::new(0.0, 3.0), C64::new(0.0, 3.0), 1.0, 0.5).unwrap();
        assert!(matches!(wkb_quasi_energies(&strong), Err(Error::Domain(_))));
    }

    #[test]
    fn initial_vector_hand_value() {
        let d = DriveSpec::hermitian(0.5, 1.0, 0.1).unwrap();
        let (w1, w2) = wkb_states(&d, 0.0).unwrap();
        let lam0 = (0.25f64 + 0.01).sqrt();
        assert!((w1[0] - C64::new(0.5 + lam0, 0.0)).norm() < 1e-15);
        assert!((w1[1] - C64::new(-0.1, 0.0)).norm() < 1e-15);
        assert!((w2[1] - C64::new(0.5 + lam0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn states_are_frozen_eigenvectors_and_periodic() {
        let d = DriveSpec::new(C64::new(0.25, 0.0), C64::new(1.0, 0.0), 1.0, 0.12).unwrap();
        for k in 0..7 {
            let t = 3.1 * k as f64;
            let (w1, w2) = wkb_states(&d, t).unwrap();
            let h = 0.5 * d.omega0;
            let g = d.eps * d.modulation(t);
            let lam = radicand(&d, t).sqrt();
            let r1 = [-h * w1[0] + g * w1[1] + lam * w1[0], g * w1[0] + h * w1[1] + lam * w1[1]];
            let r2 = [-h * w2[0] + g * w2[1] - lam * w2[0], g * w2[0] + h * w2[1] - lam * w2[1]];
            assert!(norm(&r1) < 1e-12 * norm(&w1));
            assert!(norm(&r2) < 1e-12 * norm(&w2));
        }
        let (a, _) = wkb_states(&d, 0.0).unwrap();
        let (b, _) = wkb_states(&d, d.period()).unwrap();
        assert!((a[0] - b[0]).norm() < 1e-10);
    }

    #[test]
    fn adiabatic_limit_is_level_dominant() {
        let d = DriveSpec::hermitian(0.5, 1.0, 1e-3).unwrap();
        let (w1, w2) = wkb_states(&d, 17.0).unwrap();
        assert!(w1[1].norm() / w1[0].norm() < 2e-3);
        assert!(w2[0].norm() / w2[1].norm() < 2e-3);
    }
}
