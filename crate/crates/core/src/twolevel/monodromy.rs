use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{propagator_samples, wkb_quasi_energies, DriveSpec};
use crate::error::{Error, Result};
use crate::linalg::{inner, norm, normalized, Mat2, Vec2, I};
use crate::magnus::Stepping;

/// Eigenvector overlap at or above which the Floquet states count as coalesced.
pub const DEFECT_THRESHOLD: f64 = 0.999;
/// Folded gap (relative to ε) below which a coalescence counts as an exceptional point.
pub const EP_GAP_REL: f64 = 1e-6;
/// `‖M − (tr M/2)·1‖ ≤ SCALAR_TOL·|tr M/2|` marks a numerically scalar monodromy.
pub const SCALAR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumKind {
    Real,
    /// At least one multiplier is off the unit circle.
    Complex,
    /// A multiplier overflowed or vanished in floating point.
    Overflow,
}

/// One-period propagator and its Floquet decomposition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonodromyResult {
    pub matrix: Mat2,
    /// Floquet multipliers `λᵢ = exp(−iμᵢT)`.
    pub multipliers: [C64; 2],
    /// Quasi-energies with the real part folded into `[0, ε)`.
    pub quasi_energies: [C64; 2],
    /// The same quasi-energies shifted by multiples of ε onto the branches
    /// connected to `∓ω₀/2`.
    pub unfolded: [C64; 2],
    /// Unit eigenvectors `q₁` (on the branch of level 1) and `q₂`.
    pub eigenvectors: [Vec2; 2],
    /// `|⟨q₁, q₂⟩|`: 0 for orthogonal Floquet states, 1 when they coalesce.
    pub defect: f64,
    pub kind: SpectrumKind,
    pub scalar: bool,
    pub eps: f64,
    pub omega0: f64,
}

/// Folds `x` into `[0, eps)`.
pub fn fold(x: f64, eps: f64) -> f64 {
    let y = x - eps * (x / eps).floor();
    if y >= eps {
        0.0
    } else {
        y
    }
}

fn unfold_near(folded: f64, target: f64, eps: f64) -> f64 {
    folded + eps * ((target - folded) / eps).round()
}

impl MonodromyResult {
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.eps
    }

    /// Distance between the folded quasi-energies on the circle of circumference ε.
    pub fn gap(&self) -> f64 {
        let d = (self.quasi_energies[0].re - self.quasi_energies[1].re).abs();
        d.min(self.eps - d)
    }

    pub fn is_exceptional(&self) -> bool {
        self.defect >= DEFECT_THRESHOLD && self.gap() <= EP_GAP_REL * self.eps
    }
}

/// Monodromy matrix with the default integrator tolerances.
pub fn monodromy(drive: &DriveSpec) -> Result<MonodromyResult> {
    monodromy_with(drive, Stepping::default())
}

pub fn monodromy_with(drive: &DriveSpec, stepping: Stepping) -> Result<MonodromyResult> {
    let period = drive.period();
    let m = propagator_samples(drive, &[period], stepping)?[0];
    Ok(decompose(drive, m))
}

const RELABEL_MARGIN: f64 = 1e-6;

pub(crate) fn decompose(drive: &DriveSpec, m: Mat2) -> MonodromyResult {
    let period = drive.period();
    let eig = m.eigen(SCALAR_TOL);
    // Label the more level-1-dominant eigenvector as q₁.
    let (mut vals, mut vecs) = (eig.values, eig.vectors);
    if vecs[1][0].norm_sqr() > vecs[0][0].norm_sqr() {
        vals.swap(0, 1);
        vecs.swap(0, 1);
    }

    // Fix the phase so the dominant component is real and positive.
    for v in vecs.iter_mut() {
        let pivot = if v[0].norm() >= v[1].norm() { v[0] } else { v[1] };
        if pivot.norm() > 0.0 {
            let ph = pivot.conj() / pivot.norm();
            *v = [v[0] * ph, v[1] * ph];
        }
    }

    let mut kind = SpectrumKind::Real;
    let mut mu = [C64::new(0.0, 0.0); 2];
    for k in 0..2 {
        let lam = vals[k];
        if !lam.is_finite() || lam.norm() == 0.0 {
            kind = SpectrumKind::Overflow;
            mu[k] = C64::new(f64::NAN, f64::NAN);
            continue;
        }
        // μ = (i/T) log λ on the principal branch.
        mu[k] = I * lam.ln() / period;
        if kind == SpectrumKind::Real && lam.norm().ln().abs() > 1e-8 {
            kind = SpectrumKind::Complex;
        }
    }

    let targets = match wkb_quasi_energies(drive) {
        Ok(w) => [w.quadrature.0, w.quadrature.1],
        Err(_) => [-0.5 * drive.omega0, 0.5 * drive.omega0],
    };
    // Strong one-sided coupling can make both states level-2 dominant; the
    // branch targets then decide the labels.
    if kind != SpectrumKind::Overflow {
        let miss = |k: usize, target: f64| {
            let f = fold(mu[k].re, drive.eps);
            (unfold_near(f, target, drive.eps) - target).abs()
        };
        let kept = miss(0, targets[0]) + miss(1, targets[1]);
        let swapped = miss(1, targets[0]) + miss(0, targets[1]);
        if swapped < kept - RELABEL_MARGIN * drive.eps {
            vals.swap(0, 1);
            vecs.swap(0, 1);
            mu.swap(0, 1);
        }
    }
    let mut folded = [C64::new(0.0, 0.0); 2];
    let mut unfolded = [C64::new(0.0, 0.0); 2];
    for k in 0..2 {
        folded[k] = C64::new(fold(mu[k].re, drive.eps), mu[k].im);
        unfolded[k] = C64::new(unfold_near(folded[k].re, targets[k], drive.eps), mu[k].im);
    }
    let defect = if eig.scalar {
        0.0
    } else {
        inner(&vecs[0], &vecs[1]).norm().min(1.0)
    };
    MonodromyResult {
        matrix: m,
        multipliers: vals,
        quasi_energies: folded,
        unfolded,
        eigenvectors: vecs,
        defect,
        kind,
        scalar: eig.scalar,
        eps: drive.eps,
        omega0: drive.omega0,
    }
}

/// Principal matrix logarithm of a 2×2 matrix, stable through coalescing
/// eigenvalues: with `M = s + K`, `K² = r²`,
/// `log M = [log s + ½log(1 − r²/s²)] + atanh(r/s)/r · K`.
pub(crate) fn log_mat2(m: &Mat2) -> Mat2 {
    let (s, k) = m.split_traceless();
    let r2 = -k.det();
    let z2 = r2 / (s * s);
    let center = s.ln() + 0.5 * (C64::new(1.0, 0.0) - z2).ln();
    let g = if z2.norm() < 1e-12 {
        (C64::new(1.0, 0.0) + z2 / 3.0) / s
    } else {
        let z = z2.sqrt();
        let atanh = 0.5 * ((C64::new(1.0, 0.0) + z) / (C64::new(1.0, 0.0) - z)).ln();
        atanh / (z * s)
    };
    k.scale(g).shift(center)
}

/// Jordan chain at an exceptional point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneralizedEigenvector {
    /// Floquet generator `R = (iε/2π)·log M`, shifted by a multiple of ε so
    /// that its coalesced eigenvalue sits on the level-2 branch.
    pub generator: Mat2,
    /// Coalesced quasi-energy (`tr R / 2`).
    pub mu: f64,
    /// The unique eigenvector `q₂`.
    pub eigenvector: Vec2,
    /// Associated vector `Q₂` with `(R − μ)Q₂ = q₂`.
    pub associated: Vec2,
    pub residual: f64,
}

/// Solves `(R − μ)Q₂ = q₂` in the least-squares sense at an exceptional point.
pub fn generalized_eigenvector(mono: &MonodromyResult) -> Result<GeneralizedEigenvector> {
    if !mono.is_exceptional() {
        return Err(Error::NotDefective {
            defect: mono.defect,
            gap: mono.gap(),
        });
    }
    let period = mono.period();
    let mut r = log_mat2(&mono.matrix).scale(I / period);
    let center = (r.trace() * 0.5).re;
    let target = mono.unfolded[1].re;
    let shift = mono.eps * ((target - center) / mono.eps).round();
    r = r.shift(C64::new(shift, 0.0));
    let (mu, nil) = r.split_traceless();

    // Null vector of the (nearly) nilpotent part.
    let h = nil.0[0][0];
    let b = nil.0[0][1];
    let c = nil.0[1][0];
    let cand_a = [b, -h];
    let cand_b = [h, c];
    let mut q = if norm(&cand_a) >= norm(&cand_b) {
        normalized(&cand_a)
    } else {
        normalized(&cand_b)
    };
    let pivot = if q[0].norm() >= q[1].norm() { q[0] } else { q[1] };
    let phase = pivot.conj() / pivot.norm();
    q = [q[0] * phase, q[1] * phase];

    let a = Matrix2::new(nil.0[0][0], nil.0[0][1], nil.0[1][0], nil.0[1][1]);
    let rhs = Vector2::new(q[0], q[1]);
    let svd = a.svd(true, true);
    let cutoff = 1e-10 * svd.singular_values.max();
    let sol = svd
        .solve(&rhs, cutoff)
        .map_err(|e| Error::InvalidState(format!("least-squares solve failed: {e}")))?;
    let big_q = [sol[0], sol[1]];
    let res_vec = nil.apply(&big_q);
    let residual = norm(&[res_vec[0] - q[0], res_vec[1] - q[1]]);
    Ok(GeneralizedEigenvector {
        generator: r,
        mu: mu.re,
        eigenvector: q,
        associated: big_q,
        residual,
    })
}
