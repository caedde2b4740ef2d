use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::floquet::{sample_propagators, states_from_samples};
use super::monodromy::{generalized_eigenvector, monodromy, MonodromyResult};
use super::{unbalance_factor, DriveSpec};
use crate::error::{Error, Result};
use crate::linalg::inner;
use crate::magnus::Stepping;

/// Minimal gap (relative to ω₀) below which a resonance counts as an exact crossing.
pub const CROSSING_GAP_REL: f64 = 1e-8;

const COARSE_POINTS: usize = 41;
const GOLDEN_TOL: f64 = 1e-13;

/// Leading-order resonance frequency `ε_N ≈ (ω₀/N)(1 + 4V₁V₂/N²)`.
pub fn resonance_estimate(v1: num_complex::Complex64, v2: num_complex::Complex64, omega0: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("resonance order must be at least 1"));
    }
    let p = v1 * v2;
    if p.im.abs() > 1e-12 * p.norm().max(1e-300) {
        return Err(Error::domain("resonance estimate needs a real coupling product V1*V2"));
    }
    let nf = n as f64;
    Ok(omega0 / nf * (1.0 + 4.0 * p.re / (nf * nf)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingKind {
    /// Degenerate quasi-energies with independent Floquet states.
    Exact,
    /// Quasi-energies repel; the minimal gap sets the Rabi frequency.
    Avoided,
    /// Quasi-energies and Floquet states coalesce.
    Exceptional,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub order: usize,
    pub kind: CrossingKind,
    /// Frequency at which the folded gap is smallest.
    pub eps_star: f64,
    /// Minimal folded gap `2Δ`.
    pub gap: f64,
    pub defect: f64,
    pub window: (f64, f64),
    pub iterations: usize,
}

impl ResonanceReport {
    pub fn half_gap(&self) -> f64 {
        0.5 * self.gap
    }

    /// Period `π/Δ` of the full-contrast population oscillation at an
    /// avoided crossing.
    pub fn rabi_period(&self) -> Option<f64> {
        match self.kind {
            CrossingKind::Avoided => Some(PI / self.half_gap()),
            _ => None,
        }
    }
}

/// Golden-section minimization of `f` on `[lo, hi]`. Returns
/// `(x_min, f(x_min), evaluations)`.
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(hi > lo) {
        return Err(Error::invalid(format!("empty bracket [{lo}, {hi}]")));
    }
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evals = 2;
    while (b - a) > tol * (1.0 + a.abs().max(b.abs())) && evals < 200 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
        evals += 1;
    }
    Ok(if fc <= fd { (c, fc, evals) } else { (d, fd, evals) })
}

/// Classifies resonance `n` by scanning `scan_width` around the leading-order
/// estimate of its frequency.
pub fn classify_resonance(drive: &DriveSpec, n: usize, scan_width: f64) -> Result<ResonanceReport> {
    let center = resonance_estimate(drive.v1, drive.v2, drive.omega0, n)?;
    if !(scan_width > 0.0) || scan_width >= 2.0 * center {
        return Err(Error::invalid(format!(
            "scan width {scan_width} must be positive and keep the window above zero"
        )));
    }
    classify_resonance_in(drive, n, center - 0.5 * scan_width, center + 0.5 * scan_width)
}

/// As [`classify_resonance`] with an explicit frequency window.
pub fn classify_resonance_in(drive: &DriveSpec, n: usize, lo: f64, hi: f64) -> Result<ResonanceReport> {
    let (eps_star, iterations) = gap_minimum(drive, lo, hi)?;
    let mono = monodromy(&drive.with_eps(eps_star))?;
    let gap = mono.gap();
    Ok(ResonanceReport {
        order: n,
        kind: crossing_kind(&mono),
        eps_star,
        gap,
        defect: mono.defect,
        window: (lo, hi),
        iterations,
    })
}

/// Coarse scan of the folded gap over `[lo, hi]` followed by golden-section
/// refinement around the single deep minimum.
fn gap_minimum(drive: &DriveSpec, lo: f64, hi: f64) -> Result<(f64, usize)> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::invalid(format!("invalid window [{lo}, {hi}]")));
    }
    let gap_at = |eps: f64| -> Result<f64> { Ok(monodromy(&drive.with_eps(eps))?.gap()) };
    let grid: Vec<f64> = (0..COARSE_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (COARSE_POINTS - 1) as f64)
        .collect();
    let gaps = grid
        .par_iter()
        .map(|&e| gap_at(e))
        .collect::<Result<Vec<f64>>>()?;

    let minima = local_minima(&gaps);
    let deep: Vec<usize> = minima
        .iter()
        .copied()
        .filter(|&i| gaps[i] < 0.1 * grid[i])
        .collect();
    if deep.len() > 1 {
        let at: Vec<String> = deep.iter().map(|&i| format!("{:.5}", grid[i])).collect();
        return Err(Error::Ambiguous(format!(
            "window [{lo}, {hi}] holds several gap minima (near eps = {})",
            at.join(", ")
        )));
    }
    let best = (0..gaps.len())
        .min_by(|&i, &j| gaps[i].total_cmp(&gaps[j]))
        .expect("non-empty grid");
    if best == 0 || best == gaps.len() - 1 {
        return Err(Error::Ambiguous(format!(
            "window [{lo}, {hi}] does not bracket a gap minimum"
        )));
    }
    let (eps_star, _, iterations) =
        golden_section_min(gap_at, grid[best - 1], grid[best + 1], GOLDEN_TOL)?;
    Ok((eps_star, iterations + COARSE_POINTS))
}

/// Outcome of an exceptional-point search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalPointReport {
    pub eps_star: f64,
    pub defect: f64,
    pub gap: f64,
    /// Residual of the Jordan chain `(R − μ)Q₂ = q₂`, when an exceptional
    /// point was found.
    pub residual: Option<f64>,
    pub iterations: usize,
    /// Whether the eigenvectors coalesce at the gap minimum.
    pub found: bool,
}

/// Looks for an exceptional point in `[lo, hi]`: the folded gap is
/// minimized and the eigenvector overlap is checked at the minimum.
pub fn find_exceptional_point(drive: &DriveSpec, lo: f64, hi: f64) -> Result<ExceptionalPointReport> {
    let (eps_star, iterations) = gap_minimum(drive, lo, hi)?;
    let mono = monodromy(&drive.with_eps(eps_star))?;
    let found = mono.is_exceptional();
    let residual = if found {
        Some(generalized_eigenvector(&mono)?.residual)
    } else {
        None
    };
    Ok(ExceptionalPointReport {
        eps_star,
        defect: mono.defect,
        gap: mono.gap(),
        residual,
        iterations,
        found,
    })
}

fn crossing_kind(mono: &MonodromyResult) -> CrossingKind {
    if mono.is_exceptional() {
        CrossingKind::Exceptional
    } else if mono.gap() <= CROSSING_GAP_REL * mono.omega0 {
        CrossingKind::Exact
    } else {
        CrossingKind::Avoided
    }
}

/// Indices `i` with `g[i−1] > g[i] ≤ g[i+1]`.
pub(crate) fn local_minima(g: &[f64]) -> Vec<usize> {
    (1..g.len().saturating_sub(1))
        .filter(|&i| g[i] < g[i - 1] && g[i] <= g[i + 1])
        .collect()
}

/// One row of a frequency sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepPoint {
    pub eps: f64,
    /// Folded quasi-energies, tracked so that index 0 stays on the branch
    /// that starts at `−ω₀/2`.
    pub mu_folded: [f64; 2],
    pub mu_unfolded: [f64; 2],
    pub mu_imag: [f64; 2],
    pub gap: f64,
    /// Unbalance factor of the tracked branch-1 Floquet state.
    pub theta: f64,
    pub defect: f64,
}

/// Sweeps the drive frequency over `eps_values` (assumed ordered). Points
/// are computed in parallel; branch labels are then tracked sequentially by
/// eigenvector overlap.
pub fn sweep(drive: &DriveSpec, eps_values: &[f64], n_samples: usize) -> Result<Vec<SweepPoint>> {
    if n_samples < 2 {
        return Err(Error::invalid("need at least two samples per period"));
    }
    if let Some(e) = eps_values.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::invalid(format!("drive frequency must be positive, got {e}")));
    }
    let raw = eps_values
        .par_iter()
        .map(|&eps| {
            let d = drive.with_eps(eps);
            let props = sample_propagators(&d, n_samples, Stepping::default())?;
            let (mono, w1, w2) = states_from_samples(&d, &props);
            let theta = [unbalance_factor(&w1)?, unbalance_factor(&w2)?];
            Ok((mono, theta))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::with_capacity(raw.len());
    let mut prev: Option<(MonodromyResult, [usize; 2], [f64; 2])> = None;
    for (mono, theta) in raw {
        let mut order = [0usize, 1];
        let mut unfolded = [mono.unfolded[0].re, mono.unfolded[1].re];
        if let Some((p, p_order, p_unf)) = &prev {
            let pv = [p.eigenvectors[p_order[0]], p.eigenvectors[p_order[1]]];
            let q = &mono.eigenvectors;
            let keep = inner(&pv[0], &q[0]).norm() + inner(&pv[1], &q[1]).norm();
            let swap = inner(&pv[0], &q[1]).norm() + inner(&pv[1], &q[0]).norm();
            if swap > keep && !mono.scalar {
                order = [1, 0];
            }
            for k in 0..2 {
                let f = mono.quasi_energies[order[k]].re;
                unfolded[k] = f + mono.eps * ((p_unf[k] - f) / mono.eps).round();
            }
        }
        out.push(SweepPoint {
            eps: mono.eps,
            mu_folded: [
                mono.quasi_energies[order[0]].re,
                mono.quasi_energies[order[1]].re,
            ],
            mu_unfolded: unfolded,
            mu_imag: [
                mono.quasi_energies[order[0]].im,
                mono.quasi_energies[order[1]].im,
            ],
            gap: mono.gap(),
            theta: theta[order[0]],
            defect: mono.defect,
        });
        prev = Some((mono, order, unfolded));
    }
    Ok(out)
}
