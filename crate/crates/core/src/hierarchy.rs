//! Truncated Fourier hierarchy for the Floquet coefficients.
//!
//! Writing a Floquet solution as `a(t) = e^{−iμt} Σₙ (Aₙ, Bₙ) e^{−inεt}`
//! turns the two-level equations into the infinite eigenproblem
//!
//! ```text
//! μAₙ = −(nε + ω₀/2)Aₙ + ε(V₁Bₙ₊₁ + V₂Bₙ₋₁)
//! μBₙ = −(nε − ω₀/2)Bₙ + ε(V₁Aₙ₊₁ + V₂Aₙ₋₁)
//! ```
//!
//! which is truncated to `|n| ≤ N` here. It gives quasi-energies without any
//! time stepping and serves as an independent check of the monodromy route.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::twolevel::{fold, wkb_quasi_energies, DriveSpec};

/// Margin (in units of ε) kept between a trusted eigenvalue and the edge of
/// the truncated band, on top of `ceil(ω₀/ε)`.
const EDGE_MARGIN: usize = 8;
const RESIDUAL_REL: f64 = 1e-8;
/// Class assignment tolerance relative to ε.
pub const DEDUP_TOL_REL: f64 = 1e-8;
/// Eigenvalues closer than this (relative to ε) are grouped into one class
/// before the class spread is checked.
const CLUSTER_TOL_REL: f64 = 1e-6;

/// Dense hierarchy matrix `H` with `Hv = μv`.
///
/// Unknowns are ordered `(A₋N, B₋N, A₋N₊₁, B₋N₊₁, …, A_N, B_N)`.
#[derive(Clone, Debug)]
pub struct HierarchyMatrix {
    pub n_trunc: usize,
    pub dim: usize,
    pub entries: DMatrix<C64>,
    pub drive: DriveSpec,
}

impl HierarchyMatrix {
    /// Row/column of `Aₙ`.
    pub fn index_a(&self, n: i64) -> Option<usize> {
        let k = n + self.n_trunc as i64;
        (0..=2 * self.n_trunc as i64).contains(&k).then(|| 2 * k as usize)
    }

    /// Row/column of `Bₙ`.
    pub fn index_b(&self, n: i64) -> Option<usize> {
        self.index_a(n).map(|i| i + 1)
    }

    /// Packs coefficient arrays indexed `−N..=N` into a hierarchy vector.
    pub fn pack(&self, a: &[C64], b: &[C64]) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim);
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            v[2 * k] = *x;
            v[2 * k + 1] = *y;
        }
        v
    }

    /// `‖Hv − μv‖ / ‖v‖`.
    pub fn residual(&self, mu: C64, v: &DVector<C64>) -> f64 {
        let r = &self.entries * v - v * mu;
        r.norm() / v.norm().max(1e-300)
    }
}

/// `2·ceil(ω₀/ε) + 16`.
pub fn default_truncation(drive: &DriveSpec) -> usize {
    2 * (drive.omega0 / drive.eps).ceil() as usize + 2 * EDGE_MARGIN
}

fn min_truncation(drive: &DriveSpec) -> usize {
    (drive.omega0 / drive.eps).ceil() as usize + EDGE_MARGIN
}

pub fn build_matrix(drive: &DriveSpec, n_trunc: usize) -> Result<HierarchyMatrix> {
    let required = min_truncation(drive);
    if n_trunc < required {
        return Err(Error::TruncationTooSmall { n_trunc, required });
    }
    let dim = 2 * (2 * n_trunc + 1);
    let mut h = DMatrix::zeros(dim, dim);
    let eps = drive.eps;
    let half = 0.5 * drive.omega0;
    let nt = n_trunc as i64;
    for (k, n) in (-nt..=nt).enumerate() {
        let (ia, ib) = (2 * k, 2 * k + 1);
        h[(ia, ia)] = C64::new(-(n as f64 * eps + half), 0.0);
        h[(ib, ib)] = C64::new(-(n as f64 * eps - half), 0.0);
        if n < nt {
            h[(ia, ib + 2)] = drive.v1 * eps;
            h[(ib, ia + 2)] = drive.v1 * eps;
        }
        if n > -nt {
            h[(ia, ib - 2)] = drive.v2 * eps;
            h[(ib, ia - 2)] = drive.v2 * eps;
        }
    }
    Ok(HierarchyMatrix {
        n_trunc,
        dim,
        entries: h,
        drive: *drive,
    })
}

/// One of the two quasi-energy classes of the hierarchy spectrum.
#[derive(Clone, Debug)]
pub struct QuasiEnergyClass {
    /// Representative eigenvalue, on the branch nearest `∓ω₀/2`.
    pub mu: C64,
    pub folded: f64,
    /// Eigenvector of the representative, unit norm.
    pub vector: DVector<C64>,
    pub residual: f64,
    /// Number of trusted eigenvalues folding onto this class.
    pub members: usize,
}

impl QuasiEnergyClass {
    /// Splits the eigenvector into `(Aₙ, Bₙ)` arrays for `n = −N..=N`.
    pub fn coefficients(&self) -> (Vec<C64>, Vec<C64>) {
        let a = self.vector.iter().step_by(2).copied().collect();
        let b = self.vector.iter().skip(1).step_by(2).copied().collect();
        (a, b)
    }
}

#[derive(Clone, Debug)]
pub struct HierarchySpectrum {
    pub classes: [QuasiEnergyClass; 2],
    /// Eigenvalues far enough from the truncation edge to be trusted.
    pub interior: Vec<C64>,
    /// Largest distance (on the ε-circle) of a trusted eigenvalue from the
    /// class it was assigned to.
    pub spread: f64,
}

/// Eigen-decomposes the hierarchy and groups the trusted eigenvalues into
/// the two quasi-energy classes.
pub fn solve_quasi_energies(h: &HierarchyMatrix) -> Result<HierarchySpectrum> {
    let drive = &h.drive;
    let eps = drive.eps;
    let scale = h.entries.norm();
    let schur = Schur::try_new(h.entries.clone(), 1e-15 * scale.max(1.0), 10_000 * h.dim)
        .ok_or(Error::Eigensolver { residual: f64::NAN })?;
    let values = schur
        .eigenvalues()
        .ok_or(Error::Eigensolver { residual: f64::NAN })?;

    let limit = (h.n_trunc - min_truncation(drive)) as f64 * eps;
    let interior: Vec<C64> = values
        .iter()
        .copied()
        .filter(|m| m.re.abs() + 0.5 * drive.omega0 <= limit + 1e-9 * eps)
        .collect();
    if interior.is_empty() {
        return Err(Error::TruncationTooSmall {
            n_trunc: h.n_trunc,
            required: default_truncation(drive),
        });
    }

    let targets = match wkb_quasi_energies(drive) {
        Ok(w) => [w.quadrature.0, w.quadrature.1],
        Err(_) => [-0.5 * drive.omega0, 0.5 * drive.omega0],
    };
    let circ = |x: f64, y: f64| {
        let d = fold(x - y, eps);
        d.min(eps - d)
    };
    let nearest = |set: &[C64], target: f64| {
        set.iter()
            .copied()
            .min_by(|a, b| (a.re - target).abs().total_cmp(&(b.re - target).abs()))
    };
    // Split the trusted eigenvalues into the class of the copy nearest the
    // first target and the rest.
    let seed = nearest(&interior, targets[0]).expect("non-empty");
    let (first, second): (Vec<C64>, Vec<C64>) = interior
        .iter()
        .partition(|m| circ(m.re, seed.re) + (m.im - seed.im).abs() <= CLUSTER_TOL_REL * eps);
    let mut groups = [first, second];
    if groups[1].is_empty() {
        // Degenerate spectrum: both classes share one set of eigenvalues.
        groups[1] = groups[0].clone();
    }
    let solve_group = |group: &[C64], target: f64| -> Result<QuasiEnergyClass> {
        let mu = nearest(group, target).expect("non-empty");
        let (vector, residual) = inverse_iteration(h, mu)?;
        if residual > RESIDUAL_REL * scale {
            return Err(Error::Eigensolver {
                residual: residual / scale,
            });
        }
        Ok(QuasiEnergyClass {
            mu,
            folded: fold(mu.re, eps),
            vector,
            residual,
            members: group.len(),
        })
    };
    let mut classes = vec![
        solve_group(&groups[0], targets[0])?,
        solve_group(&groups[1], targets[1])?,
    ];
    // Class 0 is the level-1 dominant one, as for the monodromy.
    if level_one_weight(&classes[1].vector) > level_one_weight(&classes[0].vector) {
        groups.swap(0, 1);
        classes = vec![
            solve_group(&groups[0], targets[0])?,
            solve_group(&groups[1], targets[1])?,
        ];
    }
    let mut spread: f64 = 0.0;
    for (group, class) in groups.iter().zip(&classes) {
        for m in group {
            spread = spread.max(circ(m.re, class.mu.re) + (m.im - class.mu.im).abs());
        }
    }
    let c1 = classes.pop().expect("two classes");
    let c0 = classes.pop().expect("two classes");
    Ok(HierarchySpectrum {
        classes: [c0, c1],
        interior,
        spread,
    })
}

fn level_one_weight(v: &DVector<C64>) -> f64 {
    let a: f64 = v.iter().step_by(2).map(|c| c.norm_sqr()).sum();
    a / v.norm_squared().max(1e-300)
}

/// Eigenvector for the (already accurate) eigenvalue `mu`.
fn inverse_iteration(h: &HierarchyMatrix, mu: C64) -> Result<(DVector<C64>, f64)> {
    let scale = h.entries.norm().max(1.0);
    let shift = mu + C64::new(1e-13 * scale, 1e-13 * scale);
    let mut m = h.entries.clone();
    for i in 0..h.dim {
        m[(i, i)] -= shift;
    }
    let lu = m.lu();
    let mut v = DVector::from_element(h.dim, C64::new(1.0, 0.0));
    v /= C64::new(v.norm(), 0.0);
    for _ in 0..4 {
        let mut w = lu
            .solve(&v)
            .ok_or(Error::Eigensolver { residual: f64::INFINITY })?;
        let n = w.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Eigensolver { residual: f64::INFINITY });
        }
        w /= C64::new(n, 0.0);
        v = w;
    }
    // Dominant component real and positive.
    let (imax, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("non-empty");
    let ph = v[imax].conj() / v[imax].norm();
    v *= ph;
    let residual = h.residual(mu, &v);
    Ok((v, residual))
}

/// Similarity map onto an equivalent Hermitian drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeMap {
    /// `Γ = √(V₁V₂)`.
    pub gamma: f64,
    /// `e^{iθ} = Γ/V₁`, so that `Aₙ = αₙe^{iθn}`.
    pub phase: C64,
    /// Drive with `V₁ = V₂ = Γ`.
    pub hermitian: DriveSpec,
}

impl GaugeMap {
    /// `αₙ = Aₙe^{−iθn}` for coefficients indexed `−N..=N`.
    pub fn to_hermitian(&self, coeffs: &[C64]) -> Vec<C64> {
        let n_trunc = (coeffs.len() / 2) as i32;
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * self.phase.powi(-(k as i32 - n_trunc)))
            .collect()
    }
}

/// Maps a drive with positive real `V₁V₂` onto `f = 2Γcos(εt)`.
pub fn gauge_transform(drive: &DriveSpec) -> Result<GaugeMap> {
    let p = drive.coupling_product();
    if p.norm() == 0.0 {
        return Err(Error::domain(
            "V1*V2 = 0 has no Hermitian equivalent; use closed_form_v1_zero",
        ));
    }
    if p.im.abs() > 1e-12 * p.norm() || p.re <= 0.0 {
        return Err(Error::domain(format!(
            "gauge map needs a positive real V1*V2, got {p}"
        )));
    }
    let gamma = p.re.sqrt();
    let hermitian = DriveSpec::hermitian(gamma, drive.omega0, drive.eps)?;
    Ok(GaugeMap {
        gamma,
        phase: C64::new(gamma, 0.0) / drive.v1,
        hermitian,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `μ₁ = −ω₀/2`.
    Lower,
    /// `μ₂ = +ω₀/2`.
    Upper,
}

/// Closed-form Floquet coefficients of a one-sided drive (`V₁ = 0`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedFormCoefficients {
    pub branch: Branch,
    pub mu: f64,
    /// `Aₙ` for `n = 0..=n_max` (negative harmonics vanish).
    pub a: Vec<C64>,
    pub b: Vec<C64>,
    /// Factor applied so that the largest coefficient has unit modulus.
    pub normalization: C64,
}

impl ClosedFormCoefficients {
    /// Embeds the coefficients into a hierarchy vector of truncation `n_trunc`.
    pub fn to_hierarchy(&self, h: &HierarchyMatrix) -> DVector<C64> {
        let mut v = DVector::zeros(h.dim);
        for (n, (a, b)) in self.a.iter().zip(&self.b).enumerate() {
            if let (Some(ia), Some(ib)) = (h.index_a(n as i64), h.index_b(n as i64)) {
                v[ia] = *a;
                v[ib] = *b;
            }
        }
        v
    }
}

const SINGULAR_DEN: f64 = 1e-12;

/// Both Floquet branches of a `V₁ = 0` drive by forward recurrence.
pub fn closed_form_v1_zero(
    drive: &DriveSpec,
    n_max: usize,
) -> Result<(ClosedFormCoefficients, ClosedFormCoefficients)> {
    if drive.v1.norm() != 0.0 {
        return Err(Error::domain("closed form requires V1 = 0"));
    }
    let v2 = drive.v2;
    if v2.norm() == 0.0 {
        return Err(Error::domain("closed form requires V2 != 0"));
    }
    let eps = drive.eps;
    let w = drive.omega0;
    let len = n_max + 2;
    let zero = C64::new(0.0, 0.0);

    // Lower branch: A even from A₀ = 1, B odd from Bₙ = (n+1)Aₙ₊₁/V₂.
    let mut a = vec![zero; len];
    let mut b = vec![zero; len];
    a[0] = C64::new(1.0, 0.0);
    for n in (2..len).step_by(2) {
        let den = n as f64 * ((n as f64 - 1.0) * eps - w);
        if den.abs() < SINGULAR_DEN {
            return Err(Error::NearExceptionalPoint { n, denominator: den });
        }
        a[n] = a[n - 2] * eps * v2 * v2 / den;
    }
    for n in (1..len - 1).step_by(2) {
        b[n] = a[n + 1] * (n as f64 + 1.0) / v2;
    }
    let lower = normalize(Branch::Lower, -0.5 * w, a, b, n_max);

    // Upper branch: B even from B₀ = 1, A odd from Aₙ = (n+1)Bₙ₊₁/V₂.
    let mut a = vec![zero; len];
    let mut b = vec![zero; len];
    b[0] = C64::new(1.0, 0.0);
    for n in (2..len).step_by(2) {
        let den = n as f64 * ((n as f64 - 1.0) * eps + w);
        b[n] = b[n - 2] * eps * v2 * v2 / den;
    }
    for n in (1..len - 1).step_by(2) {
        a[n] = b[n + 1] * (n as f64 + 1.0) / v2;
    }
    let upper = normalize(Branch::Upper, 0.5 * w, a, b, n_max);
    Ok((lower, upper))
}

fn normalize(branch: Branch, mu: f64, mut a: Vec<C64>, mut b: Vec<C64>, n_max: usize) -> ClosedFormCoefficients {
    a.truncate(n_max + 1);
    b.truncate(n_max + 1);
    let top = a.iter().chain(&b).map(|c| c.norm()).fold(0.0, f64::max);
    let k = C64::new(1.0 / top, 0.0);
    for c in a.iter_mut().chain(b.iter_mut()) {
        *c *= k;
    }
    ClosedFormCoefficients {
        branch,
        mu,
        a,
        b,
        normalization: k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twolevel::monodromy;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn undriven_matrix_is_diagonal() {
        let d = DriveSpec::hermitian(0.0, 1.0, 0.3).unwrap();
        let h = build_matrix(&d, default_truncation(&d)).unwrap();
        for i in 0..h.dim {
            for j in 0..h.dim {
                if i != j {
                    assert_eq!(h.entries[(i, j)], c(0.0, 0.0));
                }
            }
        }
        let ia = h.index_a(2).unwrap();
        assert!((h.entries[(ia, ia)].re + 0.6 + 0.5).abs() < 1e-15);
    }

    #[test]
    fn sparsity_pattern() {
        let d = DriveSpec::new(c(0.2, 0.1), c(0.3, -0.4), 1.0, 0.25).unwrap();
        let h = build_matrix(&d, 14).unwrap();
        let nt = 14i64;
        for n in -nt..=nt {
            let ia = h.index_a(n).unwrap();
            let ib = h.index_b(n).unwrap();
            for j in 0..h.dim {
                let allowed_a = j == ia || Some(j) == h.index_b(n + 1) || Some(j) == h.index_b(n - 1);
                let allowed_b = j == ib || Some(j) == h.index_a(n + 1) || Some(j) == h.index_a(n - 1);
                if !allowed_a {
                    assert_eq!(h.entries[(ia, j)], c(0.0, 0.0));
                }
                if !allowed_b {
                    assert_eq!(h.entries[(ib, j)], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn truncation_precondition() {
        let d = DriveSpec::hermitian(0.5, 1.0, 0.2).unwrap();
        assert_eq!(
            build_matrix(&d, 12).unwrap_err(),
            Error::TruncationTooSmall { n_trunc: 12, required: 13 }
        );
    }

    #[test]
    fn agrees_with_monodromy_off_resonance() {
        let d = DriveSpec::hermitian(0.5, 1.0, 0.2).unwrap();
        let spec = solve_quasi_energies(&build_matrix(&d, 40).unwrap()).unwrap();
        let m = monodromy(&d).unwrap();
        for k in 0..2 {
            assert!(spec.classes[k].mu.im.abs() < 1e-10);
            assert!((spec.classes[k].mu.re - m.unfolded[k].re).abs() < 1e-9);
        }
        assert!(spec.spread < DEDUP_TOL_REL * d.eps);
        assert_eq!(spec.classes[0].members + spec.classes[1].members, spec.interior.len());
    }

    #[test]
    fn one_sided_classes() {
        let d = DriveSpec::one_sided(0.5, 1.0, 0.17).unwrap();
        let spec = solve_quasi_energies(&build_matrix(&d, default_truncation(&d)).unwrap()).unwrap();
        assert!((spec.classes[0].mu - c(-0.5, 0.0)).norm() < 1e-10);
        assert!((spec.classes[1].mu - c(0.5, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn doubling_truncation_is_converged() {
        let d = DriveSpec::hermitian(0.5, 1.0, 0.23).unwrap();
        let n = default_truncation(&d);
        let a = solve_quasi_energies(&build_matrix(&d, n).unwrap()).unwrap();
        let b = solve_quasi_energies(&build_matrix(&d, 2 * n).unwrap()).unwrap();
        for k in 0..2 {
            assert!((a.classes[k].mu - b.classes[k].mu).norm() < 1e-10);
        }
    }

    #[test]
    fn gauge_examples() {
        let d = DriveSpec::hermitian(0.5, 1.0, 0.2).unwrap();
        let g = gauge_transform(&d).unwrap();
        assert_eq!(g.gamma, 0.5);
        assert!((g.phase - c(1.0, 0.0)).norm() < 1e-15);

        let d = DriveSpec::new(c(0.25, 0.0), c(1.0, 0.0), 1.0, 0.2).unwrap();
        let g = gauge_transform(&d).unwrap();
        assert!((g.gamma - 0.5).abs() < 1e-15);
        assert!((g.phase - c(2.0, 0.0)).norm() < 1e-15);

        assert!(gauge_transform(&DriveSpec::one_sided(0.5, 1.0, 0.2).unwrap()).is_err());
        let neg = DriveSpec::new(c(0.0, 0.5), c(0.0, 0.5), 1.0, 0.2).unwrap();
        assert!(matches!(gauge_transform(&neg), Err(Error::Domain(_))));
    }

    #[test]
    fn gauge_is_a_similarity() {
        let d = DriveSpec::new(c(0.1, 0.2), c(0.4, -0.8), 1.0, 0.31).unwrap();
        let g = gauge_transform(&d).unwrap();
        let n = default_truncation(&d);
        let h = build_matrix(&d, n).unwrap();
        let hh = build_matrix(&g.hermitian, n).unwrap();
        let a = solve_quasi_energies(&h).unwrap();
        let b = solve_quasi_energies(&hh).unwrap();
        for k in 0..2 {
            assert!((a.classes[k].mu - b.classes[k].mu).norm() < 1e-10);
            // The mapped eigenvector solves the Hermitian hierarchy.
            let (ca, cb) = a.classes[k].coefficients();
            let v = hh.pack(&g.to_hermitian(&ca), &g.to_hermitian(&cb));
            assert!(hh.residual(a.classes[k].mu, &v) < 1e-8);
        }
    }

    #[test]
    fn closed_form_parity_and_residual() {
        let d = DriveSpec::one_sided(0.5, 1.0, 0.17).unwrap();
        let (lo, up) = closed_form_v1_zero(&d, 30).unwrap();
        for n in 0..=30 {
            if n % 2 == 0 {
                assert_eq!(lo.b[n], c(0.0, 0.0));
                assert_eq!(up.a[n], c(0.0, 0.0));
            } else {
                assert_eq!(lo.a[n], c(0.0, 0.0));
                assert_eq!(up.b[n], c(0.0, 0.0));
            }
        }
        let h = build_matrix(&d, 30).unwrap();
        for cf in [&lo, &up] {
            let v = cf.to_hierarchy(&h);
            assert!(h.residual(C64::new(cf.mu, 0.0), &v) < 1e-10);
        }
        // Level-1 dominance of the lower branch away from resonance.
        let max_a = lo.a.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let max_b = lo.b.iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(max_a > 3.0 * max_b);
    }

    #[test]
    fn closed_form_singular_at_odd_resonance() {
        let d = DriveSpec::one_sided(0.5, 1.0, 0.2).unwrap();
        match closed_form_v1_zero(&d, 20) {
            Err(Error::NearExceptionalPoint { n, .. }) => assert_eq!(n, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(closed_form_v1_zero(&DriveSpec::hermitian(0.5, 1.0, 0.2).unwrap(), 10).is_err());
    }
}
