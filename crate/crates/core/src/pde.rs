//! Split-step Fourier integration of
//!
//! ```text
//! i ∂ψ/∂t = −∂²ψ/∂x² + V(x − x₀(εt)) ψ
//! ```
//!
//! on a periodic grid. The displacement `x₀` may be complex, in which case
//! the potential phase changes the norm (gain and loss); nothing is
//! renormalized. Bound-level amplitudes are read off with the bilinear
//! product `aₙ = ∫uₙ(x − x₀)ψ dx`, which keeps the shifted eigenfunctions
//! orthonormal for complex shifts.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::twolevel::{golden_section_min, ShakingPath};
use crate::well::{validate_stripe, GridSpec, WellSpec};

/// Largest norm tolerated before a run is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e6;

/// The grid must satisfy `dx ≤ RESOLUTION / σ₁`.
pub const RESOLUTION: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub grid: GridSpec,
    pub psi: Vec<C64>,
    pub t: f64,
}

impl WaveField {
    /// Discrete `‖ψ‖² = Σ|ψⱼ|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Writes the field as a little-endian binary snapshot: `n_points` (u64),
    /// `x_min`, `x_max`, `t` (f64), then `n_points` pairs `(re, im)`.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(&(self.grid.n_points as u64).to_le_bytes())?;
        for v in [self.grid.x_min, self.grid.x_max, self.t] {
            out.write_all(&v.to_le_bytes())?;
        }
        for c in &self.psi {
            out.write_all(&c.re.to_le_bytes())?;
            out.write_all(&c.im.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a snapshot written by [`WaveField::write_snapshot`]. The time
    /// step is not stored and must be supplied.
    pub fn read_snapshot<R: Read>(mut input: R, dt: f64) -> Result<Self> {
        let io = |e: std::io::Error| Error::InvalidState(format!("snapshot: {e}"));
        let mut b8 = [0u8; 8];
        let mut f64_le = |input: &mut R| -> Result<f64> {
            input.read_exact(&mut b8).map_err(io)?;
            Ok(f64::from_le_bytes(b8))
        };
        let mut head = [0u8; 8];
        input.read_exact(&mut head).map_err(io)?;
        let n = u64::from_le_bytes(head) as usize;
        let x_min = f64_le(&mut input)?;
        let x_max = f64_le(&mut input)?;
        let t = f64_le(&mut input)?;
        let grid = GridSpec::new(x_min, x_max, n, dt)?;
        let mut psi = Vec::with_capacity(n);
        for _ in 0..n {
            let re = f64_le(&mut input)?;
            let im = f64_le(&mut input)?;
            psi.push(C64::new(re, im));
        }
        Ok(WaveField { grid, psi, t })
    }
}

/// Sampled bound-level amplitudes of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSeries {
    pub times: Vec<f64>,
    pub a1: Vec<C64>,
    pub a2: Vec<C64>,
    pub pop1: Vec<f64>,
    pub pop2: Vec<f64>,
    /// `1 − pop1 − pop2`, recorded only for real displacements.
    pub leakage: Option<Vec<f64>>,
    /// Discrete norm of the field at each sample.
    pub norm: Vec<f64>,
}

impl ProjectionSeries {
    fn push(&mut self, t: f64, a: (C64, C64), norm: f64) {
        let (p1, p2) = (a.0.norm_sqr(), a.1.norm_sqr());
        self.times.push(t);
        self.a1.push(a.0);
        self.a2.push(a.1);
        self.pop1.push(p1);
        self.pop2.push(p2);
        self.norm.push(norm);
        if let Some(l) = self.leakage.as_mut() {
            l.push(1.0 - p1 - p2);
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Cosine-ramp absorbing layer at both ends of the box. Off by default.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Absorber {
    /// Layer thickness.
    pub width: f64,
    /// Damping rate at the outer edge.
    pub strength: f64,
}

/// Reusable split-step propagator for one well, grid and path.
pub struct SplitStep {
    spec: WellSpec,
    grid: GridSpec,
    path: ShakingPath,
    xs: Vec<f64>,
    kinetic: Vec<C64>,
    mask: Option<Vec<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
    potential: Vec<C64>,
}

fn check_resolution(spec: &WellSpec, grid: &GridSpec) -> Result<()> {
    let max = RESOLUTION / spec.sigma1.max(spec.sigma2);
    if grid.dx() > max {
        return Err(Error::Resolution { dx: grid.dx(), max });
    }
    Ok(())
}

impl SplitStep {
    pub fn new(spec: WellSpec, grid: GridSpec, path: ShakingPath) -> Result<Self> {
        check_resolution(&spec, &grid)?;
        let n = grid.n_points;
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch = vec![C64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        let mut solver = SplitStep {
            spec,
            grid,
            path,
            xs: grid.points(),
            kinetic: Vec::new(),
            mask: None,
            fwd,
            inv,
            scratch,
            potential: vec![C64::new(0.0, 0.0); n],
        };
        solver.set_time_step(grid.dt);
        Ok(solver)
    }

    pub fn with_absorber(mut self, absorber: Absorber) -> Result<Self> {
        let half = 0.5 * (self.grid.x_max - self.grid.x_min);
        if !(absorber.width > 0.0 && absorber.width < half && absorber.strength >= 0.0) {
            return Err(Error::invalid("absorber must be thinner than half the box"));
        }
        let (lo, hi) = (self.grid.x_min, self.grid.x_max);
        let mask = self
            .xs
            .iter()
            .map(|&x| {
                let depth = (absorber.width - (x - lo).min(hi - x)).max(0.0) / absorber.width;
                let rate = absorber.strength * (0.5 * std::f64::consts::PI * depth).sin().powi(2);
                (-rate * self.grid.dt).exp()
            })
            .collect();
        self.mask = Some(mask);
        Ok(self)
    }

    fn set_time_step(&mut self, dt: f64) {
        let n = self.grid.n_points;
        let dk = std::f64::consts::TAU / (self.grid.x_max - self.grid.x_min);
        // Unnormalized forward and inverse transforms; fold 1/n in here.
        self.kinetic = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                let k = m * dk;
                C64::new(0.0, -k * k * dt).exp() / n as f64
            })
            .collect();
        self.grid.dt = dt;
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `ψ(x, 0) = u₁(x − x₀(0))`, renormalized to unit discrete norm.
    pub fn ground_state(&self) -> Result<WaveField> {
        self.bound_state(1)
    }

    fn bound_state(&self, which: u8) -> Result<WaveField> {
        let x0 = self.path.eval(0.0);
        let mut psi = self
            .xs
            .iter()
            .map(|&x| Ok(self.spec.eigenfunction(which, C64::new(x, 0.0) - x0)?.value))
            .collect::<Result<Vec<_>>>()?;
        let norm: f64 = (psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()).sqrt();
        for c in psi.iter_mut() {
            *c /= norm;
        }
        Ok(WaveField {
            grid: self.grid,
            psi,
            t: 0.0,
        })
    }

    fn fill_potential(&mut self, t: f64) -> Result<()> {
        let x0 = self.path.eval(t);
        for (v, &x) in self.potential.iter_mut().zip(&self.xs) {
            *v = self.spec.potential(C64::new(x, 0.0) - x0)?;
        }
        Ok(())
    }

    fn apply_potential(&self, psi: &mut [C64], tau: f64) {
        for (c, v) in psi.iter_mut().zip(&self.potential) {
            *c *= (-crate::linalg::I * v * tau).exp();
        }
    }

    fn apply_kinetic(&mut self, psi: &mut [C64]) {
        self.fwd.process_with_scratch(psi, &mut self.scratch);
        for (c, k) in psi.iter_mut().zip(&self.kinetic) {
            *c *= k;
        }
        self.inv.process_with_scratch(psi, &mut self.scratch);
        if let Some(mask) = &self.mask {
            for (c, m) in psi.iter_mut().zip(mask) {
                *c *= m;
            }
        }
    }

    fn check_norm(&self, field: &WaveField) -> Result<()> {
        let norm = field.norm_sqr().sqrt();
        if !(norm <= DIVERGENCE_NORM) {
            return Err(Error::Divergence { t: field.t, norm });
        }
        Ok(())
    }

    /// One Strang step: half potential at `t`, kinetic, half potential at
    /// `t + dt`.
    pub fn step(&mut self, field: &mut WaveField) -> Result<()> {
        self.evolve(field, 1)
    }

    /// `n` Strang steps, merging the adjacent potential half steps.
    pub fn evolve(&mut self, field: &mut WaveField, n: usize) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        let dt = self.grid.dt;
        let t0 = field.t;
        self.fill_potential(t0)?;
        self.apply_potential(&mut field.psi, 0.5 * dt);
        for k in 1..=n {
            self.apply_kinetic(&mut field.psi);
            let t = t0 + k as f64 * dt;
            self.fill_potential(t)?;
            let tau = if k == n { 0.5 * dt } else { dt };
            self.apply_potential(&mut field.psi, tau);
            if k % 256 == 0 {
                field.t = t;
                self.check_norm(field)?;
            }
        }
        field.t = t0 + n as f64 * dt;
        self.check_norm(field)
    }

    /// `(a₁, a₂)` with `aₙ = Σⱼ uₙ(xⱼ − x₀(t)) ψⱼ dx`.
    pub fn project(&self, field: &WaveField) -> Result<(C64, C64)> {
        project(&self.spec, &self.path, field)
    }

    /// One-period map of the bound levels. The basis states are the bound
    /// states at `x₀(0)` carrying the momentum `ẋ₀(0)/2` of the moving well,
    /// `φₙ = uₙ(x − x₀)e^{iẋ₀x/2}`, read off with the bilinear dual
    /// `uₙ(x − x₀)e^{−iẋ₀x/2}`. Without the boost the sudden start at full
    /// speed leaks a few percent into the continuum and the map is far from
    /// unitary. The time step is shrunk so that a whole number of steps fits
    /// into the period.
    pub fn period_map(&mut self) -> Result<Mat2> {
        let period = self.path.period();
        let dt = self.grid.dt;
        let n = (period / dt).ceil() as usize;
        let x0 = self.path.eval(0.0);
        let kick = 0.5 * self.path.velocity(0.0);
        let mut basis = [Vec::new(), Vec::new()];
        let mut duals = [Vec::new(), Vec::new()];
        for (m, (b, d)) in basis.iter_mut().zip(duals.iter_mut()).enumerate() {
            for &x in &self.xs {
                let u = self.spec.eigenfunction(m as u8 + 1, C64::new(x, 0.0) - x0)?.value;
                let phase = (crate::linalg::I * kick * x).exp();
                b.push(u * phase);
                d.push(u / phase);
            }
        }
        self.set_time_step(period / n as f64);
        let mut cols = [[C64::new(0.0, 0.0); 2]; 2];
        let dx = self.grid.dx();
        let result = (|| {
            for (col, start) in cols.iter_mut().zip(&basis) {
                let mut f = WaveField {
                    grid: self.grid,
                    psi: start.clone(),
                    t: 0.0,
                };
                self.evolve(&mut f, n)?;
                for (c, d) in col.iter_mut().zip(&duals) {
                    *c = d.iter().zip(&f.psi).map(|(u, p)| u * p).sum::<C64>() * dx;
                }
            }
            Ok(())
        })();
        self.set_time_step(dt);
        result?;
        Ok(Mat2::from_columns(cols[0], cols[1]))
    }
}

/// `ψ(x, 0) = u₁(x)` on `grid`, renormalized to unit discrete norm.
pub fn init_ground_state(spec: &WellSpec, grid: &GridSpec) -> Result<WaveField> {
    check_resolution(spec, grid)?;
    let path = ShakingPath::frozen(1.0)?;
    SplitStep::new(*spec, *grid, path)?.ground_state()
}

/// Bilinear projections of `field` onto the two shifted bound states.
pub fn project(spec: &WellSpec, path: &ShakingPath, field: &WaveField) -> Result<(C64, C64)> {
    let x0 = path.eval(field.t);
    let dx = field.grid.dx();
    let mut a = [C64::new(0.0, 0.0); 2];
    for (psi, x) in field.psi.iter().zip(field.grid.points()) {
        let z = C64::new(x, 0.0) - x0;
        a[0] += spec.eigenfunction(1, z)?.value * psi;
        a[1] += spec.eigenfunction(2, z)?.value * psi;
    }
    Ok((a[0] * dx, a[1] * dx))
}

/// Runs from the ground state to `t_final`, projecting every
/// `sample_every` (rounded to a whole number of steps).
pub fn run_experiment(
    spec: &WellSpec,
    path: &ShakingPath,
    grid: &GridSpec,
    t_final: f64,
    sample_every: f64,
) -> Result<ProjectionSeries> {
    Ok(run_experiment_with_state(spec, path, grid, t_final, sample_every)?.0)
}

/// [`run_experiment`], also returning the final wave field.
pub fn run_experiment_with_state(
    spec: &WellSpec,
    path: &ShakingPath,
    grid: &GridSpec,
    t_final: f64,
    sample_every: f64,
) -> Result<(ProjectionSeries, WaveField)> {
    let report = validate_stripe(spec, path);
    if !report.ok {
        return Err(Error::StripeViolation {
            max_im: report.max_imag,
            half_width: report.half_width,
        });
    }
    if !(t_final > 0.0 && sample_every > 0.0) {
        return Err(Error::invalid("run length and sampling interval must be positive"));
    }
    let mut solver = SplitStep::new(*spec, *grid, *path)?;
    let mut field = solver.ground_state()?;
    let per_sample = ((sample_every / grid.dt).round() as usize).max(1);
    let total = (t_final / grid.dt).round() as usize;
    let mut series = ProjectionSeries {
        leakage: path.is_hermitian().then(Vec::new),
        ..Default::default()
    };
    series.push(0.0, solver.project(&field)?, field.norm_sqr());
    let mut done = 0;
    while done < total {
        let n = per_sample.min(total - done);
        solver.evolve(&mut field, n)?;
        done += n;
        series.push(field.t, solver.project(&field)?, field.norm_sqr());
    }
    Ok((series, field))
}

/// Minimum of the eigenvalue gap of the one-period map over a frequency
/// window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapMinimum {
    pub eps_star: f64,
    /// `|λ₁ − λ₂| / max|λ|` of the one-period map.
    pub gap: f64,
    /// Quasi-energy splitting `|arg(λ₁/λ₂)| / T`.
    pub quasi_gap: f64,
    /// Overlap of the normalized eigenvectors of the map.
    pub defect: f64,
    pub evaluations: usize,
}

impl MapMinimum {
    /// `2π / quasi_gap`, the period of full population exchange at an
    /// avoided crossing.
    pub fn rabi_period(&self) -> f64 {
        std::f64::consts::TAU / self.quasi_gap
    }

    /// Eigenvector overlap above [`MAP_DEFECT_THRESHOLD`]. The projected map
    /// carries the leakage into the continuum, so its eigenvectors never
    /// coalesce as tightly as in the reduced model.
    pub fn is_exceptional(&self) -> bool {
        self.defect >= MAP_DEFECT_THRESHOLD
    }
}

pub const MAP_DEFECT_THRESHOLD: f64 = 0.9;

/// Eigenvalue gap, quasi-energy splitting (per period) and eigenvector
/// overlap of a one-period map.
pub fn map_coalescence(map: &Mat2) -> (f64, f64, f64) {
    let e = map.eigen(0.0);
    let scale = e.values[0].norm().max(e.values[1].norm()).max(1e-300);
    let gap = (e.values[0] - e.values[1]).norm() / scale;
    let phase = (e.values[0] / e.values[1]).arg().abs();
    let defect = crate::linalg::inner(
        &crate::linalg::normalized(&e.vectors[0]),
        &crate::linalg::normalized(&e.vectors[1]),
    )
    .norm();
    (gap, phase, defect)
}

fn map_minimum<P>(spec: &WellSpec, grid: &GridSpec, path_at: P, lo: f64, hi: f64, tol: f64) -> Result<MapMinimum>
where
    P: Fn(f64) -> Result<ShakingPath>,
{
    let map_at = |eps: f64| -> Result<Mat2> { SplitStep::new(*spec, *grid, path_at(eps)?)?.period_map() };
    let (eps_star, _, evaluations) =
        golden_section_min(|eps| Ok(map_coalescence(&map_at(eps)?).0), lo, hi, tol)?;
    let (gap, phase, defect) = map_coalescence(&map_at(eps_star)?);
    Ok(MapMinimum {
        eps_star,
        gap,
        quasi_gap: phase * eps_star / std::f64::consts::TAU,
        defect,
        evaluations,
    })
}

/// Exceptional point of the circular path `x₀ = A − Ae^{−iεt}` inside
/// `[lo, hi]`, located by minimizing the one-period map gap.
pub fn locate_exceptional_point(
    spec: &WellSpec,
    grid: &GridSpec,
    amplitude: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<MapMinimum> {
    map_minimum(spec, grid, |eps| ShakingPath::circular(amplitude, eps), lo, hi, tol)
}

/// Avoided crossing of the sinusoidal path `x₀ = A sin(εt)` inside
/// `[lo, hi]`.
pub fn locate_avoided_crossing(
    spec: &WellSpec,
    grid: &GridSpec,
    amplitude: f64,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<MapMinimum> {
    map_minimum(spec, grid, |eps| ShakingPath::sinusoidal(amplitude, eps), lo, hi, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> (WellSpec, GridSpec) {
        (WellSpec::reference(), GridSpec::reference())
    }

    #[test]
    fn ground_state_projects_onto_level_one() {
        let (w, g) = reference();
        let f = init_ground_state(&w, &g).unwrap();
        assert!((f.norm_sqr() - 1.0).abs() < 1e-12);
        let (a1, a2) = project(&w, &ShakingPath::frozen(1.0).unwrap(), &f).unwrap();
        assert!((a1 - 1.0).norm() < 1e-8, "{a1}");
        assert!(a2.norm() < 1e-8);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let w = WellSpec::reference();
        let g = GridSpec::new(-8.0, 8.0, 128, 0.01).unwrap();
        assert!(matches!(init_ground_state(&w, &g), Err(Error::Resolution { .. })));
    }

    fn stationary_phase_error(dt: f64) -> f64 {
        let w = WellSpec::reference();
        let g = GridSpec::new(-8.0, 8.0, 256, dt).unwrap();
        let mut s = SplitStep::new(w, g, ShakingPath::frozen(1.0).unwrap()).unwrap();
        let mut f = s.ground_state().unwrap();
        s.evolve(&mut f, (10.0 / dt).round() as usize).unwrap();
        let (a1, _) = s.project(&f).unwrap();
        assert!((a1.norm_sqr() - 1.0).abs() < 1e-6);
        (a1 - C64::new(0.0, -w.e1 * f.t).exp()).norm()
    }

    #[test]
    fn stationary_state_only_picks_up_a_phase() {
        let coarse = stationary_phase_error(0.01);
        let fine = stationary_phase_error(0.005);
        assert!(coarse < 2e-3, "{coarse}");
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "splitting order ratio {ratio}");
    }

    #[test]
    fn shifted_states_project_bilinearly() {
        let (w, g) = reference();
        // x₀ = −0.15i(e^{−it} − 1) equals 0.3i at t = π.
        let path = ShakingPath::new(C64::new(0.0, 0.0), C64::new(-0.15, 0.0), 1.0).unwrap();
        let t = std::f64::consts::PI;
        let shift = path.eval(t);
        assert!((shift - C64::new(0.0, 0.3)).norm() < 1e-14);
        let psi = g
            .points()
            .iter()
            .map(|&x| w.eigenfunction(2, C64::new(x, 0.0) - shift).unwrap().value)
            .collect();
        let field = WaveField { grid: g, psi, t };
        let (a1, a2) = project(&w, &path, &field).unwrap();
        assert!(a1.norm() < 1e-6 && (a2 - 1.0).norm() < 1e-6, "{a1} {a2}");
    }

    #[test]
    fn superposition_projects_to_equal_weights() {
        let (w, g) = reference();
        let psi = g
            .points()
            .iter()
            .map(|&x| {
                let z = C64::new(x, 0.0);
                (w.eigenfunction(1, z).unwrap().value + w.eigenfunction(2, z).unwrap().value)
                    / 2f64.sqrt()
            })
            .collect();
        let f = WaveField { grid: g, psi, t: 0.0 };
        let (a1, a2) = project(&w, &ShakingPath::frozen(1.0).unwrap(), &f).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((a1 - h).norm() < 1e-8 && (a2 - h).norm() < 1e-8);
    }

    #[test]
    fn snapshot_round_trip() {
        let (w, g) = reference();
        let mut f = init_ground_state(&w, &g).unwrap();
        f.t = 12.5;
        let mut buf = Vec::new();
        f.write_snapshot(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 16 * g.n_points);
        let back = WaveField::read_snapshot(buf.as_slice(), g.dt).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn absorber_only_damps() {
        let (w, g) = reference();
        let path = ShakingPath::frozen(1.0).unwrap();
        let mut s = SplitStep::new(w, g, path)
            .unwrap()
            .with_absorber(Absorber { width: 2.0, strength: 1.0 })
            .unwrap();
        let mut f = s.ground_state().unwrap();
        s.evolve(&mut f, 200).unwrap();
        let n = f.norm_sqr();
        assert!(n <= 1.0 + 1e-12 && n > 0.999, "{n}");
    }

    #[test]
    fn boosted_period_map_is_nearly_unitary_for_real_shaking() {
        let (w, g) = reference();
        let path = ShakingPath::sinusoidal(1.0, 0.29).unwrap();
        let m = SplitStep::new(w, g, path).unwrap().period_map().unwrap();
        let adjoint = Mat2([
            [m.0[0][0].conj(), m.0[1][0].conj()],
            [m.0[0][1].conj(), m.0[1][1].conj()],
        ]);
        let defect = adjoint
            .matmul(&m)
            .add(&Mat2::identity().scale(C64::new(-1.0, 0.0)))
            .frobenius();
        // What is missing is the weight carried off into the continuum.
        assert!(defect < 1e-4, "{defect:e}");
    }
}
