//! One function per subcommand. Each returns the full text of its output.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;

use serde::Serialize;

use floquet_well::coupler::{propagate_coupler, CouplerSpec};
use floquet_well::pde::{locate_exceptional_point, run_experiment_with_state};
use floquet_well::twolevel::{find_exceptional_point, propagate, sweep};
use floquet_well::well::{GridSpec, WellSpec};
use floquet_well::{DriveSpec, ShakingPath};

use crate::config::{Backend, Mode, PathShape, RunConfig};
use crate::CliError;

pub const SWEEP_COLUMNS: &str = "eps,mu1_folded,mu2_folded,gap,theta,defect,mu1_imag,mu2_imag";
pub const DYNAMICS_COLUMNS: &str = "t,pop1,pop2,norm";
pub const PDE_COLUMNS: &str = "t,a1_re,a1_im,a2_re,a2_im,pop1,pop2,leakage,norm";
pub const COUPLER_COLUMNS: &str = "z,guide1,guide2,symmetric,antisymmetric,antisymmetric_fraction";

/// `# floquet-well <mode> config_sha256=<hex>`, the configuration as JSON,
/// then the column names.
fn csv_header(cfg: &RunConfig, columns: &str) -> String {
    let json = {
        let mut c = cfg.clone();
        c.output = None;
        serde_json::to_string(&c).expect("configuration serializes")
    };
    format!(
        "# floquet-well {} config_sha256={}\n# config={json}\n{columns}\n",
        cfg.mode.name(),
        cfg.hash()
    )
}

fn row(out: &mut String, values: &[f64]) {
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        // Debug formatting round-trips and switches to exponents for tiny values.
        write!(out, "{v:?}").unwrap();
    }
    out.push('\n');
}

fn drive(cfg: &RunConfig) -> Result<DriveSpec, CliError> {
    let d = &cfg.drive;
    Ok(DriveSpec::new(d.v1, d.v2, d.omega0, d.eps)?)
}

fn well(cfg: &RunConfig) -> Result<WellSpec, CliError> {
    Ok(WellSpec::new(cfg.well.sigma1, cfg.well.sigma2)?)
}

fn grid(cfg: &RunConfig) -> Result<GridSpec, CliError> {
    let g = &cfg.grid;
    Ok(GridSpec::new(g.x_min, g.x_max, g.n_points, g.dt)?)
}

fn path(cfg: &RunConfig) -> Result<ShakingPath, CliError> {
    let p = &cfg.path;
    Ok(match p.shape {
        PathShape::Sinusoidal => ShakingPath::sinusoidal(p.amplitude, p.eps)?,
        PathShape::Circular => ShakingPath::circular(p.amplitude, p.eps)?,
        PathShape::Frozen => ShakingPath::frozen(p.eps)?,
    })
}

pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.mode {
        Mode::Sweep => cmd_sweep(cfg),
        Mode::Dynamics => cmd_dynamics(cfg),
        Mode::Pde => cmd_pde(cfg),
        Mode::EpFind => cmd_ep_find(cfg),
        Mode::Coupler => cmd_coupler(cfg),
    }
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let s = &cfg.sweep;
    if !(s.eps_min > 0.0 && s.eps_max > s.eps_min && s.eps_max.is_finite()) {
        return Err(CliError::Usage(format!(
            "sweep range must satisfy 0 < eps_min < eps_max, got [{}, {}]",
            s.eps_min, s.eps_max
        )));
    }
    if s.points < 2 {
        return Err(CliError::Usage(format!("sweep needs at least 2 points, got {}", s.points)));
    }
    let step = (s.eps_max - s.eps_min) / (s.points - 1) as f64;
    let eps: Vec<f64> = (0..s.points).map(|k| s.eps_min + step * k as f64).collect();
    let points = sweep(&drive(cfg)?, &eps, s.samples)?;
    let mut out = csv_header(cfg, SWEEP_COLUMNS);
    for p in points {
        row(
            &mut out,
            &[
                p.eps,
                p.mu_folded[0],
                p.mu_folded[1],
                p.gap,
                p.theta,
                p.defect,
                p.mu_imag[0],
                p.mu_imag[1],
            ],
        );
    }
    Ok(out)
}

pub fn cmd_dynamics(cfg: &RunConfig) -> Result<String, CliError> {
    let d = drive(cfg)?;
    let dy = &cfg.dynamics;
    let every = dy.sample_every.unwrap_or_else(|| d.period());
    let rec = propagate(&d, dy.initial, dy.t_final, every)?;
    let mut out = csv_header(cfg, DYNAMICS_COLUMNS);
    for k in 0..rec.len() {
        row(&mut out, &[rec.times[k], rec.a1_sq[k], rec.a2_sq[k], rec.norm[k]]);
    }
    Ok(out)
}

pub fn cmd_pde(cfg: &RunConfig) -> Result<String, CliError> {
    let (series, field) =
        run_experiment_with_state(&well(cfg)?, &path(cfg)?, &grid(cfg)?, cfg.pde.t_final, cfg.pde.sample_every)?;
    if let Some(snapshot) = &cfg.pde.snapshot {
        let file = File::create(snapshot).map_err(|e| CliError::Io(snapshot.clone(), e))?;
        field
            .write_snapshot(BufWriter::new(file))
            .map_err(|e| CliError::Io(snapshot.clone(), e))?;
    }
    let mut out = csv_header(cfg, PDE_COLUMNS);
    for k in 0..series.len() {
        let leak = series.leakage.as_ref().map_or(f64::NAN, |l| l[k]);
        let (a1, a2) = (series.a1[k], series.a2[k]);
        row(
            &mut out,
            &[series.times[k], a1.re, a1.im, a2.re, a2.im, series.pop1[k], series.pop2[k], leak, series.norm[k]],
        );
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct EpReport {
    backend: Backend,
    found: bool,
    eps_star: f64,
    defect: f64,
    gap: f64,
    residual: Option<f64>,
    iterations: usize,
    config_sha256: String,
}

pub fn cmd_ep_find(cfg: &RunConfig) -> Result<String, CliError> {
    let e = &cfg.ep_find;
    if !(e.lo > 0.0 && e.hi > e.lo) {
        return Err(CliError::Usage(format!("search window must satisfy 0 < lo < hi, got [{}, {}]", e.lo, e.hi)));
    }
    let report = match e.backend {
        Backend::Twolevel => {
            let r = find_exceptional_point(&drive(cfg)?, e.lo, e.hi)?;
            EpReport {
                backend: e.backend,
                found: r.found,
                eps_star: r.eps_star,
                defect: r.defect,
                gap: r.gap,
                residual: r.residual,
                iterations: r.iterations,
                config_sha256: cfg.hash(),
            }
        }
        Backend::Pde => {
            let r = locate_exceptional_point(&well(cfg)?, &grid(cfg)?, cfg.path.amplitude, e.lo, e.hi, e.tol)?;
            EpReport {
                backend: e.backend,
                found: r.is_exceptional(),
                eps_star: r.eps_star,
                defect: r.defect,
                gap: r.gap,
                residual: None,
                iterations: r.evaluations,
                config_sha256: cfg.hash(),
            }
        }
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    Ok(text)
}

pub fn cmd_coupler(cfg: &RunConfig) -> Result<String, CliError> {
    let c = &cfg.coupler;
    let spec = CouplerSpec::new(c.kappa_e, c.eps, c.v, c.profile)?;
    let tr = propagate_coupler(&spec, c.input.amplitudes(), c.z_final, c.record_every)?;
    let fraction = tr.antisymmetric_fraction();
    let mut out = csv_header(cfg, COUPLER_COLUMNS);
    for k in 0..tr.z.len() {
        let (g, s) = (tr.guides[k], tr.supermodes[k]);
        row(
            &mut out,
            &[tr.z[k], g[0].norm_sqr(), g[1].norm_sqr(), s[0].norm_sqr(), s[1].norm_sqr(), fraction[k]],
        );
    }
    Ok(out)
}
