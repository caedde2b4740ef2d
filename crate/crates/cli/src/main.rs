//! `floquet-well` command-line front end.
//!
//! Every subcommand starts from the defaults, applies `--config <file>` if
//! given, then applies any flags. Exit codes: 0 success, 2 usage error,
//! 3 numerical failure.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

use config::{Backend, CouplerInput, Mode, PathShape, RunConfig};
use floquet_well::coupler::ModulationProfile;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read configuration {0}: {1}")]
    Config(PathBuf, String),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Numerical(#[from] floquet_well::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use floquet_well::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(..) => 2,
            CliError::Numerical(E::InvalidArgument(_) | E::Resolution { .. } | E::StripeViolation { .. }) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(..) => 1,
        }
    }
}

/// Parses `re,im` (or a bare real number).
fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected RE,IM, got {s:?}")),
    }
}

#[derive(Parser)]
#[command(name = "floquet-well", version, about = "Floquet analysis of a shaken quantum well")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quasi-energies, gap, unbalance factor and defect over a frequency range.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        drive: DriveArgs,
        #[arg(long)]
        eps_min: Option<f64>,
        #[arg(long)]
        eps_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Propagator samples per period.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Level populations of the two-level model in time.
    Dynamics {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        drive: DriveArgs,
        /// Start in level 1 or level 2.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        level: Option<u8>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        sample_every: Option<f64>,
    },
    /// Wave-equation run from the ground state, projected on the two bound states.
    Pde {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        path: PathArgs,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        sample_every: Option<f64>,
        /// Write the final wave field here.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Search a frequency window for an exceptional point; prints JSON.
    EpFind {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        drive: DriveArgs,
        #[command(flatten)]
        well: WellArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Radius of the circular path for the wave-equation backend.
        #[arg(long)]
        amplitude: Option<f64>,
    },
    /// Directional coupler with a modulated index.
    Coupler {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        kappa_e: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        v: Option<C64>,
        #[arg(long, value_enum)]
        profile: Option<ProfileArg>,
        #[arg(long, value_enum)]
        input: Option<InputArg>,
        #[arg(long)]
        z_final: Option<f64>,
        #[arg(long)]
        record_every: Option<f64>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (standard output by default).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Print the resolved configuration as TOML instead of running.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct DriveArgs {
    /// Coupling of the upward term, `RE,IM`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    v1: Option<C64>,
    /// Coupling of the downward term, `RE,IM`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    v2: Option<C64>,
    #[arg(long)]
    omega0: Option<f64>,
    /// Drive frequency.
    #[arg(long = "drive-eps")]
    eps: Option<f64>,
}

#[derive(Args)]
struct WellArgs {
    #[arg(long)]
    sigma1: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct PathArgs {
    #[arg(long, value_enum)]
    shape: Option<ShapeArg>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// Shaking frequency.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum BackendArg {
    Twolevel,
    Pde,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ShapeArg {
    Sinusoidal,
    Circular,
    Frozen,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProfileArg {
    HermitianCos,
    OneSidedNegative,
    OneSidedPositive,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum InputArg {
    Symmetric,
    Antisymmetric,
    Guide1,
    Guide2,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl DriveArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.drive.v1, self.v1);
        set(&mut cfg.drive.v2, self.v2);
        set(&mut cfg.drive.omega0, self.omega0);
        set(&mut cfg.drive.eps, self.eps);
    }
}

impl WellArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.well.sigma1, self.sigma1);
        set(&mut cfg.well.sigma2, self.sigma2);
    }
}

impl GridArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.grid.x_min, self.x_min);
        set(&mut cfg.grid.x_max, self.x_max);
        set(&mut cfg.grid.n_points, self.n_points);
        set(&mut cfg.grid.dt, self.dt);
    }
}

impl PathArgs {
    fn apply(self, cfg: &mut RunConfig) {
        set(
            &mut cfg.path.shape,
            self.shape.map(|s| match s {
                ShapeArg::Sinusoidal => PathShape::Sinusoidal,
                ShapeArg::Circular => PathShape::Circular,
                ShapeArg::Frozen => PathShape::Frozen,
            }),
        );
        set(&mut cfg.path.amplitude, self.amplitude);
        set(&mut cfg.path.eps, self.eps);
    }
}

fn base_config(mode: Mode, common: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(p.clone(), e.to_string()))?;
            let cfg = RunConfig::from_toml(&text).map_err(|e| CliError::Config(p.clone(), e.to_string()))?;
            if cfg.mode != mode {
                return Err(CliError::Usage(format!(
                    "{} sets mode = \"{}\" but the subcommand is {}",
                    p.display(),
                    cfg.mode.name(),
                    mode.name()
                )));
            }
            cfg
        }
        None => RunConfig::new(mode),
    };
    set(&mut cfg.output, common.output.clone().map(Some));
    Ok(cfg)
}

/// Resolves the configuration; the flag returned asks for it to be printed.
fn resolve(command: Command) -> Result<(RunConfig, bool), CliError> {
    Ok(match command {
        Command::Sweep { common, drive, eps_min, eps_max, points, samples } => {
            let mut cfg = base_config(Mode::Sweep, &common)?;
            drive.apply(&mut cfg);
            set(&mut cfg.sweep.eps_min, eps_min);
            set(&mut cfg.sweep.eps_max, eps_max);
            set(&mut cfg.sweep.points, points);
            set(&mut cfg.sweep.samples, samples);
            (cfg, common.print_config)
        }
        Command::Dynamics { common, drive, level, t_final, sample_every } => {
            let mut cfg = base_config(Mode::Dynamics, &common)?;
            drive.apply(&mut cfg);
            let (one, zero) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
            set(&mut cfg.dynamics.initial, level.map(|l| if l == 1 { [one, zero] } else { [zero, one] }));
            set(&mut cfg.dynamics.t_final, t_final);
            set(&mut cfg.dynamics.sample_every, sample_every.map(Some));
            (cfg, common.print_config)
        }
        Command::Pde { common, well, grid, path, t_final, sample_every, snapshot } => {
            let mut cfg = base_config(Mode::Pde, &common)?;
            well.apply(&mut cfg);
            grid.apply(&mut cfg);
            path.apply(&mut cfg);
            set(&mut cfg.pde.t_final, t_final);
            set(&mut cfg.pde.sample_every, sample_every);
            set(&mut cfg.pde.snapshot, snapshot.map(Some));
            (cfg, common.print_config)
        }
        Command::EpFind { common, backend, lo, hi, tol, drive, well, grid, amplitude } => {
            let mut cfg = base_config(Mode::EpFind, &common)?;
            set(
                &mut cfg.ep_find.backend,
                backend.map(|b| match b {
                    BackendArg::Twolevel => Backend::Twolevel,
                    BackendArg::Pde => Backend::Pde,
                }),
            );
            set(&mut cfg.ep_find.lo, lo);
            set(&mut cfg.ep_find.hi, hi);
            set(&mut cfg.ep_find.tol, tol);
            drive.apply(&mut cfg);
            well.apply(&mut cfg);
            grid.apply(&mut cfg);
            set(&mut cfg.path.amplitude, amplitude);
            (cfg, common.print_config)
        }
        Command::Coupler { common, kappa_e, eps, v, profile, input, z_final, record_every } => {
            let mut cfg = base_config(Mode::Coupler, &common)?;
            set(&mut cfg.coupler.kappa_e, kappa_e);
            set(&mut cfg.coupler.eps, eps);
            set(&mut cfg.coupler.v, v);
            set(
                &mut cfg.coupler.profile,
                profile.map(|p| match p {
                    ProfileArg::HermitianCos => ModulationProfile::HermitianCos,
                    ProfileArg::OneSidedNegative => ModulationProfile::OneSidedNegative,
                    ProfileArg::OneSidedPositive => ModulationProfile::OneSidedPositive,
                }),
            );
            set(
                &mut cfg.coupler.input,
                input.map(|i| match i {
                    InputArg::Symmetric => CouplerInput::Symmetric,
                    InputArg::Antisymmetric => CouplerInput::Antisymmetric,
                    InputArg::Guide1 => CouplerInput::Guide1,
                    InputArg::Guide2 => CouplerInput::Guide2,
                }),
            );
            set(&mut cfg.coupler.z_final, z_final);
            set(&mut cfg.coupler.record_every, record_every);
            (cfg, common.print_config)
        }
    })
}

fn execute(command: Command) -> Result<(), CliError> {
    let (cfg, print_config) = resolve(command)?;
    let text = if print_config {
        cfg.to_toml().map_err(|e| CliError::Usage(e.to_string()))?
    } else {
        commands::run(&cfg)?
    };
    match &cfg.output {
        Some(path) if !print_config => std::fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e)),
        _ => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io("<stdout>".into(), e)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
