//! Run configuration: one TOML document with a table per concern.
//!
//! ```toml
//! mode = "sweep"
//!
//! [drive]
//! v1 = [0.5, 0.0]
//! v2 = [0.5, 0.0]
//! omega0 = 1.0
//!
//! [sweep]
//! eps_min = 0.1
//! eps_max = 1.1
//! points = 1001
//! ```

use std::path::PathBuf;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use floquet_well::coupler::ModulationProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Sweep,
    Dynamics,
    Pde,
    EpFind,
    Coupler,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sweep => "sweep",
            Mode::Dynamics => "dynamics",
            Mode::Pde => "pde",
            Mode::EpFind => "ep-find",
            Mode::Coupler => "coupler",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    /// Destination file; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub drive: DriveConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub well: WellConfig,
    #[serde(default)]
    pub path: PathConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub pde: PdeConfig,
    #[serde(default)]
    pub ep_find: EpFindConfig,
    #[serde(default)]
    pub coupler: CouplerConfig,
}

/// Two-level drive; complex numbers are `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    pub v1: C64,
    pub v2: C64,
    pub omega0: f64,
    pub eps: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            v1: C64::new(0.5, 0.0),
            v2: C64::new(0.5, 0.0),
            omega0: 1.0,
            eps: 0.2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
    /// Propagator samples per period used for the Floquet states.
    pub samples: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            eps_min: 0.1,
            eps_max: 1.1,
            points: 1001,
            samples: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    /// Initial amplitudes `(a₁, a₂)`.
    pub initial: [C64; 2],
    pub t_final: f64,
    /// Sampling interval; one drive period when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<f64>,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            initial: [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            t_final: 1000.0,
            sample_every: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WellConfig {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl Default for WellConfig {
    fn default() -> Self {
        WellConfig {
            sigma1: 3f64.sqrt(),
            sigma2: 2f64.sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathShape {
    /// `x₀ = A sin εt`.
    Sinusoidal,
    /// `x₀ = A − A e^{−iεt}`.
    Circular,
    /// No shaking.
    Frozen,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub shape: PathShape,
    pub amplitude: f64,
    pub eps: f64,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig {
            shape: PathShape::Sinusoidal,
            amplitude: 1.0,
            eps: 1.0 / 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub dt: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = floquet_well::well::GridSpec::reference();
        GridConfig {
            x_min: g.x_min,
            x_max: g.x_max,
            n_points: g.n_points,
            dt: g.dt,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeConfig {
    pub t_final: f64,
    pub sample_every: f64,
    /// Binary dump of the final wave field.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
}

impl Default for PdeConfig {
    fn default() -> Self {
        PdeConfig {
            t_final: 100.0,
            sample_every: 1.0,
            snapshot: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Monodromy of the reduced drive from `[drive]`.
    Twolevel,
    /// One-period map of the wave equation, circular path of `[path]`.
    Pde,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpFindConfig {
    pub backend: Backend,
    pub lo: f64,
    pub hi: f64,
    /// Window tolerance of the wave-equation search.
    pub tol: f64,
}

impl Default for EpFindConfig {
    fn default() -> Self {
        EpFindConfig {
            backend: Backend::Twolevel,
            lo: 0.19,
            hi: 0.21,
            tol: 1e-7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplerInput {
    Symmetric,
    Antisymmetric,
    Guide1,
    Guide2,
}

impl CouplerInput {
    /// Waveguide amplitudes `(b₁, b₂)`.
    pub fn amplitudes(self) -> [C64; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (b1, b2) = match self {
            CouplerInput::Symmetric => (h, h),
            CouplerInput::Antisymmetric => (h, -h),
            CouplerInput::Guide1 => (1.0, 0.0),
            CouplerInput::Guide2 => (0.0, 1.0),
        };
        [C64::new(b1, 0.0), C64::new(b2, 0.0)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplerConfig {
    pub kappa_e: f64,
    pub eps: f64,
    pub v: C64,
    pub profile: ModulationProfile,
    pub input: CouplerInput,
    pub z_final: f64,
    pub record_every: f64,
}

impl Default for CouplerConfig {
    fn default() -> Self {
        CouplerConfig {
            kappa_e: 0.5,
            eps: 0.2,
            v: C64::new(0.0, 0.5),
            profile: ModulationProfile::OneSidedNegative,
            input: CouplerInput::Symmetric,
            z_final: 5000.0,
            record_every: 10.0,
        }
    }
}

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        RunConfig {
            mode,
            output: None,
            drive: DriveConfig::default(),
            sweep: SweepConfig::default(),
            dynamics: DynamicsConfig::default(),
            well: WellConfig::default(),
            path: PathConfig::default(),
            grid: GridConfig::default(),
            pde: PdeConfig::default(),
            ep_find: EpFindConfig::default(),
            coupler: CouplerConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> Result<String, toml::ser::Error> {
        toml::to_string(self)
    }

    /// SHA-256 of the configuration with the output path removed, so that
    /// the same run written to different files carries the same hash.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let json = serde_json::to_string(&canonical).expect("configuration serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
