//! Floquet analysis of a quantum well shaken along a path in the complex
//! plane.
//!
//! The crate is organised around the reduced two-level model:
//!
//! - [`twolevel`]: propagation, monodromy, quasi-energies, Floquet states,
//!   WKB approximants, resonances and exceptional points.
//! - [`hierarchy`]: the truncated Fourier hierarchy as an independent route
//!   to the quasi-energies, plus the closed-form solution for one-sided drives.
//! - [`well`]: the double-well potential, its bound states and the coupling
//!   that turns a shaking path into a two-level drive.
//! - [`pde`]: split-step integration of the full Schrödinger equation.
//! - [`coupler`]: the optical directional coupler analogue.

pub mod coupler;
pub mod error;
pub mod hierarchy;
pub mod linalg;
pub mod magnus;
pub mod pde;
pub mod ode;
pub mod quad;
pub mod twolevel;
pub mod well;

pub use error::{Error, Result};
pub use twolevel::{DriveSpec, ShakingPath};

/// The guide's chapters, compiled as doc tests so that its snippets keep
/// working.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/two-level.md")]
    struct TwoLevel;
    #[doc = include_str!("../../../book/src/resonances.md")]
    struct Resonances;
    #[doc = include_str!("../../../book/src/hierarchy.md")]
    struct Hierarchy;
    #[doc = include_str!("../../../book/src/well.md")]
    struct Well;
    #[doc = include_str!("../../../book/src/wave-equation.md")]
    struct WaveEquation;
    #[doc = include_str!("../../../book/src/coupler.md")]
    struct Coupler;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
