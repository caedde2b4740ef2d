use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::monodromy::{decompose, MonodromyResult, DEFECT_THRESHOLD};
use super::{propagator_samples, DriveSpec};
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2, I};
use crate::magnus::Stepping;

/// A periodic Floquet state `W(t) = Σₙ (Aₙ, Bₙ) e^{−inεt}`, sampled over one
/// period.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FloquetState {
    /// Sample times `tₖ = kT/n`, `k = 0..n`.
    pub times: Vec<f64>,
    pub samples: Vec<Vec2>,
    /// `W(T)`, which should reproduce `W(0)`.
    pub end_sample: Vec2,
    /// `Aₙ` for the harmonic indices in `harmonics`.
    pub fourier_a: Vec<C64>,
    pub fourier_b: Vec<C64>,
    /// Harmonic indices in increasing order, `−n/2 .. n/2`.
    pub harmonics: Vec<i64>,
    /// Quasi-energy on the unfolded branch used to strip the Floquet phase.
    pub mu: C64,
}

impl FloquetState {
    /// `(Aₙ, Bₙ)` for harmonic `n`, or zero outside the resolved band.
    pub fn coefficient(&self, n: i64) -> (C64, C64) {
        match self.harmonics.binary_search(&n) {
            Ok(k) => (self.fourier_a[k], self.fourier_b[k]),
            Err(_) => (C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
        }
    }

    /// `‖W(T) − W(0)‖ / ‖W(0)‖`.
    pub fn periodicity_error(&self) -> f64 {
        let w0 = self.samples[0];
        let d = [self.end_sample[0] - w0[0], self.end_sample[1] - w0[1]];
        crate::linalg::norm(&d) / crate::linalg::norm(&w0).max(1e-300)
    }

    /// Relative mismatch between the sample energy and the Fourier energy.
    pub fn parseval_error(&self) -> f64 {
        let n = self.samples.len() as f64;
        let time: f64 = self
            .samples
            .iter()
            .map(|w| w[0].norm_sqr() + w[1].norm_sqr())
            .sum::<f64>()
            / n;
        let freq: f64 = self
            .fourier_a
            .iter()
            .zip(&self.fourier_b)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum();
        (time - freq).abs() / time.max(1e-300)
    }
}

/// Floquet states from an existing monodromy decomposition.
pub fn floquet_states(
    drive: &DriveSpec,
    mono: &MonodromyResult,
    n_samples: usize,
) -> Result<(FloquetState, FloquetState)> {
    if mono.defect >= DEFECT_THRESHOLD {
        return Err(Error::Coalescence {
            defect: mono.defect,
        });
    }
    floquet_states_unchecked(drive, mono, n_samples)
}

/// As [`floquet_states`] but without the coalescence guard, for looking at
/// states right next to an exceptional point.
pub fn floquet_states_unchecked(
    drive: &DriveSpec,
    mono: &MonodromyResult,
    n_samples: usize,
) -> Result<(FloquetState, FloquetState)> {
    if n_samples < 2 {
        return Err(Error::invalid("need at least two samples per period"));
    }
    let props = sample_propagators(drive, n_samples, Stepping::default())?;
    Ok(build_states(drive, mono, &props))
}

pub(crate) fn sample_propagators(
    drive: &DriveSpec,
    n_samples: usize,
    stepping: Stepping,
) -> Result<Vec<Mat2>> {
    let period = drive.period();
    let mut times: Vec<f64> = (1..n_samples)
        .map(|k| period * k as f64 / n_samples as f64)
        .collect();
    times.push(period);
    let mut props = vec![Mat2::identity()];
    props.extend(propagator_samples(drive, &times, stepping)?);
    Ok(props)
}

/// Monodromy and both Floquet states from one set of propagator samples
/// (`props[k] = U(kT/n)`, `k = 0..=n`).
pub(crate) fn states_from_samples(
    drive: &DriveSpec,
    props: &[Mat2],
) -> (MonodromyResult, FloquetState, FloquetState) {
    let mono = decompose(drive, props[props.len() - 1]);
    let (w1, w2) = build_states(drive, &mono, props);
    (mono, w1, w2)
}

fn build_states(drive: &DriveSpec, mono: &MonodromyResult, props: &[Mat2]) -> (FloquetState, FloquetState) {
    let w1 = build_state(drive, props, mono.eigenvectors[0], mono.unfolded[0]);
    let w2 = build_state(drive, props, mono.eigenvectors[1], mono.unfolded[1]);
    (w1, w2)
}

fn build_state(drive: &DriveSpec, props: &[Mat2], q: Vec2, mu: C64) -> FloquetState {
    let n = props.len() - 1;
    let period = drive.period();
    let times: Vec<f64> = (0..n).map(|k| period * k as f64 / n as f64).collect();
    let sample = |u: &Mat2, t: f64| {
        let v = u.apply(&q);
        let ph = (I * mu * t).exp();
        [v[0] * ph, v[1] * ph]
    };
    let samples: Vec<Vec2> = times.iter().zip(props).map(|(&t, u)| sample(u, t)).collect();
    let end_sample = sample(&props[n], period);

    // Aₙ = (1/n) Σₖ W(tₖ) e^{+2πi nk/n_s}, an unnormalized inverse DFT.
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(n);
    let mut a: Vec<C64> = samples.iter().map(|w| w[0]).collect();
    let mut b: Vec<C64> = samples.iter().map(|w| w[1]).collect();
    fft.process(&mut a);
    fft.process(&mut b);
    let scale = 1.0 / n as f64;

    let half = (n / 2) as i64;
    let harmonics: Vec<i64> = (-half..(n as i64 - half)).collect();
    let index = |h: i64| h.rem_euclid(n as i64) as usize;
    let fourier_a = harmonics.iter().map(|&h| a[index(h)] * scale).collect();
    let fourier_b = harmonics.iter().map(|&h| b[index(h)] * scale).collect();
    FloquetState {
        times,
        samples,
        end_sample,
        fourier_a,
        fourier_b,
        harmonics,
        mu,
    }
}

/// `θ = |maxₙ|Aₙ| − maxₙ|Bₙ||`, with the state scaled so that its largest
/// coefficient has unit modulus.
pub fn unbalance_factor(state: &FloquetState) -> Result<f64> {
    let max_a = state.fourier_a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let max_b = state.fourier_b.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let top = max_a.max(max_b);
    if !(top > 0.0) || !top.is_finite() {
        return Err(Error::InvalidState(
            "unbalance factor of an all-zero Floquet state".into(),
        ));
    }
    Ok((max_a - max_b).abs() / top)
}
