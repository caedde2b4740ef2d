use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::DriveSpec;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, Vec2, I};
use crate::magnus::{self, Stepping};

/// Sampled populations of a two-level trajectory.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub a1_sq: Vec<f64>,
    pub a2_sq: Vec<f64>,
    pub norm: Vec<f64>,
    /// Complex amplitudes at the recorded times.
    pub amplitudes: Vec<Vec2>,
}

impl TrajectoryRecord {
    fn push(&mut self, t: f64, a: &Vec2) {
        let p1 = a[0].norm_sqr();
        let p2 = a[1].norm_sqr();
        self.times.push(t);
        self.a1_sq.push(p1);
        self.a2_sq.push(p2);
        self.norm.push(p1 + p2);
        self.amplitudes.push(*a);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrates the two-level equations from `a0`, recording every
/// `record_every` time units (and at `t_final`).
pub fn propagate(
    drive: &DriveSpec,
    a0: Vec2,
    t_final: f64,
    record_every: f64,
) -> Result<TrajectoryRecord> {
    propagate_with(drive, a0, t_final, record_every, Stepping::default())
}

pub fn propagate_with(
    drive: &DriveSpec,
    a0: Vec2,
    t_final: f64,
    record_every: f64,
    stepping: Stepping,
) -> Result<TrajectoryRecord> {
    if !(t_final > 0.0) {
        return Err(Error::invalid(format!("t_final must be positive, got {t_final}")));
    }
    if !(record_every > 0.0) {
        return Err(Error::invalid(format!(
            "record interval must be positive, got {record_every}"
        )));
    }
    let n_full = (t_final / record_every * (1.0 + 1e-12)).floor() as usize;
    let gen = |t: f64| drive.generator(t);
    let per_record = stepping.steps_for(record_every);
    let mut rec = TrajectoryRecord::default();
    let mut a = a0;
    let mut t = 0.0;
    rec.push(t, &a);
    for k in 1..=n_full {
        let next = (k as f64 * record_every).min(t_final);
        magnus::advance(&gen, t, next, per_record, &mut a);
        t = next;
        rec.push(t, &a);
    }
    if t < t_final * (1.0 - 1e-12) {
        magnus::advance(&gen, t, t_final, stepping.steps_for(t_final - t), &mut a);
        rec.push(t_final, &a);
    }
    Ok(rec)
}

/// Propagator `U(t)` (with `U(0) = 1`) at each of the increasing `times`.
pub fn propagator_samples(drive: &DriveSpec, times: &[f64], stepping: Stepping) -> Result<Vec<Mat2>> {
    let gen = |t: f64| drive.generator(t);
    let mut u = Mat2::identity();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &next in times {
        if !(next >= t) {
            return Err(Error::invalid("sample times must be increasing and non-negative"));
        }
        if next > t {
            let seg = magnus::propagator(&gen, t, next, stepping.steps_for(next - t));
            u = seg.matmul(&u);
        }
        t = next;
        out.push(u);
    }
    Ok(out)
}

/// Maps the interaction-picture amplitudes `c` to the rotating amplitudes
/// `a`: `a₁ = c₁e^{iω₀t/2}`, `a₂ = −i c₂ e^{−iω₀t/2}`.
pub fn map_c_to_a(c1: C64, c2: C64, omega0: f64, t: f64) -> Vec2 {
    let ph = C64::new(0.0, 0.5 * omega0 * t).exp();
    [c1 * ph, -I * c2 / ph]
}

/// Inverse of [`map_c_to_a`].
pub fn map_a_to_c(a: Vec2, omega0: f64, t: f64) -> (C64, C64) {
    let ph = C64::new(0.0, 0.5 * omega0 * t).exp();
    (a[0] / ph, I * a[1] * ph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn decoupled_levels_only_rotate() {
        let d = DriveSpec::hermitian(0.0, 1.3, 0.2).unwrap();
        let rec = propagate(&d, [c(1.0, 0.0), c(0.0, 0.0)], 40.0, 5.0).unwrap();
        assert_eq!(rec.len(), 9);
        for (t, a) in rec.times.iter().zip(&rec.amplitudes) {
            let exact = C64::new(0.0, 1.3 * t / 2.0).exp();
            assert!((a[0] - exact).norm() < 1e-8);
            assert!(a[1].norm() < 1e-14);
        }
        assert!(rec.a1_sq.iter().all(|p| (p - 1.0).abs() < 1e-9));
    }

    #[test]
    fn final_time_is_recorded_when_not_a_multiple() {
        let d = DriveSpec::hermitian(0.5, 1.0, 0.2).unwrap();
        let rec = propagate(&d, [c(1.0, 0.0), c(0.0, 0.0)], 10.5, 2.0).unwrap();
        assert_eq!(*rec.times.last().unwrap(), 10.5);
        assert_eq!(rec.times.len(), 7);
    }

    #[test]
    fn rejects_bad_arguments() {
        let d = DriveSpec::hermitian(0.5, 1.0, 0.2).unwrap();
        assert!(propagate(&d, [c(1.0, 0.0), c(0.0, 0.0)], 0.0, 1.0).is_err());
        assert!(propagate(&d, [c(1.0, 0.0), c(0.0, 0.0)], 1.0, 0.0).is_err());
    }

    #[test]
    fn hermitian_drive_conserves_norm() {
        let d = DriveSpec::hermitian(0.5, 1.0, 0.3).unwrap();
        let rec = propagate(&d, [c(0.6, 0.0), c(0.0, 0.8)], 2000.0, 10.0).unwrap();
        for n in &rec.norm {
            assert!((n - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn map_of_ground_state() {
        let a = map_c_to_a(c(1.0, 0.0), c(0.0, 0.0), 1.0, 2.0);
        assert!((a[0] - C64::new(0.0, 1.0).exp()).norm() < 1e-15);
        assert_eq!(a[1], c(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn map_preserves_magnitudes_and_round_trips(
            r1 in -2.0f64..2.0, i1 in -2.0f64..2.0, r2 in -2.0f64..2.0, i2 in -2.0f64..2.0,
            w in 0.1f64..3.0, t in -50.0f64..50.0,
        ) {
            let (c1, c2) = (c(r1, i1), c(r2, i2));
            let a = map_c_to_a(c1, c2, w, t);
            prop_assert!((a[0].norm() - c1.norm()).abs() < 1e-14);
            prop_assert!((a[1].norm() - c2.norm()).abs() < 1e-14);
            let (b1, b2) = map_a_to_c(a, w, t);
            prop_assert!((b1 - c1).norm() < 1e-15 * 4.0);
            prop_assert!((b2 - c2).norm() < 1e-15 * 4.0);
        }
    }
}
