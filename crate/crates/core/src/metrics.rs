//! Mission evaluation: pose-error statistics and thruster power/energy.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vehicle::{wrap_angle, Pose};

const POWER_C3: f64 = 0.0011;
const POWER_C2: f64 = 0.02078;
const POWER_C1: f64 = 0.297;

/// Electrical power in W drawn to produce a generalized force of magnitude `|tau|`.
pub fn power_scalar(tau: f64) -> f64 {
    let a = tau.abs();
    ((POWER_C3 * a + POWER_C2) * a + POWER_C1) * a
}

/// Per-DoF power for a generalized force vector.
pub fn power(tau: &Vector3<f64>) -> Vector3<f64> {
    tau.map(power_scalar)
}

/// Pose error `setpoint - pose` with the pitch difference wrapped.
pub fn pose_error(setpoint: &Pose, pose: &Pose) -> Vector3<f64> {
    Vector3::new(
        setpoint.x - pose.x,
        setpoint.z - pose.z,
        wrap_angle(setpoint.theta - pose.theta),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rmse: [f64; 3],
    pub max_abs_err: [f64; 3],
    pub energy: [f64; 3],
    pub mean_power: [f64; 3],
}

/// Aggregates `(pose, power)` samples taken every `dt` seconds.
pub fn summarize<I>(samples: I, setpoint: &Pose, dt: f64) -> Result<RunSummary>
where
    I: IntoIterator<Item = (Pose, Vector3<f64>)>,
{
    let mut sq = Vector3::zeros();
    let mut max = Vector3::<f64>::zeros();
    let mut psum = Vector3::zeros();
    let mut n = 0usize;
    for (pose, p) in samples {
        let e = pose_error(setpoint, &pose);
        sq += e.component_mul(&e);
        max = max.zip_map(&e, |m, v| m.max(v.abs()));
        psum += p;
        n += 1;
    }
    if n == 0 {
        return Err(Error::Usage("cannot summarize an empty series".into()));
    }
    let nf = n as f64;
    Ok(RunSummary {
        rmse: (sq / nf).map(f64::sqrt).into(),
        max_abs_err: max.into(),
        energy: (psum * dt).into(),
        mean_power: (psum / nf).into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn power_spot_values() {
        assert_eq!(power_scalar(0.0), 0.0);
        let oracle = 0.0011 * 1000.0 + 0.02078 * 100.0 + 0.297 * 10.0;
        assert_relative_eq!(power_scalar(10.0), oracle, max_relative = 1e-14);
        assert_relative_eq!(power_scalar(10.0), 6.148, max_relative = 1e-12);
        assert_eq!(power_scalar(-10.0), power_scalar(10.0));
    }

    #[test]
    fn constant_error() {
        let sp = Pose::new(0.0, 5.0, 0.0);
        let rows = (0..10).map(|_| (Pose::new(-1.0, 4.0, 1.0), Vector3::new(1.0, 2.0, 3.0)));
        let s = summarize(rows, &sp, 0.1).unwrap();
        for i in 0..3 {
            assert_relative_eq!(s.rmse[i], 1.0, max_relative = 1e-14);
            assert_relative_eq!(s.max_abs_err[i], 1.0, max_relative = 1e-14);
        }
        assert_relative_eq!(s.energy[2], 3.0, max_relative = 1e-12);
        assert_relative_eq!(s.mean_power[1], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn three_four() {
        let sp = Pose::default();
        let rows = [3.0, 4.0].map(|x| (Pose::new(x, 0.0, 0.0), Vector3::zeros()));
        let s = summarize(rows, &sp, 0.05).unwrap();
        assert_relative_eq!(s.rmse[0], 12.5f64.sqrt(), max_relative = 1e-14);
        assert_eq!(s.max_abs_err[0], 4.0);
    }

    #[test]
    fn zero_error_run() {
        let sp = Pose::new(0.0, 5.0, 0.0);
        let s = summarize([(sp, Vector3::new(0.5, 0.5, 0.5))], &sp, 1.0).unwrap();
        assert_eq!(s.rmse, [0.0; 3]);
        assert_eq!(s.max_abs_err, [0.0; 3]);
        assert_eq!(s.energy, [0.5; 3]);
    }

    #[test]
    fn empty_series_is_usage_error() {
        let none: Vec<(Pose, Vector3<f64>)> = vec![];
        assert!(matches!(
            summarize(none, &Pose::default(), 0.1),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn pitch_error_wraps() {
        let sp = Pose::new(0.0, 0.0, 3.1);
        let e = pose_error(&sp, &Pose::new(0.0, 0.0, -3.1));
        assert_relative_eq!(e[2], 6.2 - 2.0 * std::f64::consts::PI, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn power_monotone(a in 0.0f64..100.0, d in 1e-6f64..10.0) {
            prop_assert!(power_scalar(a + d) > power_scalar(a));
            prop_assert!(power_scalar(-a) >= 0.0);
        }

        #[test]
        fn max_bounds_rmse(errs in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -1.0f64..1.0), 1..50)) {
            let rows: Vec<_> = errs.iter().map(|&(x, z, t)| (Pose::new(x, z, t), Vector3::zeros())).collect();
            let s = summarize(rows, &Pose::default(), 0.05).unwrap();
            for i in 0..3 {
                prop_assert!(s.max_abs_err[i] + 1e-12 >= s.rmse[i]);
            }
        }

        #[test]
        fn energy_is_additive(ps in proptest::collection::vec(0.0f64..50.0, 2..40), cut in 1usize..39) {
            let cut = cut.min(ps.len() - 1);
            let sp = Pose::default();
            let rows = |s: &[f64]| s.iter().map(|&p| (sp, Vector3::repeat(p))).collect::<Vec<_>>();
            let whole = summarize(rows(&ps), &sp, 0.05).unwrap().energy[0];
            let a = summarize(rows(&ps[..cut]), &sp, 0.05).unwrap().energy[0];
            let b = summarize(rows(&ps[cut..]), &sp, 0.05).unwrap().energy[0];
            prop_assert!((whole - a - b).abs() <= 1e-9 * whole.max(1.0));
        }
    }
}
