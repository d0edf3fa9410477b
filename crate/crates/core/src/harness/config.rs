use serde::{Deserialize, Serialize};

use crate::controller::{Gains, ThrusterConfig};
use crate::error::{Error, Result};
use crate::estimator::NoiseConfig;
use crate::vehicle::{Pose, VehicleParams};
use crate::wave::SpectrumParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControllerVariant {
    /// Cascaded PD feedback only.
    #[serde(rename = "CPD")]
    Cpd,
    /// Cascaded PD plus wave feed-forward from the preview field.
    #[serde(rename = "CPD_FF")]
    CpdFf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub wave: u64,
    pub sensor: u64,
    pub preview_noise: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            wave: 1,
            sensor: 2,
            preview_noise: 3,
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn one() -> usize {
    1
}

fn is_one(v: &usize) -> bool {
    *v == 1
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

/// Full description of one closed-loop station-keeping run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    /// Duration (s).
    pub duration: f64,
    /// Integration and control step (s).
    pub dt: f64,
    /// Water depth (m); must match `spectrum.depth_d`.
    pub depth_d: f64,
    pub controller_variant: ControllerVariant,
    /// Signal-to-noise power ratio of the controller's preview of the sea.
    /// Absent means the preview is exact.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preview_snr: Option<f64>,
    /// Reads `preview_snr` in decibels instead of as a power ratio.
    #[serde(default, skip_serializing_if = "is_false")]
    pub preview_snr_db: bool,
    /// Quadrature stations along the hull for the pitch moment.
    pub n_quad: usize,
    /// Steps between EKF measurement updates (1 = every step).
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub measurement_every: usize,
    /// Leading seconds excluded from the summary metrics.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub skip: f64,
    /// Adds the negated wave pitch moment of the preview field to the pitch
    /// feed-forward.
    #[serde(default, skip_serializing_if = "is_false")]
    pub ff_pitch_moment: bool,
    /// Station-keeping target; `z` is depth below the still-water level.
    pub setpoint: Pose,
    pub seeds: Seeds,
    pub spectrum: SpectrumParams,
    pub vehicle: VehicleParams,
    pub gains: Gains,
    pub thrusters: ThrusterConfig,
    pub ekf: NoiseConfig,
}

impl ScenarioConfig {
    /// Default scenario for a sea state: 600 s at 20 Hz, 5 m depth in 54 m of water.
    pub fn for_sea(name: &str, hs: f64, tp: f64) -> Self {
        let seeds = Seeds::default();
        let mut spectrum = SpectrumParams::new(hs, tp);
        spectrum.seed = seeds.wave;
        let thrusters = ThrusterConfig::default();
        Self {
            name: name.to_string(),
            duration: 600.0,
            dt: 0.05,
            depth_d: spectrum.depth_d,
            controller_variant: ControllerVariant::CpdFf,
            preview_snr: None,
            preview_snr_db: false,
            n_quad: 16,
            measurement_every: 1,
            skip: 0.0,
            ff_pitch_moment: false,
            setpoint: Pose::new(0.0, 5.0, 0.0),
            seeds,
            spectrum,
            vehicle: VehicleParams::default(),
            gains: Gains::for_thrusters(&thrusters),
            thrusters,
            ekf: NoiseConfig::default(),
        }
    }

    /// Preview SNR as a power ratio, if the preview is corrupted.
    pub fn preview_snr_ratio(&self) -> Option<f64> {
        self.preview_snr.map(|s| {
            if self.preview_snr_db {
                crate::wave::snr_from_db(s)
            } else {
                s
            }
        })
    }

    /// Number of simulation steps, `duration / dt`.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Sets the wave seed in both places it is recorded.
    pub fn set_wave_seed(&mut self, seed: u64) {
        self.seeds.wave = seed;
        self.spectrum.seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        let n = self.duration / self.dt;
        if n < 0.5 || (n - n.round()).abs() > 1e-6 * n.max(1.0) {
            return bad(format!(
                "duration {} is not a whole number of dt {}",
                self.duration, self.dt
            ));
        }
        if !(self.depth_d > 0.0 && self.depth_d.is_finite()) {
            return bad(format!("depth_d must be positive, got {}", self.depth_d));
        }
        if self.spectrum.depth_d != self.depth_d {
            return bad(format!(
                "spectrum.depth_d ({}) differs from depth_d ({})",
                self.spectrum.depth_d, self.depth_d
            ));
        }
        if self.spectrum.seed != self.seeds.wave {
            return bad(format!(
                "spectrum.seed ({}) differs from seeds.wave ({})",
                self.spectrum.seed, self.seeds.wave
            ));
        }
        if !(self.setpoint.z > 0.0 && self.setpoint.z < self.depth_d) {
            return bad(format!(
                "setpoint depth {} is outside (0, {})",
                self.setpoint.z, self.depth_d
            ));
        }
        if ![self.setpoint.x, self.setpoint.theta]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("setpoint must be finite".into());
        }
        if let Some(snr) = self.preview_snr {
            let ok = snr.is_finite() && (self.preview_snr_db || snr > 0.0);
            if !ok {
                return bad(format!(
                    "preview_snr must be a positive ratio or finite dB value, got {snr}"
                ));
            }
        }
        if self.measurement_every == 0 {
            return bad("measurement_every must be >= 1".into());
        }
        if self.n_quad < 2 {
            return bad(format!("n_quad must be >= 2, got {}", self.n_quad));
        }
        if !(self.skip >= 0.0 && self.skip < self.duration) {
            return bad(format!("skip must lie in [0, duration), got {}", self.skip));
        }
        self.spectrum.validate()?;
        self.vehicle.validate()?;
        self.gains.validate()?;
        self.ekf.validate()?;
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Sea states of the reference study: `(id, Tp s, Hs m)`.
pub const PRESETS: [(&str, f64, f64); 3] =
    [("W1", 7.1, 2.78), ("W2", 9.5, 3.47), ("W3", 11.1, 3.24)];

/// Scenario for one of the reference sea states `W1`, `W2`, `W3`.
pub fn preset(case_id: &str) -> Result<ScenarioConfig> {
    PRESETS
        .iter()
        .find(|(id, _, _)| id.eq_ignore_ascii_case(case_id))
        .map(|&(id, tp, hs)| ScenarioConfig::for_sea(id, hs, tp))
        .ok_or_else(|| {
            Error::Usage(format!(
                "unknown preset '{case_id}' (expected W1, W2 or W3)"
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_table() {
        assert_eq!(preset("W2").unwrap().spectrum.tp, 9.5);
        assert_eq!(preset("W3").unwrap().spectrum.hs, 3.24);
        let w1 = preset("w1").unwrap();
        assert_eq!((w1.spectrum.tp, w1.spectrum.hs), (7.1, 2.78));
        for (id, _, _) in PRESETS {
            let c = preset(id).unwrap();
            assert_eq!(c.duration, 600.0);
            assert_eq!(c.dt, 0.05);
            assert_eq!(c.depth_d, 54.0);
            assert_eq!(c.setpoint, Pose::new(0.0, 5.0, 0.0));
            assert_eq!(c.steps(), 12000);
            c.validate().unwrap();
        }
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("W4"), Err(Error::Usage(_))));
    }

    #[test]
    fn toml_round_trip() {
        let mut c = preset("W1").unwrap();
        c.preview_snr = Some(15.0);
        c.skip = 30.0;
        c.measurement_every = 4;
        c.preview_snr_db = true;
        let text = c.to_toml().unwrap();
        assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), c);
        let exact = preset("W2").unwrap();
        let text = exact.to_toml().unwrap();
        assert!(!text.contains("preview_snr"));
        assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), exact);
    }

    #[test]
    fn rejects_inconsistent_configs() {
        let base = preset("W1").unwrap();
        let cases: Vec<Box<dyn Fn(&mut ScenarioConfig)>> = vec![
            Box::new(|c| c.dt = 0.0),
            Box::new(|c| c.duration = -1.0),
            Box::new(|c| c.dt = 0.07),
            Box::new(|c| c.setpoint.z = 60.0),
            Box::new(|c| c.setpoint.z = 0.0),
            Box::new(|c| c.spectrum.seed = 99),
            Box::new(|c| c.depth_d = 30.0),
            Box::new(|c| c.preview_snr = Some(0.0)),
            Box::new(|c| c.n_quad = 1),
            Box::new(|c| c.measurement_every = 0),
            Box::new(|c| c.vehicle.weight = -1.0),
        ];
        for (i, f) in cases.iter().enumerate() {
            let mut c = base.clone();
            f(&mut c);
            assert!(matches!(c.validate(), Err(Error::Config(_))), "case {i}");
        }
    }

    #[test]
    fn malformed_toml_is_config_error() {
        assert!(matches!(
            ScenarioConfig::from_toml("duration = ["),
            Err(Error::Config(_))
        ));
    }
}
