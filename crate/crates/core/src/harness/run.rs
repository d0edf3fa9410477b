use std::io::Write;

use nalgebra::Vector3;
use serde::Serialize;

use super::config::{ControllerVariant, ScenarioConfig};
use crate::controller::{ff_compensation, StationKeepingController, ThrustVector};
use crate::disturbance::{body_frame_particle_state, pitch_moment, wave_load, DisturbanceLoad};
use crate::error::{Error, Result};
use crate::estimator::{sense, Ekf};
use crate::metrics::{pose_error, power, summarize, RunSummary};
use crate::seeded_rng;
use crate::vehicle::{transform_j, Pose, VehicleModel, VehicleState};
use crate::wave::{inject_spectral_noise, WaveField};

/// One logged control step. Plant quantities are sampled before the step
/// is integrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRow {
    pub t: f64,
    pub truth: VehicleState,
    pub estimate: Pose,
    pub tau_fb: Vector3<f64>,
    pub tau_ff: Vector3<f64>,
    pub mu: ThrustVector,
    pub tau_e: DisturbanceLoad,
    /// Surface elevation above the vehicle.
    pub zeta: f64,
    /// Power per DoF for the force actually delivered by the thrusters.
    pub power: Vector3<f64>,
}

pub const CSV_HEADER: [&str; 31] = [
    "t", "x", "z", "theta", "u", "w", "q", "xh", "zh", "thetah", "taux", "tauz", "taum", "ffx",
    "ffz", "ffm", "mu1", "mu2", "mu3", "mu4", "mu5", "mu6", "mu7", "mu8", "XE", "ZE", "ME", "zeta",
    "Px", "Pz", "Pm",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: ScenarioConfig,
    pub rows: Vec<StepRow>,
    pub summary: RunSummary,
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    name: &'a str,
    controller_variant: ControllerVariant,
    preview_snr: Option<f64>,
    steps: usize,
    skip: f64,
    summary: &'a RunSummary,
    seeds: &'a super::config::Seeds,
    config: &'a ScenarioConfig,
}

impl RunRecord {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        let mut fields: Vec<String> = Vec::with_capacity(CSV_HEADER.len());
        for r in &self.rows {
            fields.clear();
            let s = &r.truth;
            let values = [r.t, s.eta.x, s.eta.z, s.eta.theta, s.nu.u, s.nu.w, s.nu.q]
                .into_iter()
                .chain([r.estimate.x, r.estimate.z, r.estimate.theta])
                .chain(r.tau_fb.iter().copied())
                .chain(r.tau_ff.iter().copied())
                .chain(r.mu.iter().copied())
                .chain([r.tau_e.x_e, r.tau_e.z_e, r.tau_e.m_e, r.zeta])
                .chain(r.power.iter().copied());
            fields.extend(values.map(|v| v.to_string()));
            w.write_record(&fields).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Summary metrics with the full configuration echoed, as pretty JSON.
    pub fn summary_json(&self) -> Result<String> {
        let doc = SummaryDocument {
            name: &self.config.name,
            controller_variant: self.config.controller_variant,
            preview_snr: self.config.preview_snr,
            steps: self.rows.len(),
            skip: self.config.skip,
            summary: &self.summary,
            seeds: &self.config.seeds,
            config: &self.config,
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Writes `run.csv` and `summary.json` into `dir`, creating it if needed.
    pub fn write_to_dir(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let file = std::fs::File::create(dir.join("run.csv"))?;
        self.write_csv(std::io::BufWriter::new(file))?;
        std::fs::write(dir.join("summary.json"), self.summary_json()? + "\n")?;
        Ok(())
    }
}

/// The sea as the controller expects it: the true field, or a copy with
/// amplitude and phase noise at the configured SNR.
pub fn preview_field(config: &ScenarioConfig, truth: &WaveField) -> Result<WaveField> {
    match config.preview_snr_ratio() {
        None => Ok(truth.clone()),
        Some(snr) => inject_spectral_noise(truth, snr, &mut seeded_rng(config.seeds.preview_noise)),
    }
}

/// Feed-forward term from the preview field at the estimated pose.
fn feed_forward(
    config: &ScenarioConfig,
    preview: &WaveField,
    est: &VehicleState,
    t: f64,
) -> Result<Vector3<f64>> {
    // keep the evaluation point inside the water column even if the estimate strays
    let mut at = *est;
    at.eta.z = at.eta.z.clamp(0.0, preview.depth());
    let fluid = preview.particle_kinematics(at.eta.x, -at.eta.z, t)?;
    let (v, a) = body_frame_particle_state(&fluid, at.eta.theta);
    let mut ff = ff_compensation(&v, &a, &config.vehicle);
    if config.ff_pitch_moment {
        let half = 0.5 * config.vehicle.length;
        at.eta.z = at.eta.z.clamp(half, preview.depth() - half);
        ff[2] -= pitch_moment(preview, &at, &config.vehicle, config.n_quad, t)?;
    }
    Ok(ff)
}

/// Simulates the closed loop described by `config`.
pub fn run(config: &ScenarioConfig) -> Result<RunRecord> {
    config.validate()?;
    let steps = config.steps();
    let dt = config.dt;
    let params = &config.vehicle;

    let sea = WaveField::from_spectrum(&config.spectrum)?;
    let preview = match config.controller_variant {
        ControllerVariant::CpdFf => Some(preview_field(config, &sea)?),
        ControllerVariant::Cpd => None,
    };
    let model = VehicleModel::new(params.clone())?;
    let mut controller = StationKeepingController::new(config.gains.clone(), &config.thrusters)?;
    let actuation = *controller.allocator().actuation();
    let ekf = Ekf::new(model.clone(), &config.ekf, actuation)?;
    let mut sensor_rng = seeded_rng(config.seeds.sensor);

    let mut truth = VehicleState::at_rest(config.setpoint);
    let mut predicted = None;
    let mut rows = Vec::with_capacity(steps);

    for k in 0..steps {
        let t = k as f64 * dt;
        let tau_e = wave_load(&sea, &truth, params, config.n_quad, t)?;

        // drawn every step so the noise sequence does not depend on the update rate
        let y = sense(&truth, &config.ekf, &mut sensor_rng);
        let est = match predicted {
            None => ekf.initialize(&y),
            Some(p) if k % config.measurement_every == 0 => ekf.correct(&p, &y)?,
            Some(p) => p,
        };
        let est_state = est.vehicle_state();

        let jt = transform_j(&est_state.eta).transpose();
        let e = jt * pose_error(&config.setpoint, &est_state.eta);
        let nu_hat = est_state.nu.to_vector();
        let e_dot = -nu_hat;

        let ff = match &preview {
            Some(field) => Some(feed_forward(config, field, &est_state, t)?),
            None => None,
        };
        let out = controller.update(&e, &e_dot, &nu_hat, ff, dt);
        let tau = actuation * out.mu;

        rows.push(StepRow {
            t,
            truth,
            estimate: est_state.eta,
            tau_fb: out.tau_fb,
            tau_ff: out.tau_ff,
            mu: out.mu,
            tau_e,
            zeta: sea.elevation(truth.eta.x, t),
            power: power(&tau),
        });

        truth = model
            .step(&truth, &tau, &tau_e.to_vector(), dt)
            .map_err(|_| Error::Divergence { step: k })?;
        predicted = Some(ekf.predict(&est, &out.mu, dt)?);
    }

    let summary = summarize(
        rows.iter()
            .filter(|r| r.t >= config.skip - 1e-9 * dt)
            .map(|r| (r.truth.eta, r.power)),
        &config.setpoint,
        dt,
    )?;
    Ok(RunRecord {
        config: config.clone(),
        rows,
        summary,
    })
}
