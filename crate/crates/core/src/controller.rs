//! Cascaded position/velocity PD control with wave feed-forward, and
//! pseudo-inverse thrust allocation for the eight-thruster layout.

use nalgebra::{Matrix3, SMatrix, SVector, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::disturbance::to_vehicle_axes;
use crate::error::{Error, Result};
use crate::vehicle::VehicleParams;

pub const N_THRUSTERS: usize = 8;

pub type ThrustVector = SVector<f64, N_THRUSTERS>;
pub type Actuation = SMatrix<f64, 3, N_THRUSTERS>;

/// Diagonal gains, stored as their diagonals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    #[serde(rename = "Kp")]
    pub kp: [f64; 3],
    #[serde(rename = "Kd")]
    pub kd: [f64; 3],
    #[serde(rename = "Kpv")]
    pub kpv: [f64; 3],
    /// Largest generalized force per DoF (N, N, N m).
    pub tau_max: [f64; 3],
}

impl Gains {
    /// Default gains with `tau_max` derived from the thruster geometry.
    pub fn for_thrusters(t: &ThrusterConfig) -> Self {
        Self {
            kp: [1.2, 2.0, 1.5],
            kd: [0.4, 0.4, 0.5],
            kpv: [1.0, 1.0, 1.0],
            tau_max: t.tau_max(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.kp.iter().chain(&self.kd).chain(&self.kpv);
        if all.copied().any(|g| !(g >= 0.0 && g.is_finite())) {
            return Err(Error::Config("gains: diagonal entries must be >= 0".into()));
        }
        if self.tau_max.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Config("gains: tau_max must be positive".into()));
        }
        Ok(())
    }
}

impl Default for Gains {
    fn default() -> Self {
        Self::for_thrusters(&ThrusterConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThrusterConfig {
    /// 3x8 allocation matrix, row-major (surge, heave, pitch).
    #[serde(rename = "B_mu")]
    pub b_mu: [[f64; N_THRUSTERS]; 3],
    /// Diagonal of the force-coefficient matrix.
    #[serde(rename = "K_tau")]
    pub k_tau: [f64; N_THRUSTERS],
    /// Motor time constant (s).
    pub t_m: f64,
    /// Per-thruster force limit (N).
    #[serde(rename = "T_max")]
    pub t_max: f64,
    /// Horizontal-thruster azimuth (rad).
    pub alpha: f64,
    /// Pitch moment arm of the vertical thrusters (m).
    pub lever_arm: f64,
}

impl ThrusterConfig {
    /// Planar projection of the BlueROV2 Heavy layout: thrusters 1-4 are
    /// horizontal at azimuth `alpha` and only push in surge; thrusters 5-8
    /// are vertical, two forward and two aft of the centre.
    pub fn bluerov2_heavy(alpha: f64, lever_arm: f64, t_max: f64, t_m: f64) -> Self {
        let c = alpha.cos();
        let l = lever_arm;
        Self {
            b_mu: [
                [c, c, c, c, 0.0, 0.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
                [0.0, 0.0, 0.0, 0.0, -l, -l, l, l],
            ],
            k_tau: [1.0; N_THRUSTERS],
            t_m,
            t_max,
            alpha,
            lever_arm,
        }
    }

    pub fn b_matrix(&self) -> Actuation {
        Actuation::from_fn(|r, c| self.b_mu[r][c])
    }

    /// Actuation matrix `B_mu K_tau` mapping thruster commands to `tau`.
    pub fn actuation(&self) -> Actuation {
        Actuation::from_fn(|r, c| self.b_mu[r][c] * self.k_tau[c])
    }

    /// Generalized force available per DoF when every relevant thruster is
    /// at its limit.
    pub fn tau_max(&self) -> [f64; 3] {
        [
            4.0 * self.t_max * self.alpha.cos(),
            4.0 * self.t_max,
            4.0 * self.t_max * self.lever_arm,
        ]
    }
}

impl Default for ThrusterConfig {
    fn default() -> Self {
        Self::bluerov2_heavy(45f64.to_radians(), 0.22, 35.0, 0.2)
    }
}

/// Feedback half of the control law.
///
/// `e` is the pose error `setpoint - pose` and `e_dot` its rate, both resolved
/// in the body frame. The position loop sets a velocity reference
/// `Kp e + Kd e_dot`; the velocity loop's normalized command is clamped to
/// `[-1, 1]` and scaled by `tau_max`.
pub fn cpd_control(
    e: &Vector3<f64>,
    e_dot: &Vector3<f64>,
    nu_hat: &Vector3<f64>,
    g: &Gains,
) -> Vector3<f64> {
    Vector3::from_fn(|i, _| {
        let v_ref = g.kp[i] * e[i] + g.kd[i] * e_dot[i];
        let cmd = (g.kpv[i] * (v_ref - nu_hat[i])).clamp(-1.0, 1.0);
        g.tau_max[i] * cmd
    })
}

/// Feed-forward wave compensation `M_A nu_p_dot + D(nu_p)(-nu_p)`.
///
/// `nu_p` and `nu_p_dot` are the body-frame particle velocity and acceleration
/// as returned by [`crate::disturbance::body_frame_particle_state`].
pub fn ff_compensation(
    nu_p: &Vector2<f64>,
    nu_p_dot: &Vector2<f64>,
    p: &VehicleParams,
) -> Vector3<f64> {
    let v = to_vehicle_axes(nu_p);
    let a = to_vehicle_axes(nu_p_dot);
    Vector3::new(
        p.x_udot * a[0] - (p.x_u + p.x_uu * v[0].abs()) * v[0],
        p.z_wdot * a[1] - (p.z_w + p.z_ww * v[1].abs()) * v[1],
        p.x_qdot * a[0],
    )
}

/// Pseudo-inverse thrust allocation with first-order motor lag and
/// per-thruster saturation.
#[derive(Debug, Clone)]
pub struct ThrustAllocator {
    actuation: Actuation,
    pinv: SMatrix<f64, N_THRUSTERS, 3>,
    k_inv: ThrustVector,
    t_m: f64,
    t_max: f64,
}

impl ThrustAllocator {
    pub fn new(cfg: &ThrusterConfig) -> Result<Self> {
        if !(cfg.t_max > 0.0 && cfg.t_m > 0.0) {
            return Err(Error::Config(
                "thrusters: T_max and t_m must be positive".into(),
            ));
        }
        if cfg.k_tau.iter().any(|&k| k == 0.0 || !k.is_finite()) {
            return Err(Error::Config("thrusters: K_tau must be non-zero".into()));
        }
        let b = cfg.b_matrix();
        let bbt: Matrix3<f64> = b * b.transpose();
        let eig = bbt.symmetric_eigenvalues();
        if !(eig.min() > 1e-12 * eig.max().max(1.0)) {
            return Err(Error::Config(
                "thrusters: allocation matrix B_mu is rank deficient".into(),
            ));
        }
        let bbt_inv = bbt.try_inverse().ok_or_else(|| {
            Error::Config("thrusters: allocation matrix B_mu is rank deficient".into())
        })?;
        Ok(Self {
            actuation: cfg.actuation(),
            pinv: b.transpose() * bbt_inv,
            k_inv: ThrustVector::from_fn(|i, _| 1.0 / cfg.k_tau[i]),
            t_m: cfg.t_m,
            t_max: cfg.t_max,
        })
    }

    pub fn actuation(&self) -> &Actuation {
        &self.actuation
    }

    /// Unlagged, unsaturated command `K_tau^-1 B_mu^+ tau`.
    pub fn ideal(&self, tau: &Vector3<f64>) -> ThrustVector {
        (self.pinv * tau).component_mul(&self.k_inv)
    }

    pub fn allocate(&self, tau: &Vector3<f64>, mu_prev: &ThrustVector, dt: f64) -> ThrustVector {
        let blend = 1.0 - (-dt / self.t_m).exp();
        let ideal = self.ideal(tau);
        let lagged = mu_prev + (ideal - mu_prev) * blend;
        lagged.map(|m| m.clamp(-self.t_max, self.t_max))
    }

    /// Generalized force `B_mu K_tau mu` actually delivered by the thrusters.
    pub fn generalized_force(&self, mu: &ThrustVector) -> Vector3<f64> {
        self.actuation * mu
    }
}

/// Commands produced by one control update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub tau_fb: Vector3<f64>,
    pub tau_ff: Vector3<f64>,
    pub mu: ThrustVector,
}

/// Per-run controller: feedback law, optional feed-forward and the lagged
/// thruster state `mu_prev`.
#[derive(Debug, Clone)]
pub struct StationKeepingController {
    gains: Gains,
    allocator: ThrustAllocator,
    mu: ThrustVector,
}

impl StationKeepingController {
    pub fn new(gains: Gains, thrusters: &ThrusterConfig) -> Result<Self> {
        gains.validate()?;
        Ok(Self {
            gains,
            allocator: ThrustAllocator::new(thrusters)?,
            mu: ThrustVector::zeros(),
        })
    }

    pub fn allocator(&self) -> &ThrustAllocator {
        &self.allocator
    }

    /// Runs the feedback law, adds `feed_forward` when present and allocates.
    /// Feed-forward is not clamped separately; saturation happens per thruster.
    pub fn update(
        &mut self,
        e: &Vector3<f64>,
        e_dot: &Vector3<f64>,
        nu_hat: &Vector3<f64>,
        feed_forward: Option<Vector3<f64>>,
        dt: f64,
    ) -> ControlOutput {
        let tau_fb = cpd_control(e, e_dot, nu_hat, &self.gains);
        let (tau, tau_ff) = match feed_forward {
            Some(ff) => (tau_fb + ff, ff),
            None => (tau_fb, Vector3::zeros()),
        };
        self.mu = self.allocator.allocate(&tau, &self.mu, dt);
        ControlOutput {
            tau_fb,
            tau_ff,
            mu: self.mu,
        }
    }
}
