//! Planar (surge, heave, pitch) rigid-body dynamics of a small ROV.
//!
//! ```text
//! eta_dot = J(eta) nu
//! M nu_dot + C(nu) nu + D(nu) nu + g(eta) = tau + tau_E
//! ```
//!
//! Earth frame: `x` forward, `z` positive down (depth). Body frame: `u` along
//! the body axis, `w` toward the belly, `q` nose-up pitch rate.

use std::f64::consts::PI;

use nalgebra::{Matrix3, SVector, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wave::GRAVITY;

/// Hydrodynamic and inertial coefficients. Defaults are the BlueROV2 Heavy
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Weight (N).
    #[serde(rename = "W")]
    pub weight: f64,
    /// Buoyancy (N).
    #[serde(rename = "B")]
    pub buoyancy: f64,
    /// Rotational inertia about y (kg m^2).
    #[serde(rename = "Iy")]
    pub iy: f64,
    #[serde(rename = "Xud")]
    pub x_udot: f64,
    #[serde(rename = "Zwd")]
    pub z_wdot: f64,
    #[serde(rename = "Mqd")]
    pub m_qdot: f64,
    /// Surge/pitch added-inertia coupling, shared by `X_qdot` and `M_udot` (kg m).
    #[serde(rename = "Xqd_Mud")]
    pub x_qdot: f64,
    #[serde(rename = "Xu")]
    pub x_u: f64,
    #[serde(rename = "Zw")]
    pub z_w: f64,
    #[serde(rename = "Mq")]
    pub m_q: f64,
    #[serde(rename = "Xuu")]
    pub x_uu: f64,
    #[serde(rename = "Zww")]
    pub z_ww: f64,
    #[serde(rename = "Mqq")]
    pub m_qq: f64,
    /// Centre of buoyancy relative to the centre of gravity (m). Only the
    /// vertical component enters the restoring moment; positive means the
    /// centre of buoyancy sits above the centre of gravity.
    #[serde(rename = "r_B")]
    pub r_b: [f64; 3],
    /// Axial body length (m).
    #[serde(rename = "L")]
    pub length: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            weight: 112.8,
            buoyancy: 114.8,
            iy: 0.253,
            x_udot: 6.36,
            z_wdot: 18.68,
            m_qdot: 0.135,
            x_qdot: 0.67,
            x_u: 13.7,
            z_w: 33.0,
            m_q: 0.80,
            x_uu: 141.0,
            z_ww: 190.0,
            m_qq: 0.47,
            r_b: [0.0, 0.0, 0.028],
            length: 0.457,
        }
    }
}

impl VehicleParams {
    /// Dry mass `W / g`.
    pub fn mass(&self) -> f64 {
        self.weight / GRAVITY
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("W", self.weight),
            ("B", self.buoyancy),
            ("Iy", self.iy),
            ("Xu", self.x_u),
            ("Zw", self.z_w),
            ("Mq", self.m_q),
            ("Xuu", self.x_uu),
            ("Zww", self.z_ww),
            ("Mqq", self.m_qq),
            ("L", self.length),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "vehicle: {name} must be positive, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("Xud", self.x_udot),
            ("Zwd", self.z_wdot),
            ("Mqd", self.m_qdot),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "vehicle: {name} must be >= 0, got {v}"
                )));
            }
        }
        let m = mass_matrix(self);
        let sym = 0.5 * (m + m.transpose());
        let min_eig = sym.symmetric_eigenvalues().min();
        if !(min_eig > 0.0) {
            return Err(Error::Config(format!(
                "vehicle: mass matrix is not positive definite (min eigenvalue {min_eig})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub z: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, z: f64, theta: f64) -> Self {
        Self { x, z, theta }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.z, self.theta)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BodyVelocity {
    pub u: f64,
    pub w: f64,
    pub q: f64,
}

impl BodyVelocity {
    pub fn new(u: f64, w: f64, q: f64) -> Self {
        Self { u, w, q }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.u, self.w, self.q)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub eta: Pose,
    pub nu: BodyVelocity,
}

impl VehicleState {
    pub fn at_rest(eta: Pose) -> Self {
        Self {
            eta,
            nu: BodyVelocity::default(),
        }
    }

    /// `[x, z, theta, u, w, q]`
    pub fn to_vector(self) -> Vector6<f64> {
        let (e, n) = (self.eta, self.nu);
        Vector6::new(e.x, e.z, e.theta, n.u, n.w, n.q)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            eta: Pose::new(v[0], v[1], v[2]),
            nu: BodyVelocity::new(v[3], v[4], v[5]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Body-to-earth velocity transform for a pitch-only rotation.
pub fn transform_j(eta: &Pose) -> Matrix3<f64> {
    let (s, c) = eta.theta.sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

/// `M_RB + M_A`.
pub fn mass_matrix(p: &VehicleParams) -> Matrix3<f64> {
    let m = p.mass();
    let rigid = Matrix3::from_diagonal(&Vector3::new(m, m, p.iy));
    let added = Matrix3::new(
        p.x_udot, 0.0, p.x_qdot, //
        0.0, p.z_wdot, 0.0, //
        p.x_qdot, 0.0, p.m_qdot,
    );
    rigid + added
}

/// Coriolis-centripetal matrix (rigid body plus added mass) built from the
/// total inertia matrix. Skew-symmetric by construction.
pub fn coriolis(p: &VehicleParams, nu: &BodyVelocity) -> Matrix3<f64> {
    coriolis_from_mass(&mass_matrix(p), nu)
}

fn coriolis_from_mass(m: &Matrix3<f64>, nu: &BodyVelocity) -> Matrix3<f64> {
    let m11 = m[(0, 0)];
    let m22 = m[(1, 1)];
    let m13 = 0.5 * (m[(0, 2)] + m[(2, 0)]);
    let a = m22 * nu.w;
    let b = m11 * nu.u + m13 * nu.q;
    Matrix3::new(
        0.0, 0.0, a, //
        0.0, 0.0, -b, //
        -a, b, 0.0,
    )
}

/// Linear plus quadratic damping, `D_L + D_Q |nu|`.
pub fn damping(p: &VehicleParams, nu: &BodyVelocity) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(
        p.x_u + p.x_uu * nu.u.abs(),
        p.z_w + p.z_ww * nu.w.abs(),
        p.m_q + p.m_qq * nu.q.abs(),
    ))
}

/// Hydrostatic restoring vector `g(eta)`.
pub fn restoring(p: &VehicleParams, eta: &Pose) -> Vector3<f64> {
    let (s, c) = eta.theta.sin_cos();
    let net = p.weight - p.buoyancy;
    Vector3::new(net * s, -net * c, p.r_b[2] * p.buoyancy * s)
}

/// Marker error for a step that produced NaN or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonFiniteState;

/// Classic fourth-order Runge-Kutta step for an autonomous system.
pub fn rk4<const N: usize>(
    f: impl Fn(&SVector<f64, N>) -> SVector<f64, N>,
    y: &SVector<f64, N>,
    dt: f64,
) -> SVector<f64, N> {
    let k1 = f(y);
    let k2 = f(&(y + k1 * (0.5 * dt)));
    let k3 = f(&(y + k2 * (0.5 * dt)));
    let k4 = f(&(y + k3 * dt));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Vehicle model with the inertia matrix and its inverse cached.
#[derive(Debug, Clone)]
pub struct VehicleModel {
    params: VehicleParams,
    mass: Matrix3<f64>,
    mass_inv: Matrix3<f64>,
}

impl VehicleModel {
    pub fn new(params: VehicleParams) -> Result<Self> {
        params.validate()?;
        let mass = mass_matrix(&params);
        let mass_inv = mass
            .try_inverse()
            .ok_or_else(|| Error::Config("vehicle: mass matrix is singular".into()))?;
        Ok(Self {
            params,
            mass,
            mass_inv,
        })
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn mass(&self) -> &Matrix3<f64> {
        &self.mass
    }

    /// `(eta_dot, nu_dot)` for the given generalized control and environmental forces.
    pub fn dynamics_rhs(
        &self,
        state: &VehicleState,
        tau: &Vector3<f64>,
        tau_e: &Vector3<f64>,
    ) -> (Vector3<f64>, Vector3<f64>) {
        let nu = state.nu.to_vector();
        let forces = tau + tau_e
            - coriolis_from_mass(&self.mass, &state.nu) * nu
            - damping(&self.params, &state.nu) * nu
            - restoring(&self.params, &state.eta);
        (transform_j(&state.eta) * nu, self.mass_inv * forces)
    }

    fn rhs_vector(
        &self,
        x: &Vector6<f64>,
        tau: &Vector3<f64>,
        tau_e: &Vector3<f64>,
    ) -> Vector6<f64> {
        let (eta_dot, nu_dot) = self.dynamics_rhs(&VehicleState::from_vector(x), tau, tau_e);
        Vector6::new(
            eta_dot[0], eta_dot[1], eta_dot[2], nu_dot[0], nu_dot[1], nu_dot[2],
        )
    }

    /// Raw RK4 transition of the stacked state `[eta; nu]`, without wrapping
    /// or finiteness checks.
    pub fn transition(
        &self,
        x: &Vector6<f64>,
        tau: &Vector3<f64>,
        tau_e: &Vector3<f64>,
        dt: f64,
    ) -> Vector6<f64> {
        rk4(|x| self.rhs_vector(x, tau, tau_e), x, dt)
    }

    /// RK4 advance over `dt` with forces held constant; pitch is re-wrapped.
    pub fn step(
        &self,
        state: &VehicleState,
        tau: &Vector3<f64>,
        tau_e: &Vector3<f64>,
        dt: f64,
    ) -> std::result::Result<VehicleState, NonFiniteState> {
        let x = self.transition(&state.to_vector(), tau, tau_e, dt);
        let mut next = VehicleState::from_vector(&x);
        if !next.is_finite() {
            return Err(NonFiniteState);
        }
        next.eta.theta = wrap_angle(next.eta.theta);
        Ok(next)
    }

    /// `0.5 nu^T M nu`
    pub fn kinetic_energy(&self, nu: &BodyVelocity) -> f64 {
        let v = nu.to_vector();
        0.5 * v.dot(&(self.mass * v))
    }
}
