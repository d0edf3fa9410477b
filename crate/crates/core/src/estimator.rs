//! Extended Kalman filter over the six-dimensional state `[x, z, theta, u, w, q]`.
//!
//! The predictor propagates the estimate through the same RK4 vehicle model
//! used for the plant, forced by the allocated thruster commands; wave loads
//! are not modelled inside the filter and enter only through `Q`. The state
//! transition Jacobian is taken by central finite differences.

use nalgebra::{Matrix3, Matrix6, SMatrix, Vector3, Vector6};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::controller::{Actuation, ThrustVector};
use crate::error::{Error, Result};
use crate::vehicle::{wrap_angle, VehicleModel, VehicleState};

pub type MeasurementMatrix = SMatrix<f64, 3, 6>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Process-noise covariance, added once per prediction.
    #[serde(rename = "Q")]
    pub q: [[f64; 6]; 6],
    /// Measurement-noise covariance.
    #[serde(rename = "R")]
    pub r: [[f64; 3]; 3],
    /// Measurement matrix.
    #[serde(rename = "H")]
    pub h: [[f64; 6]; 3],
}

fn diag<const N: usize>(d: [f64; N]) -> [[f64; N]; N] {
    let mut m = [[0.0; N]; N];
    for i in 0..N {
        m[i][i] = d[i];
    }
    m
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let deg = 0.5f64.to_radians();
        let mut h = [[0.0; 6]; 3];
        for (i, row) in h.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self {
            q: diag([1e-6, 1e-6, 1e-7, 1e-3, 1e-3, 1e-4]),
            r: diag([0.01 * 0.01, 0.01 * 0.01, deg * deg]),
            h,
        }
    }
}

impl NoiseConfig {
    /// All-zero noise: exact measurements and no process noise.
    pub fn noiseless() -> Self {
        Self {
            q: [[0.0; 6]; 6],
            r: [[0.0; 3]; 3],
            ..Self::default()
        }
    }

    pub fn q_matrix(&self) -> Matrix6<f64> {
        Matrix6::from_fn(|r, c| self.q[r][c])
    }

    pub fn r_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.r[r][c])
    }

    pub fn h_matrix(&self) -> MeasurementMatrix {
        MeasurementMatrix::from_fn(|r, c| self.h[r][c])
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.q_matrix();
        let r = self.r_matrix();
        if (q - q.transpose()).amax() > 1e-12 || q.symmetric_eigenvalues().min() < -1e-12 {
            return Err(Error::Config(
                "ekf: Q must be symmetric positive semi-definite".into(),
            ));
        }
        if (r - r.transpose()).amax() > 1e-12 || r.symmetric_eigenvalues().min() < -1e-12 {
            return Err(Error::Config(
                "ekf: R must be symmetric positive semi-definite".into(),
            ));
        }
        if self.h_matrix().iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("ekf: H must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EkfState {
    pub x_hat: Vector6<f64>,
    pub p: Matrix6<f64>,
}

impl EkfState {
    pub fn vehicle_state(&self) -> VehicleState {
        VehicleState::from_vector(&self.x_hat)
    }
}

/// Draws a measurement `y = H x + v`, `v ~ N(0, R)`.
pub fn sense<R: Rng + ?Sized>(
    truth: &VehicleState,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Vector3<f64> {
    let clean = noise.h_matrix() * truth.to_vector();
    let n = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    clean + covariance_sqrt(&noise.r_matrix()) * n
}

/// Symmetric square root `V sqrt(L) V^T` of a PSD matrix; tolerates singular
/// (including all-zero) covariances.
fn covariance_sqrt(r: &Matrix3<f64>) -> Matrix3<f64> {
    if r.iter().all(|&v| v == 0.0) {
        return Matrix3::zeros();
    }
    let eig = r.symmetric_eigen();
    let sqrt_l = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    eig.eigenvectors * Matrix3::from_diagonal(&sqrt_l) * eig.eigenvectors.transpose()
}

fn symmetrize(p: &Matrix6<f64>) -> Matrix6<f64> {
    0.5 * (p + p.transpose())
}

#[derive(Debug, Clone)]
pub struct Ekf {
    model: VehicleModel,
    actuation: Actuation,
    q: Matrix6<f64>,
    r: Matrix3<f64>,
    h: MeasurementMatrix,
    /// Index of the measurement row that reads pitch directly, if any; its
    /// innovation is wrapped into (-pi, pi].
    angle_row: Option<usize>,
}

impl Ekf {
    pub fn new(model: VehicleModel, noise: &NoiseConfig, actuation: Actuation) -> Result<Self> {
        noise.validate()?;
        let h = noise.h_matrix();
        let angle_row =
            (0..3).find(|&r| (0..6).all(|c| h[(r, c)] == if c == 2 { 1.0 } else { 0.0 }));
        Ok(Self {
            model,
            actuation,
            q: noise.q_matrix(),
            r: noise.r_matrix(),
            h,
            angle_row,
        })
    }

    /// Filter state from a first measurement: measured components copied in,
    /// velocities zero, `P0 = 0.1 I`.
    pub fn initialize(&self, y: &Vector3<f64>) -> EkfState {
        EkfState {
            x_hat: self.h.transpose() * y,
            p: Matrix6::identity() * 0.1,
        }
    }

    fn transition(&self, x: &Vector6<f64>, tau: &Vector3<f64>, dt: f64) -> Vector6<f64> {
        self.model.transition(x, tau, &Vector3::zeros(), dt)
    }

    /// Central-difference Jacobian of the discrete transition at `x`.
    pub fn jacobian(&self, x: &Vector6<f64>, tau: &Vector3<f64>, dt: f64) -> Matrix6<f64> {
        let mut a = Matrix6::zeros();
        for j in 0..6 {
            let h = 1e-6 * x[j].abs().max(1.0);
            let mut xp = *x;
            let mut xm = *x;
            xp[j] += h;
            xm[j] -= h;
            let col = (self.transition(&xp, tau, dt) - self.transition(&xm, tau, dt)) / (2.0 * h);
            a.set_column(j, &col);
        }
        a
    }

    pub fn predict(&self, ekf: &EkfState, mu: &ThrustVector, dt: f64) -> Result<EkfState> {
        let tau = self.actuation * mu;
        let a = self.jacobian(&ekf.x_hat, &tau, dt);
        let next = self
            .model
            .step(
                &VehicleState::from_vector(&ekf.x_hat),
                &tau,
                &Vector3::zeros(),
                dt,
            )
            .map_err(|_| Error::EstimatorDivergence("non-finite state prediction".into()))?;
        let p = symmetrize(&(a * ekf.p * a.transpose() + self.q));
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::EstimatorDivergence(
                "non-finite covariance prediction".into(),
            ));
        }
        Ok(EkfState {
            x_hat: next.to_vector(),
            p,
        })
    }

    fn innovation(&self, ekf: &EkfState, y: &Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
        let mut nu = y - self.h * ekf.x_hat;
        if let Some(r) = self.angle_row {
            nu[r] = wrap_angle(nu[r]);
        }
        let s = self.h * ekf.p * self.h.transpose() + self.r;
        (nu, s)
    }

    fn invert_innovation(s: &Matrix3<f64>) -> Result<Matrix3<f64>> {
        s.cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| Error::SingularInnovation {
                covariance: format!("{s:?}"),
            })
    }

    pub fn correct(&self, ekf: &EkfState, y: &Vector3<f64>) -> Result<EkfState> {
        let (nu, s) = self.innovation(ekf, y);
        let s_inv = Self::invert_innovation(&s)?;
        let k = ekf.p * self.h.transpose() * s_inv;
        let mut x_hat = ekf.x_hat + k * nu;
        x_hat[2] = wrap_angle(x_hat[2]);
        let p = symmetrize(&((Matrix6::identity() - k * self.h) * ekf.p));
        Ok(EkfState { x_hat, p })
    }

    /// Normalized innovation squared `nu^T S^-1 nu` for a measurement.
    pub fn normalized_innovation_squared(&self, ekf: &EkfState, y: &Vector3<f64>) -> Result<f64> {
        let (nu, s) = self.innovation(ekf, y);
        Ok(nu.dot(&(Self::invert_innovation(&s)? * nu)))
    }
}
