//! Wave-induced generalized loads from local fluid kinematics.
//!
//! Surge and heave loads combine an added-inertia term on the fluid
//! acceleration with the vehicle's own linear-plus-quadratic drag law applied
//! to the fluid velocity. The pitch moment integrates a per-unit-length heave
//! load along the (pitched) body axis.
//!
//! Loads are returned in the vehicle body axes used by the dynamics (heave
//! positive toward the belly), so a rising water column pushes the vehicle up.

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};
use crate::vehicle::{VehicleParams, VehicleState};
use crate::wave::{FluidState, WaveField};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DisturbanceLoad {
    pub x_e: f64,
    pub z_e: f64,
    pub m_e: f64,
}

impl DisturbanceLoad {
    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x_e, self.z_e, self.m_e)
    }
}

/// Rotates particle velocity and acceleration by `R_y(theta)`.
///
/// The result is expressed on the body axis (first component) and the body
/// normal pointing toward the top of the vehicle (second component), which
/// is the wave frame's `z`-up sense carried along with the body.
pub fn body_frame_particle_state(fluid: &FluidState, theta: f64) -> (Vector2<f64>, Vector2<f64>) {
    let (s, c) = theta.sin_cos();
    let rot = |a: f64, b: f64| Vector2::new(c * a + s * b, -s * a + c * b);
    (rot(fluid.u_p, fluid.w_p), rot(fluid.du_p, fluid.dw_p))
}

/// Converts a `body_frame_particle_state` vector (top-pointing normal) to the
/// vehicle's dynamic axes (belly-pointing heave).
pub fn to_vehicle_axes(v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(v[0], -v[1])
}

/// Surge and heave wave forces for body-frame particle velocity and
/// acceleration given in vehicle axes.
pub fn surge_heave_load(
    p: &VehicleParams,
    nu_p: &Vector2<f64>,
    nu_p_dot: &Vector2<f64>,
) -> Vector2<f64> {
    Vector2::new(
        p.x_udot * nu_p_dot[0] + (p.x_u + p.x_uu * nu_p[0].abs()) * nu_p[0],
        p.z_wdot * nu_p_dot[1] + (p.z_w + p.z_ww * nu_p[1].abs()) * nu_p[1],
    )
}

/// Composite Simpson over equally spaced samples. An odd number of intervals
/// closes with Simpson's 3/8 rule on the last three; two samples fall back to
/// the trapezoid.
pub fn composite_simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals % 2 == 0 { n - 1 } else { n - 4 };
            let mut sum = 0.0;
            let mut i = 0;
            while i + 2 <= simpson_end {
                sum += h / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
                i += 2;
            }
            if intervals % 2 == 1 {
                let j = n - 4;
                sum += 3.0 * h / 8.0
                    * (values[j] + 3.0 * values[j + 1] + 3.0 * values[j + 2] + values[j + 3]);
            }
            sum
        }
    }
}

/// Maps an earth-frame vehicle point (z down) to wave-frame depth (z up),
/// rejecting points outside the water column.
fn wave_depth(field: &WaveField, z_earth: f64) -> Result<f64> {
    let z = -z_earth;
    if z > 0.0 || z < -field.depth() {
        return Err(Error::Domain(format!(
            "body point at depth {z_earth} m is outside the water column [0, {}]",
            field.depth()
        )));
    }
    Ok(z)
}

/// Wave pitch moment: the per-unit-length heave load integrated against the
/// arm `x'` over `n_quad` stations spanning the body length.
pub fn pitch_moment(
    field: &WaveField,
    state: &VehicleState,
    p: &VehicleParams,
    n_quad: usize,
    t: f64,
) -> Result<f64> {
    if n_quad < 2 {
        return Err(Error::Config(format!("n_quad must be >= 2, got {n_quad}")));
    }
    let eta = state.eta;
    let (s, c) = eta.theta.sin_cos();
    let half = 0.5 * p.length;
    let h = p.length / (n_quad - 1) as f64;
    let per_len = 1.0 / p.length;
    let mut integrand = Vec::with_capacity(n_quad);
    for i in 0..n_quad {
        let arm = -half + h * i as f64;
        // body point (arm, 0) carried into the earth frame by J(theta)
        let x = eta.x + c * arm;
        let z = wave_depth(field, eta.z - s * arm)?;
        let fluid = field.particle_kinematics(x, z, t)?;
        let (v, a) = body_frame_particle_state(&fluid, eta.theta);
        let (vz, az) = (-v[1], -a[1]);
        let z_per_len = per_len * (p.z_wdot * az + (p.z_w + p.z_ww * vz.abs()) * vz);
        // a belly-ward force ahead of the origin pitches the nose down
        integrand.push(-z_per_len * arm);
    }
    Ok(composite_simpson(&integrand, h))
}

/// Wave load `tau_E` on a vehicle in `state` at time `t`.
pub fn wave_load(
    field: &WaveField,
    state: &VehicleState,
    p: &VehicleParams,
    n_quad: usize,
    t: f64,
) -> Result<DisturbanceLoad> {
    let z = wave_depth(field, state.eta.z)?;
    let fluid = field.particle_kinematics(state.eta.x, z, t)?;
    let (v, a) = body_frame_particle_state(&fluid, state.eta.theta);
    let f = surge_heave_load(p, &to_vehicle_axes(&v), &to_vehicle_axes(&a));
    Ok(DisturbanceLoad {
        x_e: f[0],
        z_e: f[1],
        m_e: pitch_moment(field, state, p, n_quad, t)?,
    })
}
