//! Irregular long-crested sea states.
//!
//! A sea state is a bank of monochromatic components drawn from a JONSWAP
//! spectrum. Each component satisfies the finite-depth dispersion relation
//! `omega^2 = g kappa tanh(kappa d)`. Elevation and sub-surface particle
//! kinematics follow second-order (Stokes) theory; particle accelerations are
//! the exact time derivatives of the velocity series.
//!
//! Vertical convention here is wave-frame: `z` is positive up, `z = 0` at the
//! still-water level and the seabed sits at `z = -depth_d`.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.81;

/// Phillips constant used by the North Sea JONSWAP fit.
pub const PHILLIPS_ALPHA: f64 = 0.0081;

const DISPERSION_MAX_ITER: usize = 100;
const DISPERSION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    /// Significant wave height (m).
    #[serde(rename = "Hs")]
    pub hs: f64,
    /// Peak period (s).
    #[serde(rename = "Tp")]
    pub tp: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub depth_d: f64,
    pub n_components: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub seed: u64,
}

impl SpectrumParams {
    /// JONSWAP defaults around a given `(Hs, Tp)`: `gamma = 3.3`, 128
    /// components spread over `[0.4, 4] * omega_p`, 54 m of water.
    pub fn new(hs: f64, tp: f64) -> Self {
        let omega_p = TAU / tp;
        Self {
            hs,
            tp,
            gamma: 3.3,
            alpha: PHILLIPS_ALPHA,
            depth_d: 54.0,
            n_components: 128,
            omega_min: 0.4 * omega_p,
            omega_max: 4.0 * omega_p,
            seed: 0,
        }
    }

    pub fn omega_p(&self) -> f64 {
        TAU / self.tp
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("spectrum: {msg}")));
        if !(self.hs > 0.0 && self.hs.is_finite()) {
            return bad("Hs must be positive");
        }
        if !(self.tp > 0.0 && self.tp.is_finite()) {
            return bad("Tp must be positive");
        }
        if !(self.gamma >= 1.0) {
            return bad("gamma must be >= 1");
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        if !(self.depth_d > 0.0 && self.depth_d.is_finite()) {
            return bad("depth_d must be positive");
        }
        if self.n_components == 0 {
            return bad("n_components must be >= 1");
        }
        if !(self.omega_min > 0.0 && self.omega_max.is_finite()) {
            return bad("omega band must be positive and finite");
        }
        if self.omega_min > self.omega_max {
            return bad("omega_min exceeds omega_max");
        }
        if self.omega_min == self.omega_max && self.n_components > 1 {
            return bad("degenerate omega band with more than one component");
        }
        Ok(())
    }
}

/// One monochromatic wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveComponent {
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub omega: f64,
    pub kappa: f64,
    #[serde(rename = "eps")]
    pub phase: f64,
    #[serde(rename = "c")]
    pub celerity: f64,
}

impl WaveComponent {
    /// Builds a component from amplitude, frequency and phase, solving for the
    /// wavenumber at the given depth.
    pub fn from_frequency(amplitude: f64, omega: f64, phase: f64, depth_d: f64) -> Result<Self> {
        let kappa = solve_dispersion(omega, depth_d)?;
        Ok(Self {
            amplitude,
            omega,
            kappa,
            phase: wrap_phase(phase),
            celerity: omega / kappa,
        })
    }
}

/// Per-component constants reused at every evaluation point.
#[derive(Debug, Clone, Copy)]
struct Coeffs {
    /// exp(-2 kappa d)
    e2kd: f64,
    /// first-order velocity amplitude g H / (2 c)
    a1: f64,
    /// second-order velocity amplitude 3/16 c kappa^2 H^2
    b2: f64,
    /// 8 / (1 - e2kd)^4, the stable form of 1/sinh^4 without the exponential
    inv_sinh4: f64,
    /// 1 / (1 + e2kd)
    inv_cosh: f64,
}

impl Coeffs {
    fn new(c: &WaveComponent, depth: f64) -> Self {
        let e2kd = (-2.0 * c.kappa * depth).exp();
        let h = 2.0 * c.amplitude;
        Self {
            e2kd,
            a1: GRAVITY * h / (2.0 * c.celerity),
            b2: 3.0 / 16.0 * c.celerity * c.kappa * c.kappa * h * h,
            inv_sinh4: 8.0 / (1.0 - e2kd).powi(4),
            inv_cosh: 1.0 / (1.0 + e2kd),
        }
    }
}

/// A sea state: ordered components plus the seabed depth.
///
/// Immutable after construction; every component is checked against the
/// dispersion relation.
#[derive(Debug, Clone)]
pub struct WaveField {
    components: Vec<WaveComponent>,
    depth_d: f64,
    coeffs: Vec<Coeffs>,
}

impl PartialEq for WaveField {
    fn eq(&self, other: &Self) -> bool {
        self.depth_d.to_bits() == other.depth_d.to_bits()
            && self.components.len() == other.components.len()
            && self.components.iter().zip(&other.components).all(|(a, b)| {
                a.amplitude.to_bits() == b.amplitude.to_bits()
                    && a.omega.to_bits() == b.omega.to_bits()
                    && a.kappa.to_bits() == b.kappa.to_bits()
                    && a.phase.to_bits() == b.phase.to_bits()
                    && a.celerity.to_bits() == b.celerity.to_bits()
            })
    }
}

/// Surface elevation and particle kinematics at one point (wave frame, z up).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FluidState {
    pub zeta: f64,
    pub u_p: f64,
    pub w_p: f64,
    pub du_p: f64,
    pub dw_p: f64,
}

impl WaveField {
    pub fn new(components: Vec<WaveComponent>, depth_d: f64) -> Result<Self> {
        if !(depth_d > 0.0 && depth_d.is_finite()) {
            return Err(Error::Config("wave field depth must be positive".into()));
        }
        for (i, c) in components.iter().enumerate() {
            let fail = |msg: String| Err(Error::Config(format!("wave component {i}: {msg}")));
            if !(c.amplitude >= 0.0 && c.amplitude.is_finite()) {
                return fail(format!("amplitude {} must be >= 0", c.amplitude));
            }
            if !(c.omega > 0.0 && c.kappa > 0.0) {
                return fail("omega and kappa must be positive".into());
            }
            if !(0.0..TAU).contains(&c.phase) {
                return fail(format!("phase {} outside [0, 2pi)", c.phase));
            }
            let residual = dispersion_residual(c.omega, c.kappa, depth_d);
            if residual.abs() >= DISPERSION_TOL {
                return fail(format!("dispersion residual {residual:e}"));
            }
            let c_expected = c.omega / c.kappa;
            if ((c.celerity - c_expected) / c_expected).abs() > 1e-9 {
                return fail(format!(
                    "celerity {} != omega/kappa {}",
                    c.celerity, c_expected
                ));
            }
        }
        let coeffs = components.iter().map(|c| Coeffs::new(c, depth_d)).collect();
        Ok(Self {
            components,
            depth_d,
            coeffs,
        })
    }

    /// Generates the sea state described by `params`, seeding from `params.seed`.
    pub fn from_spectrum(params: &SpectrumParams) -> Result<Self> {
        let mut rng = crate::seeded_rng(params.seed);
        discretize_spectrum(params, &mut rng)
    }

    pub fn components(&self) -> &[WaveComponent] {
        &self.components
    }

    pub fn depth(&self) -> f64 {
        self.depth_d
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Zeroth spectral moment of the discrete spectrum, `sum A^2 / 2`.
    pub fn m0(&self) -> f64 {
        self.components
            .iter()
            .map(|c| 0.5 * c.amplitude * c.amplitude)
            .sum()
    }

    /// Significant wave height `4 sqrt(m0)`.
    pub fn significant_height(&self) -> f64 {
        4.0 * self.m0().sqrt()
    }

    /// Surface elevation: first-order cosines plus the second-order
    /// `kappa A^2 / 2 cos 2(.)` correction.
    pub fn elevation(&self, x: f64, t: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let phi = c.kappa * x - c.omega * t + c.phase;
                let (s, co) = phi.sin_cos();
                let cos2 = co * co - s * s;
                c.amplitude * co + 0.5 * c.kappa * c.amplitude * c.amplitude * cos2
            })
            .sum()
    }

    /// Elevation, particle velocity and particle acceleration at `(x, z, t)`.
    pub fn particle_kinematics(&self, x: f64, z: f64, t: f64) -> Result<FluidState> {
        let d = self.depth_d;
        if !(z >= -d && z <= 0.0) {
            return Err(Error::Domain(format!(
                "point z = {z} m lies outside the water column [-{d}, 0]"
            )));
        }
        let s = z + d;
        let mut out = FluidState::default();
        for (c, k) in self.components.iter().zip(&self.coeffs) {
            if c.amplitude == 0.0 {
                continue;
            }
            let phi = c.kappa * x - c.omega * t + c.phase;
            let (sin1, cos1) = phi.sin_cos();
            let sin2 = 2.0 * sin1 * cos1;
            let cos2 = cos1 * cos1 - sin1 * sin1;

            // cosh k(z+d)/cosh kd and sinh k(z+d)/cosh kd, overflow-free
            let ekz = (c.kappa * z).exp();
            let q = (-2.0 * c.kappa * s).exp();
            let ch = ekz * (1.0 + q) * k.inv_cosh;
            let sh = ekz * (1.0 - q) * k.inv_cosh;
            // cosh 2k(z+d)/sinh^4 kd and sinh 2k(z+d)/sinh^4 kd
            let e2 = ekz * ekz * k.e2kd * k.inv_sinh4;
            let ch2 = e2 * (1.0 + q * q);
            let sh2 = e2 * (1.0 - q * q);

            let u1 = k.a1 * ch;
            let w1 = k.a1 * sh;
            let u2 = k.b2 * ch2;
            let w2 = k.b2 * sh2;

            out.zeta += c.amplitude * cos1 + 0.5 * c.kappa * c.amplitude * c.amplitude * cos2;
            out.u_p += u1 * cos1 + u2 * cos2;
            out.w_p += w1 * sin1 + w2 * sin2;
            out.du_p += c.omega * (u1 * sin1 + 2.0 * u2 * sin2);
            out.dw_p -= c.omega * (w1 * cos1 + 2.0 * w2 * cos2);
        }
        Ok(out)
    }

    /// Plain-text export: a `depth_d=<d> N=<n>` header then one
    /// `A omega kappa eps c` row per component. Floats are written in
    /// shortest round-trip form so an import reproduces the field bit for bit.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "depth_d={:e} N={}", self.depth_d, self.components.len());
        let _ = writeln!(s, "# A omega kappa eps c");
        for c in &self.components {
            let _ = writeln!(
                s,
                "{:e} {:e} {:e} {:e} {:e}",
                c.amplitude, c.omega, c.kappa, c.phase, c.celerity
            );
        }
        s
    }
}

impl FromStr for WaveField {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Parse("wave table is empty".into()))?;
        let mut depth = None;
        let mut n = None;
        for tok in header.split_whitespace() {
            match tok.split_once('=') {
                Some(("depth_d", v)) => depth = v.parse::<f64>().ok(),
                Some(("N", v)) => n = v.parse::<usize>().ok(),
                _ => return Err(Error::Parse(format!("bad wave table header token `{tok}`"))),
            }
        }
        let (depth, n) = match (depth, n) {
            (Some(d), Some(n)) => (d, n),
            _ => {
                return Err(Error::Parse(
                    "wave table header needs depth_d= and N=".into(),
                ))
            }
        };
        let mut components = Vec::with_capacity(n);
        for (lineno, line) in lines {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let [amplitude, omega, kappa, phase, celerity] = vals[..] else {
                return Err(Error::Parse(format!(
                    "line {}: expected 5 columns, found {}",
                    lineno + 1,
                    vals.len()
                )));
            };
            components.push(WaveComponent {
                amplitude,
                omega,
                kappa,
                phase,
                celerity,
            });
        }
        if components.len() != n {
            return Err(Error::Parse(format!(
                "header declares {n} components, table has {}",
                components.len()
            )));
        }
        WaveField::new(components, depth)
    }
}

fn dispersion_residual(omega: f64, kappa: f64, depth: f64) -> f64 {
    omega * omega - GRAVITY * kappa * (kappa * depth).tanh()
}

/// Wavenumber for angular frequency `omega` in water of depth `depth_d`.
///
/// Safeguarded Newton iteration on `g k tanh(k d) - omega^2`, started from the
/// deep-water guess and bracketed so that any step leaving the bracket falls
/// back to bisection.
pub fn solve_dispersion(omega: f64, depth_d: f64) -> Result<f64> {
    let fail = || Error::SolverFailure {
        omega,
        depth: depth_d,
    };
    if !(omega > 0.0 && omega.is_finite() && depth_d > 0.0 && depth_d.is_finite()) {
        return Err(fail());
    }
    let w2 = omega * omega;
    let f = |k: f64| GRAVITY * k * (k * depth_d).tanh() - w2;

    // f is increasing in k; deep water under-estimates the root and the
    // tanh-corrected guess over-estimates it.
    let k_deep = w2 / GRAVITY;
    let mut lo = k_deep;
    let mut hi = w2 / (GRAVITY * (k_deep * depth_d).tanh());
    if !hi.is_finite() {
        return Err(fail());
    }
    if f(lo) >= 0.0 {
        return Ok(lo);
    }

    let mut k = k_deep;
    for _ in 0..DISPERSION_MAX_ITER {
        let fk = f(k);
        if fk.abs() <= 1e-14 * w2.max(1.0) {
            return Ok(k);
        }
        if fk < 0.0 {
            lo = lo.max(k);
        } else {
            hi = hi.min(k);
        }
        let th = (k * depth_d).tanh();
        let df = GRAVITY * (th + k * depth_d * (1.0 - th * th));
        let newton = k - fk / df;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - k).abs() <= 4.0 * f64::EPSILON * k {
            k = next;
            break;
        }
        k = next;
    }
    if f(k).abs() < DISPERSION_TOL {
        Ok(k)
    } else {
        Err(fail())
    }
}

/// JONSWAP spectral density `S(omega)` in m^2 s.
///
/// The peak-enhancement exponent uses the conventional negative Gaussian
/// `exp(-(omega - omega_p)^2 / (2 omega_p^2 sigma^2))`.
pub fn jonswap_density(omega: f64, params: &SpectrumParams) -> f64 {
    if !(omega > 0.0) {
        return 0.0;
    }
    let wp = params.omega_p();
    let sigma = if omega <= wp { 0.07 } else { 0.09 };
    let shape = (omega - wp) / (wp * sigma);
    let big_gamma = (-0.5 * shape * shape).exp();
    let pm =
        params.alpha * GRAVITY * GRAVITY / omega.powi(5) * (-1.25 * (wp / omega).powi(4)).exp();
    let s = pm * params.gamma.powf(big_gamma);
    if s.is_finite() {
        s
    } else {
        0.0
    }
}

/// Samples a wave field from the JONSWAP spectrum.
///
/// Frequencies are equally spaced over `[omega_min, omega_max]`, amplitudes
/// follow `A^2 = 2 S(omega) d_omega` and are then rescaled so the discrete
/// spectrum reproduces `params.hs` exactly. Phases are uniform on `[0, 2pi)`.
pub fn discretize_spectrum<R: Rng + ?Sized>(
    params: &SpectrumParams,
    rng: &mut R,
) -> Result<WaveField> {
    params.validate()?;
    let n = params.n_components;
    let omegas: Vec<f64> = if n == 1 {
        vec![0.5 * (params.omega_min + params.omega_max)]
    } else {
        let step = (params.omega_max - params.omega_min) / (n - 1) as f64;
        (0..n).map(|i| params.omega_min + step * i as f64).collect()
    };
    let d_omega = if n == 1 {
        1.0
    } else {
        (params.omega_max - params.omega_min) / (n - 1) as f64
    };

    let mut amps: Vec<f64> = omegas
        .iter()
        .map(|&w| (2.0 * jonswap_density(w, params) * d_omega).sqrt())
        .collect();
    let m0: f64 = amps.iter().map(|a| 0.5 * a * a).sum();
    if n == 1 {
        amps[0] = params.hs / (2.0 * std::f64::consts::SQRT_2);
    } else {
        if !(m0 > 0.0) {
            return Err(Error::Config(
                "spectrum carries no energy over the configured omega band".into(),
            ));
        }
        let scale = params.hs / (4.0 * m0.sqrt());
        amps.iter_mut().for_each(|a| *a *= scale);
    }

    let mut components = Vec::with_capacity(n);
    for (&omega, &amplitude) in omegas.iter().zip(&amps) {
        let phase = rng.random::<f64>() * TAU;
        components.push(WaveComponent::from_frequency(
            amplitude,
            omega,
            phase,
            params.depth_d,
        )?);
    }
    WaveField::new(components, params.depth_d)
}

/// Returns a corrupted copy of `field` at linear power ratio `snr`.
///
/// Each amplitude receives zero-mean Gaussian noise of variance `A^2 / snr`
/// (clamped at zero) and each phase zero-mean Gaussian noise of variance
/// `(2 pi)^2 / snr`, wrapped back into `[0, 2 pi)`. Frequencies, wavenumbers
/// and depth are untouched.
pub fn inject_spectral_noise<R: Rng + ?Sized>(
    field: &WaveField,
    snr: f64,
    rng: &mut R,
) -> Result<WaveField> {
    if !(snr > 0.0) {
        return Err(Error::Config(format!("snr must be positive, got {snr}")));
    }
    let scale = 1.0 / snr.sqrt();
    let components = field
        .components
        .iter()
        .map(|c| {
            let na: f64 = rng.sample(StandardNormal);
            let np: f64 = rng.sample(StandardNormal);
            WaveComponent {
                amplitude: (c.amplitude + c.amplitude * scale * na).max(0.0),
                phase: wrap_phase(c.phase + TAU * scale * np),
                ..*c
            }
        })
        .collect();
    WaveField::new(components, field.depth_d)
}

/// Converts a decibel SNR to the linear power ratio used by
/// [`inject_spectral_noise`].
pub fn snr_from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}
