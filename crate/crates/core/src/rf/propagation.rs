//! RSSI propagation models, measurement noise and the Gaussian likelihood.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::antenna::{relative_cos, AntennaPattern};
use crate::error::{Error, Result};
use crate::geometry::{distance, Position3, UavState};

const SQRT_TAU: f64 = 2.506_628_274_631_000_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Line-of-sight log-distance path loss.
    LogPath,
    /// Log-distance path loss plus a two-ray ground-reflection term.
    MultiPath,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationParams {
    pub kind: ModelKind,
    /// Received power at the reference distance, dBm.
    pub p_ref: f64,
    #[serde(default = "default_d_ref")]
    pub d_ref: f64,
    pub n_exp: f64,
    /// Measurement noise standard deviation, dB.
    pub sigma_p: f64,
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    #[serde(default = "default_eps_ground")]
    pub eps_ground: f64,
    /// Lower clamp on the model output, dBm.
    #[serde(default = "default_floor")]
    pub floor_dbm: f64,
}

fn default_d_ref() -> f64 {
    1.0
}
fn default_wavelength() -> f64 {
    2.0
}
fn default_eps_ground() -> f64 {
    15.0
}
fn default_floor() -> f64 {
    -150.0
}

impl Default for PropagationParams {
    fn default() -> Self {
        Self::sim_default()
    }
}

impl PropagationParams {
    /// LogPath parameters of the ten-target simulation study.
    pub fn sim_default() -> Self {
        Self {
            kind: ModelKind::LogPath,
            p_ref: 7.7,
            d_ref: 1.0,
            n_exp: 3.1,
            sigma_p: 4.22,
            wavelength: 2.0,
            eps_ground: 15.0,
            floor_dbm: -150.0,
        }
    }

    /// Field-fitted LogPath parameters (n fixed at 2).
    pub fn field_logpath() -> Self {
        Self {
            kind: ModelKind::LogPath,
            p_ref: -15.69,
            n_exp: 2.0,
            sigma_p: 4.21,
            ..Self::sim_default()
        }
    }

    /// Field-fitted MultiPath parameters (n fixed at 2).
    pub fn field_multipath() -> Self {
        Self {
            kind: ModelKind::MultiPath,
            p_ref: -15.28,
            n_exp: 2.0,
            sigma_p: 2.31,
            ..Self::sim_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let chk = |ok: bool, key: &str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("propagation.{key}"), reason))
            }
        };
        chk(self.p_ref.is_finite(), "p_ref", "must be finite")?;
        chk(
            (1.5..=5.0).contains(&self.n_exp),
            "n_exp",
            "must lie in [1.5, 5]",
        )?;
        chk(
            self.sigma_p > 0.0 && self.sigma_p.is_finite(),
            "sigma_p",
            "must be > 0",
        )?;
        chk(self.d_ref > 0.0, "d_ref", "must be > 0")?;
        chk(self.wavelength > 0.0, "wavelength", "must be > 0")?;
        chk(self.eps_ground >= 1.0, "eps_ground", "must be >= 1")?;
        chk(self.floor_dbm.is_finite(), "floor_dbm", "must be finite")?;
        Ok(())
    }
}

/// Real ground reflection coefficient Γ(ψ) for incidence angle `psi`.
pub fn ground_reflection(psi: f64, eps_g: f64) -> Result<f64> {
    if !(psi > 0.0 && psi <= PI / 2.0) {
        return Err(Error::Domain(format!(
            "incidence angle {psi} outside (0, π/2]"
        )));
    }
    if !(eps_g >= 1.0) {
        return Err(Error::Domain(format!("relative permittivity {eps_g} < 1")));
    }
    Ok(reflection_unchecked(psi, eps_g))
}

#[inline]
fn reflection_unchecked(psi: f64, eps_g: f64) -> f64 {
    let (s, c) = psi.sin_cos();
    let root = (eps_g - c * c).max(0.0).sqrt();
    let den = s + root;
    if den == 0.0 {
        // ψ = 0 with ε_g = 1: grazing limit.
        return -1.0;
    }
    (s - root) / den
}

/// Two-ray interference term `10·n·log10|1 + Γ(ψ)·e^{−jΔφ}|`, in dB.
#[inline]
fn multipath_term(params: &PropagationParams, r_xy: f64, z_sum: f64, d: f64) -> f64 {
    let d_reflected = (r_xy * r_xy + z_sum * z_sum).sqrt();
    let psi = if r_xy > 0.0 {
        (z_sum / r_xy).atan()
    } else {
        PI / 2.0
    };
    let gamma = if psi > 0.0 {
        reflection_unchecked(psi, params.eps_ground)
    } else {
        -1.0
    };
    let dphi = TAU * (d_reflected - d) / params.wavelength;
    // |1 + Γ e^{−jΔφ}|² = 1 + 2Γ cos Δφ + Γ²
    let mag2 = 1.0 + 2.0 * gamma * dphi.cos() + gamma * gamma;
    5.0 * params.n_exp * mag2.log10()
}

/// Model RSSI h(x, u) without argument checks. Distances below 1 mm are
/// treated as 1 mm.
#[inline]
pub(crate) fn model_rssi(
    params: &PropagationParams,
    pattern: &AntennaPattern,
    target: &Position3,
    uav_pos: &Position3,
    cos_h: f64,
    sin_h: f64,
) -> f64 {
    let dx = target.x - uav_pos.x;
    let dy = target.y - uav_pos.y;
    let dz = target.z - uav_pos.z;
    let r2 = dx * dx + dy * dy;
    let d2 = (r2 + dz * dz).max(1e-6);
    let r_xy = r2.sqrt();
    let gain = pattern.gain_cos(relative_cos(dx, dy, r_xy, cos_h, sin_h));
    let mut h = params.p_ref - 5.0 * params.n_exp * (d2 / (params.d_ref * params.d_ref)).log10()
        + gain;
    if params.kind == ModelKind::MultiPath {
        h += multipath_term(params, r_xy, target.z + uav_pos.z, d2.sqrt());
    }
    h.max(params.floor_dbm)
}

/// Received power `h(x, u)` in dBm for a transmitter at `target`.
pub fn expected_rssi(
    params: &PropagationParams,
    pattern: &AntennaPattern,
    target: &Position3,
    uav: &UavState,
) -> Result<f64> {
    if distance(target, &uav.position) <= 0.0 {
        return Err(Error::Domain(
            "transmitter and receiver are coincident".into(),
        ));
    }
    let (s, c) = uav.heading.sin_cos();
    Ok(model_rssi(params, pattern, target, &uav.position, c, s))
}

/// One noisy RSSI reading: `h(x, u) + N(0, σ_P²)`.
pub fn sample_measurement<R: Rng + ?Sized>(
    params: &PropagationParams,
    pattern: &AntennaPattern,
    target: &Position3,
    uav: &UavState,
    rng: &mut R,
) -> Result<f64> {
    let h = expected_rssi(params, pattern, target, uav)?;
    let n: f64 = StandardNormal.sample(rng);
    Ok(h + params.sigma_p * n)
}

/// Gaussian density N(z; mean, σ²).
#[inline]
pub fn gaussian_pdf(z: f64, mean: f64, sigma: f64) -> f64 {
    let u = (z - mean) / sigma;
    (-0.5 * u * u).exp() / (sigma * SQRT_TAU)
}

/// Measurement likelihood p(z | x, u).
pub fn likelihood(
    z: f64,
    params: &PropagationParams,
    pattern: &AntennaPattern,
    target: &Position3,
    uav: &UavState,
) -> Result<f64> {
    let h = expected_rssi(params, pattern, target, uav)?;
    Ok(gaussian_pdf(z, h, params.sigma_p))
}

/// Closed detection boundary: a reading at exactly the sensitivity counts.
pub fn detect(z: f64, sensitivity: f64) -> bool {
    z >= sensitivity
}
