//! Estimation of the reference power and noise level from range/RSSI data.
//!
//! With the path-loss exponent held fixed the model is `z = p_ref + o(d)`,
//! linear in `p_ref`, so the least-squares estimate is the mean of
//! `z_i − o(d_i)` and `σ_P` is the residual standard deviation.

use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::antenna::AntennaPattern;
use super::propagation::{model_rssi, ModelKind, PropagationParams};
use crate::error::{Error, Result};
use crate::geometry::Position3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeRssiSample {
    pub dist: f64,
    pub rssi: f64,
    /// `(target_z, uav_z)` heights, required for MultiPath fitting.
    pub geometry: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub kind: ModelKind,
    pub p_ref: f64,
    pub sigma_p: f64,
    pub n_exp: f64,
    pub residuals: Vec<f64>,
}

impl FitResult {
    /// The input parameters with the fitted values substituted.
    pub fn apply(&self, base: &PropagationParams) -> PropagationParams {
        PropagationParams {
            kind: self.kind,
            p_ref: self.p_ref,
            sigma_p: self.sigma_p,
            n_exp: self.n_exp,
            ..base.clone()
        }
    }
}

/// Places the pair on the x-axis with the receiver looking straight at the
/// transmitter, so the antenna contributes its boresight gain (0 dB).
fn sample_geometry(s: &RangeRssiSample, kind: ModelKind) -> Result<(Position3, Position3)> {
    let (tz, uz) = match (s.geometry, kind) {
        (Some(g), _) => g,
        (None, ModelKind::LogPath) => (0.0, 0.0),
        (None, ModelKind::MultiPath) => {
            return Err(Error::Parse(
                "MultiPath fitting needs target_z_m and uav_z_m columns".into(),
            ))
        }
    };
    let dz = uz - tz;
    if s.dist < dz.abs() {
        return Err(Error::Domain(format!(
            "distance {} shorter than the height difference {}",
            s.dist,
            dz.abs()
        )));
    }
    let r = (s.dist * s.dist - dz * dz).sqrt();
    Ok((Position3::new(r, 0.0, tz), Position3::new(0.0, 0.0, uz)))
}

/// Model prediction for `sample` excluding `p_ref`.
fn model_offset(params: &PropagationParams, s: &RangeRssiSample) -> Result<f64> {
    let (target, uav) = sample_geometry(s, params.kind)?;
    let zeroed = PropagationParams {
        p_ref: 0.0,
        floor_dbm: f64::NEG_INFINITY,
        ..params.clone()
    };
    Ok(model_rssi(&zeroed, &AntennaPattern::Isotropic, &target, &uav, 1.0, 0.0))
}

/// Fits `p_ref` and `σ_P` for `kind` with the exponent fixed at `n_fixed`.
/// `base` supplies d_ref, wavelength and ground permittivity.
pub fn fit_propagation_params(
    samples: &[RangeRssiSample],
    kind: ModelKind,
    n_fixed: f64,
    base: &PropagationParams,
) -> Result<FitResult> {
    if samples.is_empty() {
        return Err(Error::Empty("no range/RSSI samples".into()));
    }
    if let Some(bad) = samples.iter().find(|s| !(s.dist > 0.0) || !s.rssi.is_finite()) {
        return Err(Error::Domain(format!(
            "sample with dist {} rssi {} is invalid",
            bad.dist, bad.rssi
        )));
    }
    let first = samples[0].dist;
    if samples.iter().all(|s| s.dist == first) || samples.len() < 2 {
        return Err(Error::RankDeficient(format!(
            "all samples were taken at a single distance ({first} m); need at least two"
        )));
    }
    let params = PropagationParams {
        kind,
        n_exp: n_fixed,
        ..base.clone()
    };
    let offsets = samples
        .iter()
        .map(|s| model_offset(&params, s))
        .collect::<Result<Vec<_>>>()?;
    let n = samples.len() as f64;
    let p_ref = samples
        .iter()
        .zip(&offsets)
        .map(|(s, o)| s.rssi - o)
        .sum::<f64>()
        / n;
    let residuals: Vec<f64> = samples
        .iter()
        .zip(&offsets)
        .map(|(s, o)| s.rssi - (p_ref + o))
        .collect();
    // One fitted parameter.
    let sigma_p = (residuals.iter().map(|r| r * r).sum::<f64>() / (n - 1.0)).sqrt();
    Ok(FitResult {
        kind,
        p_ref,
        sigma_p,
        n_exp: n_fixed,
        residuals,
    })
}

/// Model curve value at distance `dist` for plotting against the data.
pub fn model_curve(params: &PropagationParams, dist: f64, geometry: Option<(f64, f64)>) -> Result<f64> {
    let s = RangeRssiSample {
        dist,
        rssi: 0.0,
        geometry,
    };
    Ok(params.p_ref + model_offset(params, &s)?)
}

/// Synthetic survey: `per_distance` noisy readings at each distance, taken
/// with the antenna at boresight.
pub fn synthesize_samples<R: Rng + ?Sized>(
    params: &PropagationParams,
    distances: &[f64],
    per_distance: usize,
    heights: (f64, f64),
    rng: &mut R,
) -> Result<Vec<RangeRssiSample>> {
    let mut out = Vec::with_capacity(distances.len() * per_distance);
    for &dist in distances {
        let proto = RangeRssiSample {
            dist,
            rssi: 0.0,
            geometry: Some(heights),
        };
        let h = (params.p_ref + model_offset(params, &proto)?).max(params.floor_dbm);
        for _ in 0..per_distance {
            let n: f64 = StandardNormal.sample(rng);
            out.push(RangeRssiSample {
                rssi: h + params.sigma_p * n,
                ..proto
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Deserialize, Serialize)]
struct SampleRow {
    dist_m: f64,
    rssi_dbm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_z_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uav_z_m: Option<f64>,
}

/// Reads `dist_m,rssi_dbm[,target_z_m,uav_z_m]` rows.
pub fn read_samples_csv<R: Read>(reader: R) -> Result<Vec<RangeRssiSample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<SampleRow>().enumerate() {
        let row = row?;
        let geometry = match (row.target_z_m, row.uav_z_m) {
            (Some(t), Some(u)) => Some((t, u)),
            (None, None) => None,
            _ => {
                return Err(Error::Parse(format!(
                    "data row {}: target_z_m and uav_z_m must be given together",
                    i + 1
                )))
            }
        };
        out.push(RangeRssiSample {
            dist: row.dist_m,
            rssi: row.rssi_dbm,
            geometry,
        });
    }
    Ok(out)
}

pub fn write_samples_csv<W: Write>(writer: W, samples: &[RangeRssiSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let with_geometry = samples.iter().any(|s| s.geometry.is_some());
    if with_geometry {
        w.write_record(["dist_m", "rssi_dbm", "target_z_m", "uav_z_m"])?;
    } else {
        w.write_record(["dist_m", "rssi_dbm"])?;
    }
    for s in samples {
        let mut rec = vec![s.dist.to_string(), s.rssi.to_string()];
        if with_geometry {
            let (t, u) = s.geometry.unwrap_or((0.0, 0.0));
            rec.push(t.to_string());
            rec.push(u.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
