//! Receiver antenna gain in the horizontal (E-plane) cut.
//!
//! Gain is a function of the relative azimuth φ between the UAV heading and
//! the bearing to the transmitter. Every pattern here is symmetric,
//! G(φ) = G(−φ), so it is also a function of cos φ alone; the hot paths use
//! that form and skip the `atan2`.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bearing_to, normalize_angle, Position3, UavState};

/// Antenna section of the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum AntennaConfig {
    /// Driven element plus a reflector behind it; the reflector current phase
    /// is solved so the pattern realizes `front_to_back_db`.
    Analytic {
        #[serde(default = "default_spacing")]
        spacing_wavelengths: f64,
        #[serde(default = "default_reflector_ratio")]
        reflector_ratio: f64,
        #[serde(default = "default_front_to_back")]
        front_to_back_db: f64,
    },
    /// Tabulated `azimuth_deg,gain_db` CSV.
    Table { path: String },
    Isotropic,
}

fn default_spacing() -> f64 {
    0.1
}
fn default_reflector_ratio() -> f64 {
    0.8
}
fn default_front_to_back() -> f64 {
    2.0
}

impl Default for AntennaConfig {
    fn default() -> Self {
        AntennaConfig::Analytic {
            spacing_wavelengths: default_spacing(),
            reflector_ratio: default_reflector_ratio(),
            front_to_back_db: default_front_to_back(),
        }
    }
}

impl AntennaConfig {
    /// Builds the pattern; relative table paths resolve against `base_dir`.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<AntennaPattern> {
        match self {
            AntennaConfig::Analytic {
                spacing_wavelengths,
                reflector_ratio,
                front_to_back_db,
            } => Ok(AntennaPattern::TwoElement(TwoElementArray::with_front_to_back(
                *spacing_wavelengths,
                *reflector_ratio,
                *front_to_back_db,
            )?)),
            AntennaConfig::Table { path } => {
                let p = Path::new(path);
                let full = match base_dir {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.to_path_buf(),
                };
                Ok(AntennaPattern::Table(GainTable::from_csv_path(&full)?))
            }
            AntennaConfig::Isotropic => Ok(AntennaPattern::Isotropic),
        }
    }
}

/// Two-element array factor `|1 + ρ·e^{j(β − k·s·cos φ)}|`, normalized to
/// 0 dB at boresight.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoElementArray {
    spacing_wavelengths: f64,
    reflector_ratio: f64,
    phase: f64,
    boresight_db: f64,
}

impl TwoElementArray {
    pub fn new(spacing_wavelengths: f64, reflector_ratio: f64, phase: f64) -> Result<Self> {
        let kd = TAU * spacing_wavelengths;
        if !(spacing_wavelengths > 0.0 && kd < PI / 2.0) {
            return Err(Error::config(
                "antenna.spacing_wavelengths",
                "must lie in (0, 0.25)",
            ));
        }
        if !(reflector_ratio > 0.0 && reflector_ratio < 1.0) {
            return Err(Error::config("antenna.reflector_ratio", "must lie in (0, 1)"));
        }
        if !(phase >= kd && phase <= PI - kd) {
            return Err(Error::config(
                "antenna",
                "reflector phase outside the range that keeps the maximum at boresight",
            ));
        }
        let mut arr = Self {
            spacing_wavelengths,
            reflector_ratio,
            phase,
            boresight_db: 0.0,
        };
        arr.boresight_db = arr.raw_db(1.0);
        Ok(arr)
    }

    /// Solves the reflector phase by bisection so that G(0) − G(π) equals
    /// `front_to_back_db`.
    pub fn with_front_to_back(
        spacing_wavelengths: f64,
        reflector_ratio: f64,
        front_to_back_db: f64,
    ) -> Result<Self> {
        let kd = TAU * spacing_wavelengths;
        let lo_arr = Self::new(spacing_wavelengths, reflector_ratio, kd)?;
        let hi_arr = Self::new(spacing_wavelengths, reflector_ratio, PI - kd)?;
        let (lo_fb, hi_fb) = (lo_arr.front_to_back_db(), hi_arr.front_to_back_db());
        if !(front_to_back_db >= lo_fb && front_to_back_db <= hi_fb) {
            return Err(Error::config(
                "antenna.front_to_back_db",
                format!(
                    "{front_to_back_db} dB not realizable with this spacing and reflector ratio \
                     (range {lo_fb:.3}..{hi_fb:.3} dB)"
                ),
            ));
        }
        let (mut lo, mut hi) = (kd, PI - kd);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fb = Self::new(spacing_wavelengths, reflector_ratio, mid)?.front_to_back_db();
            if fb < front_to_back_db {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::new(spacing_wavelengths, reflector_ratio, 0.5 * (lo + hi))
    }

    fn raw_db(&self, cos_phi: f64) -> f64 {
        let rho = self.reflector_ratio;
        let psi = self.phase - TAU * self.spacing_wavelengths * cos_phi;
        10.0 * (1.0 + rho * rho + 2.0 * rho * psi.cos()).log10()
    }

    pub fn gain_cos(&self, cos_phi: f64) -> f64 {
        self.raw_db(cos_phi) - self.boresight_db
    }

    pub fn front_to_back_db(&self) -> f64 {
        self.raw_db(1.0) - self.raw_db(-1.0)
    }
}

/// Piecewise-linear gain table over azimuth with wraparound at 2π.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTable {
    azimuth: Vec<f64>,
    gain_db: Vec<f64>,
}

impl GainTable {
    /// `points` are `(azimuth_rad, gain_db)`; they are normalized into
    /// `[0, 2π)` and sorted.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::config("antenna.table", "gain table is empty"));
        }
        let mut pts: Vec<(f64, f64)> = points
            .into_iter()
            .map(|(a, g)| (normalize_angle(a), g))
            .collect();
        if pts.iter().any(|(a, g)| !a.is_finite() || !g.is_finite()) {
            return Err(Error::config("antenna.table", "non-finite entry"));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let (azimuth, gain_db) = pts.into_iter().unzip();
        Ok(Self { azimuth, gain_db })
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    /// Reads `azimuth_deg,gain_db` rows.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            azimuth_deg: f64,
            gain_db: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            points.push((row.azimuth_deg.to_radians(), row.gain_db));
        }
        Self::new(points)
    }

    fn lookup(&self, phi: f64) -> f64 {
        let n = self.azimuth.len();
        if n == 1 {
            return self.gain_db[0];
        }
        let phi = normalize_angle(phi);
        // Index of the first knot strictly greater than phi.
        let hi = self.azimuth.partition_point(|&a| a <= phi);
        let (a0, g0, a1, g1) = if hi == 0 {
            (
                self.azimuth[n - 1] - TAU,
                self.gain_db[n - 1],
                self.azimuth[0],
                self.gain_db[0],
            )
        } else if hi == n {
            (
                self.azimuth[n - 1],
                self.gain_db[n - 1],
                self.azimuth[0] + TAU,
                self.gain_db[0],
            )
        } else {
            (
                self.azimuth[hi - 1],
                self.gain_db[hi - 1],
                self.azimuth[hi],
                self.gain_db[hi],
            )
        };
        let t = (phi - a0) / (a1 - a0);
        g0 + t * (g1 - g0)
    }

    /// Symmetrized lookup: ½·(T(φ) + T(−φ)).
    pub fn gain(&self, phi: f64) -> f64 {
        0.5 * (self.lookup(phi) + self.lookup(-phi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AntennaPattern {
    Isotropic,
    TwoElement(TwoElementArray),
    Table(GainTable),
}

impl Default for AntennaPattern {
    fn default() -> Self {
        AntennaConfig::default()
            .build(None)
            .expect("default antenna configuration is valid")
    }
}

impl AntennaPattern {
    /// Gain in dB at relative azimuth `phi` (0 = boresight).
    pub fn gain(&self, phi: f64) -> f64 {
        match self {
            AntennaPattern::Isotropic => 0.0,
            AntennaPattern::TwoElement(a) => a.gain_cos(phi.cos()),
            AntennaPattern::Table(t) => t.gain(phi),
        }
    }

    /// Same as [`gain`](Self::gain) but parameterized by `cos φ`.
    #[inline]
    pub fn gain_cos(&self, cos_phi: f64) -> f64 {
        match self {
            AntennaPattern::Isotropic => 0.0,
            AntennaPattern::TwoElement(a) => a.gain_cos(cos_phi),
            AntennaPattern::Table(t) => t.gain(cos_phi.clamp(-1.0, 1.0).acos()),
        }
    }

    pub fn front_to_back_db(&self) -> f64 {
        self.gain(0.0) - self.gain(PI)
    }
}

/// Receiver gain toward `target` for a UAV in state `uav`.
///
/// When the target sits directly below the UAV the bearing falls back to 0
/// rad, giving φ = −heading.
pub fn antenna_gain(pattern: &AntennaPattern, uav: &UavState, target: &Position3) -> f64 {
    let bearing = bearing_to(&uav.position, target);
    pattern.gain(normalize_angle(bearing.angle - uav.heading))
}

/// `cos φ` of the relative azimuth for a horizontal offset `(dx, dy)` of
/// length `r_xy` seen from a UAV with heading components `(cos θ, sin θ)`.
#[inline]
pub(crate) fn relative_cos(dx: f64, dy: f64, r_xy: f64, cos_h: f64, sin_h: f64) -> f64 {
    if r_xy > 0.0 {
        ((dx * cos_h + dy * sin_h) / r_xy).clamp(-1.0, 1.0)
    } else {
        cos_h
    }
}
