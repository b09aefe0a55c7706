//! Local Cartesian geometry: positions, UAV pose and angle helpers.
//!
//! Frame convention: x east, y north, z up, all in meters. Headings and
//! bearings are measured in the xy-plane from the +x axis, counter-clockwise
//! positive, and are kept in `[0, 2π)`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Distance in the xy-plane only.
    pub fn horizontal_distance(&self, other: &Position3) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Euclidean distance between two points.
pub fn distance(a: &Position3, b: &Position3) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Bearing from `from` to `to` in the xy-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bearing {
    pub angle: f64,
    /// Set when the two points share the same xy coordinates; `angle` is then 0.
    pub degenerate: bool,
}

pub fn bearing_to(from: &Position3, to: &Position3) -> Bearing {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    if dx == 0.0 && dy == 0.0 {
        return Bearing {
            angle: 0.0,
            degenerate: true,
        };
    }
    Bearing {
        angle: normalize_angle(dy.atan2(dx)),
        degenerate: false,
    }
}

/// Wraps a finite angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed smallest rotation taking `from` onto `to`, in `(-π, π]`.
pub fn shortest_angle_diff(from: f64, to: f64) -> f64 {
    let d = normalize_angle(to - from);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    pub position: Position3,
    /// Radians in `[0, 2π)`.
    pub heading: f64,
}

impl UavState {
    pub fn new(position: Position3, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }
}

/// Axis-aligned search rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Area {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for Area {
    fn default() -> Self {
        Self::new(0.0, 500.0, 0.0, 500.0)
    }
}

impl Area {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.width() > 0.0 && self.height() > 0.0)
            || ![self.x_min, self.x_max, self.y_min, self.y_max]
                .iter()
                .all(|v| v.is_finite())
    }

    pub fn centroid(&self) -> (f64, f64) {
        (
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn contains(&self, p: &Position3) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn clamp(&self, p: Position3) -> Position3 {
        Position3::new(
            p.x.clamp(self.x_min, self.x_max),
            p.y.clamp(self.y_min, self.y_max),
            p.z,
        )
    }

    /// Folds a point back into the rectangle by mirror reflection at the edges.
    pub fn reflect(&self, p: Position3) -> Position3 {
        Position3::new(
            reflect_1d(p.x, self.x_min, self.x_max),
            reflect_1d(p.y, self.y_min, self.y_max),
            p.z,
        )
    }
}

fn reflect_1d(v: f64, lo: f64, hi: f64) -> f64 {
    let span = hi - lo;
    if v >= lo && v <= hi {
        return v;
    }
    // Reflection is periodic with period 2·span.
    let m = (v - lo).rem_euclid(2.0 * span);
    if m <= span {
        lo + m
    } else {
        hi - (m - span)
    }
}
