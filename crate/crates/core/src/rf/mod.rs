//! Radio measurement models: antenna gain, propagation, noise, detection and
//! parameter fitting.

mod antenna;
mod fit;
mod propagation;

pub use antenna::{antenna_gain, AntennaConfig, AntennaPattern, GainTable, TwoElementArray};
pub use fit::{
    fit_propagation_params, model_curve, read_samples_csv, synthesize_samples,
    write_samples_csv, FitResult, RangeRssiSample,
};
pub use propagation::{
    detect, expected_rssi, gaussian_pdf, ground_reflection, likelihood, sample_measurement,
    ModelKind, PropagationParams,
};

pub(crate) use propagation::model_rssi;

/// Propagation parameters and antenna pattern travelling together.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementModel {
    pub params: PropagationParams,
    pub pattern: AntennaPattern,
}

impl MeasurementModel {
    pub fn new(params: PropagationParams, pattern: AntennaPattern) -> Self {
        Self { params, pattern }
    }

    /// h(x, u) for a UAV at `uav_pos` whose heading has the given cosine and
    /// sine. No argument checks.
    #[inline]
    pub fn rssi_fast(
        &self,
        target: &crate::geometry::Position3,
        uav_pos: &crate::geometry::Position3,
        cos_h: f64,
        sin_h: f64,
    ) -> f64 {
        model_rssi(&self.params, &self.pattern, target, uav_pos, cos_h, sin_h)
    }
}
