//! Bootstrap particle filter for a single tag.
//!
//! Particles live in 3-D but only x and y move; every particle of a set
//! shares the same height. Each operation that touches the weights leaves
//! them normalized and refreshes the cached weighted mean and 2-D covariance.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::config::MotionModel;
use crate::error::{Error, Result};
use crate::geometry::{Area, Position3, UavState};
use crate::rf::MeasurementModel;

/// Weighted xy covariance `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Cov2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Cov2 {
    pub fn det(&self) -> f64 {
        (self.xx * self.yy - self.xy * self.xy).max(0.0)
    }
}

/// Weighted mean and xy covariance of a point cloud.
pub fn weighted_moments(positions: &[Position3], weights: &[f64]) -> (Position3, Cov2) {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || positions.is_empty() {
        return (Position3::default(), Cov2::default());
    }
    let (mut mx, mut my, mut mz) = (0.0, 0.0, 0.0);
    for (p, &w) in positions.iter().zip(weights) {
        mx += w * p.x;
        my += w * p.y;
        mz += w * p.z;
    }
    let (mx, my, mz) = (mx / total, my / total, mz / total);
    let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
    for (p, &w) in positions.iter().zip(weights) {
        let dx = p.x - mx;
        let dy = p.y - my;
        xx += w * dx * dx;
        xy += w * dx * dy;
        yy += w * dy * dy;
    }
    (
        Position3::new(mx, my, mz),
        Cov2 {
            xx: xx / total,
            xy: xy / total,
            yy: yy / total,
        },
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetParticleSet {
    target_id: usize,
    positions: Vec<Position3>,
    weights: Vec<f64>,
    localized: bool,
    estimate: Position3,
    cov: Cov2,
    divergences: u32,
}

/// Result of a measurement update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Updated,
    /// Every likelihood underflowed; weights were reset to uniform.
    Diverged,
    /// The set is localized and frozen.
    Skipped,
}

impl TargetParticleSet {
    /// Uniform prior over `area` at height `target_z`.
    pub fn init<R: Rng + ?Sized>(
        target_id: usize,
        area: &Area,
        n_particles: usize,
        target_z: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if n_particles < 2 {
            return Err(Error::config("scenario.n_particles", "need at least 2 particles"));
        }
        if area.is_degenerate() {
            return Err(Error::config("scenario.area", "degenerate search area"));
        }
        let positions = (0..n_particles)
            .map(|_| uniform_in(area, target_z, rng))
            .collect();
        Ok(Self::from_particles(
            target_id,
            positions,
            vec![1.0 / n_particles as f64; n_particles],
        ))
    }

    /// Builds a set from explicit particles; weights are normalized.
    pub fn from_particles(target_id: usize, positions: Vec<Position3>, weights: Vec<f64>) -> Self {
        assert_eq!(positions.len(), weights.len());
        let mut s = Self {
            target_id,
            positions,
            weights,
            localized: false,
            estimate: Position3::default(),
            cov: Cov2::default(),
            divergences: 0,
        };
        if !s.normalize() {
            s.reset_uniform();
        }
        s.refresh();
        s
    }

    pub fn target_id(&self) -> usize {
        self.target_id
    }
    pub fn len(&self) -> usize {
        self.positions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
    pub fn positions(&self) -> &[Position3] {
        &self.positions
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn is_localized(&self) -> bool {
        self.localized
    }
    /// Weighted mean position.
    pub fn estimate(&self) -> Position3 {
        self.estimate
    }
    pub fn covariance(&self) -> Cov2 {
        self.cov
    }
    /// Determinant of the weighted xy covariance, m⁴.
    pub fn cov_det(&self) -> f64 {
        self.cov.det()
    }
    /// Number of updates that had to reset the weights.
    pub fn divergences(&self) -> u32 {
        self.divergences
    }

    fn normalize(&mut self) -> bool {
        let total: f64 = self.weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return false;
        }
        let inv = 1.0 / total;
        self.weights.iter_mut().for_each(|w| *w *= inv);
        true
    }

    fn reset_uniform(&mut self) {
        let w = 1.0 / self.positions.len() as f64;
        self.weights.iter_mut().for_each(|x| *x = w);
    }

    fn refresh(&mut self) {
        let (mean, cov) = weighted_moments(&self.positions, &self.weights);
        self.estimate = mean;
        self.cov = cov;
    }

    /// Random-walk prediction over `dt` seconds. Localized sets are frozen.
    pub fn predict<R: Rng + ?Sized>(&mut self, motion: &MotionModel, dt: f64, rng: &mut R) {
        if self.localized || motion.sigma_q == 0.0 || dt <= 0.0 {
            return;
        }
        let s = motion.sigma_q * dt.sqrt();
        for p in &mut self.positions {
            let nx: f64 = StandardNormal.sample(rng);
            let ny: f64 = StandardNormal.sample(rng);
            p.x += s * nx;
            p.y += s * ny;
        }
        self.refresh();
    }

    /// Bayes update with an RSSI reading `z` taken from `uav`.
    pub fn update(&mut self, z: f64, uav: &UavState, model: &MeasurementModel) -> UpdateOutcome {
        if self.localized {
            return UpdateOutcome::Skipped;
        }
        let (sin_h, cos_h) = uav.heading.sin_cos();
        let inv_2var = 0.5 / (model.params.sigma_p * model.params.sigma_p);
        // The Gaussian normalizing constant cancels after renormalization.
        for (p, w) in self.positions.iter().zip(self.weights.iter_mut()) {
            let e = z - model.rssi_fast(p, &uav.position, cos_h, sin_h);
            *w *= (-e * e * inv_2var).exp();
        }
        let outcome = if self.normalize() {
            UpdateOutcome::Updated
        } else {
            self.reset_uniform();
            self.divergences += 1;
            UpdateOutcome::Diverged
        };
        self.refresh();
        outcome
    }

    /// `1 / Σ w_i²`.
    pub fn effective_sample_size(&self) -> f64 {
        effective_sample_size(&self.weights)
    }

    /// Systematic resampling to equal weights, then replaces
    /// `⌊inject_fraction·N⌋` particles with uniform draws over `area`.
    pub fn resample_and_inject<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        inject_fraction: f64,
        area: &Area,
    ) {
        self.resample_roughen_inject(rng, 0.0, inject_fraction, area);
    }

    /// As [`resample_and_inject`](Self::resample_and_inject), with Gaussian
    /// roughening of the resampled particles: per axis σ = K·E·N^(-1/2),
    /// E being the span of the resampled cloud along that axis.
    pub fn resample_roughen_inject<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        roughening: f64,
        inject_fraction: f64,
        area: &Area,
    ) {
        if self.localized {
            return;
        }
        let n = self.positions.len();
        let picks = systematic_resample(&self.weights, rng.random::<f64>());
        self.positions = picks.into_iter().map(|i| self.positions[i]).collect();
        self.reset_uniform();
        if roughening > 0.0 {
            let span = |f: fn(&Position3) -> f64| {
                let (lo, hi) = self
                    .positions
                    .iter()
                    .map(f)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi - lo
            };
            let k = roughening / (n as f64).sqrt();
            let (sx, sy) = (k * span(|p| p.x), k * span(|p| p.y));
            for p in &mut self.positions {
                let nx: f64 = StandardNormal.sample(rng);
                let ny: f64 = StandardNormal.sample(rng);
                p.x += sx * nx;
                p.y += sy * ny;
            }
        }
        let k = ((inject_fraction * n as f64).floor() as usize).min(n);
        if k > 0 {
            let z = self.positions[0].z;
            for i in index::sample(rng, n, k) {
                self.positions[i] = uniform_in(area, z, rng);
            }
        }
        self.refresh();
    }

    /// Declares the set localized when the xy covariance determinant drops
    /// below `n_threshold`. Once localized the set never changes again.
    pub fn localization_test(&mut self, n_threshold: f64) -> bool {
        if !self.localized && self.cov_det() < n_threshold {
            self.localized = true;
        }
        self.localized
    }
}

pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 > 0.0 {
        1.0 / s2
    } else {
        0.0
    }
}

/// Indices chosen by systematic resampling with offset `u ∈ [0, 1)`
/// (scaled by 1/N internally). `weights` must sum to 1.
pub fn systematic_resample(weights: &[f64], u: f64) -> Vec<usize> {
    let n = weights.len();
    let last = weights.iter().rposition(|&w| w > 0.0).unwrap_or(n - 1);
    let step = 1.0 / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut cum = weights[0];
    let mut i = 0;
    for j in 0..n {
        let target = (u + j as f64) * step;
        while cum <= target && i < last {
            i += 1;
            cum += weights[i];
        }
        out.push(i);
    }
    out
}

fn uniform_in<R: Rng + ?Sized>(area: &Area, z: f64, rng: &mut R) -> Position3 {
    Position3::new(
        rng.random_range(area.x_min..=area.x_max),
        rng.random_range(area.y_min..=area.y_max),
        z,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rf::{AntennaPattern, PropagationParams};
    use crate::rng::stream;
    use approx::assert_abs_diff_eq;

    fn area() -> Area {
        Area::new(0.0, 500.0, 0.0, 500.0)
    }

    fn model() -> MeasurementModel {
        MeasurementModel::new(PropagationParams::sim_default(), AntennaPattern::default())
    }

    fn weight_sum(s: &TargetParticleSet) -> f64 {
        s.weights().iter().sum()
    }

    #[test]
    fn init_is_uniform_over_area() {
        let mut rng = stream(1, &[]);
        let n = 20_000;
        let s = TargetParticleSet::init(0, &area(), n, 0.0, &mut rng).unwrap();
        assert!(s.weights().iter().all(|&w| (w * n as f64 - 1.0).abs() < 1e-12));
        assert!(s.positions().iter().all(|p| area().contains(p) && p.z == 0.0));
        // Uniform on [0, 500]: σ = 500/√12 per axis.
        let se = 500.0 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((s.estimate().x - 250.0).abs() < 3.0 * se);
        assert!((s.estimate().y - 250.0).abs() < 3.0 * se);
        assert!(TargetParticleSet::init(0, &area(), 1, 0.0, &mut rng).is_err());
    }

    #[test]
    fn predict_moves_only_xy() {
        let mut rng = stream(2, &[]);
        let mut s = TargetParticleSet::init(0, &area(), 1000, 3.0, &mut rng).unwrap();
        let before = s.positions().to_vec();
        s.predict(&MotionModel { sigma_q: 0.0 }, 1.0, &mut rng);
        assert_eq!(s.positions(), &before[..]);
        s.predict(&MotionModel { sigma_q: 2.0 }, 1.0, &mut rng);
        assert!(s.positions().iter().all(|p| p.z == 3.0));
    }

    #[test]
    fn predict_displacement_variance() {
        let mut rng = stream(3, &[]);
        let n = 100_000;
        let mut s = TargetParticleSet::from_particles(
            0,
            vec![Position3::new(100.0, 100.0, 0.0); n],
            vec![1.0; n],
        );
        let (sigma_q, dt) = (2.0, 5.0);
        s.predict(&MotionModel { sigma_q }, dt, &mut rng);
        let var_x = s.positions().iter().map(|p| (p.x - 100.0).powi(2)).sum::<f64>() / n as f64;
        let var_y = s.positions().iter().map(|p| (p.y - 100.0).powi(2)).sum::<f64>() / n as f64;
        let expect = sigma_q * sigma_q * dt;
        assert!((var_x / expect - 1.0).abs() < 0.05);
        assert!((var_y / expect - 1.0).abs() < 0.05);
    }

    #[test]
    fn constant_likelihood_leaves_weights() {
        // Every particle sits on a circle around the UAV straight ahead, so
        // all predicted readings are identical.
        let n = 64;
        let positions: Vec<Position3> = (0..n).map(|_| Position3::new(100.0, 0.0, 0.0)).collect();
        let w: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let mut s = TargetParticleSet::from_particles(0, positions, w);
        let before = s.weights().to_vec();
        let uav = UavState::new(Position3::new(0.0, 0.0, 20.0), 0.0);
        assert_eq!(s.update(-50.0, &uav, &model()), UpdateOutcome::Updated);
        for (a, b) in before.iter().zip(s.weights()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn update_normalizes_and_underflow_resets() {
        let mut rng = stream(4, &[]);
        let mut s = TargetParticleSet::init(0, &area(), 5000, 0.0, &mut rng).unwrap();
        let uav = UavState::new(Position3::new(0.0, 0.0, 20.0), 0.7);
        s.update(-45.0, &uav, &model());
        assert_abs_diff_eq!(weight_sum(&s), 1.0, epsilon = 1e-9);
        assert!(s.effective_sample_size() < 5000.0);
        assert_eq!(s.update(1e6, &uav, &model()), UpdateOutcome::Diverged);
        assert_eq!(s.divergences(), 1);
        assert_abs_diff_eq!(s.effective_sample_size(), 5000.0, epsilon = 1e-6);
    }

    #[test]
    fn ess_examples() {
        assert_abs_diff_eq!(effective_sample_size(&[0.25; 4]), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(effective_sample_size(&[1.0, 0.0, 0.0]), 1.0);
        assert_abs_diff_eq!(
            effective_sample_size(&[0.5, 0.25, 0.25, 0.0]),
            1.0 / 0.375,
            epsilon = 1e-12
        );
    }

    #[test]
    fn systematic_resample_degenerate_weight() {
        let mut w = vec![0.0; 10];
        w[7] = 1.0;
        for u in [0.0, 0.3, 0.999] {
            assert!(systematic_resample(&w, u).iter().all(|&i| i == 7));
        }
        let mut rng = stream(5, &[]);
        let positions: Vec<Position3> = (0..10).map(|i| Position3::new(i as f64, 0.0, 0.0)).collect();
        let mut s = TargetParticleSet::from_particles(0, positions, w);
        s.resample_and_inject(&mut rng, 0.0, &area());
        assert!(s.positions().iter().all(|p| p.x == 7.0));
        assert!(s.weights().iter().all(|&w| w == 0.1));
    }

    #[test]
    fn resample_preserves_mean_and_injects() {
        let mut rng = stream(6, &[]);
        let n = 10_000;
        let positions: Vec<Position3> = (0..n)
            .map(|i| Position3::new((i % 100) as f64, (i / 100) as f64, 0.0))
            .collect();
        let weights: Vec<f64> = (0..n).map(|i| ((i % 100) as f64 + 1.0).powi(2)).collect();
        let base = TargetParticleSet::from_particles(0, positions, weights);
        let mean = base.estimate();
        let sd = base.covariance().xx.sqrt();
        let trials = 50;
        let mut acc = 0.0;
        for _ in 0..trials {
            let mut s = base.clone();
            s.resample_and_inject(&mut rng, 0.0, &area());
            assert_abs_diff_eq!(s.effective_sample_size(), n as f64, epsilon = 1e-6);
            acc += s.estimate().x;
        }
        let se = sd / ((n * trials) as f64).sqrt();
        assert!((acc / trials as f64 - mean.x).abs() < 3.0 * se);

        let mut s = base.clone();
        s.resample_and_inject(&mut rng, 0.02, &area());
        assert_eq!(s.len(), n);
        let far = s.positions().iter().filter(|p| p.x > 100.0 || p.y > 100.0).count();
        assert!(far > 0 && far <= 200);
    }

    #[test]
    fn localization_threshold_examples() {
        let point = TargetParticleSet::from_particles(0, vec![Position3::new(5.0, 5.0, 0.0); 10], vec![1.0; 10]);
        let mut p = point.clone();
        assert!(p.localization_test(1e-9));

        // Four points at (±a, ±a) give per-axis variance a² and zero cross term.
        let cloud = |var: f64| {
            let a = var.sqrt();
            let pts = vec![
                Position3::new(a, a, 0.0),
                Position3::new(-a, a, 0.0),
                Position3::new(a, -a, 0.0),
                Position3::new(-a, -a, 0.0),
            ];
            TargetParticleSet::from_particles(0, pts, vec![0.25; 4])
        };
        let mut wide = cloud(1e4);
        assert_abs_diff_eq!(wide.cov_det(), 1e8, epsilon = 1e-3);
        assert!(!wide.localization_test(10_000.0));
        let mut tight = cloud(50.0);
        assert_abs_diff_eq!(tight.cov_det(), 2500.0, epsilon = 1e-6);
        assert!(tight.localization_test(10_000.0));
    }

    #[test]
    fn localized_sets_are_frozen() {
        let mut rng = stream(7, &[]);
        let mut s = TargetParticleSet::from_particles(0, vec![Position3::new(5.0, 5.0, 0.0); 10], vec![1.0; 10]);
        assert!(s.localization_test(1.0));
        let frozen = s.clone();
        s.predict(&MotionModel { sigma_q: 2.0 }, 1.0, &mut rng);
        let uav = UavState::new(Position3::new(0.0, 0.0, 20.0), 0.0);
        assert_eq!(s.update(-40.0, &uav, &model()), UpdateOutcome::Skipped);
        s.resample_and_inject(&mut rng, 0.5, &area());
        assert_eq!(s, frozen);
    }

    #[test]
    fn shrinking_scales_det_by_c4() {
        let mut rng = stream(8, &[]);
        let s = TargetParticleSet::init(0, &Area::new(0.0, 50.0, 0.0, 80.0), 500, 0.0, &mut rng).unwrap();
        let m = s.estimate();
        for c in [0.9, 0.5, 0.1] {
            let shrunk: Vec<Position3> = s
                .positions()
                .iter()
                .map(|p| Position3::new(m.x + c * (p.x - m.x), m.y + c * (p.y - m.y), p.z))
                .collect();
            let t = TargetParticleSet::from_particles(0, shrunk, s.weights().to_vec());
            assert!((t.cov_det() / s.cov_det() - c.powi(4)).abs() < 1e-9);
            let thr = s.cov_det() * 0.5;
            if s.clone().localization_test(thr) {
                assert!(t.clone().localization_test(thr));
            }
        }
    }
}
