//! Information-driven action selection.
//!
//! An action is a target heading: the UAV turns toward it at no more than
//! `theta_max` per cycle, then flies forward. The Rényi and Shannon policies
//! score each candidate by simulating future RSSI readings from predicted
//! particle clouds and averaging the resulting information gain. The
//! closest-target and uniform-sweep baselines never evaluate a reward.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::config::{MotionModel, PlannerConfig, Policy, PruneFocus};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::filter::{weighted_moments, TargetParticleSet};
use crate::geometry::{bearing_to, normalize_angle, shortest_angle_diff, Area, Position3, UavState};
use crate::rf::{antenna_gain, detect, MeasurementModel};
use crate::rng::stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Action {
    /// Position in the enumerated heading set.
    pub index: usize,
    /// rad, in [0, 2π)
    pub target_heading: f64,
}

/// Simulated future of one action for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub action: Action,
    /// UAV state at each look-ahead step.
    pub future_uav_states: Vec<UavState>,
    /// Discounted reward summed over look-ahead steps, one per sample.
    pub sampled_rewards: Vec<f64>,
}

/// Everything the planner needs besides the filters and the UAV state.
#[derive(Debug, Clone)]
pub struct PlanContext<'a> {
    pub cfg: &'a PlannerConfig,
    pub model: &'a MeasurementModel,
    pub motion: &'a MotionModel,
    pub area: &'a Area,
    pub sensitivity: f64,
}

/// A planning decision with the scores behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanOutcome {
    pub action: Action,
    /// Candidate actions after pruning, in enumeration order.
    pub candidates: Vec<Action>,
    /// Score of each candidate; empty for the baseline policies.
    pub scores: Vec<f64>,
}

/// `heading_count` headings evenly spaced over [0, 2π) starting at 0.
pub fn enumerate_actions(cfg: &PlannerConfig) -> Vec<Action> {
    let k = cfg.heading_count.max(1);
    (0..k)
        .map(|i| Action {
            index: i,
            target_heading: TAU * i as f64 / k as f64,
        })
        .collect()
}

/// Action whose heading is closest to `angle`.
pub fn nearest_action(cfg: &PlannerConfig, angle: f64) -> Action {
    let k = cfg.heading_count.max(1);
    let step = TAU / k as f64;
    let i = (normalize_angle(angle) / step).round() as usize % k;
    Action {
        index: i,
        target_heading: step * i as f64,
    }
}

/// UAV states after each of `cycles` one-second cycles under `action`.
///
/// The UAV first rotates in place by `theta_max` per cycle for
/// `⌊|Δθ|/θ_max⌋` cycles, then completes the remaining fraction of the turn
/// and flies forward at `v_uav` every following cycle. Positions are
/// clamped to `area`.
pub fn predict_uav_trajectory(
    uav: &UavState,
    action: &Action,
    cfg: &PlannerConfig,
    area: &Area,
    cycles: u32,
) -> Vec<UavState> {
    let dtheta = shortest_angle_diff(uav.heading, action.target_heading);
    let full = (dtheta.abs() / cfg.theta_max + 1e-9).floor() as u32;
    let step = cfg.theta_max.copysign(dtheta);
    let mut out = Vec::with_capacity(cycles as usize);
    let mut heading = uav.heading;
    let mut pos = uav.position;
    for c in 0..cycles {
        if c < full {
            heading = normalize_angle(heading + step);
        } else {
            heading = normalize_angle(action.target_heading);
            pos = area.clamp(Position3::new(
                pos.x + cfg.v_uav * heading.cos(),
                pos.y + cfg.v_uav * heading.sin(),
                pos.z,
            ));
        }
        out.push(UavState { position: pos, heading });
    }
    out
}

/// The `n_subset` actions whose terminal states see `x_hat` with the highest
/// antenna gain, returned in enumeration order. Ties keep enumeration order.
pub fn select_action_subset(
    actions: &[Action],
    terminal_states: &[UavState],
    x_hat: &Position3,
    model: &MeasurementModel,
    n_subset: usize,
) -> Result<Vec<Action>> {
    if actions.is_empty() {
        return Err(Error::Empty("no candidate actions".into()));
    }
    if n_subset >= actions.len() {
        return Ok(actions.to_vec());
    }
    let gains: Vec<f64> = terminal_states
        .iter()
        .map(|u| antenna_gain(&model.pattern, u, x_hat))
        .collect();
    let mut order: Vec<usize> = (0..actions.len()).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    let mut keep: Vec<usize> = order.into_iter().take(n_subset.max(1)).collect();
    keep.sort_unstable();
    Ok(keep.into_iter().map(|i| actions[i]).collect())
}

/// One simulated reading from the cloud as seen from `uav_future`, or `None`
/// when it falls below `sensitivity`.
pub fn sample_future_measurement<R: Rng + ?Sized>(
    ps: &TargetParticleSet,
    uav_future: &UavState,
    model: &MeasurementModel,
    sensitivity: f64,
    rng: &mut R,
) -> Option<f64> {
    let cdf = cumulative(ps.weights());
    let i = draw_index(&cdf, rng);
    let (s, c) = uav_future.heading.sin_cos();
    let h = model.rssi_fast(&ps.positions()[i], &uav_future.position, c, s);
    let n: f64 = StandardNormal.sample(rng);
    let z = h + model.params.sigma_p * n;
    detect(z, sensitivity).then_some(z)
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn draw_index<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let total = *cdf.last().unwrap_or(&0.0);
    let u = rng.random::<f64>() * total;
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Weighted-particle estimate of the Rényi divergence of order `alpha`
/// between prior and posterior, given per-particle log-likelihoods:
///
/// `1/(α−1) · log[ Σ w g^{1−α} / (Σ w g)^{1−α} ]`.
///
/// `alpha = 1` gives the Kullback-Leibler limit `log Σ w g − Σ w log g`
/// (weights normalized). Returns `None` when every likelihood is zero.
pub fn renyi_estimate(weights: &[f64], log_lik: &[f64], alpha: f64) -> Option<f64> {
    let m = log_lik
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return None;
    }
    let total: f64 = weights.iter().sum();
    if alpha == 1.0 {
        let mut b = 0.0;
        let mut mean_log = 0.0;
        for (&w, &l) in weights.iter().zip(log_lik) {
            if w > 0.0 {
                b += w * (l - m).exp();
                mean_log += w * (l - m);
            }
        }
        return Some((b / total).ln() - mean_log / total);
    }
    let beta = 1.0 - alpha;
    let (mut a, mut b) = (0.0, 0.0);
    for (&w, &l) in weights.iter().zip(log_lik) {
        if w > 0.0 {
            a += w * (beta * (l - m)).exp();
            b += w * (l - m).exp();
        }
    }
    let ln_a = (a / total).ln();
    let ln_b = (b / total).ln();
    Some((ln_a - beta * ln_b) / (alpha - 1.0))
}

fn log_lik(z: f64, h: f64, sigma: f64) -> f64 {
    let e = (z - h) / sigma;
    -0.5 * e * e
}

/// Rényi information gain of reading `z` at `uav_future` for the cloud `ps`.
/// A missed detection carries no gain.
pub fn renyi_reward(
    ps: &TargetParticleSet,
    z: Option<f64>,
    uav_future: &UavState,
    model: &MeasurementModel,
    alpha: f64,
) -> f64 {
    let Some(z) = z else { return 0.0 };
    let (s, c) = uav_future.heading.sin_cos();
    let ll: Vec<f64> = ps
        .positions()
        .iter()
        .map(|p| log_lik(z, model.rssi_fast(p, &uav_future.position, c, s), model.params.sigma_p))
        .collect();
    renyi_estimate(ps.weights(), &ll, alpha).unwrap_or(0.0)
}

/// Differential entropy of a 2-D Gaussian with covariance determinant `det`.
pub fn gaussian_entropy(det: f64) -> f64 {
    0.5 * ((2.0 * PI * std::f64::consts::E).powi(2) * det).ln()
}

/// Entropy reduction `H(prior) − H(posterior)` under the Gaussian
/// approximation of both clouds.
pub fn shannon_reward(
    ps: &TargetParticleSet,
    z: Option<f64>,
    uav_future: &UavState,
    model: &MeasurementModel,
) -> f64 {
    let Some(z) = z else { return 0.0 };
    let (s, c) = uav_future.heading.sin_cos();
    let ll: Vec<f64> = ps
        .positions()
        .iter()
        .map(|p| log_lik(z, model.rssi_fast(p, &uav_future.position, c, s), model.params.sigma_p))
        .collect();
    let m = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let post: Vec<f64> = ps
        .weights()
        .iter()
        .zip(&ll)
        .map(|(w, l)| w * (l - m).exp())
        .collect();
    let (_, prior) = weighted_moments(ps.positions(), ps.weights());
    let (_, posterior) = weighted_moments(ps.positions(), &post);
    entropy_drop(prior.det(), posterior.det())
}

fn entropy_drop(prior_det: f64, post_det: f64) -> f64 {
    if prior_det > 0.0 && post_det > 0.0 {
        0.5 * (prior_det / post_det).ln()
    } else {
        0.0
    }
}

/// Particles grouped by predicted RSSI. Readings are compared against the
/// bin's weighted mean RSSI, which is accurate to a small fraction of σ_P.
struct RssiBins {
    origin: i64,
    inv_width: f64,
    w: Vec<f64>,
    wh: Vec<f64>,
    /// Σw·[x, y, xx, xy, yy], only kept for the Shannon reward.
    mom: Vec<[f64; 5]>,
}

const BINS_PER_SIGMA: f64 = 32.0;
const WINDOW_SIGMAS: f64 = 12.0;

impl RssiBins {
    fn build(h: &[f64], weights: &[f64], positions: &[Position3], sigma: f64, moments: bool) -> Self {
        let inv_width = BINS_PER_SIGMA / sigma;
        let (lo, hi) = h
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let origin = (lo * inv_width).floor() as i64;
        let len = ((hi * inv_width).floor() as i64 - origin + 1) as usize;
        let mut w = vec![0.0; len];
        let mut wh = vec![0.0; len];
        let mut mom = if moments { vec![[0.0; 5]; len] } else { Vec::new() };
        for (i, (&hv, &wv)) in h.iter().zip(weights).enumerate() {
            let b = ((hv * inv_width).floor() as i64 - origin) as usize;
            w[b] += wv;
            wh[b] += wv * hv;
            if moments {
                let p = &positions[i];
                let m = &mut mom[b];
                m[0] += wv * p.x;
                m[1] += wv * p.y;
                m[2] += wv * p.x * p.x;
                m[3] += wv * p.x * p.y;
                m[4] += wv * p.y * p.y;
            }
        }
        for (s, &t) in wh.iter_mut().zip(&w) {
            if t > 0.0 {
                *s /= t;
            }
        }
        Self {
            origin,
            inv_width,
            w,
            wh,
            mom,
        }
    }

    fn window(&self, z: f64, sigma: f64) -> std::ops::Range<usize> {
        let idx = |v: f64| ((v * self.inv_width).floor() as i64 - self.origin).clamp(0, self.w.len() as i64) as usize;
        idx(z - WINDOW_SIGMAS * sigma)..(idx(z + WINDOW_SIGMAS * sigma) + 1).min(self.w.len())
    }

    fn renyi(&self, z: f64, sigma: f64, alpha: f64) -> f64 {
        let r = self.window(z, sigma);
        let (w, h) = (&self.w[r.clone()], &self.wh[r]);
        let ll: Vec<f64> = h.iter().map(|&hv| log_lik(z, hv, sigma)).collect();
        // Bins outside the window carry weight but negligible likelihood.
        let outside = 1.0 - w.iter().sum::<f64>();
        match renyi_estimate(w, &ll, alpha) {
            Some(_) if outside > 0.0 => {
                let mut ww = w.to_vec();
                ww.push(outside.max(0.0));
                let mut l2 = ll;
                l2.push(f64::NEG_INFINITY);
                renyi_estimate(&ww, &l2, alpha).unwrap_or(0.0)
            }
            Some(v) => v,
            None => 0.0,
        }
    }

    fn shannon(&self, z: f64, sigma: f64, prior_det: f64) -> f64 {
        let r = self.window(z, sigma);
        let m = self.wh[r.clone()]
            .iter()
            .zip(&self.w[r.clone()])
            .filter(|(_, &w)| w > 0.0)
            .map(|(&h, _)| log_lik(z, h, sigma))
            .fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return 0.0;
        }
        let mut t = 0.0;
        let mut acc = [0.0; 5];
        for b in r {
            if self.w[b] > 0.0 {
                let g = (log_lik(z, self.wh[b], sigma) - m).exp();
                t += g * self.w[b];
                for (a, v) in acc.iter_mut().zip(&self.mom[b]) {
                    *a += g * v;
                }
            }
        }
        let mx = acc[0] / t;
        let my = acc[1] / t;
        let xx = acc[2] / t - mx * mx;
        let xy = acc[3] / t - mx * my;
        let yy = acc[4] / t - my * my;
        entropy_drop(prior_det, (xx * yy - xy * xy).max(0.0))
    }
}

/// A target cloud propagated to each look-ahead step.
struct PredictedCloud<'a> {
    target_id: usize,
    weights: &'a [f64],
    cdf: Vec<f64>,
    steps: Vec<Vec<Position3>>,
    dets: Vec<f64>,
}

fn predict_cloud<'a>(
    ps: &'a TargetParticleSet,
    cfg: &PlannerConfig,
    motion: &MotionModel,
    seed: u64,
) -> PredictedCloud<'a> {
    let mut rng = stream(seed, &[0, ps.target_id() as u64]);
    let s = motion.sigma_q * (cfg.t_plan as f64).sqrt();
    let mut cur = ps.positions().to_vec();
    let mut steps = Vec::with_capacity(cfg.n_horizon as usize);
    let mut dets = Vec::with_capacity(cfg.n_horizon as usize);
    for _ in 0..cfg.n_horizon {
        if s > 0.0 {
            for p in &mut cur {
                let nx: f64 = StandardNormal.sample(&mut rng);
                let ny: f64 = StandardNormal.sample(&mut rng);
                p.x += s * nx;
                p.y += s * ny;
            }
        }
        dets.push(weighted_moments(&cur, ps.weights()).1.det());
        steps.push(cur.clone());
    }
    PredictedCloud {
        target_id: ps.target_id(),
        weights: ps.weights(),
        cdf: cumulative(ps.weights()),
        steps,
        dets,
    }
}

fn rollout_one(
    action: Action,
    states: &[UavState],
    cloud: &PredictedCloud,
    ctx: &PlanContext,
    seed: u64,
) -> Rollout {
    let cfg = ctx.cfg;
    let sigma = ctx.model.params.sigma_p;
    let shannon = cfg.policy == Policy::Shannon;
    // The same draws for every action, so candidates differ only by geometry.
    let mut rng = stream(seed, &[1, cloud.target_id as u64]);
    let mut rewards = vec![0.0; cfg.m_samples];
    let mut h = Vec::new();
    for (j, (uav, pos)) in states.iter().zip(&cloud.steps).enumerate() {
        let (s, c) = uav.heading.sin_cos();
        h.clear();
        h.extend(pos.iter().map(|p| ctx.model.rssi_fast(p, &uav.position, c, s)));
        let bins = RssiBins::build(&h, cloud.weights, pos, sigma, shannon);
        let discount = cfg.gamma.powf(((j as u32 + 1) * cfg.t_plan) as f64);
        for r in rewards.iter_mut() {
            let i = draw_index(&cloud.cdf, &mut rng);
            let n: f64 = StandardNormal.sample(&mut rng);
            let z = h[i] + sigma * n;
            if !detect(z, ctx.sensitivity) {
                continue;
            }
            let gain = if shannon {
                bins.shannon(z, sigma, cloud.dets[j])
            } else {
                bins.renyi(z, sigma, cfg.alpha)
            };
            *r += discount * gain;
        }
    }
    Rollout {
        action,
        future_uav_states: states.to_vec(),
        sampled_rewards: rewards,
    }
}

/// UAV states at the look-ahead steps `t_p, 2t_p, …, H` for each action.
fn lookahead_states(uav: &UavState, actions: &[Action], ctx: &PlanContext) -> Vec<Vec<UavState>> {
    let cfg = ctx.cfg;
    actions
        .iter()
        .map(|a| {
            let traj = predict_uav_trajectory(uav, a, cfg, ctx.area, cfg.horizon());
            (1..=cfg.n_horizon)
                .map(|j| traj[(j * cfg.t_plan) as usize - 1])
                .collect()
        })
        .collect()
}

/// Reward-based action selection over the unlocalized targets in `filters`.
/// All randomness derives from `seed`, so the result does not depend on
/// `exec`.
pub fn plan(
    filters: &[TargetParticleSet],
    uav: &UavState,
    ctx: &PlanContext,
    seed: u64,
    exec: Exec,
) -> Result<PlanOutcome> {
    let cfg = ctx.cfg;
    let active: Vec<&TargetParticleSet> = filters.iter().filter(|f| !f.is_localized()).collect();
    if active.is_empty() {
        return Err(Error::NothingToPlan);
    }
    let clouds: Vec<PredictedCloud> = exec.map(&active, |ps| predict_cloud(ps, cfg, ctx.motion, seed));

    let actions = enumerate_actions(cfg);
    let states = lookahead_states(uav, &actions, ctx);
    let focus = match cfg.prune_focus {
        PruneFocus::Nearest => active
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = a.1.estimate().horizontal_distance(&uav.position);
                let db = b.1.estimate().horizontal_distance(&uav.position);
                da.total_cmp(&db)
            })
            .map(|(i, _)| i)
            .unwrap(),
        PruneFocus::MostUncertain => clouds
            .iter()
            .enumerate()
            .max_by(|a, b| {
                let (da, db) = (a.1.dets.last().unwrap(), b.1.dets.last().unwrap());
                da.total_cmp(db).then(b.0.cmp(&a.0))
            })
            .map(|(i, _)| i)
            .unwrap(),
    };
    let x_hat = weighted_moments(clouds[focus].steps.last().unwrap(), clouds[focus].weights).0;
    let terminal: Vec<UavState> = states.iter().map(|s| *s.last().unwrap()).collect();
    let candidates = select_action_subset(&actions, &terminal, &x_hat, ctx.model, cfg.n_action_subset)?;

    let jobs: Vec<(usize, usize)> = (0..candidates.len())
        .flat_map(|a| (0..clouds.len()).map(move |t| (a, t)))
        .collect();
    let means = exec.map(&jobs, |&(a, t)| {
        let act = candidates[a];
        let r = rollout_one(act, &states[act.index], &clouds[t], ctx, seed);
        r.sampled_rewards.iter().sum::<f64>() / cfg.m_samples as f64
    });
    let mut scores = vec![0.0; candidates.len()];
    for (&(a, _), v) in jobs.iter().zip(&means) {
        scores[a] += v;
    }
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    Ok(PlanOutcome {
        action: candidates[best],
        candidates,
        scores,
    })
}

/// Single-target rollout of `action`, exposed for inspection.
pub fn rollout(
    ps: &TargetParticleSet,
    uav: &UavState,
    action: &Action,
    ctx: &PlanContext,
    seed: u64,
) -> Rollout {
    let cloud = predict_cloud(ps, ctx.cfg, ctx.motion, seed);
    let states = lookahead_states(uav, std::slice::from_ref(action), ctx);
    rollout_one(*action, &states[0], &cloud, ctx, seed)
}

/// Heads for the nearest unlocalized estimate; ties go to the lower target id.
pub fn closest_target_action(
    filters: &[TargetParticleSet],
    uav: &UavState,
    cfg: &PlannerConfig,
) -> Result<Action> {
    let mut best: Option<(f64, usize, Position3)> = None;
    for f in filters.iter().filter(|f| !f.is_localized()) {
        let d = f.estimate().horizontal_distance(&uav.position);
        let better = match best {
            None => true,
            Some((bd, bid, _)) => d < bd || (d == bd && f.target_id() < bid),
        };
        if better {
            best = Some((d, f.target_id(), f.estimate()));
        }
    }
    let (_, _, goal) = best.ok_or(Error::NothingToPlan)?;
    Ok(nearest_action(cfg, bearing_to(&uav.position, &goal).angle))
}

/// Boustrophedon coverage path over the search area.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepState {
    waypoints: Vec<(f64, f64)>,
    next: usize,
    reach: f64,
}

impl SweepState {
    /// Tracks run parallel to y at `x_min + i·spacing`, alternating direction.
    pub fn new(area: &Area, cfg: &PlannerConfig) -> Self {
        let tracks = (area.width() / cfg.sweep_spacing + 1e-9).floor() as usize + 1;
        let mut waypoints = Vec::with_capacity(2 * tracks);
        for i in 0..tracks {
            let x = (area.x_min + i as f64 * cfg.sweep_spacing).min(area.x_max);
            let (a, b) = if i % 2 == 0 {
                (area.y_min, area.y_max)
            } else {
                (area.y_max, area.y_min)
            };
            waypoints.push((x, a));
            waypoints.push((x, b));
        }
        Self {
            waypoints,
            next: 0,
            reach: 0.5 * cfg.v_uav * cfg.n_plan_cycles as f64,
        }
    }

    pub fn waypoints(&self) -> &[(f64, f64)] {
        &self.waypoints
    }

    /// Total length of the path through all waypoints, m.
    pub fn path_length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt())
            .sum()
    }

    pub fn next_waypoint(&self) -> (f64, f64) {
        self.waypoints[self.next]
    }
}

/// Next heading along the sweep. Waypoints within half a planning block of
/// the UAV count as reached; the sweep restarts after the last one.
pub fn uniform_path_action(uav: &UavState, cfg: &PlannerConfig, sweep: &mut SweepState) -> Action {
    let p = uav.position;
    for _ in 0..sweep.waypoints.len() {
        let (x, y) = sweep.waypoints[sweep.next];
        if ((x - p.x).powi(2) + (y - p.y).powi(2)).sqrt() > sweep.reach {
            break;
        }
        sweep.next = (sweep.next + 1) % sweep.waypoints.len();
    }
    let (x, y) = sweep.waypoints[sweep.next];
    nearest_action(cfg, (y - p.y).atan2(x - p.x))
}

/// Dispatches to the configured policy and keeps the sweep progress.
#[derive(Debug, Clone)]
pub struct Planner {
    sweep: SweepState,
}

impl Planner {
    pub fn new(area: &Area, cfg: &PlannerConfig) -> Self {
        Self {
            sweep: SweepState::new(area, cfg),
        }
    }

    pub fn decide(
        &mut self,
        filters: &[TargetParticleSet],
        uav: &UavState,
        ctx: &PlanContext,
        seed: u64,
        exec: Exec,
    ) -> Result<PlanOutcome> {
        let single = |action: Action| PlanOutcome {
            action,
            candidates: vec![action],
            scores: Vec::new(),
        };
        match ctx.cfg.policy {
            Policy::Renyi | Policy::Shannon => plan(filters, uav, ctx, seed, exec),
            Policy::Closest => closest_target_action(filters, uav, ctx.cfg).map(single),
            Policy::Uniform => Ok(single(uniform_path_action(uav, ctx.cfg, &mut self.sweep))),
        }
    }
}
