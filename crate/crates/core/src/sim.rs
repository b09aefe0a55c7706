//! Simulated searches and the Monte Carlo harness.
//!
//! A run advances in one-second cycles. Each cycle the UAV receives one
//! reading per detectable tag, every unlocalized filter is predicted and
//! updated, and every `n_plan_cycles` cycles the policy picks the action
//! flown over the next block. Time is logical; wall-clock spent planning
//! and filtering is measured separately and never feeds back into the run.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::config::{FilterConfig, MotionModel, PlannerConfig, Policy, ScenarioConfig, SimConfig, SweepValue};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::filter::TargetParticleSet;
use crate::geometry::{distance, Area, Position3, UavState};
use crate::planner::{predict_uav_trajectory, PlanContext, PlanOutcome, Planner};
use crate::rf::{detect, MeasurementModel};
use crate::rng::{derive_seed, stream, SimRng, TAG_FILTER, TAG_MEASUREMENT, TAG_PLANNER, TAG_TRUTH_INIT, TAG_TRUTH_MOTION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetTruth {
    pub id: usize,
    /// Radio channel; identifies the tag without ambiguity.
    pub channel: usize,
    pub position: Position3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub rssi: f64,
    pub channel: usize,
    pub uav: UavState,
    pub time: u32,
}

/// Resolved inputs of a run: configuration plus the built antenna pattern.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub scenario: ScenarioConfig,
    pub motion: MotionModel,
    pub filter: FilterConfig,
    pub planner: PlannerConfig,
    pub model: MeasurementModel,
}

impl SimSetup {
    /// Validates `cfg` and loads the antenna pattern; table paths are
    /// resolved against `base_dir`.
    pub fn from_config(cfg: &SimConfig, base_dir: &Path) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            scenario: cfg.scenario.clone(),
            motion: cfg.motion,
            filter: cfg.filter,
            planner: cfg.planner.clone(),
            model: MeasurementModel::new(cfg.propagation.clone(), cfg.antenna.build(Some(base_dir))?),
        })
    }
}

/// Uniform initial truths over the area at `target_z`.
pub fn init_truths<R: Rng + ?Sized>(scenario: &ScenarioConfig, rng: &mut R) -> Vec<TargetTruth> {
    let a = &scenario.area;
    (0..scenario.n_targets)
        .map(|id| {
            let (x, y) = match &scenario.target_positions {
                Some(list) => (list[id][0], list[id][1]),
                None => (rng.random_range(a.x_min..=a.x_max), rng.random_range(a.y_min..=a.y_max)),
            };
            TargetTruth {
                id,
                channel: id,
                position: Position3::new(x, y, scenario.target_z),
            }
        })
        .collect()
}

/// One-second random-walk step for every truth, reflected at the area edges.
pub fn step_targets<R: Rng + ?Sized>(truths: &mut [TargetTruth], motion: &MotionModel, area: &Area, rng: &mut R) {
    if motion.sigma_q == 0.0 {
        return;
    }
    for t in truths {
        let nx: f64 = StandardNormal.sample(rng);
        let ny: f64 = StandardNormal.sample(rng);
        let p = t.position;
        t.position = area.reflect(Position3::new(p.x + motion.sigma_q * nx, p.y + motion.sigma_q * ny, p.z));
    }
}

/// One noisy reading per truth; readings below `sensitivity` are dropped.
pub fn generate_measurements<R: Rng + ?Sized>(
    truths: &[TargetTruth],
    uav: &UavState,
    model: &MeasurementModel,
    sensitivity: f64,
    time: u32,
    rng: &mut R,
) -> Vec<Measurement> {
    let (s, c) = uav.heading.sin_cos();
    truths
        .iter()
        .filter_map(|t| {
            let n: f64 = StandardNormal.sample(rng);
            let z = model.rssi_fast(&t.position, &uav.position, c, s) + model.params.sigma_p * n;
            detect(z, sensitivity).then_some(Measurement {
                rssi: z,
                channel: t.channel,
                uav: *uav,
                time,
            })
        })
        .collect()
}

/// Horizontal distance between estimate and truth.
pub fn rms_error(estimate: &Position3, truth: &Position3) -> f64 {
    estimate.horizontal_distance(truth)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub seed: u64,
    /// Error of each target, taken when it was localized or at the end.
    pub per_target_rms: Vec<f64>,
    pub mean_rms: f64,
    /// s
    pub flight_time: u32,
    /// m
    pub travel_distance: f64,
    pub localized_count: usize,
    /// Cycle at which each target was localized.
    pub localized_at: Vec<Option<u32>>,
    pub planning_events: u32,
    /// Filter divergence resets summed over targets.
    pub divergences: u32,
    /// Wall-clock seconds spent in the policy.
    pub planning_time: f64,
    /// Wall-clock seconds spent simulating readings and filtering.
    pub non_planning_time: f64,
    /// Final estimate of each target.
    pub estimates: Vec<Position3>,
    pub truths: Vec<Position3>,
    #[serde(skip)]
    pub trajectory: Vec<(u32, UavState)>,
}

impl RunResult {
    /// Everything except wall-clock timings and the trajectory, which is
    /// what has to match between repeated executions.
    pub fn metrics_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).unwrap_or_default();
        if let Some(m) = v.as_object_mut() {
            m.remove("planning_time");
            m.remove("non_planning_time");
        }
        v
    }
}

/// Hooks for optional per-cycle output.
pub trait RunObserver: Send {
    fn on_cycle(&mut self, _time: u32, _uav: &UavState, _filters: &[TargetParticleSet], _truths: &[TargetTruth]) {}
    fn on_plan(&mut self, _time: u32, _outcome: &PlanOutcome) {}
}

pub struct NoObserver;
impl RunObserver for NoObserver {}

/// One complete search with the given seed.
pub fn run_scenario(setup: &SimSetup, seed: u64, exec: Exec, observer: &mut dyn RunObserver) -> Result<RunResult> {
    let sc = &setup.scenario;
    let cfg = &setup.planner;
    let area = sc.area;
    let mut truth_rng = stream(seed, &[TAG_TRUTH_INIT]);
    let mut truths = init_truths(sc, &mut truth_rng);
    let mut motion_rng = stream(seed, &[TAG_TRUTH_MOTION]);
    let mut meas_rng = stream(seed, &[TAG_MEASUREMENT]);
    let mut rngs: Vec<SimRng> = truths.iter().map(|t| stream(seed, &[TAG_FILTER, t.id as u64])).collect();
    let mut filters = truths
        .iter()
        .zip(rngs.iter_mut())
        .map(|(t, rng)| TargetParticleSet::init(t.id, &area, sc.n_particles, sc.target_z, rng))
        .collect::<Result<Vec<_>>>()?;

    let mut uav = sc.uav_start_state();
    let mut planner = Planner::new(&area, cfg);
    let ctx = PlanContext {
        cfg,
        model: &setup.model,
        motion: &setup.motion,
        area: &area,
        sensitivity: sc.sensitivity_dbm,
    };
    let n = truths.len();
    let mut per_target_rms = vec![f64::NAN; n];
    let mut localized_at = vec![None; n];
    let mut trajectory = vec![(0, uav)];
    let mut block: Vec<UavState> = Vec::new();
    let mut planning_time = 0.0;
    let mut non_planning_time = 0.0;
    let mut planning_events = 0;
    let resample_below = setup.filter.resample_threshold * sc.n_particles as f64;

    let mut t = 0u32;
    while t < sc.max_time {
        let clock = Instant::now();
        let readings = generate_measurements(&truths, &uav, &setup.model, sc.sensitivity_dbm, t, &mut meas_rng);
        let mut reading = vec![None; n];
        for m in &readings {
            reading[m.channel] = Some(m.rssi);
        }
        let first = t == 0;
        let mut work: Vec<(&mut TargetParticleSet, &mut SimRng, Option<f64>)> = filters
            .iter_mut()
            .zip(rngs.iter_mut())
            .zip(reading)
            .map(|((f, r), z)| (f, r, z))
            .collect();
        exec.for_each_mut(&mut work, |(ps, rng, z)| {
            if ps.is_localized() {
                return;
            }
            if !first {
                ps.predict(&setup.motion, 1.0, *rng);
            }
            if let Some(z) = *z {
                ps.update(z, &uav, &setup.model);
                if ps.effective_sample_size() < resample_below {
                    ps.resample_roughen_inject(*rng, setup.filter.roughening, setup.filter.inject_fraction, &area);
                }
            }
        });
        for ps in filters.iter_mut() {
            let id = ps.target_id();
            if localized_at[id].is_none() && ps.localization_test(sc.n_threshold) {
                localized_at[id] = Some(t);
                per_target_rms[id] = rms_error(&ps.estimate(), &truths[id].position);
            }
        }
        non_planning_time += clock.elapsed().as_secs_f64();

        observer.on_cycle(t, &uav, &filters, &truths);
        if localized_at.iter().all(Option::is_some) {
            break;
        }

        let phase = t % cfg.n_plan_cycles;
        if phase == 0 {
            let clock = Instant::now();
            let outcome = planner.decide(&filters, &uav, &ctx, derive_seed(seed, &[TAG_PLANNER, t as u64]), exec)?;
            planning_time += clock.elapsed().as_secs_f64();
            planning_events += 1;
            observer.on_plan(t, &outcome);
            block = predict_uav_trajectory(&uav, &outcome.action, cfg, &area, cfg.n_plan_cycles);
        }
        uav = block[phase as usize];
        step_targets(&mut truths, &setup.motion, &area, &mut motion_rng);
        t += 1;
        trajectory.push((t, uav));
    }

    let estimates: Vec<Position3> = filters.iter().map(|f| f.estimate()).collect();
    for (i, r) in per_target_rms.iter_mut().enumerate() {
        if r.is_nan() {
            *r = rms_error(&estimates[i], &truths[i].position);
        }
    }
    let travel_distance = trajectory
        .windows(2)
        .map(|w| distance(&w[0].1.position, &w[1].1.position))
        .sum();
    Ok(RunResult {
        seed,
        mean_rms: mean(&per_target_rms),
        per_target_rms,
        flight_time: t,
        travel_distance,
        localized_count: localized_at.iter().filter(|l| l.is_some()).count(),
        localized_at,
        planning_events,
        divergences: filters.iter().map(|f| f.divergences()).sum(),
        planning_time,
        non_planning_time,
        estimates,
        truths: truths.iter().map(|t| t.position).collect(),
        trajectory,
    })
}

/// Seed of Monte Carlo run `index`.
pub fn run_seed(base_seed: u64, index: usize) -> u64 {
    derive_seed(base_seed, &[index as u64])
}

/// Mean and sample standard deviation of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        Self {
            mean: mean(values),
            std: std_dev(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub label: String,
    pub runs: usize,
    /// m
    pub rms: Stat,
    /// s
    pub flight_time: Stat,
    /// km
    pub travel_distance_km: Stat,
    pub localized: Stat,
    /// Wall-clock seconds per planning event.
    pub planning_time: Stat,
    /// Wall-clock seconds of filtering per planning event.
    pub non_planning_time: Stat,
}

impl McSummary {
    pub fn from_results(label: impl Into<String>, results: &[RunResult]) -> Result<Self> {
        if results.is_empty() {
            return Err(Error::Empty("no runs to summarize".into()));
        }
        let pick = |f: &dyn Fn(&RunResult) -> f64| Stat::of(&results.iter().map(f).collect::<Vec<_>>());
        let per_event = |r: &RunResult, v: f64| v / r.planning_events.max(1) as f64;
        Ok(Self {
            label: label.into(),
            runs: results.len(),
            rms: pick(&|r| r.mean_rms),
            flight_time: pick(&|r| r.flight_time as f64),
            travel_distance_km: pick(&|r| r.travel_distance / 1000.0),
            localized: pick(&|r| r.localized_count as f64),
            planning_time: pick(&|r| per_event(r, r.planning_time)),
            non_planning_time: pick(&|r| per_event(r, r.non_planning_time)),
        })
    }
}

/// Runs `runs` seeded searches, `chunk` at a time, handing each finished
/// result to `on_result` in run order.
pub fn monte_carlo_with(
    setup: &SimSetup,
    runs: usize,
    base_seed: u64,
    exec: Exec,
    chunk: usize,
    mut on_result: impl FnMut(usize, &RunResult) -> Result<()>,
) -> Result<Vec<RunResult>> {
    if runs == 0 {
        return Err(Error::config("experiment.runs", "must be >= 1"));
    }
    let mut out = Vec::with_capacity(runs);
    let indices: Vec<usize> = (0..runs).collect();
    for part in indices.chunks(chunk.max(1)) {
        let batch = exec.map(part, |&i| run_scenario(setup, run_seed(base_seed, i), exec, &mut NoObserver));
        for (&i, r) in part.iter().zip(batch) {
            let r = r?;
            on_result(i, &r)?;
            out.push(r);
        }
    }
    Ok(out)
}

pub fn monte_carlo(setup: &SimSetup, runs: usize, base_seed: u64, exec: Exec) -> Result<(McSummary, Vec<RunResult>)> {
    let results = monte_carlo_with(setup, runs, base_seed, exec, runs, |_, _| Ok(()))?;
    Ok((McSummary::from_results("", &results)?, results))
}

pub const SWEEP_PARAMETERS: [&str; 4] = ["alpha", "n_actions", "n_targets", "policy-horizon"];

/// Applies one sweep value to `cfg` and returns its row label.
///
/// `policy-horizon` values are `uniform`, `closest`, or
/// `<renyi|shannon>:<n_horizon>:<t_plan>`.
pub fn apply_sweep_value(cfg: &mut SimConfig, parameter: &str, value: &SweepValue) -> Result<String> {
    let bad = |why: &str| Error::config(format!("experiment.sweep.values ({parameter})"), format!("{value}: {why}"));
    let number = || match value {
        SweepValue::Int(v) => Ok(*v as f64),
        SweepValue::Float(v) => Ok(*v),
        SweepValue::Text(s) => s.parse::<f64>().map_err(|_| bad("not a number")),
    };
    let count = || {
        let v = number()?;
        if v >= 1.0 && v.fract() == 0.0 {
            Ok(v as usize)
        } else {
            Err(bad("must be a positive integer"))
        }
    };
    match parameter {
        "alpha" => {
            cfg.planner.alpha = number()?;
            Ok(format!("alpha={value}"))
        }
        "n_actions" => {
            cfg.planner.n_action_subset = count()?;
            Ok(format!("n_actions={value}"))
        }
        "n_targets" => {
            cfg.scenario.n_targets = count()?;
            Ok(format!("n_targets={value}"))
        }
        "policy-horizon" => {
            let text = value.to_string();
            let mut parts = text.split(':');
            let policy = match parts.next().unwrap_or("") {
                "renyi" => Policy::Renyi,
                "shannon" => Policy::Shannon,
                "closest" => Policy::Closest,
                "uniform" => Policy::Uniform,
                _ => return Err(bad("unknown policy")),
            };
            cfg.planner.policy = policy;
            let rest: Vec<&str> = parts.collect();
            match (policy, rest.as_slice()) {
                (Policy::Closest | Policy::Uniform, []) => {}
                (Policy::Renyi | Policy::Shannon, [h, tp]) => {
                    cfg.planner.n_horizon = h.parse().map_err(|_| bad("bad n_horizon"))?;
                    cfg.planner.t_plan = tp.parse().map_err(|_| bad("bad t_plan"))?;
                }
                (Policy::Renyi | Policy::Shannon, []) => {}
                _ => return Err(bad("expected policy[:n_horizon:t_plan]")),
            }
            Ok(text)
        }
        other => Err(Error::UnknownSweepParameter(other.to_string())),
    }
}

/// One Monte Carlo summary per sweep value.
pub fn sweep(
    base: &SimConfig,
    parameter: &str,
    values: &[SweepValue],
    runs: usize,
    base_dir: &Path,
    exec: Exec,
) -> Result<Vec<(McSummary, Vec<RunResult>)>> {
    if !SWEEP_PARAMETERS.contains(&parameter) {
        return Err(Error::UnknownSweepParameter(parameter.to_string()));
    }
    if values.is_empty() {
        return Err(Error::Empty("sweep has no values".into()));
    }
    let mut out = Vec::with_capacity(values.len());
    for v in values {
        let mut cfg = base.clone();
        let label = apply_sweep_value(&mut cfg, parameter, v)?;
        let setup = SimSetup::from_config(&cfg, base_dir)?;
        let (mut summary, results) = monte_carlo(&setup, runs, cfg.experiment.base_seed, exec)?;
        summary.label = label;
        out.push((summary, results));
    }
    Ok(out)
}

pub const SUMMARY_HEADER: [&str; 10] = [
    "configuration",
    "runs",
    "rms_m_mean",
    "rms_m_std",
    "flight_time_s_mean",
    "flight_time_s_std",
    "travel_distance_km_mean",
    "travel_distance_km_std",
    "localized_mean",
    "localized_std",
];

pub const TIMING_HEADER: [&str; 6] = [
    "configuration",
    "runs",
    "planning_time_s_mean",
    "planning_time_s_std",
    "non_planning_time_s_mean",
    "non_planning_time_s_std",
];

/// Deterministic summary table, one row per configuration.
pub fn write_summary_csv<W: Write>(w: W, rows: &[McSummary]) -> Result<()> {
    let mut c = csv::Writer::from_writer(w);
    c.write_record(SUMMARY_HEADER)?;
    for s in rows {
        c.write_record([
            s.label.clone(),
            s.runs.to_string(),
            s.rms.mean.to_string(),
            s.rms.std.to_string(),
            s.flight_time.mean.to_string(),
            s.flight_time.std.to_string(),
            s.travel_distance_km.mean.to_string(),
            s.travel_distance_km.std.to_string(),
            s.localized.mean.to_string(),
            s.localized.std.to_string(),
        ])?;
    }
    c.flush()?;
    Ok(())
}

/// Wall-clock timings, kept apart from the deterministic summary.
pub fn write_timing_csv<W: Write>(w: W, rows: &[McSummary]) -> Result<()> {
    let mut c = csv::Writer::from_writer(w);
    c.write_record(TIMING_HEADER)?;
    for s in rows {
        c.write_record([
            s.label.clone(),
            s.runs.to_string(),
            s.planning_time.mean.to_string(),
            s.planning_time.std.to_string(),
            s.non_planning_time.mean.to_string(),
            s.non_planning_time.std.to_string(),
        ])?;
    }
    c.flush()?;
    Ok(())
}

/// `time_s,px,py,pz,heading_rad`
pub fn write_trajectory_csv<W: Write>(w: W, trajectory: &[(u32, UavState)]) -> Result<()> {
    let mut c = csv::Writer::from_writer(w);
    c.write_record(["time_s", "px", "py", "pz", "heading_rad"])?;
    for (t, u) in trajectory {
        c.write_record([
            t.to_string(),
            u.position.x.to_string(),
            u.position.y.to_string(),
            u.position.z.to_string(),
            u.heading.to_string(),
        ])?;
    }
    c.flush()?;
    Ok(())
}

/// Records the estimate of every target each cycle.
pub struct EstimateHistory {
    writer: csv::Writer<Box<dyn Write + Send>>,
    error: Option<Error>,
}

impl EstimateHistory {
    pub fn new(w: Box<dyn Write + Send>) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record([
            "time_s", "target_id", "est_x", "est_y", "truth_x", "truth_y", "cov_det", "localized",
        ])?;
        Ok(Self { writer, error: None })
    }

    pub fn finish(mut self) -> Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.writer.flush()?;
        Ok(())
    }
}

impl RunObserver for EstimateHistory {
    fn on_cycle(&mut self, time: u32, _uav: &UavState, filters: &[TargetParticleSet], truths: &[TargetTruth]) {
        if self.error.is_some() {
            return;
        }
        for (f, t) in filters.iter().zip(truths) {
            let e = f.estimate();
            let rec = [
                time.to_string(),
                f.target_id().to_string(),
                e.x.to_string(),
                e.y.to_string(),
                t.position.x.to_string(),
                t.position.y.to_string(),
                f.cov_det().to_string(),
                f.is_localized().to_string(),
            ];
            if let Err(err) = self.writer.write_record(&rec) {
                self.error = Some(err.into());
                return;
            }
        }
    }
}

/// Writes `time_s,target_id,px,py,weight` rows for every unlocalized cloud
/// every `every` cycles.
pub struct ParticleSnapshots {
    writer: csv::Writer<Box<dyn Write + Send>>,
    every: u32,
    error: Option<Error>,
}

impl ParticleSnapshots {
    pub fn new(w: Box<dyn Write + Send>, every: u32) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(["time_s", "target_id", "px", "py", "weight"])?;
        Ok(Self {
            writer,
            every: every.max(1),
            error: None,
        })
    }

    pub fn finish(mut self) -> Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.writer.flush()?;
        Ok(())
    }
}

impl RunObserver for ParticleSnapshots {
    fn on_cycle(&mut self, time: u32, _uav: &UavState, filters: &[TargetParticleSet], _truths: &[TargetTruth]) {
        if self.error.is_some() || time % self.every != 0 {
            return;
        }
        for f in filters.iter().filter(|f| !f.is_localized()) {
            for (p, w) in f.positions().iter().zip(f.weights()) {
                let rec = [
                    time.to_string(),
                    f.target_id().to_string(),
                    p.x.to_string(),
                    p.y.to_string(),
                    w.to_string(),
                ];
                if let Err(err) = self.writer.write_record(&rec) {
                    self.error = Some(err.into());
                    return;
                }
            }
        }
    }
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    time_s: u32,
    candidates: &'a [crate::planner::Action],
    scores: &'a [f64],
    chosen: crate::planner::Action,
}

/// One JSON line per planning event.
pub struct PlannerTrace {
    writer: Box<dyn Write + Send>,
    error: Option<Error>,
}

impl PlannerTrace {
    pub fn new(writer: Box<dyn Write + Send>) -> Self {
        Self { writer, error: None }
    }

    pub fn finish(mut self) -> Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.writer.flush()?;
        Ok(())
    }
}

impl RunObserver for PlannerTrace {
    fn on_plan(&mut self, time: u32, outcome: &PlanOutcome) {
        if self.error.is_some() {
            return;
        }
        let rec = TraceRecord {
            time_s: time,
            candidates: &outcome.candidates,
            scores: &outcome.scores,
            chosen: outcome.action,
        };
        let res = serde_json::to_writer(&mut self.writer, &rec)
            .map_err(Error::from)
            .and_then(|_| self.writer.write_all(b"\n").map_err(Error::from));
        if let Err(e) = res {
            self.error = Some(e);
        }
    }
}

/// Fans every callback out to several observers.
pub struct Observers<'a>(pub Vec<&'a mut dyn RunObserver>);

impl RunObserver for Observers<'_> {
    fn on_cycle(&mut self, time: u32, uav: &UavState, filters: &[TargetParticleSet], truths: &[TargetTruth]) {
        for o in self.0.iter_mut() {
            o.on_cycle(time, uav, filters, truths);
        }
    }
    fn on_plan(&mut self, time: u32, outcome: &PlanOutcome) {
        for o in self.0.iter_mut() {
            o.on_plan(time, outcome);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_setup() -> SimSetup {
        let mut cfg = SimConfig::default();
        cfg.scenario.n_targets = 2;
        cfg.scenario.n_particles = 1000;
        cfg.scenario.max_time = 120;
        cfg.planner.m_samples = 10;
        SimSetup::from_config(&cfg, Path::new(".")).unwrap()
    }

    #[test]
    fn rms_examples() {
        let a = Position3::new(0.0, 0.0, 7.0);
        assert_eq!(rms_error(&a, &a), 0.0);
        assert_eq!(rms_error(&Position3::new(3.0, 4.0, 0.0), &a), 5.0);
        assert_eq!(mean(&[5.0, 15.0]), 10.0);
        assert_eq!(std_dev(&[4.0]), 0.0);
        assert_abs_diff_eq!(std_dev(&[1.0, 2.0, 3.0, 4.0]), (5.0f64 / 3.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn truths_stay_put_without_noise_and_inside_with_it() {
        let sc = ScenarioConfig::default();
        let mut rng = stream(1, &[]);
        let mut truths = init_truths(&sc, &mut rng);
        let before = truths.clone();
        step_targets(&mut truths, &MotionModel { sigma_q: 0.0 }, &sc.area, &mut rng);
        assert_eq!(truths, before);
        let mut one = vec![TargetTruth { id: 0, channel: 0, position: Position3::new(1.0, 499.0, 0.0) }];
        for _ in 0..100_000 {
            step_targets(&mut one, &MotionModel { sigma_q: 20.0 }, &sc.area, &mut rng);
            assert!(sc.area.contains(&one[0].position));
        }
    }

    #[test]
    fn truth_step_std_matches_sigma() {
        let area = Area::new(-1e9, 1e9, -1e9, 1e9);
        let mut rng = stream(2, &[]);
        let n = 50_000;
        let mut truths: Vec<TargetTruth> = (0..n)
            .map(|id| TargetTruth { id, channel: id, position: Position3::default() })
            .collect();
        step_targets(&mut truths, &MotionModel { sigma_q: 2.0 }, &area, &mut rng);
        let sx = (truths.iter().map(|t| t.position.x.powi(2)).sum::<f64>() / n as f64).sqrt();
        let sy = (truths.iter().map(|t| t.position.y.powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((sx - 2.0).abs() < 0.05 && (sy - 2.0).abs() < 0.05);
        assert!(truths.iter().all(|t| t.position.z == 0.0));
    }

    #[test]
    fn measurement_detection() {
        let setup = small_setup();
        let sc = ScenarioConfig::default();
        let mut rng = stream(3, &[]);
        let truths = init_truths(&sc, &mut rng);
        let uav = sc.uav_start_state();
        assert_eq!(generate_measurements(&truths, &uav, &setup.model, -1000.0, 0, &mut rng).len(), truths.len());
        assert!(generate_measurements(&truths, &uav, &setup.model, f64::INFINITY, 0, &mut rng).is_empty());
        let m = generate_measurements(&truths, &uav, &setup.model, -1000.0, 4, &mut rng);
        assert!(m.iter().enumerate().all(|(i, m)| m.channel == i && m.time == 4));
    }

    #[test]
    fn zero_max_time_returns_immediately() {
        let mut setup = small_setup();
        setup.scenario.max_time = 0;
        let r = run_scenario(&setup, 1, Exec::Sequential, &mut NoObserver).unwrap();
        assert_eq!(r.flight_time, 0);
        assert_eq!(r.localized_count, 0);
        assert_eq!(r.trajectory.len(), 1);
        assert_eq!(r.travel_distance, 0.0);
    }

    #[test]
    fn runs_are_repeatable_and_consistent() {
        let setup = small_setup();
        let a = run_scenario(&setup, 9, Exec::Sequential, &mut NoObserver).unwrap();
        let b = run_scenario(&setup, 9, Exec::default(), &mut NoObserver).unwrap();
        assert_eq!(a.metrics_json(), b.metrics_json());
        assert_eq!(a.trajectory, b.trajectory);
        assert!(a.flight_time <= setup.scenario.max_time);
        assert!(a.localized_count <= 2);
        let seg: f64 = a.trajectory.windows(2).map(|w| distance(&w[0].1.position, &w[1].1.position)).sum();
        assert!((seg - a.travel_distance).abs() <= 1e-6 * seg.max(1.0));
        assert_eq!(a.trajectory.len() as u32, a.flight_time + 1);
        assert!(a.trajectory.iter().all(|(_, u)| setup.scenario.area.contains(&u.position)));
    }

    #[test]
    fn localized_estimates_stay_frozen() {
        struct Watch(Vec<Option<Position3>>);
        impl RunObserver for Watch {
            fn on_cycle(&mut self, _: u32, _: &UavState, filters: &[TargetParticleSet], _: &[TargetTruth]) {
                for f in filters {
                    let slot = &mut self.0[f.target_id()];
                    match slot {
                        Some(p) => assert_eq!(*p, f.estimate()),
                        None if f.is_localized() => *slot = Some(f.estimate()),
                        None => {}
                    }
                }
            }
        }
        let mut setup = small_setup();
        setup.scenario.max_time = 400;
        let mut w = Watch(vec![None; 2]);
        let r = run_scenario(&setup, 4, Exec::Sequential, &mut w).unwrap();
        for (i, at) in r.localized_at.iter().enumerate() {
            if at.is_some() {
                assert_eq!(w.0[i], Some(r.estimates[i]));
            }
        }
    }

    #[test]
    fn uniform_path_ignores_noise() {
        let mut setup = small_setup();
        setup.planner.policy = Policy::Uniform;
        setup.scenario.n_threshold = 1e-12;
        setup.scenario.max_time = 200;
        let a = run_scenario(&setup, 1, Exec::Sequential, &mut NoObserver).unwrap();
        setup.model.params.sigma_p = 8.0;
        let b = run_scenario(&setup, 2, Exec::Sequential, &mut NoObserver).unwrap();
        assert_eq!(a.trajectory, b.trajectory);
        assert_eq!(a.planning_events, 40);
    }

    #[test]
    fn single_run_summary_has_zero_spread() {
        let setup = small_setup();
        let (s, runs) = monte_carlo(&setup, 1, 5, Exec::Sequential).unwrap();
        assert_eq!(s.runs, 1);
        assert_eq!(s.rms.mean, runs[0].mean_rms);
        assert_eq!(s.rms.std, 0.0);
        assert_eq!(s.flight_time.mean, runs[0].flight_time as f64);
        assert!(monte_carlo(&setup, 0, 5, Exec::Sequential).is_err());
    }

    #[test]
    fn sweep_values_apply() {
        let mut cfg = SimConfig::default();
        assert_eq!(apply_sweep_value(&mut cfg, "alpha", &SweepValue::Float(0.5)).unwrap(), "alpha=0.5");
        assert_eq!(cfg.planner.alpha, 0.5);
        apply_sweep_value(&mut cfg, "n_actions", &SweepValue::Int(6)).unwrap();
        assert_eq!(cfg.planner.n_action_subset, 6);
        apply_sweep_value(&mut cfg, "n_targets", &SweepValue::Int(3)).unwrap();
        assert_eq!(cfg.scenario.n_targets, 3);
        apply_sweep_value(&mut cfg, "policy-horizon", &SweepValue::Text("renyi:3:1".into())).unwrap();
        assert_eq!((cfg.planner.policy, cfg.planner.n_horizon, cfg.planner.t_plan), (Policy::Renyi, 3, 1));
        apply_sweep_value(&mut cfg, "policy-horizon", &SweepValue::Text("uniform".into())).unwrap();
        assert_eq!(cfg.planner.policy, Policy::Uniform);
        assert!(apply_sweep_value(&mut cfg, "policy-horizon", &SweepValue::Text("greedy".into())).is_err());
        assert!(apply_sweep_value(&mut cfg, "n_targets", &SweepValue::Float(2.5)).is_err());
        assert!(matches!(
            apply_sweep_value(&mut cfg, "speed", &SweepValue::Int(1)),
            Err(Error::UnknownSweepParameter(_))
        ));
        assert!(matches!(
            sweep(&cfg, "speed", &[SweepValue::Int(1)], 1, Path::new("."), Exec::Sequential),
            Err(Error::UnknownSweepParameter(_))
        ));
    }

    #[test]
    fn summary_csv_layout() {
        let setup = small_setup();
        let (mut s, _) = monte_carlo(&setup, 2, 5, Exec::Sequential).unwrap();
        s.label = "alpha=0.1".into();
        let mut buf = Vec::new();
        write_summary_csv(&mut buf, &[s.clone()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SUMMARY_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("alpha=0.1,2,"));
        let mut buf = Vec::new();
        write_timing_csv(&mut buf, &[s]).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with(&TIMING_HEADER.join(",")));
    }

    #[test]
    fn trajectory_csv_header() {
        let mut buf = Vec::new();
        let u = UavState::new(Position3::new(1.0, 2.0, 20.0), 0.5);
        write_trajectory_csv(&mut buf, &[(0, u)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "time_s,px,py,pz,heading_rad\n0,1,2,20,0.5\n");
    }
}
