//! Configuration schema for scenarios, the planner and experiments.
//!
//! One document holds every section; each section and field has a default,
//! so an empty document describes the ten-target 500 m × 500 m study with the
//! recommended planner settings. TOML is the primary format and JSON with
//! the same structure is accepted. Overrides use dotted paths
//! (`planner.alpha=0.5`) and are applied to the parsed tree before typing.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Area, Position3, UavState};
use crate::rf::{AntennaConfig, PropagationParams};

/// Random-walk target motion with `Q = σ_Q²·diag(1, 1, 0)` per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionModel {
    /// m/s
    pub sigma_q: f64,
}

impl Default for MotionModel {
    fn default() -> Self {
        Self { sigma_q: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Renyi,
    Shannon,
    Closest,
    Uniform,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Renyi => "renyi",
            Policy::Shannon => "shannon",
            Policy::Closest => "closest",
            Policy::Uniform => "uniform",
        }
    }
}

/// Which target's predicted mean steers action pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneFocus {
    /// Unlocalized target whose estimate is closest to the UAV.
    Nearest,
    /// Unlocalized target with the largest predicted covariance determinant.
    MostUncertain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Rényi order; must not be 1.
    pub alpha: f64,
    /// Discount factor in (0, 1].
    pub gamma: f64,
    /// Number of look-ahead steps.
    pub n_horizon: u32,
    /// Look-ahead step length, seconds.
    pub t_plan: u32,
    /// Observation cycles between planning events.
    pub n_plan_cycles: u32,
    /// Simulated future measurements per look-ahead step and target.
    pub m_samples: usize,
    /// Actions kept after gain-based pruning.
    pub n_action_subset: usize,
    /// Maximum heading change per one-second cycle, rad.
    pub theta_max: f64,
    /// Forward speed, m/s.
    pub v_uav: f64,
    /// Size of the discrete heading set.
    pub heading_count: usize,
    pub policy: Policy,
    pub prune_focus: PruneFocus,
    /// Track spacing of the lawnmower sweep used by the uniform policy, m.
    pub sweep_spacing: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            gamma: 1.0,
            n_horizon: 1,
            t_plan: 5,
            n_plan_cycles: 5,
            m_samples: 50,
            n_action_subset: 4,
            theta_max: PI / 6.0,
            v_uav: 5.0,
            heading_count: 8,
            policy: Policy::Renyi,
            prune_focus: PruneFocus::Nearest,
            sweep_spacing: 50.0,
        }
    }
}

impl PlannerConfig {
    /// Look-ahead horizon H = N_H·t_p in seconds.
    pub fn horizon(&self) -> u32 {
        self.n_horizon * self.t_plan
    }

    pub fn validate(&self) -> Result<()> {
        let chk = |ok: bool, key: &str, reason: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::config(format!("planner.{key}"), reason))
            }
        };
        chk(
            self.alpha >= 0.0 && self.alpha.is_finite() && self.alpha != 1.0,
            "alpha",
            "must be >= 0 and != 1",
        )?;
        chk(
            self.gamma > 0.0 && self.gamma <= 1.0,
            "gamma",
            "must lie in (0, 1]",
        )?;
        chk(self.n_horizon >= 1, "n_horizon", "must be >= 1")?;
        chk(self.t_plan >= 1, "t_plan", "must be >= 1 s")?;
        chk(self.n_plan_cycles >= 1, "n_plan_cycles", "must be >= 1")?;
        chk(self.m_samples >= 1, "m_samples", "must be >= 1")?;
        chk(self.n_action_subset >= 1, "n_action_subset", "must be >= 1")?;
        chk(self.heading_count >= 2, "heading_count", "must be >= 2")?;
        chk(
            self.theta_max > 0.0 && self.theta_max.is_finite(),
            "theta_max",
            "must be > 0",
        )?;
        chk(
            self.v_uav >= 0.0 && self.v_uav.is_finite(),
            "v_uav",
            "must be >= 0",
        )?;
        chk(self.sweep_spacing > 0.0, "sweep_spacing", "must be > 0")?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavStart {
    pub x: f64,
    pub y: f64,
    /// rad
    pub heading: f64,
}

impl Default for UavStart {
    fn default() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area: Area,
    pub n_targets: usize,
    /// Horizontal start pose; the start altitude is `uav_altitude`.
    pub uav_start: UavStart,
    pub target_z: f64,
    pub uav_altitude: f64,
    /// Seconds of simulated flight before giving up.
    pub max_time: u32,
    pub sensitivity_dbm: f64,
    pub n_particles: usize,
    /// Localization bound on the 2-D position covariance determinant, m⁴.
    pub n_threshold: f64,
    pub seed: u64,
    /// Fixed `[x, y]` start positions, one per target; random when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_positions: Option<Vec<[f64; 2]>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area: Area::new(0.0, 500.0, 0.0, 500.0),
            n_targets: 10,
            uav_start: UavStart::default(),
            target_z: 0.0,
            uav_altitude: 20.0,
            max_time: 1800,
            sensitivity_dbm: -90.0,
            n_particles: 10_000,
            n_threshold: 10_000.0,
            seed: 1,
            target_positions: None,
        }
    }
}

impl ScenarioConfig {
    pub fn uav_start_state(&self) -> UavState {
        UavState::new(
            Position3::new(self.uav_start.x, self.uav_start.y, self.uav_altitude),
            self.uav_start.heading,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.area.is_degenerate() {
            return Err(Error::config("scenario.area", "must have positive width and height"));
        }
        if self.n_targets == 0 {
            return Err(Error::config("scenario.n_targets", "must be >= 1"));
        }
        if self.n_particles < 100 {
            return Err(Error::config("scenario.n_particles", "must be >= 100"));
        }
        if !(self.n_threshold > 0.0) {
            return Err(Error::config("scenario.n_threshold", "must be > 0"));
        }
        if !self.target_z.is_finite() || !self.uav_altitude.is_finite() {
            return Err(Error::config("scenario.uav_altitude", "heights must be finite"));
        }
        if self.sensitivity_dbm.is_nan() {
            return Err(Error::config("scenario.sensitivity_dbm", "must be a number"));
        }
        let start = self.uav_start_state().position;
        if !self.area.contains(&start) {
            return Err(Error::config("scenario.uav_start", "must lie inside the area"));
        }
        if !self.uav_start.heading.is_finite() {
            return Err(Error::config("scenario.uav_start.heading", "must be finite"));
        }
        if let Some(list) = &self.target_positions {
            if list.len() != self.n_targets {
                return Err(Error::config(
                    "scenario.target_positions",
                    format!("has {} entries for {} targets", list.len(), self.n_targets),
                ));
            }
            if list
                .iter()
                .any(|[x, y]| !self.area.contains(&Position3::new(*x, *y, self.target_z)))
            {
                return Err(Error::config("scenario.target_positions", "every position must lie inside the area"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Fraction of particles replaced by uniform draws after resampling.
    pub inject_fraction: f64,
    /// Resample when ESS < `resample_threshold`·N_s.
    pub resample_threshold: f64,
    /// Roughening constant K for the jitter added after resampling; 0 disables.
    pub roughening: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            inject_fraction: 0.02,
            resample_threshold: 0.5,
            roughening: 0.2,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.inject_fraction) {
            return Err(Error::config("filter.inject_fraction", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.resample_threshold) {
            return Err(Error::config("filter.resample_threshold", "must lie in [0, 1]"));
        }
        if !(self.roughening >= 0.0 && self.roughening.is_finite()) {
            return Err(Error::config("filter.roughening", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl std::fmt::Display for SweepValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepValue::Int(v) => write!(f, "{v}"),
            SweepValue::Float(v) => write!(f, "{v}"),
            SweepValue::Text(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `alpha`, `n_actions`, `n_targets` or `policy-horizon`.
    pub parameter: String,
    pub values: Vec<SweepValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub base_seed: u64,
    pub sweep: Option<SweepConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            runs: 100,
            base_seed: 2017,
            sweep: None,
        }
    }
}

/// The full configuration document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scenario: ScenarioConfig,
    pub motion: MotionModel,
    pub filter: FilterConfig,
    pub planner: PlannerConfig,
    pub propagation: PropagationParams,
    pub antenna: AntennaConfig,
    pub experiment: ExperimentConfig,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        if !(self.motion.sigma_q >= 0.0 && self.motion.sigma_q.is_finite()) {
            return Err(Error::config("motion.sigma_q", "must be >= 0"));
        }
        self.filter.validate()?;
        self.planner.validate()?;
        self.propagation.validate()?;
        if self.experiment.runs == 0 {
            return Err(Error::config("experiment.runs", "must be >= 1"));
        }
        if let Some(sweep) = &self.experiment.sweep {
            if sweep.values.is_empty() {
                return Err(Error::config("experiment.sweep.values", "must not be empty"));
            }
        }
        // Building the antenna checks its own parameters (table files are
        // checked when loaded).
        if !matches!(self.antenna, AntennaConfig::Table { .. }) {
            self.antenna.build(None)?;
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let tree = parse_tree(text, Format::Toml)?;
        Self::from_tree(tree)
    }

    pub fn from_tree(tree: toml::Table) -> Result<Self> {
        let cfg: SimConfig = toml::Value::Table(tree)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Parse(e.message().to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Toml,
        }
    }
}

/// Parses a document into an untyped tree. TOML errors carry line and
/// column.
pub fn parse_tree(text: &str, format: Format) -> Result<toml::Table> {
    match format {
        Format::Toml => text
            .parse::<toml::Table>()
            .map_err(|e| Error::Parse(toml_error_with_line(text, &e))),
        Format::Json => {
            let v: toml::Value = serde_json::from_str(text).map_err(|e| {
                Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
            })?;
            match v {
                toml::Value::Table(t) => Ok(t),
                _ => Err(Error::Parse("top level must be an object".into())),
            }
        }
    }
}

fn toml_error_with_line(text: &str, e: &toml::de::Error) -> String {
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {}", e.message())
        }
        None => e.message().to_string(),
    }
}

/// Applies `key.path=value`. The value is read as a TOML literal when it
/// parses as one and as a bare string otherwise.
pub fn apply_override(tree: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override `{assignment}` is not key=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    let value = parse_literal(raw);
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Parse(format!("override key `{path}` is malformed")));
    }
    let mut table = tree;
    for k in &keys[..keys.len() - 1] {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = match entry {
            toml::Value::Table(t) => t,
            _ => {
                return Err(Error::Parse(format!(
                    "override `{path}`: `{k}` is not a table"
                )))
            }
        };
    }
    table.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

fn parse_literal(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Parses `text`, applies dotted `key=value` overrides and validates the
/// result. Errors caused by the document are tagged with its line number.
pub fn load_config(text: &str, format: Format, overrides: &[String]) -> Result<SimConfig> {
    let mut tree = parse_tree(text, format)?;
    if format == Format::Toml {
        if let Err(e) = toml::from_str::<SimConfig>(text) {
            return Err(Error::Parse(toml_error_with_line(text, &e)));
        }
    } else if let Err(e) = SimConfig::from_tree(tree.clone()) {
        return Err(locate(text, e));
    }
    for o in overrides {
        apply_override(&mut tree, o)?;
    }
    let cfg = SimConfig::from_tree(tree).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("after overrides: {m}")),
        other => other,
    })?;
    cfg.validate().map_err(|e| locate(text, e))?;
    Ok(cfg)
}

fn locate(text: &str, e: Error) -> Error {
    let line = match &e {
        Error::Config { key, .. } => locate_key(text, key),
        Error::Parse(m) => m
            .split('`')
            .nth(1)
            .and_then(|field| text.lines().position(|l| l.contains(field)).map(|i| i + 1)),
        _ => None,
    };
    match line {
        Some(line) => Error::Located {
            line,
            inner: Box::new(e),
        },
        None => e,
    }
}

/// Line (1-based) where the last component of a dotted key is assigned, if
/// it can be located in `text`.
pub fn locate_key(text: &str, dotted: &str) -> Option<usize> {
    let mut parts = dotted.split('.');
    let section = parts.next()?;
    let leaf = dotted.rsplit('.').next()?;
    let mut in_section = false;
    let mut fallback = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            let name = t.trim_matches(|c| c == '[' || c == ']').trim();
            in_section = name == section || name.starts_with(&format!("{section}."));
            if name == section && fallback.is_none() {
                fallback = Some(i + 1);
            }
            continue;
        }
        let assigns_leaf = t
            .split_once('=')
            .map(|(k, _)| k.trim() == leaf)
            .unwrap_or(false)
            || t.contains(&format!("{leaf} ="))
            || t.contains(&format!("\"{leaf}\""));
        if in_section && assigns_leaf {
            return Some(i + 1);
        }
    }
    fallback
}
