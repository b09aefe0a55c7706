//! `tagtrack` command-line front end.

mod presets;

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tagtrack::config::{load_config, Format, SweepValue};
use tagtrack::exec::with_jobs;
use tagtrack::rf::{
    fit_propagation_params, model_curve, read_samples_csv, synthesize_samples, write_samples_csv, FitResult,
    ModelKind,
};
use tagtrack::rng::stream;
use tagtrack::sim::{
    monte_carlo_with, run_scenario, sweep, write_summary_csv, write_timing_csv, write_trajectory_csv,
    EstimateHistory, McSummary, Observers, ParticleSnapshots, PlannerTrace, RunObserver, RunResult, SimSetup,
};
use tagtrack::{Exec, SimConfig};

#[derive(Parser)]
#[command(name = "tagtrack", version, about = "UAV radio-tag search simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Configuration file (TOML or JSON) or preset name.
    #[arg(short, long, default_value = "sim-5.1")]
    config: String,
    /// Override a configuration value, e.g. `planner.alpha=0.1`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Seed override (the run seed for `run`, the base seed otherwise).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one search.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(short, long)]
        out: PathBuf,
        /// Write every unlocalized particle cloud every SECONDS cycles.
        #[arg(long, value_name = "SECONDS", num_args = 0..=1, default_missing_value = "60")]
        particles_snapshots: Option<u32>,
        /// Write one JSON line per planning event.
        #[arg(long)]
        planner_trace: bool,
    },
    /// Monte Carlo over seeded runs of one configuration.
    Mc {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// One Monte Carlo per value of a swept parameter.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        runs: Option<usize>,
        /// alpha, n_actions, n_targets or policy-horizon; defaults to the
        /// config's sweep section.
        #[arg(long)]
        parameter: Option<String>,
        #[arg(long, value_delimiter = ',')]
        values: Vec<String>,
    },
    /// Fit reference power and noise to range/RSSI data.
    Fit {
        /// CSV with `dist_m,rssi_dbm[,target_z_m,uav_z_m]`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        model: FitModel,
        /// Fixed path-loss exponent.
        #[arg(long, default_value_t = 2.0)]
        n_exp: f64,
        /// Supplies wavelength and ground permittivity.
        #[arg(short, long, default_value = "field-multipath")]
        config: String,
        /// `target_z,uav_z` in metres for rows without heights.
        #[arg(long, default_value = "5,5")]
        heights: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Antenna gain at 1° steps as `azimuth_deg,gain_db`.
    EmitPattern {
        #[arg(short, long, default_value = "sim-5.1")]
        config: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Synthetic range/RSSI survey from the configured radio model.
    GenRange {
        #[arg(short, long, default_value = "field-multipath")]
        config: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// `start:stop:step` in metres, inclusive.
        #[arg(long, default_value = "10:320:10")]
        distances: String,
        #[arg(long, default_value_t = 30)]
        per_distance: usize,
        /// `target_z,uav_z` in metres.
        #[arg(long, default_value = "5,5")]
        heights: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FitModel {
    Logpath,
    Multipath,
    Both,
}

struct Loaded {
    cfg: SimConfig,
    base_dir: PathBuf,
}

fn load(spec: &str, overrides: &[String]) -> Result<Loaded> {
    let path = Path::new(spec);
    let (text, format, base_dir, origin) = if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        (text, Format::from_path(path), dir, path.display().to_string())
    } else if let Some(text) = presets::lookup(spec) {
        (text.to_string(), Format::Toml, PathBuf::from("."), format!("preset {spec}"))
    } else {
        bail!(
            "config `{spec}` is neither a file nor a preset (presets: {})",
            presets::names().join(", ")
        );
    };
    let cfg = load_config(&text, format, overrides).with_context(|| format!("in {origin}"))?;
    Ok(Loaded { cfg, base_dir })
}

fn exec_for(jobs: usize) -> Exec {
    if jobs == 1 {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

/// Files written under temporary names and renamed into place only when
/// every artifact is complete.
struct Staging {
    files: Vec<(PathBuf, PathBuf)>,
    committed: bool,
}

impl Staging {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            committed: false,
        }
    }

    fn create(&mut self, dir: &Path, name: &str) -> Result<BufWriter<File>> {
        let fin = dir.join(name);
        let tmp = dir.join(format!(".{name}.partial"));
        let f = File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        self.files.push((tmp, fin));
        Ok(BufWriter::new(f))
    }

    fn commit(mut self) -> Result<()> {
        for (tmp, fin) in &self.files {
            fs::rename(tmp, fin).with_context(|| format!("writing {}", fin.display()))?;
        }
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            for (tmp, _) in &self.files {
                let _ = fs::remove_file(tmp);
            }
        }
    }
}

fn json_line(w: &mut impl Write, label: &str, index: usize, r: &RunResult) -> Result<()> {
    let mut v = serde_json::to_value(r)?;
    if let Some(m) = v.as_object_mut() {
        m.insert("configuration".into(), label.into());
        m.insert("run".into(), index.into());
    }
    serde_json::to_writer(&mut *w, &v)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn cmd_run(args: ConfigArgs, out: PathBuf, snapshots: Option<u32>, trace: bool) -> Result<()> {
    let mut loaded = load(&args.config, &args.set)?;
    if let Some(s) = args.seed {
        loaded.cfg.scenario.seed = s;
    }
    let setup = SimSetup::from_config(&loaded.cfg, &loaded.base_dir)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut staging = Staging::new();
    let mut history = EstimateHistory::new(Box::new(staging.create(&out, "estimates.csv")?))?;
    let mut snap = match snapshots {
        Some(every) => Some(ParticleSnapshots::new(Box::new(staging.create(&out, "particles.csv")?), every)?),
        None => None,
    };
    let mut tracer = if trace {
        Some(PlannerTrace::new(Box::new(staging.create(&out, "planner_trace.jsonl")?)))
    } else {
        None
    };
    let exec = exec_for(args.jobs);
    let result = {
        let mut list: Vec<&mut dyn RunObserver> = vec![&mut history];
        if let Some(s) = snap.as_mut() {
            list.push(s);
        }
        if let Some(t) = tracer.as_mut() {
            list.push(t);
        }
        let mut obs = Observers(list);
        with_jobs(args.jobs, || run_scenario(&setup, loaded.cfg.scenario.seed, exec, &mut obs))?
    };
    history.finish()?;
    if let Some(s) = snap {
        s.finish()?;
    }
    if let Some(t) = tracer {
        t.finish()?;
    }
    let mut w = staging.create(&out, "result.json")?;
    serde_json::to_writer_pretty(&mut w, &result)?;
    w.write_all(b"\n")?;
    w.flush()?;
    let mut w = staging.create(&out, "trajectory.csv")?;
    write_trajectory_csv(&mut w, &result.trajectory)?;
    w.flush()?;
    drop(w);
    staging.commit()?;
    println!(
        "localized {}/{} in {} s, D_rms {:.2} m, travel {:.0} m",
        result.localized_count,
        result.per_target_rms.len(),
        result.flight_time,
        result.mean_rms,
        result.travel_distance
    );
    Ok(())
}

fn write_tables(out: &Path, rows: &[McSummary]) -> Result<()> {
    let mut staging = Staging::new();
    let mut w = staging.create(out, "summary.csv")?;
    write_summary_csv(&mut w, rows)?;
    w.flush()?;
    drop(w);
    let mut w = staging.create(out, "timing.csv")?;
    write_timing_csv(&mut w, rows)?;
    w.flush()?;
    drop(w);
    staging.commit()
}

fn open_runs_log(out: &Path) -> Result<File> {
    let path = out.join("runs.jsonl");
    OpenOptions::new()
        .create(true)
        .write(true)
        .truncate(true)
        .open(&path)
        .with_context(|| format!("creating {}", path.display()))
}

fn cmd_mc(args: ConfigArgs, out: PathBuf, runs: Option<usize>) -> Result<()> {
    let mut loaded = load(&args.config, &args.set)?;
    if let Some(s) = args.seed {
        loaded.cfg.experiment.base_seed = s;
    }
    let runs = runs.unwrap_or(loaded.cfg.experiment.runs);
    if runs == 0 {
        bail!("--runs must be at least 1");
    }
    let setup = SimSetup::from_config(&loaded.cfg, &loaded.base_dir)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut log = open_runs_log(&out)?;
    let exec = exec_for(args.jobs);
    let base_seed = loaded.cfg.experiment.base_seed;
    let label = args.config.clone();
    let results = with_jobs(args.jobs, || {
        monte_carlo_with(&setup, runs, base_seed, exec, exec.threads(), |i, r| {
            json_line(&mut log, &label, i, r).map_err(|e| tagtrack::Error::Parse(e.to_string()))
        })
    })?;
    let summary = McSummary::from_results(label, &results)?;
    write_tables(&out, std::slice::from_ref(&summary))?;
    println!(
        "{} runs: D_rms {:.2} ± {:.2} m, flight {:.0} ± {:.0} s, travel {:.2} km",
        summary.runs,
        summary.rms.mean,
        summary.rms.std,
        summary.flight_time.mean,
        summary.flight_time.std,
        summary.travel_distance_km.mean
    );
    Ok(())
}

fn parse_sweep_value(s: &str) -> SweepValue {
    if let Ok(i) = s.parse::<i64>() {
        SweepValue::Int(i)
    } else if let Ok(f) = s.parse::<f64>() {
        SweepValue::Float(f)
    } else {
        SweepValue::Text(s.to_string())
    }
}

fn cmd_sweep(
    args: ConfigArgs,
    out: PathBuf,
    runs: Option<usize>,
    parameter: Option<String>,
    values: Vec<String>,
) -> Result<()> {
    let mut loaded = load(&args.config, &args.set)?;
    if let Some(s) = args.seed {
        loaded.cfg.experiment.base_seed = s;
    }
    let (parameter, values) = match (parameter, loaded.cfg.experiment.sweep.clone()) {
        (Some(p), _) => {
            if values.is_empty() {
                bail!("--parameter needs --values");
            }
            (p, values.iter().map(|v| parse_sweep_value(v)).collect::<Vec<_>>())
        }
        (None, Some(s)) => (s.parameter, s.values),
        (None, None) => bail!("no sweep: give --parameter and --values or an [experiment.sweep] section"),
    };
    let runs = runs.unwrap_or(loaded.cfg.experiment.runs);
    if runs == 0 {
        bail!("--runs must be at least 1");
    }
    // Validate every row's configuration before any run starts.
    for v in &values {
        let mut c = loaded.cfg.clone();
        tagtrack::sim::apply_sweep_value(&mut c, &parameter, v)?;
        c.validate()?;
    }
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut log = open_runs_log(&out)?;
    let exec = exec_for(args.jobs);
    let rows = with_jobs(args.jobs, || sweep(&loaded.cfg, &parameter, &values, runs, &loaded.base_dir, exec))?;
    let mut summaries = Vec::with_capacity(rows.len());
    for (s, results) in rows {
        for (i, r) in results.iter().enumerate() {
            json_line(&mut log, &s.label, i, r)?;
        }
        println!(
            "{:<16} D_rms {:6.2} m  flight {:5.0} s  travel {:.2} km",
            s.label, s.rms.mean, s.flight_time.mean, s.travel_distance_km.mean
        );
        summaries.push(s);
    }
    write_tables(&out, &summaries)
}

fn parse_heights(spec: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = spec.split(',').collect();
    if let [a, b] = parts[..] {
        if let (Ok(t), Ok(u)) = (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            if t.is_finite() && u.is_finite() {
                return Ok((t, u));
            }
        }
    }
    bail!("heights `{spec}` must be target_z,uav_z")
}

fn cmd_fit(data: PathBuf, model: FitModel, n_exp: f64, config: String, heights: String, out: PathBuf) -> Result<()> {
    let heights = parse_heights(&heights)?;
    let loaded = load(&config, &[])?;
    let base = &loaded.cfg.propagation;
    let file = File::open(&data).with_context(|| format!("opening {}", data.display()))?;
    let mut samples = read_samples_csv(file).with_context(|| format!("reading {}", data.display()))?;
    for s in samples.iter_mut() {
        s.geometry.get_or_insert(heights);
    }
    let kinds: &[ModelKind] = match model {
        FitModel::Logpath => &[ModelKind::LogPath],
        FitModel::Multipath => &[ModelKind::MultiPath],
        FitModel::Both => &[ModelKind::LogPath, ModelKind::MultiPath],
    };
    let fits = kinds
        .iter()
        .map(|&k| fit_propagation_params(&samples, k, n_exp, base))
        .collect::<tagtrack::Result<Vec<FitResult>>>()?;

    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut staging = Staging::new();
    let summary: Vec<serde_json::Value> = fits
        .iter()
        .map(|f| {
            serde_json::json!({
                "kind": f.kind,
                "p_ref": f.p_ref,
                "sigma_p": f.sigma_p,
                "n_exp": f.n_exp,
                "samples": f.residuals.len(),
            })
        })
        .collect();
    let mut w = staging.create(&out, "fit.json")?;
    serde_json::to_writer_pretty(&mut w, &summary)?;
    w.write_all(b"\n")?;
    w.flush()?;
    drop(w);

    let mut w = staging.create(&out, "residuals.csv")?;
    writeln!(w, "model,dist_m,rssi_dbm,residual_db")?;
    for f in &fits {
        let name = serde_json::to_value(f.kind)?.as_str().unwrap_or_default().to_string();
        for (s, r) in samples.iter().zip(&f.residuals) {
            writeln!(w, "{name},{},{},{}", s.dist, s.rssi, r)?;
        }
    }
    w.flush()?;
    drop(w);

    let mut w = staging.create(&out, "curve.csv")?;
    writeln!(w, "model,dist_m,rssi_dbm")?;
    let lo = samples.iter().map(|s| s.dist).fold(f64::INFINITY, f64::min);
    let hi = samples.iter().map(|s| s.dist).fold(0.0, f64::max);
    for f in &fits {
        let params = f.apply(base);
        let name = serde_json::to_value(f.kind)?.as_str().unwrap_or_default().to_string();
        for i in 0..=200 {
            let d = lo + (hi - lo) * i as f64 / 200.0;
            let h = model_curve(&params, d, Some(heights))?;
            writeln!(w, "{name},{d},{h}")?;
        }
    }
    w.flush()?;
    drop(w);
    staging.commit()?;
    for f in &fits {
        println!("{:?}: p_ref {:.2} dBm, sigma_p {:.2} dB", f.kind, f.p_ref, f.sigma_p);
    }
    Ok(())
}

fn cmd_emit_pattern(config: String, set: Vec<String>, out: PathBuf) -> Result<()> {
    let loaded = load(&config, &set)?;
    let pattern = loaded.cfg.antenna.build(Some(&loaded.base_dir))?;
    let mut staging = Staging::new();
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = out
        .file_name()
        .and_then(|n| n.to_str())
        .context("--out must name a file")?;
    let mut w = staging.create(dir, name)?;
    writeln!(w, "azimuth_deg,gain_db")?;
    for deg in 0..360 {
        let g = pattern.gain((deg as f64).to_radians());
        writeln!(w, "{deg},{g}")?;
    }
    w.flush()?;
    drop(w);
    staging.commit()
}

fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("distances `{spec}` must be start:stop:step"))?;
    let [start, stop, step] = parts[..] else {
        bail!("distances `{spec}` must be start:stop:step");
    };
    if !(start > 0.0 && stop >= start && step > 0.0) {
        bail!("distances `{spec}` need 0 < start <= stop and step > 0");
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + step * i as f64).collect())
}

fn cmd_gen_range(
    config: String,
    set: Vec<String>,
    distances: String,
    per_distance: usize,
    heights: String,
    seed: u64,
    out: PathBuf,
) -> Result<()> {
    let heights = parse_heights(&heights)?;
    let loaded = load(&config, &set)?;
    let d = parse_range(&distances)?;
    let mut rng = stream(seed, &[]);
    let samples = synthesize_samples(&loaded.cfg.propagation, &d, per_distance, heights, &mut rng)?;
    let mut staging = Staging::new();
    let dir = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = out.file_name().and_then(|n| n.to_str()).context("--out must name a file")?;
    let mut w = staging.create(dir, name)?;
    write_samples_csv(&mut w, &samples)?;
    w.flush()?;
    drop(w);
    staging.commit()
}

fn main() {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run {
            cfg,
            out,
            particles_snapshots,
            planner_trace,
        } => cmd_run(cfg, out, particles_snapshots, planner_trace),
        Command::Mc { cfg, out, runs } => cmd_mc(cfg, out, runs),
        Command::Sweep {
            cfg,
            out,
            runs,
            parameter,
            values,
        } => cmd_sweep(cfg, out, runs, parameter, values),
        Command::Fit {
            data,
            model,
            n_exp,
            config,
            heights,
            out,
        } => cmd_fit(data, model, n_exp, config, heights, out),
        Command::EmitPattern { config, set, out } => cmd_emit_pattern(config, set, out),
        Command::GenRange {
            config,
            set,
            distances,
            per_distance,
            heights,
            seed,
            out,
        } => cmd_gen_range(config, set, distances, per_distance, heights, seed, out),
    };
    if let Err(e) = res {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
