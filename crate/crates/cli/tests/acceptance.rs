//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 4 to 6 and 8 drive the `tagtrack` binary on shipped presets;
//! the rest call the library directly. Set `ACCEPTANCE_STRICT=1` to turn
//! any FAIL into a nonzero exit status.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use tagtrack::filter::{weighted_moments, TargetParticleSet};
use tagtrack::planner::renyi_estimate;
use tagtrack::rf::{expected_rssi, fit_propagation_params, likelihood, sample_measurement, synthesize_samples};
use tagtrack::rng::stream;
use tagtrack::{AntennaPattern, Area, MeasurementModel, ModelKind, Position3, PropagationParams, UavState};

use rand::Rng;

// Adaptive-quadrature reference values for a N(0,1) prior and a unit
// Gaussian likelihood observed at z = 1.
const RENYI_QUAD: [(f64, f64); 3] = [
    (0.1, 0.023169796774866303),
    (0.5, 0.14222485116152503),
    (0.9999, 0.40335141638511973),
];
const KL_QUAD: f64 = 0.4034264097200274;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn estimator_vs_grid() -> Verdict {
    let start = Instant::now();
    let area = Area::new(0.0, 500.0, 0.0, 500.0);
    let model = MeasurementModel::new(PropagationParams::sim_default(), AntennaPattern::default());
    let truth = Position3::new(230.0, 210.0, 0.0);
    let mut rng = stream(99, &[]);
    let poses = [
        (60.0, 40.0, 0.3),
        (200.0, 120.0, 1.2),
        (320.0, 90.0, 2.5),
        (380.0, 260.0, -2.0),
        (300.0, 380.0, 0.7),
        (150.0, 330.0, -1.0),
    ];
    let data: Vec<(UavState, f64)> = poses
        .iter()
        .map(|&(x, y, h)| {
            let uav = UavState::new(Position3::new(x, y, 20.0), h);
            (uav, sample_measurement(&model.params, &model.pattern, &truth, &uav, &mut rng).unwrap())
        })
        .collect();

    let n = 200;
    let (dx, dy) = (area.width() / n as f64, area.height() / n as f64);
    let mut cells = Vec::with_capacity(n * n);
    let mut logw = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let p = Position3::new((i as f64 + 0.5) * dx, (j as f64 + 0.5) * dy, 0.0);
            let lw: f64 = data
                .iter()
                .map(|(u, z)| likelihood(*z, &model.params, &model.pattern, &p, u).unwrap().ln())
                .sum();
            cells.push(p);
            logw.push(lw);
        }
    }
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let (gm, gc) = weighted_moments(&cells, &w);

    let mut rng = stream(7, &[]);
    let mut ps = TargetParticleSet::init(0, &area, 100_000, 0.0, &mut rng).unwrap();
    for (uav, z) in &data {
        ps.update(*z, uav, &model);
        if ps.effective_sample_size() < 0.5 * ps.len() as f64 {
            ps.resample_and_inject(&mut rng, 0.0, &area);
        }
    }
    let e = ps.estimate();
    let err = ((e.x - gm.x).powi(2) + (e.y - gm.y).powi(2)).sqrt();
    let rel = ps.cov_det() / gc.det() - 1.0;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        err <= 2.0 && rel.abs() <= 0.10 && secs < 60.0,
        format!("mean offset {err:.2} m (<= 2), det {:+.1}% (|.| <= 10%), {secs:.1} s", 100.0 * rel),
    )
}

fn renyi_vs_quadrature() -> Verdict {
    let n = 100_000;
    let xs: Vec<f64> = (0..n).map(|i| -8.0 + 16.0 * (i as f64 + 0.5) / n as f64).collect();
    let mut w: Vec<f64> = xs.iter().map(|x| (-0.5 * x * x).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    let ll: Vec<f64> = xs
        .iter()
        .map(|x| -0.5 * (1.0 - x) * (1.0 - x) - 0.5 * std::f64::consts::TAU.ln())
        .collect();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    let mut near_one = 0.0;
    for (alpha, want) in RENYI_QUAD {
        let got = renyi_estimate(&w, &ll, alpha).unwrap();
        worst = worst.max((got - want).abs());
        parts.push(format!("a={alpha}: {:.1e}", (got - want).abs()));
        if alpha == 0.9999 {
            near_one = got;
        }
    }
    let lse = w.iter().zip(&ll).map(|(w, l)| w * l.exp()).sum::<f64>().ln();
    let kl = lse - w.iter().zip(&ll).map(|(w, l)| w * l).sum::<f64>();
    let kl_gap = (near_one - kl).abs();
    verdict(
        worst <= 1e-3 && kl_gap <= 1e-3 && (kl - KL_QUAD).abs() <= 1e-3,
        format!("{}; a=0.9999 vs particle KL {kl_gap:.1e} (<= 1e-3)", parts.join(", ")),
    )
}

fn model_identities() -> Verdict {
    let mut rng = stream(3, &[]);
    let log = PropagationParams::sim_default();
    let multi = PropagationParams {
        kind: ModelKind::MultiPath,
        eps_ground: 1.0,
        ..log.clone()
    };
    let pattern = AntennaPattern::default();
    let mut worst_eq: f64 = 0.0;
    let mut worst_step: f64 = 0.0;
    let want_step = 10.0 * log.n_exp * 2f64.log10();
    for _ in 0..5000 {
        let t = Position3::new(rng.random_range(0.0..500.0), rng.random_range(0.0..500.0), rng.random_range(0.0..5.0));
        let u = UavState::new(
            Position3::new(rng.random_range(0.0..500.0), rng.random_range(0.0..500.0), rng.random_range(5.0..60.0)),
            rng.random_range(-3.14..3.14),
        );
        let a = expected_rssi(&log, &pattern, &t, &u).unwrap();
        let b = expected_rssi(&multi, &pattern, &t, &u).unwrap();
        worst_eq = worst_eq.max((a - b).abs());
        // Double the separation along the same line of sight.
        let far = Position3::new(2.0 * t.x - u.position.x, 2.0 * t.y - u.position.y, 2.0 * t.z - u.position.z);
        let c = expected_rssi(&log, &pattern, &far, &u).unwrap();
        if c > log.floor_dbm {
            worst_step = worst_step.max((a - c - want_step).abs());
        }
    }
    verdict(
        worst_eq <= 1e-9 && worst_step <= 1e-9,
        format!("max |MultiPath - LogPath| at eps_g=1: {worst_eq:.1e} dB; max doubling error vs {want_step:.4} dB: {worst_step:.1e}"),
    )
}

struct Row {
    label: String,
    rms: f64,
    flight: f64,
}

fn summary_rows(path: &Path) -> Vec<Row> {
    let text = fs::read_to_string(path).expect("summary.csv");
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                label: f[0].to_string(),
                rms: f[2].parse().unwrap(),
                flight: f[4].parse().unwrap(),
            }
        })
        .collect()
}

fn tagtrack(args: &[&str], cwd: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tagtrack"))
        .args(args)
        .current_dir(cwd)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).trim().to_string())
    }
}

fn study_scenario(dir: &Path) -> Verdict {
    let args = [
        "mc", "--config", "sim-5.1", "--set", "planner.alpha=0.1", "--set", "planner.n_action_subset=4", "--set",
        "planner.n_horizon=1", "--set", "planner.t_plan=5", "--runs", "20", "--out", "c4",
    ];
    if let Err(e) = tagtrack(&args, dir) {
        return verdict(false, e);
    }
    let r = &summary_rows(&dir.join("c4/summary.csv"))[0];
    verdict(
        (8.0..=20.0).contains(&r.rms) && (450.0..=1000.0).contains(&r.flight),
        format!("mean D_rms {:.2} m (8..20), mean flight {:.1} s (450..1000)", r.rms, r.flight),
    )
}

fn planner_ordering(dir: &Path) -> Verdict {
    let args = [
        "sweep", "--config", "table-4", "--parameter", "policy-horizon", "--values", "uniform,renyi:1:5", "--runs", "30",
        "--out", "c5",
    ];
    if let Err(e) = tagtrack(&args, dir) {
        return verdict(false, e);
    }
    let rows = summary_rows(&dir.join("c5/summary.csv"));
    let (u, r) = (&rows[0], &rows[1]);
    let drms = 1.0 - r.rms / u.rms;
    let dflight = 1.0 - r.flight / u.flight;
    verdict(
        drms >= 0.20 && dflight >= 0.15,
        format!(
            "D_rms {} {:.2} vs {} {:.2} m ({:.1}% lower, need 20%); flight {:.0} vs {:.0} s ({:.1}% lower, need 15%)",
            r.label,
            r.rms,
            u.label,
            u.rms,
            100.0 * drms,
            r.flight,
            u.flight,
            100.0 * dflight
        ),
    )
}

fn target_scaling(dir: &Path) -> Verdict {
    let args = [
        "sweep", "--config", "fig-7", "--parameter", "n_targets", "--values", "1,4,7,10", "--runs", "20", "--out", "c6",
    ];
    if let Err(e) = tagtrack(&args, dir) {
        return verdict(false, e);
    }
    let rows = summary_rows(&dir.join("c6/summary.csv"));
    let flights: Vec<f64> = rows.iter().map(|r| r.flight).collect();
    let rms: Vec<f64> = rows.iter().map(|r| r.rms).collect();
    let increasing = flights.windows(2).all(|w| w[1] > w[0]);
    let avg = rms.iter().sum::<f64>() / rms.len() as f64;
    let spread = rms.iter().map(|r| (r / avg - 1.0).abs()).fold(0.0, f64::max);
    verdict(
        increasing && spread < 0.25,
        format!(
            "flight {:?} s (strictly increasing), D_rms {:?} m (max {:.1}% from mean, need < 25%)",
            flights.iter().map(|f| f.round()).collect::<Vec<_>>(),
            rms.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>(),
            100.0 * spread
        ),
    )
}

fn fit_recovery() -> Verdict {
    let distances: Vec<f64> = (1..=32).map(|i| 10.0 * i as f64).collect();
    let mut worst_p: f64 = 0.0;
    let mut worst_s: f64 = 0.0;
    for truth in [PropagationParams::field_logpath(), PropagationParams::field_multipath()] {
        for seed in 0..10 {
            let mut rng = stream(seed, &[truth.kind as u64, 7]);
            let data = synthesize_samples(&truth, &distances, 30, (5.0, 5.0), &mut rng).unwrap();
            let fit = fit_propagation_params(&data, truth.kind, 2.0, &truth).unwrap();
            worst_p = worst_p.max((fit.p_ref - truth.p_ref).abs());
            worst_s = worst_s.max((fit.sigma_p / truth.sigma_p - 1.0).abs());
        }
    }
    verdict(
        worst_p <= 0.5 && worst_s <= 0.15,
        format!(
            "worst of 20 surveys: p_ref off {worst_p:.3} dBm (<= 0.5), sigma_P off {:.1}% (<= 15%)",
            100.0 * worst_s
        ),
    )
}

fn determinism(dir: &Path) -> Verdict {
    let mut outputs = Vec::new();
    for (i, jobs) in ["1", "1", "4"].iter().enumerate() {
        let out = format!("c8_{i}");
        let args = ["sweep", "--config", "table-1", "--runs", "2", "--jobs", jobs, "--out", &out];
        if let Err(e) = tagtrack(&args, dir) {
            return verdict(false, e);
        }
        outputs.push(fs::read(dir.join(&out).join("summary.csv")).unwrap());
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    verdict(
        same,
        format!("summary.csv from --jobs 1, 1, 4: {} ({} bytes)", if same { "identical" } else { "differ" }, outputs[0].len()),
    )
}

fn main() {
    // `cargo test -- --list` and filters should not trigger the full suite.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if let Some(filter) = args.iter().find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) {
            return;
        }
    }
    let tmp = tempfile::tempdir().expect("temp dir");
    let dir = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("particle filter matches grid Bayes filter", Box::new(estimator_vs_grid)),
        ("Renyi estimator matches quadrature", Box::new(renyi_vs_quadrature)),
        ("propagation model identities", Box::new(model_identities)),
        ("study scenario reproduction", Box::new(|| study_scenario(dir))),
        ("Renyi beats the uniform sweep", Box::new(|| planner_ordering(dir))),
        ("target-count scaling", Box::new(|| target_scaling(dir))),
        ("fit recovery", Box::new(fit_recovery)),
        ("determinism across --jobs", Box::new(|| determinism(dir))),
    ];
    let mut passed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        passed += v.pass as usize;
        println!(
            "[{}] criterion {}: {name}: {} [{:.0} s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed < criteria.len() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
