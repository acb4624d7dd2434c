//! Runners behind the `rhs` subcommands. Each writes CSV files (6 decimal
//! places, deterministic row order) into an output directory and returns a
//! summary for printing.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::channel::{generate_channel_with_rng, trial_rng, ChannelConfig};
use crate::config::ExperimentConfig;
use crate::error::{Result, RhsError};
use crate::geometry::{Direction, RhsGeometry};
use crate::holography::{
    local_maxima, multifeed_multibeam_pattern, principal_plane_grid, quantize_pin,
    radiation_pattern, Lobe,
};
use crate::optimizer::{
    baseline_superposition, optimize, OptimizationReport, SumRateModel,
};

/// Process exit code for an error: 2 validation, 3 I/O, 4 experiment failure.
pub fn exit_code(err: &RhsError) -> i32 {
    match err {
        RhsError::InvalidIndex { .. }
        | RhsError::InvalidArgument(_)
        | RhsError::DimensionMismatch(_)
        | RhsError::LobeShortfall { .. }
        | RhsError::Config(_) => 2,
        RhsError::Io { .. } | RhsError::Csv(_) => 3,
        RhsError::SingularChannel { .. } | RhsError::ExperimentFailed(_) => 4,
    }
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| RhsError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| RhsError::io(&path, e))?;
    Ok(path)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[derive(Debug, Clone)]
pub struct PatternOutcome {
    /// Local maxima, strongest first, with signed principal-plane angles.
    pub lobes: Vec<(f64, Lobe)>,
    pub files: Vec<PathBuf>,
}

/// Multibeam hologram toward `pattern.beams_deg`, optionally PIN-quantized,
/// and its principal-plane pattern over [−90°, 90°].
pub fn cmd_pattern(cfg: &ExperimentConfig, out: &Path, svg: bool) -> Result<PatternOutcome> {
    let p = &cfg.pattern;
    if p.beams_deg.is_empty() {
        return Err(RhsError::invalid("at least one beam angle is required"));
    }
    let geometry = cfg.geometry.build(p.rows, p.cols, p.feeds)?;
    let beams = p
        .beams_deg
        .iter()
        .map(|&deg| Ok((Direction::in_principal_plane(&geometry, deg)?, 1.0)))
        .collect::<Result<Vec<_>>>()?;
    let amps = multifeed_multibeam_pattern(&geometry, &beams)?;
    let weights = match p.quantize.pin_mode() {
        Some(mode) => quantize_pin(&amps, p.pin_threshold, mode)?.weights(),
        None => amps.values().to_vec(),
    };
    let grid = principal_plane_grid(&geometry, -90.0, 90.0, p.step_deg)?;
    let feeds = vec![Complex64::new(1.0, 0.0); geometry.feed_count()];
    let pattern = radiation_pattern(&geometry, &weights, &feeds, &grid)?;

    let signed: Vec<f64> = grid.iter().map(|d| d.signed_degrees(&geometry)).collect();
    let mut csv = String::from("theta_deg,gain_db\n");
    for (t, g) in signed.iter().zip(pattern.gains_db()) {
        writeln!(csv, "{},{}", f6(*t), f6(*g)).unwrap();
    }
    let mut amp_csv = String::from("element,row,col,amplitude,weight\n");
    for (e, (a, w)) in amps.values().iter().zip(&weights).enumerate() {
        let (m, n) = (e / geometry.cols(), e % geometry.cols());
        writeln!(amp_csv, "{e},{m},{n},{},{}", f6(*a), f6(*w)).unwrap();
    }
    let mut files = vec![
        write_out(out, "pattern.csv", &csv)?,
        write_out(out, "amplitudes.csv", &amp_csv)?,
    ];
    if svg {
        let points: Vec<(f64, f64)> = signed
            .iter()
            .zip(pattern.gains_db())
            .map(|(t, g)| (*t, g.max(-60.0)))
            .collect();
        let chart = line_chart(
            "Radiation pattern",
            "theta (deg)",
            "gain (dB)",
            &[Series { label: "pattern", color: "#1f77b4", points }],
        );
        files.push(write_out(out, "pattern.svg", &chart)?);
    }
    let lobes = local_maxima(&pattern)
        .into_iter()
        .map(|l| (signed[l.index], l))
        .collect();
    Ok(PatternOutcome { lobes, files })
}

/// One optimized trial and its superposition baseline.
#[derive(Debug)]
pub struct TrialRun {
    pub trial: u64,
    /// Effective stream seed, `seed ^ trial`.
    pub seed: u64,
    pub result: Result<(OptimizationReport, OptimizationReport)>,
}

fn run_trial(cfg: &ExperimentConfig, geometry: &RhsGeometry, channel: &ChannelConfig, trial: u64) -> TrialRun {
    let result = (|| {
        let budget = cfg.budget()?;
        let h = generate_channel_with_rng(geometry, channel, &mut trial_rng(channel.seed, trial))?;
        let report = optimize(&h, geometry, budget, &cfg.optimizer)?;
        let baseline = baseline_superposition(&h, geometry, budget, cfg.optimizer.allocation)?;
        Ok((report, baseline))
    })();
    TrialRun {
        trial,
        seed: channel.seed ^ trial,
        result,
    }
}

fn status(err: &RhsError) -> &'static str {
    match err {
        RhsError::SingularChannel { .. } => "singular_channel",
        _ => "error",
    }
}

#[derive(Debug)]
pub struct OptimizeOutcome {
    pub runs: Vec<TrialRun>,
    pub files: Vec<PathBuf>,
}

impl OptimizeOutcome {
    pub fn successes(&self) -> impl Iterator<Item = (&TrialRun, &OptimizationReport, &OptimizationReport)> {
        self.runs
            .iter()
            .filter_map(|r| r.result.as_ref().ok().map(|(a, b)| (r, a, b)))
    }
}

/// `experiment.trials` optimizer runs on the `geometry` surface. Failed
/// trials are recorded and skipped; the command fails only if all do.
pub fn cmd_optimize(cfg: &ExperimentConfig, out: &Path, svg: bool) -> Result<OptimizeOutcome> {
    let geometry = cfg.geometry.surface()?;
    let runs: Vec<TrialRun> = (0..cfg.experiment.trials)
        .map(|t| run_trial(cfg, &geometry, &cfg.channel, t))
        .collect();

    let mut conv = String::from("trial,iter,sum_rate\n");
    let mut summary =
        String::from("trial,seed,status,final_rate,baseline_rate,iterations,converged\n");
    let mut series = Vec::new();
    for run in &runs {
        match &run.result {
            Ok((rep, base)) => {
                for (i, r) in rep.rate_trajectory.iter().enumerate() {
                    writeln!(conv, "{},{i},{}", run.trial, f6(*r)).unwrap();
                }
                writeln!(
                    summary,
                    "{},{},ok,{},{},{},{}",
                    run.trial,
                    run.seed,
                    f6(rep.final_rate()),
                    f6(base.final_rate()),
                    rep.iterations_used,
                    rep.converged
                )
                .unwrap();
                series.push(rep.rate_trajectory.clone());
            }
            Err(e) => {
                writeln!(summary, "{},{},{},,,,", run.trial, run.seed, status(e)).unwrap();
            }
        }
    }
    let mut files = vec![
        write_out(out, "convergence.csv", &conv)?,
        write_out(out, "summary.csv", &summary)?,
    ];
    if svg && !series.is_empty() {
        let lines: Vec<Series> = series
            .into_iter()
            .enumerate()
            .map(|(i, traj)| Series {
                label: if i == 0 { "trials" } else { "" },
                color: "#1f77b4",
                points: traj.iter().enumerate().map(|(k, r)| (k as f64, *r)).collect(),
            })
            .collect();
        files.push(write_out(
            out,
            "convergence.svg",
            &line_chart("Convergence", "iteration", "sum rate (bit/s/Hz)", &lines),
        )?);
    }
    let outcome = OptimizeOutcome { runs, files };
    if outcome.successes().next().is_none() {
        return Err(RhsError::ExperimentFailed(format!(
            "all {} trials failed",
            cfg.experiment.trials
        )));
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub size: usize,
    pub proposed_mean: f64,
    pub baseline_mean: f64,
    /// Sample standard deviation of the proposed rate.
    pub proposed_std: f64,
    /// Successful trials.
    pub trials: usize,
    /// Per successful trial `(trial, proposed, baseline)`.
    pub rates: Vec<(u64, f64, f64)>,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    pub files: Vec<PathBuf>,
}

/// Mean proposed and baseline rates over square surfaces `M = N`.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path, svg: bool) -> Result<SweepOutcome> {
    let sizes = &cfg.experiment.sizes;
    if sizes.is_empty() || sizes.iter().any(|&m| m < 2) {
        return Err(RhsError::invalid("sweep sizes must be nonempty and ≥ 2"));
    }
    let mut points = Vec::new();
    for &m in sizes {
        let geometry = cfg.geometry.build(m, m, cfg.geometry.feeds)?;
        let rates: Vec<(u64, f64, f64)> = (0..cfg.experiment.trials)
            .map(|t| run_trial(cfg, &geometry, &cfg.channel, t))
            .filter_map(|r| {
                r.result
                    .ok()
                    .map(|(a, b)| (r.trial, a.final_rate(), b.final_rate()))
            })
            .collect();
        let n = rates.len();
        if n == 0 {
            return Err(RhsError::ExperimentFailed(format!("every trial failed at M = {m}")));
        }
        let proposed_mean = rates.iter().map(|r| r.1).sum::<f64>() / n as f64;
        let baseline_mean = rates.iter().map(|r| r.2).sum::<f64>() / n as f64;
        let proposed_std = if n > 1 {
            (rates.iter().map(|r| (r.1 - proposed_mean).powi(2)).sum::<f64>() / (n - 1) as f64)
                .sqrt()
        } else {
            0.0
        };
        points.push(SweepPoint {
            size: m,
            proposed_mean,
            baseline_mean,
            proposed_std,
            trials: n,
            rates,
        });
    }
    points.sort_by_key(|p| p.size);

    let mut csv =
        String::from("M,rate_proposed_mean,rate_baseline_mean,rate_proposed_std,trials\n");
    let mut detail = String::from("M,trial,rate_proposed,rate_baseline\n");
    for p in &points {
        writeln!(
            csv,
            "{},{},{},{},{}",
            p.size,
            f6(p.proposed_mean),
            f6(p.baseline_mean),
            f6(p.proposed_std),
            p.trials
        )
        .unwrap();
        for (t, a, b) in &p.rates {
            writeln!(detail, "{},{t},{},{}", p.size, f6(*a), f6(*b)).unwrap();
        }
    }
    let mut files = vec![
        write_out(out, "sweep.csv", &csv)?,
        write_out(out, "sweep_trials.csv", &detail)?,
    ];
    if svg {
        let pick = |f: fn(&SweepPoint) -> f64| -> Vec<(f64, f64)> {
            points.iter().map(|p| (p.size as f64, f(p))).collect()
        };
        let chart = line_chart(
            "Sum rate versus surface size",
            "M = N",
            "sum rate (bit/s/Hz)",
            &[
                Series { label: "proposed", color: "#d62728", points: pick(|p| p.proposed_mean) },
                Series { label: "baseline", color: "#1f77b4", points: pick(|p| p.baseline_mean) },
            ],
        );
        files.push(write_out(out, "sweep.svg", &chart)?);
    }
    Ok(SweepOutcome { points, files })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridcheckTrial {
    pub trial: u64,
    pub seed: u64,
    pub grid_best: f64,
    pub optimized: f64,
    /// `optimized / grid_best`.
    pub ratio: f64,
    /// Ratio when the optimizer starts at the grid-best amplitudes.
    pub warm_start_ratio: f64,
}

#[derive(Debug)]
pub struct GridcheckOutcome {
    pub trials: Vec<GridcheckTrial>,
    pub median_ratio: f64,
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

/// Optimizer against the exhaustive amplitude grid on tiny surfaces.
pub fn cmd_gridcheck(cfg: &ExperimentConfig, out: &Path) -> Result<GridcheckOutcome> {
    let gc = &cfg.gridcheck;
    if gc.rows * gc.cols > crate::config::GRIDCHECK_MAX_ELEMENTS {
        return Err(RhsError::invalid(format!(
            "gridcheck needs at most {} elements, got {}",
            crate::config::GRIDCHECK_MAX_ELEMENTS,
            gc.rows * gc.cols
        )));
    }
    let geometry = cfg.geometry.build(gc.rows, gc.cols, gc.feeds)?;
    let channel = ChannelConfig {
        num_users: gc.users,
        ..cfg.channel.clone()
    };
    let budget = cfg.budget()?;
    let mut trials = Vec::new();
    let mut csv =
        String::from("trial,seed,status,grid_best_rate,optimizer_rate,ratio,warm_start_ratio\n");
    for t in 0..gc.trials {
        let seed = channel.seed ^ t;
        let result = (|| {
            let h = generate_channel_with_rng(&geometry, &channel, &mut trial_rng(channel.seed, t))?;
            let model = SumRateModel::new(&h, &geometry, budget, cfg.optimizer.allocation)?;
            let (best, grid_best) = model.grid_search(&gc.levels)?;
            let optimized = optimize(&h, &geometry, budget, &cfg.optimizer)?.final_rate();
            let warm = model.optimize_from(best, &cfg.optimizer)?.final_rate();
            Ok(GridcheckTrial {
                trial: t,
                seed,
                grid_best,
                optimized,
                ratio: optimized / grid_best,
                warm_start_ratio: warm / grid_best,
            })
        })();
        match result {
            Ok(r) => {
                writeln!(
                    csv,
                    "{t},{seed},ok,{},{},{},{}",
                    f6(r.grid_best),
                    f6(r.optimized),
                    f6(r.ratio),
                    f6(r.warm_start_ratio)
                )
                .unwrap();
                trials.push(r);
            }
            Err(e) => writeln!(csv, "{t},{seed},{},,,,", status(&e)).unwrap(),
        }
    }
    let files = vec![write_out(out, "gridcheck.csv", &csv)?];
    if trials.is_empty() {
        return Err(RhsError::ExperimentFailed("every gridcheck trial failed".into()));
    }
    let mut ratios: Vec<f64> = trials.iter().map(|t| t.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median_ratio = median(&ratios);
    Ok(GridcheckOutcome {
        passed: median_ratio >= gc.threshold,
        trials,
        median_ratio,
        files,
    })
}

struct Series {
    label: &'static str,
    color: &'static str,
    points: Vec<(f64, f64)>,
}

/// Minimal SVG line chart with axis extents taken from the data.
fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (w, h, pad) = (640.0, 400.0, 56.0);
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    )
    .unwrap();
    writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#, w / 2.0, h - 12.0).unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>"#,
        h / 2.0,
        h / 2.0
    )
    .unwrap();
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{xv:.1}</text>"#, sx(xv), h - pad + 16.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{yv:.1}</text>"#, pad - 4.0, sy(yv) + 4.0).unwrap();
    }
    let mut legend_y = pad + 16.0;
    for ser in series {
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            ser.color,
            pts.join(" ")
        )
        .unwrap();
        if !ser.label.is_empty() {
            writeln!(
                s,
                r#"<text x="{}" y="{legend_y}" fill="{}" text-anchor="end">{}</text>"#,
                w - pad - 8.0,
                ser.color,
                ser.label
            )
            .unwrap();
            legend_y += 16.0;
        }
    }
    s.push_str("</svg>\n");
    s
}
