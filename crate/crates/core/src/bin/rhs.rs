use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rhs_core::config::{ExperimentConfig, Quantization};
use rhs_core::experiments::{cmd_gridcheck, cmd_optimize, cmd_pattern, cmd_sweep, exit_code};
use rhs_core::{Result, RhsError};

/// Reconfigurable holographic surface experiments.
#[derive(Parser)]
#[command(name = "rhs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multibeam hologram radiation pattern.
    Pattern(Common),
    /// Alternating optimization over seeded trials.
    Optimize(Common),
    /// Sum rate versus surface size.
    Sweep(Common),
    /// Optimizer versus exhaustive amplitude grid on a tiny surface.
    Gridcheck(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides experiment.output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Channel seed (overrides channel.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated beam angles in degrees, e.g. "-3,23".
    #[arg(long, allow_hyphen_values = true)]
    beams: Option<String>,
    #[arg(long, value_enum)]
    quantize: Option<Quantization>,
    /// Also write SVG charts.
    #[arg(long)]
    svg: bool,
}

fn parse_beams(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| RhsError::InvalidArgument(format!("bad beam angle {s:?}")))
        })
        .collect()
}

fn load(args: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.channel.seed = seed;
    }
    if let Some(beams) = &args.beams {
        cfg.pattern.beams_deg = parse_beams(beams)?;
    }
    if let Some(q) = args.quantize {
        cfg.pattern.quantize = q;
    }
    cfg.validate()?;
    let out = args.out.clone().unwrap_or_else(|| cfg.experiment.output_dir.clone());
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Pattern(args) => {
            let (cfg, out) = load(&args)?;
            let res = cmd_pattern(&cfg, &out, args.svg)?;
            let shown = cfg.pattern.beams_deg.len().max(1) + 1;
            for (angle, lobe) in res.lobes.iter().take(shown) {
                println!("lobe {angle:8.2} deg  {:8.2} dB", lobe.gain_db);
            }
            for f in &res.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Optimize(args) => {
            let (cfg, out) = load(&args)?;
            let res = cmd_optimize(&cfg, &out, args.svg)?;
            for run in &res.runs {
                match &run.result {
                    Ok((rep, base)) => println!(
                        "trial {:3}  rate {:9.4}  baseline {:9.4}  iterations {:3}  converged {}",
                        run.trial,
                        rep.final_rate(),
                        base.final_rate(),
                        rep.iterations_used,
                        rep.converged
                    ),
                    Err(e) => println!("trial {:3}  failed: {e}", run.trial),
                }
            }
            for f in &res.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep(args) => {
            let (cfg, out) = load(&args)?;
            let res = cmd_sweep(&cfg, &out, args.svg)?;
            println!("{:>4} {:>10} {:>10} {:>8} {:>6}", "M", "proposed", "baseline", "std", "trials");
            for p in &res.points {
                println!(
                    "{:>4} {:>10.4} {:>10.4} {:>8.4} {:>6}",
                    p.size, p.proposed_mean, p.baseline_mean, p.proposed_std, p.trials
                );
            }
            for f in &res.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Gridcheck(args) => {
            let (cfg, out) = load(&args)?;
            let res = cmd_gridcheck(&cfg, &out)?;
            println!(
                "median ratio {:.4} over {} trials (threshold {}): {}",
                res.median_ratio,
                res.trials.len(),
                cfg.gridcheck.threshold,
                if res.passed { "PASS" } else { "FAIL" }
            );
            for f in &res.files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
