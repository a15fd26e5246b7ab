use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use irsbeam::experiments::output::{ensure_dir, write_csv, Manifest};
use irsbeam::experiments::runner::median;
use irsbeam::experiments::{run_complexity, run_convergence, run_oracle_compare, run_sinr_sweep, SystemConfig};

#[derive(Parser)]
#[command(name = "irsbeam", version, about = "Cross-entropy IRS phase design with ZF precoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seed-averaged CE best-so-far power per iteration for several S.
    Converge(Common),
    /// Mean transmit power versus SINR target for each configured method.
    SweepSinr(Common),
    /// Closed-form and measured costs of CE and successive refinement.
    Complexity(Common),
    /// CE against the exhaustive optimum, trial by trial.
    OracleCompare(Common),
    /// List built-in scenarios, or print one as TOML.
    Scenarios { name: Option<String> },
}

#[derive(Args)]
struct Common {
    /// TOML scenario file.
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name (default: desk).
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of Monte-Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
}

impl Common {
    fn load(&self) -> anyhow::Result<SystemConfig> {
        let mut cfg = match (&self.config, &self.scenario) {
            (Some(path), _) => {
                SystemConfig::load(path).with_context(|| format!("loading config {}", path.display()))?
            }
            (None, Some(name)) => match SystemConfig::builtin(name) {
                Some(cfg) => cfg,
                None => bail!(
                    "unknown scenario `{name}` (available: {})",
                    SystemConfig::BUILTIN_NAMES.join(", ")
                ),
            },
            (None, None) => SystemConfig::builtin("desk").expect("desk scenario exists"),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn finish(mut manifest: Manifest<'_>, out: &Path, csvs: Vec<PathBuf>, summary: serde_json::Value) -> anyhow::Result<()> {
    manifest.outputs = csvs.iter().map(|p| p.display().to_string()).collect();
    manifest.summary = summary;
    manifest.write(out)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Scenarios { name: None } => {
            for name in SystemConfig::BUILTIN_NAMES {
                println!("{name}");
            }
        }
        Command::Scenarios { name: Some(name) } => match SystemConfig::builtin(&name) {
            Some(cfg) => print!("{}", cfg.to_toml()),
            None => bail!("unknown scenario `{name}`"),
        },
        Command::Converge(args) => {
            let cfg = args.load()?;
            ensure_dir(&args.out)?;
            let report = run_convergence(&cfg, &cfg.convergence.candidates)?;
            let csvs = vec![
                write_csv(&args.out, "converge.csv", &report.rows)?,
                write_csv(&args.out, "converge_traces.csv", &report.traces)?,
            ];
            let finals: Vec<(usize, f64)> = cfg
                .convergence
                .candidates
                .iter()
                .map(|&s| (s, *report.curve(s).last().unwrap_or(&f64::NAN)))
                .collect();
            let line: Vec<String> = finals.iter().map(|(s, p)| format!("S={s}: {p:.2} dBm")).collect();
            println!("converge [{}] seed {} trials {}: final {}", cfg.name, cfg.seed, cfg.trials, line.join(", "));
            let summary = json!({ "final_mean_power_dbm": finals });
            finish(Manifest::new("converge", &cfg), &args.out, csvs, summary)?;
        }
        Command::SweepSinr(args) => {
            let cfg = args.load()?;
            ensure_dir(&args.out)?;
            let methods = cfg.baselines.parsed_methods()?;
            let rows = run_sinr_sweep(&cfg, &methods)?;
            let csvs = vec![write_csv(&args.out, "sweep_sinr.csv", &rows)?];
            println!(
                "sweep-sinr [{}] seed {} trials {}: {} rows ({} methods x {} targets)",
                cfg.name,
                cfg.seed,
                cfg.trials,
                rows.len(),
                rows.len() / cfg.sinr_db.len(),
                cfg.sinr_db.len()
            );
            finish(Manifest::new("sweep-sinr", &cfg), &args.out, csvs, json!({ "rows": rows.len() }))?;
        }
        Command::Complexity(args) => {
            let cfg = args.load()?;
            ensure_dir(&args.out)?;
            let rows = run_complexity(&cfg, &cfg.complexity.irs_elements)?;
            let csvs = vec![write_csv(&args.out, "complexity.csv", &rows)?];
            let model = cfg.cost_model();
            let crossovers: Vec<(u32, usize)> =
                cfg.complexity.phase_bits.iter().map(|&q| (q, model.crossover(q))).collect();
            let line: Vec<String> = crossovers.iter().map(|(q, n)| format!("Q={q}: N>={n}")).collect();
            println!("complexity [{}] seed {}: CE cheaper than SR for {}", cfg.name, cfg.seed, line.join(", "));
            finish(
                Manifest::new("complexity", &cfg),
                &args.out,
                csvs,
                json!({ "crossover_n": crossovers }),
            )?;
        }
        Command::OracleCompare(args) => {
            let cfg = args.load()?;
            ensure_dir(&args.out)?;
            let report = run_oracle_compare(&cfg)?;
            let csvs = vec![write_csv(&args.out, "oracle_compare.csv", &report.rows)?];
            let sr_gaps: Vec<f64> = report
                .rows
                .iter()
                .map(|r| r.sr_power_dbm - r.exhaustive_power_dbm)
                .collect();
            println!(
                "oracle-compare [{}] seed {} trials {}: median CE gap {:.4} dB, CE optimal {:.0}%, SR optimal {:.0}%",
                cfg.name,
                cfg.seed,
                cfg.trials,
                report.median_gap_db(),
                100.0 * report.ce_match_rate(),
                100.0 * report.sr_match_rate()
            );
            let summary = json!({
                "median_gap_db": report.median_gap_db(),
                "ce_match_rate": report.ce_match_rate(),
                "sr_match_rate": report.sr_match_rate(),
                "sr_median_gap_db": median(&sr_gaps),
            });
            finish(Manifest::new("oracle-compare", &cfg), &args.out, csvs, summary)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
