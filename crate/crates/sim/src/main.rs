use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use sleepwake_sim::config::{Algorithm, RunConfig, OUT_DIR_ENV};
use sleepwake_sim::harness::{run_experiment, summary_files, write_outputs};
use sleepwake_sim::metrics::{compare_runs, read_summary, write_comparison};

#[derive(Parser)]
#[command(
    name = "sleepwake",
    version,
    about = "Sleep-wake scheduling experiments for intruder-tracking sensor grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm for one seed and write its metric files.
    Run(RunArgs),
    /// Run several algorithms over a range of seeds in parallel.
    Sweep(SweepArgs),
    /// Summarise every run in a directory into a comparison table.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Group that must be present, e.g. `tqsa-a@11x11`; repeatable.
        #[arg(long = "group")]
        groups: Vec<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    cycles: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Learn the mobility matrix online instead of using the true one.
    #[arg(long)]
    estimate_p: bool,
    /// Intruder mobility matrix file; defaults to the lazy random walk.
    #[arg(long)]
    p_matrix: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    algo: Option<Algorithm>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',', default_values_t = [Algorithm::QsaA, Algorithm::TqsaA, Algorithm::QsaD, Algorithm::TqsaD, Algorithm::Fcr, Algorithm::Qmdp])]
    algos: Vec<Algorithm>,
    /// Number of seeds, starting at `--first-seed`.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    #[command(flatten)]
    common: Common,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.rows {
            cfg.rows = v;
        }
        if let Some(v) = self.cols {
            cfg.cols = v;
        }
        if let Some(v) = self.cycles {
            cfg.cycles = v;
        }
        if self.estimate_p {
            cfg.estimate_p = true;
        }
        if let Some(p) = &self.p_matrix {
            cfg.p_matrix = Some(p.clone());
        }
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
            cfg.out_dir = PathBuf::from(dir);
        }
        if let Some(dir) = &self.out {
            cfg.out_dir = dir.clone();
        }
        Ok(cfg)
    }
}

fn run_one(cfg: &RunConfig) -> Result<()> {
    let (series, summary) =
        run_experiment(cfg).with_context(|| format!("{} seed {}", cfg.algorithm, cfg.seed))?;
    let (series_path, _) = write_outputs(&cfg.out_dir, cfg, &series, &summary)?;
    println!(
        "{} seed {}: detects/step {:.4}, awake/step {:.3}, mean cost {:.4} -> {}",
        cfg.algorithm,
        cfg.seed,
        summary.detects_per_step,
        summary.awake_per_step,
        summary.mean_cost,
        series_path.display()
    );
    Ok(())
}

fn compare(input: &Path, out: &Path, groups: &[String]) -> Result<()> {
    let summaries = summary_files(input)?
        .iter()
        .map(|p| read_summary(p))
        .collect::<Result<Vec<_>, _>>()?;
    let stats = compare_runs(&summaries, groups)?;
    let file = File::create(out).with_context(|| out.display().to_string())?;
    write_comparison(&stats, BufWriter::new(file))?;
    for s in &stats {
        println!(
            "{:<28} n={:<3} detects {:.4} ± {:.4}  awake {:.3} ± {:.3}",
            s.group, s.runs, s.detects.mean, s.detects.sd, s.awake.mean, s.awake.sd
        );
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let mut cfg = args.common.config()?;
            if let Some(a) = args.algo {
                cfg.algorithm = a;
            }
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            run_one(&cfg)
        }
        Command::Sweep(args) => {
            let base = args.common.config()?;
            let configs: Vec<RunConfig> = args
                .algos
                .iter()
                .flat_map(|&algorithm| {
                    let base = &base;
                    (args.first_seed..args.first_seed + args.seeds).map(move |seed| RunConfig {
                        algorithm,
                        seed,
                        ..base.clone()
                    })
                })
                .collect();
            configs.par_iter().try_for_each(run_one)
        }
        Command::Compare { input, out, groups } => compare(&input, &out, &groups),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
