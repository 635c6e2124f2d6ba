use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use wildfire_bench::config::HarnessConfig;
use wildfire_bench::frameworks::FrameworkKind;
use wildfire_bench::harness;
use wildfire_bench::lm;
use wildfire_bench::metrics::BaselinePolicy;

#[derive(Parser)]
#[command(name = "wildfire", version, about = "Multi-agent wildfire benchmark harness")]
struct Cli {
    /// Harness config file (TOML); missing keys take the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Level name; repeatable.
    #[arg(long, global = true)]
    level: Vec<String>,
    /// Seed; repeatable.
    #[arg(long, global = true)]
    seed: Vec<u64>,
    #[arg(long, global = true)]
    framework: Option<FrameworkKind>,
    /// mock:<idle|echo|omniscient|canned:FILE> or http
    #[arg(long, global = true)]
    lm: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a map snapshot and ASCII dump.
    Generate,
    /// Run episodes and write one JSON-lines log each.
    Run {
        #[arg(long)]
        max_steps: Option<u64>,
    },
    /// Mean±sd score table and per-step telemetry from logs.
    Score { logs: Vec<PathBuf> },
    /// Behavior-competency table and radar data from logs.
    Bcs {
        logs: Vec<PathBuf>,
        #[arg(long, value_parser = ["formula", "printed"])]
        baseline: Option<String>,
    },
    /// Re-simulate logs and verify every step digest.
    Replay { logs: Vec<PathBuf> },
    /// List the level catalog.
    Levels,
}

fn config(cli: &Cli) -> Result<HarnessConfig> {
    let mut cfg = match &cli.config {
        Some(p) => HarnessConfig::load(p)?,
        None => HarnessConfig::default(),
    };
    if !cli.level.is_empty() {
        cfg.levels = cli.level.clone();
    }
    if !cli.seed.is_empty() {
        cfg.seeds = cli.seed.clone();
    }
    if let Some(f) = cli.framework {
        cfg.framework = f;
    }
    if let Some(l) = &cli.lm {
        cfg.lm = l.clone();
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn logs(paths: &[PathBuf]) -> Result<Vec<wildfire_bench::runlog::RunLog>> {
    if paths.is_empty() {
        bail!("no log files given");
    }
    let paths = harness::collect_log_paths(paths)?;
    Ok(harness::load_logs(&paths)?)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut cfg = config(&cli)?;
    match &cli.cmd {
        Cmd::Generate => {
            let level = cli.level.first().map(String::as_str);
            let r = harness::cmd_generate(&cfg, level, cli.seed.first().copied(), &cfg.out_dir)?;
            println!(
                "{}\n{}\n{}x{} digest {}",
                r.snapshot.display(),
                r.ascii.display(),
                r.width,
                r.height,
                r.digest
            );
        }
        Cmd::Run { max_steps } => {
            if max_steps.is_some() {
                cfg.max_steps = *max_steps;
            }
            // Fail fast on a bad model spec before spawning episodes.
            lm::build(&cfg.lm, &cfg.http).with_context(|| format!("--lm {}", cfg.lm))?;
            let (spec, http) = (cfg.lm.clone(), cfg.http.clone());
            let paths = harness::cmd_run(&cfg, || lm::build(&spec, &http))?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Cmd::Score { logs: l } => {
            let out = harness::cmd_score(&logs(l)?, cli.out.as_deref())?;
            print!("{}\n{}", out.scores_tsv, out.telemetry_tsv);
        }
        Cmd::Bcs { logs: l, baseline } => {
            match baseline.as_deref() {
                Some("printed") => cfg.baseline_policy = BaselinePolicy::Printed,
                Some(_) => cfg.baseline_policy = BaselinePolicy::Formula,
                None => {}
            }
            let out = harness::cmd_bcs(&cfg, &logs(l)?, cli.out.as_deref())?;
            print!("{}\n{}", out.bcs_tsv, out.radar_tsv);
        }
        Cmd::Replay { logs: l } => {
            if l.is_empty() {
                bail!("no log files given");
            }
            let mut failed = 0;
            for p in harness::collect_log_paths(l)? {
                match harness::cmd_replay(&p) {
                    Ok(r) => println!("ok\t{}\t{} steps", p.display(), r.steps_checked),
                    Err(e) => {
                        failed += 1;
                        eprintln!("FAIL\t{e}");
                    }
                }
            }
            if failed > 0 {
                bail!("{failed} log(s) failed replay");
            }
        }
        Cmd::Levels => print!("{}", harness::cmd_levels()),
    }
    Ok(())
}
