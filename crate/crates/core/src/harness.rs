//! Batch entry points behind the command-line verbs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::HarnessConfig;
use crate::episode::{replay, run_episode, ReplayError, ReplayReport};
use crate::levels::{build_level, canonical_seeds, LevelError, LEVELS};
use crate::lm::{LanguageModel, LmError};
use crate::metrics::{bcs_report, score_table_tsv, telemetry_report, telemetry_tsv, MetricsError};
use crate::runlog::{slug, RunLog, RunLogError};
use crate::terrain::{generate_world, GenError};
use crate::world::{snapshot, world_digest};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Level(#[from] LevelError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error("{path}: {source}")]
    Log { path: PathBuf, source: RunLogError },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: replay failed: {source}")]
    Replay { path: PathBuf, source: ReplayError },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io(dir))?;
    }
    std::fs::write(path, bytes).map_err(io(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateReport {
    pub snapshot: PathBuf,
    pub ascii: PathBuf,
    pub digest: String,
    pub width: usize,
    pub height: usize,
}

/// Writes a binary snapshot and an ASCII dump of a level's map, or of a
/// bare generated map when no level is named.
pub fn cmd_generate(
    cfg: &HarnessConfig,
    level: Option<&str>,
    seed: Option<u64>,
    out: &Path,
) -> Result<GenerateReport, HarnessError> {
    let (world, agents, stem) = match level {
        Some(name) => {
            let seed = seed.or_else(|| canonical_seeds(name).first().copied()).unwrap_or(0);
            let b = build_level(name, seed, &cfg.episode_config().overrides)?;
            let stem = format!("{}-{seed}", slug(b.instance.name()));
            (b.world, b.agents, stem)
        }
        None => {
            let mut gen = cfg.gen.clone();
            if let Some(s) = seed {
                gen.seed = s;
            }
            let w = generate_world(&gen)?;
            let stem = format!("world-{}", gen.seed);
            (w, Vec::new(), stem)
        }
    };
    let snap = out.join(format!("{stem}.wfsn"));
    let ascii = out.join(format!("{stem}.txt"));
    write(&snap, snapshot::encode(&world))?;
    write(&ascii, snapshot::ascii_dump(&world))?;
    Ok(GenerateReport {
        snapshot: snap,
        ascii,
        digest: world_digest(&world, &agents),
        width: world.width,
        height: world.height,
    })
}

/// Runs every selected level × seed, one fresh model per episode, and
/// writes one JSON-lines log per episode. Returns the written paths in
/// catalog and seed order.
pub fn cmd_run<F>(cfg: &HarnessConfig, make_lm: F) -> Result<Vec<PathBuf>, HarnessError>
where
    F: Fn() -> Result<Box<dyn LanguageModel>, LmError> + Sync,
{
    let ecfg = cfg.episode_config();
    let jobs: Vec<(&'static str, u64)> = cfg
        .selected_levels()
        .into_iter()
        .flat_map(|l| cfg.seeds_for(l).into_iter().map(move |s| (l, s)))
        .collect();
    let logs: Vec<RunLog> = jobs
        .par_iter()
        .map(|&(level, seed)| {
            let lm = make_lm()?;
            let log = run_episode(cfg.framework, level, seed, lm.as_ref(), &ecfg)?;
            log::info!(
                "{} {level} seed {seed}: score {} after {} steps",
                cfg.framework,
                log.footer.score.value,
                log.footer.steps
            );
            Ok(log)
        })
        .collect::<Result<_, HarnessError>>()?;
    let mut paths = Vec::with_capacity(logs.len());
    for log in logs {
        let p = cfg.out_dir.join(log.file_name());
        write(&p, log.to_jsonl())?;
        paths.push(p);
    }
    Ok(paths)
}

pub fn load_logs(paths: &[PathBuf]) -> Result<Vec<RunLog>, HarnessError> {
    paths
        .iter()
        .map(|p| {
            RunLog::load(p).map_err(|source| HarnessError::Log {
                path: p.clone(),
                source,
            })
        })
        .collect()
}

/// Expands directories into the `.jsonl` files they contain, sorted.
pub fn collect_log_paths(inputs: &[PathBuf]) -> Result<Vec<PathBuf>, HarnessError> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut v: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(io(p))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| q.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            v.sort();
            out.extend(v);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreOutput {
    pub scores_tsv: String,
    pub telemetry_tsv: String,
}

/// Mean±sd score table and per-step telemetry table.
pub fn cmd_score(logs: &[RunLog], out: Option<&Path>) -> Result<ScoreOutput, HarnessError> {
    let rows = telemetry_report(logs)?;
    let o = ScoreOutput {
        scores_tsv: score_table_tsv(logs),
        telemetry_tsv: telemetry_tsv(&rows),
    };
    if let Some(dir) = out {
        write(&dir.join("scores.tsv"), &o.scores_tsv)?;
        write(&dir.join("telemetry.tsv"), &o.telemetry_tsv)?;
    }
    Ok(o)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcsOutput {
    pub bcs_tsv: String,
    pub radar_tsv: String,
}

/// BCS table and radar triples; open-ended baselines come from the
/// Do-Nothing logs among `logs`.
pub fn cmd_bcs(cfg: &HarnessConfig, logs: &[RunLog], out: Option<&Path>) -> Result<BcsOutput, HarnessError> {
    let r = bcs_report(logs, cfg.baseline_policy)?;
    let o = BcsOutput {
        bcs_tsv: r.to_tsv(),
        radar_tsv: r.radar_tsv(),
    };
    if let Some(dir) = out {
        write(&dir.join("bcs.tsv"), &o.bcs_tsv)?;
        write(&dir.join("radar.tsv"), &o.radar_tsv)?;
    }
    Ok(o)
}

pub fn cmd_replay(path: &Path) -> Result<ReplayReport, HarnessError> {
    let log = RunLog::load(path).map_err(|source| HarnessError::Log {
        path: path.to_path_buf(),
        source,
    })?;
    replay(&log).map_err(|source| HarnessError::Replay {
        path: path.to_path_buf(),
        source,
    })
}

/// The level catalog as a TSV table.
pub fn cmd_levels() -> String {
    let mut s = String::from("name\tagents\tmap_size\tmax_score\tbehaviors\tmax_steps\tseeds\n");
    for l in &LEVELS {
        let tags: Vec<&str> = l.tags.iter().map(|t| t.code()).collect();
        let seeds: Vec<String> = canonical_seeds(l.name).iter().map(|x| x.to_string()).collect();
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            l.name,
            l.roster,
            l.map_size,
            l.max_score.map_or_else(|| "N/A".to_string(), |m| m.to_string()),
            tags.join(", "),
            l.default_max_steps(),
            seeds.join(", ")
        );
    }
    s
}
