//! Score every level for Do-Nothing and one framework, then print the
//! normalized-score and behavior-competency tables.
//!
//! cargo run --example bcs_report -- [framework] [max_steps]

use rayon::prelude::*;
use wildfire_bench::episode::{run_episode, EpisodeConfig};
use wildfire_bench::frameworks::FrameworkKind;
use wildfire_bench::levels::{canonical_seeds, LevelOverrides, LEVELS};
use wildfire_bench::lm::{Script, ScriptedMock};
use wildfire_bench::metrics::{bcs_report, score_table_tsv, BaselinePolicy};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: FrameworkKind = args.next().unwrap_or_else(|| "CAMON".into()).parse()?;
    let max_steps = args.next().map(|s| s.parse()).transpose()?.unwrap_or(60);
    let cfg = EpisodeConfig {
        overrides: LevelOverrides {
            max_steps: Some(max_steps),
            ..LevelOverrides::default()
        },
        ..EpisodeConfig::default()
    };
    let jobs: Vec<(FrameworkKind, &str, u64)> = LEVELS
        .iter()
        .flat_map(|l| [FrameworkKind::DoNothing, kind].map(|k| (k, l.name, canonical_seeds(l.name)[0])))
        .collect();
    let logs = jobs
        .par_iter()
        .map(|&(k, level, seed)| run_episode(k, level, seed, &ScriptedMock::new(Script::Omniscient), &cfg))
        .collect::<Result<Vec<_>, _>>()?;

    print!("{}", score_table_tsv(&logs));
    let report = bcs_report(&logs, BaselinePolicy::Formula)?;
    println!();
    print!("{}", report.to_tsv());
    Ok(())
}
