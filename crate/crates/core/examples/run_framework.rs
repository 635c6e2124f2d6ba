//! Run one episode of a coordination framework against the omniscient mock.
//!
//! cargo run --example run_framework -- [framework] [level] [seed]

use wildfire_bench::episode::{run_episode, EpisodeConfig};
use wildfire_bench::frameworks::FrameworkKind;
use wildfire_bench::lm::{Script, ScriptedMock};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: FrameworkKind = args.next().unwrap_or_else(|| "CAMON".into()).parse()?;
    let level = args.next().unwrap_or_else(|| "Cut Trees: Lines (small)".into());
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(9259);

    let lm = ScriptedMock::new(Script::Omniscient);
    let log = run_episode(kind, &level, seed, &lm, &EpisodeConfig::default())?;
    for s in log.steps.iter().take(3) {
        println!("t={} activations={:?}", s.t, s.activations);
    }
    let f = &log.footer;
    println!(
        "{} on {level} seed {seed}: score {} after {} steps ({:?})",
        kind.name(),
        f.score.value,
        f.steps,
        f.termination
    );
    println!(
        "calls {} input tokens {} output tokens {}",
        f.usage.api_calls, f.usage.input_tokens, f.usage.output_tokens
    );
    Ok(())
}
