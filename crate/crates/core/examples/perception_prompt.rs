//! Render an agent's minimap, build its perception prompt and send it to a
//! mock model.
//!
//! cargo run --example perception_prompt -- [level] [seed]

use wildfire_bench::levels::{build_level, LevelOverrides};
use wildfire_bench::lm::{Metered, Script, ScriptedMock, Telemetry};
use wildfire_bench::perception::{build_perception_prompt, encode_minimap, perceive};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let level = args
        .next()
        .unwrap_or_else(|| "Rescue Civilians: Known Location (small)".into());
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(9502);
    let built = build_level(&level, seed, &LevelOverrides::default())?;
    let agent = &built.agents[0];

    let mm = encode_minimap(&built.world, agent, &built.agents);
    println!("{}", build_perception_prompt(agent, &mm));

    let lm = ScriptedMock::new(Script::Echo);
    let telemetry = Telemetry::default();
    let ex = perceive(&Metered::new(&lm, &telemetry), &built.world, agent, &built.agents)?;
    println!("--- model said: {}", ex.output);
    println!("--- usage: {:?}", telemetry.usage());
    Ok(())
}
