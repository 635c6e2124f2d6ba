//! Write a run log, replay it step by step, then show that tampering is
//! caught.
//!
//! cargo run --example replay_log

use wildfire_bench::episode::{replay, run_episode, EpisodeConfig};
use wildfire_bench::frameworks::FrameworkKind;
use wildfire_bench::lm::{Script, ScriptedMock};
use wildfire_bench::runlog::RunLog;
use wildfire_bench::world::Primitive;

fn main() -> anyhow::Result<()> {
    let lm = ScriptedMock::new(Script::Omniscient);
    let log = run_episode(
        FrameworkKind::Coela,
        "Cut Trees: Sparse (small)",
        375,
        &lm,
        &EpisodeConfig::default(),
    )?;

    let path = std::env::temp_dir().join(log.file_name());
    log.write_jsonl(std::fs::File::create(&path)?)?;
    let loaded = RunLog::load(&path)?;
    let report = replay(&loaded)?;
    println!(
        "{}: {} steps verified, final digest {}",
        path.display(),
        report.steps_checked,
        report.final_digest
    );

    let mut forged = loaded.clone();
    let step = forged
        .steps
        .iter_mut()
        .find(|s| !s.activations.is_empty())
        .expect("some agent acted");
    step.activations[0].1 = Primitive::Idle;
    match replay(&forged) {
        Ok(_) => println!("tampering went unnoticed"),
        Err(e) => println!("tampered log rejected: {e}"),
    }
    Ok(())
}
