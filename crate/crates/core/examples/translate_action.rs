//! Turn free-text actions into structured primitives through the translator
//! loop.
//!
//! cargo run --example translate_action -- "Move to (12, 4)"

use wildfire_bench::lm::{Metered, Script, ScriptedMock, Telemetry};
use wildfire_bench::translate::{translate, ActionCatalog, TranslateCtx};
use wildfire_bench::world::{AgentId, AgentKind};

fn main() -> anyhow::Result<()> {
    let texts: Vec<String> = match std::env::args().skip(1).collect::<Vec<_>>() {
        v if !v.is_empty() => v,
        _ => vec![
            "Move to (12, 4)".into(),
            "cut 2 trees in current cell".into(),
            "Refill water".into(),
            "Dance".into(),
        ],
    };
    let lm = ScriptedMock::new(Script::Omniscient);
    let telemetry = Telemetry::default();
    let metered = Metered::new(&lm, &telemetry);
    let ctx = TranslateCtx {
        agent: Some(AgentId(1)),
        kind: AgentKind::Firefighter,
        catalog: ActionCatalog::builtin(),
        width: 30,
        height: 30,
        max_retries: 2,
    };
    for text in &texts {
        match translate(&metered, text, &ctx) {
            Ok(t) => println!("{text:?} -> {:?} ({} calls)", t.primitive, t.exchanges.len()),
            Err(e) => println!("{text:?} -> {e}"),
        }
    }
    println!("total {:?}", telemetry.usage());
    Ok(())
}
