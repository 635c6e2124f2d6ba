//! Walk a firefighter and fly a drone across a generated map.
//!
//! cargo run --example pathfinding -- [seed]

use wildfire_bench::terrain::{generate_world, GenConfig};
use wildfire_bench::world::{passable, plan_path, AgentKind, Cell};

fn walk(world: &wildfire_bench::world::WorldMap, kind: AgentKind, from: Cell, to: Cell) -> Option<Vec<Cell>> {
    let mut path = vec![from];
    let mut at = from;
    while at != to {
        at = plan_path(world, kind, at, to)?;
        path.push(at);
        if path.len() > world.len() {
            return None;
        }
    }
    Some(path)
}

fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(3);
    let world = generate_world(&GenConfig {
        seed,
        width: 40,
        height: 40,
        ..GenConfig::default()
    })?;
    let ground: Vec<Cell> = (0..world.len())
        .map(|i| world.cell(i))
        .filter(|&c| passable(&world, AgentKind::Firefighter, c))
        .collect();
    let (from, to) = (ground[0], ground[ground.len() - 1]);
    for kind in [AgentKind::Firefighter, AgentKind::Drone] {
        match walk(&world, kind, from, to) {
            Some(p) => println!("{}: {from} -> {to} in {} moves", kind.name(), p.len() - 1),
            None => println!("{}: {to} unreachable from {from}", kind.name()),
        }
    }
    Ok(())
}
