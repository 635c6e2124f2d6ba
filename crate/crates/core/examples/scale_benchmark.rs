//! Time the global step on a large map with thousands of idle agents and a
//! live fire.
//!
//! cargo run --release --example scale_benchmark -- [size] [agents] [steps]

use std::time::Instant;

use wildfire_bench::fire::FireConfig;
use wildfire_bench::rng::KeyedStream;
use wildfire_bench::terrain::{generate_world, GenConfig, LandType};
use wildfire_bench::world::{world_step, Agent, AgentId, AgentKind, AgentParams, Cell};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let size: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1000);
    let count: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2000);
    let steps: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);

    let t0 = Instant::now();
    let mut world = generate_world(&GenConfig {
        seed: 1,
        width: size,
        height: size,
        ..GenConfig::default()
    })?;
    println!("generated {size}x{size} in {:?}", t0.elapsed());

    let params = AgentParams::default();
    let mut rng = KeyedStream::new(1, 2);
    let mut agents: Vec<Agent> = (0..count)
        .map(|i| {
            let pos = Cell::new(rng.range_usize(0, size) as i32, rng.range_usize(0, size) as i32);
            Agent::new(AgentId(i + 1), AgentKind::ALL[i as usize % 4], pos, &params)
        })
        .collect();
    let mid = Cell::new(size as i32 / 2, size as i32 / 2);
    world.set_land(mid, LandType::DenseForest);
    world.ignite(mid);

    let cfg = FireConfig::default();
    let t0 = Instant::now();
    let mut slowest = std::time::Duration::ZERO;
    for _ in 0..steps {
        let s = Instant::now();
        world_step(&mut world, &mut agents, &params, &cfg);
        slowest = slowest.max(s.elapsed());
    }
    let burning = (0..world.len()).filter(|&i| world.is_active_fire(i)).count();
    println!(
        "{steps} steps with {count} agents: mean {:?}, slowest {slowest:?}, {burning} cells on fire",
        t0.elapsed() / steps
    );
    Ok(())
}
