//! Watch a fire spread on a level map with nobody fighting it.
//!
//! cargo run --example fire_spread -- [seed] [steps]

use wildfire_bench::fire::{fire_step, FireConfig, FireState};
use wildfire_bench::levels::{build_level, LevelOverrides};
use wildfire_bench::world::ascii_dump;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2994);
    let steps: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(80);
    let mut world = build_level("Suppress Fire: Extinguish", seed, &LevelOverrides::default())?.world;
    let cfg = FireConfig::default();
    let mut destroyed = 0;
    for t in 0..steps {
        let delta = fire_step(&mut world, &cfg);
        world.step += 1;
        destroyed += delta.trees_destroyed;
        if t % 10 == 0 {
            let count = |s: FireState| world.fire.iter().filter(|&&f| f == s).count();
            println!(
                "t={t:>3} ignited={:>4} burning={:>4} extinguished={:>4} trees destroyed={destroyed}",
                count(FireState::Ignited),
                count(FireState::Burning),
                count(FireState::Extinguished),
            );
        }
    }
    print!("{}", ascii_dump(&world));
    Ok(())
}
