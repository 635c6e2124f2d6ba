//! Generate a map from a seed, print it, and round-trip the binary snapshot.
//!
//! cargo run --example generate_world -- [seed] [size]

use wildfire_bench::terrain::{generate_world, GenConfig, LandType};
use wildfire_bench::world::{ascii_dump, snapshot};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);
    let size = args.next().map(|s| s.parse()).transpose()?.unwrap_or(96);
    let world = generate_world(&GenConfig {
        seed,
        width: size,
        height: size,
        ..GenConfig::default()
    })?;
    print!("{}", ascii_dump(&world));

    for land in LandType::ALL {
        let n = world.land.iter().filter(|&&l| l == land).count();
        println!("{land:?}: {n}");
    }
    println!("trees: {}, civilians: {}", world.total_trees(), world.total_civilians());

    let bytes = snapshot::encode(&world);
    let back = snapshot::decode(&bytes)?;
    assert_eq!(back, world);
    println!("snapshot: {} bytes, round trip ok", bytes.len());
    Ok(())
}
