//! Seeded procedural world generation.
//!
//! Six independent noise layers (elevation, vegetation, moisture,
//! settlement, and the two wind components) are sampled per cell and
//! mapped to a land type by [`classify_land`]. Civilians are scattered
//! afterwards from a keyed stream.

mod noise;

pub use noise::{noise2, NoiseField};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::KeyedStream;
use crate::world::WorldMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum LandType {
    Brush,
    LightForest,
    MediumForest,
    DenseForest,
    Rock,
    Water,
    Building,
}

impl LandType {
    pub const ALL: [LandType; 7] = [
        LandType::Brush,
        LandType::LightForest,
        LandType::MediumForest,
        LandType::DenseForest,
        LandType::Rock,
        LandType::Water,
        LandType::Building,
    ];

    pub fn initial_trees(self) -> u8 {
        match self {
            LandType::LightForest => 1,
            LandType::MediumForest => 2,
            LandType::DenseForest => 3,
            _ => 0,
        }
    }

    pub fn forest_with(trees: u8) -> LandType {
        match trees {
            0 => LandType::Brush,
            1 => LandType::LightForest,
            2 => LandType::MediumForest,
            _ => LandType::DenseForest,
        }
    }

    pub fn is_forest(self) -> bool {
        self.initial_trees() > 0
    }

    pub fn to_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<LandType> {
        LandType::ALL.get(v as usize).copied()
    }
}

/// Per-layer salts XORed into the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayerOffsets {
    pub elevation: u64,
    pub vegetation: u64,
    pub moisture: u64,
    pub settlement: u64,
    pub wind_x: u64,
    pub wind_y: u64,
}

impl Default for LayerOffsets {
    fn default() -> Self {
        Self {
            elevation: 0x0E1E,
            vegetation: 0x0FE6,
            moisture: 0x0401,
            settlement: 0x05E7,
            wind_x: 0x0A1D,
            wind_y: 0x0B1D,
        }
    }
}

/// Noise cut points. All values are on the raw `[-1, 1]` noise scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Vegetation noise above `vegetation[k]` gives `k + 1` trees.
    pub vegetation: [f64; 3],
    /// Elevation noise below this is water.
    pub water: f64,
    /// Elevation noise above this is bare rock.
    pub rock: f64,
    /// Settlement noise above this is a building.
    pub settlement: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            vegetation: [-0.2, 0.15, 0.5],
            water: -0.55,
            rock: 0.6,
            settlement: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub octaves: u32,
    /// Cycles per cell of the lowest octave.
    pub base_frequency: f64,
    pub layer_offsets: LayerOffsets,
    pub thresholds: Thresholds,
    pub civilian_count: u32,
    /// Meters per unit of normalized elevation; informational only.
    pub elevation_scale: f64,
    /// Largest `width * height` the generator accepts.
    pub max_cells: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            width: 64,
            height: 64,
            octaves: 4,
            base_frequency: 1.0 / 64.0,
            layer_offsets: LayerOffsets::default(),
            thresholds: Thresholds::default(),
            civilian_count: 0,
            elevation_scale: 100.0,
            max_cells: 16_000_000,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("refusing to generate {width}x{height} map: exceeds cell budget of {budget}")]
    TooLarge { width: usize, height: usize, budget: usize },
    #[error("cannot place {requested} civilians: no passable land cells")]
    NoRoomForCivilians { requested: u32 },
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidConfig(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return bad("width and height must be at least 1");
        }
        if self.octaves == 0 {
            return bad("octaves must be at least 1");
        }
        if !(self.base_frequency > 0.0 && self.base_frequency.is_finite()) {
            return bad("base_frequency must be positive");
        }
        let v = self.thresholds.vegetation;
        if !(v[0] < v[1] && v[1] < v[2]) {
            return bad("vegetation cut points must be strictly increasing");
        }
        if self.thresholds.water >= self.thresholds.rock {
            return bad("water threshold must be below rock threshold");
        }
        match self.width.checked_mul(self.height) {
            Some(n) if n <= self.max_cells => Ok(()),
            _ => Err(GenError::TooLarge {
                width: self.width,
                height: self.height,
                budget: self.max_cells,
            }),
        }
    }
}

/// Raw noise readings for one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellNoise {
    pub elevation: f64,
    pub vegetation: f64,
    pub moisture: f64,
    pub settlement: f64,
}

/// Maps noise readings to a land type and its tree count.
///
/// Precedence: water, then building, then rock, then vegetation density.
/// Moisture is not consulted.
pub fn classify_land(n: CellNoise, cfg: &GenConfig) -> (LandType, u8) {
    let t = &cfg.thresholds;
    let land = if n.elevation < t.water {
        LandType::Water
    } else if n.settlement > t.settlement {
        LandType::Building
    } else if n.elevation > t.rock {
        LandType::Rock
    } else {
        let trees = t.vegetation.iter().filter(|&&cut| n.vegetation > cut).count();
        LandType::forest_with(trees as u8)
    };
    (land, land.initial_trees())
}

const CIVILIAN_STREAM: u64 = 0xC1C1;

/// Generates a complete world from `cfg`. No fires are lit.
pub fn generate_world(cfg: &GenConfig) -> Result<WorldMap, GenError> {
    cfg.validate()?;
    let (w, h) = (cfg.width, cfg.height);
    let lo = &cfg.layer_offsets;
    let elev = NoiseField::from_config(cfg, lo.elevation);
    let veg = NoiseField::from_config(cfg, lo.vegetation);
    let moist = NoiseField::from_config(cfg, lo.moisture);
    let settle = NoiseField::from_config(cfg, lo.settlement);
    let wind_x = NoiseField::from_config(cfg, lo.wind_x);
    let wind_y = NoiseField::from_config(cfg, lo.wind_y);

    struct Sampled {
        land: LandType,
        trees: u8,
        elevation: f64,
        moisture: f64,
        wind: [f64; 2],
    }

    let cells: Vec<Sampled> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            let n = CellNoise {
                elevation: elev.sample(x, y),
                vegetation: veg.sample(x, y),
                moisture: moist.sample(x, y),
                settlement: settle.sample(x, y),
            };
            let (land, trees) = classify_land(n, cfg);
            let mut wind = [wind_x.sample(x, y), wind_y.sample(x, y)];
            let mag = (wind[0] * wind[0] + wind[1] * wind[1]).sqrt();
            if mag > 1.0 {
                wind = [wind[0] / mag, wind[1] / mag];
            }
            Sampled {
                land,
                trees,
                elevation: (n.elevation + 1.0) * 0.5,
                moisture: (n.moisture + 1.0) * 0.5,
                wind,
            }
        })
        .collect();

    let mut world = WorldMap::blank(w, h, cfg.seed);
    for (i, s) in cells.into_iter().enumerate() {
        world.land[i] = s.land;
        world.trees[i] = s.trees;
        world.elevation[i] = s.elevation;
        world.moisture[i] = s.moisture;
        world.wind[i] = s.wind;
    }
    place_civilians(
        &mut world,
        cfg.civilian_count,
        &mut KeyedStream::new(cfg.seed, CIVILIAN_STREAM),
    )?;
    Ok(world)
}

/// Scatters `count` civilians over non-water cells without fire.
pub fn place_civilians(world: &mut WorldMap, count: u32, rng: &mut KeyedStream) -> Result<(), GenError> {
    if count == 0 {
        return Ok(());
    }
    let ok = |w: &WorldMap, i: usize| w.land[i] != LandType::Water && w.fire[i] == crate::fire::FireState::None;
    let n = world.len();
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..64 {
            let i = rng.below(n as u64) as usize;
            if ok(world, i) {
                world.civilians[i] += 1;
                placed = true;
                break;
            }
        }
        if !placed {
            let start = rng.below(n as u64) as usize;
            match (0..n).map(|k| (start + k) % n).find(|&i| ok(world, i)) {
                Some(i) => world.civilians[i] += 1,
                None => return Err(GenError::NoRoomForCivilians { requested: count }),
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(elevation: f64, vegetation: f64, settlement: f64) -> CellNoise {
        CellNoise {
            elevation,
            vegetation,
            moisture: 0.0,
            settlement,
        }
    }

    #[test]
    fn low_vegetation_is_brush() {
        let cfg = GenConfig::default();
        assert_eq!(classify_land(noise(0.0, -0.9, 0.0), &cfg), (LandType::Brush, 0));
    }

    #[test]
    fn high_vegetation_is_dense_forest() {
        let cfg = GenConfig::default();
        assert_eq!(classify_land(noise(0.0, 0.9, 0.0), &cfg), (LandType::DenseForest, 3));
    }

    #[test]
    fn precedence_matches_enumerated_table() {
        // Brute-force every combination of "above/below" for each threshold
        // and check against the precedence table written out by hand.
        let cfg = GenConfig::default();
        let t = &cfg.thresholds;
        let elev_probes = [t.water - 0.1, 0.0, t.rock + 0.1];
        let settle_probes = [0.0, t.settlement + 0.1];
        let veg_probes = [-0.9, 0.0, 0.3, 0.9];
        for &e in &elev_probes {
            for &s in &settle_probes {
                for (k, &v) in veg_probes.iter().enumerate() {
                    let (land, trees) = classify_land(noise(e, v, s), &cfg);
                    let expected = if e < t.water {
                        LandType::Water
                    } else if s > t.settlement {
                        LandType::Building
                    } else if e > t.rock {
                        LandType::Rock
                    } else {
                        [
                            LandType::Brush,
                            LandType::LightForest,
                            LandType::MediumForest,
                            LandType::DenseForest,
                        ][k]
                    };
                    assert_eq!(land, expected, "e={e} s={s} v={v}");
                    assert_eq!(trees, expected.initial_trees());
                }
            }
        }
    }

    #[test]
    fn settlement_beats_max_vegetation_but_not_water() {
        let cfg = GenConfig::default();
        assert_eq!(classify_land(noise(0.0, 1.0, 1.0), &cfg), (LandType::Building, 0));
        assert_eq!(classify_land(noise(-1.0, 1.0, 1.0), &cfg), (LandType::Water, 0));
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = GenConfig::default();
        cfg.width = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = GenConfig::default();
        cfg.thresholds.vegetation = [0.1, 0.1, 0.5];
        assert!(cfg.validate().is_err());
        let mut cfg = GenConfig::default();
        cfg.octaves = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn cell_budget_enforced() {
        let cfg = GenConfig {
            width: 5000,
            height: 5000,
            max_cells: 1_000_000,
            ..GenConfig::default()
        };
        assert!(matches!(generate_world(&cfg), Err(GenError::TooLarge { .. })));
    }

    #[test]
    fn water_threshold_at_floor_gives_no_water() {
        let mut cfg = GenConfig {
            width: 80,
            height: 80,
            ..GenConfig::default()
        };
        cfg.thresholds.water = -1.0;
        let w = generate_world(&cfg).unwrap();
        assert_eq!(w.land.iter().filter(|&&l| l == LandType::Water).count(), 0);
    }

    #[test]
    fn trees_match_land_type_everywhere() {
        let cfg = GenConfig {
            seed: 31,
            width: 120,
            height: 90,
            civilian_count: 25,
            ..GenConfig::default()
        };
        let w = generate_world(&cfg).unwrap();
        for i in 0..w.len() {
            assert_eq!(w.trees[i], w.land[i].initial_trees());
            assert!((0.0..=1.0).contains(&w.moisture[i]));
            assert!((0.0..=1.0).contains(&w.elevation[i]));
            let [a, b] = w.wind[i];
            assert!((a * a + b * b).sqrt() <= 1.0 + 1e-12);
            if w.civilians[i] > 0 {
                assert_ne!(w.land[i], LandType::Water);
            }
        }
        assert_eq!(w.total_civilians(), 25);
        assert!(w.revealed.iter().all(|r| !r));
        assert!(!w.has_active_fire());
    }

    #[test]
    fn moisture_salt_only_changes_moisture() {
        let base = GenConfig {
            seed: 8,
            width: 70,
            height: 50,
            ..GenConfig::default()
        };
        let mut other = base.clone();
        other.layer_offsets.moisture ^= 0xFFFF;
        let a = generate_world(&base).unwrap();
        let b = generate_world(&other).unwrap();
        assert_eq!(a.land, b.land);
        assert_eq!(a.trees, b.trees);
        assert_ne!(a.moisture, b.moisture);
    }

    #[test]
    fn terrain_is_mixed() {
        let cfg = GenConfig {
            seed: 3,
            width: 200,
            height: 200,
            ..GenConfig::default()
        };
        let w = generate_world(&cfg).unwrap();
        let forest = w.land.iter().filter(|l| l.is_forest()).count();
        assert!(forest > w.len() / 4, "forest fraction too low: {forest}");
    }

    #[test]
    fn default_thresholds_produce_every_land_type() {
        let mut seen = [0usize; 7];
        for seed in 0..4 {
            let w = generate_world(&GenConfig {
                seed,
                width: 160,
                height: 160,
                ..GenConfig::default()
            })
            .unwrap();
            for land in LandType::ALL {
                let n = w.land.iter().filter(|&&l| l == land).count();
                assert!(n < w.len() / 2, "seed {seed}: {land:?} covers {n} cells");
                seen[land.to_u8() as usize] += n;
            }
        }
        assert!(seen.iter().all(|&n| n > 0), "{seen:?}");
    }
}
