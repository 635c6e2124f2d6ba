//! Cellular-automaton wildfire model.
//!
//! Each burning (or freshly ignited) cell tries to ignite each flammable
//! 8-neighbor once per step. The trial succeeds when a keyed uniform draw
//! falls below `base_spread_rate * spread_probability`, where
//!
//! ```text
//! spread_probability = slope_factor * moisture_term * (wind_unit . dir_unit + 1)
//! ```
//!
//! The uniform is keyed by `(world seed, step, target, source)`, so the set
//! of ignitions does not depend on iteration order or thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::keyed_unit;
use crate::world::{Cell, WorldMap, NEIGHBORS_8};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum FireState {
    None,
    Ignited,
    Burning,
    Extinguishing,
    Extinguished,
}

impl FireState {
    pub fn to_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<FireState> {
        use FireState::*;
        [None, Ignited, Burning, Extinguishing, Extinguished]
            .get(v as usize)
            .copied()
    }

    /// Whether `self -> next` is a legal lifecycle edge. Water may cut
    /// `Ignited` straight to `Extinguishing`.
    pub fn can_transition_to(self, next: FireState) -> bool {
        use FireState::*;
        matches!(
            (self, next),
            (None, Ignited)
                | (Ignited, Burning)
                | (Ignited, Extinguishing)
                | (Burning, Extinguishing)
                | (Extinguishing, Extinguished)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoistureTermMode {
    /// `moisture / moisture_constant`, exactly as the published equation.
    Literal,
    /// `(1 - moisture) / moisture_constant`: wetter cells burn less.
    Attenuating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FireConfig {
    pub slope_gain: f64,
    pub slope_min: f64,
    pub slope_max: f64,
    pub moisture_constant: f64,
    pub moisture_term_mode: MoistureTermMode,
    pub base_spread_rate: f64,
    pub ignited_duration: u16,
    pub burning_tree_period: u16,
    pub extinguishing_duration: u16,
    pub wet_duration: u16,
    pub wet_spread_multiplier: f64,
}

impl Default for FireConfig {
    fn default() -> Self {
        Self {
            slope_gain: 4.0,
            slope_min: 0.25,
            slope_max: 4.0,
            moisture_constant: 2.0,
            moisture_term_mode: MoistureTermMode::Literal,
            base_spread_rate: 0.25,
            ignited_duration: 3,
            burning_tree_period: 5,
            extinguishing_duration: 4,
            wet_duration: 30,
            wet_spread_multiplier: 0.1,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FireError {
    #[error("invalid fire config: {0}")]
    InvalidConfig(&'static str),
    #[error("cells {src} and {dst} are not 8-neighbors")]
    NotAdjacent { src: Cell, dst: Cell },
}

impl FireConfig {
    pub fn validate(&self) -> Result<(), FireError> {
        if !(self.moisture_constant > 0.0) {
            return Err(FireError::InvalidConfig("moisture_constant must be positive"));
        }
        if self.ignited_duration == 0
            || self.burning_tree_period == 0
            || self.extinguishing_duration == 0
            || self.wet_duration == 0
        {
            return Err(FireError::InvalidConfig("durations must be at least 1"));
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.base_spread_rate) || !unit(self.wet_spread_multiplier) {
            return Err(FireError::InvalidConfig("multipliers must lie in [0, 1]"));
        }
        if self.slope_min > self.slope_max {
            return Err(FireError::InvalidConfig("slope_min exceeds slope_max"));
        }
        Ok(())
    }

    pub fn slope_factor(&self, elev_src: f64, elev_dst: f64) -> f64 {
        (1.0 + self.slope_gain * (elev_dst - elev_src)).clamp(self.slope_min, self.slope_max)
    }

    pub fn moisture_term(&self, moisture: f64) -> f64 {
        match self.moisture_term_mode {
            MoistureTermMode::Literal => moisture / self.moisture_constant,
            MoistureTermMode::Attenuating => (1.0 - moisture) / self.moisture_constant,
        }
    }
}

/// `wind_unit . dir_unit + 1`, or 1 when there is no wind.
pub fn wind_factor(wind: [f64; 2], dx: i32, dy: i32) -> f64 {
    let wm = (wind[0] * wind[0] + wind[1] * wind[1]).sqrt();
    if wm == 0.0 {
        return 1.0;
    }
    let dm = ((dx * dx + dy * dy) as f64).sqrt();
    (wind[0] * dx as f64 + wind[1] * dy as f64) / (wm * dm) + 1.0
}

/// Unscaled probability that fire at `src` spreads to `dst`.
pub fn spread_probability(src: Cell, dst: Cell, world: &WorldMap, cfg: &FireConfig) -> Result<f64, FireError> {
    let (dx, dy) = (dst.x - src.x, dst.y - src.y);
    if src.chebyshev(dst) != 1 || !world.in_bounds(src) || !world.in_bounds(dst) {
        return Err(FireError::NotAdjacent { src, dst });
    }
    let (si, di) = (world.index(src), world.index(dst));
    Ok(spread_probability_idx(world, cfg, si, di, dx, dy))
}

#[inline]
fn spread_probability_idx(world: &WorldMap, cfg: &FireConfig, si: usize, di: usize, dx: i32, dy: i32) -> f64 {
    let mut p = cfg.slope_factor(world.elevation[si], world.elevation[di])
        * cfg.moisture_term(world.moisture[di])
        * wind_factor(world.wind[si], dx, dy);
    if world.wet[di] > 0 {
        p *= cfg.wet_spread_multiplier;
    }
    p
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FireDelta {
    pub ignitions: Vec<Cell>,
    pub transitions: Vec<(Cell, FireState, FireState)>,
    pub trees_destroyed: u64,
}

impl FireDelta {
    pub fn is_empty(&self) -> bool {
        self.ignitions.is_empty() && self.transitions.is_empty() && self.trees_destroyed == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Sequential,
    Parallel,
}

#[inline]
fn ignition_draw(world: &WorldMap, dst: usize, src: usize) -> f64 {
    keyed_unit(&[world.seed, world.step, dst as u64, src as u64, 0xF1DE])
}

#[inline]
fn eligible_target(world: &WorldMap, di: usize) -> bool {
    world.fire[di] == FireState::None && world.is_flammable(di)
}

fn ignitions_from(world: &WorldMap, cfg: &FireConfig, si: usize, out: &mut Vec<usize>) {
    let src = world.cell(si);
    for &(dx, dy) in NEIGHBORS_8.iter() {
        let dst = src.offset(dx, dy);
        if !world.in_bounds(dst) {
            continue;
        }
        let di = world.index(dst);
        if !eligible_target(world, di) {
            continue;
        }
        let p = (cfg.base_spread_rate * spread_probability_idx(world, cfg, si, di, dx, dy)).clamp(0.0, 1.0);
        if ignition_draw(world, di, si) < p {
            out.push(di);
        }
    }
}

/// Cells that ignite this step, sorted by index.
pub fn compute_ignitions(world: &WorldMap, cfg: &FireConfig, mode: Evaluation) -> Vec<usize> {
    let mut hits = match mode {
        Evaluation::Sequential => {
            let mut out = Vec::new();
            for si in 0..world.len() {
                if world.is_active_fire(si) {
                    ignitions_from(world, cfg, si, &mut out);
                }
            }
            out
        }
        Evaluation::Parallel => (0..world.len())
            .into_par_iter()
            .with_min_len(4096)
            .filter(|&si| world.is_active_fire(si))
            .fold(Vec::new, |mut acc, si| {
                ignitions_from(world, cfg, si, &mut acc);
                acc
            })
            .reduce(Vec::new, |mut a, mut b| {
                a.append(&mut b);
                a
            }),
    };
    hits.sort_unstable();
    hits.dedup();
    hits
}

/// Advances the fire one step using the world's current step index.
pub fn fire_step(world: &mut WorldMap, cfg: &FireConfig) -> FireDelta {
    fire_step_with(world, cfg, Evaluation::Parallel)
}

pub fn fire_step_with(world: &mut WorldMap, cfg: &FireConfig, mode: Evaluation) -> FireDelta {
    let ignitions = compute_ignitions(world, cfg, mode);
    let mut delta = FireDelta::default();

    for i in 0..world.len() {
        if world.wet[i] > 0 {
            world.wet[i] -= 1;
        }
        let state = world.fire[i];
        if matches!(state, FireState::None | FireState::Extinguished) {
            continue;
        }
        let age = world.fire_age[i].saturating_add(1);
        world.fire_age[i] = age;
        let next = match state {
            FireState::Ignited if age >= cfg.ignited_duration => FireState::Burning,
            FireState::Burning if age % cfg.burning_tree_period == 0 => {
                if world.trees[i] > 0 {
                    world.trees[i] -= 1;
                    delta.trees_destroyed += 1;
                }
                if world.trees[i] == 0 {
                    FireState::Extinguishing
                } else {
                    state
                }
            }
            FireState::Extinguishing if age >= cfg.extinguishing_duration => FireState::Extinguished,
            _ => state,
        };
        if next != state {
            world.fire[i] = next;
            world.fire_age[i] = 0;
            delta.transitions.push((world.cell(i), state, next));
        }
    }

    for &i in &ignitions {
        world.fire[i] = FireState::Ignited;
        world.fire_age[i] = 0;
    }
    delta.ignitions = ignitions.into_iter().map(|i| world.cell(i)).collect();
    delta
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WaterPattern {
    Single(Cell),
    /// Sector with apex `origin`, axis pointing at `toward`.
    Cone {
        origin: Cell,
        toward: Cell,
        half_angle_deg: f64,
        range: f64,
    },
    /// Square of Chebyshev `radius` around `center`.
    Area {
        center: Cell,
        radius: i32,
    },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WaterReport {
    pub affected: Vec<Cell>,
    pub out_of_bounds: usize,
}

/// Cells covered by a pattern, in row-major order, ignoring map bounds.
pub fn pattern_cells(pattern: &WaterPattern) -> Vec<Cell> {
    match *pattern {
        WaterPattern::Single(c) => vec![c],
        WaterPattern::Area { center, radius } => {
            let mut v = Vec::new();
            for y in -radius..=radius {
                for x in -radius..=radius {
                    v.push(center.offset(x, y));
                }
            }
            v
        }
        WaterPattern::Cone {
            origin,
            toward,
            half_angle_deg,
            range,
        } => {
            let (ax, ay) = ((toward.x - origin.x) as f64, (toward.y - origin.y) as f64);
            let amag = (ax * ax + ay * ay).sqrt();
            if amag == 0.0 {
                return vec![origin];
            }
            let cos_half = half_angle_deg.to_radians().cos();
            let r = range.ceil() as i32;
            let mut v = Vec::new();
            for dy in -r..=r {
                for dx in -r..=r {
                    let (fx, fy) = (dx as f64, dy as f64);
                    let d2 = fx * fx + fy * fy;
                    if d2 == 0.0 {
                        v.push(origin);
                        continue;
                    }
                    if d2 > range * range + 1e-9 {
                        continue;
                    }
                    let dot = fx * ax + fy * ay;
                    if dot >= d2.sqrt() * amag * cos_half - 1e-9 {
                        v.push(origin.offset(dx, dy));
                    }
                }
            }
            v
        }
    }
}

/// Wets flammable cells and knocks down active fire in the pattern.
pub fn apply_water(world: &mut WorldMap, pattern: &WaterPattern, cfg: &FireConfig) -> WaterReport {
    let mut report = WaterReport::default();
    for c in pattern_cells(pattern) {
        if !world.in_bounds(c) {
            report.out_of_bounds += 1;
            continue;
        }
        let i = world.index(c);
        if world.is_flammable(i) {
            world.wet[i] = cfg.wet_duration;
        }
        if matches!(world.fire[i], FireState::Ignited | FireState::Burning) {
            world.fire[i] = FireState::Extinguishing;
            world.fire_age[i] = 0;
        }
        report.affected.push(c);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::LandType;

    fn forest(w: usize, h: usize) -> WorldMap {
        let mut world = WorldMap::blank(w, h, 77);
        for i in 0..world.len() {
            world.land[i] = LandType::DenseForest;
            world.trees[i] = 3;
        }
        world
    }

    #[test]
    fn opposing_wind_blocks_spread() {
        let mut w = forest(3, 3);
        let src = Cell::new(1, 1);
        let i = w.index(src);
        w.wind[i] = [-1.0, 0.0];
        let p = spread_probability(src, Cell::new(2, 1), &w, &FireConfig::default()).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn orthogonal_wind_is_neutral() {
        let mut w = forest(3, 3);
        let cfg = FireConfig::default();
        let src = Cell::new(1, 1);
        let i = w.index(src);
        w.wind[i] = [0.0, 0.7];
        let p = spread_probability(src, Cell::new(2, 1), &w, &cfg).unwrap();
        let expect = cfg.slope_factor(0.5, 0.5) * cfg.moisture_term(0.5);
        assert!((p - expect).abs() < 1e-15);
    }

    #[test]
    fn non_adjacent_is_an_error() {
        let w = forest(5, 5);
        let err = spread_probability(Cell::new(0, 0), Cell::new(2, 0), &w, &FireConfig::default());
        assert!(matches!(err, Err(FireError::NotAdjacent { .. })));
        let err = spread_probability(Cell::new(1, 1), Cell::new(1, 1), &w, &FireConfig::default());
        assert!(err.is_err());
    }

    #[test]
    fn attenuating_mode_flips_moisture() {
        let cfg = FireConfig {
            moisture_term_mode: MoistureTermMode::Attenuating,
            ..FireConfig::default()
        };
        assert!(cfg.moisture_term(0.9) < cfg.moisture_term(0.1));
    }

    #[test]
    fn no_fire_no_delta() {
        let mut w = forest(10, 10);
        let d = fire_step(&mut w, &FireConfig::default());
        assert!(d.is_empty());
    }

    #[test]
    fn isolated_fire_burns_out() {
        let mut w = WorldMap::blank(5, 5, 1);
        for i in 0..w.len() {
            w.land[i] = LandType::Rock;
        }
        let c = Cell::new(2, 2);
        w.set_land(c, LandType::DenseForest);
        w.ignite(c);
        let cfg = FireConfig::default();
        let mut destroyed = 0;
        for step in 0..100 {
            w.step = step;
            let d = fire_step(&mut w, &cfg);
            assert!(d.ignitions.is_empty());
            destroyed += d.trees_destroyed;
        }
        assert_eq!(w.fire[w.index(c)], FireState::Extinguished);
        assert_eq!(destroyed, 3);
        assert_eq!(w.trees[w.index(c)], 0);
    }

    #[test]
    fn water_on_brush_only_wets() {
        let mut w = WorldMap::blank(3, 3, 0);
        let cfg = FireConfig::default();
        let r = apply_water(&mut w, &WaterPattern::Single(Cell::new(1, 1)), &cfg);
        assert_eq!(r.affected, vec![Cell::new(1, 1)]);
        assert_eq!(w.wet[4], cfg.wet_duration);
        assert_eq!(w.fire[4], FireState::None);
    }

    #[test]
    fn water_on_burning_starts_extinguishing() {
        let mut w = forest(3, 3);
        w.fire[4] = FireState::Burning;
        apply_water(&mut w, &WaterPattern::Single(Cell::new(1, 1)), &FireConfig::default());
        assert_eq!(w.fire[4], FireState::Extinguishing);
    }

    #[test]
    fn out_of_bounds_water_is_counted() {
        let mut w = forest(3, 3);
        let r = apply_water(
            &mut w,
            &WaterPattern::Area {
                center: Cell::new(0, 0),
                radius: 1,
            },
            &FireConfig::default(),
        );
        assert_eq!(r.affected.len(), 4);
        assert_eq!(r.out_of_bounds, 5);
    }

    #[test]
    fn cone_matches_angle_brute_force() {
        let origin = Cell::new(10, 10);
        let toward = Cell::new(15, 10);
        let got = pattern_cells(&WaterPattern::Cone {
            origin,
            toward,
            half_angle_deg: 45.0,
            range: 3.0,
        });
        // Oracle: polar test with atan2 over the whole map.
        let mut expect = Vec::new();
        for y in 0..21 {
            for x in 0..21 {
                let (dx, dy) = ((x - 10) as f64, (y - 10) as f64);
                let r = (dx * dx + dy * dy).sqrt();
                let inside = r == 0.0 || (r <= 3.0 + 1e-9 && dy.atan2(dx).abs() <= 45f64.to_radians() + 1e-9);
                if inside {
                    expect.push(Cell::new(x, y));
                }
            }
        }
        assert_eq!(got, expect);
    }

    #[test]
    fn extinguished_is_absorbing() {
        let mut w = forest(5, 5);
        w.fire[12] = FireState::Extinguished;
        for i in 0..w.len() {
            if i != 12 {
                w.fire[i] = FireState::Burning;
            }
        }
        let cfg = FireConfig::default();
        for s in 0..50 {
            w.step = s;
            fire_step(&mut w, &cfg);
            assert_eq!(w.fire[12], FireState::Extinguished);
        }
    }
}
