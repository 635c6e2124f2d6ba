use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{find_level, level_names, Family, LevelInstance, LevelSpec, Roster, Zone};
use crate::rng::KeyedStream;
use crate::terrain::{generate_world, GenConfig, GenError, LandType};
use crate::world::{update_visibility, Agent, AgentId, AgentParams, Cell, WorldMap};

#[derive(Debug, Error)]
pub enum LevelError {
    #[error("unknown level {name:?}; valid levels: {valid}")]
    UnknownLevel { name: String, valid: String },
    #[error(transparent)]
    Generation(#[from] GenError),
    #[error("{level} (seed {seed}): could not place {what}")]
    Placement {
        level: &'static str,
        seed: u64,
        what: &'static str,
    },
}

/// Knobs a harness config may change for every level it builds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LevelOverrides {
    /// Seed and dimensions are replaced per level.
    pub gen: GenConfig,
    pub agents: AgentParams,
    pub max_steps: Option<u64>,
    /// Replaces the level's team.
    pub roster: Option<Roster>,
}

#[derive(Debug, Clone)]
pub struct BuiltLevel {
    pub instance: LevelInstance,
    pub world: WorldMap,
    pub agents: Vec<Agent>,
}

struct Placer<'a> {
    spec: &'static LevelSpec,
    seed: u64,
    world: &'a mut WorldMap,
    rng: KeyedStream,
    /// Largest land component, by index.
    reachable: Vec<bool>,
}

const TRIES: usize = 20_000;

impl<'a> Placer<'a> {
    fn fail(&self, what: &'static str) -> LevelError {
        LevelError::Placement {
            level: self.spec.name,
            seed: self.seed,
            what,
        }
    }

    fn random_cell(&mut self) -> Cell {
        let i = self.rng.below(self.world.len() as u64) as usize;
        self.world.cell(i)
    }

    fn square(&self, center: Cell, r: i32) -> Option<Vec<Cell>> {
        let mut v = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
        for dy in -r..=r {
            for dx in -r..=r {
                let c = center.offset(dx, dy);
                if !self.world.in_bounds(c) {
                    return None;
                }
                v.push(c);
            }
        }
        Some(v)
    }

    /// Random cell at Chebyshev distance `[lo, hi]` from `anchor` that
    /// satisfies `ok`. Widens the band if the first pass finds nothing.
    fn pick_near(&mut self, anchor: Cell, lo: i32, hi: i32, ok: &dyn Fn(&Placer, Cell) -> bool) -> Option<Cell> {
        for (lo, hi) in [(lo, hi), (lo / 2, hi * 2), (0, i32::MAX)] {
            let cands: Vec<Cell> = (0..self.world.len())
                .map(|i| self.world.cell(i))
                .filter(|&c| {
                    let d = c.chebyshev(anchor);
                    d >= lo && d <= hi && ok(self, c)
                })
                .collect();
            if !cands.is_empty() {
                let k = self.rng.below(cands.len() as u64) as usize;
                return Some(cands[k]);
            }
        }
        None
    }

    fn reachable(&self, c: Cell) -> bool {
        self.world.in_bounds(c) && self.reachable[self.world.index(c)]
    }

    fn label(&mut self, c: Cell) {
        let i = self.world.index(c);
        self.world.labeled[i] = true;
    }
}

/// Marks the largest 8-connected component of non-water cells.
fn largest_land_component(world: &WorldMap) -> Vec<bool> {
    let n = world.len();
    let mut comp = vec![u32::MAX; n];
    let mut best = (0usize, u32::MAX);
    let mut id = 0u32;
    let mut q = VecDeque::new();
    for s in 0..n {
        if comp[s] != u32::MAX || world.land[s] == LandType::Water {
            continue;
        }
        let mut size = 0;
        comp[s] = id;
        q.push_back(s);
        while let Some(i) = q.pop_front() {
            size += 1;
            for nb in world.neighbors(world.cell(i)) {
                let j = world.index(nb);
                if comp[j] == u32::MAX && world.land[j] != LandType::Water {
                    comp[j] = id;
                    q.push_back(j);
                }
            }
        }
        if size > best.0 {
            best = (size, id);
        }
        id += 1;
    }
    comp.iter().map(|&c| c == best.1 && best.0 > 0).collect()
}

fn list(cells: &[Cell]) -> String {
    cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
}

/// Builds the world, targets and roster for one level and seed.
pub fn build_level(name: &str, seed: u64, overrides: &LevelOverrides) -> Result<BuiltLevel, LevelError> {
    let spec = find_level(name).ok_or_else(|| LevelError::UnknownLevel {
        name: name.to_string(),
        valid: level_names().join("; "),
    })?;
    let gen = GenConfig {
        seed,
        width: spec.map_size,
        height: spec.map_size,
        civilian_count: 0,
        ..overrides.gen.clone()
    };
    let mut world = generate_world(&gen)?;
    let reachable = largest_land_component(&world);
    let mut p = Placer {
        spec,
        seed,
        world: &mut world,
        rng: KeyedStream::new(seed, 0x1E7E1),
        reachable,
    };
    let size = spec.map_size as i32;

    let muster = {
        let mut found = None;
        for _ in 0..TRIES {
            let c = p.random_cell();
            if p.reachable(c) {
                found = Some(c);
                break;
            }
        }
        found.ok_or_else(|| p.fail("muster point"))?
    };
    if spec.family == Family::ScoutFire {
        // Bare launch pad under the spawn area.
        for dy in -2..=2 {
            for dx in -2..=2 {
                let c = muster.offset(dx, dy);
                if p.world.in_bounds(c) {
                    p.world.set_land(c, LandType::Rock);
                }
            }
        }
    }

    let mut labeled_cells = Vec::new();
    let mut lines = Vec::new();
    let mut zone = None;
    let mut fire_origin = None;
    let mut civilian_cells = Vec::new();

    match spec.family {
        Family::CutSparse => {
            let target = spec.max_score.unwrap_or(0) as u64;
            let mut cands: Vec<Cell> = (0..p.world.len())
                .map(|i| p.world.cell(i))
                .filter(|&c| {
                    let d = c.chebyshev(muster);
                    p.reachable(c) && d >= 3 && d <= size / 2 && p.world.trees[p.world.index(c)] > 0
                })
                .collect();
            p.rng.shuffle(&mut cands);
            let mut sum = 0u64;
            for c in cands {
                if sum >= target {
                    break;
                }
                let i = p.world.index(c);
                let t = p.world.trees[i] as u64;
                if sum + t > target {
                    let rem = (target - sum) as u8;
                    p.world.set_land(c, LandType::forest_with(rem));
                }
                sum += p.world.trees[i] as u64;
                p.label(c);
                labeled_cells.push(c);
            }
            while sum < target {
                let ok = |pl: &Placer, c: Cell| {
                    let i = pl.world.index(c);
                    pl.reachable(c) && !pl.world.labeled[i] && pl.world.land[i] != LandType::Building
                };
                let c = p
                    .pick_near(muster, 3, size / 2, &ok)
                    .ok_or_else(|| p.fail("labeled cells"))?;
                let rem = (target - sum).min(3) as u8;
                p.world.set_land(c, LandType::forest_with(rem));
                sum += rem as u64;
                p.label(c);
                labeled_cells.push(c);
            }
        }
        Family::CutLines => {
            let (count, len) = if spec.map_size <= 30 { (2, 5) } else { (5, 7) };
            for _ in 0..count {
                let mut placed = false;
                for _ in 0..TRIES {
                    let start = p.random_cell();
                    let (dx, dy) = if p.rng.below(2) == 0 { (1, 0) } else { (0, 1) };
                    let cells: Vec<Cell> = (0..len).map(|k| start.offset(dx * k, dy * k)).collect();
                    let ok = cells.iter().all(|&c| {
                        if !p.reachable(c) {
                            return false;
                        }
                        let i = p.world.index(c);
                        let d = c.chebyshev(muster);
                        p.world.land[i] != LandType::Building
                            && d >= 3
                            && d <= size / 2
                            && !p
                                .world
                                .neighbors(c)
                                .chain([c])
                                .any(|n| p.world.labeled[p.world.index(n)])
                    });
                    if ok {
                        for &c in &cells {
                            p.world.set_land(c, LandType::DenseForest);
                            p.label(c);
                        }
                        labeled_cells.extend(cells.iter().copied());
                        lines.push((cells[0], cells[cells.len() - 1]));
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(p.fail("labeled line"));
                }
            }
        }
        Family::Transport | Family::RescueKnown | Family::SearchRescue | Family::SearchRescueTransport => {
            let ground = spec.family != Family::Transport;
            let ok = move |pl: &Placer, c: Cell| match pl.square(c, 2) {
                Some(cells) => cells.iter().all(|&n| {
                    let i = pl.world.index(n);
                    pl.world.land[i] != LandType::Water && (!ground || pl.reachable[i])
                }),
                None => false,
            };
            let center = p
                .pick_near(muster, size / 4, size / 2, &ok)
                .ok_or_else(|| p.fail("target zone"))?;
            let z = Zone { center, radius: 2 };
            for c in p.square(center, 2).expect("checked in bounds") {
                p.label(c);
            }
            zone = Some(z);
            if spec.family.is_rescue() {
                for _ in 0..spec.civilians {
                    let ok = |pl: &Placer, c: Cell| {
                        let i = pl.world.index(c);
                        pl.reachable[i] && !z.contains(c) && pl.world.civilians[i] == 0
                    };
                    let c = p
                        .pick_near(center, 3, (size / 4).max(4), &ok)
                        .ok_or_else(|| p.fail("civilians"))?;
                    let i = p.world.index(c);
                    p.world.civilians[i] = 1;
                    civilian_cells.push(c);
                }
            }
        }
        Family::ScoutFire
        | Family::Extinguish
        | Family::Contain
        | Family::LocateSuppress
        | Family::LocateDeploySuppress
        | Family::FullEnvironment => {
            let patch = match spec.family {
                Family::ScoutFire => 4,
                Family::FullEnvironment => 3,
                _ => 2,
            };
            let ok = move |pl: &Placer, c: Cell| pl.square(c, patch).is_some();
            let origin = p
                .pick_near(muster, size / 4, size / 2, &ok)
                .ok_or_else(|| p.fail("fire"))?;
            for c in p.square(origin, patch).expect("checked in bounds") {
                p.world.set_land(c, LandType::DenseForest);
            }
            p.world.ignite(origin);
            fire_origin = Some(origin);
            if spec.family == Family::FullEnvironment {
                let zok = |pl: &Placer, c: Cell| match pl.square(c, 2) {
                    Some(cells) => cells.iter().all(|&n| pl.reachable(n)) && c.chebyshev(origin) > size / 4,
                    None => false,
                };
                let center = p
                    .pick_near(muster, size / 8, size / 4, &zok)
                    .ok_or_else(|| p.fail("safe zone"))?;
                for c in p.square(center, 2).expect("checked in bounds") {
                    p.label(c);
                }
                let z = Zone { center, radius: 2 };
                zone = Some(z);
                for _ in 0..spec.civilians {
                    let ok = |pl: &Placer, c: Cell| {
                        let i = pl.world.index(c);
                        pl.reachable[i] && c.chebyshev(origin) > patch && !z.contains(c) && pl.world.civilians[i] == 0
                    };
                    let c = p
                        .pick_near(origin, patch + 2, size / 5, &ok)
                        .ok_or_else(|| p.fail("civilians"))?;
                    let i = p.world.index(c);
                    p.world.civilians[i] = 1;
                    civilian_cells.push(c);
                }
            }
        }
    }

    // Spawn around the muster point; ground agents only on reachable land.
    let roster = overrides.roster.unwrap_or(spec.roster);
    let mut agents = Vec::with_capacity(roster.total() as usize);
    for (k, kind) in roster.kinds().into_iter().enumerate() {
        let mut pos = muster;
        for _ in 0..64 {
            let c = muster.offset(p.rng.below(5) as i32 - 2, p.rng.below(5) as i32 - 2);
            if p.reachable(c) && !p.world.labeled[p.world.index(c)] {
                pos = c;
                break;
            }
        }
        agents.push(Agent::new(AgentId(k as u32 + 1), kind, pos, &overrides.agents));
    }

    let task = task_text(
        spec,
        &p,
        muster,
        &lines,
        zone,
        fire_origin,
        &labeled_cells,
        &civilian_cells,
    );
    drop(p);
    update_visibility(&mut world, &agents);

    let instance = LevelInstance {
        spec,
        seed,
        max_steps: overrides.max_steps.unwrap_or_else(|| spec.default_max_steps()),
        task,
        muster,
        labeled_cells,
        lines,
        zone,
        fire_origin,
        civilian_cells,
        initial_trees: world.total_trees(),
        initial_civilians: world.total_civilians(),
    };
    Ok(BuiltLevel {
        instance,
        world,
        agents,
    })
}

#[allow(clippy::too_many_arguments)]
fn task_text(
    spec: &LevelSpec,
    p: &Placer,
    muster: Cell,
    lines: &[(Cell, Cell)],
    zone: Option<Zone>,
    fire: Option<Cell>,
    labeled: &[Cell],
    civilians: &[Cell],
) -> String {
    let mut s = format!(
        "{}. The map is {} by {} cells and the team starts near {}.",
        spec.objective, p.world.width, p.world.height, muster
    );
    match spec.family {
        Family::CutSparse => {
            s += &format!(" The labeled cells are at: {}.", list(labeled));
        }
        Family::CutLines => {
            let ls: Vec<String> = lines.iter().map(|(a, b)| format!("{a} to {b}")).collect();
            s += &format!(" The labeled lines run from {}.", ls.join("; "));
        }
        Family::Extinguish | Family::Contain => {
            if let Some(f) = fire {
                s += &format!(" The fire is at {f}.");
            }
        }
        _ => {}
    }
    if let Some(z) = zone {
        s += &format!(
            " The target location is the area within {} cells of {}.",
            z.radius, z.center
        );
    }
    if spec.family == Family::RescueKnown {
        s += &format!(" The civilians are at: {}.", list(civilians));
    }
    s
}
