//! A full-information scripted team. It reads the true world state, so it
//! serves as the realizability check for finite levels and as the policy
//! behind the omniscient mock language model.

use std::collections::HashMap;

use super::{score, termination, BuiltLevel, Family, LevelInstance, Score, ScoreTracker};
use crate::fire::{FireConfig, FireState};
use crate::world::path::ground_passable;
use crate::world::{near_water, world_step, Agent, AgentId, AgentKind, AgentParams, Cell, Primitive, WorldMap};

#[derive(Debug, Clone, Default)]
pub struct Solver {
    /// Labeled or civilian cell index claimed by an agent.
    claims: HashMap<AgentId, usize>,
    /// Line index owned by a bulldozer.
    line_owner: HashMap<AgentId, usize>,
}

fn nearest(from: Cell, cands: impl Iterator<Item = (usize, Cell)>) -> Option<(usize, Cell)> {
    cands.min_by_key(|&(i, c)| (from.chebyshev(c), i))
}

fn line_cells(a: Cell, b: Cell) -> Vec<Cell> {
    let (dx, dy) = ((b.x - a.x).signum(), (b.y - a.y).signum());
    let n = a.chebyshev(b);
    (0..=n).map(|k| a.offset(dx * k, dy * k)).collect()
}

impl Solver {
    pub fn new() -> Self {
        Self::default()
    }

    /// The primitive each listed agent should be running now. Agents not
    /// listed are left alone. Re-issuing a running primitive is harmless.
    pub fn decide(
        &mut self,
        level: &LevelInstance,
        world: &WorldMap,
        agents: &[Agent],
        params: &AgentParams,
    ) -> Vec<(AgentId, Primitive)> {
        self.claims
            .retain(|id, _| agents.iter().any(|a| a.id == *id && a.can_act()));
        match level.family() {
            Family::CutSparse | Family::CutLines => self.cut(level, world, agents),
            Family::ScoutFire => scout(world, agents),
            Family::Transport => transport(level, world, agents, params),
            Family::RescueKnown | Family::SearchRescue | Family::SearchRescueTransport => {
                self.rescue(level, world, agents)
            }
            _ => suppress(world, agents, params),
        }
    }

    fn cut(&mut self, level: &LevelInstance, world: &WorldMap, agents: &[Agent]) -> Vec<(AgentId, Primitive)> {
        let mut out = Vec::new();
        let has_trees = |c: &Cell| world.trees[world.index(*c)] > 0;

        // Bulldozers take whole lines and plow them one cell at a time.
        for a in agents.iter().filter(|a| a.kind == AgentKind::Bulldozer && a.can_act()) {
            let owned = self.line_owner.get(&a.id).copied();
            let line = match owned {
                Some(l) if line_cells(level.lines[l].0, level.lines[l].1).iter().any(has_trees) => l,
                _ => {
                    let taken: Vec<usize> = self.line_owner.values().copied().collect();
                    let free = level
                        .lines
                        .iter()
                        .enumerate()
                        .filter(|(l, (s, e))| !taken.contains(l) && line_cells(*s, *e).iter().any(has_trees));
                    match free.min_by_key(|(l, (s, _))| (a.pos.chebyshev(*s), *l)) {
                        Some((l, _)) => {
                            self.line_owner.insert(a.id, l);
                            l
                        }
                        None => continue,
                    }
                }
            };
            let cells = line_cells(level.lines[line].0, level.lines[line].1);
            // First cell still standing; everything before it is clear.
            let Some(k) = cells.iter().position(has_trees) else {
                continue;
            };
            let prim = match cells.iter().position(|&c| c == a.pos) {
                Some(j) if j < k => Primitive::DriveClearPath(cells[k]),
                Some(j) if j == k && k + 1 < cells.len() => Primitive::DriveClearPath(cells[k + 1]),
                Some(j) if j == k => Primitive::DriveClearPath(cells[k - 1]),
                _ => Primitive::DriveNoCut(cells[k]),
            };
            out.push((a.id, prim));
        }

        let plowed: Vec<Cell> = self
            .line_owner
            .values()
            .flat_map(|&l| line_cells(level.lines[l].0, level.lines[l].1))
            .collect();
        self.claims.retain(|_, &mut i| world.trees[i] > 0);
        for a in agents
            .iter()
            .filter(|a| a.kind == AgentKind::Firefighter && a.can_act())
        {
            let target = match self.claims.get(&a.id) {
                Some(&i) => i,
                None => {
                    let claimed: Vec<usize> = self.claims.values().copied().collect();
                    let cands = level
                        .labeled_cells
                        .iter()
                        .map(|&c| (world.index(c), c))
                        .filter(|(i, c)| world.trees[*i] > 0 && !claimed.contains(i) && !plowed.contains(c));
                    match nearest(a.pos, cands) {
                        Some((i, _)) => {
                            self.claims.insert(a.id, i);
                            i
                        }
                        None => continue,
                    }
                }
            };
            let c = world.cell(target);
            let prim = if a.pos == c {
                Primitive::CutAllTrees
            } else {
                Primitive::MoveToLocation(c)
            };
            out.push((a.id, prim));
        }
        out
    }

    fn rescue(&mut self, level: &LevelInstance, world: &WorldMap, agents: &[Agent]) -> Vec<(AgentId, Primitive)> {
        let Some(zone) = level.zone else {
            return Vec::new();
        };
        let mut out = Vec::new();
        self.claims
            .retain(|id, &mut i| world.civilians[i] > 0 && agents.iter().any(|a| a.id == *id && !a.carrying_civilian));
        for a in agents
            .iter()
            .filter(|a| a.kind == AgentKind::Firefighter && a.can_act())
        {
            if a.carrying_civilian {
                let prim = if world.labeled[world.index(a.pos)] {
                    Primitive::DropOffCivilian
                } else {
                    Primitive::MoveToLocation(zone.center)
                };
                out.push((a.id, prim));
                continue;
            }
            let target = match self.claims.get(&a.id) {
                Some(&i) => i,
                None => {
                    let mut taken: HashMap<usize, u16> = HashMap::new();
                    for &i in self.claims.values() {
                        *taken.entry(i).or_default() += 1;
                    }
                    let cands = (0..world.len())
                        .filter(|&i| world.civilians[i] > taken.get(&i).copied().unwrap_or(0))
                        .filter(|&i| !world.labeled[i])
                        .map(|i| (i, world.cell(i)));
                    match nearest(a.pos, cands) {
                        Some((i, _)) => {
                            self.claims.insert(a.id, i);
                            i
                        }
                        None => continue,
                    }
                }
            };
            let c = world.cell(target);
            let prim = if a.pos == c {
                Primitive::PickUpCivilian
            } else {
                Primitive::MoveToLocation(c)
            };
            out.push((a.id, prim));
        }
        out
    }
}

fn active_fire_cells(world: &WorldMap) -> impl Iterator<Item = (usize, Cell)> + '_ {
    (0..world.len())
        .filter(|&i| world.is_active_fire(i))
        .map(|i| (i, world.cell(i)))
}

fn scout(world: &WorldMap, agents: &[Agent]) -> Vec<(AgentId, Primitive)> {
    let mut out = Vec::new();
    for a in agents.iter().filter(|a| a.kind == AgentKind::Drone && a.can_act()) {
        if world.is_active_fire(world.index(a.pos)) {
            continue;
        }
        // Prefer cells that will stay alight longest.
        let best = active_fire_cells(world).min_by_key(|&(i, c)| {
            let ignited = world.fire[i] == FireState::Ignited;
            (!ignited, 3 - world.trees[i], a.pos.chebyshev(c), i)
        });
        if let Some((_, c)) = best {
            out.push((a.id, Primitive::FlyToLocation(c)));
        }
    }
    out
}

fn transport(
    level: &LevelInstance,
    world: &WorldMap,
    agents: &[Agent],
    params: &AgentParams,
) -> Vec<(AgentId, Primitive)> {
    let Some(zone) = level.zone else {
        return Vec::new();
    };
    let waiting: Vec<Cell> = agents
        .iter()
        .filter(|f| f.kind == AgentKind::Firefighter && f.can_act() && !world.labeled[world.index(f.pos)])
        .map(|f| f.pos)
        .collect();
    let mut out = Vec::new();
    for h in agents.iter().filter(|a| a.kind == AgentKind::Helicopter && a.can_act()) {
        let prim = if !h.passengers.is_empty() {
            if h.pos == zone.center {
                Primitive::DropOffFirefighters
            } else {
                Primitive::FlyToLocation(zone.center)
            }
        } else if waiting.iter().any(|&p| p.chebyshev(h.pos) <= params.boarding_radius) {
            Primitive::PickUpFirefighters
        } else if let Some((_, c)) = nearest(h.pos, waiting.iter().map(|&c| (world.index(c), c))) {
            Primitive::FlyToLocation(c)
        } else {
            continue;
        };
        out.push((h.id, prim));
    }
    out
}

/// A plain spray-and-refill heuristic for the open-ended levels.
fn suppress(world: &WorldMap, agents: &[Agent], params: &AgentParams) -> Vec<(AgentId, Primitive)> {
    let mut out = Vec::new();
    let water_cells = || {
        (0..world.len())
            .filter(|&i| world.land[i] == crate::terrain::LandType::Water)
            .map(|i| (i, world.cell(i)))
    };
    for a in agents.iter().filter(|a| a.can_act()) {
        let fire = nearest(a.pos, active_fire_cells(world));
        let prim = match a.kind {
            AgentKind::Drone => match fire {
                Some((_, c)) if c != a.pos => Primitive::FlyToLocation(c),
                _ => continue,
            },
            AgentKind::Helicopter => {
                if a.water == 0 {
                    if near_water(world, a.pos) {
                        Primitive::RefillWater
                    } else if let Some((_, c)) = nearest(a.pos, water_cells()) {
                        Primitive::FlyToLocation(c)
                    } else {
                        continue;
                    }
                } else {
                    match fire {
                        Some((_, c)) if c == a.pos => Primitive::DropWater,
                        Some((_, c)) => Primitive::FlyToLocation(c),
                        None => continue,
                    }
                }
            }
            AgentKind::Firefighter => {
                if a.water == 0 {
                    if near_water(world, a.pos) {
                        Primitive::RefillWater
                    } else {
                        let shore = (0..world.len())
                            .filter(|&i| world.land[i] != crate::terrain::LandType::Water)
                            .map(|i| (i, world.cell(i)))
                            .filter(|&(_, c)| ground_passable(world, c) && near_water(world, c));
                        match nearest(a.pos, shore) {
                            Some((_, c)) => Primitive::MoveToLocation(c),
                            None => continue,
                        }
                    }
                } else {
                    let Some((_, f)) = fire else { continue };
                    let d = a.pos.chebyshev(f);
                    if d >= 1 && (d as f64) <= params.spray_range {
                        Primitive::SprayWaterCone(f)
                    } else {
                        let stand = world
                            .neighbors(f)
                            .flat_map(|n| world.neighbors(n).collect::<Vec<_>>())
                            .filter(|&c| c.chebyshev(f) == 2)
                            .filter(|&c| ground_passable(world, c) && world.fire[world.index(c)] == FireState::None)
                            .min_by_key(|&c| (a.pos.chebyshev(c), world.index(c)));
                        match stand {
                            Some(c) => Primitive::MoveToLocation(c),
                            None => continue,
                        }
                    }
                }
            }
            AgentKind::Bulldozer => continue,
        };
        out.push((a.id, prim));
    }
    out
}

/// Runs the solver to termination and returns the final score.
pub fn solve_episode(built: &mut BuiltLevel, params: &AgentParams, fire_cfg: &FireConfig) -> Score {
    let mut solver = Solver::new();
    let mut tracker = ScoreTracker::default();
    tracker.refresh(&built.world, &built.agents);
    let mut t = 0;
    loop {
        let s = score(&built.instance, &tracker);
        if termination(&built.instance, &built.world, &built.agents, &s, t).is_some() {
            return s;
        }
        for (id, prim) in solver.decide(&built.instance, &built.world, &built.agents, params) {
            if let Some(i) = crate::world::agent_index(&built.agents, id) {
                built.agents[i].activate(prim);
            }
        }
        let outcome = world_step(&mut built.world, &mut built.agents, params, fire_cfg);
        tracker.observe(&outcome, &built.world, &built.agents);
        t += 1;
    }
}
