//! One simulation tick: emit low-level actions from active primitives,
//! resolve them in agent-id order, advance the fire, apply losses, and
//! refresh visibility.

use serde::{Deserialize, Serialize};

use super::path::{passable, plan_path};
use super::{agent_index, Agent, AgentId, AgentKind, AgentParams, Cell, Primitive, WorldMap};
use crate::fire::{apply_water, fire_step, FireConfig, FireDelta, FireState, WaterPattern};
use crate::terrain::LandType;

/// A single tick's worth of work for one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LowLevelAction {
    Idle,
    /// Waiting out a movement cooldown.
    Wait,
    Move {
        path: Vec<Cell>,
        clear: bool,
    },
    Cut {
        cell: Cell,
    },
    Spray {
        toward: Cell,
    },
    PickUpCivilian,
    DropOffCivilian,
    PickUpFirefighters,
    DropOffFirefighters,
    Refill,
    DropWater,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub action: LowLevelAction,
    pub completed: bool,
    pub failure: Option<String>,
}

impl Emission {
    fn ongoing(action: LowLevelAction) -> Self {
        Self {
            action,
            completed: false,
            failure: None,
        }
    }

    fn done(action: LowLevelAction) -> Self {
        Self {
            action,
            completed: true,
            failure: None,
        }
    }

    fn abort(reason: &str) -> Self {
        Self {
            action: LowLevelAction::Idle,
            completed: true,
            failure: Some(reason.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    TreeCut {
        agent: AgentId,
        cell: Cell,
        labeled: bool,
    },
    AgentLost {
        agent: AgentId,
        cell: Cell,
    },
    CivilianLost {
        cell: Cell,
        count: u32,
    },
    CivilianPickedUp {
        agent: AgentId,
        cell: Cell,
    },
    CivilianDroppedOff {
        agent: AgentId,
        cell: Cell,
    },
    CivilianRescued {
        agent: AgentId,
        cell: Cell,
    },
    FirefightersBoarded {
        helicopter: AgentId,
        firefighters: Vec<AgentId>,
    },
    FirefightersUnloaded {
        helicopter: AgentId,
        firefighters: Vec<AgentId>,
        cell: Cell,
    },
    WaterSprayed {
        agent: AgentId,
        cells: usize,
    },
    WaterDropped {
        agent: AgentId,
        cells: usize,
    },
    Refilled {
        agent: AgentId,
    },
    PrimitiveCompleted {
        agent: AgentId,
        primitive: String,
    },
    PrimitiveAborted {
        agent: AgentId,
        primitive: String,
        reason: String,
    },
    NoOp {
        agent: AgentId,
        reason: String,
    },
}

/// Cumulative counters over an episode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventTally {
    pub trees_cut: u64,
    pub trees_cut_labeled: u64,
    pub trees_destroyed: u64,
    pub agents_lost: u64,
    pub civilians_lost: u64,
    pub civilians_rescued: u64,
    pub water_used: u64,
}

impl EventTally {
    pub fn absorb(&mut self, events: &[Event], fire: &FireDelta) {
        self.trees_destroyed += fire.trees_destroyed;
        for e in events {
            match e {
                Event::TreeCut { labeled, .. } => {
                    self.trees_cut += 1;
                    if *labeled {
                        self.trees_cut_labeled += 1;
                    }
                }
                Event::AgentLost { .. } => self.agents_lost += 1,
                Event::CivilianLost { count, .. } => self.civilians_lost += *count as u64,
                Event::CivilianRescued { .. } => self.civilians_rescued += 1,
                Event::WaterSprayed { .. } | Event::WaterDropped { .. } => self.water_used += 1,
                _ => {}
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepOutcome {
    pub events: Vec<Event>,
    pub fire: FireDelta,
}

/// Ticks after which any primitive is forcibly aborted.
pub fn primitive_tick_limit(world: &WorldMap) -> u32 {
    (world.len() as u64 * 4).min(u32::MAX as u64) as u32
}

/// On or next to a water cell.
pub fn near_water(world: &WorldMap, c: Cell) -> bool {
    std::iter::once(c)
        .chain(world.neighbors(c))
        .any(|n| world.land[world.index(n)] == LandType::Water)
}

fn movement(agent: &Agent, world: &WorldMap, params: &AgentParams, target: Cell, clear: bool) -> Emission {
    if agent.pos == target {
        return Emission::done(LowLevelAction::Idle);
    }
    if !world.in_bounds(target) {
        return Emission::abort("target out of bounds");
    }
    if agent.move_cooldown > 0 {
        return Emission::ongoing(LowLevelAction::Wait);
    }
    let kp = params.kind(agent.kind);
    let mut path = Vec::with_capacity(kp.move_cells as usize);
    let mut cur = agent.pos;
    for _ in 0..kp.move_cells.max(1) {
        match plan_path(world, agent.kind, cur, target) {
            Some(next) => {
                path.push(next);
                cur = next;
                if cur == target {
                    break;
                }
            }
            None if path.is_empty() => return Emission::abort("unreachable"),
            None => break,
        }
    }
    let completed = cur == target;
    Emission {
        action: LowLevelAction::Move { path, clear },
        completed,
        failure: None,
    }
}

/// The low-level action an agent's active primitive produces this tick.
pub fn execute_primitive(agent: &Agent, world: &WorldMap, params: &AgentParams) -> Emission {
    let Some(active) = &agent.active else {
        return Emission::done(LowLevelAction::Idle);
    };
    if !agent.can_act() {
        return Emission::abort("agent cannot act");
    }
    if active.ticks >= primitive_tick_limit(world) {
        return Emission::abort("tick limit exceeded");
    }
    let here = world.index(agent.pos);
    match active.primitive {
        Primitive::MoveToLocation(t) | Primitive::FlyToLocation(t) | Primitive::DriveNoCut(t) => {
            movement(agent, world, params, t, false)
        }
        Primitive::DriveClearPath(t) => movement(agent, world, params, t, true),
        Primitive::CutTrees(n) => {
            let trees = world.trees[here];
            if trees == 0 || active.progress >= n {
                Emission::done(LowLevelAction::Idle)
            } else {
                Emission {
                    action: LowLevelAction::Cut { cell: agent.pos },
                    completed: active.progress + 1 >= n || trees == 1,
                    failure: None,
                }
            }
        }
        Primitive::CutAllTrees => match world.trees[here] {
            0 => Emission::done(LowLevelAction::Idle),
            t => Emission {
                action: LowLevelAction::Cut { cell: agent.pos },
                completed: t == 1,
                failure: None,
            },
        },
        Primitive::PickUpCivilian => Emission::done(LowLevelAction::PickUpCivilian),
        Primitive::DropOffCivilian => Emission::done(LowLevelAction::DropOffCivilian),
        Primitive::SprayWaterCone(t) => Emission::done(LowLevelAction::Spray { toward: t }),
        Primitive::RefillWater => Emission::done(LowLevelAction::Refill),
        Primitive::PickUpFirefighters => Emission::done(LowLevelAction::PickUpFirefighters),
        Primitive::DropOffFirefighters => Emission::done(LowLevelAction::DropOffFirefighters),
        Primitive::DropWater => Emission::done(LowLevelAction::DropWater),
        Primitive::Idle => Emission::done(LowLevelAction::Idle),
    }
}

fn clear_cell(world: &mut WorldMap, agent: AgentId, c: Cell, events: &mut Vec<Event>) {
    let i = world.index(c);
    let labeled = world.labeled[i];
    for _ in 0..world.trees[i] {
        events.push(Event::TreeCut {
            agent,
            cell: c,
            labeled,
        });
    }
    world.trees[i] = 0;
    if world.land[i] == LandType::Brush {
        world.land[i] = LandType::Rock;
    }
}

fn noop(events: &mut Vec<Event>, agent: AgentId, reason: &str) {
    events.push(Event::NoOp {
        agent,
        reason: reason.to_string(),
    });
}

fn resolve(
    idx: usize,
    action: &LowLevelAction,
    world: &mut WorldMap,
    agents: &mut [Agent],
    params: &AgentParams,
    fire_cfg: &FireConfig,
    events: &mut Vec<Event>,
) {
    let id = agents[idx].id;
    let kind = agents[idx].kind;
    let pos = agents[idx].pos;
    match action {
        LowLevelAction::Idle => {}
        LowLevelAction::Wait => {
            let a = &mut agents[idx];
            a.move_cooldown = a.move_cooldown.saturating_sub(1);
        }
        LowLevelAction::Move { path, clear } => {
            if path.iter().any(|&c| !passable(world, kind, c)) {
                noop(events, id, "path blocked");
                return;
            }
            if *clear {
                clear_cell(world, id, pos, events);
                for &c in path {
                    clear_cell(world, id, c, events);
                }
            }
            let dest = *path.last().unwrap_or(&pos);
            let a = &mut agents[idx];
            a.pos = dest;
            a.plow_lowered = *clear;
            a.move_cooldown = params.kind(kind).move_period.saturating_sub(1);
            let riders = a.passengers.clone();
            for r in riders {
                if let Some(ri) = agent_index(agents, r) {
                    agents[ri].pos = dest;
                }
            }
        }
        LowLevelAction::Cut { cell } => {
            let i = world.index(*cell);
            if world.trees[i] > 0 {
                world.trees[i] -= 1;
                events.push(Event::TreeCut {
                    agent: id,
                    cell: *cell,
                    labeled: world.labeled[i],
                });
            } else {
                noop(events, id, "no tree left to cut");
            }
        }
        LowLevelAction::Spray { toward } => {
            if agents[idx].water == 0 {
                noop(events, id, "out of water");
                return;
            }
            agents[idx].water -= 1;
            let pattern = WaterPattern::Cone {
                origin: pos,
                toward: *toward,
                half_angle_deg: params.spray_half_angle_deg,
                range: params.spray_range,
            };
            let r = apply_water(world, &pattern, fire_cfg);
            events.push(Event::WaterSprayed {
                agent: id,
                cells: r.affected.len(),
            });
        }
        LowLevelAction::DropWater => {
            if agents[idx].water == 0 {
                noop(events, id, "no water payload");
                return;
            }
            agents[idx].water -= 1;
            let r = apply_water(
                world,
                &WaterPattern::Area {
                    center: pos,
                    radius: params.drop_radius,
                },
                fire_cfg,
            );
            events.push(Event::WaterDropped {
                agent: id,
                cells: r.affected.len(),
            });
        }
        LowLevelAction::Refill => {
            if near_water(world, pos) {
                agents[idx].water = params.kind(kind).water_capacity;
                events.push(Event::Refilled { agent: id });
            } else {
                noop(events, id, "not over a water source");
            }
        }
        LowLevelAction::PickUpCivilian => {
            if agents[idx].carrying_civilian {
                noop(events, id, "already carrying a civilian");
                return;
            }
            let r = params.civilian_pickup_radius;
            let mut best: Option<(i32, usize)> = None;
            for dy in -r..=r {
                for dx in -r..=r {
                    let c = pos.offset(dx, dy);
                    if !world.in_bounds(c) {
                        continue;
                    }
                    let i = world.index(c);
                    if world.civilians[i] > 0 {
                        let key = (pos.chebyshev(c), i);
                        if best.map_or(true, |b| key < b) {
                            best = Some(key);
                        }
                    }
                }
            }
            match best {
                Some((_, i)) => {
                    world.civilians[i] -= 1;
                    agents[idx].carrying_civilian = true;
                    events.push(Event::CivilianPickedUp {
                        agent: id,
                        cell: world.cell(i),
                    });
                }
                None => noop(events, id, "no civilian within reach"),
            }
        }
        LowLevelAction::DropOffCivilian => {
            if !agents[idx].carrying_civilian {
                noop(events, id, "not carrying a civilian");
                return;
            }
            agents[idx].carrying_civilian = false;
            let i = world.index(pos);
            if world.labeled[i] {
                events.push(Event::CivilianRescued { agent: id, cell: pos });
            } else {
                world.civilians[i] += 1;
                events.push(Event::CivilianDroppedOff { agent: id, cell: pos });
            }
        }
        LowLevelAction::PickUpFirefighters => {
            let seats = params.kind(kind).seats as usize;
            let room = seats.saturating_sub(agents[idx].passengers.len());
            let boarding: Vec<usize> = (0..agents.len())
                .filter(|&j| {
                    let f = &agents[j];
                    f.kind == AgentKind::Firefighter && f.can_act() && f.pos.chebyshev(pos) <= params.boarding_radius
                })
                .take(room)
                .collect();
            if boarding.is_empty() {
                noop(events, id, "no firefighters to pick up");
                return;
            }
            let mut ids = Vec::new();
            let mut civs = 0;
            for j in boarding {
                let f = &mut agents[j];
                f.aboard = Some(id);
                f.pos = pos;
                f.active = None;
                civs += f.carrying_civilian as u32;
                ids.push(f.id);
            }
            let h = &mut agents[idx];
            h.passengers.extend(ids.iter().copied());
            h.passenger_civilians += civs;
            events.push(Event::FirefightersBoarded {
                helicopter: id,
                firefighters: ids,
            });
        }
        LowLevelAction::DropOffFirefighters => {
            if agents[idx].passengers.is_empty() {
                noop(events, id, "no passengers");
                return;
            }
            if world.land[world.index(pos)] == LandType::Water {
                noop(events, id, "cannot unload over water");
                return;
            }
            let riders = std::mem::take(&mut agents[idx].passengers);
            agents[idx].passenger_civilians = 0;
            for r in &riders {
                if let Some(ri) = agent_index(agents, *r) {
                    agents[ri].aboard = None;
                    agents[ri].pos = pos;
                }
            }
            events.push(Event::FirefightersUnloaded {
                helicopter: id,
                firefighters: riders,
                cell: pos,
            });
        }
    }
}

/// Marks every cell within an alive agent's vision radius as revealed and
/// rebuilds the current-visibility mask.
pub fn update_visibility(world: &mut WorldMap, agents: &[Agent]) {
    world.visible.iter_mut().for_each(|v| *v = false);
    let (w, h) = (world.width as i32, world.height as i32);
    for a in agents.iter().filter(|a| a.can_act()) {
        let r = a.vision_radius.max(0);
        let (x0, x1) = ((a.pos.x - r).max(0), (a.pos.x + r).min(w - 1));
        let (y0, y1) = ((a.pos.y - r).max(0), (a.pos.y + r).min(h - 1));
        for y in y0..=y1 {
            let row = y as usize * world.width;
            for x in x0..=x1 {
                world.visible[row + x as usize] = true;
                world.revealed[row + x as usize] = true;
            }
        }
    }
}

/// Advances the world by one tick.
pub fn world_step(
    world: &mut WorldMap,
    agents: &mut [Agent],
    params: &AgentParams,
    fire_cfg: &FireConfig,
) -> StepOutcome {
    let mut events = Vec::new();

    // 1. emit from one snapshot
    let emissions: Vec<Option<Emission>> = agents
        .iter()
        .map(|a| (a.can_act() && a.active.is_some()).then(|| execute_primitive(a, world, params)))
        .collect();

    // 2. resolve in ascending id order
    let mut order: Vec<usize> = (0..agents.len()).collect();
    order.sort_by_key(|&i| agents[i].id);
    for idx in order {
        let Some(em) = &emissions[idx] else { continue };
        if !agents[idx].can_act() {
            // Boarded earlier this tick.
            continue;
        }
        resolve(idx, &em.action, world, agents, params, fire_cfg, &mut events);
        let a = &mut agents[idx];
        let Some(active) = a.active.as_mut() else { continue };
        active.ticks += 1;
        if matches!(em.action, LowLevelAction::Cut { .. }) {
            active.progress += 1;
        }
        if em.completed {
            let desc = active.primitive.describe();
            a.active = None;
            match &em.failure {
                Some(reason) => {
                    a.action_history.push(format!("{desc} (aborted: {reason})"));
                    events.push(Event::PrimitiveAborted {
                        agent: a.id,
                        primitive: desc,
                        reason: reason.clone(),
                    });
                }
                None => {
                    a.action_history.push(desc.clone());
                    events.push(Event::PrimitiveCompleted {
                        agent: a.id,
                        primitive: desc,
                    });
                }
            }
        }
    }

    // 3. fire
    let fire = fire_step(world, fire_cfg);

    // 4. losses
    for a in agents.iter_mut() {
        if !a.can_act() || a.kind.is_air() {
            continue;
        }
        let i = world.index(a.pos);
        if world.fire[i] == FireState::Burning {
            a.alive = false;
            a.active = None;
            events.push(Event::AgentLost {
                agent: a.id,
                cell: a.pos,
            });
            if a.carrying_civilian {
                a.carrying_civilian = false;
                events.push(Event::CivilianLost { cell: a.pos, count: 1 });
            }
        }
    }
    for (c, _, to) in &fire.transitions {
        if *to == FireState::Burning {
            let i = world.index(*c);
            if world.civilians[i] > 0 {
                events.push(Event::CivilianLost {
                    cell: *c,
                    count: world.civilians[i] as u32,
                });
                world.civilians[i] = 0;
            }
        }
    }

    // 5. visibility
    update_visibility(world, agents);
    world.step += 1;
    StepOutcome { events, fire }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(w: usize, h: usize) -> (WorldMap, AgentParams, FireConfig) {
        (WorldMap::blank(w, h, 5), AgentParams::default(), FireConfig::default())
    }

    fn ff(id: u32, pos: Cell, p: &AgentParams) -> Agent {
        Agent::new(AgentId(id), AgentKind::Firefighter, pos, p)
    }

    #[test]
    fn empty_world_only_advances_step() {
        let (mut w, p, f) = setup(8, 8);
        let before = w.clone();
        let out = world_step(&mut w, &mut [], &p, &f);
        assert!(out.events.is_empty());
        assert_eq!(w.step, 1);
        w.step = 0;
        assert_eq!(w, before);
    }

    #[test]
    fn cut_all_trees_takes_three_ticks() {
        let (mut w, p, f) = setup(5, 5);
        let c = Cell::new(2, 2);
        w.set_land(c, LandType::DenseForest);
        let mut agents = vec![ff(1, c, &p)];
        agents[0].activate(Primitive::CutAllTrees);
        let mut cuts = 0;
        for tick in 0..3 {
            let out = world_step(&mut w, &mut agents, &p, &f);
            cuts += out.events.iter().filter(|e| matches!(e, Event::TreeCut { .. })).count();
            assert_eq!(agents[0].active.is_none(), tick == 2);
        }
        assert_eq!(cuts, 3);
        assert_eq!(w.trees[w.index(c)], 0);
        assert_eq!(agents[0].action_history, vec!["cut all trees in current cell"]);
    }

    #[test]
    fn agent_on_igniting_cell_dies() {
        // 3x3 forest; fire forced onto the agent's cell by hand-advancing
        // the center from Ignited. Ignited lasts 3 ticks, so on the third
        // step it becomes Burning and the agent standing there is lost.
        let (mut w, p, f) = setup(3, 3);
        for i in 0..w.len() {
            w.land[i] = LandType::Rock;
        }
        let c = Cell::new(1, 1);
        w.set_land(c, LandType::DenseForest);
        w.ignite(c);
        let mut agents = vec![ff(1, c, &p)];
        let mut lost_at = None;
        for t in 0..5 {
            let out = world_step(&mut w, &mut agents, &p, &f);
            if out.events.iter().any(|e| matches!(e, Event::AgentLost { .. })) {
                lost_at = Some(t);
                break;
            }
        }
        assert_eq!(lost_at, Some(2));
        assert!(!agents[0].alive);
    }

    #[test]
    fn move_already_there_completes() {
        let (w, p, _) = setup(5, 5);
        let mut a = ff(1, Cell::new(2, 2), &p);
        a.activate(Primitive::MoveToLocation(Cell::new(2, 2)));
        let em = execute_primitive(&a, &w, &p);
        assert!(em.completed);
        assert_eq!(em.action, LowLevelAction::Idle);
    }

    #[test]
    fn bulldozer_clears_forest_it_drives_through() {
        let (mut w, p, f) = setup(7, 1);
        let mid = Cell::new(3, 0);
        w.set_land(mid, LandType::DenseForest);
        let mut agents = vec![Agent::new(AgentId(1), AgentKind::Bulldozer, Cell::new(1, 0), &p)];
        agents[0].activate(Primitive::DriveClearPath(Cell::new(5, 0)));
        let mut labeled_cuts = 0;
        for _ in 0..20 {
            let out = world_step(&mut w, &mut agents, &p, &f);
            labeled_cuts += out.events.iter().filter(|e| matches!(e, Event::TreeCut { .. })).count();
            if agents[0].is_idle() {
                break;
            }
        }
        assert_eq!(agents[0].pos, Cell::new(5, 0));
        assert_eq!(w.trees[w.index(mid)], 0);
        assert_eq!(labeled_cuts, 3);
    }

    #[test]
    fn bulldozer_moves_every_other_tick() {
        let (mut w, p, f) = setup(10, 1);
        let mut agents = vec![Agent::new(AgentId(1), AgentKind::Bulldozer, Cell::new(0, 0), &p)];
        agents[0].activate(Primitive::DriveNoCut(Cell::new(4, 0)));
        let mut ticks = 0;
        while !agents[0].is_idle() {
            world_step(&mut w, &mut agents, &p, &f);
            ticks += 1;
        }
        assert_eq!(ticks, 7);
    }

    #[test]
    fn second_cutter_of_last_tree_is_noop() {
        let (mut w, p, f) = setup(3, 3);
        let c = Cell::new(1, 1);
        w.set_land(c, LandType::LightForest);
        let mut agents = vec![ff(1, c, &p), ff(2, c, &p)];
        agents[0].activate(Primitive::CutAllTrees);
        agents[1].activate(Primitive::CutAllTrees);
        let out = world_step(&mut w, &mut agents, &p, &f);
        let cuts: Vec<_> = out
            .events
            .iter()
            .filter_map(|e| match e {
                Event::TreeCut { agent, .. } => Some(*agent),
                _ => None,
            })
            .collect();
        assert_eq!(cuts, vec![AgentId(1)]);
        assert!(out
            .events
            .iter()
            .any(|e| matches!(e, Event::NoOp { agent, .. } if *agent == AgentId(2))));
    }

    #[test]
    fn visibility_square_and_monotone() {
        let (mut w, p, _) = setup(30, 30);
        let mut a = ff(1, Cell::new(15, 15), &p);
        a.vision_radius = 3;
        update_visibility(&mut w, std::slice::from_ref(&a));
        assert_eq!(w.revealed.iter().filter(|&&r| r).count(), 49);
        a.pos = Cell::new(2, 2);
        update_visibility(&mut w, std::slice::from_ref(&a));
        assert!(w.revealed[w.index(Cell::new(15, 15))]);
        assert!(!w.visible[w.index(Cell::new(15, 15))]);
    }

    #[test]
    fn drone_sees_superset_of_firefighter() {
        let (mut w1, p, _) = setup(40, 40);
        let mut w2 = w1.clone();
        let pos = Cell::new(5, 30);
        update_visibility(&mut w1, &[ff(1, pos, &p)]);
        update_visibility(&mut w2, &[Agent::new(AgentId(1), AgentKind::Drone, pos, &p)]);
        let sub = w1.revealed.iter().zip(&w2.revealed).all(|(a, b)| !a || *b);
        let strict = w2.revealed.iter().filter(|&&r| r).count() > w1.revealed.iter().filter(|&&r| r).count();
        assert!(sub && strict);
    }

    #[test]
    fn helicopter_ferries_firefighters() {
        let (mut w, p, f) = setup(30, 30);
        let mut agents = vec![
            ff(1, Cell::new(1, 1), &p),
            ff(2, Cell::new(2, 2), &p),
            Agent::new(AgentId(3), AgentKind::Helicopter, Cell::new(1, 2), &p),
        ];
        agents[2].activate(Primitive::PickUpFirefighters);
        world_step(&mut w, &mut agents, &p, &f);
        assert_eq!(agents[2].passengers, vec![AgentId(1), AgentId(2)]);
        agents[2].activate(Primitive::FlyToLocation(Cell::new(20, 20)));
        while !agents[2].is_idle() {
            world_step(&mut w, &mut agents, &p, &f);
        }
        assert_eq!(agents[0].pos, Cell::new(20, 20));
        agents[2].activate(Primitive::DropOffFirefighters);
        world_step(&mut w, &mut agents, &p, &f);
        assert!(agents[0].can_act() && agents[1].can_act());
        assert!(agents[2].passengers.is_empty());
    }

    #[test]
    fn rescue_on_labeled_cell() {
        let (mut w, p, f) = setup(6, 6);
        let ci = w.index(Cell::new(1, 0));
        w.civilians[ci] = 1;
        let target = Cell::new(4, 4);
        let ti = w.index(target);
        w.labeled[ti] = true;
        let mut agents = vec![ff(1, Cell::new(0, 0), &p)];
        let mut tally = EventTally::default();
        for prim in [
            Primitive::PickUpCivilian,
            Primitive::MoveToLocation(target),
            Primitive::DropOffCivilian,
        ] {
            agents[0].activate(prim);
            while !agents[0].is_idle() {
                let out = world_step(&mut w, &mut agents, &p, &f);
                tally.absorb(&out.events, &out.fire);
            }
        }
        assert_eq!(tally.civilians_rescued, 1);
        assert_eq!(w.total_civilians(), 0);
    }

    #[test]
    fn spray_limited_by_capacity() {
        let (mut w, p, f) = setup(10, 10);
        let mut agents = vec![ff(1, Cell::new(5, 5), &p)];
        let mut sprays = 0;
        for _ in 0..8 {
            agents[0].activate(Primitive::SprayWaterCone(Cell::new(9, 5)));
            let out = world_step(&mut w, &mut agents, &p, &f);
            sprays += out
                .events
                .iter()
                .filter(|e| matches!(e, Event::WaterSprayed { .. }))
                .count();
        }
        assert_eq!(sprays, p.firefighter.water_capacity as usize);
    }

    #[test]
    fn unreachable_move_aborts() {
        let (mut w, p, f) = setup(9, 9);
        for c in w.neighbors(Cell::new(7, 7)).collect::<Vec<_>>() {
            w.set_land(c, LandType::Water);
        }
        let mut agents = vec![ff(1, Cell::new(0, 0), &p)];
        agents[0].activate(Primitive::MoveToLocation(Cell::new(7, 7)));
        let out = world_step(&mut w, &mut agents, &p, &f);
        assert!(out
            .events
            .iter()
            .any(|e| matches!(e, Event::PrimitiveAborted { reason, .. } if reason == "unreachable")));
        assert!(agents[0].is_idle());
    }
}
