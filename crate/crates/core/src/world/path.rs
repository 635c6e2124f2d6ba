//! Next-step planning. Ground agents run A* over passable cells; aircraft
//! follow a straight line.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::{AgentKind, Cell, WorldMap, NEIGHBORS_8};
use crate::fire::FireState;
use crate::terrain::LandType;

/// Ground passability: not water, not currently burning.
pub fn ground_passable(world: &WorldMap, c: Cell) -> bool {
    if !world.in_bounds(c) {
        return false;
    }
    let i = world.index(c);
    world.land[i] != LandType::Water && world.fire[i] != FireState::Burning
}

pub fn passable(world: &WorldMap, kind: AgentKind, c: Cell) -> bool {
    if kind.is_air() {
        world.in_bounds(c)
    } else {
        ground_passable(world, c)
    }
}

/// First cell after `from` on a shortest route to `to`, or `None` when no
/// route exists. `from == to` yields `Some(to)`.
pub fn plan_path(world: &WorldMap, kind: AgentKind, from: Cell, to: Cell) -> Option<Cell> {
    if from == to {
        return Some(to);
    }
    if !world.in_bounds(to) {
        return None;
    }
    if kind.is_air() {
        return Some(line_next(from, to));
    }
    astar_next(world, from, to)
}

/// Next cell on the Bresenham line from `from` to `to`.
pub fn line_next(from: Cell, to: Cell) -> Cell {
    let dx = (to.x - from.x).abs();
    let dy = -(to.y - from.y).abs();
    let sx = if from.x < to.x { 1 } else { -1 };
    let sy = if from.y < to.y { 1 } else { -1 };
    let err = dx + dy;
    let e2 = 2 * err;
    let mut next = from;
    if e2 >= dy {
        next.x += sx;
    }
    if e2 <= dx {
        next.y += sy;
    }
    next
}

/// Searches backwards from `to`, so the parent pointer of `from` is the
/// first step. Open-list ties break by lower cell index.
fn astar_next(world: &WorldMap, from: Cell, to: Cell) -> Option<Cell> {
    if !ground_passable(world, to) {
        return None;
    }
    let goal = world.index(from);
    let start = world.index(to);
    let h = |i: usize| world.cell(i).chebyshev(from) as u32;

    let mut g: HashMap<usize, (u32, usize)> = HashMap::new();
    let mut open = BinaryHeap::new();
    g.insert(start, (0, usize::MAX));
    open.push(Reverse((h(start), start)));

    while let Some(Reverse((f, i))) = open.pop() {
        let gi = g[&i].0;
        if f > gi + h(i) {
            continue;
        }
        if i == goal {
            let parent = g[&i].1;
            return Some(world.cell(parent));
        }
        let c = world.cell(i);
        for &(dx, dy) in NEIGHBORS_8.iter() {
            let n = c.offset(dx, dy);
            if !world.in_bounds(n) {
                continue;
            }
            let ni = world.index(n);
            // The agent's own cell is always enterable in reverse.
            if ni != goal && !ground_passable(world, n) {
                continue;
            }
            let ng = gi + 1;
            let better = match g.get(&ni) {
                Some(&(old, _)) => ng < old,
                None => true,
            };
            if better {
                g.insert(ni, (ng, i));
                open.push(Reverse((ng + h(ni), ni)));
            }
        }
    }
    None
}
