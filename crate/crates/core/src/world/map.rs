use serde::{Deserialize, Serialize};

use crate::fire::FireState;
use crate::terrain::LandType;

/// Integer grid coordinate. `(0, 0)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn chebyshev(self, other: Cell) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }

    pub fn offset(self, dx: i32, dy: i32) -> Cell {
        Cell::new(self.x + dx, self.y + dy)
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// The 8-neighborhood offsets in row-major order.
pub const NEIGHBORS_8: [(i32, i32); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Full grid state, stored as one vector per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub step: u64,
    pub land: Vec<LandType>,
    pub trees: Vec<u8>,
    pub fire: Vec<FireState>,
    pub fire_age: Vec<u16>,
    pub wet: Vec<u16>,
    /// Normalized to `[0, 1]`.
    pub elevation: Vec<f64>,
    /// Normalized to `[0, 1]`.
    pub moisture: Vec<f64>,
    /// Magnitude at most 1.
    pub wind: Vec<[f64; 2]>,
    pub civilians: Vec<u16>,
    pub labeled: Vec<bool>,
    /// Cells any agent has ever seen. Monotone.
    pub revealed: Vec<bool>,
    /// Cells inside some alive agent's vision radius this step.
    pub visible: Vec<bool>,
}

impl WorldMap {
    /// A blank map of brush with flat terrain, no wind and no fog revealed.
    pub fn blank(width: usize, height: usize, seed: u64) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            seed,
            step: 0,
            land: vec![LandType::Brush; n],
            trees: vec![0; n],
            fire: vec![FireState::None; n],
            fire_age: vec![0; n],
            wet: vec![0; n],
            elevation: vec![0.5; n],
            moisture: vec![0.5; n],
            wind: vec![[0.0, 0.0]; n],
            civilians: vec![0; n],
            labeled: vec![false; n],
            revealed: vec![false; n],
            visible: vec![false; n],
        }
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    #[inline]
    pub fn index(&self, c: Cell) -> usize {
        debug_assert!(self.in_bounds(c), "{c} out of bounds");
        c.y as usize * self.width + c.x as usize
    }

    #[inline]
    pub fn cell(&self, idx: usize) -> Cell {
        Cell::new((idx % self.width) as i32, (idx / self.width) as i32)
    }

    /// Sets land type and its canonical tree count together.
    pub fn set_land(&mut self, c: Cell, land: LandType) {
        let i = self.index(c);
        self.land[i] = land;
        self.trees[i] = land.initial_trees();
    }

    /// Can fire enter this cell at all (ignoring its current fire state)?
    pub fn is_flammable(&self, idx: usize) -> bool {
        self.trees[idx] > 0 || self.land[idx] == LandType::Brush
    }

    pub fn total_trees(&self) -> u64 {
        self.trees.iter().map(|&t| t as u64).sum()
    }

    pub fn total_civilians(&self) -> u64 {
        self.civilians.iter().map(|&c| c as u64).sum()
    }

    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        NEIGHBORS_8
            .iter()
            .map(move |&(dx, dy)| c.offset(dx, dy))
            .filter(move |n| self.in_bounds(*n))
    }

    pub fn is_active_fire(&self, idx: usize) -> bool {
        matches!(self.fire[idx], FireState::Ignited | FireState::Burning)
    }

    pub fn has_active_fire(&self) -> bool {
        self.fire
            .iter()
            .any(|f| matches!(f, FireState::Ignited | FireState::Burning | FireState::Extinguishing))
    }

    /// Forces a cell into the Ignited state (used by level setup).
    pub fn ignite(&mut self, c: Cell) {
        let i = self.index(c);
        self.fire[i] = FireState::Ignited;
        self.fire_age[i] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let w = WorldMap::blank(7, 5, 0);
        for i in 0..w.len() {
            assert_eq!(w.index(w.cell(i)), i);
        }
    }

    #[test]
    fn corner_has_three_neighbors() {
        let w = WorldMap::blank(4, 4, 0);
        assert_eq!(w.neighbors(Cell::new(0, 0)).count(), 3);
        assert_eq!(w.neighbors(Cell::new(1, 1)).count(), 8);
    }

    #[test]
    fn brush_is_flammable_rock_is_not() {
        let mut w = WorldMap::blank(2, 1, 0);
        w.set_land(Cell::new(1, 0), LandType::Rock);
        assert!(w.is_flammable(0));
        assert!(!w.is_flammable(1));
    }
}
