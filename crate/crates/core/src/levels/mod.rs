//! The benchmark level catalog: construction, per-step score tracking,
//! scoring functions and termination.

mod build;
mod solver;

pub use build::{build_level, BuiltLevel, LevelError, LevelOverrides};
pub use solver::{solve_episode, Solver};

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::fire::FireState;
use crate::rng::hash_words;
use crate::world::{Agent, AgentKind, Cell, EventTally, StepOutcome, WorldMap};

/// Behavioral competencies a level exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Behavior {
    TD,
    AC,
    SR,
    OS,
    RC,
    PA,
    OP,
}

impl Behavior {
    pub const ALL: [Behavior; 7] = [
        Behavior::TD,
        Behavior::AC,
        Behavior::SR,
        Behavior::OS,
        Behavior::RC,
        Behavior::PA,
        Behavior::OP,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Behavior::TD => "TD",
            Behavior::AC => "AC",
            Behavior::SR => "SR",
            Behavior::OS => "OS",
            Behavior::RC => "RC",
            Behavior::PA => "PA",
            Behavior::OP => "OP",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Behavior::TD => "Task Designation",
            Behavior::AC => "Agent Capitalization",
            Behavior::SR => "Spatial Reasoning",
            Behavior::OS => "Observation Sharing",
            Behavior::RC => "Realtime Coordination",
            Behavior::PA => "Plan Adaptation",
            Behavior::OP => "Objective Prioritization",
        }
    }

    pub fn parse(s: &str) -> Option<Behavior> {
        Behavior::ALL
            .into_iter()
            .find(|b| b.code().eq_ignore_ascii_case(s.trim()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    CutSparse,
    CutLines,
    ScoutFire,
    Transport,
    RescueKnown,
    SearchRescue,
    SearchRescueTransport,
    Extinguish,
    Contain,
    LocateSuppress,
    LocateDeploySuppress,
    FullEnvironment,
}

impl Family {
    pub fn has_fire(self) -> bool {
        matches!(
            self,
            Family::ScoutFire
                | Family::Extinguish
                | Family::Contain
                | Family::LocateSuppress
                | Family::LocateDeploySuppress
                | Family::FullEnvironment
        )
    }

    /// Scored as a penalty (open-ended).
    pub fn is_penalty(self) -> bool {
        matches!(
            self,
            Family::Extinguish
                | Family::Contain
                | Family::LocateSuppress
                | Family::LocateDeploySuppress
                | Family::FullEnvironment
        )
    }

    pub fn counts_civilians(self) -> bool {
        self == Family::FullEnvironment
    }

    pub fn is_rescue(self) -> bool {
        matches!(
            self,
            Family::RescueKnown | Family::SearchRescue | Family::SearchRescueTransport
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roster {
    pub firefighters: u32,
    pub bulldozers: u32,
    pub drones: u32,
    pub helicopters: u32,
}

impl Roster {
    pub const fn new(firefighters: u32, bulldozers: u32, drones: u32, helicopters: u32) -> Self {
        Self {
            firefighters,
            bulldozers,
            drones,
            helicopters,
        }
    }

    pub fn total(&self) -> u32 {
        self.firefighters + self.bulldozers + self.drones + self.helicopters
    }

    /// Kinds in id order: firefighters first, then bulldozers, drones,
    /// helicopters.
    pub fn kinds(&self) -> Vec<AgentKind> {
        let mut v = Vec::with_capacity(self.total() as usize);
        for (kind, n) in [
            (AgentKind::Firefighter, self.firefighters),
            (AgentKind::Bulldozer, self.bulldozers),
            (AgentKind::Drone, self.drones),
            (AgentKind::Helicopter, self.helicopters),
        ] {
            v.extend(std::iter::repeat(kind).take(n as usize));
        }
        v
    }

    pub fn count(&self, kind: AgentKind) -> u32 {
        match kind {
            AgentKind::Firefighter => self.firefighters,
            AgentKind::Bulldozer => self.bulldozers,
            AgentKind::Drone => self.drones,
            AgentKind::Helicopter => self.helicopters,
        }
    }
}

impl std::fmt::Display for Roster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = [
            (self.firefighters, "F"),
            (self.bulldozers, "B"),
            (self.drones, "D"),
            (self.helicopters, "H"),
        ]
        .iter()
        .filter(|(n, _)| *n > 0)
        .map(|(n, c)| format!("{n} {c}"))
        .collect();
        f.write_str(&parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSpec {
    pub name: &'static str,
    pub family: Family,
    pub objective: &'static str,
    pub roster: Roster,
    pub map_size: usize,
    /// `None` for open-ended levels.
    pub max_score: Option<u32>,
    pub tags: &'static [Behavior],
    /// Civilians placed at build time.
    pub civilians: u32,
}

impl LevelSpec {
    pub fn is_finite(&self) -> bool {
        self.max_score.is_some()
    }

    pub fn default_max_steps(&self) -> u64 {
        if self.family == Family::FullEnvironment {
            800
        } else if self.map_size <= 60 {
            200
        } else {
            400
        }
    }
}

use Behavior::*;

pub static LEVELS: [LevelSpec; 17] = [
    LevelSpec {
        name: "Cut Trees: Sparse (small)",
        family: Family::CutSparse,
        objective: "Cut all trees in labeled cells",
        roster: Roster::new(3, 0, 0, 0),
        map_size: 30,
        max_score: Some(18),
        tags: &[TD],
        civilians: 0,
    },
    LevelSpec {
        name: "Cut Trees: Sparse (large)",
        family: Family::CutSparse,
        objective: "Cut all trees in labeled cells",
        roster: Roster::new(10, 0, 0, 0),
        map_size: 60,
        max_score: Some(75),
        tags: &[TD],
        civilians: 0,
    },
    LevelSpec {
        name: "Cut Trees: Lines (small)",
        family: Family::CutLines,
        objective: "Cut all the labeled lines of trees",
        roster: Roster::new(2, 1, 0, 0),
        map_size: 30,
        max_score: Some(30),
        tags: &[TD, AC],
        civilians: 0,
    },
    LevelSpec {
        name: "Cut Trees: Lines (large)",
        family: Family::CutLines,
        objective: "Cut all the labeled lines of trees",
        roster: Roster::new(4, 3, 0, 0),
        map_size: 60,
        max_score: Some(105),
        tags: &[TD, AC],
        civilians: 0,
    },
    LevelSpec {
        name: "Scout Fire (small)",
        family: Family::ScoutFire,
        objective: "Scout and confirm a fire within the map",
        roster: Roster::new(0, 0, 3, 0),
        map_size: 100,
        max_score: Some(2),
        tags: &[TD, SR, OS],
        civilians: 0,
    },
    LevelSpec {
        name: "Scout Fire (large)",
        family: Family::ScoutFire,
        objective: "Scout and confirm a fire within the map",
        roster: Roster::new(0, 0, 5, 0),
        map_size: 250,
        max_score: Some(2),
        tags: &[TD, SR, OS],
        civilians: 0,
    },
    LevelSpec {
        name: "Transport Firefighters (small)",
        family: Family::Transport,
        objective: "Transport all firefighters to a target location",
        roster: Roster::new(6, 0, 0, 1),
        map_size: 100,
        max_score: Some(6),
        tags: &[AC, SR, RC],
        civilians: 0,
    },
    LevelSpec {
        name: "Transport Firefighters (large)",
        family: Family::Transport,
        objective: "Transport all firefighters to a target location",
        roster: Roster::new(12, 0, 0, 2),
        map_size: 250,
        max_score: Some(12),
        tags: &[AC, SR, RC],
        civilians: 0,
    },
    LevelSpec {
        name: "Rescue Civilians: Known Location (small)",
        family: Family::RescueKnown,
        objective: "Rescue all civilians to a target location",
        roster: Roster::new(3, 0, 0, 0),
        map_size: 40,
        max_score: Some(3),
        tags: &[TD, SR, PA],
        civilians: 3,
    },
    LevelSpec {
        name: "Rescue Civilians: Known Location (large)",
        family: Family::RescueKnown,
        objective: "Rescue all civilians to a target location",
        roster: Roster::new(3, 0, 0, 0),
        map_size: 40,
        max_score: Some(9),
        tags: &[TD, SR, PA],
        civilians: 9,
    },
    LevelSpec {
        name: "Rescue Civilians: Search and Rescue",
        family: Family::SearchRescue,
        objective: "Locate and rescue all civilians to a target location",
        roster: Roster::new(5, 0, 2, 0),
        map_size: 100,
        max_score: Some(5),
        tags: &[TD, SR, OS, PA],
        civilians: 5,
    },
    LevelSpec {
        name: "Rescue Civilians: Search + Rescue + Transport",
        family: Family::SearchRescueTransport,
        objective: "Locate and rescue all civilians to a target location",
        roster: Roster::new(10, 0, 2, 2),
        map_size: 150,
        max_score: Some(10),
        tags: &[TD, AC, SR, OS, RC, PA],
        civilians: 10,
    },
    LevelSpec {
        name: "Suppress Fire: Extinguish",
        family: Family::Extinguish,
        objective: "Extinguish the fire at a known location with water",
        roster: Roster::new(8, 0, 0, 0),
        map_size: 60,
        max_score: None,
        tags: &[TD, SR, PA],
        civilians: 0,
    },
    LevelSpec {
        name: "Suppress Fire: Contain",
        family: Family::Contain,
        objective: "Contain the fire at a known location without water",
        roster: Roster::new(5, 1, 0, 0),
        map_size: 60,
        max_score: None,
        tags: &[TD, AC, SR, PA],
        civilians: 0,
    },
    LevelSpec {
        name: "Suppress Fire: Locate and Suppress",
        family: Family::LocateSuppress,
        objective: "Suppress the fire at an unknown location",
        roster: Roster::new(5, 1, 2, 0),
        map_size: 100,
        max_score: None,
        tags: &[TD, AC, OS, SR, PA],
        civilians: 0,
    },
    LevelSpec {
        name: "Suppress Fire: Locate + Deploy + Suppress",
        family: Family::LocateDeploySuppress,
        objective: "Suppress the fire at an unknown location",
        roster: Roster::new(10, 0, 2, 2),
        map_size: 150,
        max_score: None,
        tags: &[TD, AC, OS, SR, RC, PA],
        civilians: 0,
    },
    LevelSpec {
        name: "Full Environment",
        family: Family::FullEnvironment,
        objective: "Locate and Suppress the fire while rescuing civilians",
        roster: Roster::new(10, 1, 2, 2),
        map_size: 200,
        max_score: None,
        tags: &[TD, AC, SR, OS, RC, PA, OP],
        civilians: 10,
    },
];

pub fn level_names() -> Vec<&'static str> {
    LEVELS.iter().map(|l| l.name).collect()
}

/// Case-insensitive lookup by exact name.
pub fn find_level(name: &str) -> Option<&'static LevelSpec> {
    LEVELS.iter().find(|l| l.name.eq_ignore_ascii_case(name.trim()))
}

fn seed_table() -> &'static BTreeMap<String, Vec<u64>> {
    static TABLE: OnceLock<BTreeMap<String, Vec<u64>>> = OnceLock::new();
    TABLE.get_or_init(|| toml::from_str(include_str!("../../data/seeds.toml")).expect("bundled seed table parses"))
}

/// Canonical seeds for a level, empty for unknown names.
pub fn canonical_seeds(name: &str) -> Vec<u64> {
    find_level(name)
        .and_then(|l| seed_table().get(l.name))
        .cloned()
        .unwrap_or_default()
}

/// Canonical seeds extended with derived ones until there are `n`.
pub fn seeds_at_least(name: &str, n: usize) -> Vec<u64> {
    let mut seeds = canonical_seeds(name);
    let salt = name.bytes().fold(0u64, |h, b| hash_words(&[h, b as u64]));
    let mut k = 0u64;
    while seeds.len() < n {
        let s = hash_words(&[salt, k]) % 10_000;
        if !seeds.contains(&s) {
            seeds.push(s);
        }
        k += 1;
    }
    seeds
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zone {
    pub center: Cell,
    pub radius: i32,
}

impl Zone {
    pub fn contains(&self, c: Cell) -> bool {
        self.center.chebyshev(c) <= self.radius
    }
}

/// One level bound to a seed, with everything placed on its map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelInstance {
    pub spec: &'static LevelSpec,
    pub seed: u64,
    pub max_steps: u64,
    /// The team's task as given to the language model.
    pub task: String,
    pub muster: Cell,
    pub labeled_cells: Vec<Cell>,
    pub lines: Vec<(Cell, Cell)>,
    pub zone: Option<Zone>,
    pub fire_origin: Option<Cell>,
    pub civilian_cells: Vec<Cell>,
    pub initial_trees: u64,
    pub initial_civilians: u64,
}

impl LevelInstance {
    pub fn name(&self) -> &'static str {
        self.spec.name
    }

    pub fn family(&self) -> Family {
        self.spec.family
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreComponents {
    pub trees_cut_correct: u64,
    pub drones_over_fire: u64,
    pub agents_at_target: u64,
    pub civilians_at_target: u64,
    pub trees_destroyed: u64,
    pub agents_lost: u64,
    pub civilians_lost: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub value: f64,
    pub components: ScoreComponents,
}

/// The scoring function of a level family applied to its components.
pub fn score_value(family: Family, c: &ScoreComponents) -> f64 {
    match family {
        Family::CutSparse | Family::CutLines => c.trees_cut_correct as f64,
        Family::ScoutFire => c.drones_over_fire.min(2) as f64,
        Family::Transport => c.agents_at_target as f64,
        Family::RescueKnown | Family::SearchRescue | Family::SearchRescueTransport => c.civilians_at_target as f64,
        Family::Extinguish | Family::Contain | Family::LocateSuppress | Family::LocateDeploySuppress => {
            -((c.trees_destroyed + 20 * c.agents_lost) as f64)
        }
        Family::FullEnvironment => -((c.trees_destroyed + 20 * c.agents_lost + 100 * c.civilians_lost) as f64),
    }
}

/// Cumulative counters plus the per-episode peaks some scores read.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreTracker {
    pub tally: EventTally,
    pub drones_over_fire_peak: u64,
    pub agents_at_target_peak: u64,
}

/// Drones currently above an Ignited or Burning cell, capped at two.
pub fn drones_over_fire(world: &WorldMap, agents: &[Agent]) -> u64 {
    let n = agents
        .iter()
        .filter(|a| a.alive && a.kind == AgentKind::Drone)
        .filter(|a| world.is_active_fire(world.index(a.pos)))
        .count() as u64;
    n.min(2)
}

/// Firefighters standing (not riding) inside the labeled target area.
pub fn firefighters_at_target(world: &WorldMap, agents: &[Agent]) -> u64 {
    agents
        .iter()
        .filter(|a| a.kind == AgentKind::Firefighter && a.can_act())
        .filter(|a| world.labeled[world.index(a.pos)])
        .count() as u64
}

impl ScoreTracker {
    /// Folds in one step's outcome and refreshes the peaks from the
    /// post-step world.
    pub fn observe(&mut self, outcome: &StepOutcome, world: &WorldMap, agents: &[Agent]) {
        self.tally.absorb(&outcome.events, &outcome.fire);
        self.refresh(world, agents);
    }

    pub fn refresh(&mut self, world: &WorldMap, agents: &[Agent]) {
        self.drones_over_fire_peak = self.drones_over_fire_peak.max(drones_over_fire(world, agents));
        self.agents_at_target_peak = self.agents_at_target_peak.max(firefighters_at_target(world, agents));
    }

    pub fn components(&self) -> ScoreComponents {
        ScoreComponents {
            trees_cut_correct: self.tally.trees_cut_labeled,
            drones_over_fire: self.drones_over_fire_peak,
            agents_at_target: self.agents_at_target_peak,
            civilians_at_target: self.tally.civilians_rescued,
            trees_destroyed: self.tally.trees_destroyed,
            agents_lost: self.tally.agents_lost,
            civilians_lost: self.tally.civilians_lost,
        }
    }
}

pub fn score(level: &LevelInstance, tracker: &ScoreTracker) -> Score {
    let components = tracker.components();
    Score {
        value: score_value(level.family(), &components),
        components,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxSteps,
    MaxScore,
    FireOutNoAgents,
}

/// Why the episode ends after `t` completed steps, if it does.
pub fn termination(
    level: &LevelInstance,
    world: &WorldMap,
    agents: &[Agent],
    score: &Score,
    t: u64,
) -> Option<Termination> {
    if let Some(max) = level.spec.max_score {
        if score.value >= max as f64 {
            return Some(Termination::MaxScore);
        }
    }
    if level.family().has_fire() {
        let fire_out = !world
            .fire
            .iter()
            .any(|f| matches!(f, FireState::Ignited | FireState::Burning | FireState::Extinguishing));
        if fire_out && !agents.iter().any(|a| a.can_act()) {
            return Some(Termination::FireOutNoAgents);
        }
    }
    (t >= level.max_steps).then_some(Termination::MaxSteps)
}

pub fn is_terminal(level: &LevelInstance, world: &WorldMap, agents: &[Agent], score: &Score, t: u64) -> bool {
    termination(level, world, agents, score, t).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_matches_table() {
        let expect: [(&str, u32, u32, u32, u32, usize, Option<u32>); 17] = [
            ("Cut Trees: Sparse (small)", 3, 0, 0, 0, 30, Some(18)),
            ("Cut Trees: Sparse (large)", 10, 0, 0, 0, 60, Some(75)),
            ("Cut Trees: Lines (small)", 2, 1, 0, 0, 30, Some(30)),
            ("Cut Trees: Lines (large)", 4, 3, 0, 0, 60, Some(105)),
            ("Scout Fire (small)", 0, 0, 3, 0, 100, Some(2)),
            ("Scout Fire (large)", 0, 0, 5, 0, 250, Some(2)),
            ("Transport Firefighters (small)", 6, 0, 0, 1, 100, Some(6)),
            ("Transport Firefighters (large)", 12, 0, 0, 2, 250, Some(12)),
            ("Rescue Civilians: Known Location (small)", 3, 0, 0, 0, 40, Some(3)),
            ("Rescue Civilians: Known Location (large)", 3, 0, 0, 0, 40, Some(9)),
            ("Rescue Civilians: Search and Rescue", 5, 0, 2, 0, 100, Some(5)),
            (
                "Rescue Civilians: Search + Rescue + Transport",
                10,
                0,
                2,
                2,
                150,
                Some(10),
            ),
            ("Suppress Fire: Extinguish", 8, 0, 0, 0, 60, None),
            ("Suppress Fire: Contain", 5, 1, 0, 0, 60, None),
            ("Suppress Fire: Locate and Suppress", 5, 1, 2, 0, 100, None),
            ("Suppress Fire: Locate + Deploy + Suppress", 10, 0, 2, 2, 150, None),
            ("Full Environment", 10, 1, 2, 2, 200, None),
        ];
        for (spec, (name, f, b, d, h, size, max)) in LEVELS.iter().zip(expect) {
            assert_eq!(spec.name, name);
            assert_eq!(spec.roster, Roster::new(f, b, d, h));
            assert_eq!(spec.map_size, size);
            assert_eq!(spec.max_score, max);
        }
    }

    #[test]
    fn every_level_has_seeds() {
        for l in &LEVELS {
            assert!(canonical_seeds(l.name).len() >= 3, "{}", l.name);
        }
        assert_eq!(canonical_seeds("Full Environment"), vec![6434, 1908, 9424, 9500]);
        let s = seeds_at_least("Cut Trees: Sparse (large)", 5);
        assert_eq!(&s[..3], &[212, 981, 1530]);
        assert_eq!(s.len(), 5);
    }

    #[test]
    fn op_only_on_full_environment() {
        for l in &LEVELS {
            assert_eq!(l.tags.contains(&OP), l.family == Family::FullEnvironment);
        }
    }

    #[test]
    fn penalty_formulas() {
        let c = ScoreComponents {
            trees_destroyed: 500,
            agents_lost: 1,
            ..Default::default()
        };
        assert_eq!(score_value(Family::Extinguish, &c), -520.0);
        let c = ScoreComponents {
            trees_destroyed: 5500,
            agents_lost: 1,
            civilians_lost: 0,
            ..Default::default()
        };
        assert_eq!(score_value(Family::FullEnvironment, &c), -5520.0);
    }

    #[test]
    fn scout_capped_at_two() {
        let c = ScoreComponents {
            drones_over_fire: 5,
            ..Default::default()
        };
        assert_eq!(score_value(Family::ScoutFire, &c), 2.0);
    }

    #[test]
    fn roster_display() {
        assert_eq!(Roster::new(10, 1, 2, 2).to_string(), "10 F, 1 B, 2 D, 2 H");
    }
}
