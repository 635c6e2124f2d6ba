use serde::{Deserialize, Serialize};

use super::{Cell, Primitive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentKind {
    Firefighter,
    Bulldozer,
    Drone,
    Helicopter,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [
        AgentKind::Firefighter,
        AgentKind::Bulldozer,
        AgentKind::Drone,
        AgentKind::Helicopter,
    ];

    pub fn is_air(self) -> bool {
        matches!(self, AgentKind::Drone | AgentKind::Helicopter)
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Firefighter => "Firefighter",
            AgentKind::Bulldozer => "Bulldozer",
            AgentKind::Drone => "Drone",
            AgentKind::Helicopter => "Helicopter",
        }
    }

    pub fn parse(s: &str) -> Option<AgentKind> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AGENT {}", self.0)
    }
}

/// Movement, sensing and payload numbers for one agent kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindParams {
    /// Cells moved on a tick where the agent moves.
    pub move_cells: u32,
    /// The agent moves once every `move_period` ticks.
    pub move_period: u32,
    pub vision_radius: i32,
    /// Water units (firefighter sprays) or payloads (helicopter drops).
    pub water_capacity: u32,
    pub seats: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentParams {
    pub firefighter: KindParams,
    pub bulldozer: KindParams,
    pub drone: KindParams,
    pub helicopter: KindParams,
    pub spray_half_angle_deg: f64,
    pub spray_range: f64,
    /// Chebyshev radius of a helicopter water drop.
    pub drop_radius: i32,
    /// How far a firefighter reaches for a civilian.
    pub civilian_pickup_radius: i32,
    /// How close firefighters must be to board a helicopter.
    pub boarding_radius: i32,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            firefighter: KindParams {
                move_cells: 1,
                move_period: 1,
                vision_radius: 6,
                water_capacity: 5,
                seats: 0,
            },
            bulldozer: KindParams {
                move_cells: 1,
                move_period: 2,
                vision_radius: 6,
                water_capacity: 0,
                seats: 0,
            },
            drone: KindParams {
                move_cells: 3,
                move_period: 1,
                vision_radius: 15,
                water_capacity: 0,
                seats: 0,
            },
            helicopter: KindParams {
                move_cells: 3,
                move_period: 1,
                vision_radius: 10,
                water_capacity: 1,
                seats: 4,
            },
            spray_half_angle_deg: 45.0,
            spray_range: 3.0,
            drop_radius: 1,
            civilian_pickup_radius: 1,
            boarding_radius: 2,
        }
    }
}

impl AgentParams {
    pub fn kind(&self, kind: AgentKind) -> &KindParams {
        match kind {
            AgentKind::Firefighter => &self.firefighter,
            AgentKind::Bulldozer => &self.bulldozer,
            AgentKind::Drone => &self.drone,
            AgentKind::Helicopter => &self.helicopter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivePrimitive {
    pub primitive: Primitive,
    /// Units of work done (trees cut for cut primitives).
    pub progress: u32,
    pub ticks: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub kind: AgentKind,
    pub pos: Cell,
    pub alive: bool,
    pub water: u32,
    pub carrying_civilian: bool,
    /// Helicopter only.
    pub passengers: Vec<AgentId>,
    /// Civilians riding along with boarded firefighters.
    pub passenger_civilians: u32,
    /// Firefighter only: the helicopter it is riding in.
    pub aboard: Option<AgentId>,
    pub plow_lowered: bool,
    pub active: Option<ActivePrimitive>,
    pub action_history: Vec<String>,
    pub message_history: Vec<String>,
    pub vision_radius: i32,
    pub move_cooldown: u32,
}

impl Agent {
    pub fn new(id: AgentId, kind: AgentKind, pos: Cell, params: &AgentParams) -> Self {
        let p = params.kind(kind);
        Self {
            id,
            kind,
            pos,
            alive: true,
            water: p.water_capacity,
            carrying_civilian: false,
            passengers: Vec::new(),
            passenger_civilians: 0,
            aboard: None,
            plow_lowered: false,
            active: None,
            action_history: Vec::new(),
            message_history: Vec::new(),
            vision_radius: p.vision_radius,
            move_cooldown: 0,
        }
    }

    /// Alive and not riding in a helicopter.
    pub fn can_act(&self) -> bool {
        self.alive && self.aboard.is_none()
    }

    pub fn is_idle(&self) -> bool {
        self.active.is_none()
    }

    /// Starts a primitive. Re-issuing the primitive already running keeps
    /// its progress.
    pub fn activate(&mut self, primitive: Primitive) {
        if let Some(a) = &self.active {
            if a.primitive == primitive {
                return;
            }
        }
        self.active = Some(ActivePrimitive {
            primitive,
            progress: 0,
            ticks: 0,
        });
    }
}

/// Looks an agent up by id; ids are dense and start at 1.
pub fn agent_index(agents: &[Agent], id: AgentId) -> Option<usize> {
    let i = (id.0 as usize).checked_sub(1)?;
    match agents.get(i) {
        Some(a) if a.id == id => Some(i),
        _ => agents.iter().position(|a| a.id == id),
    }
}
