//! Grid state, agents, primitives and the global step loop.

mod agent;
mod map;
pub mod path;
mod primitive;
pub mod snapshot;
pub mod step;

pub use agent::{agent_index, ActivePrimitive, Agent, AgentId, AgentKind, AgentParams, KindParams};
pub use map::{Cell, WorldMap, NEIGHBORS_8};
pub use path::{line_next, passable, plan_path};
pub use primitive::{parse_cell, Primitive};
pub use snapshot::{ascii_dump, world_digest, SnapshotError};
pub use step::{
    execute_primitive, near_water, update_visibility, world_step, Emission, Event, EventTally, LowLevelAction,
    StepOutcome,
};
