//! The perception module: an agent's fogged minimap as ASCII, wrapped in
//! the perception prompt and summarized by the language model.

use serde::{Deserialize, Serialize};

use crate::fire::FireState;
use crate::lm::{Exchange, LmError, Metered};
use crate::prompt;
use crate::terrain::LandType;
use crate::world::snapshot::cell_char;
use crate::world::{Agent, AgentId, AgentKind, Cell, WorldMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimap {
    pub x0: i32,
    pub x1: i32,
    pub y0: i32,
    pub y1: i32,
    /// One token per cell, row-major from (x0, y0).
    pub rows: Vec<Vec<String>>,
    pub self_pos: Cell,
    /// Legend character of the agent's own cell.
    pub self_char: char,
    pub nearby: Vec<(AgentId, AgentKind, Cell)>,
}

impl Minimap {
    pub fn grid_text(&self) -> String {
        self.rows.iter().map(|r| r.join(" ")).collect::<Vec<_>>().join("\n")
    }

    pub fn token(&self, c: Cell) -> Option<&str> {
        let row = self.rows.get(usize::try_from(c.y - self.y0).ok()?)?;
        row.get(usize::try_from(c.x - self.x0).ok()?).map(String::as_str)
    }
}

/// Terrain without any dynamic overlay.
fn terrain_char(world: &WorldMap, i: usize) -> char {
    match world.land[i] {
        LandType::Water => 'w',
        LandType::Building => 'B',
        LandType::Rock => 'r',
        _ => char::from(b'0' + world.trees[i].min(3)),
    }
}

/// Inverse of the undecorated legend for a static cell.
pub fn decode_char(ch: char) -> Option<(LandType, u8, FireState)> {
    let fire = |f| Some((LandType::Brush, 0, f));
    match ch {
        '0'..='3' => {
            let n = ch as u8 - b'0';
            Some((LandType::forest_with(n), n, FireState::None))
        }
        'w' => Some((LandType::Water, 0, FireState::None)),
        'B' => Some((LandType::Building, 0, FireState::None)),
        'r' => Some((LandType::Rock, 0, FireState::None)),
        'i' => fire(FireState::Ignited),
        'f' => fire(FireState::Burning),
        'e' => fire(FireState::Extinguishing),
        'x' => fire(FireState::Extinguished),
        _ => None,
    }
}

/// Renders the (2R+1)² window around `agent`, clipped to the map.
/// Unrevealed cells are '-'; revealed cells out of sight show terrain only.
pub fn encode_minimap(world: &WorldMap, agent: &Agent, agents: &[Agent]) -> Minimap {
    let r = agent.vision_radius;
    let p = agent.pos;
    let (x0, x1) = ((p.x - r).max(0), (p.x + r).min(world.width as i32 - 1));
    let (y0, y1) = ((p.y - r).max(0), (p.y + r).min(world.height as i32 - 1));
    let self_idx = world.index(p);
    let rows = (y0..=y1)
        .map(|y| {
            (x0..=x1)
                .map(|x| {
                    let i = world.index(Cell::new(x, y));
                    let live = i == self_idx || world.visible[i];
                    let tok = if live {
                        let ch = cell_char(world, i);
                        if world.wet[i] > 0 {
                            format!("'{ch}'")
                        } else {
                            ch.to_string()
                        }
                    } else if world.revealed[i] {
                        terrain_char(world, i).to_string()
                    } else {
                        "-".to_string()
                    };
                    if i == self_idx {
                        format!("*{tok}*")
                    } else {
                        tok
                    }
                })
                .collect()
        })
        .collect();
    let nearby = agents
        .iter()
        .filter(|o| o.id != agent.id && o.can_act() && o.pos.chebyshev(p) <= r)
        .map(|o| (o.id, o.kind, o.pos))
        .collect();
    Minimap {
        x0,
        x1,
        y0,
        y1,
        rows,
        self_pos: p,
        self_char: cell_char(world, self_idx),
        nearby,
    }
}

pub fn build_perception_prompt(agent: &Agent, mm: &Minimap) -> String {
    let nearby = if mm.nearby.is_empty() {
        "none".to_string()
    } else {
        mm.nearby
            .iter()
            .map(|(id, kind, c)| format!("{id} ({kind}) at {c}"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    prompt::fill(
        prompt::PERCEPTION,
        &[
            ("AGENT", &agent.id.to_string()),
            ("POSITION", &agent.pos.to_string()),
            ("X0", &mm.x0.to_string()),
            ("X1", &mm.x1.to_string()),
            ("Y0", &mm.y0.to_string()),
            ("Y1", &mm.y1.to_string()),
            ("MINIMAP", &mm.grid_text()),
            ("SELF_CELL", &mm.self_char.to_string()),
            ("NEARBY", &nearby),
        ],
    )
}

/// One model call turning the agent's view into a text summary.
pub fn perceive(lm: &Metered<'_>, world: &WorldMap, agent: &Agent, agents: &[Agent]) -> Result<Exchange, LmError> {
    let mm = encode_minimap(world, agent, agents);
    lm.exchange(Some(agent.id), "perception", build_perception_prompt(agent, &mm))
}
