//! Three hand-built worlds and the prompts their agents would receive.

use wildfire_bench::fire::FireState;
use wildfire_bench::perception::{build_perception_prompt, encode_minimap};
use wildfire_bench::terrain::LandType;
use wildfire_bench::translate::{build_translation_prompt, ActionCatalog};
use wildfire_bench::world::{update_visibility, Agent, AgentId, AgentKind, AgentParams, Cell, WorldMap};

struct Scene {
    name: &'static str,
    world: WorldMap,
    agents: Vec<Agent>,
    actions: Vec<&'static str>,
}

fn fill(world: &mut WorldMap, x: std::ops::Range<i32>, y: std::ops::Range<i32>, land: LandType) {
    for yy in y {
        for xx in x.clone() {
            world.set_land(Cell::new(xx, yy), land);
        }
    }
}

/// A forest edge with a burning front and a stream.
fn forest_front() -> Scene {
    let params = AgentParams::default();
    let mut w = WorldMap::blank(16, 16, 11);
    fill(&mut w, 0..8, 0..16, LandType::DenseForest);
    fill(&mut w, 8..12, 0..16, LandType::MediumForest);
    fill(&mut w, 12..13, 0..16, LandType::Water);
    for (x, y, s) in [
        (3, 4, FireState::Burning),
        (4, 4, FireState::Ignited),
        (3, 5, FireState::Extinguished),
    ] {
        let i = w.index(Cell::new(x, y));
        w.fire[i] = s;
    }
    let agents = vec![
        Agent::new(AgentId(1), AgentKind::Firefighter, Cell::new(6, 6), &params),
        Agent::new(AgentId(2), AgentKind::Bulldozer, Cell::new(9, 8), &params),
    ];
    Scene {
        name: "forest_front",
        world: w,
        agents,
        actions: vec!["Spray water toward (4, 4)", "Move to (9, 3) while cutting trees"],
    }
}

/// A settlement with civilians, a rock outcrop and a labeled cell.
fn settlement() -> Scene {
    let params = AgentParams::default();
    let mut w = WorldMap::blank(20, 14, 12);
    fill(&mut w, 2..6, 2..5, LandType::Building);
    fill(&mut w, 12..16, 8..12, LandType::Rock);
    fill(&mut w, 0..20, 12..14, LandType::LightForest);
    for (x, y, n) in [(3, 3, 2u16), (5, 2, 1)] {
        let i = w.index(Cell::new(x, y));
        w.civilians[i] = n;
    }
    let l = w.index(Cell::new(8, 12));
    w.labeled[l] = true;
    let agents = vec![
        Agent::new(AgentId(1), AgentKind::Helicopter, Cell::new(7, 6), &params),
        Agent::new(AgentId(2), AgentKind::Firefighter, Cell::new(4, 5), &params),
        Agent::new(AgentId(3), AgentKind::Drone, Cell::new(17, 2), &params),
    ];
    Scene {
        name: "settlement",
        world: w,
        agents,
        actions: vec!["Pick up firefighters", "Pick up civilians", "Fly to (0, 13)"],
    }
}

/// A map corner with a clipped window, remembered terrain out of sight and
/// wet ground.
fn corner_fog() -> Scene {
    let params = AgentParams::default();
    let mut w = WorldMap::blank(25, 25, 13);
    fill(&mut w, 0..25, 0..25, LandType::LightForest);
    fill(&mut w, 3..5, 0..3, LandType::Water);
    for i in 0..w.len() {
        let c = w.cell(i);
        if c.x >= 6 && c.x <= 9 && c.y <= 9 {
            w.revealed[i] = true;
        }
    }
    for c in [Cell::new(1, 1), Cell::new(2, 1)] {
        let i = w.index(c);
        w.wet[i] = 12;
    }
    let i = w.index(Cell::new(7, 2));
    w.fire[i] = FireState::Burning;
    let agents = vec![Agent::new(AgentId(4), AgentKind::Firefighter, Cell::new(0, 0), &params)];
    Scene {
        name: "corner_fog",
        world: w,
        agents,
        actions: vec!["Refill water"],
    }
}

/// `(fixture file name, prompt text)` for every agent in every scene.
pub fn prompts() -> Vec<(String, String)> {
    let catalog = ActionCatalog::builtin();
    let mut out = Vec::new();
    for mut scene in [forest_front(), settlement(), corner_fog()] {
        update_visibility(&mut scene.world, &scene.agents);
        for (agent, action) in scene.agents.iter().zip(&scene.actions) {
            let mm = encode_minimap(&scene.world, agent, &scene.agents);
            out.push((
                format!("{}__perception__agent{}.txt", scene.name, agent.id.0),
                build_perception_prompt(agent, &mm),
            ));
            out.push((
                format!("{}__translator__agent{}.txt", scene.name, agent.id.0),
                build_translation_prompt(action, agent.kind, catalog),
            ));
        }
    }
    out
}
