//! Coordination frameworks over a language model: CAMON, COELA, Embodied,
//! HMAS-2 and the Do-Nothing baseline, plus a model-free oracle team.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levels::{LevelInstance, Solver};
use crate::lm::{Exchange, LmError, Metered};
use crate::perception::perceive;
use crate::translate::{translate, ActionCatalog, TranslateCtx, TranslateError};
use crate::world::{agent_index, Agent, AgentId, AgentKind, AgentParams, Primitive, WorldMap};

mod camon;
mod coela;
mod embodied;
mod hmas;
pub mod markup;

pub use camon::Camon;
pub use coela::Coela;
pub use embodied::Embodied;
pub use hmas::Hmas2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrameworkKind {
    #[serde(rename = "CAMON")]
    Camon,
    #[serde(rename = "COELA")]
    Coela,
    Embodied,
    #[serde(rename = "HMAS-2")]
    Hmas2,
    #[serde(rename = "Do-Nothing")]
    DoNothing,
    /// The scripted solver acting directly, without a model.
    Oracle,
}

impl FrameworkKind {
    pub const ALL: [FrameworkKind; 6] = [
        FrameworkKind::Camon,
        FrameworkKind::Coela,
        FrameworkKind::Embodied,
        FrameworkKind::Hmas2,
        FrameworkKind::DoNothing,
        FrameworkKind::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FrameworkKind::Camon => "CAMON",
            FrameworkKind::Coela => "COELA",
            FrameworkKind::Embodied => "Embodied",
            FrameworkKind::Hmas2 => "HMAS-2",
            FrameworkKind::DoNothing => "Do-Nothing",
            FrameworkKind::Oracle => "Oracle",
        }
    }

    pub fn uses_lm(self) -> bool {
        !matches!(self, FrameworkKind::DoNothing | FrameworkKind::Oracle)
    }
}

impl fmt::Display for FrameworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
#[error("unknown framework `{0}`; expected one of CAMON, COELA, Embodied, HMAS-2, Do-Nothing, Oracle")]
pub struct UnknownFramework(String);

impl FromStr for FrameworkKind {
    type Err = UnknownFramework;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        FrameworkKind::ALL
            .into_iter()
            .find(|k| {
                k.name()
                    .chars()
                    .filter(|c| c.is_ascii_alphanumeric())
                    .collect::<String>()
                    .to_ascii_lowercase()
                    == key
            })
            .ok_or_else(|| UnknownFramework(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameworkConfig {
    /// Communication rounds per step for Embodied.
    pub embodied_rounds: u32,
    /// Planning rounds before HMAS-2 gives up on unanimous acceptance.
    pub hmas_max_rounds: u32,
    /// Past actions shown per agent.
    pub history_window: usize,
    /// Chat lines shown per agent.
    pub chat_window: usize,
    /// Steps of HMAS-2 state/action history shown to planner and reviewers.
    pub step_history_window: usize,
    /// Run independent model calls of one phase on the thread pool.
    pub parallel_calls: bool,
}

impl Default for FrameworkConfig {
    fn default() -> Self {
        Self {
            embodied_rounds: 1,
            hmas_max_rounds: 3,
            history_window: 10,
            chat_window: 20,
            step_history_window: 10,
            parallel_calls: true,
        }
    }
}

/// Read-only inputs of one planning step.
#[derive(Clone, Copy)]
pub struct StepCtx<'a> {
    pub t: u64,
    pub level: &'a LevelInstance,
    pub world: &'a WorldMap,
    pub params: &'a AgentParams,
    pub lm: Metered<'a>,
    pub catalog: &'a ActionCatalog,
    pub cfg: &'a FrameworkConfig,
    pub max_retries: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub to: AgentId,
    pub text: String,
}

/// What a framework decided this step. Activations are applied by the
/// episode loop; deliveries were already appended to message histories.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    pub activations: Vec<(AgentId, Primitive)>,
    pub deliveries: Vec<Delivery>,
    pub perceptions: Vec<(AgentId, String)>,
    pub exchanges: Vec<Exchange>,
    pub notes: Vec<String>,
}

impl StepPlan {
    fn activate(&mut self, id: AgentId, p: Primitive) {
        self.activations.retain(|(a, _)| *a != id);
        self.activations.push((id, p));
    }
}

pub trait Framework: Send {
    fn kind(&self) -> FrameworkKind;

    /// May only touch agents' message histories.
    fn step(&mut self, ctx: &StepCtx<'_>, agents: &mut [Agent]) -> Result<StepPlan, LmError>;
}

pub fn make_framework(kind: FrameworkKind) -> Box<dyn Framework> {
    match kind {
        FrameworkKind::Camon => Box::new(Camon::default()),
        FrameworkKind::Coela => Box::new(Coela::default()),
        FrameworkKind::Embodied => Box::new(Embodied::default()),
        FrameworkKind::Hmas2 => Box::new(Hmas2::default()),
        FrameworkKind::DoNothing => Box::new(DoNothing),
        FrameworkKind::Oracle => Box::new(Oracle::default()),
    }
}

#[derive(Debug, Default)]
pub struct DoNothing;

impl Framework for DoNothing {
    fn kind(&self) -> FrameworkKind {
        FrameworkKind::DoNothing
    }

    fn step(&mut self, _ctx: &StepCtx<'_>, _agents: &mut [Agent]) -> Result<StepPlan, LmError> {
        Ok(StepPlan::default())
    }
}

#[derive(Debug, Default)]
pub struct Oracle {
    solver: Solver,
}

impl Framework for Oracle {
    fn kind(&self) -> FrameworkKind {
        FrameworkKind::Oracle
    }

    fn step(&mut self, ctx: &StepCtx<'_>, agents: &mut [Agent]) -> Result<StepPlan, LmError> {
        Ok(StepPlan {
            activations: self.solver.decide(ctx.level, ctx.world, agents, ctx.params),
            ..StepPlan::default()
        })
    }
}

// ---- shared helpers ----

/// Runs one model call per item, concurrently when allowed, returning
/// results in input order.
pub(crate) fn fan_out<T, F>(ctx: &StepCtx<'_>, items: &[T], f: F) -> Result<Vec<Exchange>, LmError>
where
    T: Sync,
    F: Fn(&T) -> Result<Exchange, LmError> + Sync,
{
    if ctx.cfg.parallel_calls && ctx.lm.lm.concurrent() && items.len() > 1 {
        items.par_iter().map(&f).collect()
    } else {
        items.iter().map(f).collect()
    }
}

/// Perceptions for the given agents, stored into `cache` and the plan.
pub(crate) fn perceive_agents(
    ctx: &StepCtx<'_>,
    agents: &[Agent],
    ids: &[AgentId],
    cache: &mut BTreeMap<AgentId, String>,
    plan: &mut StepPlan,
) -> Result<(), LmError> {
    let exs = fan_out(ctx, ids, |&id| {
        let a = &agents[agent_index(agents, id).expect("listed agent")];
        perceive(&ctx.lm, ctx.world, a, agents)
    })?;
    for (id, ex) in ids.iter().zip(exs) {
        cache.insert(*id, ex.output.clone());
        plan.perceptions.push((*id, ex.output.clone()));
        plan.exchanges.push(ex);
    }
    Ok(())
}

pub(crate) fn acting_ids(agents: &[Agent]) -> Vec<AgentId> {
    agents.iter().filter(|a| a.can_act()).map(|a| a.id).collect()
}

pub(crate) fn live_agent(agents: &[Agent], id: u32) -> Option<usize> {
    agent_index(agents, AgentId(id)).filter(|&i| agents[i].can_act())
}

/// Appends a message to the recipients' histories and logs the delivery.
pub(crate) fn deliver(agents: &mut [Agent], plan: &mut StepPlan, from: AgentId, to: Option<AgentId>, msg: &str) {
    let (line, recipients): (String, Vec<AgentId>) = match to {
        Some(to) => (format!("{from} -> {to}: {msg}"), vec![from, to]),
        None => (
            format!("{from} -> ALL: {msg}"),
            agents.iter().filter(|a| a.alive).map(|a| a.id).collect(),
        ),
    };
    let mut seen = Vec::new();
    for id in recipients {
        if seen.contains(&id) {
            continue;
        }
        seen.push(id);
        if let Some(i) = agent_index(agents, id) {
            agents[i].message_history.push(line.clone());
            plan.deliveries.push(Delivery {
                to: id,
                text: line.clone(),
            });
        }
    }
}

pub fn is_do_nothing(text: &str) -> bool {
    let t: String = text
        .trim()
        .trim_matches(|c: char| !c.is_ascii_alphanumeric())
        .to_ascii_lowercase();
    matches!(
        t.as_str(),
        "do nothing" | "nothing" | "no action" | "noaction" | "idle" | "none" | "wait"
    )
}

/// Text action to primitive: "do nothing" directly, anything else through
/// the translator. A failed translation leaves the agent without an action.
/// "do nothing" for an agent mid-primitive lets it continue.
pub(crate) fn resolve(
    ctx: &StepCtx<'_>,
    agent: &Agent,
    text: &str,
    plan: &mut StepPlan,
) -> Result<Option<Primitive>, LmError> {
    if is_do_nothing(text) {
        return Ok(agent.is_idle().then_some(Primitive::Idle));
    }
    let tctx = TranslateCtx {
        agent: Some(agent.id),
        kind: agent.kind,
        catalog: ctx.catalog,
        width: ctx.world.width,
        height: ctx.world.height,
        max_retries: ctx.max_retries,
    };
    match translate(&ctx.lm, text, &tctx) {
        Ok(tr) => {
            plan.exchanges.extend(tr.exchanges);
            Ok(Some(tr.primitive))
        }
        Err(TranslateError::Failed {
            attempts,
            last_error,
            exchanges,
        }) => {
            plan.exchanges.extend(exchanges);
            plan.notes.push(format!(
                "{}: translation failed after {attempts} attempts ({last_error}); no action this step",
                agent.id
            ));
            Ok(None)
        }
        Err(TranslateError::Lm(e)) => Err(e),
    }
}

/// Translates `(agent, text)` tasks and records the activations; unknown or
/// inactive agents are dropped with a note.
pub(crate) fn assign(
    ctx: &StepCtx<'_>,
    agents: &[Agent],
    tasks: &[(u32, String)],
    plan: &mut StepPlan,
) -> Result<Vec<AgentId>, LmError> {
    let mut done = Vec::new();
    for (id, text) in tasks {
        let Some(i) = live_agent(agents, *id) else {
            plan.notes
                .push(format!("dropped plan entry for unknown or inactive AGENT {id}"));
            continue;
        };
        if let Some(p) = resolve(ctx, &agents[i], text, plan)? {
            plan.activate(agents[i].id, p);
            done.push(agents[i].id);
        }
    }
    Ok(done)
}

// ---- prompt text blocks ----

pub(crate) fn team_composition(agents: &[Agent]) -> String {
    agents
        .iter()
        .map(|a| {
            let status = if !a.alive {
                " (lost)"
            } else if a.aboard.is_some() {
                " (riding a helicopter)"
            } else {
                ""
            };
            format!("{}: {} Agent{status}", a.id, a.kind)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub(crate) fn status_line(a: &Agent) -> String {
    let mut s = format!("{} ({}) at {}", a.id, a.kind, a.pos);
    match a.kind {
        AgentKind::Firefighter => {
            s.push_str(&format!(", water {}", a.water));
            if a.carrying_civilian {
                s.push_str(", carrying a civilian");
            }
        }
        AgentKind::Helicopter => {
            s.push_str(&format!(", water payloads {}", a.water));
            if !a.passengers.is_empty() {
                let p: Vec<String> = a.passengers.iter().map(|p| p.to_string()).collect();
                s.push_str(&format!(", carrying {}", p.join(", ")));
            }
        }
        _ => {}
    }
    s
}

pub(crate) fn action_history(a: &Agent, window: usize) -> String {
    if a.action_history.is_empty() {
        return "None".into();
    }
    let skip = a.action_history.len().saturating_sub(window);
    a.action_history[skip..].join("\n")
}

pub(crate) fn chat_history(a: &Agent, window: usize) -> String {
    if a.message_history.is_empty() {
        return "None".into();
    }
    let skip = a.message_history.len().saturating_sub(window);
    a.message_history[skip..].join("\n")
}

pub(crate) fn current_action(a: &Agent) -> String {
    a.active
        .as_ref()
        .map_or_else(|| "None".into(), |p| p.primitive.describe())
}

pub(crate) fn team_abilities(agents: &[Agent], catalog: &ActionCatalog) -> String {
    let mut kinds: Vec<AgentKind> = agents.iter().map(|a| a.kind).collect();
    kinds.sort();
    kinds.dedup();
    kinds
        .into_iter()
        .map(|k| catalog.abilities(k))
        .collect::<Vec<_>>()
        .join("\n")
        .trim_end()
        .to_string()
}

pub(crate) fn perception_or_none(cache: &BTreeMap<AgentId, String>, id: AgentId) -> String {
    cache.get(&id).cloned().unwrap_or_else(|| "None".into())
}

#[cfg(test)]
mod tests;
