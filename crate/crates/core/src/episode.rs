//! The episode loop and log replay.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fire::FireConfig;
use crate::frameworks::{make_framework, FrameworkConfig, FrameworkKind, StepCtx};
use crate::levels::{build_level, score, termination, BuiltLevel, LevelError, LevelOverrides, ScoreTracker};
use crate::lm::{GroundTruth, LanguageModel, Metered, Telemetry};
use crate::runlog::{usage_of, Footer, Header, RunLog, StepRecord, FORMAT_VERSION};
use crate::translate::ActionCatalog;
use crate::world::{agent_index, world_digest, world_step, Agent, WorldMap};

/// Everything besides the model that shapes an episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub overrides: LevelOverrides,
    pub fire: FireConfig,
    pub framework: FrameworkConfig,
    /// Translator re-prompts after the first attempt.
    pub max_retries: u32,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            overrides: LevelOverrides::default(),
            fire: FireConfig::default(),
            framework: FrameworkConfig::default(),
            max_retries: 2,
        }
    }
}

/// How close an active fire must be for a civilian to count as endangered.
pub const ENDANGER_RADIUS: i32 = 3;

/// Whether an agent that can act sees a civilian with active fire nearby.
pub fn objective_conflict(world: &WorldMap, agents: &[Agent], params: &crate::world::AgentParams) -> bool {
    for (i, &n) in world.civilians.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let c = world.cell(i);
        let mut endangered = false;
        'scan: for dy in -ENDANGER_RADIUS..=ENDANGER_RADIUS {
            for dx in -ENDANGER_RADIUS..=ENDANGER_RADIUS {
                let d = c.offset(dx, dy);
                if world.in_bounds(d) && world.is_active_fire(world.index(d)) {
                    endangered = true;
                    break 'scan;
                }
            }
        }
        if endangered
            && agents
                .iter()
                .any(|a| a.can_act() && a.pos.chebyshev(c) <= params.kind(a.kind).vision_radius)
        {
            return true;
        }
    }
    false
}

/// Runs `kind` on one level and seed until termination. A model failure
/// ends the episode early with `footer.aborted` set.
pub fn run_episode(
    kind: FrameworkKind,
    level: &str,
    seed: u64,
    lm: &dyn LanguageModel,
    cfg: &EpisodeConfig,
) -> Result<RunLog, LevelError> {
    let BuiltLevel {
        instance,
        mut world,
        mut agents,
    } = build_level(level, seed, &cfg.overrides)?;
    let params = &cfg.overrides.agents;
    let catalog = ActionCatalog::builtin();
    let mut framework = make_framework(kind);
    let telemetry = Telemetry::default();

    let header = Header {
        format: FORMAT_VERSION,
        level: instance.name().to_string(),
        seed,
        framework: kind,
        lm: if kind.uses_lm() { lm.describe() } else { "none".into() },
        agent_count: agents.len(),
        overrides: cfg.overrides.clone(),
        fire: cfg.fire.clone(),
        framework_cfg: cfg.framework.clone(),
        max_retries: cfg.max_retries,
        initial_digest: world_digest(&world, &agents),
    };

    let mut tracker = ScoreTracker::default();
    tracker.refresh(&world, &agents);
    let mut steps = Vec::new();
    let mut conflict = objective_conflict(&world, &agents, params);
    let mut aborted = None;
    let mut ended = None;
    let mut t = 0;
    loop {
        let s = score(&instance, &tracker);
        if let Some(why) = termination(&instance, &world, &agents, &s, t) {
            ended = Some(why);
            break;
        }
        let before = telemetry.usage();
        let plan = if kind.uses_lm() {
            lm.observe_ground_truth(&GroundTruth {
                level: &instance,
                world: &world,
                agents: &agents,
                params,
            });
            let ctx = StepCtx {
                t,
                level: &instance,
                world: &world,
                params,
                lm: Metered::new(lm, &telemetry),
                catalog,
                cfg: &cfg.framework,
                max_retries: cfg.max_retries,
            };
            framework.step(&ctx, &mut agents)
        } else {
            let null = NullLm;
            let ctx = StepCtx {
                t,
                level: &instance,
                world: &world,
                params,
                lm: Metered::new(&null, &telemetry),
                catalog,
                cfg: &cfg.framework,
                max_retries: cfg.max_retries,
            };
            framework.step(&ctx, &mut agents)
        };
        let plan = match plan {
            Ok(p) => p,
            Err(e) => {
                log::warn!("{level} seed {seed}: aborting at step {t}: {e}");
                aborted = Some(format!("step {t}: {e}"));
                break;
            }
        };
        for (id, p) in &plan.activations {
            if let Some(i) = agent_index(&agents, *id) {
                agents[i].activate(*p);
            }
        }
        let outcome = world_step(&mut world, &mut agents, params, &cfg.fire);
        tracker.observe(&outcome, &world, &agents);
        conflict |= objective_conflict(&world, &agents, params);
        let usage = telemetry.usage() - before;
        debug_assert_eq!(usage, usage_of(&plan.exchanges));
        steps.push(StepRecord {
            t,
            activations: plan.activations,
            deliveries: plan.deliveries,
            perceptions: plan.perceptions,
            exchanges: plan.exchanges,
            notes: plan.notes,
            fire: outcome.fire,
            events: outcome.events,
            score: score(&instance, &tracker),
            usage,
            digest: world_digest(&world, &agents),
        });
        t += 1;
    }

    Ok(RunLog {
        header,
        footer: Footer {
            score: score(&instance, &tracker),
            termination: ended,
            steps: t,
            usage: telemetry.usage(),
            aborted,
            objective_conflict: conflict,
        },
        steps,
    })
}

/// Stands in for a model under frameworks that never call one.
struct NullLm;

impl LanguageModel for NullLm {
    fn complete(&self, _prompt: &str) -> Result<crate::lm::Completion, crate::lm::LmError> {
        Err(crate::lm::LmError::Config(
            "this framework does not use a language model".into(),
        ))
    }

    fn describe(&self) -> String {
        "none".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub steps_checked: u64,
    pub final_digest: String,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("cannot rebuild level: {0}")]
    Level(#[from] LevelError),
    #[error("initial digest mismatch: log {logged}, rebuilt {rebuilt}")]
    Initial { logged: String, rebuilt: String },
    #[error("step {t}: digest mismatch: log {logged}, replay {replayed}")]
    Digest { t: u64, logged: String, replayed: String },
    #[error("step {t}: {reason}")]
    Record { t: u64, reason: String },
    #[error("footer: {0}")]
    Footer(String),
}

/// Re-simulates a log from its header and recorded actions, checking the
/// digest after every step.
pub fn replay(log: &RunLog) -> Result<ReplayReport, ReplayError> {
    let h = &log.header;
    let BuiltLevel {
        mut world, mut agents, ..
    } = build_level(&h.level, h.seed, &h.overrides)?;
    let params = &h.overrides.agents;
    let initial = world_digest(&world, &agents);
    if initial != h.initial_digest {
        return Err(ReplayError::Initial {
            logged: h.initial_digest.clone(),
            rebuilt: initial,
        });
    }
    let mut total = crate::lm::Usage::default();
    for (k, rec) in log.steps.iter().enumerate() {
        let t = rec.t;
        if t != k as u64 {
            return Err(ReplayError::Record {
                t,
                reason: format!("expected step {k}"),
            });
        }
        if usage_of(&rec.exchanges) != rec.usage {
            return Err(ReplayError::Record {
                t,
                reason: "usage does not match the recorded exchanges".into(),
            });
        }
        total += rec.usage;
        for d in &rec.deliveries {
            let i = agent_index(&agents, d.to).ok_or_else(|| ReplayError::Record {
                t,
                reason: format!("delivery to unknown {}", d.to),
            })?;
            agents[i].message_history.push(d.text.clone());
        }
        for (id, p) in &rec.activations {
            if let Some(i) = agent_index(&agents, *id) {
                agents[i].activate(*p);
            }
        }
        world_step(&mut world, &mut agents, params, &h.fire);
        let d = world_digest(&world, &agents);
        if d != rec.digest {
            return Err(ReplayError::Digest {
                t,
                logged: rec.digest.clone(),
                replayed: d,
            });
        }
    }
    if total != log.footer.usage {
        return Err(ReplayError::Footer(format!(
            "usage {:?} differs from the sum of steps {:?}",
            log.footer.usage, total
        )));
    }
    if log.footer.steps != log.steps.len() as u64 {
        return Err(ReplayError::Footer("step count differs from the records".into()));
    }
    Ok(ReplayReport {
        steps_checked: log.steps.len() as u64,
        final_digest: world_digest(&world, &agents),
    })
}
