use std::collections::BTreeMap;

use super::markup::{agent_tags, tag, tags};
use super::*;
use crate::prompt::{self, fill};

/// Every agent acts every step after `C` rounds of targeted or global
/// messaging.
#[derive(Debug, Default)]
pub struct Embodied {
    perceptions: BTreeMap<AgentId, String>,
}

impl Framework for Embodied {
    fn kind(&self) -> FrameworkKind {
        FrameworkKind::Embodied
    }

    fn step(&mut self, ctx: &StepCtx<'_>, agents: &mut [Agent]) -> Result<StepPlan, LmError> {
        let mut plan = StepPlan::default();
        let acting = acting_ids(agents);
        perceive_agents(ctx, agents, &acting, &mut self.perceptions, &mut plan)?;
        let cfg = ctx.cfg;
        let team = team_composition(agents);

        for _ in 0..cfg.embodied_rounds {
            // Everyone drafts against the same histories; deliveries are
            // merged in id order afterwards.
            let snapshot: &[Agent] = agents;
            let exs = fan_out(ctx, &acting, |&id| {
                let me = &snapshot[agent_index(snapshot, id).unwrap()];
                let p = fill(
                    prompt::EMBODIED_MESSAGES,
                    &[
                        ("AGENT", &id.to_string()),
                        ("KIND", me.kind.name()),
                        ("TEAM", &team),
                        ("TASK", &ctx.level.task),
                        ("PERCEPTION", &perception_or_none(&self.perceptions, id)),
                        ("HISTORY", &action_history(me, cfg.history_window)),
                        ("CHAT", &chat_history(me, cfg.chat_window)),
                    ],
                );
                ctx.lm.exchange(Some(id), "embodied_messages", p)
            })?;
            for (&id, ex) in acting.iter().zip(exs) {
                for (to, msg) in agent_tags(&ex.output, None) {
                    match live_agent(agents, to) {
                        Some(i) => {
                            let to = agents[i].id;
                            deliver(agents, &mut plan, id, Some(to), &msg);
                        }
                        None => plan.notes.push(format!("{id}: dropped message to unknown AGENT {to}")),
                    }
                }
                for msg in tags(&ex.output, "GLOBAL") {
                    deliver(agents, &mut plan, id, None, &msg);
                }
                plan.exchanges.push(ex);
            }
        }

        let snapshot: &[Agent] = agents;
        let exs = fan_out(ctx, &acting, |&id| {
            let me = &snapshot[agent_index(snapshot, id).unwrap()];
            let p = fill(
                prompt::EMBODIED_ACTION,
                &[
                    ("AGENT", &id.to_string()),
                    ("KIND", me.kind.name()),
                    ("POSITION", &me.pos.to_string()),
                    ("TASK", &ctx.level.task),
                    ("PERCEPTION", &perception_or_none(&self.perceptions, id)),
                    ("CHAT", &chat_history(me, cfg.chat_window)),
                    ("HISTORY", &action_history(me, cfg.history_window)),
                    ("ABILITIES", ctx.catalog.abilities(me.kind).trim_end()),
                ],
            );
            ctx.lm.exchange(Some(id), "embodied_action", p)
        })?;
        for (&id, ex) in acting.iter().zip(exs) {
            let text = tag(&ex.output, "action").unwrap_or_else(|| ex.output.trim().to_string());
            plan.exchanges.push(ex);
            let me = agents[agent_index(agents, id).unwrap()].clone();
            if let Some(p) = resolve(ctx, &me, &text, &mut plan)? {
                plan.activate(id, p);
            }
        }
        Ok(plan)
    }
}
