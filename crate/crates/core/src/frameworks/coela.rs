use std::collections::BTreeMap;

use super::markup::tag;
use super::*;
use crate::prompt::{self, fill};

/// Decentralized: each idle agent drafts a message, then either sends it
/// (and idles) or picks an action.
#[derive(Debug, Default)]
pub struct Coela {
    perceptions: BTreeMap<AgentId, String>,
}

impl Framework for Coela {
    fn kind(&self) -> FrameworkKind {
        FrameworkKind::Coela
    }

    fn step(&mut self, ctx: &StepCtx<'_>, agents: &mut [Agent]) -> Result<StepPlan, LmError> {
        let mut plan = StepPlan::default();
        let idle: Vec<AgentId> = agents
            .iter()
            .filter(|a| a.can_act() && a.is_idle())
            .map(|a| a.id)
            .collect();
        perceive_agents(ctx, agents, &idle, &mut self.perceptions, &mut plan)?;
        let cfg = ctx.cfg;
        let team = team_composition(agents);

        // Sequential: later agents see messages sent earlier this step.
        for &id in &idle {
            let me = agents[agent_index(agents, id).unwrap()].clone();
            let title = format!("Agent {}", id.0);
            let perception = perception_or_none(&self.perceptions, id);
            let history = action_history(&me, cfg.history_window);
            let chat = chat_history(&me, cfg.chat_window);
            let p = fill(
                prompt::COELA_MESSAGE,
                &[
                    ("AGENT_TITLE", &title),
                    ("KIND", me.kind.name()),
                    ("TEAM", &team),
                    ("TASK", &ctx.level.task),
                    ("PERCEPTION", &perception),
                    ("CHAT", &chat),
                    ("HISTORY", &history),
                ],
            );
            let ex = ctx.lm.exchange(Some(id), "coela_message", p)?;
            let proposed = tag(&ex.output, "message").unwrap_or_default();
            plan.exchanges.push(ex);

            let abilities: String = ctx
                .catalog
                .abilities(me.kind)
                .lines()
                .skip(1)
                .collect::<Vec<_>>()
                .join("\n");
            let p = fill(
                prompt::COELA_ACTION,
                &[
                    ("AGENT_TITLE", &title),
                    ("KIND", me.kind.name()),
                    ("POSITION", &me.pos.to_string()),
                    ("TEAM", &team),
                    ("TASK", &ctx.level.task),
                    ("PERCEPTION", &perception),
                    ("CHAT", &chat),
                    ("HISTORY", &history),
                    ("PROPOSED_MESSAGE", &proposed),
                    ("ABILITIES", &abilities),
                ],
            );
            let ex = ctx.lm.exchange(Some(id), "coela_action", p)?;
            let chosen = tag(&ex.output, "action").unwrap_or_else(|| ex.output.trim().to_string());
            plan.exchanges.push(ex);

            if chosen.contains("SEND MESSAGE") {
                if proposed.is_empty() {
                    plan.notes.push(format!("{id}: chose to send an empty message"));
                } else {
                    deliver(agents, &mut plan, id, None, &proposed);
                }
                plan.activate(id, Primitive::Idle);
            } else if let Some(prim) = resolve(ctx, &me, &chosen, &mut plan)? {
                plan.activate(id, prim);
            }
        }
        Ok(plan)
    }
}
