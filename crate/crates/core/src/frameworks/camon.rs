use std::collections::{BTreeMap, BTreeSet};

use super::markup::{agent_tags, tag};
use super::*;
use crate::prompt::{self, fill};

/// Leader-based planning: the leader plans for itself and optionally for
/// others; any other idle agent proposes, the leader reviews, and the
/// proposer then becomes leader.
#[derive(Debug, Default)]
pub struct Camon {
    leader: Option<AgentId>,
    perceptions: BTreeMap<AgentId, String>,
}

impl Camon {
    pub fn leader(&self) -> Option<AgentId> {
        self.leader
    }

    fn global_data(&self, agents: &[Agent], window: usize) -> String {
        agents
            .iter()
            .filter(|a| a.can_act())
            .map(|a| {
                format!(
                    "{}\nObservations: {}\nCurrent action: {}\nPast actions: {}",
                    status_line(a),
                    perception_or_none(&self.perceptions, a.id),
                    current_action(a),
                    action_history(a, window).replace('\n', "; ")
                )
            })
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

fn deliver_tagged(agents: &mut [Agent], plan: &mut StepPlan, from: AgentId, out: &str) {
    for (id, msg) in agent_tags(out, Some("message")) {
        match live_agent(agents, id) {
            Some(i) => {
                let to = agents[i].id;
                deliver(agents, plan, from, Some(to), &msg);
            }
            None => plan
                .notes
                .push(format!("dropped message to unknown or inactive AGENT {id}")),
        }
    }
}

impl Framework for Camon {
    fn kind(&self) -> FrameworkKind {
        FrameworkKind::Camon
    }

    fn step(&mut self, ctx: &StepCtx<'_>, agents: &mut [Agent]) -> Result<StepPlan, LmError> {
        let mut plan = StepPlan::default();
        let acting = acting_ids(agents);
        if acting.is_empty() {
            return Ok(plan);
        }
        if !self.leader.is_some_and(|l| acting.contains(&l)) {
            self.leader = Some(acting[0]);
        }

        // Agents mid-primitive keep their last perception.
        let idle: Vec<AgentId> = acting
            .iter()
            .copied()
            .filter(|&id| agents[agent_index(agents, id).unwrap()].is_idle())
            .collect();
        perceive_agents(ctx, agents, &idle, &mut self.perceptions, &mut plan)?;

        let cfg = ctx.cfg;
        let global = self.global_data(agents, cfg.history_window);
        let team = team_composition(agents);
        let abilities = team_abilities(agents, ctx.catalog);
        let mut assigned: BTreeSet<AgentId> = BTreeSet::new();

        for &id in &idle {
            if assigned.contains(&id) {
                continue;
            }
            let leader = self.leader.expect("leader chosen");
            let me = agents[agent_index(agents, id).unwrap()].clone();
            let mut tasks: Vec<(u32, String)> = Vec::new();
            if id == leader {
                let p = fill(
                    prompt::CAMON_PLAN,
                    &[
                        ("AGENT", &id.to_string()),
                        ("KIND", me.kind.name()),
                        ("POSITION", &me.pos.to_string()),
                        ("TEAM", &team),
                        ("TASK", &ctx.level.task),
                        ("HISTORY", &action_history(&me, cfg.history_window)),
                        ("CHAT", &chat_history(&me, cfg.chat_window)),
                        ("GLOBAL", &global),
                        ("ABILITIES", &abilities),
                    ],
                );
                let ex = ctx.lm.exchange(Some(id), "camon_plan", p)?;
                let out = ex.output.clone();
                plan.exchanges.push(ex);
                match tag(&out, "action") {
                    Some(a) => tasks.push((id.0, a)),
                    None => plan
                        .notes
                        .push(format!("{id}: plan has no <action> tag; no action this step")),
                }
                tasks.extend(agent_tags(&out, Some("action")).into_iter().filter(|(n, _)| *n != id.0));
                deliver_tagged(agents, &mut plan, id, &out);
            } else {
                let p = fill(
                    prompt::CAMON_PROPOSE,
                    &[
                        ("AGENT", &id.to_string()),
                        ("KIND", me.kind.name()),
                        ("WIDTH", &ctx.world.width.to_string()),
                        ("HEIGHT", &ctx.world.height.to_string()),
                        ("N", &agents.len().to_string()),
                        ("TEAM", &team),
                        ("PERCEPTION", &perception_or_none(&self.perceptions, id)),
                        ("TASK", &ctx.level.task),
                        ("HISTORY", &action_history(&me, cfg.history_window)),
                        ("CHAT", &chat_history(&me, cfg.chat_window)),
                        ("ABILITIES", ctx.catalog.abilities(me.kind).trim_end()),
                    ],
                );
                let ex = ctx.lm.exchange(Some(id), "camon_propose", p)?;
                let proposal = tag(&ex.output, "action").unwrap_or_else(|| ex.output.trim().to_string());
                plan.exchanges.push(ex);

                let r = fill(
                    prompt::CAMON_REVIEW,
                    &[
                        ("AGENT", &leader.to_string()),
                        ("PROPOSER", &id.to_string()),
                        ("KIND", me.kind.name()),
                        ("TEAM", &team),
                        ("TASK", &ctx.level.task),
                        ("GLOBAL", &global),
                        ("PROPOSAL", &proposal),
                        ("ABILITIES", &abilities),
                    ],
                );
                let ex = ctx.lm.exchange(Some(leader), "camon_review", r)?;
                let out = ex.output.clone();
                plan.exchanges.push(ex);
                let rejected = tag(&out, "decision").is_some_and(|d| d.to_ascii_uppercase().contains("REJECT"));
                let chosen = match tag(&out, "action") {
                    Some(a) => Some(a),
                    None if !rejected => Some(proposal),
                    None => None,
                };
                match chosen {
                    Some(a) => tasks.push((id.0, a)),
                    None => plan
                        .notes
                        .push(format!("{id}: proposal rejected without a replacement")),
                }
                tasks.extend(agent_tags(&out, Some("action")).into_iter().filter(|(n, _)| *n != id.0));
                if let Some(m) = tag(&out, "message") {
                    deliver(agents, &mut plan, leader, Some(id), &m);
                }
                deliver_tagged(agents, &mut plan, leader, &out);
                self.leader = Some(id);
            }
            assigned.extend(assign(ctx, agents, &tasks, &mut plan)?);
        }
        Ok(plan)
    }
}
