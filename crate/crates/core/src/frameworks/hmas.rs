use std::collections::BTreeMap;

use super::markup::{agent_tags, tag};
use super::*;
use crate::prompt::{self, fill};

/// Central planner with per-agent feedback. The plan is re-drafted until
/// every agent accepts or the round cap is reached.
#[derive(Debug, Default)]
pub struct Hmas2 {
    perceptions: BTreeMap<AgentId, String>,
    step_history: Vec<String>,
}

fn accepts(feedback: &str) -> bool {
    let f = feedback.trim().trim_matches(|c: char| !c.is_ascii_alphanumeric());
    f.eq_ignore_ascii_case("ACCEPT")
}

impl Hmas2 {
    fn global_state(&self, ctx: &StepCtx<'_>, agents: &[Agent]) -> String {
        let mut blocks: Vec<String> = agents
            .iter()
            .filter(|a| a.can_act())
            .map(|a| {
                let names: Vec<&str> = ctx.catalog.rows(a.kind).iter().map(|r| r.name.as_str()).collect();
                format!(
                    "{}\nObservations: {}\nCurrent action: {}\nAvailable actions: {}, Do Nothing",
                    status_line(a),
                    perception_or_none(&self.perceptions, a.id),
                    current_action(a),
                    names.join(", ")
                )
            })
            .collect();
        blocks.push(team_abilities(agents, ctx.catalog));
        blocks.join("\n\n")
    }

    fn step_history(&self, window: usize) -> String {
        if self.step_history.is_empty() {
            return "None".into();
        }
        let skip = self.step_history.len().saturating_sub(window);
        self.step_history[skip..].join("\n\n")
    }
}

impl Framework for Hmas2 {
    fn kind(&self) -> FrameworkKind {
        FrameworkKind::Hmas2
    }

    fn step(&mut self, ctx: &StepCtx<'_>, agents: &mut [Agent]) -> Result<StepPlan, LmError> {
        let mut plan = StepPlan::default();
        let acting = acting_ids(agents);
        if acting.is_empty() {
            return Ok(plan);
        }
        perceive_agents(ctx, agents, &acting, &mut self.perceptions, &mut plan)?;
        let cfg = ctx.cfg;
        let global = self.global_state(ctx, agents);
        let history = self.step_history(cfg.step_history_window);

        let mut review = String::new();
        let mut draft = String::new();
        for round in 1..=cfg.hmas_max_rounds.max(1) {
            let feedback_block = if review.is_empty() {
                String::new()
            } else {
                format!("\nFeedback from your team on the previous plan:\n\n{review}\n---\n")
            };
            let p = fill(
                prompt::HMAS_PLANNER,
                &[
                    ("TASK", &ctx.level.task),
                    ("STEP_HISTORY", &history),
                    ("GLOBAL", &global),
                    ("REVIEW", &feedback_block),
                ],
            );
            let ex = ctx.lm.exchange(None, "hmas_planner", p)?;
            draft = ex.output.clone();
            plan.exchanges.push(ex);

            let snapshot: &[Agent] = agents;
            let exs = fan_out(ctx, &acting, |&id| {
                let me = &snapshot[agent_index(snapshot, id).unwrap()];
                let p = fill(
                    prompt::HMAS_FEEDBACK,
                    &[
                        ("AGENT", &id.to_string()),
                        ("KIND", me.kind.name()),
                        ("TASK", &ctx.level.task),
                        ("STEP_HISTORY", &history),
                        ("GLOBAL", &global),
                        ("PLAN", &draft),
                        ("POSITION", &me.pos.to_string()),
                    ],
                );
                ctx.lm.exchange(Some(id), "hmas_feedback", p)
            })?;
            review.clear();
            for (&id, ex) in acting.iter().zip(exs) {
                let fb = tag(&ex.output, "feedback").unwrap_or_else(|| ex.output.trim().to_string());
                if !accepts(&fb) {
                    review.push_str(&format!("{id}: {fb}\n"));
                }
                plan.exchanges.push(ex);
            }
            if review.is_empty() {
                break;
            }
            if round == cfg.hmas_max_rounds.max(1) {
                plan.notes.push(format!(
                    "plan not unanimously accepted after {round} rounds; executing the last draft"
                ));
            }
        }

        let tasks = agent_tags(&draft, None);
        for &id in &acting {
            if !tasks.iter().any(|(n, _)| *n == id.0) {
                plan.notes.push(format!("{id}: missing from the plan"));
            }
        }
        assign(ctx, agents, &tasks, &mut plan)?;

        let mut record = format!("Step {}:\nState:\n", ctx.t);
        for a in agents.iter().filter(|a| a.can_act()) {
            record.push_str(&status_line(a));
            record.push('\n');
        }
        record.push_str("Actions:\n");
        for (n, text) in &tasks {
            record.push_str(&format!("AGENT {n}: {text}\n"));
        }
        self.step_history.push(record.trim_end().to_string());
        let excess = self.step_history.len().saturating_sub(cfg.step_history_window);
        self.step_history.drain(..excess);
        Ok(plan)
    }
}
