use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, OnceLock};

use regex::Regex;

use super::{Completion, GroundTruth, LanguageModel, LmError};
use crate::levels::Solver;
use crate::prompt::{classify, PromptKind};
use crate::translate::{action_for, format_action, ActionCatalog};
use crate::world::{AgentId, AgentKind, Primitive};

pub fn whitespace_tokens(s: &str) -> u64 {
    s.split_whitespace().count() as u64
}

#[derive(Debug, Clone, PartialEq)]
pub enum Script {
    /// Every agent does nothing; reviewers accept.
    Idle,
    /// Returns the prompt's last non-empty line.
    Echo,
    /// Answers with the scripted solver's choice for the agent asked about.
    Omniscient,
    /// Fixed responses served in call order.
    Canned(Vec<String>),
}

#[derive(Debug, Clone, Copy)]
struct Member {
    id: AgentId,
    idle: bool,
}

#[derive(Debug, Default)]
struct Oracle {
    solver: Solver,
    decisions: BTreeMap<AgentId, Primitive>,
    members: Vec<Member>,
}

/// Deterministic stand-in for a hosted model; token counts come from a
/// whitespace tokenizer.
#[derive(Debug)]
pub struct ScriptedMock {
    script: Script,
    cursor: AtomicUsize,
    oracle: Mutex<Oracle>,
}

fn re(cell: &'static OnceLock<Regex>, pat: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pat).expect("valid regex"))
}

fn first_id(prompt: &str) -> Option<AgentId> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let c = re(&RE, r"(?:AGENT|Agent) (\d+)").captures(prompt)?;
    c[1].parse().ok().map(AgentId)
}

fn all_ids(prompt: &str) -> Vec<AgentId> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let mut ids: Vec<AgentId> = re(&RE, r"AGENT (\d+)")
        .captures_iter(prompt)
        .filter_map(|c| c[1].parse().ok().map(AgentId))
        .collect();
    ids.sort();
    ids.dedup();
    ids
}

fn translation_reply(prompt: &str) -> String {
    let text = prompt
        .split_once("Here is the action we want to perform\n\n")
        .and_then(|(_, r)| r.split_once("\n\nYour job is to convert"))
        .map_or("", |(t, _)| t);
    let cat = ActionCatalog::builtin();
    // The drone block is a prefix of the helicopter block.
    let kind = AgentKind::ALL
        .into_iter()
        .map(|k| (k, cat.render_rows(k)))
        .filter(|(_, rows)| prompt.contains(rows.trim_end()))
        .max_by_key(|(_, rows)| rows.len())
        .map(|(k, _)| k);
    let action = kind
        .zip(Primitive::parse_description(text))
        .and_then(|(k, p)| action_for(k, &p, cat));
    match action {
        Some(a) => format_action(&a),
        None => "[0, 0, 0, \"unrecognized action\"]".into(),
    }
}

impl ScriptedMock {
    pub fn new(script: Script) -> Self {
        Self {
            script,
            cursor: AtomicUsize::new(0),
            oracle: Mutex::new(Oracle::default()),
        }
    }

    /// `idle`, `echo`, `omniscient` or `canned:<file>` where the file is a
    /// JSON array of response strings.
    pub fn from_spec(spec: &str) -> Result<Self, LmError> {
        let script = match spec {
            "idle" => Script::Idle,
            "echo" => Script::Echo,
            "omniscient" => Script::Omniscient,
            _ => {
                let path = spec
                    .strip_prefix("canned:")
                    .ok_or_else(|| LmError::Config(format!("unknown mock script `{spec}`")))?;
                let raw =
                    std::fs::read_to_string(path).map_err(|e| LmError::Config(format!("cannot read {path}: {e}")))?;
                let lines: Vec<String> = serde_json::from_str(&raw)
                    .map_err(|e| LmError::Config(format!("{path} is not a JSON string array: {e}")))?;
                Script::Canned(lines)
            }
        };
        Ok(Self::new(script))
    }

    fn action_text(&self, id: Option<AgentId>) -> String {
        if self.script != Script::Omniscient {
            return "do nothing".into();
        }
        let o = self.oracle.lock().expect("oracle lock");
        id.and_then(|id| o.decisions.get(&id))
            .map_or_else(|| "do nothing".into(), |p| p.describe())
    }

    fn reply(&self, prompt: &str) -> Result<String, LmError> {
        match &self.script {
            Script::Echo => {
                return Ok(prompt
                    .lines()
                    .rev()
                    .find(|l| !l.trim().is_empty())
                    .unwrap_or("")
                    .to_string())
            }
            Script::Canned(lines) => {
                let i = self.cursor.fetch_add(1, Ordering::SeqCst);
                return lines.get(i).cloned().ok_or(LmError::Exhausted(i));
            }
            Script::Idle | Script::Omniscient => {}
        }
        let id = first_id(prompt);
        let act = |id| format!("<action>{}</action>", self.action_text(id));
        Ok(match classify(prompt) {
            PromptKind::Perception => "Nothing here needs urgent attention.".into(),
            PromptKind::Translation => translation_reply(prompt),
            PromptKind::CamonPlan => {
                let mut s = act(id);
                if self.script == Script::Omniscient {
                    let o = self.oracle.lock().expect("oracle lock");
                    for m in o.members.iter().filter(|m| m.idle && Some(m.id) != id) {
                        if let Some(p) = o.decisions.get(&m.id) {
                            s.push_str(&format!("\n<{0}-action>{1}</{0}-action>", m.id, p.describe()));
                        }
                    }
                }
                s
            }
            PromptKind::CamonPropose | PromptKind::CoelaAction | PromptKind::EmbodiedAction => act(id),
            PromptKind::CamonReview => {
                static RE: OnceLock<Regex> = OnceLock::new();
                let proposer = re(&RE, r"Your teammate AGENT (\d+)")
                    .captures(prompt)
                    .and_then(|c| c[1].parse().ok())
                    .map(AgentId);
                format!(
                    "<decision>ACCEPT</decision>\n{}\n<message>Approved.</message>",
                    act(proposer)
                )
            }
            PromptKind::CoelaMessage => format!("<message>I will {}.</message>", self.action_text(id)),
            PromptKind::EmbodiedMessages => match self.script {
                Script::Omniscient => format!(
                    "<GLOBAL>{} will {}.</GLOBAL>",
                    id.map_or_else(String::new, |i| i.to_string()),
                    self.action_text(id)
                ),
                _ => "<reasoning>Nothing to share.</reasoning>".into(),
            },
            PromptKind::HmasPlanner => {
                let ids = match self.script {
                    Script::Omniscient => self
                        .oracle
                        .lock()
                        .expect("oracle lock")
                        .members
                        .iter()
                        .map(|m| m.id)
                        .collect(),
                    _ => all_ids(prompt),
                };
                ids.into_iter()
                    .map(|i| format!("<{i}>{}</{i}>", self.action_text(Some(i))))
                    .collect::<Vec<_>>()
                    .join("\n")
            }
            PromptKind::HmasFeedback => "<feedback>ACCEPT</feedback>".into(),
            PromptKind::Unknown => "do nothing".into(),
        })
    }
}

impl LanguageModel for ScriptedMock {
    fn complete(&self, prompt: &str) -> Result<Completion, LmError> {
        let text = self.reply(prompt)?;
        Ok(Completion {
            input_tokens: whitespace_tokens(prompt),
            output_tokens: whitespace_tokens(&text),
            text,
        })
    }

    fn observe_ground_truth(&self, truth: &GroundTruth<'_>) {
        if self.script != Script::Omniscient {
            return;
        }
        let mut o = self.oracle.lock().expect("oracle lock");
        let decisions = o.solver.decide(truth.level, truth.world, truth.agents, truth.params);
        o.decisions = decisions.into_iter().collect();
        o.members = truth
            .agents
            .iter()
            .filter(|a| a.can_act())
            .map(|a| Member {
                id: a.id,
                idle: a.is_idle(),
            })
            .collect();
    }

    fn concurrent(&self) -> bool {
        !matches!(self.script, Script::Canned(_))
    }

    fn describe(&self) -> String {
        match &self.script {
            Script::Idle => "mock:idle".into(),
            Script::Echo => "mock:echo".into(),
            Script::Omniscient => "mock:omniscient".into(),
            Script::Canned(l) => format!("mock:canned({} responses)", l.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::translate::build_translation_prompt;
    use crate::world::Cell;

    #[test]
    fn echo_returns_last_line() {
        let m = ScriptedMock::new(Script::Echo);
        let c = m.complete("first\nsecond line\n\n").unwrap();
        assert_eq!(c.text, "second line");
        assert_eq!((c.input_tokens, c.output_tokens), (3, 2));
    }

    #[test]
    fn canned_runs_out() {
        let m = ScriptedMock::new(Script::Canned(vec!["a".into()]));
        assert_eq!(m.complete("x").unwrap().text, "a");
        assert!(matches!(m.complete("x"), Err(LmError::Exhausted(1))));
    }

    #[test]
    fn translator_reply_matches_kind() {
        let m = ScriptedMock::new(Script::Idle);
        let p = build_translation_prompt("refill water", AgentKind::Helicopter, ActionCatalog::builtin());
        assert_eq!(m.complete(&p).unwrap().text, "[4, 0, 0, \"refill water\"]");
        let p = build_translation_prompt(
            &Primitive::MoveToLocation(Cell::new(3, 9)).describe(),
            AgentKind::Firefighter,
            ActionCatalog::builtin(),
        );
        assert_eq!(m.complete(&p).unwrap().text, "[1, 3, 9, \"move to (3, 9)\"]");
    }
}
