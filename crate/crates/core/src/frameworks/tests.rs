use super::*;
use crate::levels::{build_level, canonical_seeds, BuiltLevel, LevelOverrides, Roster};
use crate::lm::{whitespace_tokens, Completion, GroundTruth, LanguageModel, Script, ScriptedMock, Telemetry};
use crate::prompt::{classify, PromptKind};
use crate::world::Cell;

type Route = Box<dyn Fn(PromptKind, &str) -> Option<String> + Send + Sync>;

/// Answers chosen prompt kinds itself and defers the rest (perception,
/// translation) to the idle mock.
struct Routed {
    base: ScriptedMock,
    route: Route,
}

impl Routed {
    fn new(route: impl Fn(PromptKind, &str) -> Option<String> + Send + Sync + 'static) -> Self {
        Self {
            base: ScriptedMock::new(Script::Idle),
            route: Box::new(route),
        }
    }
}

impl LanguageModel for Routed {
    fn complete(&self, prompt: &str) -> Result<Completion, LmError> {
        match (self.route)(classify(prompt), prompt) {
            Some(text) => Ok(Completion {
                input_tokens: whitespace_tokens(prompt),
                output_tokens: whitespace_tokens(&text),
                text,
            }),
            None => self.base.complete(prompt),
        }
    }

    fn describe(&self) -> String {
        "routed".into()
    }
}

fn level(n: u32) -> BuiltLevel {
    let name = "Cut Trees: Sparse (small)";
    let ov = LevelOverrides {
        roster: Some(Roster::new(n, 0, 0, 0)),
        ..LevelOverrides::default()
    };
    build_level(name, canonical_seeds(name)[0], &ov).unwrap()
}

fn run_step(fw: &mut dyn Framework, b: &mut BuiltLevel, lm: &dyn LanguageModel, cfg: &FrameworkConfig) -> StepPlan {
    let telemetry = Telemetry::default();
    let params = AgentParams::default();
    lm.observe_ground_truth(&GroundTruth {
        level: &b.instance,
        world: &b.world,
        agents: &b.agents,
        params: &params,
    });
    let ctx = StepCtx {
        t: 0,
        level: &b.instance,
        world: &b.world,
        params: &params,
        lm: Metered::new(lm, &telemetry),
        catalog: ActionCatalog::builtin(),
        cfg,
        max_retries: 2,
    };
    let plan = fw.step(&ctx, &mut b.agents).unwrap();
    assert_eq!(telemetry.usage().api_calls, plan.exchanges.len() as u64);
    plan
}

fn count(plan: &StepPlan, role: &str) -> usize {
    plan.exchanges.iter().filter(|e| e.role == role).count()
}

fn move_to(x: i32, y: i32) -> Primitive {
    Primitive::MoveToLocation(Cell::new(x, y))
}

#[test]
fn camon_skips_agents_mid_primitive() {
    let mut b = level(3);
    for a in &mut b.agents {
        a.activate(move_to(1, 1));
    }
    let lm = ScriptedMock::new(Script::Idle);
    let plan = run_step(&mut Camon::default(), &mut b, &lm, &FrameworkConfig::default());
    assert!(plan.exchanges.is_empty());
    assert!(plan.activations.is_empty());
}

#[test]
fn camon_leader_plans_for_team() {
    let mut b = level(3);
    let lm = Routed::new(|k, _| {
        (k == PromptKind::CamonPlan).then(|| {
            "<reasoning>split up</reasoning>\n<action>move to (1, 1)</action>\n\
             <AGENT 2-action>move to (2, 2)<AGENT 2-action>\n\
             <AGENT 3-action>'cut all trees in current cell'</AGENT 3-action>\n\
             <AGENT 3-message>cut here</AGENT 3-message>"
                .to_string()
        })
    });
    let mut fw = Camon::default();
    let plan = run_step(&mut fw, &mut b, &lm, &FrameworkConfig::default());
    assert_eq!(count(&plan, "camon_plan"), 1);
    assert_eq!(count(&plan, "camon_propose"), 0);
    assert_eq!(count(&plan, "translate"), 3);
    assert_eq!(
        plan.activations,
        vec![
            (AgentId(1), move_to(1, 1)),
            (AgentId(2), move_to(2, 2)),
            (AgentId(3), Primitive::CutAllTrees)
        ]
    );
    assert_eq!(b.agents[2].message_history, vec!["AGENT 1 -> AGENT 3: cut here"]);
    assert_eq!(fw.leader(), Some(AgentId(1)));
}

#[test]
fn camon_leadership_follows_accepted_proposals() {
    let mut b = level(3);
    b.agents[0].activate(move_to(5, 5));
    let lm = Routed::new(|k, _| match k {
        PromptKind::CamonPropose => Some("<action>move to (3, 3)</action>".into()),
        PromptKind::CamonReview => Some("<decision>ACCEPT</decision>".into()),
        _ => None,
    });
    let mut fw = Camon::default();
    let plan = run_step(&mut fw, &mut b, &lm, &FrameworkConfig::default());
    let reviewers: Vec<_> = plan
        .exchanges
        .iter()
        .filter(|e| e.role == "camon_review")
        .map(|e| e.agent)
        .collect();
    assert_eq!(reviewers, vec![Some(AgentId(1)), Some(AgentId(2))]);
    assert_eq!(fw.leader(), Some(AgentId(3)));
    assert_eq!(plan.activations.len(), 2);
}

#[test]
fn camon_rejection_without_replacement_leaves_agent_idle() {
    let mut b = level(2);
    b.agents[0].activate(move_to(5, 5));
    let lm = Routed::new(|k, _| match k {
        PromptKind::CamonPropose => Some("<action>move to (3, 3)</action>".into()),
        PromptKind::CamonReview => Some("<decision>REJECT</decision>".into()),
        _ => None,
    });
    let plan = run_step(&mut Camon::default(), &mut b, &lm, &FrameworkConfig::default());
    assert!(plan.activations.is_empty());
    assert!(plan.notes.iter().any(|n| n.contains("rejected")));
}

#[test]
fn coela_send_message_idles_and_broadcasts_in_id_order() {
    let mut b = level(3);
    let lm = Routed::new(|k, p| match k {
        PromptKind::CoelaMessage => {
            let id = if p.contains("Agent 1") {
                1
            } else if p.contains("Agent 2") {
                2
            } else {
                3
            };
            Some(format!("<message>hello from {id}</message>"))
        }
        PromptKind::CoelaAction => Some("<action>SEND MESSAGE</action>".into()),
        _ => None,
    });
    let plan = run_step(&mut Coela::default(), &mut b, &lm, &FrameworkConfig::default());
    assert_eq!(count(&plan, "coela_message"), 3);
    assert_eq!(count(&plan, "translate"), 0);
    assert!(plan.activations.iter().all(|(_, p)| *p == Primitive::Idle));
    assert_eq!(
        b.agents[2].message_history,
        vec![
            "AGENT 1 -> ALL: hello from 1",
            "AGENT 2 -> ALL: hello from 2",
            "AGENT 3 -> ALL: hello from 3"
        ]
    );
}

#[test]
fn coela_later_agents_see_earlier_messages() {
    let mut b = level(2);
    let lm = Routed::new(|k, p| match k {
        PromptKind::CoelaMessage if p.contains("Agent 1") => Some("<message>go north</message>".into()),
        PromptKind::CoelaMessage => {
            assert!(p.contains("AGENT 1 -> ALL: go north"));
            Some("<message>ok</message>".into())
        }
        PromptKind::CoelaAction if p.contains("Agent 1") => Some("<action>SEND MESSAGE</action>".into()),
        PromptKind::CoelaAction => Some("<action>move to (4, 4)</action>".into()),
        _ => None,
    });
    let plan = run_step(&mut Coela::default(), &mut b, &lm, &FrameworkConfig::default());
    assert_eq!(
        plan.activations,
        vec![(AgentId(1), Primitive::Idle), (AgentId(2), move_to(4, 4))]
    );
}

#[test]
fn embodied_without_rounds_sends_no_messages() {
    let mut b = level(3);
    let cfg = FrameworkConfig {
        embodied_rounds: 0,
        ..FrameworkConfig::default()
    };
    let lm = ScriptedMock::new(Script::Idle);
    let plan = run_step(&mut Embodied::default(), &mut b, &lm, &cfg);
    assert_eq!(count(&plan, "embodied_messages"), 0);
    assert_eq!(count(&plan, "embodied_action"), 3);
    assert_eq!(count(&plan, "perception"), 3);
    assert!(plan.deliveries.is_empty());
}

#[test]
fn embodied_delivers_direct_and_global_messages() {
    let mut b = level(3);
    let cfg = FrameworkConfig {
        embodied_rounds: 2,
        ..FrameworkConfig::default()
    };
    let lm = Routed::new(|k, p| match k {
        PromptKind::EmbodiedMessages if p.starts_with("You are AGENT 1,") => {
            Some("<AGENT 2>'hold'</AGENT 2>\n<AGENT 9>lost</AGENT 9>\n<GLOBAL>regroup</GLOBAL>".into())
        }
        PromptKind::EmbodiedMessages => Some("<reasoning>quiet</reasoning>".into()),
        _ => None,
    });
    let plan = run_step(&mut Embodied::default(), &mut b, &lm, &cfg);
    assert_eq!(count(&plan, "embodied_messages"), 6);
    assert_eq!(
        b.agents[1].message_history,
        vec![
            "AGENT 1 -> AGENT 2: hold",
            "AGENT 1 -> ALL: regroup",
            "AGENT 1 -> AGENT 2: hold",
            "AGENT 1 -> ALL: regroup"
        ]
    );
    assert_eq!(b.agents[2].message_history, vec!["AGENT 1 -> ALL: regroup"; 2]);
    assert!(plan.notes.iter().any(|n| n.contains("AGENT 9")));
    assert_eq!(plan.activations.len(), 3);
}

#[test]
fn embodied_do_nothing_keeps_running_primitive() {
    let mut b = level(2);
    b.agents[0].activate(move_to(6, 6));
    let lm = ScriptedMock::new(Script::Idle);
    let plan = run_step(&mut Embodied::default(), &mut b, &lm, &FrameworkConfig::default());
    assert_eq!(plan.activations, vec![(AgentId(2), Primitive::Idle)]);
}

fn hmas_plan() -> String {
    "<AGENT 1>move to (1, 2)</AGENT 1>\n<AGENT 2>move to (2, 1)</AGENT 2>\n<AGENT 3>do nothing</AGENT 3>".into()
}

#[test]
fn hmas_unanimous_acceptance_takes_one_round() {
    let mut b = level(3);
    let lm = Routed::new(|k, _| match k {
        PromptKind::HmasPlanner => Some(hmas_plan()),
        PromptKind::HmasFeedback => Some("<feedback>'ACCEPT'</feedback>".into()),
        _ => None,
    });
    let mut fw = Hmas2::default();
    let plan = run_step(&mut fw, &mut b, &lm, &FrameworkConfig::default());
    assert_eq!(count(&plan, "hmas_planner"), 1);
    assert_eq!(count(&plan, "hmas_feedback"), 3);
    assert_eq!(
        plan.activations,
        vec![
            (AgentId(1), move_to(1, 2)),
            (AgentId(2), move_to(2, 1)),
            (AgentId(3), Primitive::Idle)
        ]
    );
    assert!(plan.notes.is_empty());
}

#[test]
fn hmas_one_rejection_triggers_a_redraft_with_feedback() {
    let mut b = level(3);
    let lm = Routed::new(|k, p| match k {
        PromptKind::HmasPlanner => Some(hmas_plan()),
        PromptKind::HmasFeedback if p.contains("You are AGENT 2,") => {
            Some("<feedback>REJECT: too far</feedback>".into())
        }
        PromptKind::HmasFeedback => Some("<feedback>ACCEPT</feedback>".into()),
        _ => None,
    });
    let mut seen = Vec::new();
    let plan = run_step(&mut Hmas2::default(), &mut b, &lm, &FrameworkConfig::default());
    for e in plan.exchanges.iter().filter(|e| e.role == "hmas_planner") {
        seen.push(e.prompt.contains("AGENT 2: REJECT: too far"));
    }
    // The redraft is identical, so it is rejected again until the cap.
    assert_eq!(seen, vec![false, true, true]);
    assert!(plan.notes.iter().any(|n| n.contains("after 3 rounds")));
    assert_eq!(plan.activations.len(), 3);
}

#[test]
fn hmas_redraft_accepted_on_second_round() {
    let mut b = level(2);
    let lm = Routed::new(|k, p| match k {
        PromptKind::HmasPlanner if p.contains("Feedback from your team") => {
            Some("<AGENT 1>move to (1, 2)</AGENT 1>\n<AGENT 2>move to (3, 3)</AGENT 2>".into())
        }
        PromptKind::HmasPlanner => Some("<AGENT 1>move to (1, 2)</AGENT 1>\n<AGENT 2>move to (2, 1)</AGENT 2>".into()),
        PromptKind::HmasFeedback if p.contains("You are AGENT 2,") && p.contains("move to (2, 1)") => {
            Some("<feedback>REJECT</feedback>".into())
        }
        PromptKind::HmasFeedback => Some("<feedback>ACCEPT</feedback>".into()),
        _ => None,
    });
    let plan = run_step(&mut Hmas2::default(), &mut b, &lm, &FrameworkConfig::default());
    assert_eq!(count(&plan, "hmas_planner"), 2);
    assert_eq!(count(&plan, "hmas_feedback"), 4);
    assert_eq!(plan.activations[1], (AgentId(2), move_to(3, 3)));
    assert!(plan.notes.is_empty());
}

#[test]
fn hmas_notes_agents_missing_from_plan() {
    let mut b = level(2);
    let lm = Routed::new(|k, _| match k {
        PromptKind::HmasPlanner => Some("<AGENT 1>move to (1, 2)</AGENT 1>".into()),
        PromptKind::HmasFeedback => Some("<feedback>ACCEPT</feedback>".into()),
        _ => None,
    });
    let mut fw = Hmas2::default();
    let plan = run_step(&mut fw, &mut b, &lm, &FrameworkConfig::default());
    assert_eq!(plan.notes, vec!["AGENT 2: missing from the plan"]);
    // The second step's prompts carry the first step's record.
    let plan = run_step(&mut fw, &mut b, &lm, &FrameworkConfig::default());
    let p = &plan.exchanges.iter().find(|e| e.role == "hmas_planner").unwrap().prompt;
    assert!(p.contains("Step 0:") && p.contains("AGENT 1: move to (1, 2)"));
}

#[test]
fn do_nothing_and_parse_framework_names() {
    let mut b = level(2);
    let lm = ScriptedMock::new(Script::Idle);
    let plan = run_step(&mut DoNothing, &mut b, &lm, &FrameworkConfig::default());
    assert_eq!(plan, StepPlan::default());
    assert_eq!("hmas2".parse::<FrameworkKind>().unwrap(), FrameworkKind::Hmas2);
    assert_eq!("do nothing".parse::<FrameworkKind>().unwrap(), FrameworkKind::DoNothing);
    assert_eq!("camon".parse::<FrameworkKind>().unwrap(), FrameworkKind::Camon);
    assert!("magic".parse::<FrameworkKind>().is_err());
    for k in FrameworkKind::ALL {
        let j = serde_json::to_string(&k).unwrap();
        assert_eq!(j, format!("\"{}\"", k.name()));
    }
}

#[test]
fn do_nothing_phrases() {
    for t in ["do nothing", "'Do Nothing'", " idle.", "No action"] {
        assert!(is_do_nothing(t), "{t}");
    }
    assert!(!is_do_nothing("do nothing until the fire is out, then move to (1, 1)"));
}

#[test]
fn omniscient_mock_drives_every_framework() {
    for kind in [
        FrameworkKind::Camon,
        FrameworkKind::Coela,
        FrameworkKind::Embodied,
        FrameworkKind::Hmas2,
    ] {
        let mut b = level(2);
        let lm = ScriptedMock::new(Script::Omniscient);
        let mut fw = make_framework(kind);
        let plan = run_step(fw.as_mut(), &mut b, &lm, &FrameworkConfig::default());
        assert!(
            plan.activations.iter().any(|(_, p)| *p != Primitive::Idle),
            "{kind}: {:?}",
            plan.notes
        );
        assert!(
            plan.notes.iter().all(|n| !n.contains("translation failed")),
            "{kind}: {:?}",
            plan.notes
        );
    }
}
