//! Prompt templates with `{{SLOT}}` placeholders, and a classifier that
//! tells the prompt families apart (used by the scripted model).

pub const PERCEPTION: &str = include_str!("../data/prompts/perception.txt");
pub const TRANSLATOR: &str = include_str!("../data/prompts/translator.txt");
pub const CAMON_PLAN: &str = include_str!("../data/prompts/camon_plan.txt");
pub const CAMON_PROPOSE: &str = include_str!("../data/prompts/camon_propose.txt");
pub const CAMON_REVIEW: &str = include_str!("../data/prompts/camon_review.txt");
pub const COELA_MESSAGE: &str = include_str!("../data/prompts/coela_message.txt");
pub const COELA_ACTION: &str = include_str!("../data/prompts/coela_action.txt");
pub const EMBODIED_MESSAGES: &str = include_str!("../data/prompts/embodied_messages.txt");
pub const EMBODIED_ACTION: &str = include_str!("../data/prompts/embodied_action.txt");
pub const HMAS_PLANNER: &str = include_str!("../data/prompts/hmas_planner.txt");
pub const HMAS_FEEDBACK: &str = include_str!("../data/prompts/hmas_feedback.txt");

/// Substitutes every `{{KEY}}` in one left-to-right pass, so slot values
/// are never themselves scanned for placeholders.
///
/// # Panics
/// If the template names a slot missing from `slots`.
pub fn fill(template: &str, slots: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + slots.iter().map(|s| s.1.len()).sum::<usize>());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after.find("}}").expect("unterminated slot in template");
        let key = &after[..end];
        let value = slots
            .iter()
            .find(|(k, _)| *k == key)
            .unwrap_or_else(|| panic!("no value for template slot {key}"))
            .1;
        out.push_str(value);
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptKind {
    Perception,
    Translation,
    CamonPlan,
    CamonPropose,
    CamonReview,
    CoelaMessage,
    CoelaAction,
    EmbodiedMessages,
    EmbodiedAction,
    HmasPlanner,
    HmasFeedback,
    Unknown,
}

pub fn classify(prompt: &str) -> PromptKind {
    const MARKERS: [(&str, PromptKind); 11] = [
        ("This is your minimap view", PromptKind::Perception),
        (
            "convert a single text action into a structured format",
            PromptKind::Translation,
        ),
        ("review this action and ACCEPT or REJECT", PromptKind::CamonReview),
        ("currently acting as the leader", PromptKind::CamonPlan),
        ("Your job is to propose your next action", PromptKind::CamonPropose),
        ("You are the communicator module", PromptKind::CoelaMessage),
        ("[send message to groupchat]", PromptKind::CoelaAction),
        ("generate a list of short messages", PromptKind::EmbodiedMessages),
        ("ONE and only ONE of these types", PromptKind::EmbodiedAction),
        ("You are central planner", PromptKind::HmasPlanner),
        ("provide feedback to the action plan", PromptKind::HmasFeedback),
    ];
    MARKERS
        .iter()
        .find(|(m, _)| prompt.contains(m))
        .map_or(PromptKind::Unknown, |&(_, k)| k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_is_single_pass() {
        let s = fill("a {{X}} b {{Y}}", &[("X", "{{Y}}"), ("Y", "2")]);
        assert_eq!(s, "a {{Y}} b 2");
    }

    #[test]
    #[should_panic(expected = "no value for template slot")]
    fn fill_rejects_missing_slot() {
        fill("{{NOPE}}", &[]);
    }

    #[test]
    fn every_template_classifies_as_itself() {
        let cases = [
            (PERCEPTION, PromptKind::Perception),
            (TRANSLATOR, PromptKind::Translation),
            (CAMON_PLAN, PromptKind::CamonPlan),
            (CAMON_PROPOSE, PromptKind::CamonPropose),
            (CAMON_REVIEW, PromptKind::CamonReview),
            (COELA_MESSAGE, PromptKind::CoelaMessage),
            (COELA_ACTION, PromptKind::CoelaAction),
            (EMBODIED_MESSAGES, PromptKind::EmbodiedMessages),
            (EMBODIED_ACTION, PromptKind::EmbodiedAction),
            (HMAS_PLANNER, PromptKind::HmasPlanner),
            (HMAS_FEEDBACK, PromptKind::HmasFeedback),
        ];
        for (t, k) in cases {
            assert_eq!(classify(t), k);
        }
        assert_eq!(classify("hello"), PromptKind::Unknown);
    }
}
