//! Tag extraction from model output. Tags must match exactly; whitespace
//! inside them and around their contents is ignored.

use regex::Regex;

fn tag_re(name: &str) -> Regex {
    let n = regex::escape(name);
    Regex::new(&format!(r"(?is)<\s*{n}\s*>(.*?)<\s*/\s*{n}\s*>")).expect("valid regex")
}

/// Trims whitespace and one layer of matching quotes.
pub fn clean(s: &str) -> String {
    let t = s.trim();
    for (open, close) in [('\'', '\''), ('"', '"'), ('`', '`'), ('(', ')')] {
        if t.len() >= 2 && t.starts_with(open) && t.ends_with(close) {
            return t[1..t.len() - 1].trim().to_string();
        }
    }
    t.to_string()
}

/// Contents of the first `<name>..</name>`.
pub fn tag(text: &str, name: &str) -> Option<String> {
    tag_re(name).captures(text).map(|c| clean(&c[1]))
}

pub fn tags(text: &str, name: &str) -> Vec<String> {
    tag_re(name).captures_iter(text).map(|c| clean(&c[1])).collect()
}

/// `<AGENT n-suffix>..<AGENT n-suffix>` pairs (closing slash optional, as
/// in the plan templates), or `<AGENT n>..</AGENT n>` when `suffix` is
/// `None`. Pairs whose ids disagree are skipped.
pub fn agent_tags(text: &str, suffix: Option<&str>) -> Vec<(u32, String)> {
    let pat = match suffix {
        Some(sfx) => {
            let s = regex::escape(sfx);
            format!(r"(?is)<\s*AGENT\s*(\d+)\s*-\s*{s}\s*>(.*?)<\s*/?\s*AGENT\s*(\d+)\s*-\s*{s}\s*>")
        }
        None => r"(?is)<\s*AGENT\s*(\d+)\s*>(.*?)<\s*/\s*AGENT\s*(\d+)\s*>".to_string(),
    };
    let re = Regex::new(&pat).expect("valid regex");
    re.captures_iter(text)
        .filter(|c| c[1] == c[3])
        .filter_map(|c| Some((c[1].parse().ok()?, clean(&c[2]))))
        .collect()
}
