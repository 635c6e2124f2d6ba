//! The execution module: free-text actions become structured `Action`
//! records, checked against a per-kind catalog and the map bounds, with
//! re-prompting on failure.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::lm::{Exchange, LmError, Metered};
use crate::prompt;
use crate::world::{AgentId, AgentKind, Cell, Primitive};

const CATALOG_TOML: &str = include_str!("../data/catalog.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    MoveToLocation,
    CutTrees,
    CutAllTrees,
    PickUpCivilian,
    DropOffCivilian,
    SprayWaterCone,
    RefillWater,
    DriveNoCut,
    DriveClearPath,
    FlyToLocation,
    PickUpFirefighters,
    DropOffFirefighters,
    DropWater,
}

impl PrimitiveKind {
    pub fn of(p: &Primitive) -> Option<PrimitiveKind> {
        use PrimitiveKind as K;
        Some(match p {
            Primitive::MoveToLocation(_) => K::MoveToLocation,
            Primitive::CutTrees(_) => K::CutTrees,
            Primitive::CutAllTrees => K::CutAllTrees,
            Primitive::PickUpCivilian => K::PickUpCivilian,
            Primitive::DropOffCivilian => K::DropOffCivilian,
            Primitive::SprayWaterCone(_) => K::SprayWaterCone,
            Primitive::RefillWater => K::RefillWater,
            Primitive::DriveNoCut(_) => K::DriveNoCut,
            Primitive::DriveClearPath(_) => K::DriveClearPath,
            Primitive::FlyToLocation(_) => K::FlyToLocation,
            Primitive::PickUpFirefighters => K::PickUpFirefighters,
            Primitive::DropOffFirefighters => K::DropOffFirefighters,
            Primitive::DropWater => K::DropWater,
            Primitive::Idle => return None,
        })
    }

    pub fn params(self) -> [ParamRole; 2] {
        use PrimitiveKind as K;
        match self {
            K::MoveToLocation | K::SprayWaterCone | K::DriveNoCut | K::DriveClearPath | K::FlyToLocation => {
                [ParamRole::X, ParamRole::Y]
            }
            K::CutTrees => [ParamRole::Count, ParamRole::None],
            _ => [ParamRole::None, ParamRole::None],
        }
    }

    /// Assumes the params were validated.
    pub fn build(self, p1: i64, p2: i64) -> Primitive {
        use PrimitiveKind as K;
        let c = Cell::new(p1 as i32, p2 as i32);
        match self {
            K::MoveToLocation => Primitive::MoveToLocation(c),
            K::CutTrees => Primitive::CutTrees(p1 as u32),
            K::CutAllTrees => Primitive::CutAllTrees,
            K::PickUpCivilian => Primitive::PickUpCivilian,
            K::DropOffCivilian => Primitive::DropOffCivilian,
            K::SprayWaterCone => Primitive::SprayWaterCone(c),
            K::RefillWater => Primitive::RefillWater,
            K::DriveNoCut => Primitive::DriveNoCut(c),
            K::DriveClearPath => Primitive::DriveClearPath(c),
            K::FlyToLocation => Primitive::FlyToLocation(c),
            K::PickUpFirefighters => Primitive::PickUpFirefighters,
            K::DropOffFirefighters => Primitive::DropOffFirefighters,
            K::DropWater => Primitive::DropWater,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamRole {
    X,
    Y,
    Count,
    None,
}

impl ParamRole {
    fn text(self) -> &'static str {
        match self {
            ParamRole::X => "x coordinate of location",
            ParamRole::Y => "y coordinate of location",
            ParamRole::Count => "number of trees to cut",
            ParamRole::None => "not applicable (use 0)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogRow {
    pub code: i64,
    pub primitive: PrimitiveKind,
    pub name: String,
    pub summary: String,
    pub title: String,
    pub params: [ParamRole; 2],
    pub example: [i64; 2],
    pub example_description: String,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unsupported catalog version {0}")]
    Version(u32),
    #[error("{kind}: {reason}")]
    Row { kind: AgentKind, reason: String },
}

#[derive(Deserialize)]
struct CatalogFile {
    version: u32,
    firefighter: Vec<CatalogRow>,
    bulldozer: Vec<CatalogRow>,
    drone: Vec<CatalogRow>,
    helicopter: Vec<CatalogRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionCatalog {
    rows: BTreeMap<AgentKind, Vec<CatalogRow>>,
}

impl ActionCatalog {
    pub fn builtin() -> &'static ActionCatalog {
        static CAT: OnceLock<ActionCatalog> = OnceLock::new();
        CAT.get_or_init(|| ActionCatalog::from_toml(CATALOG_TOML).expect("bundled catalog is valid"))
    }

    pub fn from_toml(s: &str) -> Result<Self, CatalogError> {
        let f: CatalogFile = toml::from_str(s)?;
        if f.version != 1 {
            return Err(CatalogError::Version(f.version));
        }
        let rows = BTreeMap::from([
            (AgentKind::Firefighter, f.firefighter),
            (AgentKind::Bulldozer, f.bulldozer),
            (AgentKind::Drone, f.drone),
            (AgentKind::Helicopter, f.helicopter),
        ]);
        for (&kind, list) in &rows {
            let bad = |reason: String| CatalogError::Row { kind, reason };
            for (i, r) in list.iter().enumerate() {
                if r.code != i as i64 + 1 {
                    return Err(bad(format!("row {} has code {}; codes must run 1..n", i + 1, r.code)));
                }
                if r.params != r.primitive.params() {
                    return Err(bad(format!("code {} declares the wrong parameters", r.code)));
                }
                let probe = r.primitive.build(r.example[0].max(1), r.example[1]);
                if !probe.allowed_for(kind) {
                    return Err(bad(format!("code {} is not a {kind} primitive", r.code)));
                }
                if list[..i].iter().any(|o| o.primitive == r.primitive) {
                    return Err(bad(format!("primitive {:?} listed twice", r.primitive)));
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self, kind: AgentKind) -> &[CatalogRow] {
        &self.rows[&kind]
    }

    pub fn row(&self, kind: AgentKind, code: i64) -> Option<&CatalogRow> {
        self.rows(kind).iter().find(|r| r.code == code)
    }

    pub fn row_for(&self, kind: AgentKind, p: &Primitive) -> Option<&CatalogRow> {
        let pk = PrimitiveKind::of(p)?;
        self.rows(kind).iter().find(|r| r.primitive == pk)
    }

    /// The catalog block of the translator prompt for one kind.
    pub fn render_rows(&self, kind: AgentKind) -> String {
        self.rows(kind)
            .iter()
            .map(|r| {
                format!(
                    "{code}. {title}:\n\n\"type\": {code}\n\"param 1\": {p1}\n\"param 2\": {p2}\n\"description\": description of action\n\nExample Action:\n{example}\n",
                    code = r.code,
                    title = r.title,
                    p1 = r.params[0].text(),
                    p2 = r.params[1].text(),
                    example = format_action(&Action {
                        code: r.code,
                        param1: r.example[0],
                        param2: r.example[1],
                        description: r.example_description.clone(),
                    }),
                )
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Ability list shown to planners, one line per primitive plus the
    /// universal "do nothing".
    pub fn abilities(&self, kind: AgentKind) -> String {
        let mut s = format!("{kind} Agent abilities:\n");
        for r in self.rows(kind) {
            s.push_str(&format!(
                "- {}: {} (e.g. \"{}\")\n",
                r.name, r.summary, r.example_description
            ));
        }
        s.push_str("- Do Nothing: stay idle for one step (e.g. \"do nothing\")\n");
        s
    }
}

/// The translator's output record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    #[serde(rename = "type")]
    pub code: i64,
    pub param1: i64,
    pub param2: i64,
    pub description: String,
}

pub fn format_action(a: &Action) -> String {
    format!(
        "[{}, {}, {}, {}]",
        a.code,
        a.param1,
        a.param2,
        Value::String(a.description.clone())
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{reason}")]
pub struct ParseError {
    pub reason: String,
    pub raw: String,
}

/// Bracketed `[..]` or braced `{..}` spans at nesting depth zero, quotes
/// respected.
fn spans(text: &str, open: char, close: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    let mut depth = 0usize;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, ch) in text.char_indices() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if ch == '\\' {
                escaped = true;
            } else if ch == q {
                quote = None;
            }
            continue;
        }
        if ch == '"' && start.is_some() {
            quote = Some('"');
        } else if ch == open {
            if depth == 0 {
                start = Some(i);
            }
            depth += 1;
        } else if ch == close && depth > 0 {
            depth -= 1;
            if depth == 0 {
                out.push(&text[start.take().unwrap()..i + ch.len_utf8()]);
            }
        }
    }
    out
}

fn int_field(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64().or_else(|| {
            n.as_f64()
                .filter(|f| f.fract() == 0.0 && f.abs() < 9.0e15)
                .map(|f| f as i64)
        }),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn from_values(items: &[Value]) -> Result<Action, String> {
    if items.len() != 4 {
        return Err(format!("expected 4 fields, found {}", items.len()));
    }
    let ints: Vec<i64> = items[..3]
        .iter()
        .map(|v| int_field(v).ok_or_else(|| format!("field {v} is not an integer")))
        .collect::<Result<_, _>>()?;
    let description = match &items[3] {
        Value::String(s) => s.clone(),
        other => return Err(format!("description {other} is not a string")),
    };
    Ok(Action {
        code: ints[0],
        param1: ints[1],
        param2: ints[2],
        description,
    })
}

fn bracket_fallback(span: &str) -> Option<Action> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r#"(?s)^\[\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(?:["'`“‘]+)(.*?)(?:["'`”’]+)\s*\]$"#)
            .expect("valid regex")
    });
    let c = re.captures(span.trim())?;
    Some(Action {
        code: c[1].parse().ok()?,
        param1: c[2].parse().ok()?,
        param2: c[3].parse().ok()?,
        description: c[4].to_string(),
    })
}

fn parse_bracket(span: &str) -> Result<Action, String> {
    match serde_json::from_str::<Vec<Value>>(span) {
        Ok(items) => from_values(&items),
        Err(e) => bracket_fallback(span).ok_or_else(|| format!("malformed action list: {e}")),
    }
}

fn parse_keyed(span: &str) -> Result<Action, String> {
    let v: serde_json::Map<String, Value> =
        serde_json::from_str(span).map_err(|e| format!("malformed action object: {e}"))?;
    let norm: BTreeMap<String, &Value> = v
        .iter()
        .map(|(k, v)| (k.to_ascii_lowercase().replace([' ', '_'], ""), v))
        .collect();
    let field = |k: &str| norm.get(k).copied().ok_or_else(|| format!("missing field `{k}`"));
    if norm.len() != 4 {
        return Err(format!("expected 4 fields, found {}", norm.len()));
    }
    from_values(&[
        field("type")?.clone(),
        field("param1")?.clone(),
        field("param2")?.clone(),
        field("description")?.clone(),
    ])
}

/// Extracts one action from model output. The last well-formed bracketed
/// list wins; a keyed object is accepted when no list parses.
pub fn parse_structured_action(output: &str) -> Result<Action, ParseError> {
    let err = |reason: String| ParseError {
        reason,
        raw: output.to_string(),
    };
    let mut last_err = None;
    for span in spans(output, '[', ']').into_iter().rev() {
        match parse_bracket(span) {
            Ok(a) => return Ok(a),
            Err(e) => {
                last_err.get_or_insert(e);
            }
        }
    }
    for span in spans(output, '{', '}').into_iter().rev() {
        match parse_keyed(span) {
            Ok(a) => return Ok(a),
            Err(e) => {
                last_err.get_or_insert(e);
            }
        }
    }
    Err(err(last_err.unwrap_or_else(|| "no bracketed action found".into())))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct ValidationError(pub String);

/// Checks an action against the kind's catalog and the map bounds.
pub fn validate(
    action: &Action,
    kind: AgentKind,
    catalog: &ActionCatalog,
    width: usize,
    height: usize,
) -> Result<Primitive, ValidationError> {
    let n = catalog.rows(kind).len();
    let row = catalog.row(kind, action.code).ok_or_else(|| {
        ValidationError(format!(
            "type {} is not one of the {n} action types of a {kind} agent",
            action.code
        ))
    })?;
    let [p1, p2] = [action.param1, action.param2];
    match row.params {
        [ParamRole::X, ParamRole::Y] => {
            if p1 < 0 || p1 >= width as i64 || p2 < 0 || p2 >= height as i64 {
                return Err(ValidationError(format!(
                    "location ({p1}, {p2}) is outside the map (x in 0..{}, y in 0..{})",
                    width - 1,
                    height - 1
                )));
            }
        }
        [ParamRole::Count, _] => {
            if !(1..=3).contains(&p1) {
                return Err(ValidationError(format!("cannot cut {p1} trees; a cell holds 1 to 3")));
            }
        }
        _ => {}
    }
    Ok(row.primitive.build(p1, p2))
}

pub fn build_translation_prompt(action_text: &str, kind: AgentKind, catalog: &ActionCatalog) -> String {
    prompt::fill(
        prompt::TRANSLATOR,
        &[
            ("ACTION", action_text),
            ("COUNT", &catalog.rows(kind).len().to_string()),
            ("ACTIONS", catalog.render_rows(kind).trim_end()),
        ],
    )
}

fn reprompt(base: &str, error: &str, raw: &str) -> String {
    format!(
        "{base}\nYour previous response could not be executed: {error}\n\nYour previous response was:\n{raw}\n\nRespond again with exactly one action in the executable action format.\n"
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Translation {
    pub action: Action,
    pub primitive: Primitive,
    pub exchanges: Vec<Exchange>,
}

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("translation failed after {attempts} attempts: {last_error}")]
    Failed {
        attempts: u32,
        last_error: String,
        exchanges: Vec<Exchange>,
    },
    #[error(transparent)]
    Lm(#[from] LmError),
}

/// Everything `translate` needs besides the model and the text.
#[derive(Debug, Clone, Copy)]
pub struct TranslateCtx<'a> {
    pub agent: Option<AgentId>,
    pub kind: AgentKind,
    pub catalog: &'a ActionCatalog,
    pub width: usize,
    pub height: usize,
    pub max_retries: u32,
}

/// Prompt, parse, validate; on failure re-prompt with the error appended,
/// at most `1 + max_retries` calls in all.
pub fn translate(lm: &Metered<'_>, action_text: &str, ctx: &TranslateCtx<'_>) -> Result<Translation, TranslateError> {
    let base = build_translation_prompt(action_text, ctx.kind, ctx.catalog);
    let mut exchanges = Vec::new();
    let mut prompt = base.clone();
    let mut last_error = String::new();
    for _ in 0..=ctx.max_retries {
        let ex = lm.exchange(ctx.agent, "translate", prompt)?;
        let outcome = parse_structured_action(&ex.output).map_err(|e| e.reason).and_then(|a| {
            validate(&a, ctx.kind, ctx.catalog, ctx.width, ctx.height)
                .map(|p| (a, p))
                .map_err(|e| e.0)
        });
        let raw = ex.output.clone();
        exchanges.push(ex);
        match outcome {
            Ok((action, primitive)) => {
                return Ok(Translation {
                    action,
                    primitive,
                    exchanges,
                })
            }
            Err(e) => {
                prompt = reprompt(&base, &e, &raw);
                last_error = e;
            }
        }
    }
    Err(TranslateError::Failed {
        attempts: ctx.max_retries + 1,
        last_error,
        exchanges,
    })
}

/// The structured form of a primitive for one agent kind.
pub fn action_for(kind: AgentKind, p: &Primitive, catalog: &ActionCatalog) -> Option<Action> {
    let row = catalog.row_for(kind, p)?;
    let (p1, p2) = match *p {
        Primitive::CutTrees(n) => (n as i64, 0),
        _ => p.target().map_or((0, 0), |c| (c.x as i64, c.y as i64)),
    };
    Some(Action {
        code: row.code,
        param1: p1,
        param2: p2,
        description: p.describe(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{Script, ScriptedMock, Telemetry};

    fn cat() -> &'static ActionCatalog {
        ActionCatalog::builtin()
    }

    #[test]
    fn catalog_matches_primitives_table() {
        let counts: Vec<usize> = AgentKind::ALL.iter().map(|&k| cat().rows(k).len()).collect();
        assert_eq!(counts, vec![7, 2, 1, 5]);
        let ff = &cat().rows(AgentKind::Firefighter)[0];
        assert_eq!(
            ff.title,
            "Move to any coordinate location in one step regardless of distance"
        );
        assert_eq!(cat().rows(AgentKind::Drone)[0].primitive, PrimitiveKind::FlyToLocation);
    }

    #[test]
    fn catalog_validation_catches_bad_rows() {
        let dup = CATALOG_TOML.replacen(
            "code = 2\nprimitive = \"cut_trees\"",
            "code = 3\nprimitive = \"cut_trees\"",
            1,
        );
        assert!(matches!(ActionCatalog::from_toml(&dup), Err(CatalogError::Row { .. })));
        let wrong = CATALOG_TOML.replacen("primitive = \"fly_to_location\"", "primitive = \"drop_water\"", 1);
        assert!(ActionCatalog::from_toml(&wrong).is_err());
    }

    #[test]
    fn firefighter_prompt_has_appendix_example() {
        let p = build_translation_prompt("go north", AgentKind::Firefighter, cat());
        assert!(p.contains("You have 7 distinct types of actions. You MUST choose one of them:"));
        assert!(p.contains(
            "1. Move to any coordinate location in one step regardless of distance:\n\n\"type\": 1\n\"param 1\": x coordinate of location"
        ));
        assert!(p.contains("[1, 500, 500, \"move to coordinate location of (500, 500)\"]"));
    }

    #[test]
    fn drone_prompt_lists_only_flying() {
        let p = build_translation_prompt("", AgentKind::Drone, cat());
        assert!(p.contains("You have 1 distinct types"));
        assert!(p.contains("1. Fly to any coordinate location"));
        assert!(!p.contains("2. "));
    }

    #[test]
    fn parses_appendix_example() {
        let a = parse_structured_action("[1, 500, 500, \"move to coordinate location of (500, 500)\"]").unwrap();
        assert_eq!(
            a,
            Action {
                code: 1,
                param1: 500,
                param2: 500,
                description: "move to coordinate location of (500, 500)".into()
            }
        );
    }

    #[test]
    fn arity_is_strict() {
        let e = parse_structured_action("[1, 500]").unwrap_err();
        assert!(e.reason.contains("expected 4 fields"), "{}", e.reason);
        assert_eq!(e.raw, "[1, 500]");
        assert!(parse_structured_action("[1, 2, 3, \"a\", 5]").is_err());
        assert!(parse_structured_action("nothing here").is_err());
    }

    #[test]
    fn decorated_outputs_all_parse() {
        let want = parse_structured_action("[1, 500, 500, \"move to coordinate location of (500, 500)\"]").unwrap();
        let prefixes = [
            "",
            "Sure! ",
            "Reasoning: the fire [north] is far.\n",
            "I will move.\n\n",
            "```json\n",
            "Action: ",
            "The structured action is:\n    ",
            "Let me think [step 1] about {it}.\n",
            "<reasoning>go</reasoning>\n",
            "Translation ->\t",
        ];
        let bodies = [
            "[1, 500, 500, \"move to coordinate location of (500, 500)\"]",
            "[1,500,500,\"move to coordinate location of (500, 500)\"]",
            "[ 1 , 500 , 500 , 'move to coordinate location of (500, 500)' ]",
            "[1, 500, 500, ``move to coordinate location of (500, 500)'']",
            "{\"type\": 1, \"param 1\": 500, \"param 2\": 500, \"description\": \"move to coordinate location of (500, 500)\"}",
        ];
        let suffixes = ["", "\n```", " Hope that helps."];
        let mut n = 0;
        for (i, p) in prefixes.iter().enumerate() {
            for b in bodies {
                let s = suffixes[i % suffixes.len()];
                let text = format!("{p}{b}{s}");
                assert_eq!(parse_structured_action(&text).as_ref(), Ok(&want), "{text}");
                n += 1;
            }
        }
        assert_eq!(n, 50);
    }

    #[test]
    fn validation_bounds_and_codes() {
        let a = |code, p1, p2| Action {
            code,
            param1: p1,
            param2: p2,
            description: String::new(),
        };
        let ff = AgentKind::Firefighter;
        assert_eq!(
            validate(&a(1, 9, 0), ff, cat(), 10, 10),
            Ok(Primitive::MoveToLocation(Cell::new(9, 0)))
        );
        assert!(validate(&a(1, 10, 0), ff, cat(), 10, 10).is_err());
        assert!(validate(&a(1, -1, 0), ff, cat(), 10, 10).is_err());
        assert!(validate(&a(8, 0, 0), ff, cat(), 10, 10).is_err());
        assert!(validate(&a(2, 0, 0), ff, cat(), 10, 10).is_err());
        assert_eq!(validate(&a(2, 2, 77), ff, cat(), 10, 10), Ok(Primitive::CutTrees(2)));
        assert_eq!(
            validate(&a(5, 0, 0), AgentKind::Helicopter, cat(), 10, 10),
            Ok(Primitive::DropWater)
        );
    }

    fn ctx(max_retries: u32) -> TranslateCtx<'static> {
        TranslateCtx {
            agent: None,
            kind: AgentKind::Firefighter,
            catalog: cat(),
            width: 30,
            height: 30,
            max_retries,
        }
    }

    fn run(script: Vec<&str>, max_retries: u32) -> (Result<Translation, TranslateError>, u64) {
        let lm = ScriptedMock::new(Script::Canned(script.into_iter().map(String::from).collect()));
        let t = Telemetry::default();
        let r = translate(&Metered::new(&lm, &t), "move to (3, 4)", &ctx(max_retries));
        (r, t.usage().api_calls)
    }

    #[test]
    fn retry_scenarios() {
        let good = "[1, 3, 4, \"move to (3, 4)\"]";
        let (r, calls) = run(vec![good], 2);
        assert_eq!(r.unwrap().primitive, Primitive::MoveToLocation(Cell::new(3, 4)));
        assert_eq!(calls, 1);

        let (r, calls) = run(vec!["[1, 300, 4, \"far\"]", good], 2);
        let tr = r.unwrap();
        assert_eq!(calls, 2);
        assert_eq!(tr.exchanges.len(), 2);
        assert!(tr.exchanges[1].prompt.contains("outside the map"));

        let (r, calls) = run(vec!["no", "no", "no", "no"], 2);
        assert!(matches!(r, Err(TranslateError::Failed { attempts: 3, .. })));
        assert_eq!(calls, 3);
    }

    #[test]
    fn action_for_round_trips_through_validate() {
        for kind in AgentKind::ALL {
            for row in cat().rows(kind) {
                let p = row.primitive.build(row.example[0].max(1).min(3), row.example[1].min(9));
                let a = action_for(kind, &p, cat()).unwrap();
                let back = parse_structured_action(&format_action(&a)).unwrap();
                assert_eq!(back, a);
                assert_eq!(validate(&back, kind, cat(), 1000, 1000), Ok(p));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn format_then_parse_is_identity(code in -5i64..20, p1 in -2000i64..2000, p2 in -2000i64..2000, d in "[ -~]{0,40}") {
                let a = Action { code, param1: p1, param2: p2, description: d };
                prop_assert_eq!(parse_structured_action(&format_action(&a)).unwrap(), a);
            }

            #[test]
            fn translate_results_always_validate(outputs in prop::collection::vec((0i64..9, -5i64..40, -5i64..40), 1..4)) {
                let script: Vec<String> = outputs.iter().map(|(c, x, y)| format!("[{c}, {x}, {y}, \"x\"]")).collect();
                let lm = ScriptedMock::new(Script::Canned(script));
                let t = Telemetry::default();
                if let Ok(tr) = translate(&Metered::new(&lm, &t), "a", &ctx(outputs.len() as u32 - 1)) {
                    prop_assert_eq!(validate(&tr.action, AgentKind::Firefighter, cat(), 30, 30), Ok(tr.primitive));
                }
            }
        }
    }
}
