//! Score normalization, behavior-competency aggregation, telemetry
//! summaries and TSV report tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frameworks::FrameworkKind;
use crate::levels::{find_level, Behavior, LevelSpec, LEVELS};
use crate::runlog::RunLog;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{level}: target equals baseline ({value})")]
    Degenerate { level: String, value: f64 },
    #[error("{goal}: no normalized score for {}", missing.join(", "))]
    MissingTasks { goal: &'static str, missing: Vec<String> },
    #[error("unknown level `{0}`")]
    UnknownLevel(String),
    #[error("{0}: open-ended level has no Do-Nothing score to derive a baseline from")]
    NoBaseline(String),
    #[error("no run logs given")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringKind {
    Finite,
    OpenEnded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub level: String,
    pub kind: ScoringKind,
    pub target: f64,
    pub baseline: f64,
}

/// Maps a raw level score to `[0, 1]`: linear for finite levels,
/// `log2(1 + x)` of the linear value for open-ended ones. Scores outside
/// the baseline..target range are clamped with a warning.
pub fn normalize_score(raw: f64, spec: &NormalizationSpec) -> Result<f64, MetricsError> {
    let range = spec.target - spec.baseline;
    if range == 0.0 {
        return Err(MetricsError::Degenerate {
            level: spec.level.clone(),
            value: spec.target,
        });
    }
    let mut x = (raw - spec.baseline) / range;
    if !(0.0..=1.0).contains(&x) {
        log::warn!(
            "{}: raw score {raw} outside [{}, {}]; clamping",
            spec.level,
            spec.baseline.min(spec.target),
            spec.baseline.max(spec.target)
        );
        x = x.clamp(0.0, 1.0);
    }
    Ok(match spec.kind {
        ScoringKind::Finite => x,
        ScoringKind::OpenEnded => (1.0 + x).ln() / 2f64.ln(),
    })
}

/// Penalty per lost agent and per lost civilian in open-ended scoring.
pub const AGENT_LOSS_PENALTY: f64 = 20.0;
pub const CIVILIAN_LOSS_PENALTY: f64 = 100.0;

/// Do-Nothing score minus the penalty for losing every agent (and every
/// civilian where civilians are scored); 0 for finite levels.
pub fn compute_baseline(level: &LevelSpec, do_nothing_score: f64) -> f64 {
    if level.is_finite() {
        return 0.0;
    }
    let mut b = do_nothing_score - AGENT_LOSS_PENALTY * level.roster.total() as f64;
    if level.family.counts_civilians() {
        b -= CIVILIAN_LOSS_PENALTY * level.civilians as f64;
    }
    b
}

/// Published baselines that the formula above does not reproduce.
pub const PRINTED_BASELINES: [(&str, f64); 2] = [
    ("Suppress Fire: Locate + Deploy + Suppress", -1382.67),
    ("Full Environment", -5722.67),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselinePolicy {
    /// Always derive open-ended baselines from Do-Nothing scores.
    #[default]
    Formula,
    /// Prefer the published values where they exist.
    Printed,
}

pub fn printed_baseline(level: &str) -> Option<f64> {
    PRINTED_BASELINES
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(level))
        .map(|(_, b)| *b)
}

/// The normalization spec of one level given its Do-Nothing score, if known.
pub fn normalization_spec(
    level: &str,
    do_nothing_score: Option<f64>,
    policy: BaselinePolicy,
) -> Result<NormalizationSpec, MetricsError> {
    let spec = find_level(level).ok_or_else(|| MetricsError::UnknownLevel(level.to_string()))?;
    let (kind, target, baseline) = match spec.max_score {
        Some(max) => (ScoringKind::Finite, max as f64, 0.0),
        None => {
            let printed = (policy == BaselinePolicy::Printed)
                .then(|| printed_baseline(spec.name))
                .flatten();
            let b = match (printed, do_nothing_score) {
                (Some(b), _) => b,
                (None, Some(dn)) => compute_baseline(spec, dn),
                (None, None) => return Err(MetricsError::NoBaseline(spec.name.to_string())),
            };
            (ScoringKind::OpenEnded, 0.0, b)
        }
    };
    Ok(NormalizationSpec {
        level: spec.name.to_string(),
        kind,
        target,
        baseline,
    })
}

/// Levels exercising each behavior.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorMap {
    pub tasks: BTreeMap<Behavior, Vec<&'static str>>,
}

impl Default for BehaviorMap {
    fn default() -> Self {
        let mut tasks: BTreeMap<Behavior, Vec<&'static str>> = BTreeMap::new();
        for l in &LEVELS {
            for &b in l.tags {
                tasks.entry(b).or_default().push(l.name);
            }
        }
        Self { tasks }
    }
}

impl BehaviorMap {
    pub fn tasks(&self, goal: Behavior) -> &[&'static str] {
        self.tasks.get(&goal).map_or(&[], |v| v.as_slice())
    }
}

/// Mean normalized score over the levels tagged with `goal`.
pub fn bcs(ns: &BTreeMap<String, f64>, bmap: &BehaviorMap, goal: Behavior) -> Result<f64, MetricsError> {
    let tasks = bmap.tasks(goal);
    let missing: Vec<String> = tasks
        .iter()
        .filter(|t| !ns.contains_key(**t))
        .map(|t| t.to_string())
        .collect();
    if !missing.is_empty() || tasks.is_empty() {
        return Err(MetricsError::MissingTasks {
            goal: goal.code(),
            missing,
        });
    }
    Ok(tasks.iter().map(|t| ns[*t]).sum::<f64>() / tasks.len() as f64)
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn format_mean_sd(xs: &[f64]) -> String {
    let (m, s) = mean_sd(xs);
    // Avoid printing "-0.00".
    let m = if m.abs() < 0.005 { 0.0 } else { m };
    format!("{m:.2}±{s:.2}")
}

/// Final scores per framework and level.
pub fn score_table(logs: &[RunLog]) -> BTreeMap<FrameworkKind, BTreeMap<String, Vec<f64>>> {
    let mut t: BTreeMap<FrameworkKind, BTreeMap<String, Vec<f64>>> = BTreeMap::new();
    for l in logs {
        t.entry(l.header.framework)
            .or_default()
            .entry(l.header.level.clone())
            .or_default()
            .push(l.footer.score.value);
    }
    t
}

fn catalog_order(levels: impl IntoIterator<Item = String>) -> Vec<String> {
    let present: BTreeSet<String> = levels.into_iter().collect();
    let mut out: Vec<String> = LEVELS
        .iter()
        .map(|l| l.name.to_string())
        .filter(|n| present.contains(n))
        .collect();
    out.extend(present.into_iter().filter(|n| find_level(n).is_none()));
    out
}

/// Levels as rows, frameworks as columns, cells "mean±sd".
pub fn score_table_tsv(logs: &[RunLog]) -> String {
    let table = score_table(logs);
    let frameworks: Vec<FrameworkKind> = table.keys().copied().collect();
    let levels = catalog_order(table.values().flat_map(|m| m.keys().cloned()));
    let mut s = String::from("level");
    for f in &frameworks {
        let _ = write!(s, "\t{f}");
    }
    s.push('\n');
    for lvl in levels {
        s.push_str(&lvl);
        for f in &frameworks {
            let cell = table[f]
                .get(&lvl)
                .map_or_else(|| "-".to_string(), |xs| format_mean_sd(xs));
            let _ = write!(s, "\t{cell}");
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcsValue {
    Value(f64),
    /// No episode reached the goal's precondition.
    InsufficientData,
    /// Some tagged level has no runs.
    Missing,
}

impl std::fmt::Display for BcsValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BcsValue::Value(v) => write!(f, "{v:.2}"),
            BcsValue::InsufficientData => f.write_str("insufficient data"),
            BcsValue::Missing => f.write_str("-"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcsReport {
    pub ns: BTreeMap<FrameworkKind, BTreeMap<String, f64>>,
    pub bcs: BTreeMap<FrameworkKind, BTreeMap<Behavior, BcsValue>>,
}

/// Normalized scores and BCS for every framework that used a model.
/// Do-Nothing logs supply open-ended baselines.
pub fn bcs_report(logs: &[RunLog], policy: BaselinePolicy) -> Result<BcsReport, MetricsError> {
    if logs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let table = score_table(logs);
    let dn = table.get(&FrameworkKind::DoNothing);
    let bmap = BehaviorMap::default();
    let mut report = BcsReport {
        ns: BTreeMap::new(),
        bcs: BTreeMap::new(),
    };
    for (&fw, levels) in &table {
        if fw == FrameworkKind::DoNothing {
            continue;
        }
        let mut ns = BTreeMap::new();
        for (lvl, xs) in levels {
            let dn_mean = dn.and_then(|d| d.get(lvl)).map(|v| mean_sd(v).0);
            let spec = normalization_spec(lvl, dn_mean, policy)?;
            ns.insert(lvl.clone(), normalize_score(mean_sd(xs).0, &spec)?);
        }
        let conflict = logs
            .iter()
            .any(|l| l.header.framework == fw && l.footer.objective_conflict);
        let mut goals = BTreeMap::new();
        for g in Behavior::ALL {
            let v = match bcs(&ns, &bmap, g) {
                Ok(_) if g == Behavior::OP && !conflict => BcsValue::InsufficientData,
                Ok(v) => BcsValue::Value(v),
                Err(_) => BcsValue::Missing,
            };
            goals.insert(g, v);
        }
        report.ns.insert(fw, ns);
        report.bcs.insert(fw, goals);
    }
    Ok(report)
}

impl BcsReport {
    /// Behaviors as rows, frameworks as columns.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("behavior");
        for f in self.bcs.keys() {
            let _ = write!(s, "\t{f}");
        }
        s.push('\n');
        for g in Behavior::ALL {
            let _ = write!(s, "{} ({})", g.title(), g.code());
            for goals in self.bcs.values() {
                let _ = write!(s, "\t{}", goals[&g]);
            }
            s.push('\n');
        }
        s
    }

    /// `goal, algorithm, bcs` triples for plotting; goals without a value
    /// are left out.
    pub fn radar_tsv(&self) -> String {
        let mut s = String::from("goal\talgorithm\tbcs\n");
        for (f, goals) in &self.bcs {
            for (g, v) in goals {
                if let BcsValue::Value(v) = v {
                    let _ = writeln!(s, "{}\t{f}\t{v:.4}", g.code());
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub framework: FrameworkKind,
    pub agents: usize,
    pub episodes: usize,
    pub steps: u64,
    pub api_calls: f64,
    pub input_tokens: f64,
    pub output_tokens: f64,
}

/// Per-timestep means of calls and tokens, grouped by framework and
/// agent count.
pub fn telemetry_report(logs: &[RunLog]) -> Result<Vec<TelemetryRow>, MetricsError> {
    if logs.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut groups: BTreeMap<(FrameworkKind, usize), (usize, u64, [u64; 3])> = BTreeMap::new();
    for l in logs {
        let g = groups.entry((l.header.framework, l.agent_count())).or_default();
        g.0 += 1;
        for s in &l.steps {
            g.1 += 1;
            g.2[0] += s.usage.api_calls;
            g.2[1] += s.usage.input_tokens;
            g.2[2] += s.usage.output_tokens;
        }
    }
    Ok(groups
        .into_iter()
        .map(|((framework, agents), (episodes, steps, sums))| {
            let per = |x: u64| if steps == 0 { 0.0 } else { x as f64 / steps as f64 };
            TelemetryRow {
                framework,
                agents,
                episodes,
                steps,
                api_calls: per(sums[0]),
                input_tokens: per(sums[1]),
                output_tokens: per(sums[2]),
            }
        })
        .collect())
}

pub fn telemetry_tsv(rows: &[TelemetryRow]) -> String {
    let mut s = String::from(
        "framework\tagents\tepisodes\tsteps\tapi_calls_per_step\tinput_tokens_per_step\toutput_tokens_per_step\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{:.3}\t{:.3}\t{:.3}",
            r.framework, r.agents, r.episodes, r.steps, r.api_calls, r.input_tokens, r.output_tokens
        );
    }
    s
}
