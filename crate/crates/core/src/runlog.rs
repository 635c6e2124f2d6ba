//! JSON-lines episode logs: one header, one record per step, one footer.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::fire::{FireConfig, FireDelta};
use crate::frameworks::{Delivery, FrameworkConfig, FrameworkKind};
use crate::levels::{LevelOverrides, Score, Termination};
use crate::lm::{Exchange, Usage};
use crate::world::{AgentId, Event, Primitive};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: u32,
    pub level: String,
    pub seed: u64,
    pub framework: FrameworkKind,
    pub lm: String,
    pub agent_count: usize,
    pub overrides: LevelOverrides,
    pub fire: FireConfig,
    pub framework_cfg: FrameworkConfig,
    pub max_retries: u32,
    pub initial_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub activations: Vec<(AgentId, Primitive)>,
    pub deliveries: Vec<Delivery>,
    pub perceptions: Vec<(AgentId, String)>,
    pub exchanges: Vec<Exchange>,
    pub notes: Vec<String>,
    pub fire: FireDelta,
    pub events: Vec<Event>,
    pub score: Score,
    pub usage: Usage,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Footer {
    pub score: Score,
    /// `None` when the episode aborted.
    pub termination: Option<Termination>,
    pub steps: u64,
    pub usage: Usage,
    pub aborted: Option<String>,
    /// Some agent saw an active fire front next to civilians.
    pub objective_conflict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum Record {
    Header(Header),
    Step(StepRecord),
    Footer(Footer),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub header: Header,
    pub steps: Vec<StepRecord>,
    pub footer: Footer,
}

#[derive(Debug, Error)]
pub enum RunLogError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("line {line}: {reason}")]
    Shape { line: usize, reason: String },
}

impl RunLog {
    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut line = |r: &Record| -> std::io::Result<()> {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")
        };
        line(&Record::Header(self.header.clone()))?;
        for s in &self.steps {
            line(&Record::Step(s.clone()))?;
        }
        line(&Record::Footer(self.footer.clone()))
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn read_jsonl(r: impl BufRead) -> Result<RunLog, RunLogError> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut footer = None;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let shape = |reason: &str| RunLogError::Shape {
                line: n,
                reason: reason.to_string(),
            };
            if footer.is_some() {
                return Err(shape("record after footer"));
            }
            match serde_json::from_str(&line).map_err(|source| RunLogError::Json { line: n, source })? {
                Record::Header(h) if header.is_none() => header = Some(h),
                Record::Header(_) => return Err(shape("second header")),
                Record::Step(_) if header.is_none() => return Err(shape("step before header")),
                Record::Step(s) => steps.push(s),
                Record::Footer(f) => footer = Some(f),
            }
        }
        let header = header.ok_or(RunLogError::Shape {
            line: 0,
            reason: "no header".into(),
        })?;
        let footer = footer.ok_or(RunLogError::Shape {
            line: 0,
            reason: "no footer (truncated log?)".into(),
        })?;
        Ok(RunLog { header, steps, footer })
    }

    pub fn load(path: &std::path::Path) -> Result<RunLog, RunLogError> {
        let f = std::fs::File::open(path)?;
        Self::read_jsonl(std::io::BufReader::new(f))
    }

    /// Hex SHA-256 of the serialized log.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_jsonl().as_bytes()))
    }

    /// Per-step usage summed from the recorded exchanges.
    pub fn exchange_usage(&self) -> Usage {
        self.steps
            .iter()
            .map(|s| usage_of(&s.exchanges))
            .fold(Usage::default(), |mut a, u| {
                a += u;
                a
            })
    }

    /// Agents alive at the start of the episode, the grouping key for
    /// telemetry.
    pub fn agent_count(&self) -> usize {
        self.header.agent_count
    }

    pub fn file_name(&self) -> String {
        format!(
            "{}__{}__{}.jsonl",
            slug(self.header.framework.name()),
            slug(&self.header.level),
            self.header.seed
        )
    }
}

/// Lowercase alphanumerics joined by single dashes.
pub fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect();
    s.split('-').filter(|p| !p.is_empty()).collect::<Vec<_>>().join("-")
}

pub fn usage_of(exchanges: &[Exchange]) -> Usage {
    Usage {
        api_calls: exchanges.len() as u64,
        input_tokens: exchanges.iter().map(|e| e.input_tokens).sum(),
        output_tokens: exchanges.iter().map(|e| e.output_tokens).sum(),
    }
}
