//! The language-model boundary: a completion trait, exact call/token
//! accounting, a deterministic scripted model and an optional HTTP client.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::levels::LevelInstance;
use crate::world::{Agent, AgentId, AgentParams, WorldMap};

#[cfg(feature = "http")]
mod http;
mod mock;

#[cfg(feature = "http")]
pub use http::HttpLm;
pub use mock::{whitespace_tokens, Script, ScriptedMock};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

#[derive(Debug, Error)]
pub enum LmError {
    #[error("language model transport failed: {0}")]
    Transport(String),
    #[error("scripted responses exhausted after {0} calls")]
    Exhausted(usize),
    #[error("language model misconfigured: {0}")]
    Config(String),
}

impl LmError {
    pub fn is_retriable(&self) -> bool {
        matches!(self, LmError::Transport(_))
    }
}

/// True state handed to models that may cheat (the omniscient mock).
/// Live models ignore it.
#[derive(Debug, Clone, Copy)]
pub struct GroundTruth<'a> {
    pub level: &'a LevelInstance,
    pub world: &'a WorldMap,
    pub agents: &'a [Agent],
    pub params: &'a AgentParams,
}

/// One completion per call at temperature 0.
pub trait LanguageModel: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<Completion, LmError>;

    fn observe_ground_truth(&self, _truth: &GroundTruth<'_>) {}

    /// Whether answers are independent of call order.
    fn concurrent(&self) -> bool {
        true
    }

    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub api_calls: u64,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

impl std::ops::Sub for Usage {
    type Output = Usage;
    fn sub(self, o: Usage) -> Usage {
        Usage {
            api_calls: self.api_calls - o.api_calls,
            input_tokens: self.input_tokens - o.input_tokens,
            output_tokens: self.output_tokens - o.output_tokens,
        }
    }
}

impl std::ops::AddAssign for Usage {
    fn add_assign(&mut self, o: Usage) {
        self.api_calls += o.api_calls;
        self.input_tokens += o.input_tokens;
        self.output_tokens += o.output_tokens;
    }
}

#[derive(Debug, Default)]
pub struct Telemetry {
    calls: AtomicU64,
    input: AtomicU64,
    output: AtomicU64,
}

impl Telemetry {
    pub fn record(&self, c: &Completion) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.input.fetch_add(c.input_tokens, Ordering::Relaxed);
        self.output.fetch_add(c.output_tokens, Ordering::Relaxed);
    }

    pub fn usage(&self) -> Usage {
        Usage {
            api_calls: self.calls.load(Ordering::Relaxed),
            input_tokens: self.input.load(Ordering::Relaxed),
            output_tokens: self.output.load(Ordering::Relaxed),
        }
    }
}

/// A prompt/response pair as stored in run logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub agent: Option<AgentId>,
    pub role: String,
    pub prompt: String,
    pub output: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

/// A model handle that books every successful call.
#[derive(Clone, Copy)]
pub struct Metered<'a> {
    pub lm: &'a dyn LanguageModel,
    pub telemetry: &'a Telemetry,
}

impl<'a> Metered<'a> {
    pub fn new(lm: &'a dyn LanguageModel, telemetry: &'a Telemetry) -> Self {
        Self { lm, telemetry }
    }

    pub fn complete(&self, prompt: &str) -> Result<Completion, LmError> {
        let c = self.lm.complete(prompt)?;
        self.telemetry.record(&c);
        Ok(c)
    }

    /// Calls the model and wraps the result as a log exchange.
    pub fn exchange(&self, agent: Option<AgentId>, role: &str, prompt: String) -> Result<Exchange, LmError> {
        let c = self.complete(&prompt)?;
        Ok(Exchange {
            agent,
            role: role.to_string(),
            prompt,
            output: c.text,
            input_tokens: c.input_tokens,
            output_tokens: c.output_tokens,
        })
    }
}

/// Live endpoint settings; the key always comes from the environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpSettings {
    /// Base URL of a chat-completions compatible API.
    pub endpoint: String,
    pub model: String,
    pub max_attempts: u32,
    pub timeout_secs: u64,
    pub backoff_ms: u64,
}

impl Default for HttpSettings {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1".into(),
            model: "gpt-4o".into(),
            max_attempts: 4,
            timeout_secs: 120,
            backoff_ms: 500,
        }
    }
}

/// Builds a model from a `--lm` value: `mock:<script>` or `http`.
pub fn from_spec(spec: &str) -> Result<Box<dyn LanguageModel>, LmError> {
    build(spec, &HttpSettings::default())
}

pub fn build(spec: &str, http: &HttpSettings) -> Result<Box<dyn LanguageModel>, LmError> {
    if let Some(script) = spec.strip_prefix("mock:") {
        return Ok(Box::new(ScriptedMock::from_spec(script)?));
    }
    if spec == "http" {
        #[cfg(feature = "http")]
        return Ok(Box::new(HttpLm::from_env(http.clone())?));
        #[cfg(not(feature = "http"))]
        {
            let _ = http;
            return Err(LmError::Config("built without the `http` feature".into()));
        }
    }
    Err(LmError::Config(format!(
        "unknown model `{spec}`; expected mock:<idle|echo|omniscient|canned:FILE> or http"
    )))
}
