use std::time::Duration;

use serde::Deserialize;
use serde_json::json;

use super::{Completion, HttpSettings, LanguageModel, LmError};

pub const KEY_VAR: &str = "WILDFIRE_LM_API_KEY";
pub const ENDPOINT_VAR: &str = "WILDFIRE_LM_ENDPOINT";
pub const MODEL_VAR: &str = "WILDFIRE_LM_MODEL";

/// Chat-completions client at temperature 0 with one choice per call.
pub struct HttpLm {
    settings: HttpSettings,
    key: String,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct Reply {
    choices: Vec<Choice>,
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

impl HttpLm {
    /// Endpoint and model may be overridden from the environment; the key
    /// must come from it.
    pub fn from_env(mut settings: HttpSettings) -> Result<Self, LmError> {
        let key = std::env::var(KEY_VAR).map_err(|_| LmError::Config(format!("{KEY_VAR} is not set")))?;
        if let Ok(e) = std::env::var(ENDPOINT_VAR) {
            settings.endpoint = e;
        }
        if let Ok(m) = std::env::var(MODEL_VAR) {
            settings.model = m;
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(settings.timeout_secs))
            .build()
            .map_err(|e| LmError::Config(e.to_string()))?;
        Ok(Self { settings, key, client })
    }

    fn attempt(&self, prompt: &str) -> Result<Completion, LmError> {
        let url = format!("{}/chat/completions", self.settings.endpoint.trim_end_matches('/'));
        let body = json!({
            "model": self.settings.model,
            "temperature": 0,
            "n": 1,
            "messages": [{"role": "user", "content": prompt}],
        });
        let resp = self
            .client
            .post(url)
            .bearer_auth(&self.key)
            .json(&body)
            .send()
            .map_err(|e| LmError::Transport(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(LmError::Transport(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(LmError::Config(format!(
                "HTTP {status}: {}",
                resp.text().unwrap_or_default()
            )));
        }
        let reply: Reply = resp.json().map_err(|e| LmError::Transport(e.to_string()))?;
        let text = reply
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        let (input_tokens, output_tokens) = reply.usage.map_or((0, 0), |u| (u.prompt_tokens, u.completion_tokens));
        Ok(Completion {
            text,
            input_tokens,
            output_tokens,
        })
    }
}

impl LanguageModel for HttpLm {
    fn complete(&self, prompt: &str) -> Result<Completion, LmError> {
        let mut delay = self.settings.backoff_ms;
        let mut last = LmError::Transport("no attempt made".into());
        for n in 0..self.settings.max_attempts.max(1) {
            match self.attempt(prompt) {
                Ok(c) => return Ok(c),
                Err(e) if e.is_retriable() => {
                    log::warn!("model call attempt {} failed: {e}", n + 1);
                    last = e;
                    std::thread::sleep(Duration::from_millis(delay));
                    delay = delay.saturating_mul(2);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    fn describe(&self) -> String {
        format!("http:{}@{}", self.settings.model, self.settings.endpoint)
    }
}
