use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

/// Environment variable holding the bearer credential.
pub const API_KEY_ENV: &str = "EMBEDFORGE_API_KEY";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl Usage {
    /// Rough count used when the endpoint reports no usage.
    pub fn estimate(prompt: &str, completion: &str) -> Self {
        Usage { prompt_tokens: prompt.len().div_ceil(4) as u64, completion_tokens: completion.len().div_ceil(4) as u64 }
    }

    pub fn add(&mut self, other: Usage) {
        self.prompt_tokens += other.prompt_tokens;
        self.completion_tokens += other.completion_tokens;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub text: String,
    pub usage: Usage,
}

#[derive(Debug, Clone, Copy)]
pub struct CompletionRequest<'a> {
    pub endpoint: &'a str,
    pub model: &'a str,
    pub prompt: &'a str,
    pub temperature: f64,
    pub timeout: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransportFailure {
    /// Rate limits, server errors, timeouts: worth another attempt.
    Retryable(String),
    Fatal(String),
}

impl std::fmt::Display for TransportFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransportFailure::Retryable(m) | TransportFailure::Fatal(m) => f.write_str(m),
        }
    }
}

/// One chat completion round trip.
pub trait Transport: Send + Sync {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Completion, TransportFailure>;
}

/// Chat-completions client over HTTP.
pub struct HttpTransport {
    api_key: Option<String>,
}

impl HttpTransport {
    /// Reads the credential from [`API_KEY_ENV`]; requests go out without
    /// authorization when it is unset.
    pub fn from_env() -> Self {
        HttpTransport { api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()) }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: String,
}

pub(crate) fn classify(err: ureq::Error) -> TransportFailure {
    match err {
        ureq::Error::StatusCode(code) if code == 429 || code >= 500 => {
            TransportFailure::Retryable(format!("HTTP status {code}"))
        }
        ureq::Error::StatusCode(code) => TransportFailure::Fatal(format!("HTTP status {code}")),
        e @ (ureq::Error::Io(_) | ureq::Error::Timeout(_) | ureq::Error::ConnectionFailed | ureq::Error::HostNotFound) => {
            TransportFailure::Retryable(e.to_string())
        }
        e => TransportFailure::Fatal(e.to_string()),
    }
}

pub(crate) fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(true).build().into()
}

impl Transport for HttpTransport {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<Completion, TransportFailure> {
        let body = json!({
            "model": req.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
        });
        let mut call = agent(req.timeout).post(req.endpoint);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = call.send_json(&body).map_err(classify)?;
        let parsed: ChatResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| TransportFailure::Fatal(format!("malformed completion response: {e}")))?;
        let text = parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| TransportFailure::Fatal("completion response has no choices".into()))?;
        let usage = parsed.usage.unwrap_or_else(|| Usage::estimate(req.prompt, &text));
        Ok(Completion { text, usage })
    }
}
