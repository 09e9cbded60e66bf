use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ClientError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP status {code}: {body}")]
    Status { code: u16, body: String },
    #[error("malformed response: {0}")]
    Protocol(String),
    #[error("environment variable {0} is not set")]
    MissingToken(&'static str),
    #[error("giving up after {attempts} attempts: {last}")]
    Exhausted { attempts: usize, last: Box<ClientError> },
}

impl ClientError {
    /// Transport failures, rate limiting and server errors are worth retrying.
    pub fn is_retryable(&self) -> bool {
        match self {
            ClientError::Transport(_) => true,
            ClientError::Status { code, .. } => *code == 429 || *code >= 500,
            _ => false,
        }
    }
}

/// A chat-completion backend: one prompt in, the completion text out.
pub trait ChatClient: Send + Sync {
    fn complete(&self, prompt: &str, temperature: f64) -> Result<String, ClientError>;
}

impl<C: ChatClient + ?Sized> ChatClient for &C {
    fn complete(&self, prompt: &str, temperature: f64) -> Result<String, ClientError> {
        (**self).complete(prompt, temperature)
    }
}

impl<C: ChatClient + ?Sized> ChatClient for Box<C> {
    fn complete(&self, prompt: &str, temperature: f64) -> Result<String, ClientError> {
        (**self).complete(prompt, temperature)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryPolicy {
    pub max_retries: usize,
    #[serde(with = "millis")]
    pub base_delay: Duration,
    #[serde(with = "millis")]
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 3, base_delay: Duration::from_millis(500), max_delay: Duration::from_secs(30) }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based): base * 2^retry, capped.
    pub fn delay(&self, retry: usize) -> Duration {
        let factor = 1u32.checked_shl(retry.min(31) as u32).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

type Sleeper = Box<dyn Fn(Duration) + Send + Sync>;

/// Retries retryable failures with exponential backoff. A request that still
/// fails surfaces as `Exhausted`, never as an empty completion.
pub struct RetryingClient<C> {
    inner: C,
    policy: RetryPolicy,
    sleep: Sleeper,
}

impl<C: ChatClient> RetryingClient<C> {
    pub fn new(inner: C, policy: RetryPolicy) -> Self {
        RetryingClient { inner, policy, sleep: Box::new(std::thread::sleep) }
    }

    /// Replaces the blocking sleep, e.g. to record delays in tests.
    pub fn with_sleeper(mut self, sleep: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleep = Box::new(sleep);
        self
    }
}

impl<C: ChatClient> ChatClient for RetryingClient<C> {
    fn complete(&self, prompt: &str, temperature: f64) -> Result<String, ClientError> {
        let mut attempt = 0;
        loop {
            match self.inner.complete(prompt, temperature) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_retryable() && attempt < self.policy.max_retries => {
                    let delay = self.policy.delay(attempt);
                    log::warn!("request failed ({e}); retry {} in {:?}", attempt + 1, delay);
                    (self.sleep)(delay);
                    attempt += 1;
                }
                Err(e) if e.is_retryable() => return Err(ClientError::Exhausted { attempts: attempt + 1, last: Box::new(e) }),
                Err(e) => return Err(e),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    pub endpoint: String,
    pub model: String,
    pub timeout_secs: u64,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-3.5-turbo".into(),
            timeout_secs: 60,
        }
    }
}

/// Chat-completion client speaking the common JSON wire format:
/// `{model, temperature, messages: [{role, content}]}` in,
/// `choices[0].message.content` out.
pub struct HttpChatClient {
    config: HttpConfig,
    token: String,
    http: reqwest::blocking::Client,
}

/// The only source of the bearer token; it is never read from flags or
/// configuration files.
pub const TOKEN_ENV: &str = "NEVL_API_TOKEN";

impl HttpChatClient {
    pub fn new(config: HttpConfig) -> Result<Self, ClientError> {
        Self::with_token(config, std::env::var(TOKEN_ENV).ok())
    }

    fn with_token(config: HttpConfig, token: Option<String>) -> Result<Self, ClientError> {
        let token = token.filter(|t| !t.is_empty()).ok_or(ClientError::MissingToken(TOKEN_ENV))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        Ok(HttpChatClient { config, token, http })
    }

    pub fn request_body(&self, prompt: &str, temperature: f64) -> Value {
        json!({
            "model": self.config.model,
            "temperature": temperature,
            "messages": [{"role": "user", "content": prompt}],
        })
    }
}

pub(crate) fn completion_text(body: &Value) -> Result<String, ClientError> {
    body.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .filter(|s| !s.trim().is_empty())
        .map(str::to_owned)
        .ok_or_else(|| ClientError::Protocol("no content in choices[0].message".into()))
}

impl ChatClient for HttpChatClient {
    fn complete(&self, prompt: &str, temperature: f64) -> Result<String, ClientError> {
        let response = self
            .http
            .post(&self.config.endpoint)
            .bearer_auth(&self.token)
            .json(&self.request_body(prompt, temperature))
            .send()
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response.text().map_err(|e| ClientError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ClientError::Status { code: status.as_u16(), body: text.chars().take(500).collect() });
        }
        let body: Value = serde_json::from_str(&text).map_err(|e| ClientError::Protocol(e.to_string()))?;
        completion_text(&body)
    }
}
