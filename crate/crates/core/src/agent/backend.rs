use std::path::Path;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

/// Connection settings for a chat-completions endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    /// Base URL; `/chat/completions` is appended unless already present.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub token_env: Option<String>,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout_secs: u64,
    /// First backoff delay; doubles after each failed attempt.
    pub backoff_ms: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            endpoint: "http://localhost:8000/v1".into(),
            model: "gpt-4.1".into(),
            token_env: Some("OPENAI_API_KEY".into()),
            temperature: 0.0,
            max_retries: 3,
            timeout_secs: 60,
            backoff_ms: 500,
        }
    }
}

impl BackendConfig {
    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        let cfg: BackendConfig =
            serde_json::from_str(&text).map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.timeout_secs == 0 {
            return Err(BackendError::Config("timeout_secs must be positive".into()));
        }
        if self.endpoint.is_empty() || self.model.is_empty() {
            return Err(BackendError::Config("endpoint and model are required".into()));
        }
        Ok(())
    }

    pub fn completions_url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }
}

/// One request/response pair, recorded verbatim in episode logs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub system: String,
    pub user: String,
    pub response: String,
    pub latency_ms: u64,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("http status {0}")]
    Status(u16),
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl TransportError {
    pub fn is_retryable(&self) -> bool {
        match self {
            TransportError::Timeout | TransportError::Network(_) => true,
            TransportError::Status(code) => *code == 429 || *code >= 500,
            TransportError::Malformed(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend unavailable after {attempts} attempts: {last}")]
    Unavailable { attempts: u32, last: TransportError },
    #[error("backend rejected request: {0}")]
    Rejected(TransportError),
    #[error("backend script exhausted")]
    Exhausted,
    #[error("backend config: {0}")]
    Config(String),
}

/// A single attempt at a completion, without retry logic.
pub trait Transport: Send + Sync {
    fn send(&self, system: &str, user: &str) -> Result<String, TransportError>;
}

/// Anything that turns a (system, user) prompt pair into assistant text.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, system: &str, user: &str) -> Result<ChatExchange, BackendError>;

    fn model_id(&self) -> String;
}

impl<B: ChatBackend + ?Sized> ChatBackend for Arc<B> {
    fn complete(&self, system: &str, user: &str) -> Result<ChatExchange, BackendError> {
        (**self).complete(system, user)
    }

    fn model_id(&self) -> String {
        (**self).model_id()
    }
}

/// Retries transient transport failures with exponential backoff.
pub struct RetryingBackend<T> {
    transport: T,
    model: String,
    max_retries: u32,
    base_delay: Duration,
}

impl<T: Transport> RetryingBackend<T> {
    pub fn new(transport: T, model: impl Into<String>, max_retries: u32, base_delay: Duration) -> Self {
        RetryingBackend {
            transport,
            model: model.into(),
            max_retries,
            base_delay,
        }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }
}

impl<T: Transport> ChatBackend for RetryingBackend<T> {
    fn complete(&self, system: &str, user: &str) -> Result<ChatExchange, BackendError> {
        let started = Instant::now();
        let mut delay = self.base_delay;
        let mut attempt = 0;
        loop {
            attempt += 1;
            match self.transport.send(system, user) {
                Ok(response) => {
                    debug!(attempt, model = %self.model, "completion ok");
                    return Ok(ChatExchange {
                        system: system.to_string(),
                        user: user.to_string(),
                        response,
                        latency_ms: started.elapsed().as_millis() as u64,
                        attempts: attempt,
                    });
                }
                Err(e) if !e.is_retryable() => {
                    warn!(attempt, error = %e, "completion rejected");
                    return Err(BackendError::Rejected(e));
                }
                Err(e) if attempt > self.max_retries => {
                    warn!(attempt, error = %e, "completion failed, giving up");
                    return Err(BackendError::Unavailable { attempts: attempt, last: e });
                }
                Err(e) => {
                    warn!(attempt, error = %e, ?delay, "completion failed, retrying");
                    if !delay.is_zero() {
                        thread::sleep(delay);
                    }
                    delay = delay.saturating_mul(2);
                }
            }
        }
    }

    fn model_id(&self) -> String {
        self.model.clone()
    }
}

/// Blocking HTTP transport speaking the chat-completions wire format.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
    url: String,
    model: String,
    temperature: f64,
    token: Option<String>,
}

impl HttpTransport {
    pub fn new(cfg: &BackendConfig) -> Result<Self, BackendError> {
        cfg.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        let token = cfg.token_env.as_deref().and_then(|name| std::env::var(name).ok());
        Ok(HttpTransport {
            client,
            url: cfg.completions_url(),
            model: cfg.model.clone(),
            temperature: cfg.temperature,
            token,
        })
    }

    pub fn request_body(&self, system: &str, user: &str) -> serde_json::Value {
        serde_json::json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        })
    }
}

impl Transport for HttpTransport {
    fn send(&self, system: &str, user: &str) -> Result<String, TransportError> {
        let mut req = self.client.post(&self.url).json(&self.request_body(system, user));
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send().map_err(|e| {
            if e.is_timeout() {
                TransportError::Timeout
            } else {
                TransportError::Network(e.to_string())
            }
        })?;
        let status = resp.status();
        if !status.is_success() {
            return Err(TransportError::Status(status.as_u16()));
        }
        let body: serde_json::Value = resp.json().map_err(|e| TransportError::Malformed(e.to_string()))?;
        extract_content(&body)
    }
}

/// Pulls `choices[0].message.content` out of a chat-completions response.
pub fn extract_content(body: &serde_json::Value) -> Result<String, TransportError> {
    body.pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .map(str::to_owned)
        .ok_or_else(|| TransportError::Malformed("missing choices[0].message.content".into()))
}

/// The production backend: HTTP with retries.
pub fn http_backend(cfg: &BackendConfig) -> Result<RetryingBackend<HttpTransport>, BackendError> {
    Ok(RetryingBackend::new(
        HttpTransport::new(cfg)?,
        cfg.model.clone(),
        cfg.max_retries,
        Duration::from_millis(cfg.backoff_ms),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    struct Flaky {
        outcomes: Mutex<Vec<Result<String, TransportError>>>,
        calls: Mutex<u32>,
    }

    impl Flaky {
        fn new(mut outcomes: Vec<Result<String, TransportError>>) -> Self {
            outcomes.reverse();
            Flaky {
                outcomes: Mutex::new(outcomes),
                calls: Mutex::new(0),
            }
        }
    }

    impl Transport for Flaky {
        fn send(&self, _: &str, _: &str) -> Result<String, TransportError> {
            *self.calls.lock().unwrap() += 1;
            self.outcomes.lock().unwrap().pop().unwrap_or(Err(TransportError::Status(500)))
        }
    }

    #[test]
    fn two_timeouts_then_success() {
        let t = Flaky::new(vec![Err(TransportError::Timeout), Err(TransportError::Timeout), Ok("Action: 9".into())]);
        let b = RetryingBackend::new(t, "m", 3, Duration::ZERO);
        let ex = b.complete("s", "u").unwrap();
        assert_eq!(ex.attempts, 3);
        assert_eq!(ex.response, "Action: 9");
        assert_eq!(ex.system, "s");
    }

    #[test]
    fn permanent_500_is_unavailable() {
        let b = RetryingBackend::new(Flaky::new(vec![]), "m", 2, Duration::ZERO);
        assert_eq!(
            b.complete("s", "u").unwrap_err(),
            BackendError::Unavailable {
                attempts: 3,
                last: TransportError::Status(500)
            }
        );
        assert_eq!(*b.transport().calls.lock().unwrap(), 3);
    }

    #[test]
    fn client_error_is_not_retried() {
        let b = RetryingBackend::new(Flaky::new(vec![Err(TransportError::Status(401))]), "m", 5, Duration::ZERO);
        assert!(matches!(b.complete("s", "u"), Err(BackendError::Rejected(_))));
        assert_eq!(*b.transport().calls.lock().unwrap(), 1);
    }

    #[test]
    fn url_and_body_shape() {
        let cfg = BackendConfig {
            endpoint: "http://x/v1/".into(),
            token_env: None,
            ..Default::default()
        };
        assert_eq!(cfg.completions_url(), "http://x/v1/chat/completions");
        let t = HttpTransport::new(&cfg).unwrap();
        let body = t.request_body("sys", "usr");
        assert_eq!(body["messages"][0]["role"], "system");
        assert_eq!(body["messages"][1]["content"], "usr");
        assert_eq!(body["temperature"], 0.0);
    }

    #[test]
    fn content_extraction() {
        let body = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": "hi"}}]});
        assert_eq!(extract_content(&body).unwrap(), "hi");
        assert!(extract_content(&serde_json::json!({})).is_err());
    }

    #[test]
    fn zero_timeout_rejected() {
        let cfg = BackendConfig {
            timeout_secs: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
