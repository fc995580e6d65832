use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::BridgeError;

pub const ENV_URL: &str = "CLARISIM_LLM_URL";
pub const ENV_KEY: &str = "CLARISIM_LLM_KEY";
pub const ENV_MODEL: &str = "CLARISIM_LLM_MODEL";

/// Chat-completions endpoint. The key is never printed or serialized.
#[derive(Clone)]
pub struct Endpoint {
    pub url: String,
    pub model: String,
    api_key: Option<String>,
}

impl fmt::Debug for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Endpoint")
            .field("url", &self.url)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl Endpoint {
    pub fn new(url: impl Into<String>, model: impl Into<String>, api_key: Option<String>) -> Self {
        Endpoint {
            url: url.into(),
            model: model.into(),
            api_key,
        }
    }

    pub fn from_env() -> Result<Self, BridgeError> {
        let url = std::env::var(ENV_URL).map_err(|_| BridgeError::Config(format!("{ENV_URL} is not set")))?;
        let model = std::env::var(ENV_MODEL).unwrap_or_else(|_| "gpt-4".into());
        Ok(Endpoint::new(url, model, std::env::var(ENV_KEY).ok()))
    }

    fn redact(&self, text: &str) -> String {
        match &self.api_key {
            Some(k) if !k.is_empty() => text.replace(k.as_str(), "<redacted>"),
            _ => text.to_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 4,
            base_delay: Duration::from_millis(250),
            max_delay: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    pub fn delay(&self, attempt: u32) -> Duration {
        self.base_delay
            .saturating_mul(1u32 << attempt.saturating_sub(1).min(16))
            .min(self.max_delay)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::Assistant, content: content.into() }
    }
}

/// One completed call, as written to the request log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub url: String,
    pub model: String,
    pub system_message: String,
    pub messages: Vec<ChatMessage>,
    pub response: String,
    pub latency_ms: u64,
    pub attempts: u32,
}

/// A call whose endpoint could not be reached is skipped, not failed.
#[derive(Debug)]
pub enum ChatOutcome {
    Completed(ChatExchange),
    Skipped { reason: String },
}

pub struct ChatClient {
    endpoint: Endpoint,
    retry: RetryPolicy,
    temperature: f64,
    concurrency: usize,
    http: reqwest::blocking::Client,
    /// Earliest instant any request may be sent, pushed forward by 429s.
    not_before: Mutex<Option<Instant>>,
    log: Option<Mutex<File>>,
}

impl ChatClient {
    pub fn new(endpoint: Endpoint) -> Result<Self, BridgeError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| BridgeError::Config(e.to_string()))?;
        Ok(ChatClient {
            endpoint,
            retry: RetryPolicy::default(),
            temperature: 0.0,
            concurrency: 4,
            http,
            not_before: Mutex::new(None),
            log: None,
        })
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_concurrency(mut self, n: usize) -> Self {
        self.concurrency = n.max(1);
        self
    }

    /// Appends one JSON line per completed exchange.
    pub fn with_request_log(mut self, path: &Path) -> Result<Self, BridgeError> {
        let file = File::options()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| BridgeError::Config(format!("request log: {e}")))?;
        self.log = Some(Mutex::new(file));
        Ok(self)
    }

    pub fn endpoint(&self) -> &Endpoint {
        &self.endpoint
    }

    fn wait_for_slot(&self) {
        let until = *self.not_before.lock().unwrap();
        if let Some(t) = until {
            let now = Instant::now();
            if t > now {
                std::thread::sleep(t - now);
            }
        }
    }

    fn push_back(&self, delay: Duration) {
        let mut guard = self.not_before.lock().unwrap();
        let t = Instant::now() + delay;
        if guard.is_none_or(|cur| cur < t) {
            *guard = Some(t);
        }
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<String, (BridgeError, Option<Duration>)> {
        let mut req = self.http.post(&self.endpoint.url).json(body);
        if let Some(k) = &self.endpoint.api_key {
            req = req.bearer_auth(k);
        }
        let resp = req
            .send()
            .map_err(|e| (BridgeError::Network(self.endpoint.redact(&e.to_string())), None))?;
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<f64>().ok())
            .map(Duration::from_secs_f64);
        let text = resp
            .text()
            .map_err(|e| (BridgeError::Network(self.endpoint.redact(&e.to_string())), None))?;
        match status {
            200..=299 => {}
            401 | 403 => return Err((BridgeError::Auth(status), None)),
            _ => {
                return Err((
                    BridgeError::Http {
                        status,
                        body: self.endpoint.redact(&text),
                    },
                    retry_after,
                ))
            }
        }
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
            (
                BridgeError::Parse {
                    message: format!("completion body: {e}"),
                    text: self.endpoint.redact(&text),
                },
                None,
            )
        })?;
        match value.pointer("/choices/0/message/content") {
            Some(serde_json::Value::String(s)) => Ok(s.clone()),
            Some(serde_json::Value::Null) => Ok(String::new()),
            _ => Err((
                BridgeError::Parse {
                    message: "missing choices[0].message.content".into(),
                    text: self.endpoint.redact(&text),
                },
                None,
            )),
        }
    }

    /// One completion. An empty system message is omitted from the request.
    pub fn chat(&self, system_message: &str, history: &[ChatMessage]) -> Result<ChatExchange, BridgeError> {
        let mut messages = Vec::with_capacity(history.len() + 1);
        if !system_message.is_empty() {
            messages.push(json!({"role": "system", "content": system_message}));
        }
        messages.extend(history.iter().map(|m| json!(m)));
        let body = json!({
            "model": self.endpoint.model,
            "temperature": self.temperature,
            "messages": messages,
        });

        let start = Instant::now();
        let mut attempts = 0;
        loop {
            attempts += 1;
            self.wait_for_slot();
            match self.attempt(&body) {
                Ok(response) => {
                    let exchange = ChatExchange {
                        url: self.endpoint.url.clone(),
                        model: self.endpoint.model.clone(),
                        system_message: system_message.to_owned(),
                        messages: history.to_vec(),
                        response,
                        latency_ms: start.elapsed().as_millis() as u64,
                        attempts,
                    };
                    self.write_log(&exchange);
                    return Ok(exchange);
                }
                Err((err, retry_after)) => {
                    if !err.is_transient() {
                        return Err(err);
                    }
                    if attempts >= self.retry.max_attempts {
                        return Err(BridgeError::RetriesExhausted {
                            attempts,
                            last: err.to_string(),
                        });
                    }
                    let delay = retry_after.unwrap_or_else(|| self.retry.delay(attempts)).min(self.retry.max_delay);
                    log::warn!("attempt {attempts} to {} failed: {err}; retrying in {delay:?}", self.endpoint.url);
                    if matches!(err, BridgeError::Http { status: 429, .. }) {
                        self.push_back(delay);
                    } else {
                        std::thread::sleep(delay);
                    }
                }
            }
        }
    }

    pub fn chat_or_skip(&self, system_message: &str, history: &[ChatMessage]) -> Result<ChatOutcome, BridgeError> {
        match self.chat(system_message, history) {
            Ok(x) => Ok(ChatOutcome::Completed(x)),
            Err(e @ (BridgeError::RetriesExhausted { .. } | BridgeError::Network(_))) => {
                log::warn!("skipping exchange: {e}");
                Ok(ChatOutcome::Skipped { reason: e.to_string() })
            }
            Err(e) => Err(e),
        }
    }

    /// Runs requests with bounded concurrency; results come back in request order.
    pub fn chat_batch(&self, requests: &[(String, Vec<ChatMessage>)]) -> Vec<Result<ChatExchange, BridgeError>> {
        let slots: Vec<Mutex<Option<Result<ChatExchange, BridgeError>>>> =
            requests.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for _ in 0..self.concurrency.min(requests.len()) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some((system, history)) = requests.get(i) else { break };
                    *slots[i].lock().unwrap() = Some(self.chat(system, history));
                });
            }
        });
        slots
            .into_iter()
            .map(|m| m.into_inner().unwrap().expect("every request slot is filled"))
            .collect()
    }

    fn write_log(&self, exchange: &ChatExchange) {
        if let Some(file) = &self.log {
            let line = self.endpoint.redact(&serde_json::to_string(exchange).expect("exchange serializes"));
            let mut f = file.lock().unwrap();
            if let Err(e) = writeln!(f, "{line}") {
                log::warn!("request log write failed: {e}");
            }
        }
    }
}
