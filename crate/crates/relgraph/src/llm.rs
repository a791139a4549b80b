//! Chat-completion clients: live HTTP, recorded fixtures, and offline
//! replay.
//!
//! Every pipeline stage that talks to a model goes through the
//! [`TextCompletion`] trait, so a run can transparently use:
//!
//! * [`HttpClient`] — a chat-completions endpoint over HTTP;
//! * [`MockClient`] — replay from a [`FixtureStore`] directory, fully
//!   offline and byte-deterministic;
//! * [`RecordingClient`] — wrap any backend and persist its completions as
//!   fixtures for later replay.
//!
//! Fixtures are keyed by a content hash of `(model, temperature, prompt)`,
//! so a recorded run replays only against the same configuration that
//! produced it.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::hash::sha256_hex;

/// One prompt/completion round trip, with the configuration that produced
/// it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatExchange {
    pub prompt: String,
    pub completion: String,
    pub model: String,
    pub temperature: f64,
    /// Wall-clock milliseconds for the call; zero for fixture replay.
    pub latency_ms: u64,
}

/// Errors from completion backends.
#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("no API key: set the `{0}` environment variable")]
    MissingApiKey(String),
    #[error("HTTP status {status}: {message}")]
    Http { status: u16, message: String },
    #[error("network error: {0}")]
    Network(String),
    #[error("malformed completion response: {0}")]
    MalformedResponse(String),
    #[error("no recorded completion for key {key} (prompt starts {prompt_start:?})")]
    FixtureMiss { key: String, prompt_start: String },
    #[error("fixture store error at {path}: {source}")]
    FixtureIo {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl LlmError {
    /// Transient failures worth retrying: rate limits, server errors, and
    /// network-level problems.
    pub fn is_retryable(&self) -> bool {
        match self {
            LlmError::Http { status, .. } => *status == 429 || *status >= 500,
            LlmError::Network(_) => true,
            _ => false,
        }
    }
}

/// A blocking single-prompt completion backend.
///
/// Implementations must be shareable across worker threads; see
/// [`complete_many`].
pub trait TextCompletion: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<ChatExchange, LlmError>;

    /// Model identifier, used for fixture keying and report metadata.
    fn model(&self) -> &str;

    /// Sampling temperature, used for fixture keying and report metadata.
    fn temperature(&self) -> f64;
}

/// Connection and sampling settings for [`HttpClient`] and the fixture key
/// space.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ClientConfig {
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// Worker threads used by [`complete_many`].
    pub max_concurrency: usize,
    /// Environment variable holding the API key.
    pub api_key_env: String,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            base_url: "https://api.openai.com/v1".to_string(),
            model: "gpt-4o".to_string(),
            temperature: 0.0,
            max_tokens: 4096,
            timeout_secs: 60,
            max_retries: 3,
            max_concurrency: 4,
            api_key_env: "LLM_API_KEY".to_string(),
        }
    }
}

/// Content key identifying one completion request: models or temperatures
/// that differ never share fixtures.
pub fn fixture_key(model: &str, temperature: f64, prompt: &str) -> String {
    sha256_hex(&[model, &temperature.to_string(), prompt])
}

/// Directory of recorded completions, one `<key>.txt` file each, plus an
/// append-only `index.tsv` for human inspection.
#[derive(Debug, Clone)]
pub struct FixtureStore {
    dir: PathBuf,
}

impl FixtureStore {
    /// Open (creating if needed) a fixture directory.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|source| LlmError::FixtureIo {
            path: dir.clone(),
            source,
        })?;
        Ok(FixtureStore { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn completion_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.txt"))
    }

    /// The recorded completion for a key, if present.
    pub fn lookup(&self, key: &str) -> Result<Option<String>, LlmError> {
        let path = self.completion_path(key);
        match std::fs::read_to_string(&path) {
            Ok(text) => Ok(Some(text)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(source) => Err(LlmError::FixtureIo { path, source }),
        }
    }

    /// Record a completion under its key and index it. Overwrites any
    /// previous recording for the same key.
    pub fn store(&self, key: &str, prompt: &str, completion: &str) -> Result<(), LlmError> {
        let path = self.completion_path(key);
        std::fs::write(&path, completion).map_err(|source| LlmError::FixtureIo {
            path: path.clone(),
            source,
        })?;
        let index = self.dir.join("index.tsv");
        let novel = !std::fs::read_to_string(&index)
            .map(|t| t.lines().any(|l| l.starts_with(key)))
            .unwrap_or(false);
        if novel {
            let line = format!("{key}\t{}\n", prompt_preview(prompt));
            let result = std::fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(&index)
                .and_then(|mut f| f.write_all(line.as_bytes()));
            result.map_err(|source| LlmError::FixtureIo {
                path: index.clone(),
                source,
            })?;
        }
        Ok(())
    }

    /// Number of recorded completions.
    pub fn len(&self) -> usize {
        std::fs::read_dir(&self.dir)
            .map(|entries| {
                entries
                    .filter_map(Result::ok)
                    .filter(|e| {
                        let name = e.file_name();
                        let name = name.to_string_lossy();
                        name.ends_with(".txt") && name != "index.tsv"
                    })
                    .count()
            })
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn prompt_preview(prompt: &str) -> String {
    let flat: String = prompt
        .chars()
        .map(|c| if c == '\n' { ' ' } else { c })
        .collect();
    let mut preview: String = flat.chars().take(96).collect();
    if flat.chars().count() > 96 {
        preview.push('…');
    }
    preview
}

/// Offline backend replaying a [`FixtureStore`]; a prompt without a
/// recording fails with [`LlmError::FixtureMiss`].
pub struct MockClient {
    store: FixtureStore,
    model: String,
    temperature: f64,
}

impl MockClient {
    pub fn new(store: FixtureStore, model: impl Into<String>, temperature: f64) -> Self {
        MockClient {
            store,
            model: model.into(),
            temperature,
        }
    }
}

impl TextCompletion for MockClient {
    fn complete(&self, prompt: &str) -> Result<ChatExchange, LlmError> {
        let key = fixture_key(&self.model, self.temperature, prompt);
        match self.store.lookup(&key)? {
            Some(completion) => Ok(ChatExchange {
                prompt: prompt.to_string(),
                completion,
                model: self.model.clone(),
                temperature: self.temperature,
                latency_ms: 0,
            }),
            None => Err(LlmError::FixtureMiss {
                key,
                prompt_start: prompt_preview(prompt),
            }),
        }
    }

    fn model(&self) -> &str {
        &self.model
    }

    fn temperature(&self) -> f64 {
        self.temperature
    }
}

/// Wrap a backend and record every successful completion as a fixture.
pub struct RecordingClient<C> {
    inner: C,
    store: FixtureStore,
}

impl<C: TextCompletion> RecordingClient<C> {
    pub fn new(inner: C, store: FixtureStore) -> Self {
        RecordingClient { inner, store }
    }
}

impl<C: TextCompletion> TextCompletion for RecordingClient<C> {
    fn complete(&self, prompt: &str) -> Result<ChatExchange, LlmError> {
        let exchange = self.inner.complete(prompt)?;
        let key = fixture_key(self.inner.model(), self.inner.temperature(), prompt);
        self.store.store(&key, prompt, &exchange.completion)?;
        Ok(exchange)
    }

    fn model(&self) -> &str {
        self.inner.model()
    }

    fn temperature(&self) -> f64 {
        self.inner.temperature()
    }
}

/// Blocking client for an OpenAI-style `/chat/completions` endpoint.
pub struct HttpClient {
    config: ClientConfig,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl std::fmt::Debug for HttpClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpClient")
            .field("config", &self.config)
            .field("api_key", &"<redacted>")
            .finish_non_exhaustive()
    }
}

impl HttpClient {
    /// Build a client, resolving the API key from the configured
    /// environment variable up front so misconfiguration fails before any
    /// request is attempted.
    pub fn new(config: ClientConfig) -> Result<Self, LlmError> {
        let api_key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| LlmError::MissingApiKey(config.api_key_env.clone()))?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| LlmError::Network(e.to_string()))?;
        Ok(HttpClient {
            config,
            api_key,
            http,
        })
    }

    fn request_once(&self, prompt: &str) -> Result<ChatExchange, LlmError> {
        let url = format!(
            "{}/chat/completions",
            self.config.base_url.trim_end_matches('/')
        );
        let body = serde_json::json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
            "messages": [{"role": "user", "content": prompt}],
        });
        let started = Instant::now();
        let response = self
            .http
            .post(&url)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| LlmError::Network(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .text()
            .map_err(|e| LlmError::Network(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(LlmError::Http {
                status,
                message: prompt_preview(&text),
            });
        }
        let parsed: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| LlmError::MalformedResponse(e.to_string()))?;
        let completion = parsed["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| {
                LlmError::MalformedResponse("missing choices[0].message.content".to_string())
            })?
            .to_string();
        Ok(ChatExchange {
            prompt: prompt.to_string(),
            completion,
            model: self.config.model.clone(),
            temperature: self.config.temperature,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }
}

impl TextCompletion for HttpClient {
    fn complete(&self, prompt: &str) -> Result<ChatExchange, LlmError> {
        with_retries(self.config.max_retries, Duration::from_millis(250), || {
            self.request_once(prompt)
        })
    }

    fn model(&self) -> &str {
        &self.config.model
    }

    fn temperature(&self) -> f64 {
        self.config.temperature
    }
}

/// Run `attempt` with exponential backoff: up to `max_retries` extra tries
/// after the first, doubling the delay each time, retrying only errors
/// marked retryable.
pub fn with_retries<T>(
    max_retries: u32,
    base_delay: Duration,
    mut attempt: impl FnMut() -> Result<T, LlmError>,
) -> Result<T, LlmError> {
    let mut delay = base_delay;
    let mut tries = 0;
    loop {
        match attempt() {
            Ok(value) => return Ok(value),
            Err(e) if e.is_retryable() && tries < max_retries => {
                tries += 1;
                std::thread::sleep(delay);
                delay = delay.saturating_mul(2);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Complete many prompts on up to `workers` threads, preserving input
/// order in the output.
pub fn complete_many(
    client: &dyn TextCompletion,
    prompts: &[String],
    workers: usize,
) -> Vec<Result<ChatExchange, LlmError>> {
    let workers = workers.clamp(1, prompts.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<ChatExchange, LlmError>>>> =
        Mutex::new((0..prompts.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= prompts.len() {
                    return;
                }
                let result = client.complete(&prompts[i]);
                slots.lock().expect("no panics hold this lock")[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .expect("all workers joined")
        .into_iter()
        .map(|slot| slot.expect("every index was processed"))
        .collect()
}

/// Summary of a fixture directory for report metadata: key → preview.
pub fn fixture_inventory(store: &FixtureStore) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    if let Ok(entries) = std::fs::read_dir(store.dir()) {
        for entry in entries.filter_map(Result::ok) {
            let name = entry.file_name().to_string_lossy().to_string();
            if let Some(key) = name.strip_suffix(".txt") {
                if name != "index.tsv" {
                    let size = entry.metadata().map(|m| m.len() as usize).unwrap_or(0);
                    out.insert(key.to_string(), size);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write as IoWrite};
    use std::net::TcpListener;

    struct EchoClient;

    impl TextCompletion for EchoClient {
        fn complete(&self, prompt: &str) -> Result<ChatExchange, LlmError> {
            Ok(ChatExchange {
                prompt: prompt.to_string(),
                completion: prompt.to_uppercase(),
                model: "echo".to_string(),
                temperature: 0.0,
                latency_ms: 1,
            })
        }

        fn model(&self) -> &str {
            "echo"
        }

        fn temperature(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn fixture_roundtrip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let store = FixtureStore::open(dir.path()).unwrap();
        let key = fixture_key("gpt-4o", 0.0, "hello");
        store
            .store(&key, "hello", "RELATIONSHIP\n(A, top, B)")
            .unwrap();
        assert_eq!(store.len(), 1);

        let mock = MockClient::new(store, "gpt-4o", 0.0);
        let hit = mock.complete("hello").unwrap();
        assert_eq!(hit.completion, "RELATIONSHIP\n(A, top, B)");
        assert_eq!(hit.latency_ms, 0);

        match mock.complete("other prompt") {
            Err(LlmError::FixtureMiss { key, prompt_start }) => {
                assert_eq!(key.len(), 64);
                assert!(prompt_start.starts_with("other"));
            }
            other => panic!("expected FixtureMiss, got {other:?}"),
        }
    }

    #[test]
    fn fixture_keys_separate_models_and_temperatures() {
        let a = fixture_key("gpt-4o", 0.0, "p");
        assert_eq!(a, fixture_key("gpt-4o", 0.0, "p"));
        assert_ne!(a, fixture_key("gpt-4o-mini", 0.0, "p"));
        assert_ne!(a, fixture_key("gpt-4o", 0.3, "p"));
        assert_ne!(a, fixture_key("gpt-4o", 0.0, "q"));
    }

    #[test]
    fn recording_client_persists_inner_completions() {
        let dir = tempfile::tempdir().unwrap();
        let store = FixtureStore::open(dir.path()).unwrap();
        let recorder = RecordingClient::new(EchoClient, store.clone());
        let out = recorder.complete("abc").unwrap();
        assert_eq!(out.completion, "ABC");

        // The recording replays through a mock with the same configuration.
        let mock = MockClient::new(store, "echo", 0.0);
        assert_eq!(mock.complete("abc").unwrap().completion, "ABC");
    }

    #[test]
    fn missing_api_key_fails_before_any_request() {
        let config = ClientConfig {
            api_key_env: "RELGRAPH_TEST_ABSENT_KEY".to_string(),
            ..ClientConfig::default()
        };
        match HttpClient::new(config) {
            Err(LlmError::MissingApiKey(var)) => assert_eq!(var, "RELGRAPH_TEST_ABSENT_KEY"),
            other => panic!("expected MissingApiKey, got {other:?}"),
        }
    }

    #[test]
    fn retries_stop_on_success_and_on_fatal_errors() {
        let mut calls = 0;
        let out = with_retries(5, Duration::from_millis(1), || {
            calls += 1;
            if calls < 3 {
                Err(LlmError::Http {
                    status: 429,
                    message: "slow down".to_string(),
                })
            } else {
                Ok(calls)
            }
        });
        assert_eq!(out.unwrap(), 3);

        let mut calls = 0;
        let out: Result<(), _> = with_retries(5, Duration::from_millis(1), || {
            calls += 1;
            Err(LlmError::Http {
                status: 400,
                message: "bad request".to_string(),
            })
        });
        assert!(matches!(out, Err(LlmError::Http { status: 400, .. })));
        assert_eq!(calls, 1, "non-retryable errors must not retry");
    }

    #[test]
    fn complete_many_preserves_prompt_order() {
        let prompts: Vec<String> = (0..32).map(|i| format!("p{i}")).collect();
        let results = complete_many(&EchoClient, &prompts, 4);
        assert_eq!(results.len(), 32);
        for (i, r) in results.iter().enumerate() {
            assert_eq!(r.as_ref().unwrap().completion, format!("P{i}"));
        }
    }

    /// Minimal single-use HTTP server: answers each queued response after
    /// fully reading the request.
    fn serve_responses(listener: TcpListener, responses: Vec<(u16, String)>) {
        for (status, body) in responses {
            let (mut stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut content_length = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let mut body_buf = vec![0u8; content_length];
            reader.read_exact(&mut body_buf).unwrap();
            let reason = if status == 200 {
                "OK"
            } else {
                "Too Many Requests"
            };
            let response = format!(
                "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(response.as_bytes()).unwrap();
        }
    }

    fn chat_body(content: &str) -> String {
        serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": content}}]
        })
        .to_string()
    }

    #[test]
    fn http_client_parses_completions_and_retries_rate_limits() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = std::thread::spawn(move || {
            serve_responses(
                listener,
                vec![
                    (200, chat_body("first answer")),
                    (429, "{\"error\": \"rate limited\"}".to_string()),
                    (200, chat_body("after retry")),
                ],
            );
        });

        std::env::set_var("RELGRAPH_TEST_HTTP_KEY", "test-key");
        let config = ClientConfig {
            base_url: format!("http://{addr}"),
            api_key_env: "RELGRAPH_TEST_HTTP_KEY".to_string(),
            timeout_secs: 10,
            max_retries: 2,
            ..ClientConfig::default()
        };
        let client = HttpClient::new(config).unwrap();
        assert_eq!(client.complete("one").unwrap().completion, "first answer");
        assert_eq!(client.complete("two").unwrap().completion, "after retry");
        server.join().unwrap();
    }
}
