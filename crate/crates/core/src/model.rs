//! Text-in/text-out model boundary: one trait, scripted mocks for tests,
//! and an HTTP client for real inference backends.

use std::sync::Mutex;
use std::time::Duration;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct ModelRequest {
    pub input: String,
    pub max_output_tokens: u32,
    /// 0 = greedy decoding, the default everywhere in this toolkit.
    pub temperature: f64,
}

impl ModelRequest {
    pub fn greedy(input: String) -> Self {
        ModelRequest {
            input,
            max_output_tokens: 256,
            temperature: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModelReply {
    pub text: String,
    /// Input was cut to the endpoint's character budget before sending.
    pub truncated: bool,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("remote error {status}: {body}")]
    Remote { status: u16, body: String },
}

pub trait TextModel: Send + Sync {
    fn generate(&self, request: &ModelRequest) -> Result<ModelReply, ModelError>;
}

/// Test mock: replies with whatever sits between `<gold>` and `</gold>`
/// in the input. Lets harness self-tests drive any task to a perfect
/// score without a real model.
pub struct EchoGold;

/// Marker wrapped around gold answers for [`EchoGold`].
pub fn gold_marker(gold: &str) -> String {
    format!("<gold>{gold}</gold>")
}

impl TextModel for EchoGold {
    fn generate(&self, request: &ModelRequest) -> Result<ModelReply, ModelError> {
        let text = request
            .input
            .rfind("<gold>")
            .and_then(|start| {
                let rest = &request.input[start + "<gold>".len()..];
                rest.find("</gold>").map(|end| rest[..end].to_string())
            })
            .unwrap_or_default();
        Ok(ModelReply {
            text,
            truncated: false,
        })
    }
}

/// Always replies with the same text.
pub struct ConstantModel(pub String);

impl TextModel for ConstantModel {
    fn generate(&self, _: &ModelRequest) -> Result<ModelReply, ModelError> {
        Ok(ModelReply {
            text: self.0.clone(),
            truncated: false,
        })
    }
}

/// Emits syntactically valid actions with uniformly random refs, ignoring
/// the page. The floor baseline for navigation.
pub struct RandomActionModel {
    rng: Mutex<ChaCha8Rng>,
    max_ref: u32,
}

impl RandomActionModel {
    pub fn new(seed: u64, max_ref: u32) -> Self {
        RandomActionModel {
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
            max_ref: max_ref.max(1),
        }
    }
}

const RANDOM_TEXTS: &[&str] = &["hello", "test", "abc", "xyz123"];

impl TextModel for RandomActionModel {
    fn generate(&self, _: &ModelRequest) -> Result<ModelReply, ModelError> {
        let mut rng = self.rng.lock().unwrap();
        let ref_num = rng.gen_range(1..=self.max_ref);
        let text = if rng.gen_bool(0.5) {
            format!("{{action: click, ref: {ref_num}}}")
        } else {
            let t = RANDOM_TEXTS[rng.gen_range(0..RANDOM_TEXTS.len())];
            format!("{{action: type, ref: {ref_num}, text: {t}}}")
        };
        Ok(ModelReply {
            text,
            truncated: false,
        })
    }
}

/// HTTP inference endpoint: POST JSON `{input, max_output_tokens,
/// temperature}`, expect `{output}` back.
pub struct ModelEndpoint {
    pub base_url: String,
    pub max_retries: u32,
    /// Context budget proxy; longer inputs lose their tail.
    pub max_input_chars: usize,
    /// First retry delay; doubles per attempt.
    pub backoff: Duration,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl ModelEndpoint {
    /// Reads the API key, if any, from `WEBTK_API_KEY`.
    pub fn new(base_url: &str, timeout: Duration, max_retries: u32, max_input_chars: usize) -> Self {
        ModelEndpoint {
            base_url: base_url.to_string(),
            max_retries,
            max_input_chars,
            backoff: Duration::from_millis(200),
            api_key: std::env::var("WEBTK_API_KEY").ok(),
            client: reqwest::blocking::Client::builder()
                .timeout(timeout)
                .build()
                .expect("client construction cannot fail with static options"),
        }
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<String, ModelError> {
        let mut req = self.client.post(&self.base_url).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let response = req.send().map_err(|e| {
            if e.is_timeout() {
                ModelError::Timeout
            } else {
                ModelError::Transport(e.to_string())
            }
        })?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| ModelError::Transport(e.to_string()))?;
        if !status.is_success() {
            return Err(ModelError::Remote {
                status: status.as_u16(),
                body: text,
            });
        }
        let parsed: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| ModelError::Transport(format!("unparseable response: {e}")))?;
        parsed
            .get("output")
            .and_then(|v| v.as_str())
            .map(String::from)
            .ok_or_else(|| ModelError::Transport("response lacks an output field".into()))
    }
}

/// Timeouts, transport failures, and 429/5xx responses are retryable;
/// other HTTP errors are not.
fn retryable(error: &ModelError) -> bool {
    match error {
        ModelError::Timeout | ModelError::Transport(_) => true,
        ModelError::Remote { status, .. } => *status == 429 || *status >= 500,
    }
}

/// Cut to at most `max_chars` characters. The encoding puts history and
/// instruction first, so only HTML tail is lost.
pub fn truncate_input(input: &str, max_chars: usize) -> (&str, bool) {
    match input.char_indices().nth(max_chars) {
        Some((byte_idx, _)) => (&input[..byte_idx], true),
        None => (input, false),
    }
}

impl TextModel for ModelEndpoint {
    fn generate(&self, request: &ModelRequest) -> Result<ModelReply, ModelError> {
        let (input, truncated) = truncate_input(&request.input, self.max_input_chars);
        if truncated {
            log::warn!(
                "input truncated from {} to {} chars for {}",
                request.input.chars().count(),
                self.max_input_chars,
                self.base_url
            );
        }
        let body = serde_json::json!({
            "input": input,
            "max_output_tokens": request.max_output_tokens,
            "temperature": request.temperature,
        });
        let mut delay = self.backoff;
        let mut last_error = None;
        for attempt in 0..=self.max_retries {
            match self.attempt(&body) {
                Ok(text) => return Ok(ModelReply { text, truncated }),
                Err(e) if retryable(&e) && attempt < self.max_retries => {
                    log::warn!("attempt {} against {} failed: {e}", attempt + 1, self.base_url);
                    std::thread::sleep(delay);
                    delay *= 2;
                    last_error = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last_error.expect("loop runs at least once"))
    }
}
