use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{check_len, PerplexityScorer, ScorerError};

/// Path appended to the endpoint base URL.
pub const PERPLEXITY_PATH: &str = "/v1/perplexity";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    pub url: String,
    pub timeout_secs: f64,
    pub max_batch: usize,
    pub max_in_flight: usize,
    pub retries: u32,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            url: String::new(),
            timeout_secs: 30.0,
            max_batch: 64,
            max_in_flight: 4,
            retries: 2,
        }
    }
}

#[derive(Serialize)]
struct Request<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct Response {
    perplexities: Vec<f64>,
}

/// Client for an HTTP perplexity service.
///
/// Requests are split into batches of at most `max_batch` texts and up to
/// `max_in_flight` batches are sent concurrently. Failed batches are retried
/// `retries` times; scoring is a pure function of the text so retries are safe.
pub struct RemoteScorerClient {
    name: String,
    endpoint: String,
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteScorerClient {
    pub fn new(config: RemoteConfig) -> Result<Self, ScorerError> {
        if config.url.is_empty() {
            return Err(ScorerError::InvalidConfig("remote scorer URL is empty".into()));
        }
        if config.max_batch == 0 || config.max_in_flight == 0 {
            return Err(ScorerError::InvalidConfig(
                "max_batch and max_in_flight must be positive".into(),
            ));
        }
        if !(config.timeout_secs > 0.0) {
            return Err(ScorerError::InvalidConfig("timeout must be positive".into()));
        }
        let base = config.url.trim_end_matches('/');
        let endpoint = if base.ends_with(PERPLEXITY_PATH) {
            base.to_string()
        } else {
            format!("{base}{PERPLEXITY_PATH}")
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            name: format!("remote({})", config.url),
            endpoint,
            config,
            agent,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    /// Scores raw texts. Output order matches input order.
    pub fn remote_score(&self, texts: &[String]) -> Result<Vec<f64>, ScorerError> {
        if texts.is_empty() {
            return Err(ScorerError::Unavailable("no texts to score".into()));
        }
        if let Some(i) = texts.iter().position(|t| t.trim().is_empty()) {
            return Err(ScorerError::Unavailable(format!("text {i} is empty")));
        }
        let batches: Vec<&[String]> = texts.chunks(self.config.max_batch).collect();
        let mut out = Vec::with_capacity(texts.len());
        for wave in batches.chunks(self.config.max_in_flight) {
            let results: Vec<Result<Vec<f64>, ScorerError>> = std::thread::scope(|s| {
                let handles: Vec<_> = wave
                    .iter()
                    .map(|batch| s.spawn(move || self.send_with_retries(batch)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| {
                        h.join()
                            .unwrap_or_else(|_| Err(ScorerError::Unavailable("request thread panicked".into())))
                    })
                    .collect()
            });
            for r in results {
                out.extend(r?);
            }
        }
        Ok(out)
    }

    fn send_with_retries(&self, batch: &[String]) -> Result<Vec<f64>, ScorerError> {
        let mut attempt = 0;
        loop {
            match self.send(batch) {
                Ok(v) => return Ok(v),
                // A well-formed answer of the wrong length will not improve on retry.
                Err(e @ Failure::Fatal(_)) => return Err(e.into()),
                Err(e) if attempt >= self.config.retries => return Err(e.into()),
                Err(_) => attempt += 1,
            }
        }
    }

    fn send(&self, batch: &[String]) -> Result<Vec<f64>, Failure> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .send_json(Request { texts: batch })
            .map_err(|e| Failure::Transient(format!("{}: {e}", self.endpoint)))?;
        let status = resp.status();
        if status != 200 {
            return Err(Failure::Transient(format!("{}: HTTP {status}", self.endpoint)));
        }
        let body: Response = resp
            .body_mut()
            .read_json()
            .map_err(|e| Failure::Transient(format!("malformed response: {e}")))?;
        if body.perplexities.len() != batch.len() {
            return Err(Failure::Fatal(format!(
                "response has {} perplexities for {} texts",
                body.perplexities.len(),
                batch.len()
            )));
        }
        if let Some(v) = body.perplexities.iter().find(|v| !(**v >= 0.0)) {
            return Err(Failure::Fatal(format!("invalid perplexity {v} in response")));
        }
        Ok(body.perplexities)
    }
}

enum Failure {
    Transient(String),
    Fatal(String),
}

impl From<Failure> for ScorerError {
    fn from(f: Failure) -> Self {
        match f {
            Failure::Transient(m) | Failure::Fatal(m) => ScorerError::Unavailable(m),
        }
    }
}

impl PerplexityScorer for RemoteScorerClient {
    fn name(&self) -> &str {
        &self.name
    }

    fn perplexity(&self, tokens: &[String]) -> Result<f64, ScorerError> {
        Ok(self.perplexity_batch(&[tokens])?[0])
    }

    /// Sends the normalized (space-joined) form of each token sequence.
    fn perplexity_batch(&self, batch: &[&[String]]) -> Result<Vec<f64>, ScorerError> {
        for t in batch {
            check_len(t)?;
        }
        let texts: Vec<String> = batch.iter().map(|t| t.join(" ")).collect();
        self.remote_score(&texts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_is_derived_from_base_url() {
        let c = RemoteScorerClient::new(RemoteConfig {
            url: "http://localhost:1/".into(),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(c.endpoint(), "http://localhost:1/v1/perplexity");
        let c = RemoteScorerClient::new(RemoteConfig {
            url: "http://h/v1/perplexity".into(),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(c.endpoint(), "http://h/v1/perplexity");
    }

    #[test]
    fn invalid_configs() {
        assert!(RemoteScorerClient::new(RemoteConfig::default()).is_err());
        let bad = RemoteConfig {
            url: "http://h".into(),
            max_batch: 0,
            ..Default::default()
        };
        assert!(RemoteScorerClient::new(bad).is_err());
    }

    #[test]
    fn unreachable_server_is_unavailable() {
        // Port 9 (discard) on loopback is almost never listening.
        let c = RemoteScorerClient::new(RemoteConfig {
            url: "http://127.0.0.1:9".into(),
            timeout_secs: 2.0,
            retries: 0,
            ..Default::default()
        })
        .unwrap();
        let err = c.remote_score(&["a b".to_string()]).unwrap_err();
        assert!(matches!(err, ScorerError::Unavailable(_)));
    }

    #[test]
    fn empty_inputs_are_rejected_locally() {
        let c = RemoteScorerClient::new(RemoteConfig {
            url: "http://127.0.0.1:9".into(),
            ..Default::default()
        })
        .unwrap();
        assert!(c.remote_score(&[]).is_err());
        assert!(c.remote_score(&["".to_string()]).is_err());
        assert_eq!(c.perplexity(&["a".to_string()]), Err(ScorerError::TooShort { len: 1 }));
    }
}
