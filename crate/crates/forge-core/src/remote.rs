//! Minimal JSON-over-HTTP client shared by the safety scorer and the
//! dialogue converter endpoints.
//!
//! Both speak the same shape: POST a single JSON object, get a single JSON
//! object back. Credentials come from an environment variable named in the
//! endpoint config and are sent as a bearer token. Rate-limited responses
//! are retried with exponential backoff before being surfaced with their
//! backoff metadata.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A remote endpoint: where to POST and which env var holds the credential.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoint {
    pub url: String,
    /// Name of the environment variable carrying the bearer token, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env: Option<String>,
    /// Maximum retries on rate-limited responses.
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Base backoff; attempt `k` waits `base * 2^k` ms (or Retry-After).
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
}

fn default_max_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    100
}

/// Longest single backoff sleep, whatever the server claims.
const MAX_BACKOFF_SLEEP_MS: u64 = 30_000;

impl Endpoint {
    pub fn new(url: impl Into<String>) -> Self {
        Endpoint {
            url: url.into(),
            auth_env: None,
            max_retries: default_max_retries(),
            backoff_base_ms: default_backoff_ms(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RemoteError {
    #[error("endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("rate limited after {attempts} attempts; retry after {retry_after_ms} ms")]
    RateLimited { retry_after_ms: u64, attempts: u32 },
}

/// POST `body` as JSON and decode the JSON response.
pub fn post_json<B: Serialize, R: DeserializeOwned>(
    endpoint: &Endpoint,
    body: &B,
) -> Result<R, RemoteError> {
    let token = match &endpoint.auth_env {
        Some(var) => Some(std::env::var(var).map_err(|_| {
            RemoteError::Unreachable(format!("credential env var {var} is not set"))
        })?),
        None => None,
    };
    let payload = serde_json::to_value(body)
        .map_err(|e| RemoteError::MalformedResponse(format!("request encode: {e}")))?;

    let mut attempt = 0u32;
    loop {
        let mut req = ureq::post(&endpoint.url);
        if let Some(token) = &token {
            req = req.set("Authorization", &format!("Bearer {token}"));
        }
        match req.send_json(payload.clone()) {
            Ok(resp) => {
                return resp
                    .into_json::<R>()
                    .map_err(|e| RemoteError::MalformedResponse(e.to_string()));
            }
            Err(ureq::Error::Status(429, resp)) => {
                let retry_after_ms = resp
                    .header("Retry-After")
                    .and_then(|v| v.trim().parse::<u64>().ok())
                    .and_then(|secs| secs.checked_mul(1000))
                    .unwrap_or_else(|| {
                        endpoint
                            .backoff_base_ms
                            .saturating_mul(1u64 << attempt.min(20))
                    });
                if attempt >= endpoint.max_retries {
                    return Err(RemoteError::RateLimited {
                        retry_after_ms,
                        attempts: attempt + 1,
                    });
                }
                // the reported retry-after can be anything; never sleep
                // longer than the cap
                std::thread::sleep(std::time::Duration::from_millis(
                    retry_after_ms.min(MAX_BACKOFF_SLEEP_MS),
                ));
                attempt += 1;
            }
            Err(ureq::Error::Status(code, resp)) => {
                let body = resp.into_string().unwrap_or_default();
                return Err(RemoteError::Unreachable(format!(
                    "HTTP {code}: {}",
                    body.chars().take(200).collect::<String>()
                )));
            }
            Err(ureq::Error::Transport(t)) => {
                return Err(RemoteError::Unreachable(t.to_string()));
            }
        }
    }
}
