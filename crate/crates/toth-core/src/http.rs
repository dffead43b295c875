//! Minimal shared plumbing for the two HTTP provider clients.

use std::fmt;
use std::time::Duration;

const RETRY_DELAY: Duration = Duration::from_millis(100);

#[derive(Debug)]
pub(crate) enum HttpError {
    Unavailable(String),
    Malformed(String),
}

impl fmt::Display for HttpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HttpError::Unavailable(msg) => write!(f, "{msg}"),
            HttpError::Malformed(msg) => write!(f, "{msg}"),
        }
    }
}

pub(crate) fn build_client(timeout: Duration) -> Result<reqwest::blocking::Client, HttpError> {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| HttpError::Unavailable(e.to_string()))
}

/// POSTs a JSON body and decodes a JSON response, retrying exactly once on
/// transient failures (connect errors, timeouts, 5xx).
pub(crate) fn post_json(
    client: &reqwest::blocking::Client,
    url: &str,
    body: &serde_json::Value,
) -> Result<serde_json::Value, HttpError> {
    let mut last_error = HttpError::Unavailable("request never attempted".to_string());
    for attempt in 0..2 {
        if attempt > 0 {
            std::thread::sleep(RETRY_DELAY);
        }
        match client.post(url).json(body).send() {
            Ok(response) => {
                let status = response.status();
                if status.is_success() {
                    let text = response
                        .text()
                        .map_err(|e| HttpError::Unavailable(e.to_string()))?;
                    return serde_json::from_str(&text)
                        .map_err(|e| HttpError::Malformed(format!("invalid JSON body: {e}")));
                }
                let message = format!("{url} answered {status}");
                if status.is_server_error() {
                    last_error = HttpError::Unavailable(message);
                    continue;
                }
                return Err(HttpError::Unavailable(message));
            }
            Err(e) => {
                last_error = HttpError::Unavailable(format!("{url}: {e}"));
                continue;
            }
        }
    }
    Err(last_error)
}
