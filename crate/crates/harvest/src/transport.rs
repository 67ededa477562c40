//! The HTTP transport abstraction and its implementations.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// A raw HTTP response: status code plus body text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, thiserror::Error)]
pub enum TransportError {
    #[error("network error: {0}")]
    Network(String),
    #[error("transcript exhausted after {0} request(s)")]
    TranscriptExhausted(usize),
}

/// Something that can perform an HTTP GET. Injected into
/// [`crate::harvest`] so tests and offline runs never touch the network.
pub trait Transport {
    fn get(&mut self, url: &str) -> Result<TransportResponse, TransportError>;
}

/// Live transport over [`ureq`]. Non-2xx statuses are returned as responses,
/// not errors, so the harvester's retry policy sees them.
pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build();
        Self {
            agent: config.into(),
        }
    }
}

impl Transport for UreqTransport {
    fn get(&mut self, url: &str) -> Result<TransportResponse, TransportError> {
        let mut response = self
            .agent
            .get(url)
            .call()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        Ok(TransportResponse { status, body })
    }
}

/// One entry of a recorded transcript. `body` holds the response text;
/// `json` may be used instead for readability in hand-written fixtures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptEntry {
    #[serde(default = "default_status")]
    pub status: u16,
    #[serde(default)]
    pub body: Option<String>,
    #[serde(default)]
    pub json: Option<serde_json::Value>,
}

fn default_status() -> u16 {
    200
}

/// Replays a recorded list of responses in order, regardless of URL.
/// Requests beyond the end of the transcript fail.
pub struct TranscriptTransport {
    responses: Vec<TransportResponse>,
    cursor: usize,
}

impl TranscriptTransport {
    pub fn new(responses: Vec<TransportResponse>) -> Self {
        Self {
            responses,
            cursor: 0,
        }
    }

    /// Loads a transcript from a JSON file: an array of
    /// `{"status": 200, "body": "..."}` or `{"status": 200, "json": {...}}`
    /// entries.
    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        let entries: Vec<TranscriptEntry> = serde_json::from_reader(reader)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        let responses = entries
            .into_iter()
            .map(|entry| {
                let body = match (entry.body, entry.json) {
                    (Some(body), _) => body,
                    (None, Some(json)) => json.to_string(),
                    (None, None) => String::new(),
                };
                TransportResponse {
                    status: entry.status,
                    body,
                }
            })
            .collect();
        Ok(Self::new(responses))
    }
}

impl Transport for TranscriptTransport {
    fn get(&mut self, _url: &str) -> Result<TransportResponse, TransportError> {
        let response = self
            .responses
            .get(self.cursor)
            .cloned()
            .ok_or(TransportError::TranscriptExhausted(self.cursor))?;
        self.cursor += 1;
        Ok(response)
    }
}

#[cfg(any(test, feature = "test-support"))]
pub mod test_support {
    //! An in-memory mock that records requested URLs.

    use super::*;

    pub struct MockTransport {
        script: Vec<(u16, String)>,
        requests: Vec<String>,
    }

    impl MockTransport {
        pub fn scripted(script: Vec<(u16, String)>) -> Self {
            Self {
                script,
                requests: Vec::new(),
            }
        }

        pub fn ok_pages(pages: Vec<String>) -> Self {
            Self::scripted(pages.into_iter().map(|p| (200, p)).collect())
        }

        pub fn requests(&self) -> &[String] {
            &self.requests
        }
    }

    impl Transport for MockTransport {
        fn get(&mut self, url: &str) -> Result<TransportResponse, TransportError> {
            let position = self.requests.len();
            self.requests.push(url.to_string());
            let (status, body) = self
                .script
                .get(position)
                .cloned()
                .ok_or(TransportError::TranscriptExhausted(position))?;
            Ok(TransportResponse { status, body })
        }
    }
}
