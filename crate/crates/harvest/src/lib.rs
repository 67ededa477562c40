//! HTTP harvesting of OER metadata from a repository search API
//! (SkillsCommons-style), mapped onto the canonical record schema.
//!
//! The HTTP layer is injected through the [`Transport`] trait so everything
//! is testable offline: [`TranscriptTransport`] replays canned responses,
//! while [`UreqTransport`] talks to a live endpoint and is only constructed
//! behind an explicit opt-in. Harvesting never panics on network trouble;
//! it retries transient failures with exponential backoff and, when retries
//! run out, returns whatever it collected plus an error summary.
//!
//! The shape of the remote API is not fixed: [`ApiMapping`] describes the
//! query parameters, where the item array lives in the response, and the
//! dot-path of each canonical field inside one item. The built-in default
//! mapping is a best-effort guess and should be adjusted per repository.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use oerq_core::ingest::{FieldWarning, IngestReport, RawRecord, Rejection};

pub mod transport;

pub use transport::{Transport, TransportError, TransportResponse, TranscriptTransport, UreqTransport};

/// Harvest parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarvestConfig {
    pub base_url: String,
    pub query: String,
    pub page_size: usize,
    pub max_records: usize,
    pub retry_limit: u32,
    #[serde(default = "default_timeout_secs")]
    pub request_timeout_secs: u64,
    /// First backoff delay in milliseconds; doubles per retry. Tests set
    /// this to zero.
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
}

fn default_timeout_secs() -> u64 {
    30
}

fn default_backoff_ms() -> u64 {
    500
}

impl HarvestConfig {
    pub fn new(base_url: impl Into<String>, query: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            query: query.into(),
            page_size: 50,
            max_records: 10_000,
            retry_limit: 3,
            request_timeout_secs: default_timeout_secs(),
            backoff_base_ms: default_backoff_ms(),
        }
    }

    pub fn request_timeout(&self) -> Duration {
        Duration::from_secs(self.request_timeout_secs)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.page_size == 0 {
            return Err("page_size must be >= 1".into());
        }
        if self.base_url.trim().is_empty() {
            return Err("base_url must not be empty".into());
        }
        Ok(())
    }
}

/// Maps the remote API onto the canonical schema: request parameter names,
/// the path of the item array in a response, and per-field dot-paths within
/// one item.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApiMapping {
    pub query_param: String,
    pub offset_param: String,
    pub limit_param: String,
    /// Dot-path to the array of items in a response; empty means the
    /// response itself is the array.
    pub items_path: String,
    /// Canonical field name to dot-path within one item. Fields not listed
    /// fall back to their own name.
    #[serde(default)]
    pub fields: BTreeMap<String, String>,
}

impl Default for ApiMapping {
    // Unverified best-effort defaults; override per repository.
    fn default() -> Self {
        Self {
            query_param: "q".into(),
            offset_param: "offset".into(),
            limit_param: "limit".into(),
            items_path: "items".into(),
            fields: BTreeMap::new(),
        }
    }
}

impl ApiMapping {
    fn path_for<'a>(&'a self, field: &'a str) -> &'a str {
        self.fields.get(field).map(String::as_str).unwrap_or(field)
    }
}

/// Result of one harvest run. `failure` is set when the run ended early;
/// the report still holds everything collected up to that point.
#[derive(Debug)]
pub struct HarvestOutcome {
    pub report: IngestReport,
    pub pages_fetched: usize,
    pub retries: u32,
    pub failure: Option<String>,
}

impl HarvestOutcome {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }
}

/// Pages through the search results for `config.query`, mapping each item
/// to a record, until `max_records` or exhaustion.
pub fn harvest(
    config: &HarvestConfig,
    mapping: &ApiMapping,
    transport: &mut dyn Transport,
) -> HarvestOutcome {
    let mut report = IngestReport {
        records: Vec::new(),
        rejected: Vec::new(),
        warnings: Vec::new(),
        source: config.base_url.clone(),
    };
    let mut outcome_retries = 0u32;
    let mut pages_fetched = 0usize;

    if let Err(reason) = config.validate() {
        return HarvestOutcome {
            report,
            pages_fetched,
            retries: outcome_retries,
            failure: Some(reason),
        };
    }

    let mut offset = 0usize;
    let mut failure = None;
    while report.records.len() < config.max_records {
        let url = page_url(config, mapping, offset);
        let body = match fetch_with_retry(transport, &url, config, &mut outcome_retries) {
            Ok(body) => body,
            Err(reason) => {
                failure = Some(format!("{url}: {reason}"));
                break;
            }
        };
        let items = match parse_items(&body, &mapping.items_path) {
            Ok(items) => items,
            Err(reason) => {
                failure = Some(format!("{url}: {reason}"));
                break;
            }
        };
        if items.is_empty() {
            break;
        }
        pages_fetched += 1;
        let page_len = items.len();
        for (position, item) in items.into_iter().enumerate() {
            if report.records.len() >= config.max_records {
                break;
            }
            let index = offset + position + 1;
            map_item(item, mapping, index, &mut report);
        }
        if page_len < config.page_size {
            break;
        }
        offset += page_len;
    }

    HarvestOutcome {
        report,
        pages_fetched,
        retries: outcome_retries,
        failure,
    }
}

fn page_url(config: &HarvestConfig, mapping: &ApiMapping, offset: usize) -> String {
    let mut url = String::with_capacity(config.base_url.len() + 64);
    url.push_str(&config.base_url);
    url.push(if config.base_url.contains('?') { '&' } else { '?' });
    let _ = write!(
        url,
        "{}={}&{}={}&{}={}",
        mapping.query_param,
        percent_encode(&config.query),
        mapping.limit_param,
        config.page_size,
        mapping.offset_param,
        offset
    );
    url
}

/// Percent-encodes everything outside the URL-safe unreserved set.
fn percent_encode(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for byte in value.bytes() {
        match byte {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'.' | b'_' | b'~' => {
                out.push(byte as char)
            }
            _ => {
                let _ = write!(out, "%{byte:02X}");
            }
        }
    }
    out
}

fn transient(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

fn fetch_with_retry(
    transport: &mut dyn Transport,
    url: &str,
    config: &HarvestConfig,
    retries: &mut u32,
) -> Result<String, String> {
    let mut attempt = 0u32;
    loop {
        let reason = match transport.get(url) {
            Ok(response) if (200..300).contains(&response.status) => return Ok(response.body),
            Ok(response) if transient(response.status) => {
                format!("http status {}", response.status)
            }
            Ok(response) => {
                // Client errors are permanent; retrying cannot help.
                return Err(format!("http status {}", response.status));
            }
            Err(err) => err.to_string(),
        };
        if attempt >= config.retry_limit {
            return Err(format!(
                "{reason} (after {attempt} retr{})",
                if attempt == 1 { "y" } else { "ies" }
            ));
        }
        let delay = config.backoff_base_ms.saturating_mul(1u64 << attempt.min(16));
        if delay > 0 {
            std::thread::sleep(Duration::from_millis(delay));
        }
        attempt += 1;
        *retries += 1;
    }
}

fn parse_items(body: &str, items_path: &str) -> Result<Vec<Value>, String> {
    let root: Value =
        serde_json::from_str(body).map_err(|e| format!("response is not JSON: {e}"))?;
    let node = lookup(&root, items_path)
        .ok_or_else(|| format!("no `{items_path}` array in response"))?;
    match node {
        Value::Array(items) => Ok(items.clone()),
        _ => Err(format!("`{items_path}` is not an array")),
    }
}

fn lookup<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    if path.is_empty() {
        return Some(value);
    }
    let mut node = value;
    for key in path.split('.') {
        node = node.get(key)?;
    }
    Some(node)
}

fn text_at(item: &Value, path: &str) -> String {
    match lookup(item, path) {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::Bool(b)) => b.to_string(),
        _ => String::new(),
    }
}

fn list_at(item: &Value, path: &str) -> Vec<String> {
    match lookup(item, path) {
        Some(Value::Array(values)) => values
            .iter()
            .map(|v| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect(),
        Some(Value::String(s)) if !s.trim().is_empty() => vec![s.clone()],
        _ => Vec::new(),
    }
}

fn opt_text_at(item: &Value, path: &str) -> Option<String> {
    let text = text_at(item, path);
    (!text.trim().is_empty()).then_some(text)
}

/// Maps one API item to a record through the shared ingestion path, so a
/// harvested record passes exactly the validation a parsed one does.
fn map_item(item: Value, mapping: &ApiMapping, index: usize, report: &mut IngestReport) {
    if !item.is_object() {
        report.rejected.push(Rejection {
            index,
            reason: format!("item is not an object: {item}"),
        });
        return;
    }
    let path = |field: &str| mapping.path_for(field).to_string();
    let raw = RawRecord {
        url: text_at(&item, &path("url")),
        title: text_at(&item, &path("title")),
        description: text_at(&item, &path("description")),
        material_type: text_at(&item, &path("material_type")),
        date_available: opt_text_at(&item, &path("date_available")),
        date_issued: opt_text_at(&item, &path("date_issued")),
        subjects: list_at(&item, &path("subjects")),
        level: opt_text_at(&item, &path("level")),
        languages: list_at(&item, &path("languages")),
        time_required: opt_text_at(&item, &path("time_required")),
        accessibilities: list_at(&item, &path("accessibilities")),
        quality_control: opt_text_at(&item, &path("quality_control")),
    };
    if raw.url.trim().is_empty() && raw.title.trim().is_empty() {
        report.rejected.push(Rejection {
            index,
            reason: format!("item has neither url nor title: {item}"),
        });
        return;
    }
    let mut warnings: Vec<FieldWarning> = Vec::new();
    let record = raw.into_record(index, &mut warnings);
    report.warnings.append(&mut warnings);
    report.records.push(record);
}
