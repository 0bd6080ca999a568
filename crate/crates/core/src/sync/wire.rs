//! Line-delimited JSON encoding of the device/host messages.
//!
//! Each message is one JSON object on its own line with exactly the fields
//! of its struct. A sync upload is a `Hello` line optionally followed by a
//! `SyncBatch` line; the reply is a single `SyncAck` line.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::DeviceId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hello {
    pub device_id: DeviceId,
    pub boot_id: u64,
    pub uptime_now_ms: u64,
    pub buffered_count: u64,
    pub overflowed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchEvent {
    pub seq: u32,
    pub boot_id: u64,
    pub uptime_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncBatch {
    pub device_id: DeviceId,
    pub events: Vec<BatchEvent>,
}

/// Cumulative acknowledgement. `None` until the host has stored anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncAck {
    pub acked_through_seq: Option<u32>,
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("empty sync body")]
    Empty,
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("sync body has {0} lines; expected a hello and at most one batch")]
    TooManyLines(usize),
}

/// Serializes `msg` as one `\n`-terminated line.
pub fn encode_line<T: Serialize>(msg: &T) -> String {
    let mut line = serde_json::to_string(msg).expect("wire messages always serialize");
    line.push('\n');
    line
}

pub fn decode_line<T: DeserializeOwned>(line: &str) -> Result<T, WireError> {
    parse_at((0, line.trim_end_matches(['\r', '\n'])))
}

/// The body of one device upload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncUpload {
    pub hello: Hello,
    pub batch: Option<SyncBatch>,
}

impl SyncUpload {
    pub fn encode(&self) -> String {
        let mut body = encode_line(&self.hello);
        if let Some(batch) = &self.batch {
            body.push_str(&encode_line(batch));
        }
        body
    }

    pub fn decode(body: &str) -> Result<Self, WireError> {
        let lines: Vec<(usize, &str)> = body
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .collect();
        match lines.as_slice() {
            [] => Err(WireError::Empty),
            [hello] => Ok(Self {
                hello: parse_at(*hello)?,
                batch: None,
            }),
            [hello, batch] => Ok(Self {
                hello: parse_at(*hello)?,
                batch: Some(parse_at(*batch)?),
            }),
            more => Err(WireError::TooManyLines(more.len())),
        }
    }
}

fn parse_at<T: DeserializeOwned>((idx, text): (usize, &str)) -> Result<T, WireError> {
    serde_json::from_str(text).map_err(|source| WireError::Json {
        line: idx + 1,
        source,
    })
}
