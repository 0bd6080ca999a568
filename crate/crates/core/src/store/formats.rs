//! Export and import file formats.
//!
//! All files are UTF-8 with `\n` line endings and integer timestamps in
//! milliseconds since the Unix epoch.
//!
//! | file         | layout                                                   |
//! |--------------|----------------------------------------------------------|
//! | press CSV    | `device_id,seq,boot_id,t_utc_ms,quality`                 |
//! | press JSONL  | one [`RawPress`] object per line                         |
//! | observations | `t_utc_ms,local_date,local_time,press_count,irregular`   |
//! | annotations  | one [`Annotation`] object per line                       |

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Annotation, DeviceId, Observation, Quality, RawPress};
use crate::time::{format_time_of_day, DatasetConfig};

pub const PRESS_CSV_HEADER: &str = "device_id,seq,boot_id,t_utc_ms,quality";
pub const OBSERVATION_CSV_HEADER: &str = "t_utc_ms,local_date,local_time,press_count,irregular";

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("expected header {expected:?}, found {found:?}")]
    Header {
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: {source}")]
    Csv {
        line: u64,
        #[source]
        source: csv::Error,
    },
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct PressRow {
    device_id: String,
    seq: u32,
    boot_id: u64,
    t_utc_ms: i64,
    quality: Quality,
}

/// One row of an observation file. Source seqs are not part of the format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationRow {
    pub t_utc_ms: i64,
    pub local_date: String,
    pub local_time: String,
    pub press_count: u32,
    pub irregular: bool,
}

impl ObservationRow {
    pub fn new(obs: &Observation, config: &DatasetConfig) -> Self {
        let (date, ms_of_day) = config.local_datetime(obs.t_utc_ms);
        Self {
            t_utc_ms: obs.t_utc_ms,
            local_date: date.to_string(),
            local_time: format_time_of_day(ms_of_day),
            press_count: obs.press_count,
            irregular: obs.irregular,
        }
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(mut header: String, writer: csv::Writer<Vec<u8>>) -> String {
    let body = writer.into_inner().expect("in-memory writer does not fail");
    header.push('\n');
    header.push_str(std::str::from_utf8(&body).expect("csv of utf-8 fields is utf-8"));
    header
}

fn csv_rows<T: for<'de> Deserialize<'de>>(
    text: &str,
    expected: &'static str,
) -> Result<Vec<T>, FormatError> {
    let first = text.lines().next().unwrap_or_default();
    if first.trim_end_matches('\r') != expected {
        return Err(FormatError::Header {
            expected,
            found: first.to_owned(),
        });
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|row| {
            row.map_err(|source| FormatError::Csv {
                line: source.position().map_or(0, |p| p.line()),
                source,
            })
        })
        .collect()
}

pub fn write_presses_csv<'a>(presses: impl IntoIterator<Item = &'a RawPress>) -> String {
    let mut w = csv_writer();
    for p in presses {
        w.serialize(PressRow {
            device_id: p.device_id.0.clone(),
            seq: p.seq,
            boot_id: p.boot_id,
            t_utc_ms: p.t_utc_ms,
            quality: p.quality,
        })
        .expect("press rows always serialize");
    }
    finish(PRESS_CSV_HEADER.to_owned(), w)
}

/// Reads a press CSV. The format carries no uptime, so imported presses
/// have `uptime_ms = 0`.
pub fn read_presses_csv(text: &str) -> Result<Vec<RawPress>, FormatError> {
    let rows: Vec<PressRow> = csv_rows(text, PRESS_CSV_HEADER)?;
    Ok(rows
        .into_iter()
        .map(|r| RawPress {
            device_id: DeviceId(r.device_id),
            boot_id: r.boot_id,
            seq: r.seq,
            uptime_ms: 0,
            t_utc_ms: r.t_utc_ms,
            quality: r.quality,
        })
        .collect())
}

pub fn write_jsonl<'a, T: Serialize + 'a>(records: impl IntoIterator<Item = &'a T>) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records always serialize"));
        out.push('\n');
    }
    out
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, FormatError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| FormatError::Json {
                line: i + 1,
                source,
            })
        })
        .collect()
}

pub fn write_presses_jsonl<'a>(presses: impl IntoIterator<Item = &'a RawPress>) -> String {
    write_jsonl(presses)
}

pub fn read_presses_jsonl(text: &str) -> Result<Vec<RawPress>, FormatError> {
    read_jsonl(text)
}

pub fn write_annotations_jsonl<'a>(
    annotations: impl IntoIterator<Item = &'a Annotation>,
) -> String {
    write_jsonl(annotations)
}

pub fn read_annotations_jsonl(text: &str) -> Result<Vec<Annotation>, FormatError> {
    read_jsonl(text)
}

pub fn write_observations_csv<'a>(
    observations: impl IntoIterator<Item = &'a Observation>,
    config: &DatasetConfig,
) -> String {
    let mut w = csv_writer();
    for obs in observations {
        w.serialize(ObservationRow::new(obs, config))
            .expect("observation rows always serialize");
    }
    finish(OBSERVATION_CSV_HEADER.to_owned(), w)
}

pub fn read_observations_csv(text: &str) -> Result<Vec<ObservationRow>, FormatError> {
    csv_rows(text, OBSERVATION_CSV_HEADER)
}
