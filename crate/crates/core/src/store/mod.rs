//! Append-only event store.
//!
//! Records live in a single JSON-lines log file and are indexed in memory on
//! open. Nothing is ever rewritten: presses are unique on
//! `(device_id, seq)` and a repeated append returns the id of the row that
//! is already there.

pub mod formats;

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Read, Seek, SeekFrom, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Annotation, AnnotationError, DeviceId, RawPress};
use crate::sync::OverflowGap;

pub use formats::FormatError;

/// Position of a record in the log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StoredId(pub u64);

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("corrupt log {path}: line {line}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<AnnotationError> for StoreError {
    fn from(e: AnnotationError) -> Self {
        StoreError::InvalidRecord(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum LogRecord {
    Press(RawPress),
    Annotation(Annotation),
    OverflowGap(OverflowGap),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    Press,
    Annotation,
    OverflowGap,
}

/// A query result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Record<'a> {
    Press(&'a RawPress),
    Annotation(StoredId, &'a Annotation),
    OverflowGap(&'a OverflowGap),
}

#[derive(Debug)]
pub struct EventStore {
    path: Option<PathBuf>,
    writer: Option<BufWriter<File>>,
    next_id: u64,
    presses: Vec<(StoredId, RawPress)>,
    press_index: HashMap<(DeviceId, u32), StoredId>,
    annotations: Vec<(StoredId, Annotation)>,
    gaps: Vec<(StoredId, OverflowGap)>,
}

impl EventStore {
    /// A store with no backing file.
    pub fn in_memory() -> Self {
        Self {
            path: None,
            writer: None,
            next_id: 0,
            presses: Vec::new(),
            press_index: HashMap::new(),
            annotations: Vec::new(),
            gaps: Vec::new(),
        }
    }

    /// Opens or creates the log at `path` and replays it.
    ///
    /// A final line without a trailing newline is a torn write from a crash
    /// and is cut off; any other unparsable line is an error.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;

        let mut store = Self::in_memory();
        let complete = match text.rfind('\n') {
            Some(i) => i + 1,
            None => 0,
        };
        for (i, line) in text[..complete].lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: LogRecord =
                serde_json::from_str(line).map_err(|source| StoreError::Corrupt {
                    path: path.clone(),
                    line: i + 1,
                    source,
                })?;
            store.index(record);
        }
        if complete < text.len() {
            file.set_len(complete as u64)?;
            file.seek(SeekFrom::End(0))?;
        }
        store.path = Some(path);
        store.writer = Some(BufWriter::new(file));
        Ok(store)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    fn index(&mut self, record: LogRecord) -> StoredId {
        let id = StoredId(self.next_id);
        self.next_id += 1;
        match record {
            LogRecord::Press(p) => {
                self.press_index.insert((p.device_id.clone(), p.seq), id);
                self.presses.push((id, p));
            }
            LogRecord::Annotation(a) => self.annotations.push((id, a)),
            LogRecord::OverflowGap(g) => self.gaps.push((id, g)),
        }
        id
    }

    fn persist(&mut self, records: &[LogRecord]) -> Result<(), StoreError> {
        let Some(writer) = self.writer.as_mut() else {
            return Ok(());
        };
        for r in records {
            serde_json::to_writer(&mut *writer, r).map_err(io::Error::from)?;
            writer.write_all(b"\n")?;
        }
        writer.flush()?;
        writer.get_ref().sync_data()?;
        Ok(())
    }

    fn commit(&mut self, records: Vec<LogRecord>) -> Result<Vec<StoredId>, StoreError> {
        self.persist(&records)?;
        Ok(records.into_iter().map(|r| self.index(r)).collect())
    }

    /// Appends presses, returning one id per input. Presses already stored
    /// (or repeated within `presses`) resolve to the existing id.
    pub fn append_presses(&mut self, presses: &[RawPress]) -> Result<Vec<StoredId>, StoreError> {
        if let Some(p) = presses.iter().find(|p| p.device_id.0.is_empty()) {
            return Err(StoreError::InvalidRecord(format!(
                "press seq {} has an empty device id",
                p.seq
            )));
        }
        let mut fresh: Vec<LogRecord> = Vec::new();
        let mut pending: HashMap<(&DeviceId, u32), u64> = HashMap::new();
        let mut resolved = Vec::with_capacity(presses.len());
        for p in presses {
            if let Some(&id) = self.press_index.get(&(p.device_id.clone(), p.seq)) {
                resolved.push(Ok(id));
            } else if let Some(&slot) = pending.get(&(&p.device_id, p.seq)) {
                resolved.push(Err(slot));
            } else {
                let slot = fresh.len() as u64;
                pending.insert((&p.device_id, p.seq), slot);
                fresh.push(LogRecord::Press(p.clone()));
                resolved.push(Err(slot));
            }
        }
        let new_ids = self.commit(fresh)?;
        Ok(resolved
            .into_iter()
            .map(|r| r.unwrap_or_else(|slot| new_ids[slot as usize]))
            .collect())
    }

    pub fn append_annotation(&mut self, annotation: Annotation) -> Result<StoredId, StoreError> {
        annotation.validate()?;
        Ok(self.commit(vec![LogRecord::Annotation(annotation)])?[0])
    }

    /// Records eviction gaps; a gap already on file is not repeated.
    pub fn append_gaps(&mut self, gaps: &[OverflowGap]) -> Result<(), StoreError> {
        let fresh: Vec<LogRecord> = gaps
            .iter()
            .filter(|g| {
                !self.gaps.iter().any(|(_, have)| {
                    (&have.device_id, have.from_seq, have.through_seq)
                        == (&g.device_id, g.from_seq, g.through_seq)
                })
            })
            .cloned()
            .map(LogRecord::OverflowGap)
            .collect();
        self.commit(fresh)?;
        Ok(())
    }

    pub fn press_count(&self) -> usize {
        self.presses.len()
    }

    /// All presses in append order.
    pub fn presses(&self) -> impl Iterator<Item = &RawPress> {
        self.presses.iter().map(|(_, p)| p)
    }

    pub fn annotations(&self) -> impl Iterator<Item = (StoredId, &Annotation)> {
        self.annotations.iter().map(|(id, a)| (*id, a))
    }

    pub fn overflow_gaps(&self) -> impl Iterator<Item = &OverflowGap> {
        self.gaps.iter().map(|(_, g)| g)
    }

    pub fn devices(&self) -> Vec<DeviceId> {
        let mut ids: Vec<DeviceId> = self.press_index.keys().map(|(d, _)| d.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn has_device(&self, device_id: &DeviceId) -> bool {
        self.presses.iter().any(|(_, p)| &p.device_id == device_id)
            || self.gaps.iter().any(|(_, g)| &g.device_id == device_id)
    }

    /// Highest seq covered by stored presses or recorded gaps.
    pub fn acked_through(&self, device_id: &DeviceId) -> Option<u32> {
        let pressed = self
            .presses
            .iter()
            .filter(|(_, p)| &p.device_id == device_id)
            .map(|(_, p)| p.seq);
        let gapped = self
            .gaps
            .iter()
            .filter(|(_, g)| &g.device_id == device_id)
            .map(|(_, g)| g.through_seq);
        pressed.chain(gapped).max()
    }

    /// Presses with `t_utc_ms` in the half-open `range`, by time then seq.
    pub fn query_presses(&self, range: Range<i64>) -> Vec<&RawPress> {
        let mut out: Vec<&RawPress> = self
            .presses()
            .filter(|p| range.contains(&p.t_utc_ms))
            .collect();
        out.sort_by(|a, b| {
            (a.t_utc_ms, a.seq, &a.device_id).cmp(&(b.t_utc_ms, b.seq, &b.device_id))
        });
        out
    }

    /// Annotations intersecting `range`, by start time. Zero-length
    /// annotations match when their instant lies in the range.
    pub fn query_annotations(&self, range: Range<i64>) -> Vec<(StoredId, &Annotation)> {
        let mut out: Vec<(StoredId, &Annotation)> = self
            .annotations()
            .filter(|(_, a)| {
                if a.start_utc_ms == a.end_utc_ms {
                    range.contains(&a.start_utc_ms)
                } else {
                    a.overlaps(&range)
                }
            })
            .collect();
        out.sort_by_key(|(id, a)| (a.start_utc_ms, a.end_utc_ms, *id));
        out
    }

    pub fn query(&self, range: Range<i64>, kind: RecordKind) -> Vec<Record<'_>> {
        match kind {
            RecordKind::Press => self
                .query_presses(range)
                .into_iter()
                .map(Record::Press)
                .collect(),
            RecordKind::Annotation => self
                .query_annotations(range)
                .into_iter()
                .map(|(id, a)| Record::Annotation(id, a))
                .collect(),
            RecordKind::OverflowGap => {
                let mut gaps: Vec<&OverflowGap> = self
                    .overflow_gaps()
                    .filter(|g| range.contains(&g.detected_at_ms))
                    .collect();
                gaps.sort_by_key(|g| (g.detected_at_ms, g.device_id.clone(), g.from_seq));
                gaps.into_iter().map(Record::OverflowGap).collect()
            }
        }
    }

    /// Presses for export: devices in id order, each device's presses in seq
    /// order, optionally restricted to a time range.
    pub fn export_order(&self, range: Option<Range<i64>>) -> Vec<&RawPress> {
        let mut by_device: BTreeMap<(&DeviceId, u32), &RawPress> = BTreeMap::new();
        for p in self.presses() {
            if range.as_ref().is_none_or(|r| r.contains(&p.t_utc_ms)) {
                by_device.insert((&p.device_id, p.seq), p);
            }
        }
        by_device.into_values().collect()
    }

    pub fn export_presses_csv(&self, range: Option<Range<i64>>) -> String {
        formats::write_presses_csv(self.export_order(range))
    }

    pub fn export_presses_jsonl(&self, range: Option<Range<i64>>) -> String {
        formats::write_presses_jsonl(self.export_order(range))
    }

    /// Stored annotations by start time, as JSON lines.
    pub fn export_annotations_jsonl(&self) -> String {
        let all = self.query_annotations(i64::MIN..i64::MAX);
        formats::write_annotations_jsonl(all.into_iter().map(|(_, a)| a))
    }
}
