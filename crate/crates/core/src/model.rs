//! Shared domain records.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque identifier of a button device.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(pub String);

impl DeviceId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// How a press's wall-clock time was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    /// Mapped through a clock anchor of the press's own boot.
    Anchored,
    /// No anchor for the boot; the host receipt time of the batch was used.
    Receipt,
}

impl Quality {
    pub fn as_str(self) -> &'static str {
        match self {
            Quality::Anchored => "anchored",
            Quality::Receipt => "receipt",
        }
    }
}

/// One button interaction as stored by the host.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RawPress {
    pub device_id: DeviceId,
    pub boot_id: u64,
    pub seq: u32,
    pub uptime_ms: u64,
    pub t_utc_ms: i64,
    pub quality: Quality,
}

/// A decoded occurrence of the tracked phenomenon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    /// Wall time of the first press of the burst.
    pub t_utc_ms: i64,
    pub press_count: u32,
    pub irregular: bool,
    pub source_seqs: Vec<u32>,
}

impl Observation {
    /// Builds an observation from a burst; `None` for single presses.
    pub fn from_burst(burst: &[RawPress]) -> Option<Self> {
        let first = burst.first()?;
        if burst.len() < 2 {
            return None;
        }
        let press_count = burst.len() as u32;
        Some(Self {
            t_utc_ms: first.t_utc_ms,
            press_count,
            irregular: press_count > 2,
            source_seqs: burst.iter().map(|p| p.seq).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationKind {
    Session,
    PhoneConsultation,
    Gap,
    /// Derived from the calendar by analytics; never stored.
    Weekend,
    Note,
}

impl AnnotationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnnotationKind::Session => "session",
            AnnotationKind::PhoneConsultation => "phone_consultation",
            AnnotationKind::Gap => "gap",
            AnnotationKind::Weekend => "weekend",
            AnnotationKind::Note => "note",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub lat: f64,
    pub lon: f64,
}

/// Labeled time range `[start_utc_ms, end_utc_ms)` over the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub kind: AnnotationKind,
    pub start_utc_ms: i64,
    pub end_utc_ms: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<Location>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotationError {
    #[error("annotation starts at {start} after it ends at {end}")]
    StartAfterEnd { start: i64, end: i64 },
    #[error("weekend annotations are derived from the calendar and cannot be stored")]
    DerivedKind,
    #[error("location ({lat}, {lon}) is not a valid coordinate")]
    BadLocation { lat: f64, lon: f64 },
}

impl Annotation {
    pub fn new(kind: AnnotationKind, start_utc_ms: i64, end_utc_ms: i64) -> Self {
        Self {
            kind,
            start_utc_ms,
            end_utc_ms,
            label: None,
            location: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Checks the record is fit for storage.
    pub fn validate(&self) -> Result<(), AnnotationError> {
        if self.start_utc_ms > self.end_utc_ms {
            return Err(AnnotationError::StartAfterEnd {
                start: self.start_utc_ms,
                end: self.end_utc_ms,
            });
        }
        if self.kind == AnnotationKind::Weekend {
            return Err(AnnotationError::DerivedKind);
        }
        if let Some(Location { lat, lon }) = self.location {
            if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
                return Err(AnnotationError::BadLocation { lat, lon });
            }
        }
        Ok(())
    }

    pub fn span(&self) -> Range<i64> {
        self.start_utc_ms..self.end_utc_ms
    }

    /// Whether the annotation shares at least one instant with `window`.
    pub fn overlaps(&self, window: &Range<i64>) -> bool {
        self.start_utc_ms < window.end && window.start < self.end_utc_ms
    }
}

/// A consistency problem found in a press stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PressViolation {
    DuplicateSeq {
        device_id: DeviceId,
        seq: u32,
    },
    /// A higher seq carries a lower uptime within one boot.
    NonMonotonic {
        device_id: DeviceId,
        boot_id: u64,
        seq: u32,
        uptime_ms: u64,
        prev_seq: u32,
        prev_uptime_ms: u64,
    },
}

/// Reports every duplicate `(device_id, seq)` and every pair of seq-adjacent
/// presses in one boot whose uptimes run backwards.
pub fn validate_press_stream(presses: &[RawPress]) -> Vec<PressViolation> {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    let mut by_boot: BTreeMap<(&DeviceId, u64), Vec<&RawPress>> = BTreeMap::new();
    for p in presses {
        if !seen.insert((&p.device_id, p.seq)) {
            violations.push(PressViolation::DuplicateSeq {
                device_id: p.device_id.clone(),
                seq: p.seq,
            });
            continue;
        }
        by_boot
            .entry((&p.device_id, p.boot_id))
            .or_default()
            .push(p);
    }
    for ((device_id, boot_id), mut boot) in by_boot {
        boot.sort_by_key(|p| p.seq);
        for pair in boot.windows(2) {
            let (prev, cur) = (pair[0], pair[1]);
            if cur.uptime_ms < prev.uptime_ms {
                violations.push(PressViolation::NonMonotonic {
                    device_id: device_id.clone(),
                    boot_id,
                    seq: cur.seq,
                    uptime_ms: cur.uptime_ms,
                    prev_seq: prev.seq,
                    prev_uptime_ms: prev.uptime_ms,
                });
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn press(seq: u32, boot_id: u64, uptime_ms: u64) -> RawPress {
        RawPress {
            device_id: DeviceId::new("d"),
            boot_id,
            seq,
            uptime_ms,
            t_utc_ms: uptime_ms as i64,
            quality: Quality::Anchored,
        }
    }

    #[test]
    fn empty_stream_is_clean() {
        assert!(validate_press_stream(&[]).is_empty());
    }

    #[test]
    fn duplicate_seq_reported_once() {
        let v = validate_press_stream(&[press(3, 0, 10), press(3, 0, 10)]);
        assert_eq!(
            v,
            vec![PressViolation::DuplicateSeq {
                device_id: DeviceId::new("d"),
                seq: 3
            }]
        );
    }

    #[test]
    fn backwards_uptime_within_boot() {
        let v = validate_press_stream(&[press(5, 0, 10_000), press(6, 0, 9_000)]);
        assert_eq!(v.len(), 1);
        assert!(matches!(
            v[0],
            PressViolation::NonMonotonic {
                seq: 6,
                prev_seq: 5,
                ..
            }
        ));
    }

    #[test]
    fn uptime_reset_across_boots_is_fine() {
        assert!(validate_press_stream(&[press(5, 0, 10_000), press(6, 1, 20)]).is_empty());
    }

    #[test]
    fn observation_flags() {
        assert!(Observation::from_burst(&[press(0, 0, 0)]).is_none());
        let two = Observation::from_burst(&[press(0, 0, 0), press(1, 0, 500)]).unwrap();
        assert_eq!(
            (two.press_count, two.irregular, two.t_utc_ms),
            (2, false, 0)
        );
        let three =
            Observation::from_burst(&[press(0, 0, 0), press(1, 0, 1), press(2, 0, 2)]).unwrap();
        assert!(three.irregular);
        assert_eq!(three.source_seqs, vec![0, 1, 2]);
    }

    #[test]
    fn annotation_validation() {
        assert!(matches!(
            Annotation::new(AnnotationKind::Gap, 10, 5).validate(),
            Err(AnnotationError::StartAfterEnd { .. })
        ));
        assert_eq!(
            Annotation::new(AnnotationKind::Weekend, 0, 5).validate(),
            Err(AnnotationError::DerivedKind)
        );
        let mut a = Annotation::new(AnnotationKind::Note, 0, 0);
        a.location = Some(Location {
            lat: 95.0,
            lon: 0.0,
        });
        assert!(a.validate().is_err());
        a.location = Some(Location {
            lat: 55.7,
            lon: 12.5,
        });
        assert!(a.validate().is_ok());
    }

    #[test]
    fn wire_names_are_snake_case() {
        let json = serde_json::to_string(&Annotation::new(AnnotationKind::PhoneConsultation, 1, 2))
            .unwrap();
        assert_eq!(
            json,
            r#"{"kind":"phone_consultation","start_utc_ms":1,"end_utc_ms":2}"#
        );
        assert_eq!(
            serde_json::to_string(&Quality::Receipt).unwrap(),
            r#""receipt""#
        );
    }
}
