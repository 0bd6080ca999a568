//! Press-pattern decoding.
//!
//! The observation protocol is "press twice". Presses are grouped into
//! bursts: maximal runs where every gap between neighbours is at most
//! `burst_gap_ms`. A burst of two or more presses is one observation stamped
//! with its first press; a lone press is a false positive.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{DeviceId, Observation, RawPress};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("presses are not sorted by (t_utc_ms, seq) at index {index}")]
    UnsortedInput { index: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Decoded {
    pub observations: Vec<Observation>,
    pub false_positives: Vec<RawPress>,
}

/// Splits a sorted press stream into bursts.
pub fn bursts(presses: &[RawPress], burst_gap_ms: u64) -> Result<Vec<&[RawPress]>, DecodeError> {
    if let Some(i) = presses
        .windows(2)
        .position(|w| (w[1].t_utc_ms, w[1].seq) < (w[0].t_utc_ms, w[0].seq))
    {
        return Err(DecodeError::UnsortedInput { index: i + 1 });
    }
    let gap = i128::from(burst_gap_ms);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=presses.len() {
        let split = i == presses.len()
            || i128::from(presses[i].t_utc_ms) - i128::from(presses[i - 1].t_utc_ms) > gap;
        if split {
            out.push(&presses[start..i]);
            start = i;
        }
    }
    Ok(out)
}

pub fn decode(presses: &[RawPress], burst_gap_ms: u64) -> Result<Decoded, DecodeError> {
    let mut decoded = Decoded::default();
    for burst in bursts(presses, burst_gap_ms)? {
        match Observation::from_burst(burst) {
            Some(obs) => decoded.observations.push(obs),
            None => decoded.false_positives.extend_from_slice(burst),
        }
    }
    Ok(decoded)
}

/// Decodes each device's presses on their own and merges the results by
/// time. Input order does not matter.
pub fn decode_per_device<'a>(
    presses: impl IntoIterator<Item = &'a RawPress>,
    burst_gap_ms: u64,
) -> Decoded {
    let mut by_device: BTreeMap<&DeviceId, Vec<RawPress>> = BTreeMap::new();
    for p in presses {
        by_device.entry(&p.device_id).or_default().push(p.clone());
    }
    let mut merged = Decoded::default();
    for mut stream in by_device.into_values() {
        sort_for_decode(&mut stream);
        let decoded = decode(&stream, burst_gap_ms).expect("sorted above");
        merged.observations.extend(decoded.observations);
        merged.false_positives.extend(decoded.false_positives);
    }
    merged
        .observations
        .sort_by_key(|o| (o.t_utc_ms, o.source_seqs.first().copied()));
    sort_for_decode(&mut merged.false_positives);
    merged
}

/// Sorts presses into the order [`decode`] expects.
pub fn sort_for_decode(presses: &mut [RawPress]) {
    presses
        .sort_by(|a, b| (a.t_utc_ms, a.seq, &a.device_id).cmp(&(b.t_utc_ms, b.seq, &b.device_id)));
}
