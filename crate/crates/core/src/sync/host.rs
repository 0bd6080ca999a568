//! Host side of the sync protocol: clock anchoring and idempotent ingestion.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{DeviceId, Quality, RawPress};
use crate::sync::wire::{BatchEvent, Hello, SyncAck, SyncBatch, SyncUpload};

/// `(host wall time, device uptime)` pair captured when a hello arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockAnchor {
    pub boot_id: u64,
    pub host_wall_ms: i64,
    pub uptime_now_ms: u64,
}

/// Maps a device uptime to wall-clock time.
///
/// Only an anchor from the press's own boot is usable; otherwise the batch
/// receipt time stands in and the press is marked [`Quality::Receipt`].
pub fn map_to_wall(
    anchor: Option<&ClockAnchor>,
    boot_id: u64,
    uptime_ms: u64,
    receipt_wall_ms: i64,
) -> (i64, Quality) {
    match anchor {
        Some(a) if a.boot_id == boot_id => {
            let delta = a.uptime_now_ms as i64 - uptime_ms as i64;
            (a.host_wall_ms - delta, Quality::Anchored)
        }
        _ => (receipt_wall_ms, Quality::Receipt),
    }
}

/// Seqs the host will never receive because the device evicted them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverflowGap {
    pub device_id: DeviceId,
    pub from_seq: u32,
    pub through_seq: u32,
    pub detected_at_ms: i64,
}

impl OverflowGap {
    pub fn missing_count(&self) -> u64 {
        u64::from(self.through_seq - self.from_seq) + 1
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyncError {
    #[error("batch events are not in strictly increasing seq order at index {index}")]
    MalformedBatch { index: usize },
    #[error("message for device {got} sent to the session of device {expected}")]
    DeviceMismatch { expected: DeviceId, got: DeviceId },
}

/// What one batch added to the host store.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IngestOutcome {
    pub presses: Vec<RawPress>,
    pub gaps: Vec<OverflowGap>,
    pub ack: Option<u32>,
}

impl IngestOutcome {
    pub fn sync_ack(&self) -> SyncAck {
        SyncAck {
            acked_through_seq: self.ack,
        }
    }
}

/// Per-device host state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeviceCursor {
    acked_through: Option<u32>,
    anchors: BTreeMap<u64, ClockAnchor>,
}

impl DeviceCursor {
    /// Resumes from a store that already holds everything through `acked_through`.
    pub fn resume(acked_through: Option<u32>) -> Self {
        Self {
            acked_through,
            anchors: BTreeMap::new(),
        }
    }

    pub fn acked_through(&self) -> Option<u32> {
        self.acked_through
    }

    pub fn anchor(&self, boot_id: u64) -> Option<&ClockAnchor> {
        self.anchors.get(&boot_id)
    }

    /// Keeps only the newest anchor per boot.
    pub fn record_hello(&mut self, hello: &Hello, receipt_wall_ms: i64) {
        self.anchors.insert(
            hello.boot_id,
            ClockAnchor {
                boot_id: hello.boot_id,
                host_wall_ms: receipt_wall_ms,
                uptime_now_ms: hello.uptime_now_ms,
            },
        );
    }

    /// Computes what `batch` would add without changing the cursor.
    ///
    /// Events at or below the current ack are skipped. A jump past the next
    /// expected seq can only come from ring eviction on the device, since the
    /// device always sends its oldest unacked presses first, so the missing
    /// range is reported as an [`OverflowGap`] and the ack moves past it.
    pub fn plan_ingest(
        &self,
        batch: &SyncBatch,
        receipt_wall_ms: i64,
    ) -> Result<IngestOutcome, SyncError> {
        check_ordered(&batch.events)?;
        let mut outcome = IngestOutcome {
            ack: self.acked_through,
            ..IngestOutcome::default()
        };
        for event in &batch.events {
            let expected = outcome.ack.map_or(0, |a| a + 1);
            if event.seq < expected {
                continue;
            }
            if event.seq > expected {
                outcome.gaps.push(OverflowGap {
                    device_id: batch.device_id.clone(),
                    from_seq: expected,
                    through_seq: event.seq - 1,
                    detected_at_ms: receipt_wall_ms,
                });
            }
            let (t_utc_ms, quality) = map_to_wall(
                self.anchors.get(&event.boot_id),
                event.boot_id,
                event.uptime_ms,
                receipt_wall_ms,
            );
            outcome.presses.push(RawPress {
                device_id: batch.device_id.clone(),
                boot_id: event.boot_id,
                seq: event.seq,
                uptime_ms: event.uptime_ms,
                t_utc_ms,
                quality,
            });
            outcome.ack = Some(event.seq);
        }
        Ok(outcome)
    }

    /// Advances the ack once the outcome is durably stored.
    pub fn commit(&mut self, outcome: &IngestOutcome) {
        if outcome.ack > self.acked_through {
            self.acked_through = outcome.ack;
        }
    }

    pub fn ingest(
        &mut self,
        batch: &SyncBatch,
        receipt_wall_ms: i64,
    ) -> Result<IngestOutcome, SyncError> {
        let outcome = self.plan_ingest(batch, receipt_wall_ms)?;
        self.commit(&outcome);
        Ok(outcome)
    }
}

fn check_ordered(events: &[BatchEvent]) -> Result<(), SyncError> {
    match events.windows(2).position(|w| w[1].seq <= w[0].seq) {
        Some(i) => Err(SyncError::MalformedBatch { index: i + 1 }),
        None => Ok(()),
    }
}

/// Host bookkeeping for every device it has heard from.
#[derive(Debug, Clone, Default)]
pub struct SyncHost {
    devices: BTreeMap<DeviceId, DeviceCursor>,
}

impl SyncHost {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cursor(&self, device_id: &DeviceId) -> Option<&DeviceCursor> {
        self.devices.get(device_id)
    }

    pub fn cursor_mut(&mut self, device_id: &DeviceId) -> &mut DeviceCursor {
        self.devices.entry(device_id.clone()).or_default()
    }

    pub fn resume(&mut self, device_id: DeviceId, acked_through: Option<u32>) {
        self.devices
            .insert(device_id, DeviceCursor::resume(acked_through));
    }

    /// Validates an upload and computes its outcome, recording the hello's
    /// anchor. The ack only advances on [`SyncHost::commit`].
    pub fn plan_upload(
        &mut self,
        upload: &SyncUpload,
        receipt_wall_ms: i64,
    ) -> Result<IngestOutcome, SyncError> {
        let device_id = &upload.hello.device_id;
        if let Some(batch) = &upload.batch {
            if &batch.device_id != device_id {
                return Err(SyncError::DeviceMismatch {
                    expected: device_id.clone(),
                    got: batch.device_id.clone(),
                });
            }
            check_ordered(&batch.events)?;
        }
        let cursor = self.cursor_mut(device_id);
        cursor.record_hello(&upload.hello, receipt_wall_ms);
        match &upload.batch {
            Some(batch) => cursor.plan_ingest(batch, receipt_wall_ms),
            None => Ok(IngestOutcome {
                ack: cursor.acked_through(),
                ..IngestOutcome::default()
            }),
        }
    }

    pub fn commit(&mut self, device_id: &DeviceId, outcome: &IngestOutcome) {
        self.cursor_mut(device_id).commit(outcome);
    }

    pub fn handle_upload(
        &mut self,
        upload: &SyncUpload,
        receipt_wall_ms: i64,
    ) -> Result<IngestOutcome, SyncError> {
        let outcome = self.plan_upload(upload, receipt_wall_ms)?;
        self.commit(&upload.hello.device_id, &outcome);
        Ok(outcome)
    }

    pub fn ingest(
        &mut self,
        batch: &SyncBatch,
        receipt_wall_ms: i64,
    ) -> Result<IngestOutcome, SyncError> {
        self.cursor_mut(&batch.device_id)
            .ingest(batch, receipt_wall_ms)
    }
}
