//! Simulated one-button firmware.
//!
//! The device has no real-time clock. It stamps presses with a drifting
//! uptime counter and keeps them in a bounded ring until the host
//! acknowledges them. Time only moves when the caller passes a later
//! `true_ms`; nothing here reads the wall clock.

use std::collections::VecDeque;

use crate::model::DeviceId;
use crate::sync::wire::{BatchEvent, Hello, SyncAck, SyncBatch};

pub const DEFAULT_BUFFER_CAPACITY: usize = 4096;

/// Result of a single press.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PressOutcome {
    pub event: BatchEvent,
    /// Oldest buffered press pushed out to make room, if the ring was full.
    pub evicted: Option<BatchEvent>,
}

#[derive(Debug, Clone)]
pub struct ButtonDevice {
    device_id: DeviceId,
    boot_id: u64,
    next_seq: u32,
    boot_true_ms: i64,
    drift_ppm: i32,
    buffer: VecDeque<BatchEvent>,
    capacity: usize,
    overflowed: bool,
    evicted_total: u64,
}

impl ButtonDevice {
    /// Powers a fresh device on at `boot_true_ms`.
    ///
    /// # Panics
    /// If `capacity` is zero or `drift_ppm` would stop the clock.
    pub fn new(device_id: DeviceId, drift_ppm: i32, capacity: usize, boot_true_ms: i64) -> Self {
        assert!(capacity > 0, "buffer capacity must be positive");
        assert!(
            drift_ppm > -1_000_000,
            "drift of {drift_ppm} ppm stops the clock"
        );
        Self {
            device_id,
            boot_id: 0,
            next_seq: 0,
            boot_true_ms,
            drift_ppm,
            buffer: VecDeque::with_capacity(capacity.min(DEFAULT_BUFFER_CAPACITY)),
            capacity,
            overflowed: false,
            evicted_total: 0,
        }
    }

    pub fn device_id(&self) -> &DeviceId {
        &self.device_id
    }

    pub fn boot_id(&self) -> u64 {
        self.boot_id
    }

    pub fn next_seq(&self) -> u32 {
        self.next_seq
    }

    pub fn drift_ppm(&self) -> i32 {
        self.drift_ppm
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn overflowed(&self) -> bool {
        self.overflowed
    }

    pub fn evicted_total(&self) -> u64 {
        self.evicted_total
    }

    pub fn buffered(&self) -> impl ExactSizeIterator<Item = &BatchEvent> {
        self.buffer.iter()
    }

    pub fn buffered_len(&self) -> usize {
        self.buffer.len()
    }

    /// Device uptime at true time `true_ms`: elapsed time since boot scaled
    /// by `1 + drift_ppm·10⁻⁶`, floored to whole milliseconds.
    pub fn uptime_at(&self, true_ms: i64) -> u64 {
        let elapsed = i128::from((true_ms - self.boot_true_ms).max(0));
        let scaled = elapsed * i128::from(1_000_000 + i64::from(self.drift_ppm)) / 1_000_000;
        scaled as u64
    }

    pub fn press(&mut self, true_ms: i64) -> PressOutcome {
        let event = BatchEvent {
            seq: self.next_seq,
            boot_id: self.boot_id,
            uptime_ms: self.uptime_at(true_ms),
        };
        self.next_seq += 1;
        let evicted = if self.buffer.len() == self.capacity {
            self.overflowed = true;
            self.evicted_total += 1;
            self.buffer.pop_front()
        } else {
            None
        };
        self.buffer.push_back(event);
        PressOutcome { event, evicted }
    }

    /// Restarts the firmware. The buffer and the seq counter persist.
    pub fn reboot(&mut self, true_ms: i64) {
        self.boot_id += 1;
        self.boot_true_ms = true_ms;
    }

    pub fn hello(&self, true_ms: i64) -> Hello {
        Hello {
            device_id: self.device_id.clone(),
            boot_id: self.boot_id,
            uptime_now_ms: self.uptime_at(true_ms),
            buffered_count: self.buffer.len() as u64,
            overflowed: self.overflowed,
        }
    }

    /// Up to `max_n` oldest unacknowledged presses. Does not consume them.
    pub fn drain_batch(&self, max_n: usize) -> SyncBatch {
        SyncBatch {
            device_id: self.device_id.clone(),
            events: self.buffer.iter().take(max_n).copied().collect(),
        }
    }

    /// Drops every buffered press covered by the cumulative ack.
    pub fn apply_ack(&mut self, ack: &SyncAck) -> usize {
        let Some(through) = ack.acked_through_seq else {
            return 0;
        };
        let before = self.buffer.len();
        while self.buffer.front().is_some_and(|e| e.seq <= through) {
            self.buffer.pop_front();
        }
        before - self.buffer.len()
    }
}
