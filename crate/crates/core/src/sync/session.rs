//! Discrete-event simulation of a device talking to the host over a
//! [`LinkSchedule`].
//!
//! Protocol per connection: when the link comes up the device sends a
//! handshake frame (hello plus its oldest batch). Every delivered frame is
//! answered with a cumulative ack; on each ack the device prunes its buffer
//! and sends the next batch if anything is left. A frame that is not acked
//! within `retransmit_after_ms` is sent again; an unacknowledged handshake is
//! retried with a fresh hello. Frames still in flight when the link drops are
//! lost. A connection older than `reconnect_every_ms` is re-established with a
//! new handshake, once idle at the next press, so the host always holds a
//! recent clock anchor.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::device::ButtonDevice;
use crate::model::RawPress;
use crate::sync::host::{OverflowGap, SyncHost};
use crate::sync::link::LinkSchedule;
use crate::sync::wire::{Hello, SyncAck, SyncBatch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub max_batch: usize,
    pub retransmit_after_ms: u64,
    pub reconnect_every_ms: Option<u64>,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            max_batch: 64,
            retransmit_after_ms: 3_000,
            reconnect_every_ms: Some(3_600_000),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DeviceAction {
    Press,
    Reboot,
}

/// Something the wearer does to the device at a true wall time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ScriptedAction {
    pub t_ms: i64,
    pub action: DeviceAction,
}

impl ScriptedAction {
    pub fn press(t_ms: i64) -> Self {
        Self {
            t_ms,
            action: DeviceAction::Press,
        }
    }

    pub fn reboot(t_ms: i64) -> Self {
        Self {
            t_ms,
            action: DeviceAction::Reboot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogEvent {
    Pressed { seq: u32, boot_id: u64 },
    Evicted { seq: u32 },
    Rebooted { boot_id: u64 },
    LinkUp,
    LinkDown,
    Reconnected,
    Sent { handshake: bool, events: usize },
    Dropped,
    LostInFlight,
    Stored { seq: u32 },
    GapDetected { from_seq: u32, through_seq: u32 },
    AckReceived { through: Option<u32> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub t_ms: i64,
    pub event: LogEvent,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkStats {
    pub frames_sent: u64,
    pub frames_dropped: u64,
    pub frames_lost_in_flight: u64,
    pub retransmissions: u64,
    pub handshakes: u64,
}

/// Everything that happened during a run, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub log: Vec<LogEntry>,
    /// Presses the host stored, in storage order.
    pub stored: Vec<RawPress>,
    pub gaps: Vec<OverflowGap>,
    pub stats: LinkStats,
    /// True when the run ended with nothing buffered and nothing in flight.
    pub quiescent: bool,
    pub ended_at_ms: i64,
}

impl Transcript {
    /// True press time of each seq, read back from the log.
    pub fn pressed_seqs(&self) -> Vec<u32> {
        self.log
            .iter()
            .filter_map(|e| match e.event {
                LogEvent::Pressed { seq, .. } => Some(seq),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
enum Frame {
    Upload {
        hello: Option<Hello>,
        batch: SyncBatch,
    },
    Ack(SyncAck),
}

#[derive(Debug, Clone)]
enum SimEvent {
    Script(DeviceAction),
    LinkChange(bool),
    ToHost { epoch: u64, frame: Frame },
    ToDevice { epoch: u64, frame: Frame },
    RetransmitTimer { attempt: u64 },
    Refresh { epoch: u64 },
}

struct Queued {
    at: i64,
    order: u64,
    event: SimEvent,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.order) == (other.at, other.order)
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Queued {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.at, self.order).cmp(&(other.at, other.order))
    }
}

#[derive(Debug, Default)]
struct Connection {
    epoch: u64,
    established: bool,
    in_flight: Option<u64>,
    stale: bool,
}

struct Sim<'a> {
    device: &'a mut ButtonDevice,
    host: &'a mut SyncHost,
    link: &'a LinkSchedule,
    config: SessionConfig,
    rng: ChaCha8Rng,
    queue: BinaryHeap<Reverse<Queued>>,
    order: u64,
    attempts: u64,
    epoch: u64,
    conn: Option<Connection>,
    transcript: Transcript,
}

/// Runs the device against the host until `until_ms` or until no events
/// remain. Fully determined by the link seed, the schedule and the script.
pub fn run_session(
    device: &mut ButtonDevice,
    host: &mut SyncHost,
    link: &LinkSchedule,
    script: &[ScriptedAction],
    config: SessionConfig,
    until_ms: i64,
) -> Transcript {
    let mut sim = Sim {
        device,
        host,
        link,
        config,
        rng: ChaCha8Rng::seed_from_u64(link.seed),
        queue: BinaryHeap::new(),
        order: 0,
        attempts: 0,
        epoch: 0,
        conn: None,
        transcript: Transcript::default(),
    };
    let mut script = script.to_vec();
    script.sort();
    for a in &script {
        sim.schedule(a.t_ms, SimEvent::Script(a.action));
    }
    let first = script.first().map_or(0, |a| a.t_ms);
    for &(at, connected) in link.change_points() {
        sim.schedule(at, SimEvent::LinkChange(connected));
    }
    if link.connected_at(first) && link.change_points().first().is_none_or(|c| c.0 > first) {
        sim.schedule(first, SimEvent::LinkChange(true));
    }
    sim.run(until_ms)
}

impl Sim<'_> {
    fn schedule(&mut self, at: i64, event: SimEvent) {
        self.order += 1;
        self.queue.push(Reverse(Queued {
            at,
            order: self.order,
            event,
        }));
    }

    fn log(&mut self, t_ms: i64, event: LogEvent) {
        self.transcript.log.push(LogEntry { t_ms, event });
    }

    fn run(mut self, until_ms: i64) -> Transcript {
        let mut now = 0;
        while let Some(Reverse(next)) = self.queue.pop() {
            if next.at > until_ms {
                break;
            }
            now = next.at;
            match next.event {
                SimEvent::Script(action) => self.on_script(now, action),
                SimEvent::LinkChange(up) => self.on_link_change(now, up),
                SimEvent::ToHost { epoch, frame } => self.on_host_receive(now, epoch, frame),
                SimEvent::ToDevice { epoch, frame } => self.on_device_receive(now, epoch, frame),
                SimEvent::RetransmitTimer { attempt } => self.on_timer(now, attempt),
                SimEvent::Refresh { epoch } => self.on_refresh(now, epoch),
            }
        }
        self.transcript.ended_at_ms = now;
        self.transcript.quiescent = self.device.buffered_len() == 0
            && self.conn.as_ref().is_none_or(|c| c.in_flight.is_none());
        self.transcript
    }

    fn on_script(&mut self, now: i64, action: DeviceAction) {
        match action {
            DeviceAction::Press => {
                let out = self.device.press(now);
                if let Some(evicted) = out.evicted {
                    self.log(now, LogEvent::Evicted { seq: evicted.seq });
                }
                self.log(
                    now,
                    LogEvent::Pressed {
                        seq: out.event.seq,
                        boot_id: out.event.boot_id,
                    },
                );
                if self.conn.as_ref().is_some_and(|c| c.stale) {
                    self.log(now, LogEvent::Reconnected);
                    self.connect(now);
                } else if self
                    .conn
                    .as_ref()
                    .is_some_and(|c| c.established && c.in_flight.is_none())
                {
                    self.send_batch(now, false);
                }
            }
            DeviceAction::Reboot => {
                self.device.reboot(now);
                let boot_id = self.device.boot_id();
                self.log(now, LogEvent::Rebooted { boot_id });
                // the radio session does not survive a reboot
                if self.conn.take().is_some() && self.link.connected_at(now) {
                    self.connect(now);
                }
            }
        }
    }

    fn on_link_change(&mut self, now: i64, up: bool) {
        if up {
            self.log(now, LogEvent::LinkUp);
            self.connect(now);
        } else {
            self.log(now, LogEvent::LinkDown);
            self.conn = None;
        }
    }

    fn connect(&mut self, now: i64) {
        self.epoch += 1;
        self.conn = Some(Connection {
            epoch: self.epoch,
            ..Connection::default()
        });
        if let Some(every) = self.config.reconnect_every_ms {
            self.schedule(now + every as i64, SimEvent::Refresh { epoch: self.epoch });
        }
        self.send_batch(now, true);
    }

    fn on_refresh(&mut self, now: i64, epoch: u64) {
        let idle = self.device.buffered_len() == 0;
        let Some(conn) = self.conn.as_mut().filter(|c| c.epoch == epoch) else {
            return;
        };
        if idle && conn.in_flight.is_none() {
            conn.stale = true;
        } else {
            self.log(now, LogEvent::Reconnected);
            self.connect(now);
        }
    }

    fn send_batch(&mut self, now: i64, handshake: bool) {
        let batch = self.device.drain_batch(self.config.max_batch);
        if !handshake && batch.events.is_empty() {
            return;
        }
        self.attempts += 1;
        let attempt = self.attempts;
        let Some(conn) = self.conn.as_mut() else {
            return;
        };
        conn.in_flight = Some(attempt);
        let epoch = conn.epoch;
        let hello = handshake.then(|| self.device.hello(now));
        if handshake {
            self.transcript.stats.handshakes += 1;
        }
        self.log(
            now,
            LogEvent::Sent {
                handshake,
                events: batch.events.len(),
            },
        );
        self.transmit(now, epoch, Frame::Upload { hello, batch }, true);
        self.schedule(
            now + self.config.retransmit_after_ms as i64,
            SimEvent::RetransmitTimer { attempt },
        );
    }

    fn transmit(&mut self, now: i64, epoch: u64, frame: Frame, to_host: bool) {
        self.transcript.stats.frames_sent += 1;
        if self.rng.random_bool(self.link.drop_probability()) {
            self.transcript.stats.frames_dropped += 1;
            self.log(now, LogEvent::Dropped);
            return;
        }
        let (lo, hi) = self.link.latency_bounds();
        let at = now + self.rng.random_range(lo..=hi) as i64;
        let event = if to_host {
            SimEvent::ToHost { epoch, frame }
        } else {
            SimEvent::ToDevice { epoch, frame }
        };
        self.schedule(at, event);
    }

    fn delivered(&mut self, now: i64, epoch: u64) -> bool {
        let ok = self.link.connected_at(now) && epoch == self.epoch;
        if !ok {
            self.transcript.stats.frames_lost_in_flight += 1;
            self.log(now, LogEvent::LostInFlight);
        }
        ok
    }

    fn on_host_receive(&mut self, now: i64, epoch: u64, frame: Frame) {
        if !self.delivered(now, epoch) {
            return;
        }
        let Frame::Upload { hello, batch } = frame else {
            return;
        };
        let device_id = batch.device_id.clone();
        if let Some(hello) = &hello {
            self.host.cursor_mut(&device_id).record_hello(hello, now);
        }
        let outcome = self
            .host
            .ingest(&batch, now)
            .expect("the simulated device only sends seq-ordered batches");
        for gap in &outcome.gaps {
            self.log(
                now,
                LogEvent::GapDetected {
                    from_seq: gap.from_seq,
                    through_seq: gap.through_seq,
                },
            );
        }
        for p in &outcome.presses {
            self.log(now, LogEvent::Stored { seq: p.seq });
        }
        let ack = outcome.sync_ack();
        self.transcript.gaps.extend(outcome.gaps);
        self.transcript.stored.extend(outcome.presses);
        self.transmit(now, epoch, Frame::Ack(ack), false);
    }

    fn on_device_receive(&mut self, now: i64, epoch: u64, frame: Frame) {
        if !self.delivered(now, epoch) {
            return;
        }
        let Frame::Ack(ack) = frame else {
            return;
        };
        self.device.apply_ack(&ack);
        self.log(
            now,
            LogEvent::AckReceived {
                through: ack.acked_through_seq,
            },
        );
        let Some(conn) = self.conn.as_mut() else {
            return;
        };
        conn.established = true;
        conn.in_flight = None;
        if self.device.buffered_len() > 0 {
            self.send_batch(now, false);
        }
    }

    fn on_timer(&mut self, now: i64, attempt: u64) {
        let Some(conn) = self.conn.as_ref() else {
            return;
        };
        if conn.in_flight != Some(attempt) || !self.link.connected_at(now) {
            return;
        }
        self.transcript.stats.retransmissions += 1;
        let handshake = !conn.established;
        self.send_batch(now, handshake);
    }
}

#[cfg(test)]
#[allow(clippy::single_range_in_vec_init)]
mod tests {
    use super::*;
    use crate::model::{DeviceId, Quality};
    use crate::time::MS_PER_HOUR;

    fn device(capacity: usize) -> ButtonDevice {
        ButtonDevice::new(DeviceId::new("d"), 0, capacity, 0)
    }

    fn presses(times: impl IntoIterator<Item = i64>) -> Vec<ScriptedAction> {
        times.into_iter().map(ScriptedAction::press).collect()
    }

    fn stored_seqs(t: &Transcript) -> Vec<u32> {
        let mut seqs: Vec<u32> = t.stored.iter().map(|p| p.seq).collect();
        seqs.sort_unstable();
        seqs
    }

    #[test]
    fn clean_link_stores_everything_in_order() {
        let mut d = device(16);
        let mut host = SyncHost::new();
        let script = presses((0..10).map(|i| 1_000 + i * 500));
        let t = run_session(
            &mut d,
            &mut host,
            &LinkSchedule::always_connected(1),
            &script,
            SessionConfig::default(),
            i64::MAX,
        );
        assert!(t.quiescent);
        assert_eq!(
            t.stored.iter().map(|p| p.seq).collect::<Vec<_>>(),
            (0..10).collect::<Vec<_>>()
        );
        assert!(t.stored.iter().all(|p| p.quality == Quality::Anchored));
        assert_eq!(t.stored[3].t_utc_ms, 2_500);
        assert_eq!(t.pressed_seqs(), (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn lossy_link_delivers_exactly_once() {
        for seed in 0..20 {
            let mut d = device(64);
            let mut host = SyncHost::new();
            let link = LinkSchedule::with_outages(seed, &[2_000..9_000, 20_000..21_000])
                .with_drop_probability(0.4)
                .with_latency(1, 400);
            let script = presses((0..40).map(|i| i * 700));
            let t = run_session(
                &mut d,
                &mut host,
                &link,
                &script,
                SessionConfig::default(),
                i64::MAX,
            );
            assert!(t.quiescent, "seed {seed}");
            assert_eq!(stored_seqs(&t), (0..40).collect::<Vec<_>>(), "seed {seed}");
            assert!(t.gaps.is_empty());
            assert!(t.stats.retransmissions > 0 || t.stats.frames_dropped == 0);
        }
    }

    #[test]
    fn long_outage_overflows_into_a_gap() {
        let mut d = device(4);
        let mut host = SyncHost::new();
        let link = LinkSchedule::with_outages(3, &[0..MS_PER_HOUR]);
        let script = presses((0..10).map(|i| 1_000 + i * 1_000));
        let t = run_session(
            &mut d,
            &mut host,
            &link,
            &script,
            SessionConfig::default(),
            i64::MAX,
        );
        assert_eq!(stored_seqs(&t), vec![6, 7, 8, 9]);
        assert_eq!(t.gaps.len(), 1);
        assert_eq!((t.gaps[0].from_seq, t.gaps[0].through_seq), (0, 5));
        let evicted = t
            .log
            .iter()
            .filter(|e| matches!(e.event, LogEvent::Evicted { .. }))
            .count();
        assert_eq!(evicted, 6);
    }

    #[test]
    fn reboot_during_outage_falls_back_to_receipt_time() {
        let mut d = device(16);
        let mut host = SyncHost::new();
        let link = LinkSchedule::with_outages(4, &[500..10_000]);
        let script = vec![
            ScriptedAction::press(100),
            ScriptedAction::press(1_000),
            ScriptedAction::reboot(2_000),
            ScriptedAction::press(3_000),
        ];
        let t = run_session(
            &mut d,
            &mut host,
            &link,
            &script,
            SessionConfig::default(),
            i64::MAX,
        );
        assert_eq!(stored_seqs(&t), vec![0, 1, 2]);
        let by_seq = |s: u32| t.stored.iter().find(|p| p.seq == s).unwrap();
        assert_eq!(by_seq(0).quality, Quality::Anchored);
        // seq 1 was pressed in boot 0, whose anchor predates it
        assert_eq!(
            (by_seq(1).quality, by_seq(1).t_utc_ms),
            (Quality::Anchored, 1_000)
        );
        assert_eq!(
            (by_seq(2).boot_id, by_seq(2).quality, by_seq(2).t_utc_ms),
            (1, Quality::Anchored, 3_000)
        );
    }

    #[test]
    fn idle_connections_refresh_their_anchor() {
        let mut d = ButtonDevice::new(DeviceId::new("d"), 200, 16, 0);
        let mut host = SyncHost::new();
        let script = presses([10, 10 * MS_PER_HOUR]);
        let t = run_session(
            &mut d,
            &mut host,
            &LinkSchedule::always_connected(5),
            &script,
            SessionConfig::default(),
            i64::MAX,
        );
        assert!(t.quiescent);
        assert_eq!(t.stats.handshakes, 2);
        assert!(t.stored.iter().all(|p| p.quality == Quality::Anchored));
        assert!((t.stored[1].t_utc_ms - 10 * MS_PER_HOUR).abs() <= 1);

        let mut d = ButtonDevice::new(DeviceId::new("d"), 200, 16, 0);
        let mut host = SyncHost::new();
        let never = SessionConfig {
            reconnect_every_ms: None,
            ..SessionConfig::default()
        };
        let t = run_session(
            &mut d,
            &mut host,
            &LinkSchedule::always_connected(5),
            &script,
            never,
            i64::MAX,
        );
        assert_eq!(t.stats.handshakes, 1);
        assert!((t.stored[1].t_utc_ms - 10 * MS_PER_HOUR).abs() > 1_000);
    }

    #[test]
    fn deterministic_per_seed() {
        let run = || {
            let mut d = device(8);
            let mut host = SyncHost::new();
            let link = LinkSchedule::random_hourly(9, 0..10 * MS_PER_HOUR, 0.5)
                .with_drop_probability(0.2)
                .with_latency(0, 50);
            let script = presses((0..200).map(|i| i * 150_000));
            run_session(
                &mut d,
                &mut host,
                &link,
                &script,
                SessionConfig::default(),
                i64::MAX,
            )
        };
        assert_eq!(run(), run());
    }
}
