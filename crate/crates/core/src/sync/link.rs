//! Seeded model of an unreliable radio link.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::time::MS_PER_HOUR;

/// When the link is up, how often messages vanish, and how long they take.
///
/// After the last change point the link stays in its final state forever, so
/// a schedule whose final state is connected guarantees eventual delivery as
/// long as `drop_probability < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSchedule {
    pub seed: u64,
    initially_connected: bool,
    /// Sorted, strictly increasing `(t_ms, connected)` transitions.
    changes: Vec<(i64, bool)>,
    drop_probability: f64,
    latency_ms: (u64, u64),
}

impl LinkSchedule {
    pub fn always_connected(seed: u64) -> Self {
        Self {
            seed,
            initially_connected: true,
            changes: Vec::new(),
            drop_probability: 0.0,
            latency_ms: (0, 0),
        }
    }

    /// Connected except during the given outages.
    pub fn with_outages(seed: u64, outages: &[Range<i64>]) -> Self {
        let mut outages: Vec<Range<i64>> =
            outages.iter().filter(|r| !r.is_empty()).cloned().collect();
        outages.sort_by_key(|r| r.start);
        // overlapping or touching outages merge
        let mut merged: Vec<Range<i64>> = Vec::new();
        for r in outages {
            match merged.last_mut() {
                Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
                _ => merged.push(r),
            }
        }
        let changes = merged
            .iter()
            .flat_map(|r| [(r.start, false), (r.end, true)])
            .collect();
        Self {
            changes,
            ..Self::always_connected(seed)
        }
    }

    /// Each whole hour in `window` is independently down with
    /// `p_disconnect`; the link is up outside the window.
    pub fn random_hourly(seed: u64, window: Range<i64>, p_disconnect: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c69_6e6b);
        let mut outages = Vec::new();
        let mut t = window.start;
        while t < window.end {
            let end = (t + MS_PER_HOUR).min(window.end);
            if rng.random_bool(p_disconnect.clamp(0.0, 1.0)) {
                outages.push(t..end);
            }
            t = end;
        }
        Self::with_outages(seed, &outages)
    }

    pub fn with_drop_probability(mut self, p: f64) -> Self {
        assert!(
            (0.0..1.0).contains(&p),
            "drop probability {p} would prevent delivery"
        );
        self.drop_probability = p;
        self
    }

    pub fn with_latency(mut self, min_ms: u64, max_ms: u64) -> Self {
        assert!(min_ms <= max_ms);
        self.latency_ms = (min_ms, max_ms);
        self
    }

    pub fn drop_probability(&self) -> f64 {
        self.drop_probability
    }

    pub fn latency_bounds(&self) -> (u64, u64) {
        self.latency_ms
    }

    pub fn change_points(&self) -> &[(i64, bool)] {
        &self.changes
    }

    pub fn connected_at(&self, t_ms: i64) -> bool {
        match self.changes.partition_point(|&(at, _)| at <= t_ms) {
            0 => self.initially_connected,
            i => self.changes[i - 1].1,
        }
    }

    pub fn is_eventually_connected(&self) -> bool {
        self.changes
            .last()
            .map_or(self.initially_connected, |c| c.1)
    }

    /// Total disconnected time inside `window`.
    pub fn downtime_within(&self, window: Range<i64>) -> i64 {
        let mut down = 0;
        let mut state = self.initially_connected;
        let mut from = window.start;
        for &(at, connected) in &self.changes {
            let at = at.clamp(window.start, window.end);
            if !state {
                down += at - from;
            }
            from = at;
            state = connected;
        }
        if !state {
            down += window.end - from;
        }
        down
    }
}
