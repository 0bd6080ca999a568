use serde::Serialize;

use super::Timestamped;
use crate::time::{DatasetConfig, MS_PER_HOUR};

/// Observation counts per local hour with their share of the total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HourlyHistogram {
    pub counts: [u32; 24],
    /// Percentages in tenths of a percent, so `104` is 10.4 %.
    pub percent_tenths: [u32; 24],
    pub total: u32,
}

/// `100·count/total` rounded half away from zero to one decimal, in tenths.
pub fn percent_tenths(count: u32, total: u32) -> u32 {
    if total == 0 {
        return 0;
    }
    let (c, t) = (u64::from(count), u64::from(total));
    ((2_000 * c + t) / (2 * t)) as u32
}

impl HourlyHistogram {
    pub fn from_counts(counts: [u32; 24]) -> Self {
        let total = counts.iter().sum();
        Self {
            counts,
            percent_tenths: counts.map(|c| percent_tenths(c, total)),
            total,
        }
    }

    pub fn percentage(&self, hour: usize) -> f64 {
        f64::from(self.percent_tenths[hour]) / 10.0
    }

    /// The percentage as printed in reports, e.g. `10.4` or `0.0`.
    pub fn percentage_text(&self, hour: usize) -> String {
        let t = self.percent_tenths[hour];
        format!("{}.{}", t / 10, t % 10)
    }
}

pub fn hourly<T: Timestamped>(observations: &[T], config: &DatasetConfig) -> HourlyHistogram {
    let offset = i64::from(config.utc_offset_minutes) * 60_000;
    let mut counts = [0u32; 24];
    for obs in observations {
        let hour = (obs.t_utc_ms() + offset).rem_euclid(24 * MS_PER_HOUR) / MS_PER_HOUR;
        counts[hour as usize] += 1;
    }
    HourlyHistogram::from_counts(counts)
}
