//! Reports over decoded observations: hour-of-day distribution, per-weekday
//! box statistics, the daily series with annotation bands, and period
//! comparison.
//!
//! Days covered by a gap annotation are excluded from samples and means
//! rather than counted as zero.

mod compare;
mod daily;
mod hourly;
pub mod quantile;
pub mod report;
mod weekday;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Annotation, AnnotationKind, Observation};
use crate::store::formats::ObservationRow;
use crate::time::{local_parts, DatasetConfig};

pub use compare::{period_compare, DayRange, PeriodComparison, PeriodStats};
pub use daily::{daily_series, Band, DailySeries, DayRow};
pub use hourly::{hourly, percent_tenths, HourlyHistogram};
pub use quantile::{BoxStats, QuartileMethod};
pub use weekday::{weekday_summary, weekday_summary_with, WeekdayStats, WeekdaySummary};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("period {0} contains no countable days")]
    EmptyPeriod(DayRange),
}

/// Anything with a wall-clock instant that can be binned.
pub trait Timestamped {
    fn t_utc_ms(&self) -> i64;
}

impl Timestamped for Observation {
    fn t_utc_ms(&self) -> i64 {
        self.t_utc_ms
    }
}

impl Timestamped for ObservationRow {
    fn t_utc_ms(&self) -> i64 {
        self.t_utc_ms
    }
}

impl Timestamped for i64 {
    fn t_utc_ms(&self) -> i64 {
        *self
    }
}

impl<T: Timestamped> Timestamped for &T {
    fn t_utc_ms(&self) -> i64 {
        (*self).t_utc_ms()
    }
}

/// Observation count per day, index 0 holding day 1. Observations outside
/// `1..=day_count` are ignored.
pub fn daily_counts<T: Timestamped>(observations: &[T], config: &DatasetConfig) -> Vec<u32> {
    let mut counts = vec![0u32; config.day_count as usize];
    for obs in observations {
        if let Ok(parts) = local_parts(obs.t_utc_ms(), config) {
            if let Some(slot) = counts.get_mut(parts.day_index as usize - 1) {
                *slot += 1;
            }
        }
    }
    counts
}

/// Days in `1..=day_count` that intersect any gap annotation.
pub fn gap_days(annotations: &[Annotation], config: &DatasetConfig) -> BTreeSet<u32> {
    let gaps: Vec<&Annotation> = annotations
        .iter()
        .filter(|a| a.kind == AnnotationKind::Gap)
        .collect();
    (1..=config.day_count)
        .filter(|&d| {
            let window = config.day_window(d);
            gaps.iter().any(|g| g.overlaps(&window))
        })
        .collect()
}
