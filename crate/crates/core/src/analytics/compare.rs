use std::fmt;

use serde::{Deserialize, Serialize};

use super::{daily_counts, gap_days, AnalyticsError, Timestamped};
use crate::model::Annotation;
use crate::time::DatasetConfig;

/// Inclusive range of day indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayRange {
    pub first: u32,
    pub last: u32,
}

impl DayRange {
    pub fn new(first: u32, last: u32) -> Self {
        Self { first, last }
    }
}

impl fmt::Display for DayRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.last)
    }
}

impl std::str::FromStr for DayRange {
    type Err = String;

    /// Parses `first:last`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("expected FIRST:LAST, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Self::new(parse(a)?, parse(b)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodStats {
    pub range: DayRange,
    /// Days in range not excluded by a gap.
    pub days_counted: u32,
    pub observations: u32,
    pub mean_per_day: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodComparison {
    pub a: PeriodStats,
    pub b: PeriodStats,
    /// `b.mean / a.mean`; `None` when period a has no observations.
    pub ratio: Option<f64>,
}

fn period_stats(
    counts: &[u32],
    excluded: &std::collections::BTreeSet<u32>,
    range: DayRange,
    config: &DatasetConfig,
) -> Result<PeriodStats, AnalyticsError> {
    if range.first == 0 || range.first > range.last || range.last > config.day_count {
        return Err(AnalyticsError::EmptyPeriod(range));
    }
    let days: Vec<u32> = (range.first..=range.last)
        .filter(|d| !excluded.contains(d))
        .collect();
    if days.is_empty() {
        return Err(AnalyticsError::EmptyPeriod(range));
    }
    let observations: u32 = days.iter().map(|&d| counts[d as usize - 1]).sum();
    Ok(PeriodStats {
        range,
        days_counted: days.len() as u32,
        observations,
        mean_per_day: f64::from(observations) / days.len() as f64,
    })
}

/// Mean observations per counted day in each period, and their ratio.
pub fn period_compare<T: Timestamped>(
    observations: &[T],
    annotations: &[Annotation],
    config: &DatasetConfig,
    a: DayRange,
    b: DayRange,
) -> Result<PeriodComparison, AnalyticsError> {
    let counts = daily_counts(observations, config);
    let excluded = gap_days(annotations, config);
    let a = period_stats(&counts, &excluded, a, config)?;
    let b = period_stats(&counts, &excluded, b, config)?;
    let ratio = (a.observations > 0).then(|| b.mean_per_day / a.mean_per_day);
    Ok(PeriodComparison { a, b, ratio })
}
