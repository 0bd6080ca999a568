use serde::Serialize;

use super::quantile::{BoxStats, QuartileMethod};
use super::{daily_counts, gap_days, Timestamped};
use crate::model::Annotation;
use crate::time::{DatasetConfig, Weekday};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeekdayStats {
    pub weekday: Weekday,
    /// Observation count of every counted day falling on this weekday.
    pub sample: Vec<u32>,
    pub stats: Option<BoxStats>,
}

/// Box statistics per weekday, Monday first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeekdaySummary {
    pub days: Vec<WeekdayStats>,
}

impl WeekdaySummary {
    pub fn get(&self, weekday: Weekday) -> &WeekdayStats {
        &self.days[weekday.index()]
    }
}

pub fn weekday_summary<T: Timestamped>(
    observations: &[T],
    annotations: &[Annotation],
    config: &DatasetConfig,
) -> WeekdaySummary {
    weekday_summary_with(
        observations,
        annotations,
        config,
        QuartileMethod::TukeyHinges,
    )
}

pub fn weekday_summary_with<T: Timestamped>(
    observations: &[T],
    annotations: &[Annotation],
    config: &DatasetConfig,
    method: QuartileMethod,
) -> WeekdaySummary {
    let counts = daily_counts(observations, config);
    let excluded = gap_days(annotations, config);
    let mut samples: [Vec<u32>; 7] = Default::default();
    for (i, &count) in counts.iter().enumerate() {
        let day = i as u32 + 1;
        if !excluded.contains(&day) {
            samples[config.date_of_day(day).weekday().index()].push(count);
        }
    }
    let days = Weekday::ALL
        .iter()
        .zip(samples)
        .map(|(&weekday, sample)| {
            let values: Vec<f64> = sample.iter().map(|&c| f64::from(c)).collect();
            WeekdayStats {
                weekday,
                stats: BoxStats::new(&values, method),
                sample,
            }
        })
        .collect();
    WeekdaySummary { days }
}
