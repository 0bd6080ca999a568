use serde::Serialize;

use super::{daily_counts, gap_days, Timestamped};
use crate::model::{Annotation, AnnotationKind};
use crate::time::{local_parts, CivilDate, DatasetConfig, Weekday};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DayRow {
    pub day_index: u32,
    pub local_date: CivilDate,
    pub weekday: Weekday,
    /// Observations that day; `None` on excluded days.
    pub count: Option<u32>,
    /// Covered by a gap annotation: the count is unknown, not zero.
    pub excluded: bool,
}

/// A highlighted stretch of the timeline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Band {
    pub kind: AnnotationKind,
    pub first_day: u32,
    pub last_day: u32,
    pub start_utc_ms: i64,
    pub end_utc_ms: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DailySeries {
    pub days: Vec<DayRow>,
    pub bands: Vec<Band>,
}

impl DailySeries {
    pub fn bands_of(&self, kind: AnnotationKind) -> impl Iterator<Item = &Band> {
        self.bands.iter().filter(move |b| b.kind == kind)
    }
}

fn day_of(t_utc_ms: i64, config: &DatasetConfig) -> u32 {
    local_parts(t_utc_ms, config).map_or(1, |p| p.day_index.min(config.day_count))
}

fn weekend_bands(config: &DatasetConfig) -> Vec<Band> {
    let mut bands: Vec<Band> = Vec::new();
    for day in 1..=config.day_count {
        if !config.date_of_day(day).weekday().is_weekend() {
            continue;
        }
        match bands.last_mut() {
            Some(b) if b.last_day + 1 == day => {
                b.last_day = day;
                b.end_utc_ms = config.day_window(day).end;
            }
            _ => bands.push(Band {
                kind: AnnotationKind::Weekend,
                first_day: day,
                last_day: day,
                start_utc_ms: config.day_window(day).start,
                end_utc_ms: config.day_window(day).end,
                label: None,
            }),
        }
    }
    bands
}

/// Per-day counts with weekend bands from the calendar and session,
/// consultation and gap bands from annotations.
pub fn daily_series<T: Timestamped>(
    observations: &[T],
    annotations: &[Annotation],
    config: &DatasetConfig,
) -> DailySeries {
    let counts = daily_counts(observations, config);
    let excluded = gap_days(annotations, config);
    let days = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            let day_index = i as u32 + 1;
            let local_date = config.date_of_day(day_index);
            let excluded = excluded.contains(&day_index);
            DayRow {
                day_index,
                local_date,
                weekday: local_date.weekday(),
                count: (!excluded).then_some(count),
                excluded,
            }
        })
        .collect();

    let window = config.dataset_window();
    let mut bands = weekend_bands(config);
    let mut copied: Vec<&Annotation> = annotations
        .iter()
        .filter(|a| {
            matches!(
                a.kind,
                AnnotationKind::Session | AnnotationKind::PhoneConsultation | AnnotationKind::Gap
            ) && (a.overlaps(&window)
                || (a.start_utc_ms == a.end_utc_ms && window.contains(&a.start_utc_ms)))
        })
        .collect();
    copied.sort_by_key(|a| (a.start_utc_ms, a.end_utc_ms, a.kind));
    bands.extend(copied.into_iter().map(|a| Band {
        kind: a.kind,
        first_day: day_of(a.start_utc_ms, config),
        last_day: day_of((a.end_utc_ms - 1).max(a.start_utc_ms), config),
        start_utc_ms: a.start_utc_ms,
        end_utc_ms: a.end_utc_ms,
        label: a.label.clone(),
    }));
    DailySeries { days, bands }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::MS_PER_HOUR;

    fn config(days: u32) -> DatasetConfig {
        DatasetConfig::new(CivilDate::new(2016, 2, 1).unwrap(), 60, days).unwrap()
    }

    #[test]
    fn empty_inputs_still_show_weekends() {
        let c = config(14);
        let s = daily_series::<i64>(&[], &[], &c);
        assert_eq!(s.days.len(), 14);
        assert!(s.days.iter().all(|d| d.count == Some(0) && !d.excluded));
        let weekends: Vec<(u32, u32)> = s
            .bands_of(AnnotationKind::Weekend)
            .map(|b| (b.first_day, b.last_day))
            .collect();
        assert_eq!(weekends, vec![(6, 7), (13, 14)]);
    }

    #[test]
    fn gap_days_flagged_not_zeroed() {
        let c = config(21);
        let gap = Annotation::new(
            AnnotationKind::Gap,
            c.day_start_utc_ms(8),
            c.day_start_utc_ms(15),
        );
        let s = daily_series::<i64>(&[], &[gap], &c);
        let excluded: Vec<u32> = s
            .days
            .iter()
            .filter(|d| d.excluded)
            .map(|d| d.day_index)
            .collect();
        assert_eq!(excluded, (8..=14).collect::<Vec<_>>());
        assert!(s.days.iter().all(|d| d.excluded == d.count.is_none()));
        let band = s.bands_of(AnnotationKind::Gap).next().unwrap();
        assert_eq!((band.first_day, band.last_day), (8, 14));
    }

    #[test]
    fn counts_and_session_bands() {
        let c = config(7);
        let t = c.day_start_utc_ms(3) + 15 * MS_PER_HOUR;
        let session = Annotation::new(AnnotationKind::Session, t, t + MS_PER_HOUR).with_label("s1");
        let note = Annotation::new(AnnotationKind::Note, t, t);
        let s = daily_series(&[t, t + 1], &[session, note], &c);
        assert_eq!(s.days[2].count, Some(2));
        let sessions: Vec<&Band> = s.bands_of(AnnotationKind::Session).collect();
        assert_eq!(sessions.len(), 1);
        assert_eq!((sessions[0].first_day, sessions[0].last_day), (3, 3));
        assert_eq!(s.bands_of(AnnotationKind::Note).count(), 0);
    }
}
