use std::fmt;

use super::*;
use crate::analytics::{daily_counts, gap_days, hourly};
use crate::decoder::{decode, sort_for_decode};
use crate::model::{Annotation, AnnotationKind, RawPress};
use crate::time::{local_parts, DatasetConfig, MS_PER_HOUR};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintFailure {
    pub constraint: &'static str,
    pub detail: String,
}

impl fmt::Display for ConstraintFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.constraint, self.detail)
    }
}

struct Failures(Vec<ConstraintFailure>);

impl Failures {
    fn require(&mut self, ok: bool, constraint: &'static str, detail: impl FnOnce() -> String) {
        if !ok {
            self.0.push(ConstraintFailure {
                constraint,
                detail: detail(),
            });
        }
    }
}

fn mean(values: &[u32]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().map(|&v| f64::from(v)).sum::<f64>() / values.len() as f64
    }
}

/// Checks a press log and its annotations against every property the case
/// promises. An empty result means the dataset conforms.
pub fn check_pn(
    presses: &[RawPress],
    annotations: &[Annotation],
    config: &DatasetConfig,
) -> Vec<ConstraintFailure> {
    let mut f = Failures(Vec::new());
    let mut sorted = presses.to_vec();
    sort_for_decode(&mut sorted);
    let decoded = decode(&sorted, config.burst_gap_ms).expect("sorted above");
    let obs = &decoded.observations;

    f.require(obs.len() == PN_OBSERVATIONS as usize, "total", || {
        format!("{} observations, expected {PN_OBSERVATIONS}", obs.len())
    });
    let hist = hourly(obs, config);
    f.require(hist.counts == PN_HOURLY_COUNTS, "hourly", || {
        format!("counts {:?}", hist.counts)
    });
    f.require(
        decoded.false_positives.len() == pn_false_positive_count(),
        "false_positives",
        || {
            format!(
                "{} stray presses, expected {}",
                decoded.false_positives.len(),
                pn_false_positive_count()
            )
        },
    );
    let bad_pairs = obs
        .iter()
        .filter(|o| {
            let ts: Vec<i64> = o
                .source_seqs
                .iter()
                .filter_map(|s| sorted.iter().find(|p| p.seq == *s).map(|p| p.t_utc_ms))
                .collect();
            o.press_count != 2 || ts.len() != 2 || !PN_DOUBLE_PRESS_MS.contains(&(ts[1] - ts[0]))
        })
        .count();
    f.require(bad_pairs == 0, "double_press", || {
        format!("{bad_pairs} observations are not a double press 300-1200 ms apart")
    });

    let counts = daily_counts(obs, config);
    let in_gap: u32 = PN_GAP_DAYS.map(|d| counts[d as usize - 1]).sum();
    f.require(in_gap == 0, "gap_empty", || {
        format!("{in_gap} observations on gap days")
    });
    let excluded = gap_days(annotations, config);
    f.require(
        PN_GAP_DAYS.clone().all(|d| excluded.contains(&d)),
        "gap_annotated",
        || format!("gap annotation covers days {excluded:?}"),
    );

    let counted = |pred: &dyn Fn(u32) -> bool| -> Vec<u32> {
        (1..=config.day_count)
            .filter(|d| !excluded.contains(d) && pred(*d))
            .map(|d| counts[d as usize - 1])
            .collect()
    };
    let weekend = |d: u32| config.date_of_day(d).weekday().is_weekend();
    let weekday_mean = mean(&counted(&|d| !weekend(d)));
    let weekend_mean = mean(&counted(&weekend));
    f.require(
        weekday_mean >= 2.0 * weekend_mean,
        "weekday_weekend",
        || format!("weekday mean {weekday_mean:.3}, weekend mean {weekend_mean:.3}"),
    );
    let baseline = mean(&counted(&|d| PN_BASELINE_DAYS.contains(&d)));
    let crisis = mean(&counted(&|d| PN_CRISIS_DAYS.contains(&d)));
    f.require(
        baseline > 0.0 && crisis > baseline && crisis <= 1.5 * baseline,
        "crisis_increase",
        || format!("baseline mean {baseline:.3}, crisis mean {crisis:.3}"),
    );

    let week_of = |t: i64| {
        local_parts(t, config)
            .ok()
            .map(|p| week_of_day(p.day_index))
    };
    let sessions: Vec<&Annotation> = annotations
        .iter()
        .filter(|a| a.kind == AnnotationKind::Session)
        .collect();
    f.require(sessions.len() == PN_SESSIONS, "sessions", || {
        format!("{} sessions, expected {PN_SESSIONS}", sessions.len())
    });
    for week in 1..=week_of_day(config.day_count) {
        let n = sessions
            .iter()
            .filter(|s| week_of(s.start_utc_ms) == Some(week))
            .count();
        let ok = if PN_CONSULTATION_WEEKS.contains(&week) {
            n == 0
        } else {
            (2..=3).contains(&n)
        };
        f.require(ok, "sessions_per_week", || {
            format!("week {week} has {n} sessions")
        });
    }
    let misplaced = sessions
        .iter()
        .filter(|s| match local_parts(s.start_utc_ms, config) {
            Ok(p) => p.weekday.is_weekend() || !(12..18).contains(&p.hour),
            Err(_) => true,
        })
        .count();
    f.require(misplaced == 0, "session_slots", || {
        format!("{misplaced} sessions outside weekday afternoons")
    });

    let consultations: Vec<&Annotation> = annotations
        .iter()
        .filter(|a| a.kind == AnnotationKind::PhoneConsultation)
        .collect();
    f.require(!consultations.is_empty(), "consultations", || {
        "no phone consultations".into()
    });
    let stray = consultations
        .iter()
        .filter(|c| !week_of(c.start_utc_ms).is_some_and(|w| PN_CONSULTATION_WEEKS.contains(&w)))
        .count();
    f.require(stray == 0, "consultation_weeks", || {
        format!("{stray} consultations outside the consultation weeks")
    });
    f.require(
        annotations
            .iter()
            .all(|a| a.validate().is_ok() && a.end_utc_ms - a.start_utc_ms <= 8 * 24 * MS_PER_HOUR),
        "annotations_valid",
        || "an annotation is invalid or implausibly long".into(),
    );
    f.0
}
