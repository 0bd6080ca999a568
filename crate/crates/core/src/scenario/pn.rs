use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::*;
use crate::model::{Annotation, AnnotationKind, DeviceId, Quality, RawPress};
use crate::time::{CivilDate, DatasetConfig, MS_PER_HOUR, MS_PER_MINUTE, MS_PER_SECOND};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("infeasible scenario constraints: {0}")]
    InfeasibleConstraints(String),
}

/// The generated case before it touches any device.
#[derive(Debug, Clone, PartialEq)]
pub struct PnScenario {
    pub config: DatasetConfig,
    /// True wall time of every press, ascending.
    pub press_times: Vec<i64>,
    pub annotations: Vec<Annotation>,
}

impl PnScenario {
    /// The press log as a perfectly synced device with an exact clock would
    /// deliver it: one boot at the start of day 1, seqs in time order.
    pub fn ideal_presses(&self, device_id: &DeviceId) -> Vec<RawPress> {
        let boot = self.config.day_start_utc_ms(1);
        self.press_times
            .iter()
            .enumerate()
            .map(|(i, &t)| RawPress {
                device_id: device_id.clone(),
                boot_id: 0,
                seq: i as u32,
                uptime_ms: (t - boot) as u64,
                t_utc_ms: t,
                quality: Quality::Anchored,
            })
            .collect()
    }
}

/// Calendar frame of the case: 100 days from Monday 2016-02-01 at UTC+1.
pub fn pn_config() -> DatasetConfig {
    DatasetConfig::new(CivilDate::new(2016, 2, 1).expect("valid date"), 60, PN_DAYS)
        .expect("valid config")
}

const WEEKDAY_WEIGHT: f64 = 2.5;
const WEEKEND_WEIGHT: f64 = 1.0;
const CRISIS_FACTOR: f64 = 1.2;
const MAX_ATTEMPTS: usize = 10_000;

/// Each hour is cut into slots; a slot holds at most one press or double
/// press, which keeps separate signals far apart and away from hour edges.
const SLOT_ORIGIN_MS: i64 = MS_PER_MINUTE;
const SLOT_MS: i64 = 2 * MS_PER_MINUTE;
const SLOTS_PER_HOUR: usize = 29;
const SLOT_JITTER_MS: i64 = 30 * MS_PER_SECOND;
/// Closest two presses from different slots can get.
const MIN_SLOT_SEPARATION_MS: i64 = SLOT_MS - SLOT_JITTER_MS - 1_200;

type Grid = Vec<[u32; 24]>;

fn day_weight(config: &DatasetConfig, day: u32) -> f64 {
    let base = if config.date_of_day(day).weekday().is_weekend() {
        WEEKEND_WEIGHT
    } else {
        WEEKDAY_WEIGHT
    };
    if PN_CRISIS_DAYS.contains(&day) {
        base * CRISIS_FACTOR
    } else {
        base
    }
}

fn mean(values: impl Iterator<Item = u32>) -> f64 {
    let (sum, n) = values.fold((0u64, 0u64), |(s, n), v| (s + u64::from(v), n + 1));
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

fn day_level_ok(grid: &Grid, eligible: &[u32], config: &DatasetConfig) -> bool {
    let total = |d: u32| grid[d as usize].iter().sum::<u32>();
    if grid.iter().flatten().any(|&c| c as usize > SLOTS_PER_HOUR) {
        return false;
    }
    let is_weekend = |d: &u32| config.date_of_day(*d).weekday().is_weekend();
    let weekday_mean = mean(
        eligible
            .iter()
            .filter(|d| !is_weekend(d))
            .map(|&d| total(d)),
    );
    let weekend_mean = mean(eligible.iter().filter(|d| is_weekend(d)).map(|&d| total(d)));
    let baseline = mean(PN_BASELINE_DAYS.filter(|d| eligible.contains(d)).map(total));
    let crisis = mean(PN_CRISIS_DAYS.filter(|d| eligible.contains(d)).map(total));
    weekday_mean >= 2.0 * weekend_mean
        && baseline > 0.0
        && crisis > baseline
        && crisis <= 1.5 * baseline
}

/// Generates the case dataset. Deterministic in `seed`.
pub fn generate_pn(seed: u64, config: &DatasetConfig) -> Result<PnScenario, ScenarioError> {
    let infeasible = |msg: String| Err(ScenarioError::InfeasibleConstraints(msg));
    if config.day_count != PN_DAYS {
        return infeasible(format!(
            "the case spans {PN_DAYS} days, config has {}",
            config.day_count
        ));
    }
    if config.burst_gap_ms < *PN_DOUBLE_PRESS_MS.end() as u64
        || config.burst_gap_ms as i64 >= MIN_SLOT_SEPARATION_MS
    {
        return infeasible(format!(
            "burst gap {} ms must lie in [{}, {MIN_SLOT_SEPARATION_MS}) ms",
            config.burst_gap_ms,
            PN_DOUBLE_PRESS_MS.end()
        ));
    }
    config
        .validate()
        .map_err(|e| ScenarioError::InfeasibleConstraints(e.to_string()))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<u32> = (1..=PN_DAYS).filter(|d| !PN_GAP_DAYS.contains(d)).collect();
    let weights: Vec<f64> = eligible.iter().map(|&d| day_weight(config, d)).collect();
    let pick_day = WeightedIndex::new(&weights).expect("positive weights");

    let mut grid: Option<Grid> = None;
    for _ in 0..MAX_ATTEMPTS {
        let mut candidate: Grid = vec![[0; 24]; PN_DAYS as usize + 1];
        for (hour, &budget) in PN_HOURLY_COUNTS.iter().enumerate() {
            for _ in 0..budget {
                candidate[eligible[rng.sample(&pick_day)] as usize][hour] += 1;
            }
        }
        if day_level_ok(&candidate, &eligible, config) {
            grid = Some(candidate);
            break;
        }
    }
    let Some(grid) = grid else {
        return infeasible(format!(
            "no day-level placement satisfied the constraints in {MAX_ATTEMPTS} attempts"
        ));
    };

    let mut occupied: HashMap<(u32, usize), Vec<bool>> = HashMap::new();
    let mut press_times =
        Vec::with_capacity(2 * PN_OBSERVATIONS as usize + pn_false_positive_count());
    let slot_start = |day: u32, hour: usize, slot: usize| {
        config.day_start_utc_ms(day)
            + hour as i64 * MS_PER_HOUR
            + SLOT_ORIGIN_MS
            + slot as i64 * SLOT_MS
    };
    for &day in &eligible {
        for (hour, &k) in grid[day as usize].iter().enumerate() {
            let k = k as usize;
            if k == 0 {
                continue;
            }
            let taken = occupied
                .entry((day, hour))
                .or_insert_with(|| vec![false; SLOTS_PER_HOUR]);
            for slot in index::sample(&mut rng, SLOTS_PER_HOUR, k) {
                taken[slot] = true;
                let first = slot_start(day, hour, slot) + rng.random_range(0..=SLOT_JITTER_MS);
                press_times.push(first);
                press_times.push(first + rng.random_range(PN_DOUBLE_PRESS_MS));
            }
        }
    }

    let mut strays = 0;
    while strays < pn_false_positive_count() {
        let day = eligible[rng.random_range(0..eligible.len())];
        let hour = rng.random_range(0..24);
        let taken = occupied
            .entry((day, hour))
            .or_insert_with(|| vec![false; SLOTS_PER_HOUR]);
        let free: Vec<usize> = (0..SLOTS_PER_HOUR).filter(|&s| !taken[s]).collect();
        if free.is_empty() {
            continue;
        }
        let slot = free[rng.random_range(0..free.len())];
        taken[slot] = true;
        press_times.push(slot_start(day, hour, slot) + rng.random_range(0..=SLOT_JITTER_MS));
        strays += 1;
    }
    press_times.sort_unstable();

    let mut annotations = vec![Annotation::new(
        AnnotationKind::Gap,
        config.day_start_utc_ms(*PN_GAP_DAYS.start()),
        config.day_start_utc_ms(*PN_GAP_DAYS.end() + 1),
    )
    .with_label("device fault: no data collected")];
    annotations.extend(sessions(&mut rng, config)?);
    annotations.extend(consultations(&mut rng, config));
    annotations.sort_by_key(|a| (a.start_utc_ms, a.kind));

    Ok(PnScenario {
        config: config.clone(),
        press_times,
        annotations,
    })
}

fn weekdays_of_week(config: &DatasetConfig, week: u32) -> Vec<u32> {
    let first = (week - 1) * 7 + 1;
    (first..first + 7)
        .filter(|&d| d <= config.day_count && !config.date_of_day(d).weekday().is_weekend())
        .collect()
}

fn sessions(
    rng: &mut ChaCha8Rng,
    config: &DatasetConfig,
) -> Result<Vec<Annotation>, ScenarioError> {
    let weeks: Vec<(u32, Vec<u32>)> = (1..=week_of_day(config.day_count))
        .filter(|w| !PN_CONSULTATION_WEEKS.contains(w))
        .map(|w| (w, weekdays_of_week(config, w)))
        .collect();
    if weeks.iter().any(|(_, days)| days.len() < 2) {
        return Err(ScenarioError::InfeasibleConstraints(
            "a session week has fewer than two weekdays".into(),
        ));
    }
    let extras = PN_SESSIONS.checked_sub(2 * weeks.len());
    let roomy: Vec<usize> = (0..weeks.len())
        .filter(|&i| weeks[i].1.len() >= 3)
        .collect();
    let Some(extras) = extras.filter(|&e| e <= roomy.len()) else {
        return Err(ScenarioError::InfeasibleConstraints(format!(
            "{PN_SESSIONS} sessions do not fit 2-3 per week over {} weeks",
            weeks.len()
        )));
    };
    let mut per_week = vec![2usize; weeks.len()];
    for i in index::sample(rng, roomy.len(), extras) {
        per_week[roomy[i]] += 1;
    }

    let mut out = Vec::with_capacity(PN_SESSIONS);
    for ((_, days), k) in weeks.iter().zip(per_week) {
        let mut picked: Vec<u32> = index::sample(rng, days.len(), k)
            .into_iter()
            .map(|i| days[i])
            .collect();
        picked.sort_unstable();
        for day in picked {
            let start = config.day_start_utc_ms(day)
                + 13 * MS_PER_HOUR
                + rng.random_range(0..=6) * 30 * MS_PER_MINUTE;
            out.push(Annotation::new(
                AnnotationKind::Session,
                start,
                start + MS_PER_HOUR,
            ));
        }
    }
    for (i, a) in out.iter_mut().enumerate() {
        a.label = Some(format!("therapy session {}", i + 1));
    }
    Ok(out)
}

fn consultations(rng: &mut ChaCha8Rng, config: &DatasetConfig) -> Vec<Annotation> {
    let mut out = Vec::new();
    for week in PN_CONSULTATION_WEEKS {
        let days = weekdays_of_week(config, week);
        if days.is_empty() {
            continue;
        }
        let k = rng.random_range(1..=2).min(days.len());
        let mut picked: Vec<u32> = index::sample(rng, days.len(), k)
            .into_iter()
            .map(|i| days[i])
            .collect();
        picked.sort_unstable();
        for day in picked {
            let start = config.day_start_utc_ms(day)
                + 10 * MS_PER_HOUR
                + rng.random_range(0..=4) * 30 * MS_PER_MINUTE;
            out.push(
                Annotation::new(
                    AnnotationKind::PhoneConsultation,
                    start,
                    start + 20 * MS_PER_MINUTE,
                )
                .with_label("phone consultation"),
            );
        }
    }
    out
}
