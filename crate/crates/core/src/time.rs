//! Calendar arithmetic for fixed-offset local time.
//!
//! All binning in the pipeline goes through [`local_parts`]. A dataset uses a
//! single UTC offset for its whole duration, so there are no DST transitions
//! and every day is exactly 24 hours long.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MS_PER_SECOND: i64 = 1_000;
pub const MS_PER_MINUTE: i64 = 60 * MS_PER_SECOND;
pub const MS_PER_HOUR: i64 = 60 * MS_PER_MINUTE;
pub const MS_PER_DAY: i64 = 24 * MS_PER_HOUR;

/// Largest accepted magnitude of a UTC offset, in minutes.
pub const MAX_UTC_OFFSET_MINUTES: i32 = 14 * 60;

pub const DEFAULT_BURST_GAP_MS: u64 = 2_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TimeError {
    #[error("timestamp {t_utc_ms} falls before local midnight of day 1 ({start})")]
    TimeBeforeStart { t_utc_ms: i64, start: CivilDate },
    #[error("invalid calendar date {0:?}")]
    InvalidDate(String),
    #[error("utc offset {0} minutes is outside ±{MAX_UTC_OFFSET_MINUTES}")]
    OffsetOutOfRange(i32),
    #[error("burst gap must be positive")]
    ZeroBurstGap,
    #[error("day count must be positive")]
    ZeroDayCount,
}

/// Proleptic Gregorian calendar date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CivilDate {
    year: i32,
    month: u8,
    day: u8,
}

impl CivilDate {
    pub fn new(year: i32, month: u8, day: u8) -> Result<Self, TimeError> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return Err(TimeError::InvalidDate(format!(
                "{year:04}-{month:02}-{day:02}"
            )));
        }
        Ok(Self { year, month, day })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u8 {
        self.month
    }

    pub fn day(self) -> u8 {
        self.day
    }

    /// Days since 1970-01-01.
    pub fn days_since_epoch(self) -> i64 {
        let (m, d) = (i64::from(self.month), i64::from(self.day));
        let y = i64::from(self.year) - i64::from(m <= 2);
        let era = y.div_euclid(400);
        let yoe = y - era * 400;
        let mp = (m + 9) % 12;
        let doy = (153 * mp + 2) / 5 + d - 1;
        let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
        era * 146_097 + doe - 719_468
    }

    pub fn from_days_since_epoch(days: i64) -> Self {
        let z = days + 719_468;
        let era = z.div_euclid(146_097);
        let doe = z - era * 146_097;
        let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
        let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
        let mp = (5 * doy + 2) / 153;
        let day = doy - (153 * mp + 2) / 5 + 1;
        let month = if mp < 10 { mp + 3 } else { mp - 9 };
        let year = yoe + era * 400 + i64::from(month <= 2);
        Self {
            year: year as i32,
            month: month as u8,
            day: day as u8,
        }
    }

    pub fn weekday(self) -> Weekday {
        Weekday::from_days_since_epoch(self.days_since_epoch())
    }

    pub fn add_days(self, n: i64) -> Self {
        Self::from_days_since_epoch(self.days_since_epoch() + n)
    }
}

fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        2 => 28,
        _ => 0,
    }
}

impl fmt::Display for CivilDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for CivilDate {
    type Err = TimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TimeError::InvalidDate(s.to_owned());
        let mut parts = s.splitn(3, '-');
        let (Some(y), Some(m), Some(d)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        if y.len() != 4 || m.len() != 2 || d.len() != 2 {
            return Err(bad());
        }
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        let day = d.parse().map_err(|_| bad())?;
        CivilDate::new(year, month, day)
    }
}

impl TryFrom<String> for CivilDate {
    type Error = TimeError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<CivilDate> for String {
    fn from(value: CivilDate) -> Self {
        value.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];

    fn from_days_since_epoch(days: i64) -> Self {
        // 1970-01-01 was a Thursday.
        Self::ALL[(days + 3).rem_euclid(7) as usize]
    }

    /// Zero-based position with Monday first.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_weekend(self) -> bool {
        matches!(self, Weekday::Sat | Weekday::Sun)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Weekday::Mon => "Mon",
            Weekday::Tue => "Tue",
            Weekday::Wed => "Wed",
            Weekday::Thu => "Thu",
            Weekday::Fri => "Fri",
            Weekday::Sat => "Sat",
            Weekday::Sun => "Sun",
        }
    }
}

impl fmt::Display for Weekday {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Calendar frame of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetConfig {
    /// Local date of day 1.
    pub start_date: CivilDate,
    pub utc_offset_minutes: i32,
    #[serde(default = "default_burst_gap")]
    pub burst_gap_ms: u64,
    pub day_count: u32,
}

fn default_burst_gap() -> u64 {
    DEFAULT_BURST_GAP_MS
}

impl DatasetConfig {
    pub fn new(
        start_date: CivilDate,
        utc_offset_minutes: i32,
        day_count: u32,
    ) -> Result<Self, TimeError> {
        let config = Self {
            start_date,
            utc_offset_minutes,
            burst_gap_ms: DEFAULT_BURST_GAP_MS,
            day_count,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_burst_gap(mut self, burst_gap_ms: u64) -> Result<Self, TimeError> {
        self.burst_gap_ms = burst_gap_ms;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), TimeError> {
        if self.utc_offset_minutes.abs() > MAX_UTC_OFFSET_MINUTES {
            return Err(TimeError::OffsetOutOfRange(self.utc_offset_minutes));
        }
        if self.burst_gap_ms == 0 {
            return Err(TimeError::ZeroBurstGap);
        }
        if self.day_count == 0 {
            return Err(TimeError::ZeroDayCount);
        }
        Ok(())
    }

    fn offset_ms(&self) -> i64 {
        i64::from(self.utc_offset_minutes) * MS_PER_MINUTE
    }

    /// UTC instant of local midnight starting `day_index`.
    pub fn day_start_utc_ms(&self, day_index: u32) -> i64 {
        let local_day = self.start_date.days_since_epoch() + i64::from(day_index) - 1;
        local_day * MS_PER_DAY - self.offset_ms()
    }

    /// Half-open UTC window `[midnight, next midnight)` of a local day.
    pub fn day_window(&self, day_index: u32) -> Range<i64> {
        let start = self.day_start_utc_ms(day_index);
        start..start + MS_PER_DAY
    }

    /// Half-open UTC window covering days `1..=day_count`.
    pub fn dataset_window(&self) -> Range<i64> {
        self.day_start_utc_ms(1)..self.day_start_utc_ms(self.day_count + 1)
    }

    /// The same calendar narrowed to the days that `range` touches, or
    /// `None` when the range misses the dataset.
    pub fn restricted(&self, range: Range<i64>) -> Option<DatasetConfig> {
        let window = self.dataset_window();
        let (start, end) = (range.start.max(window.start), range.end.min(window.end));
        if start >= end {
            return None;
        }
        let first = local_parts(start, self).ok()?.day_index;
        let last = local_parts(end - 1, self).ok()?.day_index;
        Some(DatasetConfig {
            start_date: self.date_of_day(first),
            day_count: last - first + 1,
            ..self.clone()
        })
    }

    pub fn date_of_day(&self, day_index: u32) -> CivilDate {
        self.start_date.add_days(i64::from(day_index) - 1)
    }

    /// Local calendar date and millisecond-of-day of an instant.
    pub fn local_datetime(&self, t_utc_ms: i64) -> (CivilDate, i64) {
        let local = t_utc_ms + self.offset_ms();
        (
            CivilDate::from_days_since_epoch(local.div_euclid(MS_PER_DAY)),
            local.rem_euclid(MS_PER_DAY),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalParts {
    pub day_index: u32,
    pub weekday: Weekday,
    pub hour: u8,
}

/// Day index, weekday and hour of `t_utc_ms` in the dataset's local time.
pub fn local_parts(t_utc_ms: i64, config: &DatasetConfig) -> Result<LocalParts, TimeError> {
    let local = t_utc_ms + config.offset_ms();
    let local_day = local.div_euclid(MS_PER_DAY);
    let first = config.start_date.days_since_epoch();
    if local_day < first {
        return Err(TimeError::TimeBeforeStart {
            t_utc_ms,
            start: config.start_date,
        });
    }
    let day_index = u32::try_from(local_day - first + 1).unwrap_or(u32::MAX);
    Ok(LocalParts {
        day_index,
        weekday: Weekday::from_days_since_epoch(local_day),
        hour: (local.rem_euclid(MS_PER_DAY) / MS_PER_HOUR) as u8,
    })
}

/// `HH:MM:SS` for a millisecond-of-day.
pub fn format_time_of_day(ms_of_day: i64) -> String {
    let s = ms_of_day / MS_PER_SECOND;
    format!("{:02}:{:02}:{:02}", s / 3600, (s / 60) % 60, s % 60)
}
