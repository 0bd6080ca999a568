//! Synthetic datasets for tests and demos.
//!
//! [`generate_pn`] builds the 100-day single-participant case: press times,
//! therapy-session and phone-consultation annotations and a week-long gap.
//! [`check_pn`] re-derives every contractual property from the press log
//! alone, and [`simulate_pn`] pushes the log through the simulated device
//! and link so the host store is produced the same way real data would be.

mod check;
mod pn;
mod simulate;

pub use check::{check_pn, ConstraintFailure};
pub use pn::{generate_pn, pn_config, PnScenario, ScenarioError};
pub use simulate::{simulate_pn, SimOptions, SimulatedDataset, PN_DEVICE_ID};

/// Observations per local hour of the case, hour 0 first.
pub const PN_HOURLY_COUNTS: [u32; 24] = [
    11, 3, 0, 7, 2, 8, 16, 14, 32, 30, 20, 40, 67, 33, 53, 30, 61, 44, 24, 54, 36, 15, 38, 9,
];

/// Published percentages of [`PN_HOURLY_COUNTS`], in tenths of a percent.
pub const PN_HOURLY_PERCENT_TENTHS: [u32; 24] = [
    17, 5, 0, 11, 3, 12, 25, 22, 49, 46, 31, 62, 104, 51, 82, 46, 94, 68, 37, 83, 56, 23, 59, 14,
];

pub const PN_DAYS: u32 = 100;
pub const PN_OBSERVATIONS: u32 = 647;
pub const PN_SESSIONS: usize = 25;
/// Days with no data because of a device fault.
pub const PN_GAP_DAYS: std::ops::RangeInclusive<u32> = 8..=14;
/// Weeks with phone consultations instead of sessions.
pub const PN_CONSULTATION_WEEKS: std::ops::RangeInclusive<u32> = 7..=11;
pub const PN_BASELINE_DAYS: std::ops::RangeInclusive<u32> = 15..=42;
pub const PN_CRISIS_DAYS: std::ops::RangeInclusive<u32> = 43..=72;
/// Stray single presses, as a fraction of observations.
pub const PN_FALSE_POSITIVE_RATE: f64 = 0.05;
/// Inter-press delay of a protocol double press.
pub const PN_DOUBLE_PRESS_MS: std::ops::RangeInclusive<i64> = 300..=1200;

/// Number of stray presses injected into the case.
pub fn pn_false_positive_count() -> usize {
    (f64::from(PN_OBSERVATIONS) * PN_FALSE_POSITIVE_RATE).round() as usize
}

/// 1-based week of a 1-based day index.
pub fn week_of_day(day_index: u32) -> u32 {
    (day_index - 1) / 7 + 1
}
