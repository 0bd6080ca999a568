use chrono::{Datelike, FixedOffset, NaiveDate, TimeZone, Timelike};
use obs_core::time::{MS_PER_DAY, MS_PER_HOUR};
use obs_core::{local_parts, CivilDate, DatasetConfig};
use proptest::prelude::*;

fn naive(d: CivilDate) -> NaiveDate {
    NaiveDate::from_ymd_opt(d.year(), u32::from(d.month()), u32::from(d.day())).unwrap()
}

proptest! {
    #[test]
    fn civil_dates_match_chrono(days in -400_000i64..400_000) {
        let d = CivilDate::from_days_since_epoch(days);
        let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).unwrap();
        prop_assert_eq!(naive(d), epoch + chrono::Duration::days(days));
        prop_assert_eq!(d.days_since_epoch(), days);
        prop_assert_eq!(d.weekday().index() as u32, naive(d).weekday().num_days_from_monday());
        prop_assert_eq!(d.to_string().parse::<CivilDate>().unwrap(), d);
    }

    #[test]
    fn local_parts_match_chrono(
        offset in -840i32..=840,
        start in -20_000i64..40_000,
        t in 0i64..400 * MS_PER_DAY,
    ) {
        let config = DatasetConfig::new(CivilDate::from_days_since_epoch(start), offset, 400).unwrap();
        let t = config.day_start_utc_ms(1) + t;
        let parts = local_parts(t, &config).unwrap();
        let local = FixedOffset::east_opt(offset * 60).unwrap().timestamp_millis_opt(t).unwrap();
        let expected_day = (local.date_naive() - naive(config.start_date)).num_days() + 1;
        prop_assert_eq!(i64::from(parts.day_index), expected_day);
        prop_assert_eq!(u32::from(parts.hour), local.hour());
        prop_assert_eq!(parts.weekday.index() as u32, local.weekday().num_days_from_monday());
        prop_assert_eq!(config.local_datetime(t).0, config.date_of_day(parts.day_index));
    }

    #[test]
    fn local_parts_are_monotone(offset in -840i32..=840, a in 0i64..50 * MS_PER_DAY, b in 0i64..50 * MS_PER_DAY) {
        let config = DatasetConfig::new(CivilDate::new(2016, 2, 1).unwrap(), offset, 50).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        let p = local_parts(config.day_start_utc_ms(1) + lo, &config).unwrap();
        let q = local_parts(config.day_start_utc_ms(1) + hi, &config).unwrap();
        prop_assert!((p.day_index, p.hour) <= (q.day_index, q.hour));
    }

    #[test]
    fn day_windows_tile(offset in -840i32..=840, day in 1u32..100) {
        let config = DatasetConfig::new(CivilDate::new(2016, 2, 1).unwrap(), offset, 100).unwrap();
        let w = config.day_window(day);
        prop_assert_eq!(w.end, config.day_start_utc_ms(day + 1));
        prop_assert_eq!(local_parts(w.start, &config).unwrap().day_index, day);
        prop_assert_eq!(local_parts(w.end - 1, &config).unwrap().day_index, day);
        prop_assert_eq!(local_parts(w.end - 1, &config).unwrap().hour, 23);
        prop_assert_eq!(local_parts(w.start + MS_PER_HOUR, &config).unwrap().hour, 1);
    }
}

#[test]
fn before_start_is_an_error() {
    let config = DatasetConfig::new(CivilDate::new(2016, 2, 1).unwrap(), 60, 100).unwrap();
    assert!(local_parts(config.day_start_utc_ms(1) - 1, &config).is_err());
}
