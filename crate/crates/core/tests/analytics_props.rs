use obs_core::analytics::quantile::quartiles;
use obs_core::analytics::{
    daily_series, hourly, percent_tenths, period_compare, weekday_summary, BoxStats, DayRange,
    QuartileMethod,
};
use obs_core::time::{MS_PER_DAY, MS_PER_HOUR};
use obs_core::{Annotation, AnnotationKind, CivilDate, DatasetConfig};
use proptest::prelude::*;

/// Tukey hinges straight from the definition: depth of the median is
/// (n+1)/2, depth of the hinges is (floor(median depth)+1)/2, counted from
/// either end; half depths average two order statistics.
fn hinge_oracle(sample: &[f64]) -> (f64, f64, f64) {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let at_depth = |d: f64, from_top: bool| {
        let idx = |k: f64| {
            if from_top {
                s.len() - k as usize
            } else {
                k as usize - 1
            }
        };
        (s[idx(d.floor())] + s[idx(d.ceil())]) / 2.0
    };
    let md = (n + 1.0) / 2.0;
    let hd = (md.floor() + 1.0) / 2.0;
    (at_depth(hd, false), at_depth(md, false), at_depth(hd, true))
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..60).prop_map(f64::from), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1024))]

    #[test]
    fn hinges_match_definition(s in sample()) {
        let b = BoxStats::new(&s, QuartileMethod::TukeyHinges).unwrap();
        prop_assert_eq!((b.q1, b.median, b.q3), hinge_oracle(&s));
        prop_assert!(b.is_ordered(), "{:?}", b);
        let reach = 1.5 * (b.q3 - b.q1);
        prop_assert!(b.outliers.iter().all(|&v| v < b.q1 - reach || v > b.q3 + reach));
        prop_assert_eq!(b.outliers.len() + s.iter().filter(|&&v| v >= b.whisker_low && v <= b.whisker_high).count(), s.len());
    }

    #[test]
    fn linear_quartiles_are_ordered(s in sample()) {
        let mut sorted = s.clone();
        sorted.sort_by(f64::total_cmp);
        let (q1, m, q3) = quartiles(&sorted, QuartileMethod::Linear);
        prop_assert!(sorted[0] <= q1 && q1 <= m && m <= q3 && q3 <= sorted[sorted.len() - 1]);
        // interpolated quartiles need not be sample points, so a whisker may end inside the box
        let b = BoxStats::new(&s, QuartileMethod::Linear).unwrap();
        prop_assert!(b.min <= b.whisker_low && b.whisker_high <= b.max && b.whisker_low <= b.whisker_high);
    }

    #[test]
    fn hourly_counts_everything(offsets in prop::collection::vec(0i64..30 * MS_PER_DAY, 0..300), tz in -840i32..=840) {
        let config = DatasetConfig::new(CivilDate::new(2016, 2, 1).unwrap(), tz, 30).unwrap();
        let obs: Vec<i64> = offsets.iter().map(|o| config.day_start_utc_ms(1) + o).collect();
        let h = hourly(&obs, &config);
        prop_assert_eq!(h.total as usize, obs.len());
        prop_assert_eq!(h.counts.iter().sum::<u32>(), h.total);
        for hour in 0..24 {
            let c = h.counts[hour];
            let exact = if h.total == 0 { 0.0 } else { 1000.0 * f64::from(c) / f64::from(h.total) };
            prop_assert!((f64::from(h.percent_tenths[hour]) - exact).abs() <= 0.5);
        }
    }

    #[test]
    fn gap_days_are_excluded_not_zero(
        offsets in prop::collection::vec(0i64..28 * MS_PER_DAY, 0..200),
        gap_first in 1u32..28,
        gap_len in 1u32..6,
    ) {
        let config = DatasetConfig::new(CivilDate::new(2016, 2, 1).unwrap(), 60, 28).unwrap();
        let gap_last = (gap_first + gap_len - 1).min(28);
        let gap = Annotation::new(AnnotationKind::Gap, config.day_start_utc_ms(gap_first), config.day_start_utc_ms(gap_last + 1));
        let obs: Vec<i64> = offsets.iter().map(|o| config.day_start_utc_ms(1) + o).collect();
        let series = daily_series(&obs, std::slice::from_ref(&gap), &config);
        for row in &series.days {
            prop_assert_eq!(row.excluded, (gap_first..=gap_last).contains(&row.day_index));
        }
        let summary = weekday_summary(&obs, std::slice::from_ref(&gap), &config);
        let n: usize = summary.days.iter().map(|d| d.sample.len()).sum();
        prop_assert_eq!(n as u32, 28 - (gap_last - gap_first + 1));
        if let Ok(c) = period_compare(&obs, std::slice::from_ref(&gap), &config, DayRange::new(1, 28), DayRange::new(1, 28)) {
            prop_assert_eq!(c.a.days_counted, n as u32);
        }
    }
}

#[test]
fn percent_rounding_is_half_up() {
    assert_eq!(percent_tenths(1, 16), 63); // 62.5 tenths
    assert_eq!(percent_tenths(3, 16), 188);
    assert_eq!(percent_tenths(0, 0), 0);
    assert_eq!(percent_tenths(5, 5), 1000);
}

#[test]
fn hour_uses_local_offset() {
    let config = DatasetConfig::new(CivilDate::new(2016, 2, 1).unwrap(), 60, 2).unwrap();
    let t = config.day_start_utc_ms(1) + 23 * MS_PER_HOUR + 30 * 60_000;
    assert_eq!(hourly(&[t], &config).counts[23], 1);
}
