//! CSV and plain-text renderings of the reports.

use std::fmt::Write;

use super::{DailySeries, HourlyHistogram, PeriodComparison, WeekdaySummary};

pub const HOURLY_CSV_HEADER: &str = "hour,count,percentage";
pub const WEEKDAY_CSV_HEADER: &str =
    "weekday,n,min,q1,median,q3,max,whisker_low,whisker_high,outliers";
pub const DAILY_CSV_HEADER: &str = "day_index,local_date,count,excluded";
pub const COMPARE_CSV_HEADER: &str =
    "period,first_day,last_day,days_counted,observations,mean_per_day";

const BAR_WIDTH: u32 = 40;

pub fn hourly_csv(h: &HourlyHistogram) -> String {
    let mut out = format!("{HOURLY_CSV_HEADER}\n");
    for hour in 0..24 {
        writeln!(out, "{hour},{},{}", h.counts[hour], h.percentage_text(hour)).unwrap();
    }
    out
}

/// Hour table with a horizontal bar per hour, scaled to the busiest hour.
pub fn hourly_table(h: &HourlyHistogram) -> String {
    let peak = h.counts.iter().copied().max().unwrap_or(0).max(1);
    let mut out = String::from("hour  count      %\n");
    for hour in 0..24 {
        let bar = "#".repeat((h.counts[hour] * BAR_WIDTH).div_ceil(peak) as usize);
        writeln!(
            out,
            "{hour:>4} {:>6} {:>6}  {bar}",
            h.counts[hour],
            h.percentage_text(hour)
        )
        .unwrap();
    }
    writeln!(out, "total {:>5}", h.total).unwrap();
    out
}

fn num(v: f64) -> String {
    format!("{v:.1}")
}

pub fn weekday_csv(s: &WeekdaySummary) -> String {
    let mut out = format!("{WEEKDAY_CSV_HEADER}\n");
    for day in &s.days {
        match &day.stats {
            Some(b) => {
                let outliers: Vec<String> = b.outliers.iter().map(|&v| num(v)).collect();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    day.weekday,
                    b.n,
                    num(b.min),
                    num(b.q1),
                    num(b.median),
                    num(b.q3),
                    num(b.max),
                    num(b.whisker_low),
                    num(b.whisker_high),
                    outliers.join(";")
                )
                .unwrap();
            }
            None => writeln!(out, "{},0,,,,,,,,", day.weekday).unwrap(),
        }
    }
    out
}

pub fn weekday_table(s: &WeekdaySummary) -> String {
    let mut out =
        String::from("day    n    min     q1    med     q3    max   wlow  whigh  outliers\n");
    for day in &s.days {
        match &day.stats {
            Some(b) => {
                let outliers: Vec<String> = b.outliers.iter().map(|&v| num(v)).collect();
                writeln!(
                    out,
                    "{:<4}{:>3} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6}  {}",
                    day.weekday.as_str(),
                    b.n,
                    num(b.min),
                    num(b.q1),
                    num(b.median),
                    num(b.q3),
                    num(b.max),
                    num(b.whisker_low),
                    num(b.whisker_high),
                    outliers.join(" ")
                )
                .unwrap();
            }
            None => writeln!(out, "{:<4}{:>3}", day.weekday.as_str(), 0).unwrap(),
        }
    }
    out
}

pub fn daily_csv(s: &DailySeries) -> String {
    let mut out = format!("{DAILY_CSV_HEADER}\n");
    for d in &s.days {
        let count = d.count.map(|c| c.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{}",
            d.day_index, d.local_date, count, d.excluded
        )
        .unwrap();
    }
    out
}

/// One line per day with its weekday, count bar and band markers.
pub fn daily_table(s: &DailySeries) -> String {
    use crate::model::AnnotationKind;

    let peak = s
        .days
        .iter()
        .filter_map(|d| d.count)
        .max()
        .unwrap_or(0)
        .max(1);
    let mut out = String::from("day  date        dow  count  marks\n");
    for d in &s.days {
        let marks: String = [
            (AnnotationKind::Weekend, 'W'),
            (AnnotationKind::Session, 'S'),
            (AnnotationKind::PhoneConsultation, 'P'),
        ]
        .iter()
        .map(|&(kind, c)| {
            if s.bands_of(kind)
                .any(|b| (b.first_day..=b.last_day).contains(&d.day_index))
            {
                c
            } else {
                '.'
            }
        })
        .collect();
        let (count, bar) = match d.count {
            Some(c) => (
                c.to_string(),
                "*".repeat((c * BAR_WIDTH).div_ceil(peak) as usize),
            ),
            None => ("-".to_owned(), "(gap)".to_owned()),
        };
        writeln!(
            out,
            "{:>3}  {}  {}  {:>5}  {}    {}",
            d.day_index, d.local_date, d.weekday, count, marks, bar
        )
        .unwrap();
    }
    out
}

fn ratio_text(c: &PeriodComparison) -> String {
    c.ratio
        .map_or_else(|| "undefined".to_owned(), |r| format!("{r:.4}"))
}

pub fn compare_csv(c: &PeriodComparison) -> String {
    let mut out = format!("{COMPARE_CSV_HEADER}\n");
    for (name, p) in [("a", &c.a), ("b", &c.b)] {
        writeln!(
            out,
            "{name},{},{},{},{},{:.4}",
            p.range.first, p.range.last, p.days_counted, p.observations, p.mean_per_day
        )
        .unwrap();
    }
    writeln!(out, "ratio_b_over_a,,,,,{}", ratio_text(c)).unwrap();
    out
}

pub fn compare_table(c: &PeriodComparison) -> String {
    let mut out = String::from("period  days        counted  observations  mean/day\n");
    for (name, p) in [("a", &c.a), ("b", &c.b)] {
        writeln!(
            out,
            "{name:<7} {:>11} {:>8} {:>13} {:>9.3}",
            p.range.to_string(),
            p.days_counted,
            p.observations,
            p.mean_per_day
        )
        .unwrap();
    }
    writeln!(out, "ratio b/a: {}", ratio_text(c)).unwrap();
    out
}
