//! Five-number summaries and box-plot whiskers.

use serde::Serialize;

/// How the lower and upper quartiles are computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum QuartileMethod {
    /// Medians of the lower and upper halves; for odd `n` the median
    /// belongs to both halves.
    #[default]
    TukeyHinges,
    /// Linear interpolation between order statistics at `p·(n-1)`. With
    /// this method a whisker can end inside the box, e.g. for `[0, 0, 7, 45]`.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxStats {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Smallest sample point at or above `q1 - 1.5·IQR`.
    pub whisker_low: f64,
    /// Largest sample point at or below `q3 + 1.5·IQR`.
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn linear(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// `(q1, median, q3)` of an ascending, non-empty sample.
pub fn quartiles(sorted: &[f64], method: QuartileMethod) -> (f64, f64, f64) {
    debug_assert!(!sorted.is_empty());
    match method {
        QuartileMethod::TukeyHinges => {
            let n = sorted.len();
            let half = n.div_ceil(2);
            (
                median_sorted(&sorted[..half]),
                median_sorted(sorted),
                median_sorted(&sorted[n - half..]),
            )
        }
        QuartileMethod::Linear => (
            linear(sorted, 0.25),
            linear(sorted, 0.5),
            linear(sorted, 0.75),
        ),
    }
}

impl BoxStats {
    /// `None` for an empty sample or one containing NaN.
    pub fn new(sample: &[f64], method: QuartileMethod) -> Option<Self> {
        if sample.is_empty() || sample.iter().any(|v| v.is_nan()) {
            return None;
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (q1, median, q3) = quartiles(&sorted, method);
        let reach = 1.5 * (q3 - q1);
        let (lo_fence, hi_fence) = (q1 - reach, q3 + reach);
        let inside = || {
            sorted
                .iter()
                .copied()
                .filter(|v| (lo_fence..=hi_fence).contains(v))
        };
        let whisker_low = inside().next().unwrap_or(q1);
        let whisker_high = inside().next_back().unwrap_or(q3);
        Some(Self {
            n: sorted.len(),
            min: sorted[0],
            q1,
            median,
            q3,
            max: sorted[sorted.len() - 1],
            whisker_low,
            whisker_high,
            outliers: sorted
                .iter()
                .copied()
                .filter(|v| !(lo_fence..=hi_fence).contains(v))
                .collect(),
        })
    }

    /// `min ≤ whisker_low ≤ q1 ≤ median ≤ q3 ≤ whisker_high ≤ max`.
    pub fn is_ordered(&self) -> bool {
        self.min <= self.whisker_low
            && self.whisker_low <= self.q1
            && self.q1 <= self.median
            && self.median <= self.q3
            && self.q3 <= self.whisker_high
            && self.whisker_high <= self.max
    }
}
