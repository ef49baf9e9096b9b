//! Coincidence-window selection, the toy selection criteria, window sweeps,
//! and the analytic probability that a pair survives the window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::TrialRecord;
use crate::stats::{joint_cell, ChshReport, CorrelationEstimate};

/// Largest accepted difference of the two delays, in time units. A trial is
/// retained when `|t1 - t2| < width` (strictly).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CoincidenceWindow {
    pub width: f64,
}

impl CoincidenceWindow {
    pub fn new(width: f64) -> Result<Self> {
        if !(width.is_finite() && width >= 0.0) {
            return Err(Error::Config(format!("window width must be >= 0, got {width}")));
        }
        Ok(Self { width })
    }

    /// A window given as a fraction of the time scale `T`.
    pub fn from_fraction(fraction: f64, time_scale: f64) -> Result<Self> {
        Self::new(fraction * time_scale)
    }

    #[inline]
    pub fn accepts(&self, t1: f64, t2: f64) -> bool {
        (t1 - t2).abs() < self.width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub retained: Vec<TrialRecord>,
    pub total: usize,
}

impl FilterOutcome {
    pub fn retained_count(&self) -> usize {
        self.retained.len()
    }
}

/// Keeps the trials whose delays differ by less than the window, in order.
pub fn coincidence_filter(trials: &[TrialRecord], window: CoincidenceWindow) -> FilterOutcome {
    FilterOutcome {
        retained: trials
            .iter()
            .filter(|t| window.accepts(t.t1, t.t2))
            .copied()
            .collect(),
        total: trials.len(),
    }
}

/// The three pairing criteria on `x + y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ToyCriterion {
    /// keep only `x + y = 2`
    SumPlusTwo,
    /// keep only `x + y = -2`
    SumMinusTwo,
    /// keep only `x + y = 0`
    SumZero,
}

impl ToyCriterion {
    pub fn keeps(self, x: i8, y: i8) -> bool {
        let sum = i16::from(x) + i16::from(y);
        match self {
            ToyCriterion::SumPlusTwo => sum == 2,
            ToyCriterion::SumMinusTwo => sum == -2,
            ToyCriterion::SumZero => sum == 0,
        }
    }
}

impl std::fmt::Display for ToyCriterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ToyCriterion::SumPlusTwo => "plus2",
            ToyCriterion::SumMinusTwo => "minus2",
            ToyCriterion::SumZero => "zero",
        })
    }
}

impl std::str::FromStr for ToyCriterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus2" | "sum_plus_two" => Ok(ToyCriterion::SumPlusTwo),
            "minus2" | "sum_minus_two" => Ok(ToyCriterion::SumMinusTwo),
            "zero" | "sum_zero" => Ok(ToyCriterion::SumZero),
            other => Err(Error::Config(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Retained pairs of a toy selection. `estimate` carries both `E` and the
/// full 2×2 frequency table, since the two summarize the sub-sample
/// differently.
#[derive(Debug, Clone, PartialEq)]
pub struct ToySelection {
    pub retained: Vec<(i8, i8)>,
    pub estimate: CorrelationEstimate,
}

pub fn toy_postselect(samples: &[(i8, i8)], criterion: ToyCriterion) -> Result<ToySelection> {
    if samples.is_empty() {
        return Err(Error::NoData("no samples to post-select".into()));
    }
    if let Some(bad) = samples.iter().find(|(x, y)| x.abs() != 1 || y.abs() != 1) {
        return Err(Error::Domain(format!("sample {bad:?} is not a pair of ±1 values")));
    }
    let retained: Vec<(i8, i8)> = samples
        .iter()
        .copied()
        .filter(|&(x, y)| criterion.keeps(x, y))
        .collect();
    if retained.is_empty() {
        return Err(Error::NoData(format!("no data after post-selection with {criterion:?}")));
    }
    let estimate = crate::stats::estimate_correlation(retained.iter().copied())?;
    Ok(ToySelection { retained, estimate })
}

/// One window of a sweep. `report` is `None` when some setting pair kept no
/// trials at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub window: CoincidenceWindow,
    pub window_over_t: f64,
    pub retained: [u64; 4],
    pub totals: [u64; 4],
    pub report: Option<ChshReport>,
}

impl SweepRow {
    pub fn retention(&self) -> [f64; 4] {
        std::array::from_fn(|k| {
            if self.totals[k] == 0 {
                0.0
            } else {
                self.retained[k] as f64 / self.totals[k] as f64
            }
        })
    }

    pub fn retention_min(&self) -> f64 {
        self.retention().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn min_retained(&self) -> u64 {
        self.retained.into_iter().min().unwrap_or(0)
    }

    pub fn insufficient(&self) -> bool {
        self.report.is_none()
    }
}

/// Applies every window to the four per-setting trial sequences and
/// estimates the correlations and CHSH statistics of the survivors.
///
/// Sequence `k` is treated as setting pair `SettingPair::ALL[k]`. Windows
/// must be non-decreasing; `time_scale` only labels rows with `W / T`.
pub fn window_sweep(
    trials_by_setting: [&[TrialRecord]; 4],
    windows: &[CoincidenceWindow],
    time_scale: f64,
) -> Result<Vec<SweepRow>> {
    if windows.windows(2).any(|w| w[1].width < w[0].width) {
        return Err(Error::Config("sweep windows must be sorted ascending".into()));
    }
    // (|t1 - t2|, joint cell) sorted by delay difference; each window then
    // takes a prefix.
    let sorted: Vec<Vec<(f64, usize)>> = trials_by_setting
        .iter()
        .map(|trials| {
            let mut v: Vec<(f64, usize)> = trials
                .iter()
                .map(|t| ((t.t1 - t.t2).abs(), joint_cell(t.x1, t.x2)))
                .collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        })
        .collect();

    let mut cursor = [0usize; 4];
    let mut counts = [[0u64; 4]; 4];
    let mut rows = Vec::with_capacity(windows.len());
    for &window in windows {
        for k in 0..4 {
            let seq = &sorted[k];
            while cursor[k] < seq.len() && seq[cursor[k]].0 < window.width {
                counts[k][seq[cursor[k]].1] += 1;
                cursor[k] += 1;
            }
        }
        let estimates: Option<Vec<CorrelationEstimate>> = counts
            .iter()
            .map(|c| CorrelationEstimate::from_counts(c[0], c[1], c[2], c[3]).ok())
            .collect();
        let report = estimates.map(|e| ChshReport::from_estimates([e[0], e[1], e[2], e[3]], Some(window)));
        rows.push(SweepRow {
            window,
            window_over_t: window.width / time_scale,
            retained: cursor.map(|c| c as u64),
            totals: std::array::from_fn(|k| sorted[k].len() as u64),
            report,
        });
    }
    Ok(rows)
}

/// Sweep over Protocol 1 style records, grouped by their setting-pair tag.
pub fn window_sweep_trials(
    trials: &[TrialRecord],
    windows: &[CoincidenceWindow],
    time_scale: f64,
) -> Result<Vec<SweepRow>> {
    let split = crate::protocols::split_by_setting(trials);
    window_sweep(
        [&split[0], &split[1], &split[2], &split[3]],
        windows,
        time_scale,
    )
}

/// Probability over `r1, r2` uniform on `[r_min, 1]` that
/// `|r1·s1_sq - r2·s2_sq| < w`.
///
/// `s1_sq`, `s2_sq` are the `|sin|^d` factors of the two delays and `w` is
/// the window in units of `T`. The accepted region is a band between two
/// parallel lines clipped to the square; its area is integrated exactly by
/// splitting at the kinks of the clipped chord length, which is linear
/// between them.
pub fn acceptance_probability(s1_sq: f64, s2_sq: f64, w: f64, r_min: f64) -> f64 {
    let (a, b, m) = (s1_sq.max(0.0), s2_sq.max(0.0), r_min.clamp(0.0, 1.0));
    if w <= 0.0 {
        return 0.0;
    }
    if w >= a.max(b) || m >= 1.0 {
        return 1.0;
    }
    let span = 1.0 - m;
    // accepted length of v ∈ [m, 1] at fixed u
    let chord = |u: f64| -> f64 {
        if b == 0.0 {
            if a * u < w {
                span
            } else {
                0.0
            }
        } else {
            let lo = ((a * u - w) / b).max(m);
            let hi = ((a * u + w) / b).min(1.0);
            (hi - lo).max(0.0)
        }
    };
    let mut cuts = vec![m, 1.0];
    if a > 0.0 {
        for c in [b * m + w, b + w, b * m - w, b - w] {
            let u = c / a;
            if u > m && u < 1.0 {
                cuts.push(u);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let area: f64 = cuts
        .windows(2)
        .map(|p| (p[1] - p[0]) * chord(0.5 * (p[0] + p[1])))
        .sum();
    (area / (span * span)).clamp(0.0, 1.0)
}
