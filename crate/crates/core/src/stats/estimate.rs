use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::postselect::CoincidenceWindow;
use crate::protocols::{SettingPair, TrialRecord};

/// Joint outcome counts of one setting pair and the product-moment
/// correlation derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
    pub n_total: u64,
    pub e_value: f64,
}

impl CorrelationEstimate {
    pub fn from_counts(n_pp: u64, n_pm: u64, n_mp: u64, n_mm: u64) -> Result<Self> {
        let n_total = n_pp + n_pm + n_mp + n_mm;
        if n_total == 0 {
            return Err(Error::NoData("correlation of an empty sample".into()));
        }
        let num = (n_pp + n_mm) as i64 - (n_pm + n_mp) as i64;
        Ok(Self {
            n_pp,
            n_pm,
            n_mp,
            n_mm,
            n_total,
            e_value: num as f64 / n_total as f64,
        })
    }

    /// `n_pp + n_mm - n_pm - n_mp`.
    pub fn numerator(&self) -> i64 {
        (self.n_pp + self.n_mm) as i64 - (self.n_pm + self.n_mp) as i64
    }

    /// `sqrt((1 - E²) / n)`, the binomial standard error of `E`.
    pub fn standard_error(&self) -> f64 {
        ((1.0 - self.e_value * self.e_value).max(0.0) / self.n_total as f64).sqrt()
    }

    /// Frequencies of `(+,+), (+,-), (-,+), (-,-)`.
    pub fn distribution(&self) -> [f64; 4] {
        let n = self.n_total as f64;
        [self.n_pp, self.n_pm, self.n_mp, self.n_mm].map(|c| c as f64 / n)
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self::from_counts(
            self.n_pp + other.n_pp,
            self.n_pm + other.n_pm,
            self.n_mp + other.n_mp,
            self.n_mm + other.n_mm,
        )
        .expect("merged counts are nonempty")
    }
}

/// Counts the four joint outcomes of `(x1, x2)` pairs.
pub fn estimate_correlation<I>(pairs: I) -> Result<CorrelationEstimate>
where
    I: IntoIterator<Item = (i8, i8)>,
{
    let mut c = [0u64; 4];
    for (x1, x2) in pairs {
        c[joint_cell(x1, x2)] += 1;
    }
    CorrelationEstimate::from_counts(c[0], c[1], c[2], c[3])
}

pub fn estimate_trials(trials: &[TrialRecord]) -> Result<CorrelationEstimate> {
    estimate_correlation(trials.iter().map(|t| (t.x1, t.x2)))
}

#[inline]
pub(crate) fn joint_cell(x1: i8, x2: i8) -> usize {
    match (x1 > 0, x2 > 0) {
        (true, true) => 0,
        (true, false) => 1,
        (false, true) => 2,
        (false, false) => 3,
    }
}

/// `E(a,b) + E(a,b') + E(a',b) - E(a',b')` and the largest `|S|` over the
/// four placements of the single minus sign.
pub fn chsh(e_ab: f64, e_abp: f64, e_apb: f64, e_apbp: f64) -> Result<(f64, f64)> {
    let e = [e_ab, e_abp, e_apb, e_apbp];
    if let Some(bad) = e.iter().find(|v| !(-1.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("correlation {bad} outside [-1, 1]")));
    }
    let total: f64 = e.iter().sum();
    let s_max = e
        .iter()
        .map(|ek| (total - 2.0 * ek).abs())
        .fold(0.0, f64::max);
    Ok((e_ab + e_abp + e_apb - e_apbp, s_max))
}

/// The four estimates of one experiment and the CHSH statistics built on
/// them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshReport {
    pub e_ab: CorrelationEstimate,
    pub e_abp: CorrelationEstimate,
    pub e_apb: CorrelationEstimate,
    pub e_apbp: CorrelationEstimate,
    /// Minus sign on the `(a1', a2')` term.
    pub s_value: f64,
    pub s_max_over_sign_placements: f64,
    /// Setting pair carrying the minus sign in the maximizing placement.
    pub best_placement: SettingPair,
    pub s_standard_error: f64,
    pub window: Option<CoincidenceWindow>,
}

impl ChshReport {
    /// When all four estimates share a sample size, `S` is formed from the
    /// integer numerators with a single division, so `|S| = 2` exactly is
    /// not blurred by rounding.
    pub fn from_estimates(
        estimates: [CorrelationEstimate; 4],
        window: Option<CoincidenceWindow>,
    ) -> Self {
        let placement_sums: [f64; 4] = if estimates.iter().all(|e| e.n_total == estimates[0].n_total) {
            let nums = estimates.map(|e| e.numerator());
            let total: i64 = nums.iter().sum();
            let n = estimates[0].n_total as f64;
            nums.map(|k| (total - 2 * k) as f64 / n)
        } else {
            let e = estimates.map(|e| e.e_value);
            let total: f64 = e.iter().sum();
            e.map(|k| total - 2.0 * k)
        };
        let (best, s_max) = placement_sums
            .iter()
            .map(|s| s.abs())
            .enumerate()
            .fold((3, f64::NEG_INFINITY), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
        let variance: f64 = estimates
            .iter()
            .map(|e| e.standard_error().powi(2))
            .sum();
        Self {
            e_ab: estimates[0],
            e_abp: estimates[1],
            e_apb: estimates[2],
            e_apbp: estimates[3],
            s_value: placement_sums[3],
            s_max_over_sign_placements: s_max,
            best_placement: SettingPair::ALL[best],
            s_standard_error: variance.sqrt(),
            window,
        }
    }

    /// Estimates per setting from trial records tagged with their pair.
    pub fn from_trials(trials: &[TrialRecord], window: Option<CoincidenceWindow>) -> Result<Self> {
        let mut counts = [[0u64; 4]; 4];
        for t in trials {
            counts[t.pair.index()][joint_cell(t.x1, t.x2)] += 1;
        }
        let mut est = Vec::with_capacity(4);
        for (pair, c) in SettingPair::ALL.iter().zip(counts) {
            est.push(CorrelationEstimate::from_counts(c[0], c[1], c[2], c[3]).map_err(|_| {
                Error::NoData(format!("no trials for setting pair {pair:?}"))
            })?);
        }
        Ok(Self::from_estimates([est[0], est[1], est[2], est[3]], window))
    }

    pub fn estimates(&self) -> [CorrelationEstimate; 4] {
        [self.e_ab, self.e_abp, self.e_apb, self.e_apbp]
    }

    pub fn e_values(&self) -> [f64; 4] {
        self.estimates().map(|e| e.e_value)
    }

    pub fn violates_classical_bound(&self) -> bool {
        self.s_max_over_sign_placements > 2.0
    }
}

/// Total-variation distance `½ Σ |p_i - q_i|` between two distributions over
/// the four joint outcomes.
pub fn compare_distributions(p: &[f64; 4], q: &[f64; 4]) -> Result<f64> {
    for d in [p, q] {
        let sum: f64 = d.iter().sum();
        if d.iter().any(|v| !(*v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("{d:?} is not a probability distribution")));
        }
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}
