//! Local peaks, peak power, PAPR statistics and the power covariance of
//! oversampled samples.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// One local peak of a time signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub value: Complex64,
    pub magnitude: f64,
}

impl Peak {
    pub fn angle(&self) -> f64 {
        self.value.arg()
    }
}

/// Local peaks sorted by descending magnitude, ties by ascending index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakSet {
    entries: Vec<Peak>,
}

impl PeakSet {
    pub fn entries(&self) -> &[Peak] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|p| p.index).collect()
    }

    /// The `n_p` highest peaks (all of them when fewer exist).
    pub fn top(&self, n_p: usize) -> PeakSet {
        PeakSet {
            entries: self.entries[..n_p.min(self.entries.len())].to_vec(),
        }
    }
}

/// Ordering used everywhere for peaks: larger power first, then lower index.
fn peak_order(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    b.0.total_cmp(&a.0).then(a.1.cmp(&b.1))
}

fn candidates(x: &[Complex64]) -> Vec<(f64, usize)> {
    let len = x.len();
    if len == 0 {
        return Vec::new();
    }
    let pw: Vec<f64> = x.iter().map(|v| v.norm_sqr()).collect();
    (0..len)
        .filter(|&n| {
            let prev = pw[(n + len - 1) % len];
            let next = pw[(n + 1) % len];
            pw[n] >= prev && pw[n] >= next
        })
        .map(|n| (pw[n], n))
        .collect()
}

fn into_peakset(x: &[Complex64], list: &[(f64, usize)]) -> PeakSet {
    PeakSet {
        entries: list
            .iter()
            .map(|&(pw, n)| Peak {
                index: n,
                value: x[n],
                magnitude: pw.sqrt(),
            })
            .collect(),
    }
}

/// All samples `n` with `|x[n]| >= max(|x[n-1]|, |x[n+1]|)` (indices mod `len`).
pub fn find_local_peaks(x: &[Complex64]) -> PeakSet {
    let mut list = candidates(x);
    list.sort_unstable_by(peak_order);
    into_peakset(x, &list)
}

/// Same as `top_peaks(&find_local_peaks(x), n_p)` using a partial sort.
pub fn find_top_local_peaks(x: &[Complex64], n_p: usize) -> PeakSet {
    top_local_peaks_with_count(x, n_p).0
}

/// The `n_p` highest local peaks and the total number of local peaks.
pub(crate) fn top_local_peaks_with_count(x: &[Complex64], n_p: usize) -> (PeakSet, usize) {
    let mut list = candidates(x);
    let found = list.len();
    if n_p < list.len() {
        if n_p == 0 {
            list.clear();
        } else {
            list.select_nth_unstable_by(n_p - 1, peak_order);
            list.truncate(n_p);
        }
    }
    list.sort_unstable_by(peak_order);
    (into_peakset(x, &list), found)
}

/// First `min(n_p, |P|)` entries of `peaks`.
pub fn top_peaks(peaks: &PeakSet, n_p: usize) -> PeakSet {
    peaks.top(n_p)
}

/// `max_n |x[n]|^2`.
pub fn peak_power(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max)
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

/// Peak power relative to `avg_power_ref`, in dB.
pub fn papr_db(x: &[Complex64], avg_power_ref: f64) -> Result<f64> {
    if !(avg_power_ref > 0.0) {
        return Err(Error::param("avg_power_ref", "must be positive"));
    }
    Ok(10.0 * (peak_power(x) / avg_power_ref).log10())
}

/// Result of a CCDF quantile query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcdfQuery {
    pub threshold_db: f64,
    /// Fewer than `10 / p` blocks were accumulated, or the quantile lies
    /// outside the grid.
    pub low_confidence: bool,
}

/// Empirical `P(PAPR > threshold)` on a fixed dB grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfAccumulator {
    start_db: f64,
    step_db: f64,
    exceed: Vec<u64>,
    total: u64,
}

impl Default for CcdfAccumulator {
    /// 0 to 14 dB in 0.1 dB steps.
    fn default() -> Self {
        Self::new(0.0, 0.1, 141)
    }
}

impl CcdfAccumulator {
    pub fn new(start_db: f64, step_db: f64, points: usize) -> Self {
        assert!(step_db > 0.0 && points >= 2);
        CcdfAccumulator {
            start_db,
            step_db,
            exceed: vec![0; points],
            total: 0,
        }
    }

    pub fn threshold(&self, i: usize) -> f64 {
        self.start_db + i as f64 * self.step_db
    }

    pub fn thresholds(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.exceed.len()).map(|i| self.threshold(i))
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn exceed_counts(&self) -> &[u64] {
        &self.exceed
    }

    pub fn accumulate(&mut self, papr_db: f64) {
        self.total += 1;
        for (i, c) in self.exceed.iter_mut().enumerate() {
            if papr_db > self.start_db + i as f64 * self.step_db {
                *c += 1;
            } else {
                break;
            }
        }
    }

    pub fn merge(&mut self, other: &CcdfAccumulator) {
        assert_eq!(self.exceed.len(), other.exceed.len());
        self.total += other.total;
        for (a, b) in self.exceed.iter_mut().zip(&other.exceed) {
            *a += b;
        }
    }

    pub fn ccdf(&self, i: usize) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.exceed[i] as f64 / self.total as f64
    }

    /// `(threshold_db, ccdf)` for every grid point.
    pub fn rows(&self) -> Vec<(f64, f64)> {
        (0..self.exceed.len())
            .map(|i| (self.threshold(i), self.ccdf(i)))
            .collect()
    }

    /// Smallest threshold with `P(PAPR > threshold) <= probability`,
    /// linearly interpolated between grid points.
    pub fn query(&self, probability: f64) -> Result<CcdfQuery> {
        if !(probability > 0.0 && probability <= 1.0) {
            return Err(Error::param("probability", "must be in (0, 1]"));
        }
        let few = (self.total as f64) < 10.0 / probability;
        let Some(i) = (0..self.exceed.len()).find(|&i| self.ccdf(i) <= probability) else {
            return Ok(CcdfQuery {
                threshold_db: self.threshold(self.exceed.len() - 1),
                low_confidence: true,
            });
        };
        if i == 0 {
            return Ok(CcdfQuery {
                threshold_db: self.start_db,
                low_confidence: few,
            });
        }
        let (c0, c1) = (self.ccdf(i - 1), self.ccdf(i));
        let frac = (c0 - probability) / (c0 - c1);
        Ok(CcdfQuery {
            threshold_db: self.threshold(i - 1) + frac * self.step_db,
            low_confidence: few,
        })
    }
}

/// `Cov(|x_n|^2, |x_{n+dn}|^2) = sigma^4 |sin(pi dn / L) / (N sin(pi dn / LN))|^2`
/// for Gaussian frequency-domain symbols of variance `sigma_sq`.
pub fn power_covariance_closed_form(
    delta_n: i64,
    oversampling: usize,
    n_subcarriers: usize,
    sigma_sq: f64,
) -> Result<f64> {
    let l = oversampling as i64;
    let ln = l * n_subcarriers as i64;
    if oversampling == 0 || n_subcarriers == 0 {
        return Err(Error::param("oversampling", "L and N must be positive"));
    }
    if delta_n.rem_euclid(ln) == 0 {
        return Err(Error::param(
            "delta_n",
            "multiple of LN is the variance, not a lag covariance",
        ));
    }
    if delta_n.rem_euclid(l) == 0 {
        return Ok(0.0);
    }
    let d = delta_n as f64;
    let num = (PI * d / l as f64).sin();
    let den = n_subcarriers as f64 * (PI * d / ln as f64).sin();
    Ok(sigma_sq * sigma_sq * (num / den).powi(2))
}

/// Per-block sufficient statistics for lagged power covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLagStats {
    /// `mean_n |x_n|^2`.
    pub mean_power: f64,
    /// `mean_n |x_n|^2 |x_{n+lag}|^2` per requested lag (cyclic).
    pub mean_products: Vec<f64>,
}

impl BlockLagStats {
    pub fn from_signal(x: &[Complex64], lags: &[usize]) -> Self {
        let len = x.len();
        let pw: Vec<f64> = x.iter().map(|v| v.norm_sqr()).collect();
        let mean_power = pw.iter().sum::<f64>() / len as f64;
        let mean_products = lags
            .iter()
            .map(|&lag| {
                (0..len).map(|n| pw[n] * pw[(n + lag) % len]).sum::<f64>() / len as f64
            })
            .collect();
        BlockLagStats {
            mean_power,
            mean_products,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagCovariance {
    pub lag: usize,
    pub covariance: f64,
    pub std_error: f64,
}

/// Pooled covariance estimate per lag with a block-level standard error.
///
/// Blocks are the independent unit; the standard error linearises
/// `mean(U) - mean(V)^2` around the pooled means.
pub fn pooled_lag_covariance(lags: &[usize], blocks: &[BlockLagStats]) -> Vec<LagCovariance> {
    let nb = blocks.len() as f64;
    let mean_v = blocks.iter().map(|b| b.mean_power).sum::<f64>() / nb;
    lags.iter()
        .enumerate()
        .map(|(j, &lag)| {
            let mean_u = blocks.iter().map(|b| b.mean_products[j]).sum::<f64>() / nb;
            let cov = mean_u - mean_v * mean_v;
            let lin: Vec<f64> = blocks
                .iter()
                .map(|b| b.mean_products[j] - 2.0 * mean_v * b.mean_power)
                .collect();
            let lin_mean = lin.iter().sum::<f64>() / nb;
            let var = lin.iter().map(|v| (v - lin_mean).powi(2)).sum::<f64>() / (nb - 1.0).max(1.0);
            LagCovariance {
                lag,
                covariance: cov,
                std_error: (var / nb).sqrt(),
            }
        })
        .collect()
}
