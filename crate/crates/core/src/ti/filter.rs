//! Candidate filtering by clipping-noise spectrum.

use num_complex::Complex64;

use crate::transform::TransformPlan;
use crate::{Error, Result};

/// Ordered subcarriers whose candidates may be selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateFilter {
    subcarriers: Vec<usize>,
}

impl CandidateFilter {
    /// Every subcarrier in natural order.
    pub fn all(n_subcarriers: usize) -> Self {
        CandidateFilter {
            subcarriers: (0..n_subcarriers).collect(),
        }
    }

    /// A custom ordered list; entries must be distinct and below `n_subcarriers`.
    pub fn from_order(subcarriers: Vec<usize>, n_subcarriers: usize) -> Result<Self> {
        let mut seen = vec![false; n_subcarriers];
        for &k in &subcarriers {
            if k >= n_subcarriers || std::mem::replace(&mut seen[k], true) {
                return Err(Error::param(
                    "subcarriers",
                    format!("{k} is out of range or repeated"),
                ));
            }
        }
        Ok(CandidateFilter { subcarriers })
    }

    pub fn subcarriers(&self) -> &[usize] {
        &self.subcarriers
    }

    pub fn len(&self) -> usize {
        self.subcarriers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subcarriers.is_empty()
    }
}

/// Keeps the `n_filtered` subcarriers contributing most to the clipping noise
/// of `x0`.
///
/// Samples with `|x| >= eta` form the clipping noise `f`; its in-band spectrum
/// `g = A f` is ranked by descending `|g|` (ties by ascending subcarrier).
/// When no sample reaches `eta` the spectrum is zero and the natural order is
/// used.
pub fn clipping_noise_filter(
    x0: &[Complex64],
    eta: f64,
    n_filtered: usize,
    plan: &TransformPlan,
) -> Result<CandidateFilter> {
    if !(eta >= 0.0) {
        return Err(Error::param("eta", "must be non-negative"));
    }
    let n = plan.n_subcarriers();
    if n_filtered == 0 || n_filtered > n {
        return Err(Error::param("n_filtered", format!("must be in [1, {n}]")));
    }
    let eta_sq = eta * eta;
    let f: Vec<Complex64> = x0
        .iter()
        .map(|&v| if v.norm_sqr() >= eta_sq { v } else { Complex64::new(0.0, 0.0) })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    if f.iter().any(|v| v.norm_sqr() > 0.0) {
        let g = plan.daft(&f)?;
        let mag: Vec<f64> = g.iter().map(|v| v.norm_sqr()).collect();
        order.sort_by(|&a, &b| mag[b].total_cmp(&mag[a]).then(a.cmp(&b)));
    }
    order.truncate(n_filtered);
    Ok(CandidateFilter { subcarriers: order })
}
