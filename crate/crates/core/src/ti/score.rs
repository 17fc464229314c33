//! Candidate scoring and selection.

use std::cmp::Ordering;

use num_complex::Complex64;

use super::filter::CandidateFilter;
use crate::candidate::{CandidateId, Rotation};
use crate::peaks::PeakSet;
use crate::transform::TransformPlan;

/// Negated weighted cosine similarity of one peak and one candidate:
/// `-(|x|^beta) * cos(theta - phi)`.
///
/// Positive values predict a reduction of the peak's power.
pub fn nwcs(peak_magnitude: f64, peak_angle: f64, candidate_angle: f64, beta: f64) -> f64 {
    -peak_magnitude.powf(beta) * (peak_angle - candidate_angle).cos()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    pub id: CandidateId,
    pub score: f64,
}

/// Scores of every candidate allowed by a filter, four per subcarrier in
/// filter order then rotation order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CandidateScores {
    entries: Vec<ScoredCandidate>,
    nwcs_evaluations: u64,
}

impl CandidateScores {
    pub fn entries(&self) -> &[ScoredCandidate] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Logical number of NWCS terms summed to build these scores.
    pub fn nwcs_evaluations(&self) -> u64 {
        self.nwcs_evaluations
    }

    pub fn get(&self, id: CandidateId) -> Option<f64> {
        self.entries.iter().find(|e| e.id == id).map(|e| e.score)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScoredCandidate> {
        self.entries.iter()
    }
}

/// `R_k = sum over peaks of nwcs(peak, candidate k)` for each allowed candidate.
///
/// Evaluated as one complex multiply-accumulate per (peak, subcarrier) pair:
/// with `a_p = |x_p|^beta e^{j theta_p}` and the unit phasor `u_{p,k}` of the
/// `+1` candidate, `z_k = sum_p a_p conj(u_{p,k})` gives
/// `R(+1) = -Re z`, `R(-1) = Re z`, `R(+j) = -Im z`, `R(-j) = Im z`.
pub fn score_candidates(
    peaks: &PeakSet,
    filter: &CandidateFilter,
    plan: &TransformPlan,
    beta: f64,
) -> CandidateScores {
    let dt = plan.time_phases();
    let df = plan.freq_phases();
    let tw = plan.twiddles();

    let weights: Vec<(usize, Complex64)> = peaks
        .entries()
        .iter()
        .filter(|p| p.magnitude > 0.0)
        .map(|p| {
            let a = p.value * (p.magnitude.powf(beta) / p.magnitude);
            (p.index, a * dt[p.index].conj())
        })
        .collect();

    let subs = filter.subcarriers();
    let mut acc = vec![Complex64::new(0.0, 0.0); subs.len()];
    for &(n, a) in &weights {
        for (z, &k) in acc.iter_mut().zip(subs) {
            let w = tw[plan.twiddle_index(k, n)];
            z.re += a.re * w.re + a.im * w.im;
            z.im += a.im * w.re - a.re * w.im;
        }
    }

    let mut entries = Vec::with_capacity(4 * subs.len());
    for (z, &k) in acc.iter().zip(subs) {
        let z = z * df[k].conj();
        for (rot, score) in [
            (Rotation::PlusOne, -z.re),
            (Rotation::MinusOne, z.re),
            (Rotation::PlusJ, -z.im),
            (Rotation::MinusJ, z.im),
        ] {
            entries.push(ScoredCandidate {
                id: CandidateId::new(k, rot),
                score,
            });
        }
    }
    CandidateScores {
        entries,
        nwcs_evaluations: 4 * subs.len() as u64 * peaks.len() as u64,
    }
}

/// Higher score first; equal scores by ascending `(subcarrier, rotation)`.
fn rank_order(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.score.total_cmp(&a.score).then(a.id.cmp(&b.id))
}

/// The highest-scored valid (`R > 0`) candidate, if any.
pub fn select_best(scores: &CandidateScores) -> Option<CandidateId> {
    scores
        .entries
        .iter()
        .filter(|e| e.score > 0.0)
        .min_by(|a, b| rank_order(a, b))
        .map(|e| e.id)
}

/// All valid candidates in selection order; the first equals [`select_best`].
pub fn ranked_valid(scores: &CandidateScores) -> Vec<CandidateId> {
    let mut valid: Vec<ScoredCandidate> = scores
        .entries
        .iter()
        .copied()
        .filter(|e| e.score > 0.0)
        .collect();
    valid.sort_unstable_by(rank_order);
    valid.into_iter().map(|e| e.id).collect()
}
