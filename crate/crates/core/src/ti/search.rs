use std::collections::HashSet;

use num_complex::Complex64;

use super::filter::{clipping_noise_filter, CandidateFilter};
use super::score::{ranked_valid, score_candidates, select_best, CandidateScores};
use super::{Scheme, TiConfig};
use crate::candidate::CandidateId;
use crate::constellation::{GaussianInteger, TiVector};
use crate::peaks::{self, peak_power};
use crate::transform::{TimeSignal, TransformPlan};
use crate::{Error, Result};

/// Instrumentation for one scoring round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundStats {
    /// `|P|`, all local peaks of the scored signal.
    pub peaks_found: usize,
    /// `min(N_p, |P|)`.
    pub peaks_used: usize,
    /// Number of scored candidates, `4 N_c`.
    pub candidates: usize,
    pub nwcs: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiResult {
    pub b: TiVector,
    /// `idaft(s + delta b)`, recomputed from scratch.
    pub signal: TimeSignal,
    /// `max |signal|^2`.
    pub peak_power: f64,
    /// Peak power of the untouched block.
    pub initial_peak_power: f64,
    /// Edges descended, at most `T`.
    pub iterations_used: usize,
    /// States reached with no valid candidate.
    pub leaves_visited: usize,
    pub nwcs_evaluations: u64,
    pub rounds: Vec<RoundStats>,
    /// Subcarriers the candidates were drawn from.
    pub filter: CandidateFilter,
}

/// A configured TI search over one transform plan.
#[derive(Debug, Clone)]
pub struct TiSolver<'a> {
    plan: &'a TransformPlan,
    delta: f64,
    cfg: TiConfig,
}

#[derive(Default)]
struct Tally {
    iterations: usize,
    leaves: usize,
    nwcs: u64,
    rounds: Vec<RoundStats>,
}

/// Best state seen so far, by incrementally maintained peak power.
struct Best {
    peak: f64,
    b: Option<TiVector>,
}

impl Best {
    fn offer(&mut self, x: &[Complex64], b: &TiVector) {
        let p = peak_power(x);
        if p < self.peak {
            self.peak = p;
            self.b = Some(b.clone());
        }
    }
}

struct Node {
    b: TiVector,
    x: TimeSignal,
    children: Vec<CandidateId>,
    cursor: usize,
}

impl<'a> TiSolver<'a> {
    pub fn new(plan: &'a TransformPlan, delta: f64, cfg: TiConfig) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::param("delta", "must be positive"));
        }
        cfg.validate(plan.n_subcarriers())?;
        Ok(TiSolver { plan, delta, cfg })
    }

    pub fn config(&self) -> &TiConfig {
        &self.cfg
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn plan(&self) -> &TransformPlan {
        self.plan
    }

    /// Candidate subcarriers for a block whose initial signal is `x0`.
    pub fn filter_for(&self, x0: &[Complex64]) -> Result<CandidateFilter> {
        match self.cfg.scheme {
            Scheme::Cr => Ok(CandidateFilter::all(self.plan.n_subcarriers())),
            Scheme::Fcr => clipping_noise_filter(
                x0,
                self.cfg.clip_amplitude(),
                self.cfg.n_filtered,
                self.plan,
            ),
        }
    }

    /// Peaks, then scores, of `x`; records one round.
    fn score(&self, x: &[Complex64], filter: &CandidateFilter, tally: &mut Tally) -> CandidateScores {
        let (peaks, found) = peaks::top_local_peaks_with_count(x, self.cfg.n_peaks);
        let scores = score_candidates(&peaks, filter, self.plan, self.cfg.beta);
        tally.nwcs += scores.nwcs_evaluations();
        tally.rounds.push(RoundStats {
            peaks_found: found,
            peaks_used: peaks.len(),
            candidates: scores.len(),
            nwcs: scores.nwcs_evaluations(),
        });
        scores
    }

    fn step(&self, x: &mut [Complex64], b: &mut TiVector, cand: CandidateId) {
        let (re, im) = cand.rotation.unit();
        b.0[cand.subcarrier] += GaussianInteger::new(re, im);
        self.plan.add_candidate_column(x, cand, self.delta);
    }

    pub fn solve(&self, s: &[Complex64]) -> Result<TiResult> {
        let n = self.plan.n_subcarriers();
        if s.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: s.len(),
            });
        }
        let x0 = self.plan.idaft(s)?;
        let p0 = peak_power(&x0);
        let filter = self.filter_for(&x0)?;
        let mut tally = Tally::default();
        let mut best = Best { peak: p0, b: None };

        if self.cfg.dfs_enabled {
            self.depth_first(x0, &filter, &mut tally, &mut best);
        } else {
            self.greedy(x0, &filter, &mut tally, &mut best);
        }

        let b = best.b.unwrap_or_else(|| TiVector::zeros(n));
        let signal = self.plan.idaft(&b.apply(s, self.delta))?;
        Ok(TiResult {
            peak_power: peak_power(&signal),
            signal,
            b,
            initial_peak_power: p0,
            iterations_used: tally.iterations,
            leaves_visited: tally.leaves,
            nwcs_evaluations: tally.nwcs,
            rounds: tally.rounds,
            filter,
        })
    }

    /// Follows the best candidate until none is valid or the budget is spent;
    /// the final state competes with the untouched baseline.
    fn greedy(&self, mut x: TimeSignal, filter: &CandidateFilter, tally: &mut Tally, best: &mut Best) {
        let mut b = TiVector::zeros(self.plan.n_subcarriers());
        for _ in 0..self.cfg.max_iters {
            let scores = self.score(&x, filter, tally);
            let Some(cand) = select_best(&scores) else {
                tally.leaves += 1;
                break;
            };
            self.step(&mut x, &mut b, cand);
            tally.iterations += 1;
        }
        best.offer(&x, &b);
    }

    /// Depth-first traversal of the candidate tree.
    ///
    /// Each descended edge costs one unit of the budget; backtracking is free.
    /// Children of a node are its valid candidates in score order, computed
    /// once on first visit. An edge into an already visited `b` is skipped at
    /// no cost: candidates come in antipodal pairs, so without this the search
    /// settles into a two-state cycle and never backtracks. Every visited
    /// state competes for the output.
    fn depth_first(&self, x0: TimeSignal, filter: &CandidateFilter, tally: &mut Tally, best: &mut Best) {
        let b0 = TiVector::zeros(self.plan.n_subcarriers());
        let root_children = ranked_valid(&self.score(&x0, filter, tally));
        if root_children.is_empty() {
            tally.leaves += 1;
            best.offer(&x0, &b0);
            return;
        }
        let mut visited = HashSet::from([b0.clone()]);
        let mut budget = self.cfg.max_iters;
        let mut stack = vec![Node {
            b: b0,
            x: x0,
            children: root_children,
            cursor: 0,
        }];

        while let Some(top) = stack.last_mut() {
            if top.cursor >= top.children.len() {
                stack.pop();
                continue;
            }
            let cand = top.children[top.cursor];
            top.cursor += 1;
            let mut b = top.b.clone();
            let (re, im) = cand.rotation.unit();
            b.0[cand.subcarrier] += GaussianInteger::new(re, im);
            if visited.contains(&b) {
                continue;
            }
            let mut x = top.x.clone();
            self.plan.add_candidate_column(&mut x, cand, self.delta);
            visited.insert(b.clone());
            tally.iterations += 1;
            budget -= 1;
            best.offer(&x, &b);

            if budget == 0 {
                break;
            }
            let children = ranked_valid(&self.score(&x, filter, tally));
            if children.is_empty() {
                tally.leaves += 1;
                continue;
            }
            stack.push(Node {
                b,
                x,
                children,
                cursor: 0,
            });
        }
    }
}
