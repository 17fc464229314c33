//! Tone injection by candidate ranking.
//!
//! Every iteration finds the highest local peaks of the current time signal,
//! scores each unit candidate `(subcarrier, ±1/±j)` by its predicted weighted
//! peak-power reduction and applies the best one. FCR-TI restricts the
//! candidates to subcarriers ranked by the clipping-noise spectrum of the
//! initial signal. With depth-first search enabled, dead ends are recorded as
//! leaves and the search backtracks to the next-best sibling until the
//! iteration budget runs out.
//!
//! Symbol energy is assumed normalized to `E_s = 1`; the FCR clipping
//! threshold is given in dB relative to that.

mod filter;
mod score;
mod search;

pub use filter::{clipping_noise_filter, CandidateFilter};
pub use score::{nwcs, ranked_valid, score_candidates, select_best, CandidateScores, ScoredCandidate};
pub use search::{RoundStats, TiResult, TiSolver};

use crate::transform::TransformPlan;
use crate::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// All `4N` candidates every iteration.
    Cr,
    /// Candidates restricted by the clipping-noise spectrum.
    Fcr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiConfig {
    pub scheme: Scheme,
    /// Peak-magnitude exponent of the score.
    pub beta: f64,
    /// Global iteration budget `T`.
    pub max_iters: usize,
    /// Number of highest local peaks `N_p` used for scoring.
    pub n_peaks: usize,
    /// Number of subcarriers `N_c` kept by the FCR filter.
    pub n_filtered: usize,
    /// FCR clipping threshold, dB above `E_s`.
    pub clip_threshold_db: f64,
    pub dfs_enabled: bool,
}

impl TiConfig {
    /// CR-TI with `beta = 4` and DFS.
    pub fn cr(max_iters: usize, n_peaks: usize) -> Self {
        TiConfig {
            scheme: Scheme::Cr,
            beta: 4.0,
            max_iters,
            n_peaks,
            n_filtered: usize::MAX,
            clip_threshold_db: 5.0,
            dfs_enabled: true,
        }
    }

    /// FCR-TI with the 5 dB clipping threshold, `beta = 4` and DFS.
    pub fn fcr(max_iters: usize, n_peaks: usize, n_filtered: usize) -> Self {
        TiConfig {
            scheme: Scheme::Fcr,
            n_filtered,
            ..TiConfig::cr(max_iters, n_peaks)
        }
    }

    pub fn with_dfs(mut self, enabled: bool) -> Self {
        self.dfs_enabled = enabled;
        self
    }

    /// Clipping amplitude `eta = sqrt(10^(dB/10) E_s)` with `E_s = 1`.
    pub fn clip_amplitude(&self) -> f64 {
        10f64.powf(self.clip_threshold_db / 20.0)
    }

    pub fn validate(&self, n_subcarriers: usize) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::param("beta", "must be positive and finite"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be positive"));
        }
        if self.n_peaks == 0 {
            return Err(Error::param("n_peaks", "must be positive"));
        }
        if self.scheme == Scheme::Fcr {
            if self.n_filtered == 0 || self.n_filtered > n_subcarriers {
                return Err(Error::param(
                    "n_filtered",
                    format!("must be in [1, {n_subcarriers}]"),
                ));
            }
            if !self.clip_threshold_db.is_finite() {
                return Err(Error::param("clip_threshold_db", "must be finite"));
            }
        }
        Ok(())
    }
}

/// Greedy CR-TI over all candidates, regardless of `cfg.scheme` and
/// `cfg.dfs_enabled`.
pub fn cr_ti(s: &[Complex64], plan: &TransformPlan, delta: f64, cfg: &TiConfig) -> Result<TiResult> {
    let cfg = TiConfig {
        scheme: Scheme::Cr,
        dfs_enabled: false,
        ..cfg.clone()
    };
    TiSolver::new(plan, delta, cfg)?.solve(s)
}

/// FCR-TI; DFS follows `cfg.dfs_enabled`.
pub fn fcr_ti(s: &[Complex64], plan: &TransformPlan, delta: f64, cfg: &TiConfig) -> Result<TiResult> {
    let cfg = TiConfig {
        scheme: Scheme::Fcr,
        ..cfg.clone()
    };
    TiSolver::new(plan, delta, cfg)?.solve(s)
}

/// Depth-first search with the candidate set of `cfg.scheme`.
pub fn dfs_ti(s: &[Complex64], plan: &TransformPlan, delta: f64, cfg: &TiConfig) -> Result<TiResult> {
    let cfg = TiConfig {
        dfs_enabled: true,
        ..cfg.clone()
    };
    TiSolver::new(plan, delta, cfg)?.solve(s)
}
