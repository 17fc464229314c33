//! Oversampled discrete affine Fourier transforms.
//!
//! The inverse transform maps `N` frequency-domain symbols to `LN` time
//! samples
//!
//! ```text
//! x[n] = 1/sqrt(N) * sum_k s[k] * exp(j2pi(a1 n^2 + k n / (LN) + a2 k^2))
//! ```
//!
//! and factors as `A^H = D_t F_L^H D_f` with unimodular diagonal chirps. It is
//! evaluated as zero-pad, multiply by `D_f`, `LN`-point inverse FFT, multiply
//! by `D_t`. Both directions carry a `1/sqrt(N)` scale, so `A A^H = L I`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::candidate::CandidateId;
use crate::{Error, Result};

/// Chirp rates of the two diagonal factors. `(0, 0)` is OFDM.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChirpParams {
    /// Time-domain chirp rate, cycles per squared sample index.
    pub alpha1: f64,
    /// Frequency-domain chirp rate, cycles per squared subcarrier index.
    pub alpha2: f64,
}

impl ChirpParams {
    pub const OFDM: ChirpParams = ChirpParams {
        alpha1: 0.0,
        alpha2: 0.0,
    };

    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        let c = ChirpParams { alpha1, alpha2 };
        c.validate()?;
        Ok(c)
    }

    /// The AFDM setting `alpha1 = 1/(2N)`, `alpha2 = 0`.
    pub fn afdm_default(n_subcarriers: usize) -> Self {
        ChirpParams {
            alpha1: 1.0 / (2.0 * n_subcarriers as f64),
            alpha2: 0.0,
        }
    }

    pub fn is_ofdm(&self) -> bool {
        self.alpha1 == 0.0 && self.alpha2 == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} is outside [0, 1)")));
            }
        }
        Ok(())
    }
}

macro_rules! complex_vector {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Default)]
        pub struct $name(pub Vec<Complex64>);

        impl $name {
            pub fn zeros(len: usize) -> Self {
                Self(vec![Complex64::new(0.0, 0.0); len])
            }

            pub fn into_inner(self) -> Vec<Complex64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [Complex64];
            fn deref(&self) -> &[Complex64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [Complex64] {
                &mut self.0
            }
        }

        impl From<Vec<Complex64>> for $name {
            fn from(v: Vec<Complex64>) -> Self {
                Self(v)
            }
        }

        impl FromIterator<Complex64> for $name {
            fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
                Self(iter.into_iter().collect())
            }
        }
    };
}

complex_vector!(
    /// Length-`N` block of frequency-domain symbols.
    SymbolBlock
);
complex_vector!(
    /// Length-`LN` block of oversampled time-domain samples.
    TimeSignal
);

/// Precomputed tables and FFT plans for one `(N, L, chirp)` configuration.
///
/// Immutable after construction and cheap to share between threads.
#[derive(Clone)]
pub struct TransformPlan {
    n: usize,
    l: usize,
    chirp: ChirpParams,
    scale: f64,
    /// `D_t` diagonal, length `LN`.
    time_phase: Vec<Complex64>,
    /// `D_f` diagonal, length `N`.
    freq_phase: Vec<Complex64>,
    /// `exp(j2pi m / LN)` for `m` in `[0, LN)`.
    twiddle: Vec<Complex64>,
    ln_mask: Option<usize>,
    inverse: Arc<dyn Fft<f64>>,
    forward: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for TransformPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformPlan")
            .field("n_subcarriers", &self.n)
            .field("oversampling", &self.l)
            .field("chirp", &self.chirp)
            .finish_non_exhaustive()
    }
}

/// `exp(j2pi * frac(cycles))`.
fn cis_cycles(cycles: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * cycles.rem_euclid(1.0))
}

/// Wraps an angle into `(-pi, pi]`.
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a.sin().atan2(a.cos());
    if w <= -PI {
        PI
    } else {
        w
    }
}

impl TransformPlan {
    pub fn new(n_subcarriers: usize, oversampling: usize, chirp: ChirpParams) -> Result<Self> {
        if n_subcarriers < 2 {
            return Err(Error::param("n_subcarriers", "must be at least 2"));
        }
        if oversampling < 1 {
            return Err(Error::param("oversampling", "must be at least 1"));
        }
        chirp.validate()?;

        let n = n_subcarriers;
        let ln = n * oversampling;
        let time_phase = (0..ln)
            .map(|i| {
                let sq = (i as f64) * (i as f64);
                cis_cycles(chirp.alpha1 * sq)
            })
            .collect();
        let freq_phase = (0..n)
            .map(|k| {
                let sq = (k as f64) * (k as f64);
                cis_cycles(chirp.alpha2 * sq)
            })
            .collect();
        let twiddle = (0..ln)
            .map(|m| cis_cycles(m as f64 / ln as f64))
            .collect();

        let mut planner = FftPlanner::new();
        Ok(TransformPlan {
            n,
            l: oversampling,
            chirp,
            scale: 1.0 / (n as f64).sqrt(),
            time_phase,
            freq_phase,
            twiddle,
            ln_mask: ln.is_power_of_two().then(|| ln - 1),
            inverse: planner.plan_fft_inverse(ln),
            forward: planner.plan_fft_forward(ln),
        })
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n
    }

    pub fn oversampling(&self) -> usize {
        self.l
    }

    /// Number of time samples `LN`.
    pub fn len(&self) -> usize {
        self.n * self.l
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn chirp(&self) -> ChirpParams {
        self.chirp
    }

    pub fn time_phases(&self) -> &[Complex64] {
        &self.time_phase
    }

    pub fn freq_phases(&self) -> &[Complex64] {
        &self.freq_phase
    }

    pub fn twiddles(&self) -> &[Complex64] {
        &self.twiddle
    }

    /// `(k * n) mod LN` without overflow for valid indices.
    #[inline]
    pub fn twiddle_index(&self, k: usize, n: usize) -> usize {
        let prod = k * n;
        match self.ln_mask {
            Some(mask) => prod & mask,
            None => prod % self.len(),
        }
    }

    fn check_len(expected: usize, actual: usize) -> Result<()> {
        if expected != actual {
            return Err(Error::LengthMismatch { expected, actual });
        }
        Ok(())
    }

    /// Inverse transform: `x = A^H s`.
    pub fn idaft(&self, s: &[Complex64]) -> Result<TimeSignal> {
        Self::check_len(self.n, s.len())?;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len()];
        for ((b, &sk), &df) in buf.iter_mut().zip(s).zip(&self.freq_phase) {
            *b = sk * df;
        }
        self.inverse.process(&mut buf);
        for (b, &dt) in buf.iter_mut().zip(&self.time_phase) {
            *b *= dt * self.scale;
        }
        Ok(TimeSignal(buf))
    }

    /// Forward transform: `g = A x = D_f^H F_L D_t^H x`.
    ///
    /// `daft(idaft(s)) == L * s`.
    pub fn daft(&self, x: &[Complex64]) -> Result<SymbolBlock> {
        Self::check_len(self.len(), x.len())?;
        let mut buf: Vec<Complex64> = x
            .iter()
            .zip(&self.time_phase)
            .map(|(&xn, dt)| xn * dt.conj())
            .collect();
        self.forward.process(&mut buf);
        buf.truncate(self.n);
        for (b, df) in buf.iter_mut().zip(&self.freq_phase) {
            *b *= df.conj() * self.scale;
        }
        Ok(SymbolBlock(buf))
    }

    fn check_candidate(&self, cand: CandidateId) -> Result<()> {
        if cand.subcarrier >= self.n {
            return Err(Error::param(
                "subcarrier",
                format!("{} is outside [0, {})", cand.subcarrier, self.n),
            ));
        }
        Ok(())
    }

    /// Unit-modulus phasor of candidate `cand` at sample `n` (no `delta/sqrt(N)`).
    #[inline]
    pub fn candidate_phasor(&self, cand: CandidateId, n: usize) -> Complex64 {
        let k = cand.subcarrier;
        let base = self.time_phase[n] * self.twiddle[self.twiddle_index(k, n)] * self.freq_phase[k];
        rotate(base, cand)
    }

    /// The time-domain column of `C = delta * A^H * Cbar` for one candidate.
    ///
    /// Every sample has magnitude `delta / sqrt(N)`.
    pub fn candidate_time_column(&self, cand: CandidateId, delta: f64) -> Result<TimeSignal> {
        self.check_candidate(cand)?;
        let amp = delta * self.scale;
        Ok((0..self.len())
            .map(|n| self.candidate_phasor(cand, n) * amp)
            .collect())
    }

    /// Adds `scale * column(cand)` to `x` in place. `x` must have length `LN`.
    pub fn add_candidate_column(&self, x: &mut [Complex64], cand: CandidateId, delta: f64) {
        debug_assert_eq!(x.len(), self.len());
        let k = cand.subcarrier;
        let coef = rotate(self.freq_phase[k], cand) * (delta * self.scale);
        let mut idx = 0usize;
        let ln = self.len();
        for (n, xn) in x.iter_mut().enumerate() {
            *xn += self.time_phase[n] * self.twiddle[idx] * coef;
            idx += k;
            if idx >= ln {
                idx -= ln;
            }
        }
    }

    /// Angle of candidate column entry `n`, in `(-pi, pi]`.
    pub fn candidate_phase_at(&self, cand: CandidateId, n: usize) -> Result<f64> {
        self.check_candidate(cand)?;
        if n >= self.len() {
            return Err(Error::param(
                "sample_index",
                format!("{n} is outside [0, {})", self.len()),
            ));
        }
        let p = self.candidate_phasor(cand, n);
        Ok(wrap_angle(p.im.atan2(p.re)))
    }
}

/// Multiplies by the candidate's quarter-turn exactly (component swaps only).
#[inline]
fn rotate(z: Complex64, cand: CandidateId) -> Complex64 {
    use crate::candidate::Rotation::*;
    match cand.rotation {
        PlusOne => z,
        MinusOne => -z,
        PlusJ => Complex64::new(-z.im, z.re),
        MinusJ => Complex64::new(z.im, -z.re),
    }
}
