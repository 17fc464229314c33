//! Soft-limiter amplifier, AWGN, TI-aware receiver and SER measurement.
//!
//! The link per block is
//! `s -> TI -> x = g * idaft(s + delta b) -> soft limit -> A x -> + w -> / (L g)
//! -> modulo -> detect`, where `g` rescales the transmit power back to `E_s`.
//! Noise `w` has variance `N0` per subcarrier and is added to `A x`, whose
//! signal part has energy `L^2 E_s` per subcarrier. The `Es/N0` axis is that
//! ratio, which equals the per-subcarrier SNR seen by the detector after the
//! `1/L` scaling.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::constellation::{modulo_recover, QamConstellation, TiVector};
use crate::harness::runner::{block_rng, Runner, Stream};
use crate::ti::TiSolver;
use crate::transform::{SymbolBlock, TimeSignal, TransformPlan};
use crate::{Error, Result};

/// Envelope clipper that keeps the phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftLimiter {
    clip_amplitude: f64,
}

impl SoftLimiter {
    pub fn new(clip_amplitude: f64) -> Result<Self> {
        if !(clip_amplitude > 0.0) {
            return Err(Error::param("clip_amplitude", "must be positive"));
        }
        Ok(SoftLimiter { clip_amplitude })
    }

    /// Threshold `db` above the average power `avg_power`.
    pub fn from_db(db: f64, avg_power: f64) -> Result<Self> {
        Self::new((10f64.powf(db / 10.0) * avg_power).sqrt())
    }

    pub fn clip_amplitude(&self) -> f64 {
        self.clip_amplitude
    }

    /// Samples within rounding of the threshold are left alone, which keeps
    /// the limiter exactly idempotent.
    pub fn apply(&self, x: &mut [Complex64]) {
        let limit = self.clip_amplitude * (1.0 + 4.0 * f64::EPSILON);
        for v in x.iter_mut() {
            let m = v.norm();
            if m > limit {
                *v *= self.clip_amplitude / m;
            }
        }
    }
}

pub fn soft_limit(x: &[Complex64], limiter: &SoftLimiter) -> TimeSignal {
    let mut y = TimeSignal(x.to_vec());
    limiter.apply(&mut y);
    y
}

/// Adds circularly-symmetric Gaussian noise of variance `n0` per component.
pub fn add_awgn<R: Rng + ?Sized>(y: &mut [Complex64], n0: f64, rng: &mut R) {
    if n0 <= 0.0 {
        return;
    }
    let sd = (n0 / 2.0).sqrt();
    for v in y.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *v += Complex64::new(re * sd, im * sd);
    }
}

/// Per-subcarrier modulo recovery and nearest-symbol detection of an
/// observation already scaled back to the symbol domain.
pub fn receive(y: &[Complex64], delta: f64, qam: &QamConstellation) -> Vec<usize> {
    y.iter().map(|&v| qam.detect(modulo_recover(v, delta))).collect()
}

/// `10 log10(E||s + delta b||^2 / E||s||^2)` over an ensemble.
pub fn power_increase_db<'a, I>(pairs: I, delta: f64) -> f64
where
    I: IntoIterator<Item = (&'a [Complex64], &'a TiVector)>,
{
    let (mut before, mut after) = (0.0, 0.0);
    for (s, b) in pairs {
        before += energy(s);
        after += energy(&b.apply(s, delta));
    }
    10.0 * (after / before).log10()
}

fn energy(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SerAccumulator {
    pub errors: u64,
    pub symbols: u64,
}

impl SerAccumulator {
    pub fn record(&mut self, sent: &[usize], detected: &[usize]) {
        self.symbols += sent.len() as u64;
        self.errors += sent.iter().zip(detected).filter(|(a, b)| a != b).count() as u64;
    }

    pub fn merge(&mut self, other: &SerAccumulator) {
        self.errors += other.errors;
        self.symbols += other.symbols;
    }

    pub fn ser(&self) -> f64 {
        if self.symbols == 0 {
            0.0
        } else {
            self.errors as f64 / self.symbols as f64
        }
    }
}

/// One Monte-Carlo SER sweep.
#[derive(Debug, Clone)]
pub struct SerSetup<'a> {
    pub plan: &'a TransformPlan,
    pub qam: &'a QamConstellation,
    /// `None` transmits the plain block.
    pub solver: Option<&'a TiSolver<'a>>,
    /// `None` disables the amplifier model.
    pub limiter: Option<SoftLimiter>,
    pub esn0_db: Vec<f64>,
    /// Fold into the fundamental lattice cell before detection. A TI
    /// receiver must; a plain receiver detects directly.
    pub modulo: bool,
    pub n_blocks: usize,
    /// Blocks used to measure the transmit power increase before the sweep.
    pub calibration_blocks: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerCurve {
    pub esn0_db: Vec<f64>,
    pub points: Vec<SerAccumulator>,
    /// Measured `E||s + delta b||^2 / E||s||^2`; the transmitter scales by
    /// its inverse square root.
    pub power_factor: f64,
}

impl SerSetup<'_> {
    fn ti_vector(&self, s: &[Complex64]) -> Result<TiVector> {
        match self.solver {
            Some(solver) => Ok(solver.solve(s)?.b),
            None => Ok(TiVector::zeros(s.len())),
        }
    }

    /// Average transmit power increase of the configured scheme, as a ratio.
    pub fn calibrate(&self, runner: &Runner) -> Result<f64> {
        if self.solver.is_none() || self.calibration_blocks == 0 {
            return Ok(1.0);
        }
        let n = self.plan.n_subcarriers();
        let delta = self.qam.lattice_step();
        let sums = runner.try_map(self.calibration_blocks, |i| {
            let mut rng = block_rng(self.seed, Stream::Calibration, i as u64);
            let (_, s) = self.qam.random_block(&mut rng, n);
            let b = self.ti_vector(&s)?;
            Ok((energy(&s), energy(&b.apply(&s, delta))))
        })?;
        let (before, after) = sums
            .iter()
            .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
        Ok(after / before)
    }

    fn run_block(&self, index: usize, gain: f64) -> Result<Vec<SerAccumulator>> {
        let n = self.plan.n_subcarriers();
        let l = self.plan.oversampling() as f64;
        let delta = self.qam.lattice_step();
        let es = self.qam.avg_energy();
        let mut rng = block_rng(self.seed, Stream::Blocks, index as u64);

        let (sent, s) = self.qam.random_block(&mut rng, n);
        let b = self.ti_vector(&s)?;
        let mut x = self.plan.idaft(&b.apply(&s, delta))?;
        x.iter_mut().for_each(|v| *v *= gain);
        if let Some(lim) = &self.limiter {
            lim.apply(&mut x);
        }
        let ax: SymbolBlock = self.plan.daft(&x)?;

        let mut out = Vec::with_capacity(self.esn0_db.len());
        for &snr_db in &self.esn0_db {
            let mut y = ax.clone();
            add_awgn(&mut y, l * l * es * 10f64.powf(-snr_db / 10.0), &mut rng);
            let scale = 1.0 / (l * gain);
            y.iter_mut().for_each(|v| *v *= scale);
            let mut acc = SerAccumulator::default();
            let detected = if self.modulo {
                receive(&y, delta, self.qam)
            } else {
                y.iter().map(|&v| self.qam.detect(v)).collect()
            };
            acc.record(&sent, &detected);
            out.push(acc);
        }
        Ok(out)
    }
}

/// Calibrates the power increase, then runs `n_blocks` blocks through the
/// link at every `Es/N0` point. Each block's noise realisations are drawn
/// from the same per-block stream as its symbols.
pub fn run_ser_curve(setup: &SerSetup<'_>, runner: &Runner) -> Result<SerCurve> {
    if setup.qam.avg_energy() <= 0.0 {
        return Err(Error::param("qam", "zero average energy"));
    }
    let power_factor = setup.calibrate(runner)?;
    let gain = power_factor.sqrt().recip();
    let per_block = runner.try_map(setup.n_blocks, |i| setup.run_block(i, gain))?;
    let mut points = vec![SerAccumulator::default(); setup.esn0_db.len()];
    for block in &per_block {
        for (p, b) in points.iter_mut().zip(block) {
            p.merge(b);
        }
    }
    Ok(SerCurve {
        esn0_db: setup.esn0_db.clone(),
        points,
        power_factor,
    })
}
