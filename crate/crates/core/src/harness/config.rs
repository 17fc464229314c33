//! Experiment configuration file.
//!
//! A TOML document with one table per concern. Every table and key is
//! optional and falls back to the reference setup (N = 256, L = 8, 64-QAM,
//! `beta = 4`, FCR threshold 5 dB, limiter 4.5 dB). Unknown keys are rejected.
//!
//! ```toml
//! [system]
//! waveform = "afdm"       # "ofdm" or "afdm"; AFDM defaults to alpha1 = 1/(2N)
//! n_subcarriers = 128
//!
//! [ti]
//! scheme = "fcr"          # "none", "cr" or "fcr"
//! max_iters = 20
//! n_peaks = 16
//! n_filtered = 32
//!
//! [monte_carlo]
//! n_blocks = 10000
//! seed = 1
//! ```

use serde::{Deserialize, Serialize};

use crate::constellation::QamConstellation;
use crate::ti::{Scheme, TiConfig};
use crate::transform::{ChirpParams, TransformPlan};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Waveform {
    Ofdm,
    Afdm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeChoice {
    None,
    Cr,
    Fcr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub waveform: Waveform,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha2: Option<f64>,
    pub n_subcarriers: usize,
    pub oversampling: usize,
    pub qam_order: usize,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            waveform: Waveform::Ofdm,
            alpha1: None,
            alpha2: None,
            n_subcarriers: 256,
            oversampling: 8,
            qam_order: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TiSection {
    pub scheme: SchemeChoice,
    pub beta: f64,
    pub max_iters: usize,
    pub n_peaks: usize,
    /// Ignored unless `scheme = "fcr"`.
    pub n_filtered: usize,
    pub clip_threshold_db: f64,
    pub dfs_enabled: bool,
}

impl Default for TiSection {
    fn default() -> Self {
        TiSection {
            scheme: SchemeChoice::Cr,
            beta: 4.0,
            max_iters: 20,
            n_peaks: 16,
            n_filtered: 32,
            clip_threshold_db: 5.0,
            dfs_enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloSection {
    pub n_blocks: usize,
    pub seed: u64,
    /// Blocks used to measure the power increase before an SER sweep.
    pub calibration_blocks: usize,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        MonteCarloSection {
            n_blocks: 10_000,
            seed: 1,
            calibration_blocks: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub limiter_enabled: bool,
    /// Soft-limiter threshold above `E_s`.
    pub limiter_db: f64,
    pub esn0_db: Vec<f64>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            limiter_enabled: true,
            limiter_db: 4.5,
            esn0_db: (0..=15).map(|i| 2.0 * i as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovcheckSection {
    /// Sample lags; defaults to `1..=L`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lags: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexitySection {
    pub sizes: Vec<usize>,
    /// Derive `N_p = 2 log2 N` and `N_c = round(N L / (8 log2 N))` per size
    /// instead of using the `[ti]` values.
    pub scaling_rule: bool,
}

impl Default for ComplexitySection {
    fn default() -> Self {
        ComplexitySection {
            sizes: vec![128, 256, 512],
            scaling_rule: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub ti: TiSection,
    pub monte_carlo: MonteCarloSection,
    pub channel: ChannelSection,
    pub covcheck: CovcheckSection,
    pub complexity: ComplexitySection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    /// Parses and validates a config document.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn emit(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn chirp(&self) -> Result<ChirpParams> {
        let sys = &self.system;
        match sys.waveform {
            Waveform::Ofdm => {
                if sys.alpha1.unwrap_or(0.0) != 0.0 || sys.alpha2.unwrap_or(0.0) != 0.0 {
                    return Err(Error::config("system.alpha1", "chirp values require waveform = \"afdm\""));
                }
                Ok(ChirpParams::OFDM)
            }
            Waveform::Afdm => {
                let default = ChirpParams::afdm_default(sys.n_subcarriers.max(1));
                let a1 = sys.alpha1.unwrap_or(default.alpha1);
                let a2 = sys.alpha2.unwrap_or(default.alpha2);
                ChirpParams::new(a1, a2).map_err(|e| Error::config("system.alpha1", e.to_string()))
            }
        }
    }

    pub fn plan(&self) -> Result<TransformPlan> {
        self.plan_for(self.system.n_subcarriers)
    }

    /// The plan with `N` replaced, keeping the AFDM default chirp tied to `N`.
    pub fn plan_for(&self, n_subcarriers: usize) -> Result<TransformPlan> {
        let mut c = self.clone();
        c.system.n_subcarriers = n_subcarriers;
        TransformPlan::new(n_subcarriers, self.system.oversampling, c.chirp()?)
            .map_err(|e| Error::config("system.n_subcarriers", e.to_string()))
    }

    pub fn constellation(&self) -> Result<QamConstellation> {
        QamConstellation::unit_energy(self.system.qam_order)
            .map_err(|e| Error::config("system.qam_order", e.to_string()))
    }

    /// The solver settings, or `None` for `scheme = "none"`.
    pub fn ti_config(&self) -> Option<TiConfig> {
        let t = &self.ti;
        let scheme = match t.scheme {
            SchemeChoice::None => return None,
            SchemeChoice::Cr => Scheme::Cr,
            SchemeChoice::Fcr => Scheme::Fcr,
        };
        Some(TiConfig {
            scheme,
            beta: t.beta,
            max_iters: t.max_iters,
            n_peaks: t.n_peaks,
            n_filtered: if scheme == Scheme::Fcr { t.n_filtered } else { usize::MAX },
            clip_threshold_db: t.clip_threshold_db,
            dfs_enabled: t.dfs_enabled,
        })
    }

    /// Checks every field, naming the first offending one.
    pub fn validate(&self) -> Result<()> {
        let sys = &self.system;
        if sys.n_subcarriers < 2 {
            return Err(Error::config("system.n_subcarriers", "must be at least 2"));
        }
        if sys.oversampling == 0 {
            return Err(Error::config("system.oversampling", "must be positive"));
        }
        self.chirp()?;
        self.constellation()?;
        if let Some(t) = self.ti_config() {
            t.validate(sys.n_subcarriers).map_err(|e| match e {
                Error::InvalidParameter { name, reason } => Error::config(format!("ti.{name}"), reason),
                other => other,
            })?;
        }
        if self.monte_carlo.n_blocks == 0 {
            return Err(Error::config("monte_carlo.n_blocks", "must be positive"));
        }
        if !self.channel.limiter_db.is_finite() {
            return Err(Error::config("channel.limiter_db", "must be finite; set limiter_enabled = false instead"));
        }
        if self.channel.esn0_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("channel.esn0_db", "entries must be finite"));
        }
        if let Some(lags) = &self.covcheck.lags {
            if lags.is_empty() || lags.iter().any(|&d| d == 0 || d >= sys.n_subcarriers * sys.oversampling) {
                return Err(Error::config("covcheck.lags", "entries must be in [1, L*N)"));
            }
        }
        for &n in &self.complexity.sizes {
            if n < 2 {
                return Err(Error::config("complexity.sizes", "entries must be at least 2"));
            }
            if !self.complexity.scaling_rule && self.ti.scheme == SchemeChoice::Fcr && self.ti.n_filtered > n {
                return Err(Error::config("complexity.sizes", format!("n_filtered exceeds N = {n}")));
            }
        }
        Ok(())
    }
}
