//! Candidate-ranking tone injection (TI) for peak-to-average power ratio
//! reduction in oversampled OFDM and AFDM.
//!
//! The crate is organised bottom-up:
//!
//! * [`transform`] - oversampled (inverse) discrete affine Fourier transforms
//!   and analytic candidate columns. OFDM is the zero-chirp special case.
//! * [`constellation`] - square QAM, the lattice step and modulo recovery.
//! * [`peaks`] - local peaks, PAPR, CCDF accumulation and the closed-form
//!   power covariance of oversampled samples.
//! * [`ti`] - candidate scoring, greedy CR-TI / FCR-TI and the depth-first
//!   search over the candidate tree.
//! * [`channel`] - soft limiter, AWGN, TI-aware receiver and SER.
//! * [`harness`] - experiment configuration, seeded Monte Carlo and CSV
//!   reports used by the `ti-papr` command-line tool.

pub mod candidate;
pub mod channel;
pub mod constellation;
mod error;
pub mod harness;
pub mod peaks;
pub mod ti;
pub mod transform;

pub use candidate::{CandidateId, Rotation};
pub use constellation::{GaussianInteger, QamConstellation, TiVector};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use peaks::{CcdfAccumulator, PeakSet};
pub use ti::{Scheme, TiConfig, TiResult};
pub use transform::{ChirpParams, SymbolBlock, TimeSignal, TransformPlan};
