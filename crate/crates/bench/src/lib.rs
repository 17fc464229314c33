//! Shared fixtures for the criterion benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ti_papr::{ChirpParams, QamConstellation, SymbolBlock, TransformPlan};

pub struct Fixture {
    pub plan: TransformPlan,
    pub qam: QamConstellation,
    pub blocks: Vec<SymbolBlock>,
}

/// 64-QAM blocks on an `N`-subcarrier, 8x oversampled OFDM plan.
pub fn fixture(n_subcarriers: usize, n_blocks: usize) -> Fixture {
    let plan = TransformPlan::new(n_subcarriers, 8, ChirpParams::OFDM).expect("valid plan");
    let qam = QamConstellation::unit_energy(64).expect("valid constellation");
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let blocks = (0..n_blocks)
        .map(|_| qam.random_block(&mut rng, n_subcarriers).1)
        .collect();
    Fixture { plan, qam, blocks }
}
