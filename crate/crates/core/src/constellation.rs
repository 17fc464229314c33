//! Square QAM, the tone-injection lattice and modulo recovery.
//!
//! Labeling: symbol index `i = row * m + col` with `m = sqrt(M)`. The column
//! label is the reflected-binary Gray code of the in-phase level position
//! (left to right) and the row label is the Gray code of the quadrature level
//! position (bottom to top). Index 0 is therefore the lower-left corner.

use std::ops::{Add, AddAssign};

use num_complex::Complex64;
use rand::Rng;

use crate::transform::SymbolBlock;
use crate::{Error, Result};

fn gray(p: usize) -> usize {
    p ^ (p >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut p = g;
    while g > 0 {
        g >>= 1;
        p ^= g;
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct QamConstellation {
    order: usize,
    side: usize,
    min_distance: f64,
    /// Points by symbol index.
    points: Vec<Complex64>,
    /// Symbol index by `(row position, column position)`.
    index_at: Vec<usize>,
}

impl QamConstellation {
    /// Square `order`-QAM with the given minimum distance.
    pub fn new(order: usize, min_distance: f64) -> Result<Self> {
        let side = (order as f64).sqrt().round() as usize;
        if order < 4 || side * side != order || !side.is_power_of_two() {
            return Err(Error::param(
                "constellation_order",
                format!("{order} is not a square power of two >= 4"),
            ));
        }
        if !(min_distance > 0.0 && min_distance.is_finite()) {
            return Err(Error::param("min_distance", "must be positive"));
        }
        let half = min_distance / 2.0;
        let level = |p: usize| (2.0 * p as f64 - (side as f64 - 1.0)) * half;
        let mut points = vec![Complex64::new(0.0, 0.0); order];
        let mut index_at = vec![0; order];
        for row_label in 0..side {
            for col_label in 0..side {
                let idx = row_label * side + col_label;
                let (rp, cp) = (gray_inverse(row_label), gray_inverse(col_label));
                points[idx] = Complex64::new(level(cp), level(rp));
                index_at[rp * side + cp] = idx;
            }
        }
        Ok(QamConstellation {
            order,
            side,
            min_distance,
            points,
            index_at,
        })
    }

    /// Square `order`-QAM scaled to unit average energy.
    pub fn unit_energy(order: usize) -> Result<Self> {
        let d = (6.0 / (order as f64 - 1.0)).sqrt();
        Self::new(order, d)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// `E_s = d^2 (M - 1) / 6`.
    pub fn avg_energy(&self) -> f64 {
        self.min_distance.powi(2) * (self.order as f64 - 1.0) / 6.0
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Tone-injection lattice step `delta = d * sqrt(M)`.
    pub fn lattice_step(&self) -> f64 {
        self.min_distance * self.side as f64
    }

    /// Draws `n` i.i.d. uniform symbol indices.
    pub fn random_indices<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<usize> {
        (0..n).map(|_| rng.random_range(0..self.order)).collect()
    }

    pub fn map_indices(&self, indices: &[usize]) -> SymbolBlock {
        indices.iter().map(|&i| self.points[i]).collect()
    }

    /// Draws a block of `n` i.i.d. uniform symbols, returning indices and values.
    pub fn random_block<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> (Vec<usize>, SymbolBlock) {
        let idx = self.random_indices(rng, n);
        let block = self.map_indices(&idx);
        (idx, block)
    }

    /// Level position along one axis, nearest first; ties go to the smaller label.
    fn axis_position(&self, v: f64) -> usize {
        let t = (v / self.min_distance + (self.side as f64 - 1.0) / 2.0).clamp(0.0, (self.side - 1) as f64);
        let lo = t.floor();
        let frac = t - lo;
        let lo = lo as usize;
        if lo + 1 >= self.side || frac < 0.5 {
            lo
        } else if frac > 0.5 {
            lo + 1
        } else if gray(lo) < gray(lo + 1) {
            lo
        } else {
            lo + 1
        }
    }

    /// Nearest constellation point; equidistant points resolve to the lower index.
    pub fn detect(&self, value: Complex64) -> usize {
        let cp = self.axis_position(value.re);
        let rp = self.axis_position(value.im);
        self.index_at[rp * self.side + cp]
    }
}

/// Complex number with integer components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct GaussianInteger {
    pub re: i64,
    pub im: i64,
}

impl GaussianInteger {
    pub const ZERO: GaussianInteger = GaussianInteger { re: 0, im: 0 };

    pub fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re as f64, self.im as f64)
    }

    pub fn norm_sqr(self) -> i64 {
        self.re * self.re + self.im * self.im
    }
}

impl Add for GaussianInteger {
    type Output = GaussianInteger;
    fn add(self, o: GaussianInteger) -> GaussianInteger {
        GaussianInteger::new(self.re + o.re, self.im + o.im)
    }
}

impl AddAssign for GaussianInteger {
    fn add_assign(&mut self, o: GaussianInteger) {
        self.re += o.re;
        self.im += o.im;
    }
}

/// Per-subcarrier tone-injection integers `b`. All zeros means no injection.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TiVector(pub Vec<GaussianInteger>);

impl TiVector {
    pub fn zeros(n: usize) -> Self {
        TiVector(vec![GaussianInteger::ZERO; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|g| *g == GaussianInteger::ZERO)
    }

    pub fn entries(&self) -> &[GaussianInteger] {
        &self.0
    }

    /// `s + delta * b`.
    pub fn apply(&self, s: &[Complex64], delta: f64) -> SymbolBlock {
        s.iter()
            .zip(&self.0)
            .map(|(&sk, bk)| sk + bk.to_complex() * delta)
            .collect()
    }

    /// Squared Euclidean distance `||self - other||^2`.
    pub fn distance_sqr(&self, other: &TiVector) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| GaussianInteger::new(a.re - b.re, a.im - b.im).norm_sqr())
            .sum()
    }
}

/// Receiver-side removal of the injected lattice point, per component:
/// `v - delta * floor(v / delta + 1/2)`. Each output component lies in
/// `[-delta/2, delta/2)`.
pub fn modulo_recover(value: Complex64, delta: f64) -> Complex64 {
    let fold = |v: f64| v - delta * (v / delta + 0.5).floor();
    Complex64::new(fold(value.re), fold(value.im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_non_square_orders() {
        assert!(QamConstellation::new(8, 1.0).is_err());
        assert!(QamConstellation::new(2, 1.0).is_err());
        assert!(QamConstellation::new(36, 1.0).is_err());
        assert!(QamConstellation::new(16, 0.0).is_err());
    }

    #[test]
    fn lattice_steps() {
        let q64 = QamConstellation::unit_energy(64).unwrap();
        // sqrt(6/63) * 8, evaluated independently.
        assert!((q64.lattice_step() - 2.468_853_599_393_470_6).abs() < 1e-12);
        assert!((q64.avg_energy() - 1.0).abs() < 1e-12);

        let q4 = QamConstellation::new(4, 2.0).unwrap();
        assert_eq!(q4.lattice_step(), 4.0);

        let qpsk = QamConstellation::unit_energy(4).unwrap();
        assert!((qpsk.min_distance() - 2f64.sqrt()).abs() < 1e-15);
        assert!((qpsk.lattice_step() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn documented_labeling() {
        let q4 = QamConstellation::new(4, 2.0).unwrap();
        assert_eq!(q4.point(0), Complex64::new(-1.0, -1.0));
        assert_eq!(q4.point(1), Complex64::new(1.0, -1.0));
        assert_eq!(q4.point(2), Complex64::new(-1.0, 1.0));
        // Gray: neighbours along an axis differ in one label bit.
        let q16 = QamConstellation::new(16, 2.0).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                if (q16.point(i) - q16.point(j)).norm() == 2.0 {
                    assert_eq!((i ^ j).count_ones(), 1, "{i} {j}");
                }
            }
        }
    }

    #[test]
    fn points_are_average_energy_and_inside_cell() {
        for m in [4, 16, 64, 256] {
            let q = QamConstellation::unit_energy(m).unwrap();
            let e: f64 = q.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert!((e - 1.0).abs() < 1e-12);
            let half = q.lattice_step() / 2.0;
            for p in q.points() {
                assert!(p.re.abs() < half && p.im.abs() < half);
            }
        }
    }

    #[test]
    fn random_symbols_have_zero_mean_and_unit_energy() {
        let q = QamConstellation::unit_energy(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (_, s) = q.random_block(&mut rng, 100_000);
        let mean: Complex64 = s.iter().sum::<Complex64>() / s.len() as f64;
        let energy = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / s.len() as f64;
        assert!(mean.norm() < 0.02);
        assert!((energy - 1.0).abs() < 0.01);
    }

    #[test]
    fn detect_exact_and_noisy_points() {
        let q = QamConstellation::unit_energy(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = q.min_distance() / 2.0 * 0.999;
        for i in 0..64 {
            assert_eq!(q.detect(q.point(i)), i);
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let noisy = q.point(i) + Complex64::from_polar(r * rng.random::<f64>(), th);
            assert_eq!(q.detect(noisy), i);
        }
    }

    #[test]
    fn detect_matches_brute_force() {
        for m in [4, 16, 64] {
            let q = QamConstellation::unit_energy(m).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(m as u64);
            for _ in 0..20_000 {
                let v = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, p) in q.points().iter().enumerate() {
                    let d = (v - p).norm_sqr();
                    if d < best_d {
                        best_d = d;
                        best = i;
                    }
                }
                assert_eq!(q.detect(v), best);
            }
        }
    }

    #[test]
    fn detect_ties_prefer_lower_index() {
        let q = QamConstellation::new(4, 2.0).unwrap();
        // Origin is equidistant from all four points.
        assert_eq!(q.detect(Complex64::new(0.0, 0.0)), 0);
        assert_eq!(q.detect(Complex64::new(0.0, 1.0)), 2);
    }

    #[test]
    fn modulo_identity_and_boundary() {
        let delta = 4.0;
        let s = Complex64::new(1.5, -1.9);
        assert_eq!(modulo_recover(s, delta), s);
        let edge = modulo_recover(Complex64::new(2.0, 0.0), delta);
        assert_eq!(edge.re, -2.0);
    }

    #[test]
    fn ti_vector_apply() {
        let b = TiVector(vec![GaussianInteger::new(1, -1), GaussianInteger::ZERO]);
        let s = [Complex64::new(0.5, 0.5), Complex64::new(-0.5, 0.0)];
        let t = b.apply(&s, 2.0);
        assert_eq!(t[0], Complex64::new(2.5, -1.5));
        assert_eq!(t[1], s[1]);
        assert!(!b.is_zero());
        assert!(TiVector::zeros(3).is_zero());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn modulo_undoes_any_lattice_shift(
                m_pow in 1u32..5,
                idx in 0usize..256,
                a in -100i64..=100,
                b in -100i64..=100,
            ) {
                let m = 4usize.pow(m_pow);
                let q = QamConstellation::unit_energy(m).unwrap();
                let s = q.point(idx % m);
                let delta = q.lattice_step();
                let shifted = s + GaussianInteger::new(a, b).to_complex() * delta;
                let r = modulo_recover(shifted, delta);
                prop_assert!((r.re - s.re).abs() < 1e-9);
                prop_assert!((r.im - s.im).abs() < 1e-9);
                prop_assert_eq!(q.detect(r), idx % m);
            }

            #[test]
            fn modulo_output_in_fundamental_cell(re in -1e3f64..1e3, im in -1e3f64..1e3, delta in 0.1f64..10.0) {
                let r = modulo_recover(Complex64::new(re, im), delta);
                prop_assert!(r.re >= -delta / 2.0 - 1e-9 && r.re < delta / 2.0 + 1e-9);
                prop_assert!(r.im >= -delta / 2.0 - 1e-9 && r.im < delta / 2.0 + 1e-9);
            }
        }
    }
}
