//! Identifiers for unit tone-injection candidates.

use std::fmt;

use num_complex::Complex64;

/// Quarter-turn rotation applied to one subcarrier by a candidate.
///
/// The declaration order (`+1, -1, +j, -j`) is the tie-break order used by
/// candidate selection, and matches the column blocks `[I, -I, jI, -jI]` of
/// the frequency-domain candidate matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rotation {
    PlusOne,
    MinusOne,
    PlusJ,
    MinusJ,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [
        Rotation::PlusOne,
        Rotation::MinusOne,
        Rotation::PlusJ,
        Rotation::MinusJ,
    ];

    /// The unit Gaussian integer as `(re, im)`.
    pub fn unit(self) -> (i64, i64) {
        match self {
            Rotation::PlusOne => (1, 0),
            Rotation::MinusOne => (-1, 0),
            Rotation::PlusJ => (0, 1),
            Rotation::MinusJ => (0, -1),
        }
    }

    pub fn as_complex(self) -> Complex64 {
        let (re, im) = self.unit();
        Complex64::new(re as f64, im as f64)
    }

    /// Argument of the rotation in radians, in `(-pi, pi]`.
    pub fn angle(self) -> f64 {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            Rotation::PlusOne => 0.0,
            Rotation::MinusOne => PI,
            Rotation::PlusJ => FRAC_PI_2,
            Rotation::MinusJ => -FRAC_PI_2,
        }
    }

    pub fn negate(self) -> Rotation {
        match self {
            Rotation::PlusOne => Rotation::MinusOne,
            Rotation::MinusOne => Rotation::PlusOne,
            Rotation::PlusJ => Rotation::MinusJ,
            Rotation::MinusJ => Rotation::PlusJ,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rotation::PlusOne => "+1",
            Rotation::MinusOne => "-1",
            Rotation::PlusJ => "+j",
            Rotation::MinusJ => "-j",
        };
        f.write_str(s)
    }
}

/// One column of the candidate matrix: a unit step `rotation` on `subcarrier`.
///
/// Ordering is lexicographic on `(subcarrier, rotation)`, which is the
/// documented tie-break for equal scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateId {
    pub subcarrier: usize,
    pub rotation: Rotation,
}

impl CandidateId {
    pub fn new(subcarrier: usize, rotation: Rotation) -> Self {
        Self {
            subcarrier,
            rotation,
        }
    }

    /// Column index `k + rN` in `[I, -I, jI, -jI]` for `n_subcarriers = N`.
    pub fn column(self, n_subcarriers: usize) -> usize {
        self.subcarrier + self.rotation.index() * n_subcarriers
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.subcarrier, self.rotation)
    }
}
