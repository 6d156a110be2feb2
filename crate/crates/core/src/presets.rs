//! Strategy tables of the known good strategies.

use crate::error::{Error, Result};
use crate::game::HStrategy;
use crate::recursive::{RecursivePair, SkipRule};

/// K_{3,3}, the 3-hat base of the order-3 recursive strategy.
pub const K33_A: [u8; 8] = [1, 3, 2, 2, 1, 3, 1, 1];
pub const K33_B: [u8; 8] = [1, 3, 2, 3, 1, 1, 2, 1];

/// K_{5,5}, symmetric 5-hat base of the order-5 recursive strategy.
pub const K55: [u8; 32] = [
    2, 3, 2, 3, 5, 5, 5, 5, 4, 3, 2, 3, 5, 5, 5, 5, 1, 3, 1, 3, 1, 5, 1, 1, 1, 3, 1, 3, 1, 4, 1, 5,
];

/// A non-symmetric 5-hat pair with the same value as K_{5,5}.
pub const K5_NONSYM_A: [u8; 32] = [
    1, 5, 4, 5, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 3, 1, 1, 1, 1, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 4, 1,
];
pub const K5_NONSYM_B: [u8; 32] = [
    1, 5, 4, 4, 2, 2, 2, 2, 3, 3, 3, 3, 3, 3, 3, 3, 1, 1, 1, 1, 2, 2, 2, 2, 1, 1, 1, 1, 2, 5, 3, 1,
];

fn fixed(h: u32, table: &[u8]) -> HStrategy {
    HStrategy::from_slice(h, table).expect("preset tables are valid")
}

pub fn fbh_pair(h: u32) -> (HStrategy, HStrategy) {
    let k = HStrategy::first_black_hat(h).expect("valid height");
    (k.clone(), k)
}

pub fn k33() -> (HStrategy, HStrategy) {
    (fixed(3, &K33_A), fixed(3, &K33_B))
}

pub fn k55() -> (HStrategy, HStrategy) {
    (fixed(5, &K55), fixed(5, &K55))
}

pub fn k5_nonsymmetric() -> (HStrategy, HStrategy) {
    (fixed(5, &K5_NONSYM_A), fixed(5, &K5_NONSYM_B))
}

/// Named presets accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// First black hat at height 3.
    Fbh3,
    K33,
    K55,
    K5NonSymmetric,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fbh3, Preset::K33, Preset::K55, Preset::K5NonSymmetric];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fbh3 => "fbh3",
            Preset::K33 => "k33",
            Preset::K55 => "k55",
            Preset::K5NonSymmetric => "k5ns",
        }
    }

    pub fn pair(self) -> (HStrategy, HStrategy) {
        match self {
            Preset::Fbh3 => fbh_pair(3),
            Preset::K33 => k33(),
            Preset::K55 => k55(),
            Preset::K5NonSymmetric => k5_nonsymmetric(),
        }
    }

    /// The recursive strategy built on this pair. The first black hat maps to
    /// its order-1 form rather than to a height-3 base.
    pub fn recursive(self) -> RecursivePair {
        match self {
            Preset::Fbh3 => RecursivePair::first_black_hat(),
            other => {
                let (a, b) = other.pair();
                RecursivePair::new(a, b, SkipRule::Monochromatic).expect("preset is valid")
            }
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    /// Case-insensitive; also accepts the names of the recursive strategies
    /// (`FBH`, `K3`, `K5`, `K5NS`).
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fbh" | "fbh3" => Ok(Preset::Fbh3),
            "k3" | "k33" => Ok(Preset::K33),
            "k5" | "k55" => Ok(Preset::K55),
            "k5ns" | "k5-nonsym" | "k5nonsym" => Ok(Preset::K5NonSymmetric),
            _ => Err(Error::InvalidArgument(format!(
                "unknown preset {s:?} (expected fbh, k3, k5 or k5ns)"
            ))),
        }
    }
}
