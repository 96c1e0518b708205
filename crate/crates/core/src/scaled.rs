//! Integer images of rational point sets.
//!
//! Multiplying every coordinate by the lcm `D` of all denominators turns the
//! exact geometry into integer geometry: squared distances become integers
//! scaled by `D^2`, and equality and order are preserved. When every scaled
//! coordinate fits in 62 bits the hot loops run on `i128`, otherwise on
//! `BigInt`.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive};

use crate::geometry::Point;
use crate::rat::Rat;

pub(crate) trait Exact:
    Clone + Ord + Hash + Debug + Send + Sync + Integer + Signed + Roots + From<i64>
{
    fn to_big(&self) -> BigInt;
}

impl Exact for i128 {
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Exact for BigInt {
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

pub(crate) struct ScaledSets<T> {
    pub denom: BigInt,
    pub sets: Vec<Vec<(T, T)>>,
}

impl<T: Exact> ScaledSets<T> {
    /// Convert a scaled squared distance back to the rational it represents.
    pub fn unscale_sq(&self, v: &T) -> Rat {
        Rat::new(v.to_big(), &self.denom * &self.denom)
    }
}

pub(crate) enum Scaled {
    Small(ScaledSets<i128>),
    Big(ScaledSets<BigInt>),
}

/// Run `$body` with `$s` bound to whichever representation `$scaled` holds.
macro_rules! with_scaled {
    ($scaled:expr, $s:ident => $body:expr) => {
        match $scaled {
            $crate::scaled::Scaled::Small($s) => $body,
            $crate::scaled::Scaled::Big($s) => $body,
        }
    };
}
pub(crate) use with_scaled;

const SMALL_LIMIT: i128 = 1 << 62;

pub(crate) fn scale(sets: &[&[Point]]) -> Scaled {
    let mut denom = BigInt::one();
    for set in sets {
        for p in *set {
            denom = denom.lcm(p.x.denom());
            denom = denom.lcm(p.y.denom());
        }
    }
    let lift = |r: &Rat| -> BigInt { r.numer() * (&denom / r.denom()) };
    let big: Vec<Vec<(BigInt, BigInt)>> = sets
        .iter()
        .map(|set| set.iter().map(|p| (lift(&p.x), lift(&p.y))).collect())
        .collect();

    let fits = big.iter().flatten().all(|(x, y)| {
        x.to_i128().is_some_and(|v| v.abs() < SMALL_LIMIT)
            && y.to_i128().is_some_and(|v| v.abs() < SMALL_LIMIT)
    });
    if fits {
        let sets = big
            .iter()
            .map(|set| {
                set.iter()
                    .map(|(x, y)| (x.to_i128().unwrap(), y.to_i128().unwrap()))
                    .collect()
            })
            .collect();
        Scaled::Small(ScaledSets { denom, sets })
    } else {
        Scaled::Big(ScaledSets { denom, sets: big })
    }
}

#[inline]
pub(crate) fn sq_dist<T: Exact>(a: &(T, T), b: &(T, T)) -> T {
    let dx = a.0.clone() - b.0.clone();
    let dy = a.1.clone() - b.1.clone();
    dx.clone() * dx + dy.clone() * dy
}
