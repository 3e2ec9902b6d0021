use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use super::rational::{Rational, RationalError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntervalError {
    #[error("interval needs lo < hi, got ]{0},{1}[")]
    Degenerate(String, String),
    #[error("`{0}` is not an interval form ]p/q,r/s[")]
    Syntax(String),
    #[error(transparent)]
    Rational(#[from] RationalError),
}

/// An open, non-degenerate interval `]lo,hi[` with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalInterval {
    lo: Rational,
    hi: Rational,
}

impl RationalInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, IntervalError> {
        if lo >= hi {
            return Err(IntervalError::Degenerate(lo.to_string(), hi.to_string()));
        }
        Ok(RationalInterval { lo, hi })
    }

    /// Parses the canonical text `]p/q,r/s[`.
    pub fn parse(text: &str) -> Result<Self, IntervalError> {
        let syntax = || IntervalError::Syntax(text.to_string());
        let body = text
            .strip_prefix(']')
            .and_then(|t| t.strip_suffix('['))
            .ok_or_else(syntax)?;
        let (lo, hi) = body.split_once(',').ok_or_else(syntax)?;
        RationalInterval::new(Rational::parse_canonical(lo)?, Rational::parse_canonical(hi)?)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Rational {
        self.lo.midpoint(&self.hi)
    }

    pub fn contains(&self, p: &Rational) -> bool {
        &self.lo < p && p < &self.hi
    }

    /// Strict inclusion `lo < other.lo < other.hi < hi`.
    pub fn includes(&self, other: &RationalInterval) -> bool {
        self.lo < other.lo && other.hi < self.hi
    }

    /// Strict inclusion with `width(other) < width(self) / 2`.
    pub fn shrinks_to(&self, other: &RationalInterval) -> bool {
        self.includes(other) && other.width() < self.width().half()
    }

    /// Inclusion in the closure `[lo, hi]`.
    pub fn within_closure_of(&self, outer: &RationalInterval) -> bool {
        outer.lo <= self.lo && self.hi <= outer.hi
    }

    pub fn to_text(&self) -> String {
        format!("]{},{}[", self.lo, self.hi)
    }

    pub fn to_json(&self) -> IntervalJson {
        IntervalJson {
            lo: self.lo.to_string(),
            hi: self.hi.to_string(),
            width: self.width().to_string(),
        }
    }
}

/// `{"lo":"p/q","hi":"r/s","width":"u/v"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalJson {
    pub lo: String,
    pub hi: String,
    pub width: String,
}

/// A node of the dyadic system: `]i/2^d, (i+2)/2^d[` at depth `d`.
///
/// Depth 0 is the root `]-1,1[`; a depth-`d` node has width `2^(1-d)` and
/// lies inside `[-1,1]`, so `-2^d ≤ i ≤ 2^d - 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    depth: u32,
    index: BigInt,
}

impl DyadicInterval {
    pub fn new(depth: u32, index: impl Into<BigInt>) -> Option<Self> {
        let index = index.into();
        let scale = BigInt::one() << depth;
        let low = -scale.clone();
        let high = scale - 2;
        (index >= low && index <= high).then_some(DyadicInterval { depth, index })
    }

    pub fn root() -> Self {
        DyadicInterval {
            depth: 0,
            index: BigInt::from(-1),
        }
    }

    /// `D(k,i)` denotes `]i/2^k,(i+1)/2^k[`, contained in `[-1,1]`.
    pub fn shorthand(k: u32, i: i64) -> Option<Self> {
        let scale = 1i128 << k.min(100);
        if k > 100 || (i as i128) < -scale || (i as i128) > scale - 1 {
            return None;
        }
        DyadicInterval::new(k + 1, BigInt::from(i) * 2)
    }

    pub fn parse_shorthand(text: &str) -> Option<Self> {
        let body = text.strip_prefix("D(")?.strip_suffix(')')?;
        let (k, i) = body.split_once(',')?;
        DyadicInterval::shorthand(k.trim().parse().ok()?, i.trim().parse().ok()?)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn index(&self) -> &BigInt {
        &self.index
    }

    /// Recovers the node from its interval, if it is one.
    pub fn from_interval(iv: &RationalInterval) -> Option<Self> {
        let w = iv.width();
        // width must be 2 / 2^d
        let two_over = Rational::from_integer(2) / &w;
        if !two_over.denom().is_one() || !two_over.numer().is_positive() {
            return None;
        }
        let scale = two_over.numer().clone();
        if (&scale & (&scale - 1u32)) != BigInt::zero() {
            return None;
        }
        let depth = scale.bits() as u32 - 1;
        let scaled = iv.lo() * &Rational::from_integer(scale);
        if !scaled.denom().is_one() {
            return None;
        }
        DyadicInterval::new(depth, scaled.numer().clone())
    }

    pub fn interval(&self) -> RationalInterval {
        let scale = BigInt::one() << self.depth;
        let lo = Rational::new(self.index.clone(), scale.clone()).unwrap();
        let hi = Rational::new(&self.index + 2, scale).unwrap();
        RationalInterval::new(lo, hi).unwrap()
    }

    pub fn to_text(&self) -> String {
        self.interval().to_text()
    }

    /// Left half, centred half, right half.
    pub fn children(&self) -> [DyadicInterval; 3] {
        let base: BigInt = &self.index * 2;
        let d = self.depth + 1;
        [
            DyadicInterval { depth: d, index: base.clone() },
            DyadicInterval { depth: d, index: &base + 1 },
            DyadicInterval { depth: d, index: base + 2 },
        ]
    }

    pub fn is_even_aligned(&self) -> bool {
        self.index.is_even()
    }
}
