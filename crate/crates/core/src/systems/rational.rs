use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// An exact rational in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalError {
    #[error("`{0}` is not a rational numeral")]
    Syntax(String),
    #[error("`{0}` is not in lowest terms")]
    NotCanonical(String),
    #[error("zero denominator")]
    ZeroDenominator,
}

impl Rational {
    pub fn new(numerator: impl Into<BigInt>, denominator: impl Into<BigInt>) -> Result<Self, RationalError> {
        let d = denominator.into();
        if d.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(numerator.into(), d)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Rational(BigRational::new(BigInt::one(), BigInt::one() << k))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn square(&self) -> Self {
        Rational(&self.0 * &self.0)
    }

    pub fn half(&self) -> Self {
        Rational(&self.0 / BigInt::from(2))
    }

    pub fn midpoint(&self, other: &Rational) -> Self {
        (self + other).half()
    }

    /// Parses `p` or `p/q`, accepting only the canonical spelling.
    pub fn parse_canonical(text: &str) -> Result<Self, RationalError> {
        let r: Rational = text.parse()?;
        if r.to_string() != text {
            return Err(RationalError::NotCanonical(text.to_string()));
        }
        Ok(r)
    }

    /// A decimal expansion truncated toward zero, for diagnostics.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10), digits);
        let scaled = (self.numer() * &scale) / self.denom();
        let neg = scaled.is_negative() || (scaled.is_zero() && self.is_negative());
        let mag = scaled.abs().to_string();
        let mag = format!("{:0>width$}", mag, width = digits + 1);
        let (int, frac) = mag.split_at(mag.len() - digits);
        format!("{}{int}.{frac}", if neg { "-" } else { "" })
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    /// Accepts `-?digits(/digits)?`; reduces to lowest terms.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || RationalError::Syntax(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
        let body = num.strip_prefix('-').unwrap_or(num);
        if !digits(body) || den.is_some_and(|d| !digits(d)) {
            return Err(syntax());
        }
        let n: BigInt = num.parse().map_err(|_| syntax())?;
        let d: BigInt = match den {
            Some(d) => d.parse().map_err(|_| syntax())?,
            None => BigInt::one(),
        };
        Rational::new(n, d)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational($tr::$m(&self.0, &rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational($tr::$m(self.0, rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational($tr::$m(self.0, &rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// Exact order between a rational and a target point.
pub trait RationalOrder {
    /// Ordering of the target relative to `r`.
    fn cmp_to(&self, r: &Rational) -> Ordering;
}

impl RationalOrder for Rational {
    fn cmp_to(&self, r: &Rational) -> Ordering {
        self.cmp(r)
    }
}
