//! Computable reals in `]-1,1[` as selection rules through the dyadic system.
//!
//! A real is never more than a rule: at each interval it names one of the
//! three children. Everything is exact; comparison at a finite precision can
//! separate two reals but never declares them equal.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::foundation::{chain_prefix, fundamental_neighbourhood, FoundationError, SelectionRule};
use crate::systems::{
    dyadic_form, dyadic_of, dyadic_system, Rational, RationalInterval, RationalOrder,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealError {
    #[error("{0} is outside ]-1,1[")]
    OutOfRange(String),
    #[error("no built-in real named `{0}`")]
    UnknownReal(String),
    #[error(transparent)]
    Foundation(#[from] FoundationError),
}

impl RealError {
    pub fn name(&self) -> &'static str {
        match self {
            RealError::OutOfRange(_) => "OutOfRange",
            RealError::UnknownReal(_) => "UnknownReal",
            RealError::Foundation(e) => e.name(),
        }
    }
}

/// A point of the dyadic foundation.
#[derive(Clone)]
pub struct ComputableReal {
    pub rule: SelectionRule,
    pub label: String,
}

impl fmt::Debug for ComputableReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComputableReal({})", self.label)
    }
}

/// Result of comparing two reals at a precision. There is no `Equal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RealOrdering {
    Less,
    Greater,
    IndistinguishableAt(usize),
}

impl RealOrdering {
    pub fn label(&self) -> String {
        match self {
            RealOrdering::Less => "Less".into(),
            RealOrdering::Greater => "Greater".into(),
            RealOrdering::IndistinguishableAt(k) => format!("IndistinguishableAt({k})"),
        }
    }
}

/// Picks, among the children containing the target, the one of maximal
/// margin; ties go to the leftmost.
///
/// The children have centres `c, c + w/2, c + w`, so the margin is maximal at
/// the nearest centre and the target need only be compared with the two
/// midpoints between consecutive centres.
fn nearest_child(target: &dyn RationalOrder, iv: &RationalInterval) -> Option<usize> {
    if target.cmp_to(iv.lo()) != Ordering::Greater || target.cmp_to(iv.hi()) != Ordering::Less {
        return None;
    }
    let w = iv.width();
    let quarter = w.half().half();
    let eighth = quarter.half();
    let c0 = iv.lo() + &quarter;
    let m01 = &c0 + &quarter - &eighth;
    let m12 = &m01 + &quarter;
    Some(match (target.cmp_to(&m01), target.cmp_to(&m12)) {
        (Ordering::Less | Ordering::Equal, _) => 0,
        (_, Ordering::Less | Ordering::Equal) => 1,
        _ => 2,
    })
}

impl ComputableReal {
    /// The rule converging on a target known only through exact comparisons.
    pub fn from_target(
        label: impl Into<String>,
        target: impl RationalOrder + Send + Sync + 'static,
    ) -> Self {
        let label = label.into();
        let system = dyadic_system();
        let target: Arc<dyn RationalOrder + Send + Sync> = Arc::new(target);
        let rule = SelectionRule::new(label.clone(), &system.relation, system.root.clone(), move |f| {
            let node = dyadic_of(f)?;
            let i = nearest_child(target.as_ref(), &node.interval())?;
            Some(dyadic_form(&node.children()[i]))
        });
        ComputableReal { rule, label }
    }

    pub fn from_rational(p: &Rational) -> Result<Self, RealError> {
        if *p <= -Rational::one() || *p >= Rational::one() {
            return Err(RealError::OutOfRange(p.to_string()));
        }
        Ok(ComputableReal::from_target(p.to_string(), p.clone()))
    }

    pub fn builtin(name: &str) -> Result<Self, RealError> {
        match name {
            "sqrt2m1" | "sqrt2" => Ok(sqrt2_minus_one()),
            _ => Err(RealError::UnknownReal(name.to_string())),
        }
    }
}

/// `√2 − 1`, decided by the sign of `2 − (r+1)²`.
struct Sqrt2MinusOne;

impl RationalOrder for Sqrt2MinusOne {
    fn cmp_to(&self, r: &Rational) -> Ordering {
        let shifted = r + &Rational::one();
        if shifted.is_negative() {
            return Ordering::Greater;
        }
        Rational::from_integer(2).cmp(&shifted.square())
    }
}

pub fn sqrt2_minus_one() -> ComputableReal {
    ComputableReal::from_target("sqrt2m1", Sqrt2MinusOne)
}

pub fn from_rational(p: &Rational) -> Result<ComputableReal, RealError> {
    ComputableReal::from_rational(p)
}

/// An interval of `x`'s chain of width at most `2^-k`: its depth-`k+1` part.
pub fn locate(x: &ComputableReal, k: usize) -> Result<RationalInterval, RealError> {
    let f = fundamental_neighbourhood(&x.rule, k + 1)?;
    Ok(dyadic_of(&f).expect("dyadic chain").interval())
}

/// All intervals of `x`'s chain down to depth `n`.
pub fn chain_intervals(x: &ComputableReal, n: usize) -> Result<Vec<RationalInterval>, RealError> {
    let prefix = chain_prefix(&x.rule, n)?;
    Ok(prefix
        .forms
        .iter()
        .map(|f| dyadic_of(f).expect("dyadic chain").interval())
        .collect())
}

pub fn compare(x: &ComputableReal, y: &ComputableReal, k: usize) -> Result<RealOrdering, RealError> {
    let a = locate(x, k)?;
    let b = locate(y, k)?;
    Ok(if a.hi() <= b.lo() {
        RealOrdering::Less
    } else if b.hi() <= a.lo() {
        RealOrdering::Greater
    } else {
        RealOrdering::IndistinguishableAt(k)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn zero_is_located() {
        let z = from_rational(&Rational::zero()).unwrap();
        let iv = fundamental_neighbourhood(&z.rule, 4).unwrap();
        let iv = dyadic_of(&iv).unwrap().interval();
        assert!(iv.contains(&Rational::zero()));
        assert_eq!(iv.width(), Rational::pow2_neg(3));
        let l = locate(&z, 10).unwrap();
        assert!(l.contains(&Rational::zero()));
        assert!(l.width() <= Rational::pow2_neg(10));
        assert!(locate(&z, 0).unwrap().width() <= Rational::one());
    }

    #[test]
    fn zero_takes_the_centred_child() {
        let z = from_rational(&Rational::zero()).unwrap();
        let texts: Vec<String> = chain_intervals(&z, 2).unwrap().iter().map(|i| i.to_text()).collect();
        assert_eq!(texts, ["]-1,1[", "]-1/2,1/2[", "]-1/4,1/4["]);
    }

    #[test]
    fn third_stays_inside() {
        let t = q(1, 3);
        let x = from_rational(&t).unwrap();
        for iv in chain_intervals(&x, 64).unwrap() {
            assert!(iv.contains(&t));
        }
    }

    #[test]
    fn out_of_range() {
        for bad in [q(2, 1), q(1, 1), q(-1, 1)] {
            assert_eq!(from_rational(&bad).unwrap_err().name(), "OutOfRange");
        }
    }

    #[test]
    fn sqrt2_prefix_against_integer_sqrt() {
        let x = sqrt2_minus_one();
        let iv = fundamental_neighbourhood(&x.rule, 20).unwrap();
        let iv = dyadic_of(&iv).unwrap().interval();
        assert_eq!(iv.width(), Rational::pow2_neg(19));
        assert!(iv.contains(&q(41421356, 100_000_000)));
        // isqrt(2·10^16) = 141421356, so 0.41421356 < √2−1 < 0.41421357
        let root = (BigInt::from(2) * BigInt::from(10).pow(16)).sqrt();
        assert_eq!(root, BigInt::from(141421356));
        for iv in chain_intervals(&x, 60).unwrap() {
            let two = Rational::from_integer(2);
            let lo1 = iv.lo() + &Rational::one();
            let hi1 = iv.hi() + &Rational::one();
            assert!(lo1.square() < two && two < hi1.square());
        }
        let r = from_rational(&q(41, 100)).unwrap();
        assert_eq!(compare(&x, &r, 10).unwrap(), RealOrdering::Greater);
    }

    #[test]
    fn comparisons() {
        let a = from_rational(&q(-1, 2)).unwrap();
        let b = from_rational(&q(1, 2)).unwrap();
        assert_eq!(compare(&a, &b, 4).unwrap(), RealOrdering::Less);
        assert_eq!(compare(&b, &a, 4).unwrap(), RealOrdering::Greater);
        for k in 0..20 {
            assert_eq!(compare(&a, &a, k).unwrap(), RealOrdering::IndistinguishableAt(k));
        }
        let t = q(1, 3);
        let x = from_rational(&t).unwrap();
        let y = from_rational(&(&t + &Rational::pow2_neg(20))).unwrap();
        assert_eq!(compare(&x, &y, 10).unwrap(), RealOrdering::IndistinguishableAt(10));
        assert_eq!(compare(&x, &y, 30).unwrap(), RealOrdering::Less);
    }

    #[test]
    fn ties_go_left() {
        // root children have centres -1/2, 0, 1/2
        let x = from_rational(&q(1, 4)).unwrap();
        let first = chain_intervals(&x, 1).unwrap()[1].to_text();
        assert_eq!(first, "]-1/2,1/2[");
        let y = from_rational(&q(-1, 4)).unwrap();
        assert_eq!(chain_intervals(&y, 1).unwrap()[1].to_text(), "]-1,0[");
    }

    fn rational_in_range() -> impl Strategy<Value = Rational> {
        (1i64..2000).prop_flat_map(|d| (-(d - 1)..d, Just(d))).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #[test]
        fn width_nesting_and_soundness(p in rational_in_range()) {
            let x = from_rational(&p).unwrap();
            let chain = chain_intervals(&x, 65).unwrap();
            for (n, iv) in chain.iter().enumerate() {
                prop_assert!(iv.contains(&p));
                prop_assert_eq!(iv.width(), Rational::from_integer(2) * Rational::pow2_neg(n as u32));
            }
            for w in chain.windows(2) {
                prop_assert!(w[1].within_closure_of(&w[0]));
            }
            for k in [0usize, 1, 7, 33, 64] {
                prop_assert!(locate(&x, k).unwrap().width() <= Rational::pow2_neg(k as u32));
            }
        }

        #[test]
        fn maximal_margin(p in rational_in_range()) {
            // Independent oracle: among the containing children, the one
            // maximizing min(p - lo, hi - p), leftmost on ties.
            let x = from_rational(&p).unwrap();
            let prefix = chain_prefix(&x.rule, 12).unwrap();
            for pair in prefix.forms.windows(2) {
                let parent = dyadic_of(&pair[0]).unwrap();
                let mut best: Option<(Rational, usize)> = None;
                for (i, c) in parent.children().iter().enumerate() {
                    let iv = c.interval();
                    if !iv.contains(&p) { continue; }
                    let m = std::cmp::min(&p - iv.lo(), iv.hi() - &p);
                    if best.as_ref().is_none_or(|(b, _)| m > *b) {
                        best = Some((m, i));
                    }
                }
                let want = parent.children()[best.unwrap().1].clone();
                prop_assert_eq!(dyadic_of(&pair[1]).unwrap(), want);
            }
        }

        #[test]
        fn separation_is_stable(a in rational_in_range(), b in rational_in_range(), k in 0usize..30) {
            let x = from_rational(&a).unwrap();
            let y = from_rational(&b).unwrap();
            let r = compare(&x, &y, k).unwrap();
            if r != RealOrdering::IndistinguishableAt(k) {
                prop_assert_eq!(compare(&x, &y, k + 5).unwrap(), r);
                let expected = if a < b { RealOrdering::Less } else { RealOrdering::Greater };
                prop_assert_eq!(r, expected);
            }
        }
    }
}
