//! The concrete formal systems: natural numerals under successor, decimal
//! series, open rational intervals under strict inclusion, and the dyadic
//! interval system rooted at `]-1,1[`.

mod interval;
mod rational;

use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_traits::One;

pub use interval::{DyadicInterval, IntervalError, RationalInterval};
pub use rational::{Rational, RationalError, RationalOrder};

use crate::forms::{Alphabet, Form, FormError, FormalLanguage};
use crate::relations::ExtensionRelation;

/// A formal language with an internal extension relation and a root form.
#[derive(Debug, Clone)]
pub struct FormalSystem {
    pub name: String,
    pub language: FormalLanguage,
    pub relation: ExtensionRelation,
    pub root: Form,
    kind: SystemKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SystemKind {
    Naturals,
    Decimal,
    RationalIntervals,
    Dyadic,
    Other,
}

impl FormalSystem {
    pub fn new(
        name: impl Into<String>,
        language: FormalLanguage,
        relation: ExtensionRelation,
        root: Form,
    ) -> Self {
        FormalSystem {
            name: name.into(),
            language,
            relation,
            root,
            kind: SystemKind::Other,
        }
    }

    /// Parses a form of this system. The dyadic system also accepts the
    /// shorthand `D(k,i)` for `]i/2^k,(i+1)/2^k[`.
    pub fn form(&self, text: &str) -> Result<Form, FormError> {
        if self.kind == SystemKind::Dyadic {
            if let Some(d) = DyadicInterval::parse_shorthand(text) {
                return self.language.parse(&d.to_text());
            }
        }
        self.language.parse(text)
    }

    /// The interval denoted by a form of an interval system.
    pub fn interval(&self, form: &Form) -> Option<RationalInterval> {
        match self.kind {
            SystemKind::RationalIntervals | SystemKind::Dyadic => {
                RationalInterval::parse(&form.text()).ok()
            }
            _ => None,
        }
    }

    pub fn is_interval_system(&self) -> bool {
        matches!(self.kind, SystemKind::RationalIntervals | SystemKind::Dyadic)
    }

    pub fn is_dyadic(&self) -> bool {
        self.kind == SystemKind::Dyadic
    }
}

const DIGITS: [&str; 10] = ["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"];

fn numeral_alphabet() -> Arc<Alphabet> {
    static A: OnceLock<Arc<Alphabet>> = OnceLock::new();
    A.get_or_init(|| Arc::new(Alphabet::new("numerals", DIGITS).unwrap()))
        .clone()
}

fn decimal_alphabet() -> Arc<Alphabet> {
    static A: OnceLock<Arc<Alphabet>> = OnceLock::new();
    A.get_or_init(|| {
        let symbols = std::iter::once("0.").chain(DIGITS);
        Arc::new(Alphabet::new("decimal", symbols).unwrap())
    })
    .clone()
}

/// Shared by the rational-interval and dyadic languages.
pub fn interval_alphabet() -> Arc<Alphabet> {
    static A: OnceLock<Arc<Alphabet>> = OnceLock::new();
    A.get_or_init(|| {
        let symbols = ["]", "[", ",", "/", "-"].into_iter().chain(DIGITS);
        Arc::new(Alphabet::new("interval", symbols).unwrap())
    })
    .clone()
}

/// All built-in alphabets, for registries.
pub fn builtin_alphabets() -> Vec<Arc<Alphabet>> {
    vec![numeral_alphabet(), decimal_alphabet(), interval_alphabet()]
}

fn numeral_value(form: &Form) -> Option<BigUint> {
    if form.alphabet().name() != "numerals" || !numeral_well_formed(&form.tokens().collect::<Vec<_>>()) {
        return None;
    }
    form.text().parse().ok()
}

fn numeral_well_formed(tokens: &[&str]) -> bool {
    match tokens {
        [] => false,
        [_] => true,
        [first, ..] => *first != "0",
    }
}

/// `<0, S>`: decimal numerals with `n S m` iff `m = n + 1`.
pub fn naturals_system() -> FormalSystem {
    let alphabet = numeral_alphabet();
    let language = FormalLanguage::new("naturals", alphabet.clone(), numeral_well_formed);
    let a = alphabet.clone();
    let relation = ExtensionRelation::new("S", |f, g| match (numeral_value(f), numeral_value(g)) {
        (Some(n), Some(m)) => m == n + BigUint::one(),
        _ => false,
    })
    .with_enumerator(move |f| match numeral_value(f) {
        Some(n) => vec![Form::from_text(&a, &(n + BigUint::one()).to_string()).unwrap()],
        None => Vec::new(),
    })
    .with_branching_bound(1);
    FormalSystem {
        name: "successor".into(),
        root: language.parse("0").unwrap(),
        language,
        relation,
        kind: SystemKind::Naturals,
    }
}

fn decimal_well_formed(tokens: &[&str]) -> bool {
    matches!(tokens.first(), Some(&"0.")) && tokens[1..].iter().all(|t| *t != "0.")
}

fn is_decimal(f: &Form) -> bool {
    f.alphabet().name() == "decimal" && {
        let p = f.positions();
        p.first() == Some(&0) && p[1..].iter().all(|&t| t != 0)
    }
}

/// Decimal series `0.a1…an`; `f R g` iff `g` is `f` followed by one digit.
pub fn decimal_system() -> FormalSystem {
    let alphabet = decimal_alphabet();
    let language = FormalLanguage::new("decimal", alphabet.clone(), decimal_well_formed);
    let relation = ExtensionRelation::new("E", |f, g| {
        is_decimal(f)
            && is_decimal(g)
            && g.len() == f.len() + 1
            && g.positions()[..f.len()] == *f.positions()
    })
    .with_enumerator(|f| {
        if is_decimal(f) {
            (1..=10u16).map(|d| f.pushed(d)).collect()
        } else {
            Vec::new()
        }
    })
    .with_branching_bound(10);
    FormalSystem {
        name: "decimal-extend".into(),
        root: language.parse("0.").unwrap(),
        language,
        relation,
        kind: SystemKind::Decimal,
    }
}

fn interval_of(f: &Form) -> Option<RationalInterval> {
    if f.alphabet().name() != "interval" {
        return None;
    }
    RationalInterval::parse(&f.text()).ok()
}

fn interval_language(name: &str) -> FormalLanguage {
    FormalLanguage::new(name, interval_alphabet(), |tokens| {
        RationalInterval::parse(&tokens.concat()).is_ok()
    })
}

/// Open rational intervals, `]r1,r2[ R ]s1,s2[` iff `r1 < s1 < s2 < r2`.
/// Infinitely branching, so there is no enumerator.
pub fn rational_interval_system() -> FormalSystem {
    let language = interval_language("rational-interval");
    let relation = ExtensionRelation::new("R", |f, g| match (interval_of(f), interval_of(g)) {
        (Some(a), Some(b)) => a.includes(&b),
        _ => false,
    });
    FormalSystem {
        name: "rational-include".into(),
        root: language.parse("]-1,1[").unwrap(),
        language,
        relation,
        kind: SystemKind::RationalIntervals,
    }
}

/// Strict inclusion that also more than halves the width.
pub fn rational_shrink_system() -> FormalSystem {
    let mut sys = rational_interval_system();
    sys.name = "rational-shrink".into();
    sys.relation = ExtensionRelation::new("R'", |f, g| match (interval_of(f), interval_of(g)) {
        (Some(a), Some(b)) => a.shrinks_to(&b),
        _ => false,
    });
    sys
}

pub fn holds_shrinking(a: &RationalInterval, b: &RationalInterval) -> bool {
    a.shrinks_to(b)
}

/// The form spelling a dyadic node.
pub fn dyadic_form(d: &DyadicInterval) -> Form {
    Form::from_text(&interval_alphabet(), &d.to_text()).expect("interval alphabet spells every node")
}

/// The dyadic node a form spells, if any.
pub fn dyadic_of(f: &Form) -> Option<DyadicInterval> {
    interval_of(f).and_then(|i| DyadicInterval::from_interval(&i))
}

/// Dyadic intervals rooted at `]-1,1[`. Each interval of width `w` has three
/// children of width `w/2`: the left half, the centred half, the right half.
pub fn dyadic_system() -> FormalSystem {
    let language = FormalLanguage::new("dyadic", interval_alphabet(), |tokens| {
        RationalInterval::parse(&tokens.concat())
            .ok()
            .and_then(|i| DyadicInterval::from_interval(&i))
            .is_some()
    });
    let relation = ExtensionRelation::new("Q", |f, g| match (dyadic_of(f), dyadic_of(g)) {
        (Some(a), Some(b)) => a.children().contains(&b),
        _ => false,
    })
    .with_enumerator(|f| match dyadic_of(f) {
        Some(d) => d
            .children()
            .iter()
            .map(dyadic_form)
            .collect(),
        None => Vec::new(),
    })
    .with_branching_bound(3);
    FormalSystem {
        name: "dyadic-refine".into(),
        root: language.parse("]-1,1[").unwrap(),
        language,
        relation,
        kind: SystemKind::Dyadic,
    }
}
