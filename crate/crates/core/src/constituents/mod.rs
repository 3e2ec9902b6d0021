//! Finite models, first-order satisfaction, and depth-`d` constituents.
//!
//! A constituent of width `k` and depth `d` describes a `k`-tuple
//! exhaustively: the signs of all atoms over `x1..xk`, then for `d ≥ 1`,
//! which depth-`(d-1)` constituents of width `k+1` are realized by some
//! further element. Only realized branches are stored; every other
//! compatible branch is negative by omission.

mod logic;

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde_json::{json, Value};
use thiserror::Error;

pub use logic::{eval, eval_indexed, quantifier_depth, Atom, FiniteModel, Formula, Vocabulary};

use crate::forms::{Alphabet, Form, FormalLanguage};
use crate::foundation::{canonical_cover, Cover, FoundationError, FoundationHandle, SelectionRule};
use crate::relations::ExtensionRelation;
use crate::systems::FormalSystem;

pub const DEFAULT_MAX_DEPTH: usize = 3;
pub const DEFAULT_ENUMERATION_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstituentError {
    #[error("variable `{0}` is unbound")]
    UnboundVariable(String),
    #[error("{predicate} takes {expected} arguments, got {found}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("depth {depth} exceeds the configured maximum {max}")]
    DepthBudgetExceeded { depth: usize, max: usize },
    #[error("{count} constituents exceed the budget {budget}")]
    EnumerationBudgetExceeded { count: String, budget: usize },
    #[error("a depth-0 constituent has no parent")]
    DepthZero,
    #[error("tuples must be non-empty")]
    EmptyTuple,
    #[error("formula syntax: {0}")]
    Syntax(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("constituent does not fit vocabulary {0}")]
    VocabularyMismatch(String),
    #[error(transparent)]
    Foundation(#[from] FoundationError),
}

impl ConstituentError {
    pub fn name(&self) -> &'static str {
        match self {
            ConstituentError::UnboundVariable(_) => "UnboundVariable",
            ConstituentError::ArityMismatch { .. } => "ArityMismatch",
            ConstituentError::UnknownPredicate(_) => "UnknownPredicate",
            ConstituentError::UnknownElement(_) => "UnknownElement",
            ConstituentError::DepthBudgetExceeded { .. } => "DepthBudgetExceeded",
            ConstituentError::EnumerationBudgetExceeded { .. } => "EnumerationBudgetExceeded",
            ConstituentError::DepthZero => "DepthZero",
            ConstituentError::EmptyTuple => "EmptyTuple",
            ConstituentError::Syntax(_) => "SyntaxError",
            ConstituentError::InvalidModel(_) => "InvalidModel",
            ConstituentError::InvalidVocabulary(_) => "InvalidVocabulary",
            ConstituentError::VocabularyMismatch(_) => "VocabularyMismatch",
            ConstituentError::Foundation(e) => e.name(),
        }
    }
}

/// Canonical order is the derived one: depth, width, attributive signs, then
/// the sorted set of positive branches.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constituent {
    depth: usize,
    width: usize,
    attributive: Vec<bool>,
    positive: BTreeSet<Constituent>,
}

impl Constituent {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Signs in the order of `Vocabulary::atoms(width)`.
    pub fn attributive(&self) -> &[bool] {
        &self.attributive
    }

    pub fn positive_branches(&self) -> impl Iterator<Item = &Constituent> {
        self.positive.iter()
    }

    /// Compact text: `d:signs` then, for `d ≥ 1`, `{b1,b2,…}`.
    pub fn encode(&self) -> String {
        let mut s = format!("{}:", self.depth);
        s.extend(self.attributive.iter().map(|&b| if b { '+' } else { '-' }));
        if self.depth > 0 {
            s.push('{');
            let parts: Vec<String> = self.positive.iter().map(Constituent::encode).collect();
            s.push_str(&parts.join(","));
            s.push('}');
        }
        s
    }

    pub fn to_json(&self, v: &Vocabulary) -> Value {
        let atoms = v.atoms(self.width);
        let attributive: Vec<Value> = atoms
            .iter()
            .zip(&self.attributive)
            .map(|(a, &s)| json!({"atom": v.atom_text(a), "sign": if s { "+" } else { "-" }}))
            .collect();
        let mut out = json!({
            "depth": self.depth,
            "width": self.width,
            "attributive": attributive,
        });
        if self.depth > 0 {
            let exists: Vec<Value> = self.positive.iter().map(|b| b.to_json(v)).collect();
            out["exists"] = json!(exists);
        }
        out
    }

    /// `attributive literals ∧ ⋀ ∃z Cᵢ ∧ ∀z ⋁ Cᵢ` over the positive branches,
    /// with `x1..xk` for the tuple and `x(k+1)` for `z`.
    pub fn reading(&self, v: &Vocabulary) -> Formula {
        let atoms = v.atoms(self.width);
        let mut conj: Vec<Formula> = atoms
            .iter()
            .zip(&self.attributive)
            .map(|(a, &s)| {
                let args: Vec<String> = a.slots.iter().map(|i| format!("x{}", i + 1)).collect();
                let atom = Formula::Atom(v.predicates()[a.predicate].0.clone(), args);
                if s {
                    atom
                } else {
                    Formula::not(atom)
                }
            })
            .collect();
        if self.depth > 0 {
            let z = format!("x{}", self.width + 1);
            let branches: Vec<Formula> = self.positive.iter().map(|b| b.reading(v)).collect();
            for b in &branches {
                conj.push(Formula::Exists(z.clone(), Box::new(b.clone())));
            }
            conj.push(Formula::Forall(z, Box::new(Formula::Or(branches))));
        }
        Formula::And(conj)
    }
}

/// Truth values of all atoms over `x1..xk` under `xi ↦ tuple[i]`.
pub fn attributive_profile(m: &FiniteModel, tuple: &[usize]) -> Vec<bool> {
    m.vocabulary()
        .atoms(tuple.len())
        .iter()
        .map(|a| {
            let t: Vec<usize> = a.slots.iter().map(|&s| tuple[s]).collect();
            m.holds(a.predicate, &t)
        })
        .collect()
}

pub fn constituent_of(m: &FiniteModel, tuple: &[usize], d: usize) -> Result<Constituent, ConstituentError> {
    constituent_of_bounded(m, tuple, d, DEFAULT_MAX_DEPTH)
}

pub fn constituent_of_bounded(
    m: &FiniteModel,
    tuple: &[usize],
    d: usize,
    max_depth: usize,
) -> Result<Constituent, ConstituentError> {
    if d > max_depth {
        return Err(ConstituentError::DepthBudgetExceeded { depth: d, max: max_depth });
    }
    if tuple.is_empty() {
        return Err(ConstituentError::EmptyTuple);
    }
    if let Some(&e) = tuple.iter().find(|&&e| e >= m.size()) {
        return Err(ConstituentError::UnknownElement(e.to_string()));
    }
    Ok(build(m, &mut tuple.to_vec(), d))
}

fn build(m: &FiniteModel, tuple: &mut Vec<usize>, d: usize) -> Constituent {
    let attributive = attributive_profile(m, tuple);
    let mut positive = BTreeSet::new();
    if d > 0 {
        for e in 0..m.size() {
            tuple.push(e);
            positive.insert(build(m, tuple, d - 1));
            tuple.pop();
        }
    }
    Constituent {
        depth: d,
        width: tuple.len(),
        attributive,
        positive,
    }
}

/// Number of depth-`d` constituents of width `k`.
pub fn constituent_count(v: &Vocabulary, k: usize, d: usize) -> Option<BigUint> {
    let atoms = v.atom_count(k)?;
    Some(pow2(atoms)? * per_attributive(v, k, d)?)
}

fn pow2(n: usize) -> Option<BigUint> {
    // refuse absurd exponents rather than allocate them
    (n <= 1 << 20).then(|| BigUint::one() << n)
}

/// Constituents sharing one fixed attributive part.
fn per_attributive(v: &Vocabulary, k: usize, d: usize) -> Option<BigUint> {
    if d == 0 {
        return Some(BigUint::one());
    }
    let fresh = v.atom_count(k + 1)? - v.atom_count(k)?;
    let compatible = pow2(fresh)? * per_attributive(v, k + 1, d - 1)?;
    pow2(compatible.to_usize()?)
}

/// All depth-`d` constituents of width `k`, in canonical order.
pub fn enumerate_constituents(
    v: &Vocabulary,
    k: usize,
    d: usize,
    budget: usize,
) -> Result<Vec<Constituent>, ConstituentError> {
    let count = constituent_count(v, k, d);
    match count.as_ref().and_then(ToPrimitive::to_usize) {
        Some(n) if n <= budget => {}
        _ => {
            return Err(ConstituentError::EnumerationBudgetExceeded {
                count: count.map_or_else(|| "astronomically many".into(), |c| c.to_string()),
                budget,
            })
        }
    }
    let a = v.atom_count(k).expect("counted above");
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << a) {
        let attr: Vec<bool> = (0..a).map(|i| mask >> i & 1 == 1).collect();
        out.extend(with_attributive(v, k, d, &attr));
    }
    out.sort();
    Ok(out)
}

/// Every depth-`d` constituent of width `k` with the given attributive part.
fn with_attributive(v: &Vocabulary, k: usize, d: usize, attr: &[bool]) -> Vec<Constituent> {
    if d == 0 {
        return vec![Constituent {
            depth: 0,
            width: k,
            attributive: attr.to_vec(),
            positive: BTreeSet::new(),
        }];
    }
    let compatible = compatible_branches(v, k, d, attr);
    let n = compatible.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u64..(1u64 << n) {
        let positive = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| compatible[i].clone()).collect();
        out.push(Constituent {
            depth: d,
            width: k,
            attributive: attr.to_vec(),
            positive,
        });
    }
    out
}

/// Depth-`(d-1)` constituents of width `k+1` whose restriction to `x1..xk`
/// is `attr`.
fn compatible_branches(v: &Vocabulary, k: usize, d: usize, attr: &[bool]) -> Vec<Constituent> {
    let restriction = v.restriction(k);
    let wide = v.atom_count(k + 1).expect("small vocabulary");
    let fresh: Vec<usize> = (0..wide).filter(|i| !restriction.contains(i)).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << fresh.len()) {
        let mut ext = vec![false; wide];
        for (j, &i) in restriction.iter().enumerate() {
            ext[i] = attr[j];
        }
        for (j, &i) in fresh.iter().enumerate() {
            ext[i] = mask >> j & 1 == 1;
        }
        out.extend(with_attributive(v, k + 1, d - 1, &ext));
    }
    out
}

/// Truncation to depth `d-1`.
pub fn parent(c: &Constituent) -> Result<Constituent, ConstituentError> {
    if c.depth == 0 {
        return Err(ConstituentError::DepthZero);
    }
    let positive = if c.depth == 1 {
        BTreeSet::new()
    } else {
        c.positive.iter().map(|b| parent(b).expect("depth ≥ 1")).collect()
    };
    Ok(Constituent {
        depth: c.depth - 1,
        width: c.width,
        attributive: c.attributive.clone(),
        positive,
    })
}

/// `[C⁰(a), C¹(a), …, C^d_max(a)]`.
pub fn constituent_chain(
    m: &FiniteModel,
    a: usize,
    d_max: usize,
) -> Result<Vec<Constituent>, ConstituentError> {
    constituent_chain_bounded(m, a, d_max, DEFAULT_MAX_DEPTH)
}

pub fn constituent_chain_bounded(
    m: &FiniteModel,
    a: usize,
    d_max: usize,
    max_depth: usize,
) -> Result<Vec<Constituent>, ConstituentError> {
    (0..=d_max).map(|d| constituent_of_bounded(m, &[a], d, max_depth)).collect()
}

/// Does the constituent fit the vocabulary's atom counts at every level?
pub fn fits(v: &Vocabulary, c: &Constituent) -> bool {
    v.atom_count(c.width) == Some(c.attributive.len())
        && c.positive.iter().all(|b| {
            b.depth + 1 == c.depth
                && b.width == c.width + 1
                && v.restriction(c.width).iter().zip(&c.attributive).all(|(&i, &s)| b.attributive[i] == s)
                && fits(v, b)
        })
}

fn constituent_alphabet() -> Arc<Alphabet> {
    static A: std::sync::OnceLock<Arc<Alphabet>> = std::sync::OnceLock::new();
    A.get_or_init(|| {
        let symbols = ["*", "+", "-", "{", "}", ",", ":", "0", "1", "2", "3", "4", "5", "6", "7", "8", "9"];
        Arc::new(Alphabet::new("constituents", symbols).unwrap())
    })
    .clone()
}

/// Constituents as forms, with `C → C'` whenever `parent(C') = C`, below a
/// root `*` whose children are the depth-0 constituents.
#[derive(Debug, Clone)]
pub struct ConstituentSystem {
    pub system: FormalSystem,
    pub vocabulary: Vocabulary,
    pub width: usize,
    pub max_depth: usize,
    by_form: Arc<HashMap<Form, Constituent>>,
}

impl ConstituentSystem {
    pub fn form_of(&self, c: &Constituent) -> Form {
        Form::from_text(&constituent_alphabet(), &c.encode()).expect("encodings use the alphabet")
    }

    pub fn constituent(&self, f: &Form) -> Option<&Constituent> {
        self.by_form.get(f)
    }

    /// The depth-`d` constituents, as the canonical cover one level below
    /// the root.
    pub fn cover(&self, d: usize, budget: usize) -> Result<Cover, ConstituentError> {
        Ok(canonical_cover(&FoundationHandle::of(&self.system), d + 1, budget)?)
    }

    /// The rule that follows `a`'s constituent chain.
    pub fn chain_rule(&self, m: &FiniteModel, a: usize) -> SelectionRule {
        let m = m.clone();
        let by_form = self.by_form.clone();
        let max = self.max_depth;
        let alphabet = constituent_alphabet();
        let root = self.system.root.clone();
        SelectionRule::new(
            format!("chain-of-{}", m.universe()[a]),
            &self.system.relation,
            self.system.root.clone(),
            move |f| {
                let next = if f == &root { 0 } else { by_form.get(f)?.depth + 1 };
                if next > max {
                    return None;
                }
                let c = constituent_of_bounded(&m, &[a], next, max).ok()?;
                Form::from_text(&alphabet, &c.encode()).ok()
            },
        )
    }
}

pub fn as_formal_system(
    v: &Vocabulary,
    k: usize,
    max_depth: usize,
    budget: usize,
) -> Result<ConstituentSystem, ConstituentError> {
    let alphabet = constituent_alphabet();
    let form = |c: &Constituent| Form::from_text(&alphabet, &c.encode()).expect("alphabet");
    let root = Form::from_text(&alphabet, "*").unwrap();
    let mut by_form = HashMap::new();
    let mut successors: HashMap<Form, Vec<Form>> = HashMap::new();
    let mut total = 0usize;
    let mut previous: Vec<Form> = vec![root.clone()];
    for d in 0..=max_depth {
        let level = enumerate_constituents(v, k, d, budget.saturating_sub(total))?;
        total += level.len();
        let mut this = Vec::with_capacity(level.len());
        for c in level {
            let f = form(&c);
            let up = if d == 0 { root.clone() } else { form(&parent(&c)?) };
            successors.entry(up).or_default().push(f.clone());
            by_form.insert(f.clone(), c);
            this.push(f);
        }
        for p in previous {
            successors.entry(p).or_default();
        }
        previous = this;
    }
    for p in previous {
        successors.entry(p).or_default();
    }
    let known: std::collections::HashSet<String> =
        by_form.keys().map(Form::text).chain(std::iter::once("*".to_string())).collect();
    let language = FormalLanguage::new(format!("constituents[{v};{k}]"), alphabet, move |tokens| {
        known.contains(&tokens.concat())
    });
    let relation = ExtensionRelation::from_successors("refine", successors);
    Ok(ConstituentSystem {
        system: FormalSystem::new(format!("constituents[{v};{k}]"), language, relation, root),
        vocabulary: v.clone(),
        width: k,
        max_depth,
        by_form: Arc::new(by_form),
    })
}

#[cfg(test)]
mod tests;
