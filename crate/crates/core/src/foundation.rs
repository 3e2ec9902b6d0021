//! Projective foundations, known only through covers and neighbourhoods.
//!
//! A point is a [`SelectionRule`]: a root and a deterministic choice of one
//! successor at each step. The foundation itself is never materialized;
//! [`canonical_cover`] yields the finite depth-`k` subdivision and
//! [`fundamental_neighbourhood`] the depth-`n` part a given point runs through.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::forms::{Form, FormError};
use crate::relations::{ExtensionRelation, RelationError};
use crate::systems::FormalSystem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FoundationError {
    #[error("rule `{rule}` stalls at `{at}` although the system offers successors")]
    ClosednessViolation { rule: String, at: String },
    #[error("rule `{rule}` chose `{to}` from `{from}`, which the system does not relate")]
    InvalidChoice { rule: String, from: String, to: String },
    #[error("the chain of `{rule}` ends at depth {depth}")]
    NoSuccessor { rule: String, depth: usize },
    #[error("fine cover depth {fine} is below coarse depth {coarse}")]
    DepthMismatch { fine: usize, coarse: usize },
    #[error("the chain of `{0}` does not pass through this cover")]
    NotOnChain(String),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Form(#[from] FormError),
}

impl FoundationError {
    pub fn name(&self) -> &'static str {
        match self {
            FoundationError::ClosednessViolation { .. } => "ClosednessViolation",
            FoundationError::InvalidChoice { .. } => "InvalidChoice",
            FoundationError::NoSuccessor { .. } => "NoSuccessor",
            FoundationError::DepthMismatch { .. } => "DepthMismatch",
            FoundationError::NotOnChain(_) => "NotOnChain",
            FoundationError::Relation(e) => e.name(),
            FoundationError::Form(e) => e.name(),
        }
    }
}

pub type ChooseFn = Arc<dyn Fn(&Form) -> Option<Form> + Send + Sync>;

/// A rule of choice through a system, starting at `root`.
#[derive(Clone)]
pub struct SelectionRule {
    label: String,
    root: Form,
    choose: ChooseFn,
    system: ExtensionRelation,
}

impl SelectionRule {
    pub fn new(
        label: impl Into<String>,
        system: &ExtensionRelation,
        root: Form,
        choose: impl Fn(&Form) -> Option<Form> + Send + Sync + 'static,
    ) -> Self {
        SelectionRule {
            label: label.into(),
            root,
            choose: Arc::new(choose),
            system: system.clone(),
        }
    }

    /// Chooses among the enumerated successors by index.
    pub fn by_index(
        label: impl Into<String>,
        system: &ExtensionRelation,
        root: Form,
        pick: impl Fn(&Form, &[Form]) -> Option<usize> + Send + Sync + 'static,
    ) -> Self {
        let sys = system.clone();
        SelectionRule::new(label, system, root, move |f| {
            let succ = sys.successors(f)?;
            let i = pick(f, &succ)?;
            succ.into_iter().nth(i)
        })
    }

    /// Always the first enumerated successor.
    pub fn first_successor(label: impl Into<String>, system: &FormalSystem) -> Self {
        SelectionRule::by_index(label, &system.relation, system.root.clone(), |_, s| {
            (!s.is_empty()).then_some(0)
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn root(&self) -> &Form {
        &self.root
    }

    pub fn system(&self) -> &ExtensionRelation {
        &self.system
    }

    pub fn choose(&self, f: &Form) -> Option<Form> {
        (self.choose)(f)
    }

    /// The sub-chain `x R' choose(x)` for `x` among the first `depth` links.
    pub fn chain_relation(&self, depth: usize) -> Result<ExtensionRelation, FoundationError> {
        let prefix = chain_prefix(self, depth)?;
        let links: Arc<Vec<Form>> = Arc::new(prefix.forms);
        let l2 = links.clone();
        Ok(ExtensionRelation::new(self.label.clone(), move |f, g| {
            links.windows(2).any(|w| &w[0] == f && &w[1] == g)
        })
        .with_enumerator(move |f| {
            l2.windows(2)
                .filter(|w| &w[0] == f)
                .map(|w| w[1].clone())
                .collect()
        })
        .with_branching_bound(1))
    }
}

impl fmt::Debug for SelectionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelectionRule")
            .field("label", &self.label)
            .field("root", &self.root)
            .field("system", &self.system.name())
            .finish()
    }
}

/// The first links `f0 = root, f1, …, fn` of a rule's chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainPrefix {
    pub forms: Vec<Form>,
    /// The system had no successor for the last form.
    pub terminal: bool,
}

impl ChainPrefix {
    pub fn depth(&self) -> usize {
        self.forms.len() - 1
    }

    pub fn last(&self) -> &Form {
        self.forms.last().expect("a prefix holds at least the root")
    }

    pub fn is_prefix_of(&self, other: &ChainPrefix) -> bool {
        other.forms.starts_with(&self.forms)
    }
}

/// Iterates the rule `n` times from its root.
///
/// A stall where the system has successors is a closedness violation. When
/// the system has none the prefix ends early and is flagged terminal. A
/// system without an enumerator is taken to always have successors.
pub fn chain_prefix(rule: &SelectionRule, n: usize) -> Result<ChainPrefix, FoundationError> {
    let mut forms = Vec::with_capacity(n + 1);
    forms.push(rule.root.clone());
    for _ in 0..n {
        let x = forms.last().unwrap();
        match rule.choose(x) {
            Some(y) => {
                if !rule.system.holds(x, &y) {
                    return Err(FoundationError::InvalidChoice {
                        rule: rule.label.clone(),
                        from: x.text(),
                        to: y.text(),
                    });
                }
                forms.push(y);
            }
            None => {
                let stalled = match rule.system.successors(x) {
                    Some(succ) => !succ.is_empty(),
                    None => true,
                };
                if stalled {
                    return Err(FoundationError::ClosednessViolation {
                        rule: rule.label.clone(),
                        at: x.text(),
                    });
                }
                return Ok(ChainPrefix {
                    forms,
                    terminal: true,
                });
            }
        }
    }
    Ok(ChainPrefix {
        forms,
        terminal: false,
    })
}

/// The depth-`n` part of the chain: the `n`-th form.
pub fn fundamental_neighbourhood(rule: &SelectionRule, n: usize) -> Result<Form, FoundationError> {
    let prefix = chain_prefix(rule, n)?;
    if prefix.depth() < n {
        return Err(FoundationError::NoSuccessor {
            rule: rule.label.clone(),
            depth: prefix.depth(),
        });
    }
    Ok(prefix.forms[n].clone())
}

/// A relation together with a base form: the foundation `F̂` as an intension.
#[derive(Debug, Clone)]
pub struct FoundationHandle {
    pub system: ExtensionRelation,
    pub base: Form,
}

impl FoundationHandle {
    pub fn new(system: &ExtensionRelation, base: &Form) -> Self {
        FoundationHandle {
            system: system.clone(),
            base: base.clone(),
        }
    }

    pub fn of(system: &FormalSystem) -> Self {
        FoundationHandle::new(&system.relation, &system.root)
    }

    /// A handle at another base, which must be well formed in the system.
    pub fn at(system: &FormalSystem, base: &Form) -> Result<Self, FoundationError> {
        let base = system.language.check(base.clone())?;
        Ok(FoundationHandle::new(&system.relation, &base))
    }
}

/// A finite family of parts at a given depth below `base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover {
    pub base: Form,
    pub depth: usize,
    pub parts: Vec<Form>,
}

impl Cover {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// All forms reached from the base in exactly `k` steps, deduplicated in
/// breadth-first order.
pub fn canonical_cover(
    h: &FoundationHandle,
    k: usize,
    budget: usize,
) -> Result<Cover, FoundationError> {
    let mut level = vec![h.base.clone()];
    let mut visited = 1usize;
    for _ in 0..k {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for f in &level {
            for g in h.system.require_successors(f)? {
                if seen.insert(g.clone()) {
                    visited += 1;
                    if visited > budget {
                        return Err(RelationError::SearchBudgetExceeded(budget).into());
                    }
                    next.push(g);
                }
            }
        }
        level = next;
    }
    Ok(Cover {
        base: h.base.clone(),
        depth: k,
        parts: level,
    })
}

/// Does every part of `fine` lie within `fine.depth - coarse.depth` steps
/// (zero included) of some part of `coarse`?
pub fn refines(
    h: &FoundationHandle,
    fine: &Cover,
    coarse: &Cover,
    budget: usize,
) -> Result<bool, FoundationError> {
    if fine.depth < coarse.depth {
        return Err(FoundationError::DepthMismatch {
            fine: fine.depth,
            coarse: coarse.depth,
        });
    }
    let gap = fine.depth - coarse.depth;
    let mut reach: HashSet<Form> = coarse.parts.iter().cloned().collect();
    let mut frontier: Vec<Form> = coarse.parts.clone();
    for _ in 0..gap {
        let mut next = Vec::new();
        for f in &frontier {
            for g in h.system.require_successors(f)? {
                if reach.insert(g.clone()) {
                    if reach.len() > budget {
                        return Err(RelationError::SearchBudgetExceeded(budget).into());
                    }
                    next.push(g);
                }
            }
        }
        frontier = next;
    }
    Ok(fine.parts.iter().all(|p| reach.contains(p)))
}

/// The part of `cover` that the rule's chain passes through.
pub fn point_passes_through(rule: &SelectionRule, cover: &Cover) -> Result<Form, FoundationError> {
    if &cover.base != rule.root() {
        return Err(FoundationError::NotOnChain(rule.label.clone()));
    }
    let part = fundamental_neighbourhood(rule, cover.depth)?;
    if cover.parts.contains(&part) {
        Ok(part)
    } else {
        Err(FoundationError::NotOnChain(rule.label.clone()))
    }
}

/// Every selection rule up to depth `n`: one per choice sequence.
///
/// Each returned rule follows its own path for `n` steps and takes the first
/// successor beyond it.
pub fn enumerate_rules(
    h: &FoundationHandle,
    n: usize,
    budget: usize,
) -> Result<Vec<SelectionRule>, FoundationError> {
    let paths = crate::relations::enumerate_paths(&h.system, &h.base, n, budget)?;
    Ok(paths
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut links = vec![h.base.clone()];
            links.extend(p.steps().iter().cloned());
            let sys = h.system.clone();
            SelectionRule::new(format!("path-{i}"), &h.system, h.base.clone(), move |f| {
                match links.iter().position(|x| x == f) {
                    Some(j) if j + 1 < links.len() => Some(links[j + 1].clone()),
                    _ => sys.successors(f)?.into_iter().next(),
                }
            })
        })
        .collect())
}

/// Decimal rule choosing the same digit at every step.
pub fn constant_digit_rule(system: &FormalSystem, digit: u8) -> SelectionRule {
    assert!(digit < 10, "digit out of range");
    SelectionRule::by_index(
        format!("constant-digit-{digit}"),
        &system.relation,
        system.root.clone(),
        move |_, s| (s.len() > digit as usize).then_some(digit as usize),
    )
}
