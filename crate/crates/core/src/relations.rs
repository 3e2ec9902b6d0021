//! Extension relations between forms, and the chain predicates built on them.
//!
//! A relation is a decidable predicate on pairs of forms, optionally paired
//! with a finite successor enumerator. Nothing here ever materializes the
//! extension of a relation as a completed set: neighbourhoods are queried,
//! searches are bounded by depth and a node budget, and the chain predicates
//! (`is_subrelation`, `is_projective_chain`, `is_closed_chain`) are decided
//! relative to an explicit [`FiniteCarrier`].

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::forms::{Alphabet, Form};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("relation `{relation}` cannot be applied to `{form}`: the form is built from the symbol `{relation}`")]
    Stratification { relation: String, form: String },
    #[error("search exceeded the node budget of {0}")]
    SearchBudgetExceeded(usize),
    #[error("relation `{0}` has no successor enumerator")]
    NotEnumerable(String),
    #[error("`{from}` -> `{to}` is related by the chain but not by the ambient relation")]
    NotASubrelation { from: String, to: String },
    #[error("apex symbol `{0}` already occurs in a member form")]
    SymbolClash(String),
    #[error("a finite carrier must contain at least one form")]
    EmptyCarrier,
    #[error("steps `{0}` -> `{1}` are not related")]
    NotAPath(String, String),
}

impl RelationError {
    pub fn name(&self) -> &'static str {
        match self {
            RelationError::Stratification { .. } => "StratificationError",
            RelationError::SearchBudgetExceeded(_) => "SearchBudgetExceeded",
            RelationError::NotEnumerable(_) => "NotEnumerable",
            RelationError::NotASubrelation { .. } => "NotASubrelation",
            RelationError::SymbolClash(_) => "SymbolClash",
            RelationError::EmptyCarrier => "EmptyCarrier",
            RelationError::NotAPath(..) => "NotAPath",
        }
    }
}

pub type HoldsFn = Arc<dyn Fn(&Form, &Form) -> bool + Send + Sync>;
pub type EnumerateFn = Arc<dyn Fn(&Form) -> Vec<Form> + Send + Sync>;

/// A named, decidable binary relation on forms.
#[derive(Clone)]
pub struct ExtensionRelation {
    name: String,
    holds: HoldsFn,
    enumerate: Option<EnumerateFn>,
    branching_bound: Option<usize>,
}

impl ExtensionRelation {
    pub fn new(
        name: impl Into<String>,
        holds: impl Fn(&Form, &Form) -> bool + Send + Sync + 'static,
    ) -> Self {
        ExtensionRelation {
            name: name.into(),
            holds: Arc::new(holds),
            enumerate: None,
            branching_bound: None,
        }
    }

    /// The enumerator must list exactly the forms `g` with `holds(f, g)`.
    pub fn with_enumerator(
        mut self,
        enumerate: impl Fn(&Form) -> Vec<Form> + Send + Sync + 'static,
    ) -> Self {
        self.enumerate = Some(Arc::new(enumerate));
        self
    }

    pub fn with_branching_bound(mut self, bound: usize) -> Self {
        self.branching_bound = Some(bound);
        self
    }

    /// Relates nothing.
    pub fn empty(name: impl Into<String>) -> Self {
        ExtensionRelation::new(name, |_, _| false).with_enumerator(|_| Vec::new())
    }

    /// A finite relation given by its successor lists; order is kept.
    pub fn from_successors(name: impl Into<String>, successors: HashMap<Form, Vec<Form>>) -> Self {
        let bound = successors.values().map(Vec::len).max().unwrap_or(0);
        let table = Arc::new(successors);
        let t2 = table.clone();
        ExtensionRelation::new(name, move |f, g| {
            table.get(f).is_some_and(|succ| succ.contains(g))
        })
        .with_enumerator(move |f| t2.get(f).cloned().unwrap_or_default())
        .with_branching_bound(bound)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn holds(&self, f: &Form, g: &Form) -> bool {
        (self.holds)(f, g)
    }

    pub fn is_enumerable(&self) -> bool {
        self.enumerate.is_some()
    }

    pub fn branching_bound(&self) -> Option<usize> {
        self.branching_bound
    }

    /// `None` when the relation has no enumerator.
    pub fn successors(&self, f: &Form) -> Option<Vec<Form>> {
        self.enumerate.as_ref().map(|e| e(f))
    }

    pub(crate) fn require_successors(&self, f: &Form) -> Result<Vec<Form>, RelationError> {
        self.successors(f)
            .ok_or_else(|| RelationError::NotEnumerable(self.name.clone()))
    }

    /// Successors of `f` among the carrier forms, in carrier order.
    pub fn successors_within(&self, f: &Form, carrier: &FiniteCarrier) -> Vec<Form> {
        carrier
            .forms()
            .iter()
            .filter(|g| self.holds(f, g))
            .cloned()
            .collect()
    }
}

impl fmt::Debug for ExtensionRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtensionRelation")
            .field("name", &self.name)
            .field("enumerable", &self.enumerate.is_some())
            .field("branching_bound", &self.branching_bound)
            .finish()
    }
}

/// The concept `R[f]` of a form `g` with `f R g`. Queryable always,
/// enumerable only when the relation is.
#[derive(Debug, Clone)]
pub struct RelationalNeighbourhood {
    base: Form,
    relation: ExtensionRelation,
}

impl RelationalNeighbourhood {
    pub fn base(&self) -> &Form {
        &self.base
    }

    pub fn relation(&self) -> &ExtensionRelation {
        &self.relation
    }

    /// Membership; the argument is subject to the same stratification guard.
    pub fn contains(&self, g: &Form) -> Result<bool, RelationError> {
        guard(&self.relation, g)?;
        Ok(self.relation.holds(&self.base, g))
    }

    pub fn enumerate(&self) -> Option<Vec<Form>> {
        self.relation.successors(&self.base)
    }
}

fn guard(r: &ExtensionRelation, f: &Form) -> Result<(), RelationError> {
    if f.mentions(r.name()) {
        Err(RelationError::Stratification {
            relation: r.name().to_string(),
            form: f.text(),
        })
    } else {
        Ok(())
    }
}

/// Forms the neighbourhood `R[f]`, refusing forms built from `R`'s own symbol.
pub fn stratified_apply(
    r: &ExtensionRelation,
    f: &Form,
) -> Result<RelationalNeighbourhood, RelationError> {
    guard(r, f)?;
    Ok(RelationalNeighbourhood {
        base: f.clone(),
        relation: r.clone(),
    })
}

pub fn neighbourhood_contains(
    n: &RelationalNeighbourhood,
    g: &Form,
) -> Result<bool, RelationError> {
    n.contains(g)
}

/// A finite, non-empty set of forms restricting the chain predicates.
#[derive(Debug, Clone)]
pub struct FiniteCarrier {
    forms: Vec<Form>,
    members: HashSet<Form>,
}

impl FiniteCarrier {
    /// Deduplicates, keeping first occurrences in order.
    pub fn new(forms: impl IntoIterator<Item = Form>) -> Result<Self, RelationError> {
        let mut members = HashSet::new();
        let forms: Vec<Form> = forms
            .into_iter()
            .filter(|f| members.insert(f.clone()))
            .collect();
        if forms.is_empty() {
            return Err(RelationError::EmptyCarrier);
        }
        Ok(FiniteCarrier { forms, members })
    }

    /// All forms reachable from `root` in at most `depth` steps.
    pub fn reachable(
        r: &ExtensionRelation,
        root: &Form,
        depth: usize,
        budget: usize,
    ) -> Result<Self, RelationError> {
        let mut forms = vec![root.clone()];
        let mut seen: HashSet<Form> = forms.iter().cloned().collect();
        let mut frontier = forms.clone();
        for _ in 0..depth {
            let mut next = Vec::new();
            for f in &frontier {
                for g in r.require_successors(f)? {
                    if seen.insert(g.clone()) {
                        if seen.len() > budget {
                            return Err(RelationError::SearchBudgetExceeded(budget));
                        }
                        next.push(g);
                    }
                }
            }
            forms.extend(next.iter().cloned());
            frontier = next;
        }
        FiniteCarrier::new(forms)
    }

    pub fn forms(&self) -> &[Form] {
        &self.forms
    }

    pub fn contains(&self, f: &Form) -> bool {
        self.members.contains(f)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

/// Successor lists of `r` restricted to the carrier, by carrier index.
fn adjacency(r: &ExtensionRelation, carrier: &FiniteCarrier) -> Vec<Vec<usize>> {
    let forms = carrier.forms();
    forms
        .iter()
        .map(|f| {
            (0..forms.len())
                .filter(|&j| r.holds(f, &forms[j]))
                .collect()
        })
        .collect()
}

/// `←^{n+1}` from `←^n` and `←`: `f ←^{n+1} h` iff `f ←^n g ← h` for some `g`.
///
/// The intermediate `g` is found through `rn`'s enumerator. The result keeps
/// the base relation's symbol as its name.
pub fn transitive_step(
    rn: &ExtensionRelation,
    r: &ExtensionRelation,
) -> Result<ExtensionRelation, RelationError> {
    if !rn.is_enumerable() {
        return Err(RelationError::NotEnumerable(rn.name().to_string()));
    }
    let (a, b) = (rn.clone(), r.clone());
    let mut step = ExtensionRelation::new(r.name(), move |f, h| {
        a.successors(f)
            .unwrap_or_default()
            .iter()
            .any(|g| b.holds(g, h))
    });
    if r.is_enumerable() {
        let (a, b) = (rn.clone(), r.clone());
        step = step.with_enumerator(move |f| compose_successors(&a, &b, f));
        if let (Some(x), Some(y)) = (rn.branching_bound(), r.branching_bound()) {
            step = step.with_branching_bound(x.saturating_mul(y));
        }
    }
    Ok(step)
}

/// As [`transitive_step`], with the intermediate form drawn from a carrier.
pub fn transitive_step_within(
    rn: &ExtensionRelation,
    r: &ExtensionRelation,
    carrier: &FiniteCarrier,
) -> ExtensionRelation {
    let (a, b, c) = (rn.clone(), r.clone(), carrier.clone());
    let mut step = ExtensionRelation::new(r.name(), move |f, h| {
        c.forms().iter().any(|g| a.holds(f, g) && b.holds(g, h))
    });
    if rn.is_enumerable() && r.is_enumerable() {
        let (a, b) = (rn.clone(), r.clone());
        step = step.with_enumerator(move |f| compose_successors(&a, &b, f));
    }
    step
}

fn compose_successors(a: &ExtensionRelation, b: &ExtensionRelation, f: &Form) -> Vec<Form> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for g in a.successors(f).unwrap_or_default() {
        for h in b.successors(&g).unwrap_or_default() {
            if seen.insert(h.clone()) {
                out.push(h);
            }
        }
    }
    out
}

/// `←^n` for `n ≥ 1`, by repeated [`transitive_step`].
pub fn power(r: &ExtensionRelation, n: usize) -> Result<ExtensionRelation, RelationError> {
    assert!(n >= 1, "power of a relation starts at 1");
    let mut acc = r.clone();
    for _ in 1..n {
        acc = transitive_step(&acc, r)?;
    }
    Ok(acc)
}

/// Is there a path `f → … → g` of between 1 and `max_depth` steps?
///
/// Breadth-first over the enumerator, visiting each form once.
pub fn related_star(
    r: &ExtensionRelation,
    f: &Form,
    g: &Form,
    max_depth: usize,
    budget: usize,
) -> Result<bool, RelationError> {
    if !r.is_enumerable() {
        return Err(RelationError::NotEnumerable(r.name().to_string()));
    }
    bfs(|x| r.require_successors(x), f, g, max_depth, budget)
}

/// As [`related_star`], searching successors among the carrier forms only.
pub fn related_star_within(
    r: &ExtensionRelation,
    carrier: &FiniteCarrier,
    f: &Form,
    g: &Form,
    max_depth: usize,
    budget: usize,
) -> Result<bool, RelationError> {
    bfs(|x| Ok(r.successors_within(x, carrier)), f, g, max_depth, budget)
}

fn bfs(
    succ: impl Fn(&Form) -> Result<Vec<Form>, RelationError>,
    f: &Form,
    g: &Form,
    max_depth: usize,
    budget: usize,
) -> Result<bool, RelationError> {
    let mut seen: HashSet<Form> = HashSet::new();
    let mut queue: VecDeque<(Form, usize)> = VecDeque::from([(f.clone(), 0)]);
    while let Some((x, d)) = queue.pop_front() {
        if d == max_depth {
            continue;
        }
        for y in succ(&x)? {
            if &y == g {
                return Ok(true);
            }
            if seen.insert(y.clone()) {
                if seen.len() > budget {
                    return Err(RelationError::SearchBudgetExceeded(budget));
                }
                queue.push_back((y, d + 1));
            }
        }
    }
    Ok(false)
}

/// A finite sequence of consecutively related forms; may be empty.
#[derive(Debug, Clone)]
pub struct Path {
    relation: ExtensionRelation,
    steps: Vec<Form>,
}

impl Path {
    pub fn new(relation: &ExtensionRelation, steps: Vec<Form>) -> Result<Self, RelationError> {
        for w in steps.windows(2) {
            if !relation.holds(&w[0], &w[1]) {
                return Err(RelationError::NotAPath(w[0].text(), w[1].text()));
            }
        }
        Ok(Path {
            relation: relation.clone(),
            steps,
        })
    }

    pub fn empty(relation: &ExtensionRelation) -> Self {
        Path {
            relation: relation.clone(),
            steps: Vec::new(),
        }
    }

    pub fn relation(&self) -> &ExtensionRelation {
        &self.relation
    }

    pub fn steps(&self) -> &[Form] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> Option<&Form> {
        self.steps.last()
    }
}

impl PartialEq for Path {
    fn eq(&self, other: &Self) -> bool {
        self.relation.name() == other.relation.name() && self.steps == other.steps
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(">")
    }
}

/// All `n`-step paths from `root`, in lexicographic order of successor choice.
/// The root itself is not part of the returned steps.
pub fn enumerate_paths(
    r: &ExtensionRelation,
    root: &Form,
    n: usize,
    budget: usize,
) -> Result<Vec<Path>, RelationError> {
    if !r.is_enumerable() {
        return Err(RelationError::NotEnumerable(r.name().to_string()));
    }
    let mut paths: Vec<Vec<Form>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &paths {
            let tip = p.last().unwrap_or(root);
            for g in r.require_successors(tip)? {
                if next.len() >= budget {
                    return Err(RelationError::SearchBudgetExceeded(budget));
                }
                let mut q = p.clone();
                q.push(g);
                next.push(q);
            }
        }
        paths = next;
    }
    Ok(paths
        .into_iter()
        .map(|steps| Path {
            relation: r.clone(),
            steps,
        })
        .collect())
}

/// `R' < R` on the carrier: every `R'` pair is an `R` pair.
pub fn is_subrelation(
    r_prime: &ExtensionRelation,
    r: &ExtensionRelation,
    carrier: &FiniteCarrier,
) -> bool {
    first_non_inclusion(r_prime, r, carrier).is_none()
}

fn first_non_inclusion(
    r_prime: &ExtensionRelation,
    r: &ExtensionRelation,
    carrier: &FiniteCarrier,
) -> Option<(Form, Form)> {
    for f in carrier.forms() {
        for g in carrier.forms() {
            if r_prime.holds(f, g) && !r.holds(f, g) {
                return Some((f.clone(), g.clone()));
            }
        }
    }
    None
}

fn require_subrelation(
    r_prime: &ExtensionRelation,
    r: &ExtensionRelation,
    carrier: &FiniteCarrier,
) -> Result<(), RelationError> {
    match first_non_inclusion(r_prime, r, carrier) {
        Some((f, g)) => Err(RelationError::NotASubrelation {
            from: f.text(),
            to: g.text(),
        }),
        None => Ok(()),
    }
}

/// Directedness: whenever `f R' g` and `f R' h`, some carrier form `k` is
/// reached from both `g` and `h` in zero or one `R'` step.
pub fn is_projective_chain(
    r_prime: &ExtensionRelation,
    r: &ExtensionRelation,
    carrier: &FiniteCarrier,
) -> Result<bool, RelationError> {
    require_subrelation(r_prime, r, carrier)?;
    let adj = adjacency(r_prime, carrier);
    let n = carrier.len();
    // upper[x] = {x} ∪ R'[x] within the carrier
    let upper: Vec<HashSet<usize>> = (0..n)
        .map(|x| adj[x].iter().copied().chain([x]).collect())
        .collect();
    for succ in &adj {
        for (i, &g) in succ.iter().enumerate() {
            for &h in &succ[i + 1..] {
                if upper[g].is_disjoint(&upper[h]) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A chain never stalls inside the carrier: each form touched by `R'` has an
/// `R'`-successor whenever it has an `R`-successor, and an `R'`-predecessor
/// whenever it has an `R`-predecessor.
pub fn is_closed_chain(
    r_prime: &ExtensionRelation,
    r: &ExtensionRelation,
    carrier: &FiniteCarrier,
) -> Result<bool, RelationError> {
    require_subrelation(r_prime, r, carrier)?;
    let chain = adjacency(r_prime, carrier);
    let ambient = adjacency(r, carrier);
    let n = carrier.len();
    let mut chain_pred = vec![false; n];
    let mut ambient_pred = vec![false; n];
    let mut touched = vec![false; n];
    for x in 0..n {
        for &y in &chain[x] {
            chain_pred[y] = true;
            touched[x] = true;
            touched[y] = true;
        }
        for &y in &ambient[x] {
            ambient_pred[y] = true;
        }
    }
    Ok((0..n).filter(|&x| touched[x]).all(|x| {
        (ambient[x].is_empty() || !chain[x].is_empty()) && (!ambient_pred[x] || chain_pred[x])
    }))
}

/// A fresh apex form related to exactly the listed members.
pub fn cone(
    apex_token: &str,
    members: &[Form],
) -> Result<(Form, ExtensionRelation), RelationError> {
    if members.iter().any(|m| m.footprint().contains(apex_token)) {
        return Err(RelationError::SymbolClash(apex_token.to_string()));
    }
    let alphabet = Arc::new(
        Alphabet::new(format!("cone:{apex_token}"), [apex_token])
            .map_err(|_| RelationError::SymbolClash(apex_token.to_string()))?,
    );
    let apex = Form::from_positions(alphabet, vec![0]);
    let members: Arc<Vec<Form>> = Arc::new(members.to_vec());
    let (a1, m1) = (apex.clone(), members.clone());
    let (a2, m2) = (apex.clone(), members.clone());
    let relation = ExtensionRelation::new(apex_token, move |x, y| x == &a1 && m1.contains(y))
        .with_enumerator(move |x| if x == &a2 { m2.to_vec() } else { Vec::new() })
        .with_branching_bound(members.len());
    Ok((apex, relation))
}

/// The diagonal concept `F = ¬xRx` over a small alphabet of its own, and the
/// relation `R` whose symbol it is built from.
pub fn diagonal_concept(symbol: &str) -> (Form, ExtensionRelation) {
    let alphabet = Arc::new(
        Alphabet::new(format!("diagonal:{symbol}"), ["¬", "x", symbol]).expect("distinct symbols"),
    );
    let f = Form::from_positions(alphabet, vec![0, 1, 2, 1]);
    // FRG iff G is FR-free: the extension is irrelevant, the guard fires first.
    let sym = symbol.to_string();
    let r = ExtensionRelation::new(symbol, move |_, g| !g.mentions(&sym));
    (f, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{decimal_system, dyadic_system, naturals_system, rational_interval_system};
    use proptest::prelude::*;

    fn nat(n: u64) -> Form {
        naturals_system().form(&n.to_string()).unwrap()
    }

    fn dec(s: &str) -> Form {
        decimal_system().form(s).unwrap()
    }

    #[test]
    fn successor_neighbourhood() {
        let s = naturals_system();
        let n = stratified_apply(&s.relation, &nat(1)).unwrap();
        assert!(neighbourhood_contains(&n, &nat(2)).unwrap());
        assert!(!neighbourhood_contains(&n, &nat(3)).unwrap());
        assert_eq!(n.enumerate().unwrap(), vec![nat(2)]);
    }

    #[test]
    fn interval_neighbourhood_is_strict() {
        let q = rational_interval_system();
        let base = q.form("]0,1[").unwrap();
        let n = stratified_apply(&q.relation, &base).unwrap();
        assert!(n.contains(&q.form("]1/4,1/2[").unwrap()).unwrap());
        assert!(!n.contains(&base).unwrap());
        assert!(n.enumerate().is_none());
    }

    #[test]
    fn guard_blocks_self_application() {
        let lang = Arc::new(Alphabet::new("rel", ["¬", "x", "R", "P", "(", ")"]).unwrap());
        let diag = Form::from_text(&lang, "¬xRx").unwrap();
        let r = ExtensionRelation::new("R", |_, _| true);
        let err = stratified_apply(&r, &diag).unwrap_err();
        assert_eq!(err.name(), "StratificationError");
        let p = Form::from_text(&lang, "P(x)").unwrap();
        let n = stratified_apply(&r, &p).unwrap();
        assert_eq!(n.contains(&diag).unwrap_err().name(), "StratificationError");
        let s = naturals_system();
        assert!(stratified_apply(&s.relation, &nat(3)).is_ok());
    }

    #[test]
    fn transitive_step_examples() {
        let s = naturals_system().relation;
        let s2 = transitive_step(&s, &s).unwrap();
        assert!(s2.holds(&nat(0), &nat(2)));
        assert!(!s2.holds(&nat(0), &nat(1)));
        assert_eq!(s2.successors(&nat(0)).unwrap(), vec![nat(2)]);

        let d = decimal_system().relation;
        let d2 = transitive_step(&d, &d).unwrap();
        assert!(d2.holds(&dec("0."), &dec("0.31")));
        assert!(!d2.holds(&dec("0."), &dec("0.3")));
        assert_eq!(d2.successors(&dec("0.")).unwrap().len(), 100);
    }

    #[test]
    fn dyadic_two_steps_quarter_width() {
        let q = dyadic_system();
        let q2 = transitive_step(&q.relation, &q.relation).unwrap();
        let root_width = q.interval(&q.root).unwrap().width();
        for f in q2.successors(&q.root).unwrap() {
            let w = q.interval(&f).unwrap().width();
            assert_eq!(w * crate::systems::Rational::from_integer(4), root_width.clone());
        }
    }

    #[test]
    fn transitive_step_needs_enumerator() {
        let q = rational_interval_system().relation;
        assert_eq!(transitive_step(&q, &q).unwrap_err().name(), "NotEnumerable");
    }

    #[test]
    fn star_examples() {
        let s = naturals_system().relation;
        assert!(related_star(&s, &nat(0), &nat(5), 5, DEFAULT_NODE_BUDGET).unwrap());
        assert!(!related_star(&s, &nat(0), &nat(5), 4, DEFAULT_NODE_BUDGET).unwrap());
        assert!(!related_star(&s, &nat(5), &nat(0), 50, DEFAULT_NODE_BUDGET).unwrap());
        let d = decimal_system().relation;
        assert!(!related_star(&d, &dec("0."), &dec("0.31"), 1, DEFAULT_NODE_BUDGET).unwrap());
        assert!(related_star(&d, &dec("0."), &dec("0.31"), 2, DEFAULT_NODE_BUDGET).unwrap());
    }

    #[test]
    fn star_respects_budget() {
        let d = decimal_system().relation;
        let err = related_star(&d, &dec("0."), &dec("0.1111"), 4, 500).unwrap_err();
        assert_eq!(err, RelationError::SearchBudgetExceeded(500));
    }

    #[test]
    fn star_within_carrier_for_intervals() {
        let q = rational_interval_system();
        let forms: Vec<Form> = ["]0,1[", "]1/8,7/8[", "]1/4,3/4[", "]1/3,1/2["]
            .iter()
            .map(|s| q.form(s).unwrap())
            .collect();
        let c = FiniteCarrier::new(forms.clone()).unwrap();
        assert!(related_star_within(&q.relation, &c, &forms[0], &forms[3], 1, 10).unwrap());
        assert!(!related_star_within(&q.relation, &c, &forms[3], &forms[0], 3, 10).unwrap());
        assert_eq!(
            related_star(&q.relation, &forms[0], &forms[3], 3, 10).unwrap_err().name(),
            "NotEnumerable"
        );
    }

    #[test]
    fn path_counts() {
        let d = decimal_system();
        // brute count: ten digits per step
        let mut brute = 0;
        for a in 0..10 {
            for b in 0..10 {
                let f = dec(&format!("0.{a}{b}"));
                assert!(d.relation.holds(&dec(&format!("0.{a}")), &f));
                brute += 1;
            }
        }
        let paths = enumerate_paths(&d.relation, &d.root, 2, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(paths.len(), brute);
        assert_eq!(paths[0].to_string(), "<0.0,0.00>");
        assert_eq!(paths[99].to_string(), "<0.9,0.99>");

        let s = naturals_system().relation;
        let p = enumerate_paths(&s, &nat(0), 3, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].steps(), &[nat(1), nat(2), nat(3)]);

        let e = enumerate_paths(&s, &nat(0), 0, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e[0].is_empty());
        assert_eq!(e[0].to_string(), "<>");
    }

    #[test]
    fn path_validation() {
        let s = naturals_system().relation;
        assert!(Path::new(&s, vec![nat(1), nat(2)]).is_ok());
        assert_eq!(Path::new(&s, vec![nat(1), nat(3)]).unwrap_err().name(), "NotAPath");
    }

    fn left_half() -> ExtensionRelation {
        let q = dyadic_system();
        let q2 = q.clone();
        ExtensionRelation::new("L", move |f, g| {
            q.relation.successors(f).and_then(|c| c.first().cloned()).as_ref() == Some(g)
        })
        .with_enumerator(move |f| {
            q2.relation
                .successors(f)
                .unwrap_or_default()
                .into_iter()
                .take(1)
                .collect()
        })
    }

    #[test]
    fn left_half_selection_is_subrelation() {
        let q = dyadic_system();
        let carrier = FiniteCarrier::reachable(&q.relation, &q.root, 3, 10_000).unwrap();
        // exhaustive pair check, spelled out
        let l = left_half();
        let mut pairs = 0;
        for f in carrier.forms() {
            for g in carrier.forms() {
                if l.holds(f, g) {
                    pairs += 1;
                    assert!(q.relation.holds(f, g));
                }
            }
        }
        assert!(pairs > 0);
        assert!(is_subrelation(&l, &q.relation, &carrier));
        assert!(!is_subrelation(&q.relation, &l, &carrier));
        assert!(is_subrelation(&q.relation, &q.relation, &carrier));
    }

    #[test]
    fn projective_examples() {
        let d = decimal_system();
        let carrier = FiniteCarrier::reachable(&d.relation, &d.root, 2, 10_000).unwrap();
        let three = {
            let d = d.clone();
            ExtensionRelation::new("T", move |f, g| {
                d.relation.holds(f, g) && g.text().ends_with('3')
            })
        };
        assert!(is_projective_chain(&three, &d.relation, &carrier).unwrap());
        assert!(!is_projective_chain(&d.relation, &d.relation, &carrier).unwrap());
        let none = ExtensionRelation::empty("E");
        assert!(is_projective_chain(&none, &d.relation, &carrier).unwrap());
        assert_eq!(
            is_projective_chain(&d.relation, &three, &carrier).unwrap_err().name(),
            "NotASubrelation"
        );
    }

    #[test]
    fn closed_examples() {
        let s = naturals_system().relation;
        let carrier = FiniteCarrier::new((0..=10).map(nat)).unwrap();
        assert!(is_closed_chain(&s, &s, &carrier).unwrap());

        let d = decimal_system();
        let carrier = FiniteCarrier::reachable(&d.relation, &d.root, 2, 10_000).unwrap();
        let stops = {
            let (a, b) = (dec("0."), dec("0.3"));
            ExtensionRelation::new("T", move |f, g| f == &a && g == &b)
        };
        assert!(!is_closed_chain(&stops, &d.relation, &carrier).unwrap());
        let threes = {
            let d = d.clone();
            ExtensionRelation::new("T", move |f, g| {
                d.relation.holds(f, g) && g.text().ends_with('3') && !f.text()[2..].contains(|c| c != '3')
            })
        };
        assert!(is_closed_chain(&threes, &d.relation, &carrier).unwrap());

        let empty = ExtensionRelation::empty("E");
        let c = FiniteCarrier::new([nat(0), nat(5)]).unwrap();
        assert!(is_closed_chain(&empty, &s, &c).unwrap());
    }

    #[test]
    fn cone_examples() {
        let a = Arc::new(Alphabet::new("letters", ["a", "b", "c", "R"]).unwrap());
        let members: Vec<Form> = ["a", "b", "c"]
            .iter()
            .map(|s| Form::from_text(&a, s).unwrap())
            .collect();
        let (g, r) = cone("g", &members).unwrap();
        assert_eq!(r.successors(&g).unwrap(), members);
        assert!(r.holds(&g, &members[1]));
        assert!(!r.holds(&members[0], &members[1]));

        let (g, r) = cone("g", &[]).unwrap();
        assert!(r.successors(&g).unwrap().is_empty());

        let bad = Form::from_text(&a, "aR").unwrap();
        assert_eq!(cone("R", &[bad]).unwrap_err().name(), "SymbolClash");
    }

    #[test]
    fn carrier_must_be_non_empty() {
        assert_eq!(
            FiniteCarrier::new(Vec::new()).unwrap_err(),
            RelationError::EmptyCarrier
        );
    }

    proptest! {
        #[test]
        fn guard_errors_exactly_on_footprint(toks in proptest::collection::vec(0u16..6, 0..10), which in 0u16..6) {
            let a = Arc::new(Alphabet::new("rel", ["¬", "x", "R", "S", "(", ")"]).unwrap());
            let f = Form::from_positions(a.clone(), toks);
            let name = a.symbol(which).to_string();
            let r = ExtensionRelation::new(name.clone(), |_, _| true);
            prop_assert_eq!(stratified_apply(&r, &f).is_err(), f.footprint().contains(name.as_str()));
        }

        #[test]
        fn decimal_star_monotone_and_additive(a in 0u32..10, b in 0u32..10, c in 0u32..10) {
            let d = decimal_system().relation;
            let f = dec("0.");
            let g = dec(&format!("0.{a}"));
            let h = dec(&format!("0.{a}{b}{c}"));
            prop_assert!(related_star(&d, &f, &g, 1, DEFAULT_NODE_BUDGET).unwrap());
            prop_assert!(related_star(&d, &g, &h, 2, DEFAULT_NODE_BUDGET).unwrap());
            prop_assert!(related_star(&d, &f, &h, 3, DEFAULT_NODE_BUDGET).unwrap());
            prop_assert!(!related_star(&d, &f, &h, 2, DEFAULT_NODE_BUDGET).unwrap());
        }
    }
}
