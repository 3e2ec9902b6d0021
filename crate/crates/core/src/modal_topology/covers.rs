//! Covering relations on finite posets, checked by saturation.
//!
//! The listed covers are generating assertions. `a ◁ U` is derivable when
//! some listed `a ◁ C` has every `c ∈ C` either below an element of `U` or
//! itself derivably covered by `U`. The derived relation is the least fixpoint
//! of that rule, computed per `U`.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use serde_json::{json, Value};

use super::ModalError;
use crate::forms::Form;
use crate::foundation::FoundationHandle;
use crate::relations::RelationError;

#[derive(Clone, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn or_with(&mut self, other: &Bits) -> bool {
        let mut changed = false;
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            let n = *a | b;
            changed |= n != *a;
            *a = n;
        }
        changed
    }

    fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn is_subset(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

/// A finite poset with listed covers `a ◁ A`.
#[derive(Clone)]
pub struct CoverStructure {
    elements: Vec<String>,
    index: HashMap<String, usize>,
    /// `down[a] = {x : x ≤ a}`
    down: Vec<Bits>,
    covers: Vec<(usize, Vec<usize>)>,
}

impl std::fmt::Debug for CoverStructure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoverStructure")
            .field("elements", &self.elements.len())
            .field("covers", &self.covers.len())
            .finish()
    }
}

impl CoverStructure {
    /// `order` lists generating pairs `a ≤ b`; the order is their reflexive
    /// transitive closure and must be antisymmetric.
    pub fn new(
        elements: Vec<String>,
        order: &[(String, String)],
        covers: &[(String, Vec<String>)],
    ) -> Result<Self, ModalError> {
        let mut cs = CoverStructure {
            elements: Vec::new(),
            index: HashMap::new(),
            down: Vec::new(),
            covers: Vec::new(),
        };
        for e in elements {
            cs.intern(&e);
        }
        let pairs: Vec<(usize, usize)> = order.iter().map(|(a, b)| (cs.intern(a), cs.intern(b))).collect();
        let covers: Vec<(usize, Vec<usize>)> = covers
            .iter()
            .map(|(a, by)| (cs.intern(a), by.iter().map(|b| cs.intern(b)).collect()))
            .collect();
        let n = cs.elements.len();
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b) in &pairs {
            below[b].push(a);
        }
        // down-sets by search from each element
        for top in 0..n {
            let mut d = Bits::new(n);
            d.set(top);
            let mut queue = VecDeque::from([top]);
            while let Some(x) = queue.pop_front() {
                for &y in &below[x] {
                    if !d.get(y) {
                        d.set(y);
                        queue.push_back(y);
                    }
                }
            }
            cs.down.push(d);
        }
        for a in 0..n {
            for b in cs.down[a].ones() {
                if b != a && cs.down[b].get(a) {
                    return Err(ModalError::InvalidCoverStructure(format!(
                        "{} and {} are mutually below each other",
                        cs.elements[a], cs.elements[b]
                    )));
                }
            }
        }
        cs.covers = covers;
        Ok(cs)
    }

    fn intern(&mut self, e: &str) -> usize {
        if let Some(&i) = self.index.get(e) {
            return i;
        }
        let i = self.elements.len();
        self.elements.push(e.to_string());
        self.index.insert(e.to_string(), i);
        i
    }

    /// `{"order":[["a","b"],…],"covers":[{"of":"a","by":["b","c"]}]}`.
    pub fn from_json(value: &Value) -> Result<Self, ModalError> {
        let bad = |m: &str| ModalError::InvalidCoverStructure(m.to_string());
        let string = |v: &Value| v.as_str().map(str::to_string).ok_or_else(|| bad("element ids are strings"));
        let mut elements = Vec::new();
        if let Some(list) = value.get("elements").and_then(Value::as_array) {
            for e in list {
                elements.push(string(e)?);
            }
        }
        let mut order = Vec::new();
        for p in value.get("order").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
            let p = p.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("order entries are pairs"))?;
            order.push((string(&p[0])?, string(&p[1])?));
        }
        let mut covers = Vec::new();
        for c in value.get("covers").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
            let of = string(c.get("of").ok_or_else(|| bad("cover needs `of`"))?)?;
            let by = c
                .get("by")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("cover needs `by`"))?
                .iter()
                .map(string)
                .collect::<Result<Vec<_>, _>>()?;
            covers.push((of, by));
        }
        CoverStructure::new(elements, &order, &covers)
    }

    pub fn to_json(&self) -> Value {
        let mut order = Vec::new();
        for (b, d) in self.down.iter().enumerate() {
            for a in d.ones().filter(|&a| a != b) {
                order.push(json!([self.elements[a], self.elements[b]]));
            }
        }
        let covers: Vec<Value> = self
            .covers
            .iter()
            .map(|(a, by)| json!({"of": self.elements[*a], "by": by.iter().map(|&b| &self.elements[b]).collect::<Vec<_>>()}))
            .collect();
        json!({"elements": self.elements, "order": order, "covers": covers})
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn cover_count(&self) -> usize {
        self.covers.len()
    }

    pub fn leq(&self, a: &str, b: &str) -> Option<bool> {
        Some(self.down[*self.index.get(b)?].get(*self.index.get(a)?))
    }

    /// Drops every listed cover `of ◁ by` (as sets). Returns how many went.
    pub fn remove_cover(&mut self, of: &str, by: &[&str]) -> usize {
        let Some(&a) = self.index.get(of) else { return 0 };
        let mut want: Vec<usize> = by.iter().filter_map(|b| self.index.get(*b).copied()).collect();
        want.sort();
        want.dedup();
        let before = self.covers.len();
        self.covers.retain(|(x, c)| {
            let mut c = c.clone();
            c.sort();
            c.dedup();
            !(*x == a && c == want)
        });
        before - self.covers.len()
    }

    /// Is `a ◁ U` derivable?
    pub fn derives(&self, a: &str, u: &[&str]) -> Option<bool> {
        let a = *self.index.get(a)?;
        let u: Vec<usize> = u.iter().map(|x| self.index.get(*x).copied()).collect::<Option<_>>()?;
        let mut work = 0;
        Some(self.saturate(&u, &mut work, usize::MAX).ok()?.get(a))
    }

    fn saturate(&self, u: &[usize], work: &mut usize, budget: usize) -> Result<Bits, ModalError> {
        let n = self.elements.len();
        let mut down_u = Bits::new(n);
        for &x in u {
            down_u.or_with(&self.down[x]);
        }
        let mut sat = Bits::new(n);
        loop {
            let mut changed = false;
            for (a, c) in &self.covers {
                if sat.get(*a) {
                    continue;
                }
                *work += c.len() + 1;
                if *work > budget {
                    return Err(ModalError::SearchBudgetExceeded(format!("{budget} saturation steps")));
                }
                if c.iter().all(|&x| down_u.get(x) || sat.get(x)) {
                    sat.set(*a);
                    changed = true;
                }
            }
            if !changed {
                return Ok(sat);
            }
        }
    }

    /// Greatest lower bound, or `Err(())` when lower bounds exist without one.
    fn meet(&self, x: usize, y: usize) -> Result<Option<usize>, ()> {
        if self.down[y].get(x) {
            return Ok(Some(x));
        }
        if self.down[x].get(y) {
            return Ok(Some(y));
        }
        if !self.down[x].intersects(&self.down[y]) {
            return Ok(None);
        }
        let lower = self.down[x].and(&self.down[y]);
        let glb = lower.ones().find(|&m| lower.is_subset(&self.down[m]));
        glb.map(Some).ok_or(())
    }

    fn names(&self, xs: &[usize]) -> String {
        let v: Vec<&str> = xs.iter().map(|&x| self.elements[x].as_str()).collect();
        format!("{{{}}}", v.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxiomStatus {
    Holds,
    Fails,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomOutcome {
    pub status: AxiomStatus,
    pub instances: usize,
    /// First failing instance, in listing order.
    pub witness: Option<String>,
}

impl AxiomOutcome {
    fn new() -> Self {
        AxiomOutcome {
            status: AxiomStatus::Holds,
            instances: 0,
            witness: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok && self.status != AxiomStatus::Fails {
            self.status = AxiomStatus::Fails;
            self.witness = Some(witness());
        }
    }

    pub fn holds(&self) -> bool {
        self.status == AxiomStatus::Holds
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FgReport {
    /// Each listed `a ◁ A` has `x ◁ A` for every `x ∈ A`.
    pub a1_reflexivity: AxiomOutcome,
    /// `a ≤ b` gives `a ◁ {b}`.
    pub a2_monotonicity: AxiomOutcome,
    /// Two listed covers of `a` give a cover by their pairwise meets.
    pub a3_meets: AxiomOutcome,
    /// Listed covers of the members of a listed cover compose.
    pub a4_transitivity: AxiomOutcome,
    /// Pairs with common lower bounds but no greatest one.
    pub meet_undefined: Vec<String>,
    pub saturation_steps: usize,
}

impl FgReport {
    pub fn all_applicable_hold(&self) -> bool {
        [&self.a1_reflexivity, &self.a2_monotonicity, &self.a3_meets, &self.a4_transitivity]
            .iter()
            .all(|o| o.status != AxiomStatus::Fails)
    }
}

pub const DEFAULT_SATURATION_BUDGET: usize = 2_000_000_000;

pub fn fg_axiom_check(cs: &CoverStructure) -> Result<FgReport, ModalError> {
    fg_axiom_check_bounded(cs, DEFAULT_SATURATION_BUDGET)
}

pub fn fg_axiom_check_bounded(cs: &CoverStructure, budget: usize) -> Result<FgReport, ModalError> {
    let n = cs.elements.len();
    let mut work = 0usize;
    let mut by_element: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, (a, _)) in cs.covers.iter().enumerate() {
        by_element[*a].push(i);
    }

    let mut a1 = AxiomOutcome::new();
    for (a, c) in &cs.covers {
        let sat = cs.saturate(c, &mut work, budget)?;
        for &x in c {
            a1.record(sat.get(x), || format!("{} ◁ {} listed, but {} ◁ {} is not derivable", cs.elements[*a], cs.names(c), cs.elements[x], cs.names(c)));
        }
    }

    let mut a2 = AxiomOutcome::new();
    for b in 0..n {
        let sat = cs.saturate(&[b], &mut work, budget)?;
        for a in cs.down[b].ones() {
            a2.record(sat.get(a), || format!("{} ≤ {} but {} ◁ {{{}}} is not derivable", cs.elements[a], cs.elements[b], cs.elements[a], cs.elements[b]));
        }
    }

    let mut a3 = AxiomOutcome::new();
    let mut undefined = Vec::new();
    for a in 0..n {
        let listed = &by_element[a];
        for (i, &p) in listed.iter().enumerate() {
            for &q in &listed[i..] {
                let (ca, cb) = (&cs.covers[p].1, &cs.covers[q].1);
                let mut meets = Vec::new();
                let mut defined = true;
                for &x in ca {
                    for &y in cb {
                        match cs.meet(x, y) {
                            Ok(Some(m)) => meets.push(m),
                            Ok(None) => {}
                            Err(()) => {
                                defined = false;
                                undefined.push(format!("{}∧{}", cs.elements[x], cs.elements[y]));
                            }
                        }
                    }
                }
                if !defined {
                    continue;
                }
                meets.sort();
                meets.dedup();
                let sat = cs.saturate(&meets, &mut work, budget)?;
                a3.record(sat.get(a), || format!("{} ◁ {} and {} ◁ {} but not by their meets", cs.elements[a], cs.names(ca), cs.elements[a], cs.names(cb)));
            }
        }
    }
    if a3.instances == 0 && !undefined.is_empty() {
        a3.status = AxiomStatus::NotApplicable;
    }

    let mut a4 = AxiomOutcome::new();
    for (a, c) in &cs.covers {
        let widest = c.iter().map(|&x| by_element[x].len()).max().unwrap_or(0).min(3);
        for j in 0..widest {
            if c.iter().any(|&x| by_element[x].is_empty()) {
                break;
            }
            let mut union: Vec<usize> = c
                .iter()
                .flat_map(|&x| {
                    let own = &by_element[x];
                    cs.covers[own[j % own.len()]].1.iter().copied()
                })
                .collect();
            union.sort();
            union.dedup();
            let sat = cs.saturate(&union, &mut work, budget)?;
            a4.record(sat.get(*a), || format!("{} ◁ {} composed with choice {j} is not derivable", cs.elements[*a], cs.names(c)));
        }
    }
    if a4.instances == 0 {
        a4.status = AxiomStatus::NotApplicable;
    }

    undefined.sort();
    undefined.dedup();
    Ok(FgReport {
        a1_reflexivity: a1,
        a2_monotonicity: a2,
        a3_meets: a3,
        a4_transitivity: a4,
        meet_undefined: undefined,
        saturation_steps: work,
    })
}

/// The forms within `depth` steps of the base, ordered by "extends"
/// (a successor lies below its source), with every canonical cover
/// `C_k(f)` for `depth(f) + k ≤ depth` listed, `C_0(f) = {f}` included.
pub fn cover_structure_of(
    h: &FoundationHandle,
    depth: usize,
    budget: usize,
) -> Result<CoverStructure, ModalError> {
    let mut levels: Vec<Vec<Form>> = vec![vec![h.base.clone()]];
    let mut children: HashMap<Form, Vec<Form>> = HashMap::new();
    let mut seen = std::collections::HashSet::from([h.base.clone()]);
    for _ in 0..depth {
        let mut next = Vec::new();
        for f in levels.last().unwrap() {
            let kids = h.system.require_successors(f)?;
            for g in &kids {
                if seen.insert(g.clone()) {
                    if seen.len() > budget {
                        return Err(RelationError::SearchBudgetExceeded(budget).into());
                    }
                    next.push(g.clone());
                }
            }
            children.insert(f.clone(), kids);
        }
        levels.push(next);
    }
    let elements: Vec<String> = levels.iter().flatten().map(Form::text).collect();
    let mut order = Vec::new();
    for (f, kids) in &children {
        for g in kids {
            order.push((g.text(), f.text()));
        }
    }
    let mut covers = Vec::new();
    for (d, level) in levels.iter().enumerate() {
        for f in level {
            let mut layer = vec![f.clone()];
            for _k in 0..=(depth - d) {
                covers.push((f.text(), layer.iter().map(Form::text).collect::<Vec<_>>()));
                let mut next = Vec::new();
                let mut dedup = std::collections::HashSet::new();
                for x in &layer {
                    for g in children.get(x).map(Vec::as_slice).unwrap_or(&[]) {
                        if dedup.insert(g.clone()) {
                            next.push(g.clone());
                        }
                    }
                }
                layer = next;
            }
        }
    }
    order.sort();
    CoverStructure::new(elements, &order, &covers)
}
