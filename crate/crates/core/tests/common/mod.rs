#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rand::Rng;
use synth_core::constituents::{FiniteModel, Formula, Vocabulary};
use synth_core::forms::{Alphabet, Form};
use synth_core::relations::ExtensionRelation;

/// Models over `v` with universe `0..n`, one per subset of the possible facts.
pub fn all_models(v: &Vocabulary, n: usize) -> Vec<FiniteModel> {
    let universe: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let slots = slots(v, n);
    (0u64..1 << slots.len())
        .map(|mask| {
            let mut ext = vec![HashSet::new(); v.predicates().len()];
            for (i, (p, t)) in slots.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    ext[*p].insert(t.clone());
                }
            }
            FiniteModel::new(v.clone(), universe.clone(), ext).unwrap()
        })
        .collect()
}

fn slots(v: &Vocabulary, n: usize) -> Vec<(usize, Vec<usize>)> {
    let mut out = Vec::new();
    for (p, (_, arity)) in v.predicates().iter().enumerate() {
        for code in 0..n.pow(*arity as u32) {
            let mut t = vec![0; *arity];
            let mut c = code;
            for s in t.iter_mut().rev() {
                *s = c % n;
                c /= n;
            }
            out.push((p, t));
        }
    }
    out
}

pub fn random_model(v: &Vocabulary, max_size: usize, rng: &mut impl Rng) -> FiniteModel {
    let n = rng.gen_range(1..=max_size);
    let universe: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let mut ext = vec![HashSet::new(); v.predicates().len()];
    for (p, t) in slots(v, n) {
        if rng.gen_bool(0.5) {
            ext[p].insert(t);
        }
    }
    FiniteModel::new(v.clone(), universe, ext).unwrap()
}

/// The same structure with elements renamed along `perm` (old index to new).
pub fn permuted(m: &FiniteModel, perm: &[usize]) -> FiniteModel {
    let v = m.vocabulary().clone();
    let n = m.size();
    let universe: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut ext = vec![HashSet::new(); v.predicates().len()];
    for (p, t) in slots(&v, n) {
        if m.holds(p, &t) {
            ext[p].insert(t.iter().map(|&e| perm[e]).collect());
        }
    }
    FiniteModel::new(v, universe, ext).unwrap()
}

pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}

/// A random formula whose free variables lie in `scope`, of quantifier depth
/// at most `depth`.
pub fn random_formula(v: &Vocabulary, scope: &mut Vec<String>, depth: usize, size: usize, rng: &mut impl Rng) -> Formula {
    let choice = if size == 0 { 0 } else { rng.gen_range(0..6) };
    match choice {
        4 | 5 if depth > 0 => {
            let var = format!("y{}", scope.len());
            scope.push(var.clone());
            let body = random_formula(v, scope, depth - 1, size - 1, rng);
            scope.pop();
            if choice == 4 {
                Formula::Exists(var, Box::new(body))
            } else {
                Formula::Forall(var, Box::new(body))
            }
        }
        1 => Formula::not(random_formula(v, scope, depth, size - 1, rng)),
        2 | 3 => {
            let parts = (0..2).map(|_| random_formula(v, scope, depth, size / 2, rng)).collect();
            if choice == 2 {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
        _ => {
            let (name, arity) = &v.predicates()[rng.gen_range(0..v.predicates().len())];
            let args = (0..*arity).map(|_| scope[rng.gen_range(0..scope.len())].clone()).collect();
            Formula::Atom(name.clone(), args)
        }
    }
}

/// Direct recursive semantics, kept apart from the library evaluator.
pub fn naive_eval(m: &FiniteModel, phi: &Formula, env: &mut Vec<(String, usize)>) -> bool {
    match phi {
        Formula::Atom(p, args) => {
            let pi = m.vocabulary().index_of(p).unwrap();
            let t: Vec<usize> = args
                .iter()
                .map(|a| env.iter().rev().find(|(v, _)| v == a).unwrap().1)
                .collect();
            m.holds(pi, &t)
        }
        Formula::Not(g) => !naive_eval(m, g, env),
        Formula::And(gs) => gs.iter().all(|g| naive_eval(m, g, env)),
        Formula::Or(gs) => gs.iter().any(|g| naive_eval(m, g, env)),
        Formula::Exists(x, g) | Formula::Forall(x, g) => {
            let ex = matches!(phi, Formula::Exists(..));
            let mut hit = !ex;
            for e in 0..m.size() {
                env.push((x.clone(), e));
                let r = naive_eval(m, g, env);
                env.pop();
                if r == ex {
                    hit = ex;
                    break;
                }
            }
            hit
        }
    }
}

/// Single-token forms `n0`, `n1`, … over a shared alphabet.
pub fn node_alphabet(n: usize) -> Arc<Alphabet> {
    Arc::new(Alphabet::new("nodes", (0..n).map(|i| format!("n{i}"))).unwrap())
}

pub fn node(a: &Arc<Alphabet>, i: usize) -> Form {
    Form::from_symbols(a, &[format!("n{i}")]).unwrap()
}

/// A random finitely branching relation on `size` nodes, out-degree ≤ `branching`.
pub fn random_system(a: &Arc<Alphabet>, size: usize, branching: usize, rng: &mut impl Rng) -> (ExtensionRelation, Vec<Form>) {
    let forms: Vec<Form> = (0..size).map(|i| node(a, i)).collect();
    let mut table = HashMap::new();
    for f in &forms {
        let k = rng.gen_range(0..=branching);
        let mut succ: Vec<Form> = Vec::new();
        for _ in 0..k {
            let g = forms[rng.gen_range(0..size)].clone();
            if !succ.contains(&g) {
                succ.push(g);
            }
        }
        table.insert(f.clone(), succ);
    }
    (ExtensionRelation::from_successors("G", table), forms)
}
