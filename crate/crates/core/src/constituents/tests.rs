use std::collections::{BTreeMap, HashSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::foundation::{chain_prefix, refines};
use crate::relations::DEFAULT_NODE_BUDGET;

fn vocab(text: &str) -> Vocabulary {
    Vocabulary::parse(text).unwrap()
}

fn model(json: &str) -> FiniteModel {
    FiniteModel::from_json(&serde_json::from_str(json).unwrap(), None).unwrap()
}

fn p_model() -> FiniteModel {
    model(r#"{"universe":["a","b"],"predicates":{"P":[["a"]]}}"#)
}

/// All models over `v` with universe `0..n`.
fn all_models(v: &Vocabulary, n: usize) -> Vec<FiniteModel> {
    let universe: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let mut slots: Vec<(usize, Vec<usize>)> = Vec::new();
    for (p, (_, arity)) in v.predicates().iter().enumerate() {
        for code in 0..n.pow(*arity as u32) {
            let mut t = vec![0; *arity];
            let mut c = code;
            for s in t.iter_mut().rev() {
                *s = c % n;
                c /= n;
            }
            slots.push((p, t));
        }
    }
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

fn random_model(v: &Vocabulary, rng: &mut impl Rng) -> FiniteModel {
    let n: usize = rng.gen_range(1..=3);
    let universe: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let mut ext = vec![HashSet::new(); v.predicates().len()];
    for (p, (_, arity)) in v.predicates().iter().enumerate() {
        for code in 0..n.pow(*arity as u32) {
            if rng.gen_bool(0.5) {
                let mut t = vec![0; *arity];
                let mut c = code;
                for s in t.iter_mut().rev() {
                    *s = c % n;
                    c /= n;
                }
                ext[p].insert(t);
            }
        }
    }
    FiniteModel::new(v.clone(), universe, ext).unwrap()
}

fn random_formula(v: &Vocabulary, scope: &mut Vec<String>, depth: usize, size: usize, rng: &mut impl Rng) -> Formula {
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

/// Independent semantics: the set of satisfying total assignments over a
/// fixed variable list, built bottom-up as a table.
fn sat_table(m: &FiniteModel, phi: &Formula, vars: &[String]) -> HashSet<Vec<usize>> {
    let n = m.size();
    let all: Vec<Vec<usize>> = (0..n.pow(vars.len() as u32))
        .map(|mut c| {
            let mut a = vec![0; vars.len()];
            for s in a.iter_mut() {
                *s = c % n;
                c /= n;
            }
            a
        })
        .collect();
    let pos = |v: &str| vars.iter().position(|x| x == v).unwrap();
    match phi {
        Formula::Atom(p, args) => {
            let pi = m.vocabulary().index_of(p).unwrap();
            all.into_iter()
                .filter(|a| m.holds(pi, &args.iter().map(|x| a[pos(x)]).collect::<Vec<_>>()))
                .collect()
        }
        Formula::Not(g) => {
            let t = sat_table(m, g, vars);
            all.into_iter().filter(|a| !t.contains(a)).collect()
        }
        Formula::And(gs) => {
            let ts: Vec<_> = gs.iter().map(|g| sat_table(m, g, vars)).collect();
            all.into_iter().filter(|a| ts.iter().all(|t| t.contains(a))).collect()
        }
        Formula::Or(gs) => {
            let ts: Vec<_> = gs.iter().map(|g| sat_table(m, g, vars)).collect();
            all.into_iter().filter(|a| ts.iter().any(|t| t.contains(a))).collect()
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let t = sat_table(m, g, vars);
            let i = pos(v);
            let ex = matches!(phi, Formula::Exists(..));
            all.into_iter()
                .filter(|a| {
                    let mut b = a.clone();
                    let mut hits = (0..n).map(|e| {
                        b[i] = e;
                        t.contains(&b)
                    });
                    if ex {
                        hits.any(|h| h)
                    } else {
                        hits.all(|h| h)
                    }
                })
                .collect()
        }
    }
}

#[test]
fn vocabulary_atoms() {
    let v = vocab("R/2,P/1");
    let texts: Vec<String> = v.atoms(1).iter().map(|a| v.atom_text(a)).collect();
    assert_eq!(texts, ["P(x1)", "R(x1,x1)"]);
    let r = vocab("R/2");
    let texts: Vec<String> = r.atoms(2).iter().map(|a| r.atom_text(a)).collect();
    assert_eq!(texts, ["R(x1,x1)", "R(x1,x2)", "R(x2,x1)", "R(x2,x2)"]);
    assert_eq!(v.atom_count(3), Some(3 + 9));
    assert_eq!(v.restriction(1), vec![0, 2]);
    assert!(Vocabulary::parse("P/1,P/2").is_err());
    assert!(Vocabulary::parse("P/0").is_err());
}

#[test]
fn model_json_round_trip() {
    let m = model(r#"{"universe":["a","b"],"predicates":{"P":[["a"]],"R":[["a","b"]]}}"#);
    assert_eq!(FiniteModel::from_json(&m.to_json(), None).unwrap(), m);
    let bad = serde_json::json!({"universe":["a"],"predicates":{"P":[["z"]]}});
    assert_eq!(FiniteModel::from_json(&bad, None).unwrap_err().name(), "UnknownElement");
    let empty = serde_json::json!({"universe":[],"predicates":{}});
    assert_eq!(FiniteModel::from_json(&empty, None).unwrap_err().name(), "InvalidModel");
}

#[test]
fn parser_and_depth() {
    let f = Formula::parse("E z A w (R(z,w) & E u P(u))").unwrap();
    assert_eq!(quantifier_depth(&f), 3);
    assert_eq!(quantifier_depth(&Formula::parse("P(x)").unwrap()), 0);
    assert_eq!(quantifier_depth(&Formula::parse("E z R(x,z)").unwrap()), 1);
    let g = Formula::parse("~P(x) | P(x) & ~E y (R(x,y) | (T))").unwrap();
    assert_eq!(Formula::parse(&g.to_string()).unwrap(), g);
    assert_eq!(g.free_variables(), vec!["x".to_string()]);
    for bad in ["P(x", "E P(x)", "p(x)", "P()", "P(x) &", "P(X)"] {
        assert!(Formula::parse(bad).is_err(), "{bad}");
    }
}

#[test]
fn eval_examples_and_errors() {
    let m = model(r#"{"universe":["a","b"],"predicates":{"P":[["a"]],"R":[["a","b"]]}}"#);
    let at = |v: &str, e: &str| BTreeMap::from([(v.to_string(), e.to_string())]);
    assert!(eval(&m, &Formula::parse("P(x)").unwrap(), &at("x", "a")).unwrap());
    assert!(eval(&m, &Formula::parse("E z R(x,z)").unwrap(), &at("x", "a")).unwrap());
    assert!(!eval(&m, &Formula::parse("E z R(x,z)").unwrap(), &at("x", "b")).unwrap());
    let e = eval(&m, &Formula::parse("P(y)").unwrap(), &at("x", "a")).unwrap_err();
    assert_eq!(e.name(), "UnboundVariable");
    let e = eval(&m, &Formula::parse("R(x)").unwrap(), &at("x", "a")).unwrap_err();
    assert_eq!(e.name(), "ArityMismatch");
}

#[test]
fn eval_matches_table_oracle() {
    let v = vocab("P/1,R/2");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let m = random_model(&v, &mut rng);
        let mut scope = vec!["x".to_string()];
        let phi = random_formula(&v, &mut scope, 2, 6, &mut rng);
        let vars = vec!["x".to_string(), "y1".to_string(), "y2".to_string()];
        let table = sat_table(&m, &phi, &vars);
        for a in 0..m.size() {
            let mut env = vec![("x".to_string(), a)];
            let got = eval_indexed(&m, &phi, &mut env).unwrap();
            // the table holds total assignments; x's value decides
            let want = table.contains(&vec![a, 0, 0]);
            assert_eq!(got, want, "{phi}");
        }
    }
}

#[test]
fn documented_examples() {
    let v = vocab("P/1");
    let m = p_model();
    let c0 = constituent_of(&m, &[0], 0).unwrap();
    assert_eq!(c0.attributive(), &[true]);
    assert_eq!(c0.encode(), "0:+");
    let c1 = constituent_of(&m, &[0], 1).unwrap();
    // both extensions P(z) and ~P(z) are realized, with P(x1) fixed
    assert_eq!(c1.encode(), "1:+{0:+-,0:++}");
    let attrs: Vec<Vec<bool>> = c1.positive_branches().map(|b| b.attributive().to_vec()).collect();
    assert_eq!(attrs, vec![vec![true, false], vec![true, true]]);
    assert_eq!(c1.to_json(&v)["exists"].as_array().unwrap().len(), 2);
    assert_eq!(parent(&c1).unwrap(), c0);
    assert_eq!(parent(&c0).unwrap_err().name(), "DepthZero");
    assert_eq!(constituent_of(&m, &[0], 4).unwrap_err().name(), "DepthBudgetExceeded");
}

#[test]
fn profile_counts() {
    let m = model(r#"{"universe":["a","b"],"predicates":{"P":[["a"]],"R":[["a","b"]]}}"#);
    assert_eq!(attributive_profile(&m, &[0]).len(), 2);
    assert_eq!(attributive_profile(&m, &[0, 1]), vec![true, false, false, true, false, false]);
}

/// Independent count: sign maps over *all* width-2 depth-0 descriptions,
/// keeping those silent on incompatible ones.
fn brute_count_p1_depth1() -> usize {
    let mut n = 0;
    for x1 in [false, true] {
        let wide: Vec<(bool, bool)> = [false, true].iter().flat_map(|&a| [(a, false), (a, true)]).collect();
        for signs in 0u32..1 << wide.len() {
            let silent_off = wide.iter().enumerate().all(|(i, (a, _))| *a == x1 || signs >> i & 1 == 0);
            if silent_off {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn counts() {
    let v = vocab("P/1");
    assert_eq!(enumerate_constituents(&v, 1, 0, 100).unwrap().len(), 2);
    let d1 = enumerate_constituents(&v, 1, 1, 100).unwrap();
    assert_eq!(d1.len(), 8);
    assert_eq!(d1.len(), brute_count_p1_depth1());
    assert_eq!(enumerate_constituents(&v, 1, 2, 1000).unwrap().len(), 512);
    let err = enumerate_constituents(&v, 1, 3, DEFAULT_ENUMERATION_BUDGET).unwrap_err();
    assert_eq!(err.name(), "EnumerationBudgetExceeded");
    let r = vocab("P/1,R/2");
    assert_eq!(enumerate_constituents(&r, 1, 0, 100).unwrap().len(), 4);
    assert_eq!(constituent_count(&r, 1, 1).unwrap(), BigUint::from(4u32) * (BigUint::one() << 16));
    let sorted = d1.windows(2).all(|w| w[0] < w[1]);
    assert!(sorted);
    assert!(d1.iter().all(|c| fits(&v, c)));
}

#[test]
fn coherence_realization_exclusivity() {
    let v = vocab("P/1");
    let families: Vec<Vec<Constituent>> = (0..=2).map(|d| enumerate_constituents(&v, 1, d, 1000).unwrap()).collect();
    for n in 1..=3 {
        for m in all_models(&v, n) {
            for a in 0..n {
                let chain = constituent_chain(&m, a, 3).unwrap();
                for w in chain.windows(2) {
                    assert_eq!(parent(&w[1]).unwrap(), w[0]);
                }
                assert_eq!(parent(&parent(&chain[2]).unwrap()).unwrap(), chain[0]);
                for d in 0..=2 {
                    let mut env = vec![("x1".to_string(), a)];
                    let hits: Vec<&Constituent> = families[d]
                        .iter()
                        .filter(|c| eval_indexed(&m, &c.reading(&v), &mut env).unwrap())
                        .collect();
                    assert_eq!(hits, vec![&chain[d]]);
                }
            }
        }
    }
}

#[test]
fn coherence_with_binary_relation() {
    let v = vocab("P/1,R/2");
    for n in 1..=2 {
        for m in all_models(&v, n) {
            for a in 0..n {
                let chain = constituent_chain(&m, a, 2).unwrap();
                for (d, w) in chain.windows(2).enumerate() {
                    assert_eq!(parent(&w[1]).unwrap(), w[0]);
                    let mut env = vec![("x1".to_string(), a)];
                    assert!(eval_indexed(&m, &w[0].reading(&v), &mut env).unwrap(), "depth {d}");
                }
            }
        }
    }
}

#[test]
fn isomorphic_copies_agree() {
    let v = vocab("P/1,R/2");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let m = random_model(&v, &mut rng);
        let n = m.size();
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let ext: Vec<HashSet<Vec<usize>>> = (0..v.predicates().len())
            .map(|p| {
                let arity = v.arity(p);
                let mut s = HashSet::new();
                for code in 0..n.pow(arity as u32) {
                    let mut t = vec![0; arity];
                    let mut c = code;
                    for x in t.iter_mut() {
                        *x = c % n;
                        c /= n;
                    }
                    if m.holds(p, &t) {
                        s.insert(t.iter().map(|&e| perm[e]).collect());
                    }
                }
                s
            })
            .collect();
        let universe: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
        let copy = FiniteModel::new(v.clone(), universe, ext).unwrap();
        for a in 0..n {
            for d in 0..=2 {
                assert_eq!(constituent_of(&m, &[a], d).unwrap(), constituent_of(&copy, &[perm[a]], d).unwrap());
            }
        }
    }
}

#[test]
fn constituent_system_bridges_to_foundation() {
    let v = vocab("P/1");
    let cs = as_formal_system(&v, 1, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
    assert_eq!(cs.cover(0, DEFAULT_NODE_BUDGET).unwrap().len(), 2);
    assert_eq!(cs.cover(1, DEFAULT_NODE_BUDGET).unwrap().len(), 8);
    let c2 = cs.cover(2, DEFAULT_NODE_BUDGET).unwrap();
    assert_eq!(c2.len(), 512);
    let h = FoundationHandle::of(&cs.system);
    let c1 = cs.cover(1, DEFAULT_NODE_BUDGET).unwrap();
    assert!(refines(&h, &c2, &c1, DEFAULT_NODE_BUDGET).unwrap());
    let m = p_model();
    for a in 0..m.size() {
        let rule = cs.chain_rule(&m, a);
        let prefix = chain_prefix(&rule, 3).unwrap();
        let chain = constituent_chain(&m, a, 2).unwrap();
        let decoded: Vec<&Constituent> = prefix.forms[1..].iter().map(|f| cs.constituent(f).unwrap()).collect();
        assert_eq!(decoded, chain.iter().collect::<Vec<_>>());
        assert!(cs.system.language.admits(&prefix.forms[2]));
    }
}

proptest! {
    #[test]
    fn agreement_on_random_pairs(seed in any::<u64>()) {
        let v = vocab("P/1,R/2");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_model(&v, &mut rng);
        let n = random_model(&v, &mut rng);
        for a in 0..m.size() {
            for b in 0..n.size() {
                for d in 0..=2 {
                    if constituent_of(&m, &[a], d).unwrap() != constituent_of(&n, &[b], d).unwrap() {
                        continue;
                    }
                    for _ in 0..20 {
                        let mut scope = vec!["x".to_string()];
                        let phi = random_formula(&v, &mut scope, d, 8, &mut rng);
                        let l = eval_indexed(&m, &phi, &mut vec![("x".to_string(), a)]).unwrap();
                        let r = eval_indexed(&n, &phi, &mut vec![("x".to_string(), b)]).unwrap();
                        prop_assert_eq!(l, r, "{}", phi);
                    }
                }
            }
        }
    }
}
