use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde_json::{json, Value};

use super::ConstituentError;

/// Predicate symbols with their arities, kept sorted by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vocabulary {
    predicates: Vec<(String, usize)>,
}

/// An atomic formula over tuple slots: `pred(x_{slots[0]+1}, …)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: usize,
    pub slots: Vec<usize>,
}

impl Vocabulary {
    pub fn new<S: Into<String>>(
        predicates: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Self, ConstituentError> {
        let mut preds: Vec<(String, usize)> =
            predicates.into_iter().map(|(n, a)| (n.into(), a)).collect();
        preds.sort();
        for w in preds.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ConstituentError::InvalidVocabulary(format!(
                    "duplicate predicate {}",
                    w[0].0
                )));
            }
        }
        for (n, a) in &preds {
            if *a == 0 {
                return Err(ConstituentError::InvalidVocabulary(format!("{n} has arity 0")));
            }
            if !is_predicate_name(n) {
                return Err(ConstituentError::InvalidVocabulary(format!("bad predicate name `{n}`")));
            }
        }
        Ok(Vocabulary { predicates: preds })
    }

    /// `P/1,R/2`.
    pub fn parse(text: &str) -> Result<Self, ConstituentError> {
        let bad = || ConstituentError::InvalidVocabulary(text.to_string());
        let preds = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| {
                let (n, a) = item.split_once('/').ok_or_else(bad)?;
                Ok((n.trim().to_string(), a.trim().parse::<usize>().map_err(|_| bad())?))
            })
            .collect::<Result<Vec<_>, ConstituentError>>()?;
        Vocabulary::new(preds)
    }

    pub fn predicates(&self) -> &[(String, usize)] {
        &self.predicates
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|(n, _)| n == name)
    }

    pub fn arity(&self, predicate: usize) -> usize {
        self.predicates[predicate].1
    }

    /// Every atom over `k` slots, ordered by predicate name then slot pattern.
    pub fn atoms(&self, k: usize) -> Vec<Atom> {
        let mut out = Vec::new();
        for (p, (_, arity)) in self.predicates.iter().enumerate() {
            let total = k.checked_pow(*arity as u32).unwrap_or(usize::MAX);
            for mut code in 0..total {
                let mut slots = vec![0; *arity];
                for s in slots.iter_mut().rev() {
                    *s = code % k;
                    code /= k;
                }
                out.push(Atom { predicate: p, slots });
            }
        }
        out
    }

    /// Number of atoms over `k` slots, `Σ k^arity`.
    pub fn atom_count(&self, k: usize) -> Option<usize> {
        self.predicates
            .iter()
            .try_fold(0usize, |acc, (_, a)| acc.checked_add(k.checked_pow(*a as u32)?))
    }

    /// Positions within `atoms(k+1)` of the atoms of `atoms(k)`.
    pub fn restriction(&self, k: usize) -> Vec<usize> {
        self.atoms(k + 1)
            .iter()
            .enumerate()
            .filter(|(_, a)| a.slots.iter().all(|&s| s < k))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn atom_text(&self, atom: &Atom) -> String {
        let args: Vec<String> = atom.slots.iter().map(|s| format!("x{}", s + 1)).collect();
        format!("{}({})", self.predicates[atom.predicate].0, args.join(","))
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.predicates.iter().map(|(n, a)| format!("{n}/{a}")).collect();
        f.write_str(&items.join(","))
    }
}

fn is_predicate_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_variable_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A finite structure; elements are referred to by index into `universe`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteModel {
    universe: Vec<String>,
    vocabulary: Vocabulary,
    extensions: Vec<HashSet<Vec<usize>>>,
}

impl FiniteModel {
    pub fn new(
        vocabulary: Vocabulary,
        universe: Vec<String>,
        extensions: Vec<HashSet<Vec<usize>>>,
    ) -> Result<Self, ConstituentError> {
        if universe.is_empty() {
            return Err(ConstituentError::InvalidModel("empty universe".into()));
        }
        let distinct: HashSet<&String> = universe.iter().collect();
        if distinct.len() != universe.len() {
            return Err(ConstituentError::InvalidModel("repeated element".into()));
        }
        if extensions.len() != vocabulary.predicates.len() {
            return Err(ConstituentError::InvalidModel("one extension per predicate".into()));
        }
        for (p, ext) in extensions.iter().enumerate() {
            for t in ext {
                if t.len() != vocabulary.arity(p) || t.iter().any(|&e| e >= universe.len()) {
                    return Err(ConstituentError::InvalidModel(format!(
                        "bad tuple for {}",
                        vocabulary.predicates[p].0
                    )));
                }
            }
        }
        Ok(FiniteModel {
            universe,
            vocabulary,
            extensions,
        })
    }

    /// `{"universe":["a","b"],"predicates":{"P":[["a"]],"R":[["a","b"]]}}`.
    ///
    /// Arities come from `vocabulary` when given, else from the tuples; a
    /// predicate listed with no tuples then needs an `"arities"` entry.
    pub fn from_json(value: &Value, vocabulary: Option<&Vocabulary>) -> Result<Self, ConstituentError> {
        let bad = |m: &str| ConstituentError::InvalidModel(m.to_string());
        let universe: Vec<String> = value
            .get("universe")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing universe"))?
            .iter()
            .map(|v| v.as_str().map(str::to_string).ok_or_else(|| bad("element ids are strings")))
            .collect::<Result<_, _>>()?;
        let empty = serde_json::Map::new();
        let preds = match value.get("predicates") {
            Some(p) => p.as_object().ok_or_else(|| bad("predicates must be an object"))?,
            None => &empty,
        };
        let mut tuples: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
        for (name, list) in preds {
            let list = list.as_array().ok_or_else(|| bad("tuple list expected"))?;
            let mut ts = Vec::new();
            for t in list {
                let t = t.as_array().ok_or_else(|| bad("tuple expected"))?;
                ts.push(
                    t.iter()
                        .map(|e| e.as_str().map(str::to_string).ok_or_else(|| bad("element ids are strings")))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            tuples.insert(name.clone(), ts);
        }
        let vocabulary = match vocabulary {
            Some(v) => v.clone(),
            None => {
                let declared = value.get("arities").and_then(Value::as_object);
                let mut preds = Vec::new();
                for (name, ts) in &tuples {
                    let arity = match ts.first() {
                        Some(t) => t.len(),
                        None => declared
                            .and_then(|d| d.get(name))
                            .and_then(Value::as_u64)
                            .ok_or_else(|| bad(&format!("arity of {name} unknown")))? as usize,
                    };
                    preds.push((name.clone(), arity));
                }
                Vocabulary::new(preds)?
            }
        };
        let index: HashMap<&str, usize> = universe.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
        let mut extensions = vec![HashSet::new(); vocabulary.predicates.len()];
        for (name, ts) in &tuples {
            let p = vocabulary
                .index_of(name)
                .ok_or_else(|| ConstituentError::UnknownPredicate(name.clone()))?;
            for t in ts {
                let t = t
                    .iter()
                    .map(|e| index.get(e.as_str()).copied().ok_or_else(|| ConstituentError::UnknownElement(e.clone())))
                    .collect::<Result<Vec<_>, _>>()?;
                extensions[p].insert(t);
            }
        }
        FiniteModel::new(vocabulary, universe, extensions)
    }

    pub fn to_json(&self) -> Value {
        let mut preds = serde_json::Map::new();
        for (p, (name, _)) in self.vocabulary.predicates.iter().enumerate() {
            let mut ts: Vec<&Vec<usize>> = self.extensions[p].iter().collect();
            ts.sort();
            let ts: Vec<Vec<&str>> = ts
                .into_iter()
                .map(|t| t.iter().map(|&e| self.universe[e].as_str()).collect())
                .collect();
            preds.insert(name.clone(), json!(ts));
        }
        json!({"universe": self.universe, "predicates": preds})
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn element(&self, id: &str) -> Result<usize, ConstituentError> {
        self.universe
            .iter()
            .position(|e| e == id)
            .ok_or_else(|| ConstituentError::UnknownElement(id.to_string()))
    }

    pub fn holds(&self, predicate: usize, tuple: &[usize]) -> bool {
        self.extensions[predicate].contains(tuple)
    }
}

/// First-order formulas without equality, constants or functions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String, Vec<String>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
}

impl Formula {
    pub fn atom(p: &str, args: &[&str]) -> Formula {
        Formula::Atom(p.into(), args.iter().map(|a| a.to_string()).collect())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn exists(v: &str, f: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: &str, f: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(f))
    }

    pub fn parse(text: &str) -> Result<Formula, ConstituentError> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens: &tokens, pos: 0 };
        let f = p.disjunction()?;
        if p.pos != tokens.len() {
            return Err(ConstituentError::Syntax(format!("trailing input in `{text}`")));
        }
        Ok(f)
    }

    pub fn free_variables(&self) -> Vec<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match f {
                Formula::Atom(_, args) => {
                    for a in args {
                        if !bound.contains(a) && !out.contains(a) {
                            out.push(a.clone());
                        }
                    }
                }
                Formula::Not(g) => go(g, bound, out),
                Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| go(g, bound, out)),
                Formula::Exists(v, g) | Formula::Forall(v, g) => {
                    bound.push(v.clone());
                    go(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(p, args) => write!(f, "{p}({})", args.join(",")),
            Formula::Not(g) => write!(f, "~{g}"),
            Formula::And(gs) if gs.is_empty() => write!(f, "(T)"),
            Formula::Or(gs) if gs.is_empty() => write!(f, "(F)"),
            Formula::And(gs) | Formula::Or(gs) => {
                let op = if matches!(self, Formula::And(_)) { " & " } else { " | " };
                let parts: Vec<String> = gs.iter().map(|g| g.to_string()).collect();
                write!(f, "({})", parts.join(op))
            }
            Formula::Exists(v, g) => write!(f, "E {v} {g}"),
            Formula::Forall(v, g) => write!(f, "A {v} {g}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Not,
    And,
    Or,
}

fn lex(text: &str) -> Result<Vec<Tok>, ConstituentError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' | ')' | ',' | '~' | '&' | '|' => {
                chars.next();
                out.push(match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '~' => Tok::Not,
                    '&' => Tok::And,
                    _ => Tok::Or,
                });
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut id = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        id.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Ident(id));
            }
            other => return Err(ConstituentError::Syntax(format!("unexpected `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Tok],
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn expect(&mut self, t: Tok) -> Result<(), ConstituentError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ConstituentError::Syntax(format!("expected {t:?} at token {}", self.pos)))
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ConstituentError> {
        let mut parts = vec![self.conjunction()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<Formula, ConstituentError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula, ConstituentError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                if let Some(Tok::Ident(id)) = self.peek() {
                    if (id == "T" || id == "F") && self.tokens.get(self.pos + 1) == Some(&Tok::RParen) {
                        let f = if id == "T" { Formula::And(vec![]) } else { Formula::Or(vec![]) };
                        self.pos += 2;
                        return Ok(f);
                    }
                }
                let f = self.disjunction()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Some(Tok::Ident(id)) => {
                let quantifier = (id == "E" || id == "A")
                    && matches!(self.tokens.get(self.pos + 1), Some(Tok::Ident(v)) if is_variable_name(v));
                if quantifier {
                    let Some(Tok::Ident(v)) = self.tokens.get(self.pos + 1).cloned() else {
                        unreachable!()
                    };
                    self.pos += 2;
                    let body = self.unary()?;
                    return Ok(if id == "E" {
                        Formula::Exists(v, Box::new(body))
                    } else {
                        Formula::Forall(v, Box::new(body))
                    });
                }
                if !is_predicate_name(&id) {
                    return Err(ConstituentError::Syntax(format!("`{id}` is not a predicate")));
                }
                self.pos += 1;
                self.expect(Tok::LParen)?;
                let mut args = Vec::new();
                loop {
                    match self.peek().cloned() {
                        Some(Tok::Ident(v)) if is_variable_name(&v) => {
                            self.pos += 1;
                            args.push(v);
                        }
                        _ => return Err(ConstituentError::Syntax(format!("variable expected in {id}(..)"))),
                    }
                    match self.peek() {
                        Some(Tok::Comma) => self.pos += 1,
                        _ => break,
                    }
                }
                self.expect(Tok::RParen)?;
                Ok(Formula::Atom(id, args))
            }
            other => Err(ConstituentError::Syntax(format!("unexpected {other:?}"))),
        }
    }
}

/// Maximal quantifier nesting.
pub fn quantifier_depth(phi: &Formula) -> usize {
    match phi {
        Formula::Atom(..) => 0,
        Formula::Not(g) => quantifier_depth(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().map(quantifier_depth).max().unwrap_or(0),
        Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + quantifier_depth(g),
    }
}

/// Satisfaction under an assignment of element ids to variables.
pub fn eval(
    m: &FiniteModel,
    phi: &Formula,
    assignment: &BTreeMap<String, String>,
) -> Result<bool, ConstituentError> {
    let mut env = Vec::new();
    for (v, e) in assignment {
        env.push((v.clone(), m.element(e)?));
    }
    eval_indexed(m, phi, &mut env)
}

/// Satisfaction with elements given by index; later bindings shadow earlier.
pub fn eval_indexed(
    m: &FiniteModel,
    phi: &Formula,
    env: &mut Vec<(String, usize)>,
) -> Result<bool, ConstituentError> {
    match phi {
        Formula::Atom(p, args) => {
            let pi = m
                .vocabulary
                .index_of(p)
                .ok_or_else(|| ConstituentError::UnknownPredicate(p.clone()))?;
            let arity = m.vocabulary.arity(pi);
            if args.len() != arity {
                return Err(ConstituentError::ArityMismatch {
                    predicate: p.clone(),
                    expected: arity,
                    found: args.len(),
                });
            }
            let mut tuple = Vec::with_capacity(arity);
            for a in args {
                let e = env
                    .iter()
                    .rev()
                    .find(|(v, _)| v == a)
                    .map(|(_, e)| *e)
                    .ok_or_else(|| ConstituentError::UnboundVariable(a.clone()))?;
                tuple.push(e);
            }
            Ok(m.holds(pi, &tuple))
        }
        Formula::Not(g) => Ok(!eval_indexed(m, g, env)?),
        Formula::And(gs) => {
            for g in gs {
                if !eval_indexed(m, g, env)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_indexed(m, g, env)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let want = matches!(phi, Formula::Exists(..));
            for e in 0..m.size() {
                env.push((v.clone(), e));
                let r = eval_indexed(m, g, env);
                env.pop();
                if r? == want {
                    return Ok(want);
                }
            }
            Ok(!want)
        }
    }
}
