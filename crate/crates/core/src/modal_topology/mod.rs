//! Kripke frames, the S4 correspondences, closure operators, and covering
//! axioms on finite posets.
//!
//! World sets are bitmasks, so frames have at most 64 worlds; the exhaustive
//! sweeps stay far below that.

mod covers;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

pub use covers::{
    cover_structure_of, fg_axiom_check, fg_axiom_check_bounded, AxiomOutcome, AxiomStatus, CoverStructure,
    FgReport,
};

pub type WorldSet = u64;

pub const MAX_WORLDS: usize = 64;
pub const KURATOWSKI_MAX_WORLDS: usize = 12;
pub const DEFAULT_VALUATION_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModalError {
    #[error("atom `{0}` has no valuation")]
    UnknownAtom(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("{0} valuations exceed the budget")]
    SearchBudgetExceeded(String),
    #[error("{worlds} worlds exceed the limit {limit}")]
    SizeBudgetExceeded { worlds: usize, limit: usize },
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("invalid cover structure: {0}")]
    InvalidCoverStructure(String),
    #[error("modal formula syntax: {0}")]
    Syntax(String),
    #[error("internal correspondence violated: {0}")]
    CorrespondenceViolated(String),
    #[error(transparent)]
    Relation(#[from] crate::relations::RelationError),
}

impl ModalError {
    pub fn name(&self) -> &'static str {
        match self {
            ModalError::UnknownAtom(_) => "UnknownAtom",
            ModalError::UnknownWorld(_) => "UnknownWorld",
            ModalError::SearchBudgetExceeded(_) => "SearchBudgetExceeded",
            ModalError::SizeBudgetExceeded { .. } => "SizeBudgetExceeded",
            ModalError::InvalidFrame(_) => "InvalidFrame",
            ModalError::InvalidCoverStructure(_) => "InvalidCoverStructure",
            ModalError::Syntax(_) => "SyntaxError",
            ModalError::CorrespondenceViolated(_) => "CorrespondenceViolated",
            ModalError::Relation(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KripkeFrame {
    worlds: Vec<String>,
    succ: Vec<WorldSet>,
}

impl KripkeFrame {
    pub fn new(worlds: Vec<String>, access: &[(usize, usize)]) -> Result<Self, ModalError> {
        let n = worlds.len();
        if n == 0 || n > MAX_WORLDS {
            return Err(ModalError::InvalidFrame(format!("{n} worlds")));
        }
        if worlds.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(ModalError::InvalidFrame("repeated world".into()));
        }
        let mut succ = vec![0; n];
        for &(a, b) in access {
            if a >= n || b >= n {
                return Err(ModalError::InvalidFrame(format!("edge ({a},{b}) leaves the frame")));
            }
            succ[a] |= 1 << b;
        }
        Ok(KripkeFrame { worlds, succ })
    }

    /// Frame number `code` on worlds `1..=n`: bit `i*n + j` is the edge `i → j`.
    pub fn from_code(n: usize, code: u64) -> Self {
        let worlds = (1..=n).map(|i| i.to_string()).collect();
        let succ = (0..n).map(|i| (code >> (i * n)) & full(n)).collect();
        KripkeFrame { worlds, succ }
    }

    /// `{"worlds":["1","2"],"access":[["1","2"]]}`.
    pub fn from_json(value: &Value) -> Result<Self, ModalError> {
        let bad = |m: &str| ModalError::InvalidFrame(m.to_string());
        let worlds: Vec<String> = value
            .get("worlds")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing worlds"))?
            .iter()
            .map(|w| w.as_str().map(str::to_string).ok_or_else(|| bad("world ids are strings")))
            .collect::<Result<_, _>>()?;
        let mut edges = Vec::new();
        for e in value.get("access").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[]) {
            let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("edges are pairs"))?;
            let idx = |v: &Value| -> Result<usize, ModalError> {
                let s = v.as_str().ok_or_else(|| bad("world ids are strings"))?;
                worlds.iter().position(|w| w == s).ok_or_else(|| ModalError::UnknownWorld(s.to_string()))
            };
            edges.push((idx(&pair[0])?, idx(&pair[1])?));
        }
        KripkeFrame::new(worlds, &edges)
    }

    pub fn to_json(&self) -> Value {
        let mut access = Vec::new();
        for (i, &s) in self.succ.iter().enumerate() {
            for j in 0..self.size() {
                if s >> j & 1 == 1 {
                    access.push(json!([self.worlds[i], self.worlds[j]]));
                }
            }
        }
        json!({"worlds": self.worlds, "access": access})
    }

    pub fn size(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn world(&self, id: &str) -> Result<usize, ModalError> {
        self.worlds
            .iter()
            .position(|w| w == id)
            .ok_or_else(|| ModalError::UnknownWorld(id.to_string()))
    }

    pub fn successors(&self, w: usize) -> WorldSet {
        self.succ[w]
    }

    pub fn accesses(&self, a: usize, b: usize) -> bool {
        self.succ[a] >> b & 1 == 1
    }

    pub fn all(&self) -> WorldSet {
        full(self.size())
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.size()).all(|w| self.accesses(w, w))
    }

    pub fn is_transitive(&self) -> bool {
        (0..self.size()).all(|a| {
            let two_steps = members(self.succ[a]).fold(0, |acc, b| acc | self.succ[b]);
            two_steps & !self.succ[a] == 0
        })
    }

    /// The frame with every loop added.
    pub fn reflexive_closure(&self) -> KripkeFrame {
        KripkeFrame {
            worlds: self.worlds.clone(),
            succ: self.succ.iter().enumerate().map(|(i, s)| s | 1 << i).collect(),
        }
    }

    pub fn set_names(&self, s: WorldSet) -> Vec<String> {
        members(s).map(|w| self.worlds[w].clone()).collect()
    }

    pub fn parse_set(&self, ids: &[&str]) -> Result<WorldSet, ModalError> {
        ids.iter().try_fold(0, |acc, id| Ok(acc | 1 << self.world(id)?))
    }
}

fn full(n: usize) -> WorldSet {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn members(s: WorldSet) -> impl Iterator<Item = usize> {
    (0..64).filter(move |i| s >> i & 1 == 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ModalFormula {
    Atom(String),
    Not(Box<ModalFormula>),
    And(Box<ModalFormula>, Box<ModalFormula>),
    Or(Box<ModalFormula>, Box<ModalFormula>),
    Implies(Box<ModalFormula>, Box<ModalFormula>),
    Box(Box<ModalFormula>),
    Dia(Box<ModalFormula>),
}

impl ModalFormula {
    pub fn atom(p: &str) -> Self {
        ModalFormula::Atom(p.into())
    }

    pub fn not(f: ModalFormula) -> Self {
        ModalFormula::Not(Box::new(f))
    }

    pub fn boxed(f: ModalFormula) -> Self {
        ModalFormula::Box(Box::new(f))
    }

    pub fn dia(f: ModalFormula) -> Self {
        ModalFormula::Dia(Box::new(f))
    }

    pub fn implies(a: ModalFormula, b: ModalFormula) -> Self {
        ModalFormula::Implies(Box::new(a), Box::new(b))
    }

    /// `box`/`dia` prefixes, `~`, `&`, `|`, and right-associative `->`, in
    /// increasing order of looseness.
    pub fn parse(text: &str) -> Result<Self, ModalError> {
        let tokens = lex(text)?;
        let mut p = MParser { tokens: &tokens, pos: 0 };
        let f = p.implication()?;
        if p.pos != tokens.len() {
            return Err(ModalError::Syntax(format!("trailing input in `{text}`")));
        }
        Ok(f)
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            ModalFormula::Atom(p) => {
                out.insert(p.clone());
            }
            ModalFormula::Not(g) | ModalFormula::Box(g) | ModalFormula::Dia(g) => g.collect_atoms(out),
            ModalFormula::And(a, b) | ModalFormula::Or(a, b) | ModalFormula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}

impl fmt::Display for ModalFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModalFormula::Atom(p) => f.write_str(p),
            ModalFormula::Not(g) => write!(f, "~{g}"),
            ModalFormula::Box(g) => write!(f, "box {g}"),
            ModalFormula::Dia(g) => write!(f, "dia {g}"),
            ModalFormula::And(a, b) => write!(f, "({a} & {b})"),
            ModalFormula::Or(a, b) => write!(f, "({a} | {b})"),
            ModalFormula::Implies(a, b) => write!(f, "({a} -> {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum MTok {
    Ident(String),
    LParen,
    RParen,
    Not,
    And,
    Or,
    Arrow,
}

fn lex(text: &str) -> Result<Vec<MTok>, ModalError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '(' => out.push(MTok::LParen),
            ')' => out.push(MTok::RParen),
            '~' => out.push(MTok::Not),
            '&' => out.push(MTok::And),
            '|' => out.push(MTok::Or),
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                out.push(MTok::Arrow);
            }
            c if c.is_ascii_alphabetic() => {
                let mut id = c.to_string();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        id.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(MTok::Ident(id));
            }
            other => return Err(ModalError::Syntax(format!("unexpected `{other}`"))),
        }
    }
    Ok(out)
}

struct MParser<'a> {
    tokens: &'a [MTok],
    pos: usize,
}

impl MParser<'_> {
    fn eat(&mut self, t: &MTok) -> bool {
        if self.tokens.get(self.pos) == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<ModalFormula, ModalError> {
        let lhs = self.disjunction()?;
        if self.eat(&MTok::Arrow) {
            Ok(ModalFormula::implies(lhs, self.implication()?))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<ModalFormula, ModalError> {
        let mut f = self.conjunction()?;
        while self.eat(&MTok::Or) {
            f = ModalFormula::Or(Box::new(f), Box::new(self.conjunction()?));
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<ModalFormula, ModalError> {
        let mut f = self.unary()?;
        while self.eat(&MTok::And) {
            f = ModalFormula::And(Box::new(f), Box::new(self.unary()?));
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<ModalFormula, ModalError> {
        match self.tokens.get(self.pos).cloned() {
            Some(MTok::Not) => {
                self.pos += 1;
                Ok(ModalFormula::not(self.unary()?))
            }
            Some(MTok::LParen) => {
                self.pos += 1;
                let f = self.implication()?;
                if !self.eat(&MTok::RParen) {
                    return Err(ModalError::Syntax("missing `)`".into()));
                }
                Ok(f)
            }
            Some(MTok::Ident(id)) => {
                self.pos += 1;
                match id.as_str() {
                    "box" => Ok(ModalFormula::boxed(self.unary()?)),
                    "dia" => Ok(ModalFormula::dia(self.unary()?)),
                    _ => Ok(ModalFormula::Atom(id)),
                }
            }
            other => Err(ModalError::Syntax(format!("unexpected {other:?}"))),
        }
    }
}

/// The set of worlds where `phi` holds.
pub fn extension(
    f: &KripkeFrame,
    val: &BTreeMap<String, WorldSet>,
    phi: &ModalFormula,
) -> Result<WorldSet, ModalError> {
    let all = f.all();
    Ok(match phi {
        ModalFormula::Atom(p) => *val.get(p).ok_or_else(|| ModalError::UnknownAtom(p.clone()))? & all,
        ModalFormula::Not(g) => !extension(f, val, g)? & all,
        ModalFormula::And(a, b) => extension(f, val, a)? & extension(f, val, b)?,
        ModalFormula::Or(a, b) => extension(f, val, a)? | extension(f, val, b)?,
        ModalFormula::Implies(a, b) => (!extension(f, val, a)? | extension(f, val, b)?) & all,
        ModalFormula::Box(g) => {
            let e = extension(f, val, g)?;
            (0..f.size()).filter(|&w| f.succ[w] & !e == 0).fold(0, |s, w| s | 1 << w)
        }
        ModalFormula::Dia(g) => {
            let e = extension(f, val, g)?;
            (0..f.size()).filter(|&w| f.succ[w] & e != 0).fold(0, |s, w| s | 1 << w)
        }
    })
}

pub fn modal_eval(
    f: &KripkeFrame,
    val: &BTreeMap<String, WorldSet>,
    w: usize,
    phi: &ModalFormula,
) -> Result<bool, ModalError> {
    if w >= f.size() {
        return Err(ModalError::UnknownWorld(w.to_string()));
    }
    Ok(extension(f, val, phi)? >> w & 1 == 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Counterexample {
        valuation: BTreeMap<String, WorldSet>,
        world: usize,
    },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }

    pub fn to_json(&self, f: &KripkeFrame) -> Value {
        match self {
            Validity::Valid => json!({"valid": true}),
            Validity::Counterexample { valuation, world } => {
                let val: BTreeMap<&String, Vec<String>> =
                    valuation.iter().map(|(p, s)| (p, f.set_names(*s))).collect();
                json!({"valid": false, "counterexample": {"valuation": val, "world": f.worlds[*world]}})
            }
        }
    }
}

pub fn valid_on_frame(f: &KripkeFrame, phi: &ModalFormula) -> Result<Validity, ModalError> {
    valid_on_frame_bounded(f, phi, DEFAULT_VALUATION_BUDGET)
}

/// Exhaustive over valuations in increasing code order, where atom `j` (in
/// sorted order) takes bits `j*n .. (j+1)*n` of the code; the first failing
/// world of the first failing valuation is reported.
pub fn valid_on_frame_bounded(f: &KripkeFrame, phi: &ModalFormula, budget: u64) -> Result<Validity, ModalError> {
    let atoms: Vec<String> = phi.atoms().into_iter().collect();
    let n = f.size();
    let bits = atoms.len() * n;
    if bits >= 64 || (1u64 << bits) > budget {
        return Err(ModalError::SearchBudgetExceeded(format!("2^{bits}")));
    }
    let all = f.all();
    for code in 0u64..1 << bits {
        let val: BTreeMap<String, WorldSet> = atoms
            .iter()
            .enumerate()
            .map(|(j, p)| (p.clone(), (code >> (j * n)) & all))
            .collect();
        let ext = extension(f, &val, phi)?;
        if ext != all {
            let world = (!ext & all).trailing_zeros() as usize;
            return Ok(Validity::Counterexample { valuation: val, world });
        }
    }
    Ok(Validity::Valid)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct S4Report {
    pub is_reflexive: bool,
    pub is_transitive: bool,
    pub t_axiom_valid: bool,
    pub four_axiom_valid: bool,
}

pub fn t_axiom() -> ModalFormula {
    ModalFormula::parse("box p -> p").unwrap()
}

pub fn four_axiom() -> ModalFormula {
    ModalFormula::parse("dia dia p -> dia p").unwrap()
}

/// Reflexivity against `□p→p`, transitivity against `◇◇p→◇p`.
pub fn s4_correspondence(f: &KripkeFrame) -> Result<S4Report, ModalError> {
    let report = S4Report {
        is_reflexive: f.is_reflexive(),
        is_transitive: f.is_transitive(),
        t_axiom_valid: valid_on_frame(f, &t_axiom())?.is_valid(),
        four_axiom_valid: valid_on_frame(f, &four_axiom())?.is_valid(),
    };
    if report.is_reflexive != report.t_axiom_valid || report.is_transitive != report.four_axiom_valid {
        return Err(ModalError::CorrespondenceViolated(format!("{report:?}")));
    }
    Ok(report)
}

/// `A ∪ {w : w sees some a ∈ A}`.
pub fn closure(f: &KripkeFrame, a: WorldSet) -> WorldSet {
    (0..f.size()).filter(|&w| f.succ[w] & a != 0).fold(a & f.all(), |s, w| s | 1 << w)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KuratowskiReport {
    pub empty_set: bool,
    pub extensive: bool,
    pub additive: bool,
    pub idempotent: bool,
    pub transitive: bool,
    /// Transitivity of access together with the identity.
    pub transitive_with_identity: bool,
    /// First subset (in code order) with `C²(A) ≠ C(A)`.
    pub idempotency_witness: Option<Vec<String>>,
}

impl KuratowskiReport {
    /// The literal pairing of idempotency with transitivity of access.
    pub fn idempotency_tracks_transitivity(&self) -> bool {
        self.idempotent == self.transitive
    }
}

/// All four laws over all subsets. Idempotency is asserted to coincide with
/// transitivity of access plus identity, which is what the closure computes.
pub fn kuratowski_check(f: &KripkeFrame) -> Result<KuratowskiReport, ModalError> {
    let n = f.size();
    if n > KURATOWSKI_MAX_WORLDS {
        return Err(ModalError::SizeBudgetExceeded {
            worlds: n,
            limit: KURATOWSKI_MAX_WORLDS,
        });
    }
    let c: Vec<WorldSet> = (0..1u64 << n).map(|a| closure(f, a)).collect();
    let extensive = (0..1u64 << n).all(|a| a & !c[a as usize] == 0);
    let additive = (0..1u64 << n).all(|a| (0..1u64 << n).all(|b| c[(a | b) as usize] == c[a as usize] | c[b as usize]));
    let witness = (0..1u64 << n).find(|&a| c[c[a as usize] as usize] != c[a as usize]);
    let report = KuratowskiReport {
        empty_set: c[0] == 0,
        extensive,
        additive,
        idempotent: witness.is_none(),
        transitive: f.is_transitive(),
        transitive_with_identity: f.reflexive_closure().is_transitive(),
        idempotency_witness: witness.map(|a| f.set_names(a)),
    };
    if report.idempotent != report.transitive_with_identity {
        return Err(ModalError::CorrespondenceViolated(format!("{report:?}")));
    }
    Ok(report)
}
