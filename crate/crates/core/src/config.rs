//! Budgets, user alphabets and relations, and named selection rules, read
//! from a JSON configuration.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::constituents::{DEFAULT_ENUMERATION_BUDGET, DEFAULT_MAX_DEPTH};
use crate::forms::{AlphabetRegistry, FormError, FormJson, FormalLanguage};
use crate::foundation::{constant_digit_rule, SelectionRule};
use crate::modal_topology::DEFAULT_VALUATION_BUDGET;
use crate::reals::{from_rational, sqrt2_minus_one, RealError};
use crate::relations::{cone, ExtensionRelation, RelationError, DEFAULT_NODE_BUDGET};
use crate::systems::{
    builtin_alphabets, decimal_system, dyadic_system, naturals_system, rational_interval_system,
    rational_shrink_system, FormalSystem, Rational,
};

pub const NODE_BUDGET_ENV: &str = "SYNTH_NODE_BUDGET";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("configuration: {0}")]
    Parse(String),
    #[error("no system named `{0}`")]
    UnknownSystem(String),
    #[error("no rule named `{0}`")]
    UnknownRule(String),
    #[error("invalid relation `{0}`: {1}")]
    InvalidRelation(String, String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Real(#[from] RealError),
}

impl ConfigError {
    pub fn name(&self) -> &'static str {
        match self {
            ConfigError::Parse(_) => "ConfigError",
            ConfigError::UnknownSystem(_) => "UnknownSystem",
            ConfigError::UnknownRule(_) => "UnknownRule",
            ConfigError::InvalidRelation(..) => "InvalidRelation",
            ConfigError::Form(e) => e.name(),
            ConfigError::Relation(e) => e.name(),
            ConfigError::Real(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub node_budget: usize,
    pub enumeration_budget: usize,
    pub max_depth: usize,
    pub valuation_budget: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            node_budget: DEFAULT_NODE_BUDGET,
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET,
            max_depth: DEFAULT_MAX_DEPTH,
            valuation_budget: DEFAULT_VALUATION_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RelationSpec {
    /// A fresh apex related to each member.
    Cone { apex: String, members: Vec<FormJson> },
    /// A finite successor table over a registered alphabet.
    Table {
        name: String,
        alphabet: String,
        root: String,
        successors: BTreeMap<String, Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RuleSpec {
    ConstantDigit { digit: u8 },
    TargetRational { p: i64, q: i64 },
    Builtin { name: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub budgets: Budgets,
    pub alphabets: BTreeMap<String, Vec<String>>,
    pub relations: Vec<RelationSpec>,
    pub rules: BTreeMap<String, RuleSpec>,
}

impl Config {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Applies `SYNTH_NODE_BUDGET` when set.
    pub fn with_env(mut self) -> Result<Self, ConfigError> {
        if let Ok(v) = std::env::var(NODE_BUDGET_ENV) {
            self.budgets.node_budget = v
                .trim()
                .parse()
                .map_err(|_| ConfigError::Parse(format!("{NODE_BUDGET_ENV}={v} is not a count")))?;
        }
        Ok(self)
    }
}

/// Systems and rules by name: the built-ins, under both their short names and
/// their relation names, plus whatever the config adds.
pub struct Registry {
    pub budgets: Budgets,
    pub alphabets: AlphabetRegistry,
    systems: HashMap<String, FormalSystem>,
    rules: BTreeMap<String, RuleSpec>,
}

impl Registry {
    pub fn new(config: &Config) -> Result<Self, ConfigError> {
        let mut alphabets = AlphabetRegistry::new();
        for a in builtin_alphabets() {
            alphabets.register(a);
        }
        alphabets.extend_from_json(&serde_json::to_value(&config.alphabets).expect("plain map"))?;
        let mut systems = HashMap::new();
        for (name, s) in [
            ("naturals", naturals_system()),
            ("decimal", decimal_system()),
            ("rational", rational_interval_system()),
            ("rational-shrink", rational_shrink_system()),
            ("dyadic", dyadic_system()),
        ] {
            systems.insert(s.name.clone(), s.clone());
            systems.insert(name.to_string(), s);
        }
        for spec in &config.relations {
            let (name, system) = build_relation(&alphabets, spec)?;
            systems.insert(name, system);
        }
        Ok(Registry {
            budgets: config.budgets.clone(),
            alphabets,
            systems,
            rules: config.rules.clone(),
        })
    }

    pub fn system(&self, name: &str) -> Result<&FormalSystem, ConfigError> {
        self.systems.get(name).ok_or_else(|| ConfigError::UnknownSystem(name.to_string()))
    }

    pub fn system_names(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.systems.keys().map(String::as_str).collect();
        v.sort();
        v
    }

    /// A configured rule, or a built-in: `successor`, `sqrt2m1`, `digit-N`.
    pub fn rule(&self, name: &str) -> Result<SelectionRule, ConfigError> {
        let spec = match self.rules.get(name) {
            Some(s) => s.clone(),
            None => match name {
                "successor" | "sqrt2m1" | "sqrt2" => RuleSpec::Builtin { name: name.into() },
                _ => match name.strip_prefix("digit-").and_then(|d| d.parse().ok()) {
                    Some(digit) if digit < 10 => RuleSpec::ConstantDigit { digit },
                    _ => return Err(ConfigError::UnknownRule(name.to_string())),
                },
            },
        };
        build_rule(&spec)
    }
}

pub fn build_rule(spec: &RuleSpec) -> Result<SelectionRule, ConfigError> {
    Ok(match spec {
        RuleSpec::ConstantDigit { digit } if *digit < 10 => constant_digit_rule(&decimal_system(), *digit),
        RuleSpec::ConstantDigit { digit } => return Err(ConfigError::Parse(format!("digit {digit} out of range"))),
        RuleSpec::TargetRational { p, q } => {
            let r = Rational::new(*p, *q).map_err(|e| ConfigError::Parse(e.to_string()))?;
            from_rational(&r)?.rule
        }
        RuleSpec::Builtin { name } => match name.as_str() {
            "successor" => SelectionRule::first_successor("successor", &naturals_system()),
            "sqrt2m1" | "sqrt2" => sqrt2_minus_one().rule,
            _ => return Err(ConfigError::UnknownRule(name.clone())),
        },
    })
}

fn build_relation(alphabets: &AlphabetRegistry, spec: &RelationSpec) -> Result<(String, FormalSystem), ConfigError> {
    match spec {
        RelationSpec::Cone { apex, members } => {
            let members = members
                .iter()
                .map(|m| alphabets.decode(m))
                .collect::<Result<Vec<_>, _>>()?;
            let (root, relation) = cone(apex, &members)?;
            let language = FormalLanguage::free(format!("cone:{apex}"), root.alphabet().clone());
            Ok((apex.clone(), FormalSystem::new(apex.clone(), language, relation, root)))
        }
        RelationSpec::Table {
            name,
            alphabet,
            root,
            successors,
        } => {
            let a: Arc<_> = alphabets.get(alphabet)?.clone();
            let language = FormalLanguage::free(alphabet.clone(), a);
            let mut table = HashMap::new();
            for (from, tos) in successors {
                let f = language.parse(from)?;
                if f.mentions(name) {
                    return Err(ConfigError::InvalidRelation(name.clone(), format!("`{from}` uses the relation's own symbol")));
                }
                let gs = tos.iter().map(|t| language.parse(t)).collect::<Result<Vec<_>, _>>()?;
                table.insert(f, gs);
            }
            let root = language.parse(root)?;
            let relation = ExtensionRelation::from_successors(name.clone(), table);
            Ok((name.clone(), FormalSystem::new(name.clone(), language, relation, root)))
        }
    }
}
