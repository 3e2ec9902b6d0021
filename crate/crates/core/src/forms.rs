//! Alphabets, forms and formal languages.
//!
//! A [`Form`] is a finite sequence of symbols drawn from a declared
//! [`Alphabet`]. Symbols are opaque tokens; a token may span several
//! characters (the decimal prefix `0.` is one symbol). Forms are immutable
//! and compared structurally.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("alphabet `{0}` has no symbols")]
    EmptyAlphabet(String),
    #[error("alphabet `{alphabet}` lists symbol `{symbol}` twice")]
    DuplicateSymbol { alphabet: String, symbol: String },
    #[error("symbol `{symbol}` is not in alphabet `{alphabet}`")]
    UnknownSymbol { alphabet: String, symbol: String },
    #[error("`{text}` is not well formed in language `{language}`")]
    IllFormed { language: String, text: String },
    #[error("no alphabet registered under `{0}`")]
    UnknownAlphabet(String),
    #[error("cannot combine forms over `{0}` and `{1}`")]
    AlphabetMismatch(String, String),
}

impl FormError {
    pub fn name(&self) -> &'static str {
        match self {
            FormError::EmptyAlphabet(_) => "EmptyAlphabet",
            FormError::DuplicateSymbol { .. } => "DuplicateSymbol",
            FormError::UnknownSymbol { .. } => "UnknownSymbol",
            FormError::IllFormed { .. } => "IllFormed",
            FormError::UnknownAlphabet(_) => "UnknownAlphabet",
            FormError::AlphabetMismatch(..) => "AlphabetMismatch",
        }
    }
}

/// An ordered, finite list of distinct symbols.
#[derive(Debug)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
    index: HashMap<String, u16>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        symbols: impl IntoIterator<Item = S>,
    ) -> Result<Self, FormError> {
        let name = name.into();
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(FormError::EmptyAlphabet(name));
        }
        assert!(symbols.len() <= u16::MAX as usize, "alphabet too large");
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i as u16).is_some() {
                return Err(FormError::DuplicateSymbol {
                    alphabet: name,
                    symbol: s.clone(),
                });
            }
        }
        Ok(Alphabet {
            name,
            symbols,
            index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    pub fn position(&self, symbol: &str) -> Option<u16> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, position: u16) -> &str {
        &self.symbols[position as usize]
    }

    /// Splits `text` into symbols by greedy longest match.
    pub fn tokenize(&self, text: &str) -> Result<Vec<u16>, FormError> {
        let longest = self.symbols.iter().map(String::len).max().unwrap_or(1);
        let mut out = Vec::new();
        let mut rest = text;
        'outer: while !rest.is_empty() {
            let mut end = longest.min(rest.len());
            while end > 0 {
                if rest.is_char_boundary(end) {
                    if let Some(&p) = self.index.get(&rest[..end]) {
                        out.push(p);
                        rest = &rest[end..];
                        continue 'outer;
                    }
                }
                end -= 1;
            }
            let bad = rest.chars().next().map(String::from).unwrap_or_default();
            return Err(FormError::UnknownSymbol {
                alphabet: self.name.clone(),
                symbol: bad,
            });
        }
        Ok(out)
    }
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.symbols == other.symbols
    }
}

impl Eq for Alphabet {}

/// A finite token sequence over an alphabet.
#[derive(Clone)]
pub struct Form {
    alphabet: Arc<Alphabet>,
    tokens: Vec<u16>,
}

impl Form {
    /// Builds a form from positions already known to lie in `alphabet`.
    pub(crate) fn from_positions(alphabet: Arc<Alphabet>, tokens: Vec<u16>) -> Self {
        debug_assert!(tokens
            .iter()
            .all(|&t| (t as usize) < alphabet.symbols.len()));
        Form { alphabet, tokens }
    }

    /// Builds a form from symbol names, checking alphabet membership only.
    pub fn from_symbols<S: AsRef<str>>(
        alphabet: &Arc<Alphabet>,
        symbols: &[S],
    ) -> Result<Self, FormError> {
        let tokens = symbols
            .iter()
            .map(|s| {
                alphabet
                    .position(s.as_ref())
                    .ok_or_else(|| FormError::UnknownSymbol {
                        alphabet: alphabet.name.clone(),
                        symbol: s.as_ref().to_string(),
                    })
            })
            .collect::<Result<_, _>>()?;
        Ok(Form::from_positions(alphabet.clone(), tokens))
    }

    /// Tokenizes `text` over `alphabet` without a well-formedness check.
    pub fn from_text(alphabet: &Arc<Alphabet>, text: &str) -> Result<Self, FormError> {
        let tokens = alphabet.tokenize(text)?;
        Ok(Form::from_positions(alphabet.clone(), tokens))
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn positions(&self) -> &[u16] {
        &self.tokens
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> + '_ {
        self.tokens.iter().map(|&t| self.alphabet.symbol(t))
    }

    /// The concatenated symbol text.
    pub fn text(&self) -> String {
        self.tokens().collect()
    }

    /// The set of distinct symbols occurring in the form.
    pub fn footprint(&self) -> BTreeSet<&str> {
        self.tokens().collect()
    }

    pub fn mentions(&self, symbol: &str) -> bool {
        match self.alphabet.position(symbol) {
            Some(p) => self.tokens.contains(&p),
            None => false,
        }
    }

    pub fn concat(&self, other: &Form) -> Result<Form, FormError> {
        if self.alphabet != other.alphabet {
            return Err(FormError::AlphabetMismatch(
                self.alphabet.name.clone(),
                other.alphabet.name.clone(),
            ));
        }
        let mut tokens = self.tokens.clone();
        tokens.extend_from_slice(&other.tokens);
        Ok(Form::from_positions(self.alphabet.clone(), tokens))
    }

    /// Appends one symbol position of the same alphabet.
    pub(crate) fn pushed(&self, position: u16) -> Form {
        let mut tokens = Vec::with_capacity(self.tokens.len() + 1);
        tokens.extend_from_slice(&self.tokens);
        tokens.push(position);
        Form::from_positions(self.alphabet.clone(), tokens)
    }

    pub fn to_json(&self) -> FormJson {
        FormJson {
            alphabet: self.alphabet.name.clone(),
            tokens: self.tokens().map(str::to_string).collect(),
        }
    }
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
            && (Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet)
    }
}

impl Eq for Form {}

impl Hash for Form {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.alphabet.name.hash(state);
        self.tokens.hash(state);
    }
}

impl PartialOrd for Form {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by alphabet name, then by token positions (registration order).
impl Ord for Form {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.alphabet
            .name
            .cmp(&other.alphabet.name)
            .then_with(|| self.tokens.cmp(&other.tokens))
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.tokens() {
            f.write_str(t)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form({}:{:?})", self.alphabet.name, self.text())
    }
}

/// Wire encoding `{ "alphabet": "<name>", "tokens": [...] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormJson {
    pub alphabet: String,
    pub tokens: Vec<String>,
}

pub type WellFormed = Arc<dyn Fn(&[&str]) -> bool + Send + Sync>;

/// An alphabet with a total well-formedness decision procedure.
#[derive(Clone)]
pub struct FormalLanguage {
    name: String,
    alphabet: Arc<Alphabet>,
    well_formed: WellFormed,
}

impl FormalLanguage {
    pub fn new(
        name: impl Into<String>,
        alphabet: Arc<Alphabet>,
        well_formed: impl Fn(&[&str]) -> bool + Send + Sync + 'static,
    ) -> Self {
        FormalLanguage {
            name: name.into(),
            alphabet,
            well_formed: Arc::new(well_formed),
        }
    }

    /// Every symbol string is admitted.
    pub fn free(name: impl Into<String>, alphabet: Arc<Alphabet>) -> Self {
        FormalLanguage::new(name, alphabet, |_| true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn is_well_formed(&self, tokens: &[&str]) -> bool {
        (self.well_formed)(tokens)
    }

    pub fn admits(&self, form: &Form) -> bool {
        **form.alphabet() == *self.alphabet && {
            let toks: Vec<&str> = form.tokens().collect();
            self.is_well_formed(&toks)
        }
    }

    /// Tokenizes by longest match and checks well-formedness.
    pub fn parse(&self, text: &str) -> Result<Form, FormError> {
        let form = Form::from_text(&self.alphabet, text)?;
        self.check(form)
    }

    pub fn check(&self, form: Form) -> Result<Form, FormError> {
        if self.admits(&form) {
            Ok(form)
        } else {
            Err(FormError::IllFormed {
                language: self.name.clone(),
                text: form.text(),
            })
        }
    }

    pub fn from_json(&self, json: &FormJson) -> Result<Form, FormError> {
        if json.alphabet != self.alphabet.name {
            return Err(FormError::AlphabetMismatch(
                json.alphabet.clone(),
                self.alphabet.name.clone(),
            ));
        }
        make_form(self, &json.tokens)
    }
}

impl fmt::Debug for FormalLanguage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormalLanguage")
            .field("name", &self.name)
            .field("alphabet", &self.alphabet.name)
            .finish()
    }
}

/// Builds a form of `language` from symbol names.
pub fn make_form<S: AsRef<str>>(language: &FormalLanguage, tokens: &[S]) -> Result<Form, FormError> {
    let form = Form::from_symbols(&language.alphabet, tokens)?;
    language.check(form)
}

pub fn footprint(form: &Form) -> BTreeSet<&str> {
    form.footprint()
}

/// Alphabets registered by name.
#[derive(Debug, Clone, Default)]
pub struct AlphabetRegistry {
    alphabets: HashMap<String, Arc<Alphabet>>,
}

impl AlphabetRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, alphabet: Arc<Alphabet>) {
        self.alphabets.insert(alphabet.name.clone(), alphabet);
    }

    pub fn get(&self, name: &str) -> Result<&Arc<Alphabet>, FormError> {
        self.alphabets
            .get(name)
            .ok_or_else(|| FormError::UnknownAlphabet(name.to_string()))
    }

    /// Reads `{ "<name>": ["sym", ...], ... }`.
    pub fn extend_from_json(&mut self, value: &serde_json::Value) -> Result<(), FormError> {
        let map: HashMap<String, Vec<String>> = serde_json::from_value(value.clone())
            .map_err(|_| FormError::UnknownAlphabet(value.to_string()))?;
        for (name, symbols) in map {
            self.register(Arc::new(Alphabet::new(name, symbols)?));
        }
        Ok(())
    }

    /// Decodes a form encoding against the registered alphabet (no grammar check).
    pub fn decode(&self, json: &FormJson) -> Result<Form, FormError> {
        Form::from_symbols(self.get(&json.alphabet)?, &json.tokens)
    }
}
