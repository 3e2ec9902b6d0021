//! `synth`: batch front end over JSON. Results go to stdout as one JSON
//! document; domain errors as `{"error": Name, "message": ...}` with exit 1.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use synth_core::config::{Config, Registry};
use synth_core::constituents::{constituent_chain_bounded, constituent_of_bounded, enumerate_constituents, FiniteModel, Vocabulary};
use synth_core::forms::Form;
use synth_core::foundation::{canonical_cover, chain_prefix, refines, FoundationHandle};
use synth_core::modal_topology::{
    cover_structure_of, extension, fg_axiom_check, kuratowski_check, s4_correspondence, valid_on_frame_bounded,
    CoverStructure, KripkeFrame, ModalError, ModalFormula, WorldSet,
};
use synth_core::reals::{compare, locate, ComputableReal};
use synth_core::relations::{diagonal_concept, enumerate_paths, related_star, stratified_apply, ExtensionRelation};
use synth_core::systems::{FormalSystem, Rational};

#[derive(Parser)]
#[command(name = "synth", version, about = "Forms, extension relations and the spaces they generate")]
struct Cli {
    /// JSON configuration: budgets, alphabets, relations, rules.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Is `to` reachable from `from` in 1 to `max-depth` steps?
    Star {
        #[arg(long)]
        system: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        max_depth: usize,
    },
    /// All paths of exactly `steps` steps from a form.
    Paths {
        #[arg(long)]
        system: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        steps: usize,
    },
    /// The canonical cover at a depth below a base form.
    Cover {
        #[command(flatten)]
        at: SystemAt,
        #[arg(long)]
        depth: usize,
    },
    /// Does the cover at `fine` refine the cover at `coarse`?
    Refine {
        #[command(flatten)]
        at: SystemAt,
        #[arg(long)]
        fine: usize,
        #[arg(long)]
        coarse: usize,
    },
    /// The chain prefix of a selection rule.
    Chain {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        depth: usize,
    },
    #[command(subcommand)]
    Real(RealCommand),
    #[command(subcommand)]
    Constituent(ConstituentCommand),
    #[command(subcommand)]
    Modal(ModalCommand),
    /// Reflexivity and transitivity against the T and 4 axioms.
    S4 {
        #[command(flatten)]
        frames: FrameSource,
    },
    /// The closure laws of `A ∪ ◇⁻¹A` over all subsets.
    Kuratowski {
        #[command(flatten)]
        frames: FrameSource,
    },
    #[command(subcommand)]
    Ftop(FtopCommand),
    #[command(subcommand)]
    Russell(RussellCommand),
}

#[derive(Args)]
struct SystemAt {
    #[arg(long)]
    system: String,
    /// Defaults to the system's root.
    #[arg(long)]
    base: Option<String>,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FrameSource {
    #[arg(long, value_name = "FILE")]
    frame: Option<PathBuf>,
    /// Sweep every frame on this many worlds instead.
    #[arg(long)]
    worlds: Option<usize>,
}

#[derive(Subcommand)]
enum RealCommand {
    /// An interval of width at most 2^-precision around the real.
    Locate {
        #[command(flatten)]
        real: RealArg,
        #[arg(long)]
        precision: usize,
    },
    /// Less, Greater, or IndistinguishableAt(precision).
    Compare {
        /// A built-in name or a rational `p/q` in (-1, 1).
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long)]
        precision: usize,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RealArg {
    /// `sqrt2m1`, or a configured rule over the dyadic system.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    rational: Option<String>,
}

#[derive(Subcommand)]
enum ConstituentCommand {
    /// The depth-d constituent of a tuple of elements.
    Of {
        #[command(flatten)]
        model: ModelArg,
        /// Comma-separated element ids.
        #[arg(long, value_delimiter = ',', required = true)]
        tuple: Vec<String>,
        #[arg(long)]
        depth: usize,
    },
    /// All constituents of a vocabulary at a width and depth.
    Enum {
        /// e.g. `P/1,R/2`.
        #[arg(long)]
        vocab: String,
        #[arg(long, default_value_t = 1)]
        width: usize,
        #[arg(long)]
        depth: usize,
    },
    /// C^0(a), …, C^d(a).
    Chain {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        element: String,
        #[arg(long)]
        depth: usize,
    },
}

#[derive(Args)]
struct ModelArg {
    #[arg(long, value_name = "FILE")]
    model: PathBuf,
    /// Fixes arities; otherwise they are read off the model.
    #[arg(long)]
    vocab: Option<String>,
}

#[derive(Subcommand)]
enum ModalCommand {
    /// Truth of a formula at a world, and its extension.
    Eval {
        #[arg(long, value_name = "FILE")]
        frame: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
        #[arg(long)]
        world: String,
        /// `atom=w1,w2`, repeatable; atoms not given are empty.
        #[arg(long = "val")]
        valuation: Vec<String>,
    },
    /// Validity on a frame, with the first counterexample.
    Valid {
        #[arg(long, value_name = "FILE")]
        frame: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        formula: String,
    },
}

#[derive(Subcommand)]
enum FtopCommand {
    /// The four covering axioms on a cover structure.
    #[command(group = clap::ArgGroup::new("source").required(true).args(["covers", "system"]))]
    Check {
        #[arg(long, value_name = "FILE")]
        covers: Option<PathBuf>,
        /// Build the structure from a system's canonical covers instead.
        #[arg(long, requires = "depth")]
        system: Option<String>,
        #[arg(long)]
        base: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        /// Delete the trivial cover `{a}` of this element first.
        #[arg(long)]
        drop_trivial: Option<String>,
    },
}

#[derive(Subcommand)]
enum RussellCommand {
    /// Build `¬xRx` and apply `R` to it, then an unrelated relation.
    Demo {
        #[arg(long, default_value = "R")]
        symbol: String,
    },
}

#[derive(Debug)]
struct Failure {
    name: String,
    message: String,
}

impl<E: Into<synth_core::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        Failure {
            name: e.name().to_string(),
            message: e.to_string(),
        }
    }
}

fn failure(name: &str, message: impl Into<String>) -> Failure {
    Failure {
        name: name.to_string(),
        message: message.into(),
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| failure("IoError", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| failure("SyntaxError", format!("{}: {e}", path.display())))
}

fn registry(path: Option<&Path>) -> Result<Registry, Failure> {
    let config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| failure("IoError", format!("{}: {e}", p.display())))?;
            Config::from_json_str(&text)?
        }
        None => Config::default(),
    };
    Ok(Registry::new(&config.with_env()?)?)
}

fn forms_json(forms: &[Form]) -> Value {
    json!(forms.iter().map(Form::to_json).collect::<Vec<_>>())
}

fn handle(sys: &FormalSystem, base: Option<&str>) -> Result<FoundationHandle, Failure> {
    Ok(match base {
        Some(b) => FoundationHandle::at(sys, &sys.form(b)?)?,
        None => FoundationHandle::of(sys),
    })
}

fn real(reg: &Registry, text: &str) -> Result<ComputableReal, Failure> {
    if text.contains('/') || text.parse::<i64>().is_ok() {
        let r: Rational = text.parse()?;
        return Ok(ComputableReal::from_rational(&r)?);
    }
    match ComputableReal::builtin(text) {
        Ok(x) => Ok(x),
        Err(_) => {
            let rule = reg.rule(text)?;
            Ok(ComputableReal {
                rule,
                label: text.to_string(),
            })
        }
    }
}

fn model(arg: &ModelArg) -> Result<FiniteModel, Failure> {
    let vocab = arg.vocab.as_deref().map(Vocabulary::parse).transpose()?;
    Ok(FiniteModel::from_json(&read_json(&arg.model)?, vocab.as_ref())?)
}

fn frame(path: &Path) -> Result<KripkeFrame, Failure> {
    Ok(KripkeFrame::from_json(&read_json(path)?)?)
}

/// Frames on `n` worlds, in code order; sweeps stop at four worlds.
fn frames_on(n: usize) -> Result<impl Iterator<Item = KripkeFrame>, Failure> {
    if n == 0 || n > 4 {
        return Err(ModalError::SizeBudgetExceeded { worlds: n, limit: 4 }.into());
    }
    Ok((0u64..1 << (n * n)).map(move |c| KripkeFrame::from_code(n, c)))
}

fn valuation(f: &KripkeFrame, entries: &[String]) -> Result<BTreeMap<String, WorldSet>, Failure> {
    let mut val = BTreeMap::new();
    for e in entries {
        let (atom, worlds) = e
            .split_once('=')
            .ok_or_else(|| failure("SyntaxError", format!("valuation `{e}` is not atom=worlds")))?;
        let ids: Vec<&str> = worlds.split(',').filter(|s| !s.is_empty()).collect();
        val.insert(atom.trim().to_string(), f.parse_set(&ids)?);
    }
    Ok(val)
}

fn run(cli: Cli) -> Result<Value, Failure> {
    let reg = registry(cli.config.as_deref())?;
    let budgets = reg.budgets.clone();
    Ok(match cli.command {
        Command::Star { system, from, to, max_depth } => {
            let sys = reg.system(&system)?;
            let related = related_star(&sys.relation, &sys.form(&from)?, &sys.form(&to)?, max_depth, budgets.node_budget)?;
            json!({ "related": related })
        }
        Command::Paths { system, from, steps } => {
            let sys = reg.system(&system)?;
            let paths = enumerate_paths(&sys.relation, &sys.form(&from)?, steps, budgets.node_budget)?;
            let texts: Vec<Vec<String>> = paths.iter().map(|p| p.steps().iter().map(Form::text).collect()).collect();
            json!({ "count": paths.len(), "paths": texts })
        }
        Command::Cover { at, depth } => {
            let sys = reg.system(&at.system)?;
            let cover = canonical_cover(&handle(sys, at.base.as_deref())?, depth, budgets.node_budget)?;
            forms_json(&cover.parts)
        }
        Command::Refine { at, fine, coarse } => {
            let sys = reg.system(&at.system)?;
            let h = handle(sys, at.base.as_deref())?;
            let f = canonical_cover(&h, fine, budgets.node_budget)?;
            let c = canonical_cover(&h, coarse, budgets.node_budget)?;
            let ok = refines(&h, &f, &c, budgets.node_budget)?;
            json!({ "refines": ok, "fine": {"depth": fine, "parts": f.len()}, "coarse": {"depth": coarse, "parts": c.len()} })
        }
        Command::Chain { rule, depth } => {
            let r = reg.rule(&rule)?;
            let prefix = chain_prefix(&r, depth)?;
            json!({ "rule": r.label(), "forms": forms_json(&prefix.forms), "terminal": prefix.terminal })
        }
        Command::Real(RealCommand::Locate { real: arg, precision }) => {
            let x = match (&arg.name, &arg.rational) {
                (Some(n), _) => real(&reg, n)?,
                (_, Some(r)) => ComputableReal::from_rational(&r.parse::<Rational>()?)?,
                _ => unreachable!("clap requires one"),
            };
            let iv = locate(&x, precision)?;
            json!({ "real": x.label, "precision": precision, "interval": iv.to_json() })
        }
        Command::Real(RealCommand::Compare { x, y, precision }) => {
            let (a, b) = (real(&reg, &x)?, real(&reg, &y)?);
            json!({ "x": a.label, "y": b.label, "ordering": compare(&a, &b, precision)?.label() })
        }
        Command::Constituent(ConstituentCommand::Of { model: arg, tuple, depth }) => {
            let m = model(&arg)?;
            let ids = tuple.iter().map(|e| m.element(e)).collect::<Result<Vec<_>, _>>()?;
            let c = constituent_of_bounded(&m, &ids, depth, budgets.max_depth)?;
            json!({ "tuple": tuple, "encoding": c.encode(), "constituent": c.to_json(m.vocabulary()) })
        }
        Command::Constituent(ConstituentCommand::Enum { vocab, width, depth }) => {
            let v = Vocabulary::parse(&vocab)?;
            let all = enumerate_constituents(&v, width, depth, budgets.enumeration_budget)?;
            let encodings: Vec<String> = all.iter().map(|c| c.encode()).collect();
            json!({ "count": all.len(), "constituents": encodings })
        }
        Command::Constituent(ConstituentCommand::Chain { model: arg, element, depth }) => {
            let m = model(&arg)?;
            let chain = constituent_chain_bounded(&m, m.element(&element)?, depth, budgets.max_depth)?;
            let encodings: Vec<String> = chain.iter().map(|c| c.encode()).collect();
            json!({ "element": element, "chain": encodings })
        }
        Command::Modal(ModalCommand::Eval { frame: path, formula, world, valuation: entries }) => {
            let f = frame(&path)?;
            let phi = ModalFormula::parse(&formula)?;
            let mut val = valuation(&f, &entries)?;
            for p in phi.atoms() {
                val.entry(p).or_insert(0);
            }
            let w = f.world(&world)?;
            let ext = extension(&f, &val, &phi)?;
            json!({ "holds": ext >> w & 1 == 1, "extension": f.set_names(ext) })
        }
        Command::Modal(ModalCommand::Valid { frame: path, formula }) => {
            let f = frame(&path)?;
            let phi = ModalFormula::parse(&formula)?;
            valid_on_frame_bounded(&f, &phi, budgets.valuation_budget)?.to_json(&f)
        }
        Command::S4 { frames } => match (frames.frame, frames.worlds) {
            (Some(path), _) => serde_json::to_value(s4_correspondence(&frame(&path)?)?).expect("plain report"),
            (_, Some(n)) => {
                let mut count = 0usize;
                for f in frames_on(n)? {
                    s4_correspondence(&f)?;
                    count += 1;
                }
                json!({ "worlds": n, "frames": count, "exceptions": 0 })
            }
            _ => unreachable!("clap requires one"),
        },
        Command::Kuratowski { frames } => match (frames.frame, frames.worlds) {
            (Some(path), _) => serde_json::to_value(kuratowski_check(&frame(&path)?)?).expect("plain report"),
            (_, Some(n)) => {
                let (mut count, mut laws, mut literal, mut with_identity) = (0usize, true, 0usize, 0usize);
                let mut first: Option<Value> = None;
                for f in frames_on(n)? {
                    let r = kuratowski_check(&f)?;
                    count += 1;
                    laws &= r.empty_set && r.extensive && r.additive;
                    if r.idempotent != r.transitive {
                        literal += 1;
                        first.get_or_insert_with(|| f.to_json());
                    }
                    with_identity += (r.idempotent != r.transitive_with_identity) as usize;
                }
                json!({
                    "worlds": n,
                    "frames": count,
                    "laws_hold": laws,
                    "idempotent_iff_transitive": {"exceptions": literal, "first": first},
                    "idempotent_iff_transitive_with_identity": {"exceptions": with_identity},
                })
            }
            _ => unreachable!("clap requires one"),
        },
        Command::Ftop(FtopCommand::Check { covers, system, base, depth, drop_trivial }) => {
            let mut cs = match (covers, system) {
                (Some(path), _) => CoverStructure::from_json(&read_json(&path)?)?,
                (_, Some(name)) => {
                    let sys = reg.system(&name)?;
                    cover_structure_of(&handle(sys, base.as_deref())?, depth.unwrap_or(0), budgets.node_budget)?
                }
                _ => unreachable!("clap requires one"),
            };
            let mut dropped = 0;
            if let Some(a) = &drop_trivial {
                dropped = cs.remove_cover(a, &[a.as_str()]);
            }
            let report = fg_axiom_check(&cs)?;
            let mut out = serde_json::to_value(&report).expect("plain report");
            out["elements"] = json!(cs.len());
            out["covers"] = json!(cs.cover_count());
            out["all_applicable_hold"] = json!(report.all_applicable_hold());
            if drop_trivial.is_some() {
                out["dropped"] = json!(dropped);
            }
            out
        }
        Command::Russell(RussellCommand::Demo { symbol }) => {
            let (f, r) = diagonal_concept(&symbol);
            let own = match stratified_apply(&r, &f) {
                Ok(_) => json!({ "admitted": true }),
                Err(e) => json!({ "error": e.name(), "message": e.to_string() }),
            };
            let other_name = if symbol == "S" { "T" } else { "S" };
            let other = ExtensionRelation::new(other_name, |_, _| true);
            let unrelated = match stratified_apply(&other, &f) {
                Ok(n) => json!({ "relation": other_name, "admitted": true, "contains_form": n.contains(&f)? }),
                Err(e) => json!({ "relation": other_name, "error": e.name(), "message": e.to_string() }),
            };
            json!({ "form": f.to_json(), "text": f.text(), "self_application": own, "unrelated": unrelated })
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            println!("{}", json!({ "error": f.name, "message": f.message }));
            eprintln!("synth: {}", f.message);
            ExitCode::from(1)
        }
    }
}
