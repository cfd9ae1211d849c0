//! The `lbr` command line.

use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lbr_core::convergence::{check_modulus, interpret_along_states, SamplePolicy};
use lbr_core::games::{run_1back, AbelardStrategy, Move, RandomAbelard, RealizerStrategy, ScriptedAbelard, Transcript};
use lbr_core::kernel::{Term, DEFAULT_FUEL};
use lbr_core::logic::Overrides;
use lbr_core::oracle::{eval_at, zero_loop, ZeroConfig, ZeroRun};
use lbr_core::realizer::{extract_witness, state_family};
use lbr_core::states::KnowledgeState;
use lbr_core::update::{learning_process, parse_procedure, validate, zero_br, CriticalSet, Mode, ProbeConfig};

use crate::load::{self, Loaded};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "lbr", version, about = "Learning-based realizability workbench")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// A proof document and the theorem to use from it.
#[derive(Args, Debug)]
pub struct Source {
    /// Proof document (`.nd`).
    pub file: PathBuf,
    /// Theorem or lemma name; defaults to the last theorem.
    #[arg(long)]
    pub theorem: Option<String>,
    /// Replace a table of the document: `NAME=3,2,1,0` or `NAME=path`.
    #[arg(long = "table", value_name = "NAME=VALUES")]
    pub tables: Vec<String>,
    /// Shorthand for `--table f=VALUES`.
    #[arg(long, value_name = "VALUES")]
    pub f: Option<String>,
}

impl Source {
    fn overrides(&self) -> Result<Overrides> {
        let mut o = load::overrides(&self.tables)?;
        if let Some(f) = &self.f {
            o.insert("f".into(), load::table_values(f)?);
        }
        Ok(o)
    }

    fn load(&self) -> Result<Loaded> {
        load::load_theorem(&self.file, self.theorem.as_deref(), &self.overrides()?)
    }
}

#[derive(Args, Debug)]
pub struct Budget {
    /// Reduction fuel for each normalization.
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    pub fuel: u64,
    /// Iterations of the zero loop.
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
}

impl Budget {
    fn config(&self) -> ZeroConfig {
        ZeroConfig { max_iterations: self.max_iterations, step_fuel: self.fuel }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Iterate the learning process from the zero family.
    Loop,
    /// Bar recursion.
    Bar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UpdateMode {
    Transfinite,
    Flat,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check every lemma and theorem of a document.
    Check {
        file: PathBuf,
        #[arg(long = "table", value_name = "NAME=VALUES")]
        tables: Vec<String>,
    },
    /// Print the realizer extracted from a proof.
    Extract {
        #[command(flatten)]
        source: Source,
    },
    /// Run the zero loop on the state part of a realizer of a ∀∃ formula.
    Zero {
        #[command(flatten)]
        source: Source,
        /// Values of the universal variables.
        #[arg(long = "arg", visible_alias = "a")]
        args: Vec<u64>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Compute a witness of a ∀∃ theorem at the given arguments.
    Witness {
        #[command(flatten)]
        source: Source,
        /// Values of the universal variables.
        #[arg(long = "arg", visible_alias = "a")]
        args: Vec<u64>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Play the 1-backtracking game of a theorem against an Abelard.
    Play {
        #[command(flatten)]
        source: Source,
        /// Abelard's moves in order: numerals, `left` or `right`.
        #[arg(long, value_delimiter = ',')]
        abelard: Vec<String>,
        /// Play a random Abelard with this seed instead of a script.
        #[arg(long, conflicts_with = "abelard")]
        seed: Option<u64>,
        /// Largest numeral the random Abelard plays.
        #[arg(long, default_value_t = 6)]
        bound: u64,
        #[arg(long, default_value_t = 10_000)]
        max_moves: usize,
    },
    /// Serve the game over HTTP.
    Serve {
        #[arg(long, env = "LBR_PORT", default_value_t = 7878)]
        port: u16,
    },
    /// Check the modulus law along the zero-loop chain of a realizer.
    Modulus {
        #[command(flatten)]
        source: Source,
        #[arg(long = "arg", visible_alias = "a")]
        args: Vec<u64>,
        #[command(flatten)]
        budget: Budget,
    },
    /// Find a zero of an update procedure.
    UpdateZero {
        /// Procedure file (`.up`).
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Loop)]
        method: Method,
        #[arg(long, value_enum, default_value_t = UpdateMode::Transfinite)]
        mode: UpdateMode,
        /// Step budget of the learning process.
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
        /// Evaluation budget of bar recursion.
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
    },
    /// Run the epsilon substitution method on a file of critical formulas.
    Epsilon {
        /// Critical formula file (`.eps`).
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        max_steps: usize,
    },
}

fn emit(out: &mut dyn Write, format: Format, text: &str, value: serde_json::Value) -> Result<()> {
    match format {
        Format::Text => write!(out, "{text}")?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?,
    }
    Ok(())
}

fn parse_move(s: &str) -> Result<Move> {
    match s.trim() {
        "left" | "l" => Ok(Move::Left),
        "right" | "r" => Ok(Move::Right),
        n => n.parse().map(Move::Num).map_err(|_| Error::Usage(format!("`{n}` is not a move"))),
    }
}

/// The state family of a loaded theorem applied to `args`.
fn family_at(l: &Loaded, args: &[u64]) -> Result<Term> {
    let fam = state_family(&l.doc.sig, &l.checked.realizer, &l.checked.conclusion)?;
    match args {
        [] => Ok(Term::app(fam.term, Term::num(0))),
        [n] => Ok(Term::app(fam.term, Term::num(*n))),
        _ => Err(Error::Usage(format!("`{}` takes at most one argument", l.name))),
    }
}

fn trace_text(run: &ZeroRun) -> String {
    let mut s = String::new();
    for e in &run.trace {
        s += &format!("{:>4}  {}  learns {}\n", e.index, e.state, e.emitted);
    }
    s
}

pub fn transcript_text(t: &Transcript) -> String {
    let mut s = format!("game {}\n", t.formula);
    for r in &t.records {
        s += &format!("{:>3} {:<7} {:<16} {}", r.index, r.player.to_string(), r.mv.to_string(), r.position);
        if let Some(k) = &r.knowledge {
            s += &format!("  {k}");
        }
        s.push('\n');
    }
    s += &format!("winner {} after {} backtrack(s)\n", t.winner, t.backtracks);
    s
}

/// Runs one command, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let format = cli.format;
    match cli.command {
        Command::Check { file, tables } => {
            let doc = load::document(&load::read(&file)?, &load::overrides(&tables)?)?;
            let mut text = String::new();
            let mut items = Vec::new();
            for th in doc.lemmas.values().chain(&doc.theorems) {
                let c = doc.check(th)?;
                text += &format!("OK {}: {}\n", th.name, c.conclusion);
                items.push(json!({ "name": th.name, "conclusion": c.conclusion.to_string() }));
            }
            emit(out, format, &text, json!({ "ok": true, "theorems": items }))
        }
        Command::Extract { source } => {
            let l = source.load()?;
            let (a, t) = (&l.checked.conclusion, &l.checked.realizer);
            emit(
                out,
                format,
                &format!("{}: {a}\n{t}\n", l.name),
                json!({ "name": l.name, "conclusion": a.to_string(), "realizer": t.to_string() }),
            )
        }
        Command::Zero { source, args, budget } => {
            let l = source.load()?;
            let t = family_at(&l, &args)?;
            let run = zero_loop(&l.doc.sig, &t, &KnowledgeState::empty(), budget.config())?;
            let rest = learns_at(&l, &t, &run.zero)?;
            if !rest.is_empty() {
                return Err(Error::Failed(format!("the realizer still learns {rest} at {}", run.zero)));
            }
            let text = format!("{}zero {}\n", trace_text(&run), run.zero);
            emit(out, format, &text, serde_json::to_value(&run)?)
        }
        Command::Witness { source, args, budget } => {
            let l = source.load()?;
            let w = extract_witness(&l.doc.sig, &l.checked.realizer, &l.checked.conclusion, &args, budget.config())?;
            let text = format!("{}zero {}\nwitness {}\n", trace_text(&w.run), w.zero, w.value());
            emit(out, format, &text, serde_json::to_value(&w)?)
        }
        Command::Play { source, abelard, seed, bound, max_moves } => {
            let l = source.load()?;
            let (sig, a) = (&l.doc.sig, &l.checked.conclusion);
            let eloise = RealizerStrategy::new(sig, a, &l.checked.realizer);
            let mut ab: Box<dyn AbelardStrategy> = match seed {
                Some(seed) => Box::new(RandomAbelard::new(seed, bound)),
                None => Box::new(ScriptedAbelard::new(abelard.iter().map(|m| parse_move(m)).collect::<Result<Vec<_>>>()?)),
            };
            let t = run_1back(sig, a, &eloise, ab.as_mut(), max_moves)?;
            emit(out, format, &transcript_text(&t), serde_json::to_value(&t)?)
        }
        Command::Serve { port } => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(crate::service::serve(port))?;
            Ok(())
        }
        Command::Modulus { source, args, budget } => {
            let l = source.load()?;
            let t = family_at(&l, &args)?;
            let run = zero_loop(&l.doc.sig, &t, &KnowledgeState::empty(), budget.config())?;
            let states: Arc<Vec<KnowledgeState>> = Arc::new(run.trace.iter().map(|e| e.state.clone()).collect());
            let at = move |m: u64| Ok(states[(m as usize).min(states.len() - 1)].clone());
            let v = interpret_along_states(&l.doc.sig, &t, at)?;
            let rows = check_modulus(&v.modulus()?, &v.points()?, &SamplePolicy::default())?;
            let bad = rows.iter().filter(|r| r.violation.is_some()).count();
            let mut text = format!("{:>8} {:>4} {:>6} {:>6}  value\n", "h", "z", "start", "end");
            for r in &rows {
                text += &format!("{r}\n");
            }
            text += &format!("{} samples, {bad} violation(s)\n", rows.len());
            emit(out, format, &text, json!({ "rows": rows, "violations": bad }))?;
            match bad {
                0 => Ok(()),
                n => Err(Error::Failed(format!("{n} modulus law violation(s)"))),
            }
        }
        Command::UpdateZero { file, method, mode, max_steps, fuel } => {
            let u = parse_procedure(&load::read(&file)?)?;
            let (zero, trace, value) = match method {
                Method::Loop => {
                    let mode = match mode {
                        UpdateMode::Transfinite => Mode::Transfinite,
                        UpdateMode::Flat => Mode::Flat,
                    };
                    let run = learning_process(&u, mode, max_steps)?;
                    (run.zero.clone(), run.lines(), serde_json::to_value(&run)?)
                }
                Method::Bar => {
                    let z = zero_br(&u, fuel)?;
                    (z.family.clone(), format!("{} evaluation(s)\n", z.evaluations), serde_json::to_value(&z)?)
                }
            };
            let check = u.eval(&zero)?;
            if !check.is_empty() {
                return Err(Error::Failed(format!("U at the result is {check}, not empty")));
            }
            let report = validate(&u, &ProbeConfig::default())?;
            let text = format!(
                "{} (ordinal {})\n{trace}zero {zero}\nU(zero) = {check}\nvalidator: {} probes, {} violation(s)\n",
                u.name,
                u.ordinal,
                report.probes,
                report.violations.len()
            );
            let value = json!({
                "procedure": u.name,
                "ordinal": u.ordinal.to_string(),
                "result": value,
                "zero": zero,
                "probes": report.probes,
                "violations": report.violations.len(),
            });
            emit(out, format, &text, value)
        }
        Command::Epsilon { file, max_steps } => {
            let set = Arc::new(CriticalSet::parse(&load::read(&file)?)?);
            let h = set.h_process(max_steps)?;
            let truth = set.check(&h.substitution)?;
            let mut text = h.run.lines();
            text += &format!("substitution {}\n", h.substitution);
            for (c, ok) in set.criticals.iter().zip(&truth) {
                text += &format!("{} {}\n", if *ok { "true " } else { "false" }, c.formula());
            }
            emit(out, format, &text, json!({ "substitution": h.substitution, "trace": h.run.trace, "criticals": truth }))?;
            if truth.iter().all(|b| *b) {
                Ok(())
            } else {
                Err(Error::Failed("a critical formula is false under the result".into()))
            }
        }
    }
}

/// What the state term `t` learns at `s`.
fn learns_at(l: &Loaded, t: &Term, s: &KnowledgeState) -> Result<KnowledgeState> {
    let v = eval_at(&l.doc.sig, t, s, DEFAULT_FUEL)?;
    v.as_state().cloned().ok_or_else(|| Error::Failed(format!("`{v}` is not a state")))
}
