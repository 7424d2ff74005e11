//! Book files: events, `CHECK` directives and print settings, processed in
//! order into a transcript.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::db::TauDatabase;
use crate::engine::{Conjecture, Engine, Verdict};
use crate::event::Event;
use crate::normalize::{expand_defun_inline, translate};
use crate::oracle::{format_binding, refute, validate_rule, SampleSpec};
use crate::rune::Rune;
use crate::sexp::{print_sexp, read_all, PrintBase, PrintControl, Sexp, Symbol};
use crate::world::World;

/// Books are ISO-8859-1: every byte is the character with that code.
pub fn decode_latin1(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| char::from(b)).collect()
}

#[derive(Clone, Debug, Default)]
pub struct BookOptions {
    /// Check every new rule with the oracle before accepting it.
    pub paranoid: bool,
    /// Run the oracle on every check.
    pub oracle: bool,
    pub allow_unknown: bool,
    pub print: PrintControl,
    pub spec: SampleSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Proved { trace: Vec<Rune>, vacuous: bool },
    Unknown(String),
    Refuted(String),
    Error(String),
}

#[derive(Clone, Debug)]
pub struct BookReport {
    pub events: usize,
    pub checks: Vec<CheckOutcome>,
    pub errors: Vec<String>,
    pub transcript: String,
    pub world: World,
    /// Whether the options allowed UNKNOWN verdicts.
    allow_unknown: bool,
}

impl BookReport {
    fn count(&self, pred: impl Fn(&CheckOutcome) -> bool) -> usize {
        self.checks.iter().filter(|c| pred(c)).count()
    }

    pub fn proved(&self) -> usize {
        self.count(|c| matches!(c, CheckOutcome::Proved { .. }))
    }

    pub fn unknown(&self) -> usize {
        self.count(|c| matches!(c, CheckOutcome::Unknown(_)))
    }

    pub fn refuted(&self) -> usize {
        self.count(|c| matches!(c, CheckOutcome::Refuted(_)))
    }

    pub fn check_errors(&self) -> usize {
        self.count(|c| matches!(c, CheckOutcome::Error(_)))
    }

    pub fn success(&self) -> bool {
        self.errors.is_empty()
            && self.refuted() == 0
            && self.check_errors() == 0
            && (self.allow_unknown || self.unknown() == 0)
    }
}

fn set_print_base(args: &[Sexp]) -> Result<PrintBase, String> {
    let n = match args {
        [n] | [n, _] => n.as_natural(),
        _ => None,
    };
    n.and_then(|n| PrintBase::try_from(u32::try_from(n).ok()?).ok())
        .ok_or_else(|| "SET-PRINT-BASE takes 2, 8, 10 or 16".to_string())
}

fn set_print_radix(args: &[Sexp]) -> Result<bool, String> {
    match args {
        [b] | [b, _] if b.is_nil() => Ok(false),
        [b] | [b, _] if b.is_symbol("T") => Ok(true),
        _ => Err("SET-PRINT-RADIX takes T or NIL".to_string()),
    }
}

struct Session<'o> {
    opts: &'o BookOptions,
    print: PrintControl,
    world: World,
    db: Option<(usize, TauDatabase)>,
    report: BookReport,
}

impl Session<'_> {
    fn line(&mut self, text: String) {
        self.report.transcript.push_str(&text);
        self.report.transcript.push('\n');
    }

    fn show(&self, s: &Sexp) -> String {
        print_sexp(&self.world.display_sexp(s), &self.print)
    }

    fn show_runes(&self, runes: &[Rune]) -> String {
        let parts: Vec<String> = runes
            .iter()
            .map(|r| print_sexp(&r.to_sexp(), &self.print))
            .collect();
        format!("({})", parts.join(" "))
    }

    fn event(&mut self, form: &Sexp) -> Result<(), String> {
        let e = Event::parse(form).map_err(|e| e.to_string())?;
        let summary = e.summary();
        let next = self.world.process_event(e).map_err(|e| e.to_string())?;
        if self.opts.paranoid {
            let before: BTreeSet<&Rune> = self.world.rules().keys().collect();
            for (rune, rule) in next.rules() {
                if before.contains(rune) {
                    continue;
                }
                if let Err(b) = validate_rule(rule, &next, &self.opts.spec) {
                    return Err(format!("rule {rune} refuted by {}", format_binding(&b)));
                }
            }
        }
        self.world = next;
        self.report.events += 1;
        let n = self.report.events;
        self.line(format!("event {n}: {summary}"));
        Ok(())
    }

    /// The verdict, plus the oracle's note when it ran and found nothing.
    fn check(&mut self, formula: &Sexp) -> (CheckOutcome, Option<String>) {
        let term = match translate(formula, &self.world) {
            Ok(t) => t,
            Err(e) => return (CheckOutcome::Error(e.to_string()), None),
        };
        let stamp = self.world.events().len();
        if self.db.as_ref().is_none_or(|(s, _)| *s != stamp) {
            self.db = Some((stamp, TauDatabase::build(&self.world)));
        }
        let db = &self.db.as_ref().expect("built above").1;
        let c = Conjecture::from_formula(&term);
        let verdict = match Engine::new(&self.world, db).decide(&c) {
            Ok(v) => v,
            Err(e) => return (CheckOutcome::Error(e.to_string()), None),
        };
        let mut note = None;
        // The oracle runs on every check when asked; a counterexample is
        // reported even against an UNKNOWN verdict.
        if self.opts.oracle {
            let r = refute(&c, &self.world, &self.opts.spec);
            if let Some(b) = &r.counterexample {
                let how = if verdict.is_proved() {
                    "engine claimed PROVED"
                } else {
                    "engine said UNKNOWN"
                };
                return (
                    CheckOutcome::Refuted(format!("{} ({how})", format_binding(b))),
                    None,
                );
            }
            note = Some(format!("  oracle: {r}"));
        }
        let outcome = match verdict {
            Verdict::Proved { trace, vacuous } => CheckOutcome::Proved { trace, vacuous },
            Verdict::Unknown { reason } => CheckOutcome::Unknown(reason),
            Verdict::Refuted { binding } => CheckOutcome::Refuted(format_binding(&binding)),
        };
        (outcome, note)
    }

    fn form(&mut self, form: &Sexp) -> Result<(), String> {
        match form.as_call() {
            Some((head, args)) if head.name() == "CHECK" => {
                let [formula] = args else {
                    return Err("CHECK takes one formula".to_string());
                };
                let shown = self.show(formula);
                let (outcome, note) = self.check(formula);
                let text = match &outcome {
                    CheckOutcome::Proved { trace, vacuous } => format!(
                        "PROVED{} {}",
                        if *vacuous { " (vacuous)" } else { "" },
                        self.show_runes(trace)
                    ),
                    CheckOutcome::Unknown(r) => format!("UNKNOWN: {r}"),
                    CheckOutcome::Refuted(b) => format!("REFUTED by {b}"),
                    CheckOutcome::Error(e) => format!("ERROR: {e}"),
                };
                self.line(format!("check {shown}: {text}"));
                if let Some(note) = note {
                    self.line(note);
                }
                self.report.checks.push(outcome);
                Ok(())
            }
            Some((head, args)) if head.name() == "SET-PRINT-BASE" => {
                self.print.base = set_print_base(args)?;
                Ok(())
            }
            Some((head, args)) if head.name() == "SET-PRINT-RADIX" => {
                self.print.radix = set_print_radix(args)?;
                Ok(())
            }
            _ => self.event(form),
        }
    }
}

/// Processes a book's text. Processing stops at the first event error.
pub fn check_book_text(text: &str, opts: &BookOptions) -> BookReport {
    let mut s = Session {
        opts,
        print: opts.print,
        world: World::new(),
        db: None,
        report: BookReport {
            events: 0,
            checks: Vec::new(),
            errors: Vec::new(),
            transcript: String::new(),
            world: World::new(),
            allow_unknown: opts.allow_unknown,
        },
    };
    match read_all(text) {
        Err(e) => {
            s.report.errors.push(format!("{e}"));
            s.line(format!("error at {e}"));
        }
        Ok(forms) => {
            for (pos, form) in forms {
                if let Err(e) = s.form(&form) {
                    s.report.errors.push(format!("{pos}: {e}"));
                    s.line(format!("error at {pos}: {e}"));
                    break;
                }
            }
        }
    }
    let r = &s.report;
    let summary = format!(
        "events: {}, checks: {}, proved: {}, unknown: {}, refuted: {}, errors: {}",
        r.events,
        r.checks.len(),
        r.proved(),
        r.unknown(),
        r.refuted(),
        r.errors.len() + r.check_errors()
    );
    s.line(summary);
    s.report.world = s.world;
    s.report
}

#[derive(Debug, Error)]
pub enum BookError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub fn check_book(path: &Path, opts: &BookOptions) -> Result<BookReport, BookError> {
    let bytes = std::fs::read(path).map_err(|source| BookError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(check_book_text(&decode_latin1(&bytes), opts))
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Trans1Error {
    #[error("not a macro form: {0}")]
    NotAMacro(String),
    #[error("{0}")]
    Bad(String),
}

fn disable(name: &Symbol) -> Sexp {
    Sexp::list(vec![
        Sexp::sym("IN-THEORY"),
        Sexp::list(vec![Sexp::sym("DISABLE"), Sexp::Symbol(name.clone())]),
    ])
}

/// One step of macro expansion for the event macros.
pub fn trans1(form: &Sexp) -> Result<Sexp, Trans1Error> {
    let not_macro = || Trans1Error::NotAMacro(form.to_string());
    let (head, _) = form.as_call().ok_or_else(not_macro)?;
    match head.name() {
        "DEFUN-INLINE" => {
            let events = expand_defun_inline(form).map_err(|e| Trans1Error::Bad(e.to_string()))?;
            let mut items = vec![Sexp::sym("PROGN")];
            items.extend(events.iter().map(Event::to_sexp));
            Ok(Sexp::list(items))
        }
        "DEFUND" | "DEFN" | "DEFND" => {
            let Ok(Event::Defun {
                name,
                formals,
                decls,
                body,
                disabled,
            }) = Event::parse(form)
            else {
                return Err(Trans1Error::Bad(form.to_string()));
            };
            let defun = Event::Defun {
                name: name.clone(),
                formals,
                decls,
                body,
                disabled: false,
            }
            .to_sexp();
            if disabled {
                Ok(Sexp::list(vec![Sexp::sym("PROGN"), defun, disable(&name)]))
            } else {
                Ok(defun)
            }
        }
        _ => Err(not_macro()),
    }
}

/// Prints a `PROGN` with one subform per line, the way the expansion is
/// usually shown.
pub fn print_expansion(s: &Sexp, ctl: &PrintControl) -> String {
    match s.as_call() {
        Some((head, parts)) if head.name() == "PROGN" => {
            let mut out = String::from("(PROGN ");
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str("\n       ");
                }
                let _ = write!(out, "{}", print_sexp(p, ctl));
            }
            out.push(')');
            out
        }
        _ => print_sexp(s, ctl),
    }
}
