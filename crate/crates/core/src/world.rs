//! The event database: definitions, recognizers, macro aliases, rules and
//! the current theory. Worlds are immutable values; processing an event
//! returns a new world.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::event::{Event, EventError};
use crate::interval::{rat, Bound, Domain, Interval};
use crate::normalize::{self, NormalizeError};
use crate::oracle::Universe;
use crate::rule::{self, Rule, RuleError, SignedRec};
use crate::rune::{parse_index_tail, Rune, RuneClass};
use crate::sexp::{read_all, ParseError, Sexp, Symbol};
use crate::term::{self, apply_fn, is_special_form, EvalError, FnDef, Term, Value, DEFAULT_FUEL};

/// Recognizers every world starts with.
pub const BUILTIN_RECOGNIZERS: &[&str] = &[
    "INTEGERP",
    "RATIONALP",
    "CONSP",
    "SYMBOLP",
    "STRINGP",
    "NATP",
    "POSP",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MacroDef {
    pub name: Symbol,
    pub formals: Vec<Symbol>,
    pub body: Term,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("{0} is already defined")]
    Redefinition(Symbol),
    #[error("bad formals for {name}: {detail}")]
    BadFormals { name: Symbol, detail: String },
    #[error("free variables {vars:?} in the definition of {name}")]
    FreeVariables { name: Symbol, vars: Vec<Symbol> },
    #[error("{0} is not a defined function")]
    NotAFunction(Symbol),
    #[error("a recognizer takes one argument, but {name} takes {arity}")]
    RecognizerArity { name: Symbol, arity: usize },
    #[error("{0} is already a recognizer")]
    AlreadyRecognizer(Symbol),
    #[error("{name} returns {result} on {witness}, not T or NIL")]
    NotBoolean {
        name: Symbol,
        witness: Value,
        result: Value,
    },
    #[error("evaluating {name}: {error}")]
    Eval { name: Symbol, error: EvalError },
    #[error("{0} is a function, not a macro name")]
    AliasIsFunction(Symbol),
    #[error("unknown rune designator {0}")]
    UnknownDesignator(String),
    #[error("{0} does not name anything defined")]
    UndefinedBase(Symbol),
    #[error("{rune} is not a rune: {alias} is a macro alias for {target}")]
    AliasInRune {
        rune: String,
        alias: Symbol,
        target: Symbol,
    },
    #[error("bad theory expression {0}")]
    BadTheory(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("event {index}: {error}")]
pub struct ReplayError {
    pub index: usize,
    pub error: WorldError,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct World {
    log: Vec<Event>,
    functions: BTreeMap<Symbol, FnDef>,
    macros: BTreeMap<Symbol, MacroDef>,
    recognizers: Vec<Symbol>,
    macro_aliases: BTreeMap<Symbol, Symbol>,
    /// Function name to the macro name its calls display as.
    macro_fns: BTreeMap<Symbol, Symbol>,
    theorems: BTreeMap<Symbol, Vec<Rune>>,
    rules: BTreeMap<Rune, Rule>,
    runes: BTreeSet<Rune>,
    enabled: BTreeSet<Rune>,
}

impl Default for World {
    fn default() -> Self {
        World::new()
    }
}

fn builtin_rules() -> Vec<(&'static str, Rule)> {
    let imp = |hyp: &str, concl: SignedRec| Rule::Implication {
        hyp: Symbol::new(hyp),
        concl,
    };
    let sig = |fun: &str, reqs: Vec<Vec<SignedRec>>, concl: &str| Rule::Signature {
        fun: Symbol::new(fun),
        reqs,
        concl: SignedRec::pos(concl),
    };
    let lower = |hyp: &str, n: i64| Rule::Bound {
        hyp: Symbol::new(hyp),
        interval: Interval::new(Domain::Unknown, Bound::Closed(rat(n)), Bound::Unbounded).unwrap(),
    };
    let mut out = vec![("INTEGERP", imp("INTEGERP", SignedRec::pos("RATIONALP")))];
    let kinds = ["RATIONALP", "CONSP", "SYMBOLP", "STRINGP"];
    for a in kinds {
        for b in kinds.iter().filter(|b| **b != a) {
            out.push((a, imp(a, SignedRec::neg(b))));
        }
    }
    out.push(("NATP", imp("NATP", SignedRec::pos("INTEGERP"))));
    out.push(("NATP", lower("NATP", 0)));
    out.push(("POSP", imp("POSP", SignedRec::pos("NATP"))));
    out.push(("POSP", lower("POSP", 1)));
    let int = || vec![SignedRec::pos("INTEGERP")];
    let nat = || vec![SignedRec::pos("NATP")];
    for f in ["BINARY-+", "BINARY-*"] {
        out.push((f, sig(f, vec![int(), int()], "INTEGERP")));
        out.push((f, sig(f, vec![vec![], vec![]], "RATIONALP")));
        out.push((f, sig(f, vec![nat(), nat()], "NATP")));
    }
    out.push(("UNARY--", sig("UNARY--", vec![int()], "INTEGERP")));
    out.push(("UNARY--", sig("UNARY--", vec![vec![]], "RATIONALP")));
    out.push(("CONS", sig("CONS", vec![vec![], vec![]], "CONSP")));
    out.push(("EQUAL", sig("EQUAL", vec![vec![], vec![]], "SYMBOLP")));
    out.push(("<", sig("<", vec![vec![], vec![]], "SYMBOLP")));
    out.push(("NOT", sig("NOT", vec![vec![]], "SYMBOLP")));
    out
}

/// Gives each rule a `:TAU-SYSTEM` rune on `base`, indexed from 1 when the
/// base carries more than one rule.
fn tau_runes<'a>(base: &Symbol, count: usize) -> impl Iterator<Item = Rune> + 'a {
    let base = base.clone();
    (1..=count).map(move |i| {
        if count == 1 {
            Rune::new(RuneClass::TauSystem, base.clone())
        } else {
            Rune::indexed(RuneClass::TauSystem, base.clone(), i as u64)
        }
    })
}

impl World {
    /// The ground world: primitives, built-in recognizers and rules, no
    /// events.
    pub fn new() -> World {
        let mut w = World {
            log: Vec::new(),
            functions: BTreeMap::new(),
            macros: BTreeMap::new(),
            recognizers: BUILTIN_RECOGNIZERS.iter().map(|s| Symbol::new(s)).collect(),
            macro_aliases: BTreeMap::new(),
            macro_fns: BTreeMap::new(),
            theorems: BTreeMap::new(),
            rules: BTreeMap::new(),
            runes: BTreeSet::new(),
            enabled: BTreeSet::new(),
        };
        for (name, _) in term::PRIMITIVES {
            w.add_rune(Rune::executable(name));
        }
        let mut grouped: BTreeMap<&str, Vec<Rule>> = BTreeMap::new();
        for (base, r) in builtin_rules() {
            grouped.entry(base).or_default().push(r);
        }
        for (base, rules) in grouped {
            let base = Symbol::new(base);
            let n = rules.len();
            for (rune, r) in tau_runes(&base, n).zip(rules) {
                w.add_rune(rune.clone());
                w.rules.insert(rune, r);
            }
        }
        w
    }

    fn add_rune(&mut self, r: Rune) {
        self.runes.insert(r.clone());
        self.enabled.insert(r);
    }

    pub fn events(&self) -> &[Event] {
        &self.log
    }

    pub fn arity(&self, f: &Symbol) -> Option<usize> {
        term::primitive_arity(f.name()).or_else(|| self.functions.get(f).map(|d| d.formals.len()))
    }

    pub fn function(&self, f: &Symbol) -> Option<&FnDef> {
        self.functions.get(f)
    }

    pub fn functions(&self) -> impl Iterator<Item = &FnDef> {
        self.functions.values()
    }

    pub fn user_macro(&self, name: &Symbol) -> Option<&MacroDef> {
        self.macros.get(name)
    }

    pub fn is_recognizer(&self, f: &Symbol) -> bool {
        self.recognizers.contains(f)
    }

    /// Declared recognizers in declaration order, built-ins first.
    pub fn recognizers(&self) -> &[Symbol] {
        &self.recognizers
    }

    pub fn macro_alias(&self, name: &Symbol) -> Option<&Symbol> {
        self.macro_aliases.get(name)
    }

    pub fn deref_macro_alias(&self, name: &Symbol) -> Symbol {
        self.macro_aliases.get(name).unwrap_or(name).clone()
    }

    /// The macro name registered to display calls of `f`.
    pub fn display_macro(&self, f: &Symbol) -> Option<&Symbol> {
        self.macro_fns.get(f)
    }

    pub fn rules(&self) -> &BTreeMap<Rune, Rule> {
        &self.rules
    }

    pub fn theorem_runes(&self, name: &Symbol) -> Option<&[Rune]> {
        self.theorems.get(name).map(Vec::as_slice)
    }

    pub fn is_enabled(&self, r: &Rune) -> bool {
        self.enabled.contains(r)
    }

    pub fn enabled(&self) -> &BTreeSet<Rune> {
        &self.enabled
    }

    pub fn universal_theory(&self) -> &BTreeSet<Rune> {
        &self.runes
    }

    /// Whether `name` is a function symbol or a theorem name.
    fn is_defined(&self, name: &Symbol) -> bool {
        self.arity(name).is_some() || self.theorems.contains_key(name)
    }

    fn is_taken(&self, name: &Symbol) -> bool {
        self.arity(name).is_some()
            || is_special_form(name.name())
            || self.macros.contains_key(name)
            || self.theorems.contains_key(name)
    }

    pub fn process_event(&self, e: Event) -> Result<World, WorldError> {
        let mut w = self.clone();
        w.apply(&e)?;
        w.log.push(e);
        Ok(w)
    }

    pub fn process_form(&self, s: &Sexp) -> Result<World, WorldError> {
        self.process_event(Event::parse(s)?)
    }

    /// Reads and processes every form in `text`.
    pub fn process_form_str(&self, text: &str) -> Result<World, WorldError> {
        let mut w = self.clone();
        for (_, form) in read_all(text)? {
            w = w.process_form(&form)?;
        }
        Ok(w)
    }

    pub fn replay(events: &[Event]) -> Result<World, ReplayError> {
        events
            .iter()
            .enumerate()
            .try_fold(World::new(), |w, (index, e)| {
                w.process_event(e.clone())
                    .map_err(|error| ReplayError { index, error })
            })
    }

    /// The world as it was after the first `k` events.
    pub fn undo_to(&self, k: usize) -> World {
        World::replay(&self.log[..k.min(self.log.len())])
            .expect("a prefix of a processed log replays")
    }

    fn apply(&mut self, e: &Event) -> Result<(), WorldError> {
        match e {
            Event::Defun {
                name,
                formals,
                decls,
                body,
                disabled,
            } => {
                let guard = Event::guard(decls).cloned().unwrap_or_else(Sexp::t);
                self.define(name, formals, &guard, body, *disabled)
            }
            Event::DefMacro {
                name,
                formals,
                body,
            } => {
                if self.is_taken(name) {
                    return Err(WorldError::Redefinition(name.clone()));
                }
                check_formals(name, formals)?;
                let body = normalize::translate(body, self)?;
                check_free_vars(name, formals, &body)?;
                self.macros.insert(
                    name.clone(),
                    MacroDef {
                        name: name.clone(),
                        formals: formals.clone(),
                        body,
                    },
                );
                Ok(())
            }
            Event::DefunInline(src) => {
                for sub in normalize::expand_defun_inline(src)? {
                    self.apply(&sub)?;
                }
                Ok(())
            }
            Event::DeclareRecognizer(name) => self.declare_recognizer(name),
            Event::AddMacroAlias { alias, target } => {
                if self.arity(alias).is_some() {
                    return Err(WorldError::AliasIsFunction(alias.clone()));
                }
                self.macro_aliases.insert(alias.clone(), target.clone());
                Ok(())
            }
            Event::AddMacroFn { alias, target } => {
                if self.arity(alias).is_some() {
                    return Err(WorldError::AliasIsFunction(alias.clone()));
                }
                self.macro_aliases.insert(alias.clone(), target.clone());
                self.macro_fns.insert(target.clone(), alias.clone());
                Ok(())
            }
            Event::Defthm { name, formula } => {
                if self.is_taken(name) {
                    return Err(WorldError::Redefinition(name.clone()));
                }
                let formula = normalize::translate(formula, self)?;
                let rules = rule::classify(&formula, self)?;
                let runes: Vec<Rune> = tau_runes(name, rules.len()).collect();
                for (rune, r) in runes.iter().zip(rules) {
                    self.add_rune(rune.clone());
                    self.rules.insert(rune.clone(), r);
                }
                self.theorems.insert(name.clone(), runes);
                Ok(())
            }
            Event::InTheory(expr) => {
                self.enabled = self.eval_theory_expr(expr)?;
                Ok(())
            }
            Event::Progn(events) => events.iter().try_for_each(|sub| self.apply(sub)),
        }
    }

    fn define(
        &mut self,
        name: &Symbol,
        formals: &[Symbol],
        guard: &Sexp,
        body: &Sexp,
        disabled: bool,
    ) -> Result<(), WorldError> {
        if self.is_taken(name) {
            return Err(WorldError::Redefinition(name.clone()));
        }
        check_formals(name, formals)?;
        // A placeholder makes recursive calls translate.
        let placeholder = FnDef {
            name: name.clone(),
            formals: formals.to_vec(),
            body: Term::nil(),
            guard: Term::t(),
            disabled,
        };
        self.functions.insert(name.clone(), placeholder);
        let translated = normalize::translate(body, self)
            .and_then(|b| Ok((b, normalize::translate(guard, self)?)));
        let (body, guard) = match translated {
            Ok(pair) => pair,
            Err(e) => {
                self.functions.remove(name);
                return Err(e.into());
            }
        };
        if let Err(e) =
            check_free_vars(name, formals, &body).and(check_free_vars(name, formals, &guard))
        {
            self.functions.remove(name);
            return Err(e);
        }
        self.functions.insert(
            name.clone(),
            FnDef {
                name: name.clone(),
                formals: formals.to_vec(),
                body,
                guard,
                disabled,
            },
        );
        for class in [
            RuneClass::Definition,
            RuneClass::ExecutableCounterpart,
            RuneClass::Induction,
            RuneClass::TypePrescription,
        ] {
            self.add_rune(Rune::new(class, name.clone()));
        }
        if disabled {
            self.enabled
                .remove(&Rune::new(RuneClass::Definition, name.clone()));
            self.enabled
                .remove(&Rune::new(RuneClass::Induction, name.clone()));
        }
        Ok(())
    }

    fn declare_recognizer(&mut self, name: &Symbol) -> Result<(), WorldError> {
        if self.is_recognizer(name) {
            return Err(WorldError::AlreadyRecognizer(name.clone()));
        }
        let def = self
            .functions
            .get(name)
            .ok_or_else(|| WorldError::NotAFunction(name.clone()))?;
        if def.formals.len() != 1 {
            return Err(WorldError::RecognizerArity {
                name: name.clone(),
                arity: def.formals.len(),
            });
        }
        for v in Universe::default_values() {
            match apply_fn(name, std::slice::from_ref(v), self, DEFAULT_FUEL) {
                Ok(r) if r == Value::t() || r.is_nil() => {}
                Ok(result) => {
                    return Err(WorldError::NotBoolean {
                        name: name.clone(),
                        witness: v.clone(),
                        result,
                    })
                }
                Err(EvalError::Divergence) => {}
                Err(error) => {
                    return Err(WorldError::Eval {
                        name: name.clone(),
                        error,
                    })
                }
            }
        }
        self.recognizers.push(name.clone());
        Ok(())
    }

    /// Resolves `(:d symb . r)`-style designators and explicit runes.
    pub fn resolve_rune_designator(&self, d: &Sexp) -> Result<Rune, WorldError> {
        let bad = || WorldError::UnknownDesignator(d.to_string());
        let (items, tail) = match d {
            Sexp::List(items) => (items.as_slice(), None),
            Sexp::Dotted(items, tail) => (items.as_slice(), Some(&**tail)),
            _ => return Err(bad()),
        };
        let (kw, base, rest) = match items {
            [Sexp::Symbol(kw), Sexp::Symbol(base), rest @ ..] => (kw, base, rest),
            _ => return Err(bad()),
        };
        let index = parse_index_tail(rest, tail).ok_or_else(bad)?;
        let class_and_base = if let Some(class) = RuneClass::from_designator(kw.name()) {
            (class, self.deref_macro_alias(base))
        } else if let Some(class) = RuneClass::from_keyword(kw.name()) {
            if let Some(target) = self.macro_alias(base) {
                return Err(WorldError::AliasInRune {
                    rune: d.to_string(),
                    alias: base.clone(),
                    target: target.clone(),
                });
            }
            (class, base.clone())
        } else {
            return Err(bad());
        };
        let (class, base) = class_and_base;
        if !self.is_defined(&base) {
            return Err(WorldError::UndefinedBase(base));
        }
        Ok(Rune { class, base, index })
    }

    /// Runes abbreviated by one theory item: a bare name or a designator.
    fn theory_item(&self, item: &Sexp) -> Result<BTreeSet<Rune>, WorldError> {
        match item {
            Sexp::Symbol(s) if s.is_nil() => Ok(BTreeSet::new()),
            Sexp::Symbol(s) => {
                let target = self.deref_macro_alias(s);
                if let Some(runes) = self.theorems.get(&target) {
                    return Ok(runes.iter().cloned().collect());
                }
                if self.arity(&target).is_none() {
                    return Err(WorldError::UndefinedBase(target));
                }
                Ok([
                    Rune::new(RuneClass::Definition, target.clone()),
                    Rune::new(RuneClass::Induction, target),
                ]
                .into())
            }
            _ => Ok([self.resolve_rune_designator(item)?].into()),
        }
    }

    fn theory_items(&self, items: &[Sexp]) -> Result<BTreeSet<Rune>, WorldError> {
        let mut out = BTreeSet::new();
        for item in items {
            out.extend(self.theory_item(item)?);
        }
        Ok(out)
    }

    pub fn eval_theory_expr(&self, expr: &Sexp) -> Result<BTreeSet<Rune>, WorldError> {
        let bad = || WorldError::BadTheory(expr.to_string());
        match expr {
            Sexp::Symbol(_) => self.theory_item(expr),
            Sexp::Dotted(..) => self.theory_item(expr),
            Sexp::List(items) => {
                let Some((Sexp::Symbol(head), args)) = items.split_first() else {
                    return self.theory_items(items);
                };
                match head.name() {
                    "QUOTE" => match args {
                        [Sexp::Symbol(s)] if s.is_nil() => Ok(BTreeSet::new()),
                        [Sexp::List(items)] => self.theory_items(items),
                        _ => Err(bad()),
                    },
                    "UNION-THEORIES" | "UNION" => {
                        let mut out = BTreeSet::new();
                        for a in args {
                            out.extend(self.eval_theory_expr(a)?);
                        }
                        Ok(out)
                    }
                    "SET-DIFFERENCE-THEORIES" | "SET-DIFFERENCE" => match args {
                        [a, b] => {
                            let a = self.eval_theory_expr(a)?;
                            let b = self.eval_theory_expr(b)?;
                            Ok(a.difference(&b).cloned().collect())
                        }
                        _ => Err(bad()),
                    },
                    "CURRENT-THEORY" => Ok(self.enabled.clone()),
                    "UNIVERSAL-THEORY" => Ok(self.runes.clone()),
                    "DISABLE" => {
                        let off = self.theory_items(args)?;
                        Ok(self.enabled.difference(&off).cloned().collect())
                    }
                    "ENABLE" => {
                        let mut out = self.enabled.clone();
                        out.extend(self.theory_items(args)?);
                        Ok(out)
                    }
                    name if name.starts_with(':') => self.theory_item(expr),
                    _ => self.theory_items(items),
                }
            }
            _ => Err(bad()),
        }
    }

    /// Rewrites calls of functions registered with ADD-MACRO-FN back into
    /// their macro form; right-nested binary calls flatten into one call.
    pub fn display_sexp(&self, s: &Sexp) -> Sexp {
        let Sexp::List(items) = s else {
            return s.clone();
        };
        if items[0].is_symbol("QUOTE") {
            return s.clone();
        }
        let Some((head, args)) = s.as_call() else {
            return Sexp::List(items.iter().map(|x| self.display_sexp(x)).collect());
        };
        let Some(mac) = self.display_macro(head) else {
            let mut out = vec![Sexp::Symbol(head.clone())];
            out.extend(args.iter().map(|x| self.display_sexp(x)));
            return Sexp::List(out);
        };
        let mut flat = Vec::new();
        let mut cur: &[Sexp] = args;
        loop {
            match cur {
                [a, b] => {
                    flat.push(self.display_sexp(a));
                    match b.as_call() {
                        Some((h, inner)) if h == head && inner.len() == 2 => cur = inner,
                        _ => {
                            flat.push(self.display_sexp(b));
                            break;
                        }
                    }
                }
                other => {
                    flat.extend(other.iter().map(|x| self.display_sexp(x)));
                    break;
                }
            }
        }
        let mut out = vec![Sexp::Symbol(mac.clone())];
        out.extend(flat);
        Sexp::List(out)
    }

    pub fn display_term(&self, t: &Term) -> Sexp {
        self.display_sexp(&t.to_sexp())
    }
}

fn check_formals(name: &Symbol, formals: &[Symbol]) -> Result<(), WorldError> {
    let mut seen = BTreeSet::new();
    for f in formals {
        if f.is_nil() || f.name() == "T" || f.is_keyword() {
            return Err(WorldError::BadFormals {
                name: name.clone(),
                detail: format!("{f} cannot be a variable"),
            });
        }
        if !seen.insert(f) {
            return Err(WorldError::BadFormals {
                name: name.clone(),
                detail: format!("{f} appears twice"),
            });
        }
    }
    Ok(())
}

fn check_free_vars(name: &Symbol, formals: &[Symbol], t: &Term) -> Result<(), WorldError> {
    let extra: Vec<Symbol> = t
        .free_vars()
        .into_iter()
        .filter(|v| !formals.contains(v))
        .collect();
    if extra.is_empty() {
        Ok(())
    } else {
        Err(WorldError::FreeVariables {
            name: name.clone(),
            vars: extra,
        })
    }
}
