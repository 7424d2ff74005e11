//! Event forms as they appear in books, before translation.

use thiserror::Error;

use crate::sexp::{Sexp, Symbol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    /// DEFUN, DEFUND, DEFN or DEFND. DEFN variants arrive with an explicit
    /// `:GUARD T` declaration already in `decls`.
    Defun {
        name: Symbol,
        formals: Vec<Symbol>,
        decls: Vec<Sexp>,
        body: Sexp,
        disabled: bool,
    },
    DefMacro {
        name: Symbol,
        formals: Vec<Symbol>,
        body: Sexp,
    },
    DefunInline(Sexp),
    DeclareRecognizer(Symbol),
    AddMacroAlias {
        alias: Symbol,
        target: Symbol,
    },
    AddMacroFn {
        alias: Symbol,
        target: Symbol,
    },
    Defthm {
        name: Symbol,
        formula: Sexp,
    },
    InTheory(Sexp),
    Progn(Vec<Event>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EventError {
    #[error("not an event form: {0}")]
    NotAnEvent(String),
    #[error("malformed {head}: {detail}")]
    Malformed { head: String, detail: String },
}

fn malformed(head: &str, detail: impl Into<String>) -> EventError {
    EventError::Malformed {
        head: head.to_string(),
        detail: detail.into(),
    }
}

fn symbol_arg(head: &str, s: &Sexp) -> Result<Symbol, EventError> {
    s.as_symbol()
        .cloned()
        .ok_or_else(|| malformed(head, format!("expected a symbol, got {s}")))
}

pub(crate) fn formals_of(head: &str, s: &Sexp) -> Result<Vec<Symbol>, EventError> {
    let items = s
        .as_list()
        .ok_or_else(|| malformed(head, format!("bad formals {s}")))?;
    items.iter().map(|x| symbol_arg(head, x)).collect()
}

/// `(DECLARE (XARGS :GUARD T))`
pub(crate) fn guard_t_decl() -> Sexp {
    Sexp::List(vec![
        Sexp::sym("DECLARE"),
        Sexp::List(vec![Sexp::sym("XARGS"), Sexp::sym(":GUARD"), Sexp::t()]),
    ])
}

impl Event {
    pub fn parse(s: &Sexp) -> Result<Event, EventError> {
        let (head, args) = s
            .as_call()
            .ok_or_else(|| EventError::NotAnEvent(s.to_string()))?;
        let h = head.name();
        match h {
            "DEFUN" | "DEFUND" | "DEFN" | "DEFND" => {
                let (name, formals, rest) = match args {
                    [name, formals, rest @ ..] if !rest.is_empty() => (name, formals, rest),
                    _ => return Err(malformed(h, "expected name, formals and body")),
                };
                let (body, middle) = rest.split_last().unwrap();
                let mut decls: Vec<Sexp> = middle
                    .iter()
                    .filter(|d| !matches!(d, Sexp::Str(_)))
                    .cloned()
                    .collect();
                if let Some(bad) = decls.iter().find(|d| !d.is_call_of("DECLARE")) {
                    return Err(malformed(h, format!("unexpected {bad}")));
                }
                if h == "DEFN" || h == "DEFND" {
                    decls.insert(0, guard_t_decl());
                }
                Ok(Event::Defun {
                    name: symbol_arg(h, name)?,
                    formals: formals_of(h, formals)?,
                    decls,
                    body: body.clone(),
                    disabled: h == "DEFUND" || h == "DEFND",
                })
            }
            "DEFMACRO" => match args {
                [name, formals, .., body] => Ok(Event::DefMacro {
                    name: symbol_arg(h, name)?,
                    formals: formals_of(h, formals)?,
                    body: body.clone(),
                }),
                _ => Err(malformed(h, "expected name, formals and body")),
            },
            "DEFUN-INLINE" => Ok(Event::DefunInline(s.clone())),
            "DECLARE-RECOGNIZER" => match args {
                [name] => Ok(Event::DeclareRecognizer(symbol_arg(h, name)?)),
                _ => Err(malformed(h, "expected one name")),
            },
            "ADD-MACRO-ALIAS" | "ADD-MACRO-FN" => match args {
                [alias, target] | [alias, target, _] => {
                    let alias = symbol_arg(h, alias)?;
                    let target = symbol_arg(h, target)?;
                    Ok(if h == "ADD-MACRO-ALIAS" {
                        Event::AddMacroAlias { alias, target }
                    } else {
                        Event::AddMacroFn { alias, target }
                    })
                }
                _ => Err(malformed(h, "expected macro name and function name")),
            },
            "DEFTHM" => match args {
                [name, formula, opts @ ..] => {
                    match opts {
                        [] => {}
                        [k, v] if k.is_symbol(":RULE-CLASSES") => {
                            let ok = v.is_symbol(":TAU-SYSTEM")
                                || v.as_list()
                                    .is_some_and(|l| l.iter().all(|c| c.is_symbol(":TAU-SYSTEM")));
                            if !ok {
                                return Err(malformed(h, format!("unsupported rule classes {v}")));
                            }
                        }
                        _ => return Err(malformed(h, "unknown keyword arguments")),
                    }
                    Ok(Event::Defthm {
                        name: symbol_arg(h, name)?,
                        formula: formula.clone(),
                    })
                }
                _ => Err(malformed(h, "expected name and formula")),
            },
            "IN-THEORY" => match args {
                [expr] => Ok(Event::InTheory(expr.clone())),
                _ => Err(malformed(h, "expected one theory expression")),
            },
            "PROGN" => Ok(Event::Progn(
                args.iter().map(Event::parse).collect::<Result<_, _>>()?,
            )),
            _ => Err(EventError::NotAnEvent(s.to_string())),
        }
    }

    pub fn to_sexp(&self) -> Sexp {
        match self {
            Event::Defun {
                name,
                formals,
                decls,
                body,
                disabled,
            } => {
                let mut items = vec![
                    Sexp::sym(if *disabled { "DEFUND" } else { "DEFUN" }),
                    Sexp::Symbol(name.clone()),
                    symbols(formals),
                ];
                items.extend(decls.iter().cloned());
                items.push(body.clone());
                Sexp::List(items)
            }
            Event::DefMacro {
                name,
                formals,
                body,
            } => Sexp::List(vec![
                Sexp::sym("DEFMACRO"),
                Sexp::Symbol(name.clone()),
                symbols(formals),
                body.clone(),
            ]),
            Event::DefunInline(src) => src.clone(),
            Event::DeclareRecognizer(name) => Sexp::List(vec![
                Sexp::sym("DECLARE-RECOGNIZER"),
                Sexp::Symbol(name.clone()),
            ]),
            Event::AddMacroAlias { alias, target } => Sexp::List(vec![
                Sexp::sym("ADD-MACRO-ALIAS"),
                Sexp::Symbol(alias.clone()),
                Sexp::Symbol(target.clone()),
            ]),
            Event::AddMacroFn { alias, target } => Sexp::List(vec![
                Sexp::sym("ADD-MACRO-FN"),
                Sexp::Symbol(alias.clone()),
                Sexp::Symbol(target.clone()),
            ]),
            Event::Defthm { name, formula } => Sexp::List(vec![
                Sexp::sym("DEFTHM"),
                Sexp::Symbol(name.clone()),
                formula.clone(),
            ]),
            Event::InTheory(e) => Sexp::List(vec![Sexp::sym("IN-THEORY"), e.clone()]),
            Event::Progn(events) => {
                let mut items = vec![Sexp::sym("PROGN")];
                items.extend(events.iter().map(Event::to_sexp));
                Sexp::List(items)
            }
        }
    }

    /// Head keyword and principal name, for one-line reports.
    pub fn summary(&self) -> String {
        match self {
            Event::Defun { name, disabled, .. } => {
                format!("{} {name}", if *disabled { "DEFUND" } else { "DEFUN" })
            }
            Event::DefMacro { name, .. } => format!("DEFMACRO {name}"),
            Event::DefunInline(src) => match src.as_call() {
                Some((_, [name, ..])) => format!("DEFUN-INLINE {name}"),
                _ => "DEFUN-INLINE".to_string(),
            },
            Event::DeclareRecognizer(name) => format!("DECLARE-RECOGNIZER {name}"),
            Event::AddMacroAlias { alias, target } => format!("ADD-MACRO-ALIAS {alias} {target}"),
            Event::AddMacroFn { alias, target } => format!("ADD-MACRO-FN {alias} {target}"),
            Event::Defthm { name, .. } => format!("DEFTHM {name}"),
            Event::InTheory(e) => format!("IN-THEORY {e}"),
            Event::Progn(events) => format!("PROGN ({} events)", events.len()),
        }
    }

    /// The `:GUARD` from the XARGS declarations of a definition, if any.
    pub fn guard(decls: &[Sexp]) -> Option<&Sexp> {
        decls
            .iter()
            .filter_map(|d| d.as_call())
            .flat_map(|(_, specs)| specs.iter())
            .filter_map(|spec| match spec.as_call() {
                Some((h, kvs)) if h.name() == "XARGS" => Some(kvs),
                _ => None,
            })
            .find_map(|kvs| {
                kvs.chunks(2).find_map(|kv| match kv {
                    [k, v] if k.is_symbol(":GUARD") => Some(v),
                    _ => None,
                })
            })
    }
}

fn symbols(names: &[Symbol]) -> Sexp {
    Sexp::list(names.iter().cloned().map(Sexp::Symbol).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::read_sexp;

    fn parse(text: &str) -> Result<Event, EventError> {
        Event::parse(&read_sexp(text).unwrap())
    }

    #[test]
    fn defun_with_guard() {
        let e = parse("(defun f (x) (declare (xargs :guard (consp x))) (car x))").unwrap();
        match &e {
            Event::Defun {
                decls, disabled, ..
            } => {
                assert!(!disabled);
                assert_eq!(Event::guard(decls).unwrap().to_string(), "(CONSP X)");
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            e.to_sexp().to_string(),
            "(DEFUN F (X) (DECLARE (XARGS :GUARD (CONSP X))) (CAR X))"
        );
    }

    #[test]
    fn defn_has_guard_t() {
        let e = parse("(defnd f (x) x)").unwrap();
        match &e {
            Event::Defun {
                decls, disabled, ..
            } => {
                assert!(disabled);
                assert_eq!(Event::guard(decls), Some(&Sexp::t()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects() {
        assert!(matches!(parse("(car x)"), Err(EventError::NotAnEvent(_))));
        assert!(parse("(defun f)").is_err());
        assert!(parse("(defthm foo x :rule-classes :rewrite)").is_err());
        assert!(parse("(defthm foo x :rule-classes :tau-system)").is_ok());
        assert!(parse("(defun f (1) x)").is_err());
    }
}
