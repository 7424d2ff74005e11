//! Macro and alias expansion, guard-holder removal, and DEFUN-INLINE.

use thiserror::Error;

use crate::event::{Event, EventError};
use crate::sexp::{Sexp, Symbol};
use crate::term::{
    eval_term, sexp_to_term, Binding, EvalError, Term, TermError, Value, DEFAULT_FUEL,
};
use crate::world::World;

/// Nested user-macro expansions beyond this are rejected.
const MAX_EXPANSION_DEPTH: usize = 100;

pub const INLINE_SUFFIX: &str = "$INLINE";

/// Equality variants rewritten to their EQUAL-based versions.
pub const EQUALITY_VARIANTS: &[(&str, &str)] = &[
    ("MEMBER", "MEMBER-EQUAL"),
    ("ASSOC", "ASSOC-EQUAL"),
    ("REMOVE", "REMOVE-EQUAL"),
];

/// Heads removed by [`expand_guard_holders`].
pub const GUARD_HOLDERS: &[&str] = &[
    "THE",
    "RETURN-LAST",
    "MBE",
    "PROG2$",
    "MEMBER",
    "ASSOC",
    "REMOVE",
];

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("macro alias {alias} stands for {target}, which is not defined")]
    UndefinedAliasTarget { alias: Symbol, target: Symbol },
    #[error("macro {name} expects {expected} arguments, got {got}")]
    MacroArity {
        name: Symbol,
        expected: usize,
        got: usize,
    },
    #[error("expanding macro {name}: {error}")]
    MacroEval { name: Symbol, error: EvalError },
    #[error("macro expansion of {0} does not terminate")]
    ExpansionDepth(Symbol),
    #[error("{0}")]
    Inline(String),
}

/// Expands user macros and macro aliases in surface syntax, then
/// translates to a term. Flat calls of an alias for a binary function
/// nest to the right.
pub fn expand_macro_aliases(s: &Sexp, w: &World) -> Result<Term, NormalizeError> {
    let expanded = expand_sexp(s, w, 0)?;
    Ok(sexp_to_term(&expanded, w)?)
}

/// Full logical normalization of a user-level form.
pub fn translate(s: &Sexp, w: &World) -> Result<Term, NormalizeError> {
    Ok(expand_guard_holders(&expand_macro_aliases(s, w)?))
}

fn expand_sexp(s: &Sexp, w: &World, depth: usize) -> Result<Sexp, NormalizeError> {
    let Some((head, args)) = s.as_call() else {
        return match s {
            Sexp::List(items) => Ok(Sexp::List(
                items
                    .iter()
                    .map(|x| expand_sexp(x, w, depth))
                    .collect::<Result<_, _>>()?,
            )),
            other => Ok(other.clone()),
        };
    };
    if head.name() == "QUOTE" {
        return Ok(s.clone());
    }
    if let Some(mac) = w.user_macro(head) {
        if depth >= MAX_EXPANSION_DEPTH {
            return Err(NormalizeError::ExpansionDepth(head.clone()));
        }
        if mac.formals.len() != args.len() {
            return Err(NormalizeError::MacroArity {
                name: head.clone(),
                expected: mac.formals.len(),
                got: args.len(),
            });
        }
        let binding: Binding = mac
            .formals
            .iter()
            .cloned()
            .zip(args.iter().map(Value::from_sexp))
            .collect();
        let out = eval_term(&mac.body, &binding, w, DEFAULT_FUEL).map_err(|error| {
            NormalizeError::MacroEval {
                name: head.clone(),
                error,
            }
        })?;
        return expand_sexp(&out.to_sexp(), w, depth + 1);
    }
    let args: Vec<Sexp> = if head.name() == "THE" && args.len() == 2 {
        vec![args[0].clone(), expand_sexp(&args[1], w, depth)?]
    } else {
        args.iter()
            .map(|a| expand_sexp(a, w, depth))
            .collect::<Result<_, _>>()?
    };
    if let Some(target) = w.macro_alias(head) {
        let arity = w
            .arity(target)
            .ok_or_else(|| NormalizeError::UndefinedAliasTarget {
                alias: head.clone(),
                target: target.clone(),
            })?;
        if arity == 2 && args.len() > 2 {
            let mut it = args.into_iter().rev();
            let mut acc = it.next().unwrap();
            for a in it {
                acc = Sexp::List(vec![Sexp::Symbol(target.clone()), a, acc]);
            }
            return Ok(acc);
        }
        let mut items = vec![Sexp::Symbol(target.clone())];
        items.extend(args);
        return Ok(Sexp::List(items));
    }
    let mut items = vec![Sexp::Symbol(head.clone())];
    items.extend(args);
    Ok(Sexp::List(items))
}

/// Removes guard-holders bottom-up: `THE`, `RETURN-LAST`, `MBE` (keeping
/// the logical branch) and `PROG2$`, and renames equality variants.
pub fn expand_guard_holders(t: &Term) -> Term {
    match t {
        Term::Var(_) | Term::Const(_) => t.clone(),
        Term::If(a, b, c) => Term::if_(
            expand_guard_holders(a),
            expand_guard_holders(b),
            expand_guard_holders(c),
        ),
        Term::App(f, args) => {
            let mut args: Vec<Term> = args.iter().map(expand_guard_holders).collect();
            match (f.name(), args.len()) {
                ("THE", 2) | ("PROG2$", 2) => args.pop().unwrap(),
                ("RETURN-LAST", 3) => args.pop().unwrap(),
                ("MBE", 2) => args.swap_remove(0),
                (name, _) => match EQUALITY_VARIANTS.iter().find(|(from, _)| *from == name) {
                    Some((_, to)) => Term::app(to, args),
                    None => Term::App(f.clone(), args),
                },
            }
        }
    }
}

/// Whether any guard-holder head occurs in `t`.
pub fn has_guard_holders(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Const(_) => false,
        Term::If(a, b, c) => has_guard_holders(a) || has_guard_holders(b) || has_guard_holders(c),
        Term::App(f, args) => {
            GUARD_HOLDERS.contains(&f.name()) || args.iter().any(has_guard_holders)
        }
    }
}

/// Expands `(DEFUN-INLINE f formals . rest)` into a macro for `f`, a display
/// registration, and the definition of `f$INLINE`.
pub fn expand_defun_inline(src: &Sexp) -> Result<Vec<Event>, NormalizeError> {
    let bad = |m: &str| NormalizeError::Inline(format!("{m}: {src}"));
    let Some((head, args)) = src.as_call() else {
        return Err(bad("not a DEFUN-INLINE form"));
    };
    if head.name() != "DEFUN-INLINE" {
        return Err(bad("not a DEFUN-INLINE form"));
    }
    let [name, formals, rest @ ..] = args else {
        return Err(bad("missing name or formals"));
    };
    let name = name
        .as_symbol()
        .ok_or_else(|| bad("name is not a symbol"))?;
    if name.name().ends_with(INLINE_SUFFIX) {
        return Err(NormalizeError::Inline(format!(
            "the name {name} already ends in {INLINE_SUFFIX}"
        )));
    }
    let inline = name.with_suffix(INLINE_SUFFIX);
    let formal_syms = crate::event::formals_of("DEFUN-INLINE", formals)?;
    let mut call = vec![Sexp::sym("LIST"), Sexp::quote(Sexp::Symbol(inline.clone()))];
    call.extend(formal_syms.iter().cloned().map(Sexp::Symbol));
    let mut defun = vec![
        Sexp::sym("DEFUN"),
        Sexp::Symbol(inline.clone()),
        formals.clone(),
    ];
    defun.extend(rest.iter().cloned());
    Ok(vec![
        Event::DefMacro {
            name: name.clone(),
            formals: formal_syms,
            body: Sexp::List(call),
        },
        Event::AddMacroFn {
            alias: name.clone(),
            target: inline,
        },
        Event::parse(&Sexp::List(defun))?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::read_sexp;

    fn sx(t: &str) -> Sexp {
        read_sexp(t).unwrap()
    }

    fn append_world() -> World {
        World::new()
            .process_form_str(
                "(defun binary-append (x y)
                   (if (consp x) (cons (car x) (binary-append (cdr x) y)) y))
                 (add-macro-fn append binary-append)",
            )
            .unwrap()
    }

    #[test]
    fn flat_calls_nest_right() {
        let w = append_world();
        let t = expand_macro_aliases(&sx("(append x y z)"), &w).unwrap();
        assert_eq!(t.to_string(), "(BINARY-APPEND X (BINARY-APPEND Y Z))");
        let t = expand_macro_aliases(&sx("(append x y)"), &w).unwrap();
        assert_eq!(t.to_string(), "(BINARY-APPEND X Y)");
        let t = expand_macro_aliases(&sx("(car x)"), &w).unwrap();
        assert_eq!(t.to_string(), "(CAR X)");
        assert_eq!(
            w.display_term(&expand_macro_aliases(&sx("(append x y z w)"), &w).unwrap())
                .to_string(),
            "(APPEND X Y Z W)"
        );
    }

    #[test]
    fn quoted_data_untouched() {
        let w = append_world();
        let t = expand_macro_aliases(&sx("'(append x y z)"), &w).unwrap();
        assert_eq!(t, Term::Const(Value::from_sexp(&sx("(append x y z)"))));
    }

    #[test]
    fn undefined_alias_target() {
        let w = World::new()
            .process_form_str("(add-macro-alias append binary-append)")
            .unwrap();
        assert!(matches!(
            expand_macro_aliases(&sx("(append x y)"), &w),
            Err(NormalizeError::UndefinedAliasTarget { .. })
        ));
    }

    #[test]
    fn guard_holder_table() {
        let w = World::new().process_form_str("(defun f (x) x)").unwrap();
        let gh =
            |t: &str| expand_guard_holders(&expand_macro_aliases(&sx(t), &w).unwrap()).to_string();
        assert_eq!(gh("(member x l)"), "(MEMBER-EQUAL X L)");
        assert_eq!(gh("(assoc x l)"), "(ASSOC-EQUAL X L)");
        assert_eq!(gh("(remove x l)"), "(REMOVE-EQUAL X L)");
        assert_eq!(gh("(prog2$ (f x) y)"), "Y");
        assert_eq!(gh("(the integer x)"), "X");
        assert_eq!(gh("(mbe :logic (car x) :exec (cdr x))"), "(CAR X)");
        assert_eq!(
            gh("(return-last 'progn a (the integer (member b c)))"),
            "(MEMBER-EQUAL B C)"
        );
        assert_eq!(gh("(cons (the integer x) y)"), "(CONS X Y)");
    }

    #[test]
    fn user_macros_expand() {
        let w = World::new()
            .process_form_str("(defmacro twice (x) (list 'cons x x))")
            .unwrap();
        let t = translate(&sx("(twice (car y))"), &w).unwrap();
        assert_eq!(t.to_string(), "(CONS (CAR Y) (CAR Y))");
        assert!(matches!(
            translate(&sx("(twice a b)"), &w),
            Err(NormalizeError::MacroArity { .. })
        ));
        let w = World::new()
            .process_form_str("(defmacro loop (x) (list 'loop x))")
            .unwrap();
        assert!(matches!(
            translate(&sx("(loop 1)"), &w),
            Err(NormalizeError::ExpansionDepth(_))
        ));
    }

    #[test]
    fn defun_inline_events() {
        let src = sx("(defun-inline f (x) (declare (xargs :guard (consp x))) (integerp (car x)))");
        let events = expand_defun_inline(&src).unwrap();
        let texts: Vec<String> = events.iter().map(|e| e.to_sexp().to_string()).collect();
        assert_eq!(
            texts,
            [
                "(DEFMACRO F (X) (LIST 'F$INLINE X))",
                "(ADD-MACRO-FN F F$INLINE)",
                "(DEFUN F$INLINE (X) (DECLARE (XARGS :GUARD (CONSP X))) (INTEGERP (CAR X)))",
            ]
        );
        assert!(matches!(
            expand_defun_inline(&sx("(defun-inline g$inline (x) x)")),
            Err(NormalizeError::Inline(_))
        ));
        let w = World::new().process_form(&src).unwrap();
        let t = translate(&sx("(f y)"), &w).unwrap();
        assert_eq!(t.to_string(), "(F$INLINE Y)");
        assert_eq!(w.display_term(&t).to_string(), "(F Y)");
    }
}
