//! Object-language terms, runtime values, and a fuelled evaluator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::sexp::{PrintControl, Sexp, Symbol};
use crate::world::World;

/// Default evaluation budget, in term-node visits.
pub const DEFAULT_FUEL: u64 = 10_000;

/// User-function call nesting beyond this depth is reported as divergence.
pub const MAX_CALL_DEPTH: usize = 400;

/// A runtime value. Booleans are the symbols `T` and `NIL`; `NIL` is also
/// the empty list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Num(BigRational),
    Sym(Symbol),
    Str(String),
    Cons(Arc<(Value, Value)>),
}

impl Value {
    pub fn nil() -> Self {
        Value::Sym(Symbol::nil())
    }

    pub fn t() -> Self {
        Value::Sym(Symbol::t())
    }

    pub fn bool(b: bool) -> Self {
        if b {
            Value::t()
        } else {
            Value::nil()
        }
    }

    pub fn int(n: i64) -> Self {
        Value::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rat(num: i64, den: i64) -> Self {
        Value::Num(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn sym(name: &str) -> Self {
        Value::Sym(Symbol::new(name))
    }

    pub fn cons(a: Value, b: Value) -> Self {
        Value::Cons(Arc::new((a, b)))
    }

    pub fn list(items: Vec<Value>) -> Self {
        items
            .into_iter()
            .rev()
            .fold(Value::nil(), |acc, v| Value::cons(v, acc))
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Value::Sym(s) if s.is_nil())
    }

    pub fn is_true(&self) -> bool {
        !self.is_nil()
    }

    pub fn as_number(&self) -> Option<&BigRational> {
        match self {
            Value::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Value::Num(q) if q.is_integer())
    }

    /// The numeric view used by arithmetic and `<`: non-numbers count as 0.
    pub fn rfix(&self) -> BigRational {
        match self {
            Value::Num(q) => q.clone(),
            _ => BigRational::zero(),
        }
    }

    pub fn car(&self) -> Value {
        match self {
            Value::Cons(p) => p.0.clone(),
            _ => Value::nil(),
        }
    }

    pub fn cdr(&self) -> Value {
        match self {
            Value::Cons(p) => p.1.clone(),
            _ => Value::nil(),
        }
    }

    /// Atoms other than T, NIL, keywords, numbers and strings print quoted.
    pub fn is_self_evaluating(&self) -> bool {
        match self {
            Value::Num(_) | Value::Str(_) => true,
            Value::Sym(s) => s.is_nil() || s.name() == "T" || s.is_keyword(),
            Value::Cons(_) => false,
        }
    }

    pub fn from_sexp(s: &Sexp) -> Value {
        match s {
            Sexp::Symbol(sym) => Value::Sym(sym.clone()),
            Sexp::Integer(n) => Value::Num(BigRational::from_integer(n.clone())),
            Sexp::Rational(q) => Value::Num(q.clone()),
            Sexp::Str(text) => Value::Str(text.clone()),
            Sexp::List(items) => items
                .iter()
                .rev()
                .fold(Value::nil(), |acc, x| Value::cons(Value::from_sexp(x), acc)),
            Sexp::Dotted(items, tail) => {
                items.iter().rev().fold(Value::from_sexp(tail), |acc, x| {
                    Value::cons(Value::from_sexp(x), acc)
                })
            }
        }
    }

    pub fn to_sexp(&self) -> Sexp {
        match self {
            Value::Num(q) => Sexp::number(q.clone()),
            Value::Sym(s) => Sexp::Symbol(s.clone()),
            Value::Str(s) => Sexp::Str(s.clone()),
            Value::Cons(_) => {
                let mut items = Vec::new();
                let mut cur = self;
                while let Value::Cons(p) = cur {
                    items.push(p.0.to_sexp());
                    cur = &p.1;
                }
                Sexp::dotted(items, cur.to_sexp())
            }
        }
    }

    /// Cons nesting depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Value::Cons(p) => 1 + p.0.depth().max(p.1.depth()),
            _ => 0,
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexp())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexp())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Symbol),
    Const(Value),
    App(Symbol, Vec<Term>),
    If(Box<Term>, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Symbol::new(name))
    }

    pub fn konst(v: Value) -> Self {
        Term::Const(v)
    }

    pub fn app(f: &str, args: Vec<Term>) -> Self {
        Term::App(Symbol::new(f), args)
    }

    pub fn if_(test: Term, then: Term, els: Term) -> Self {
        Term::If(Box::new(test), Box::new(then), Box::new(els))
    }

    pub fn not(t: Term) -> Self {
        Term::app("NOT", vec![t])
    }

    pub fn nil() -> Self {
        Term::Const(Value::nil())
    }

    pub fn t() -> Self {
        Term::Const(Value::t())
    }

    pub fn free_vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::If(a, b, c) => {
                a.collect_vars(out);
                b.collect_vars(out);
                c.collect_vars(out);
            }
        }
    }

    /// Walks every constant in the term.
    pub fn constants(&self) -> Vec<&Value> {
        let mut out = Vec::new();
        self.collect_consts(&mut out);
        out
    }

    fn collect_consts<'a>(&'a self, out: &mut Vec<&'a Value>) {
        match self {
            Term::Var(_) => {}
            Term::Const(v) => out.push(v),
            Term::App(_, args) => args.iter().for_each(|a| a.collect_consts(out)),
            Term::If(a, b, c) => {
                a.collect_consts(out);
                b.collect_consts(out);
                c.collect_consts(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Const(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            Term::If(a, b, c) => 1 + a.size() + b.size() + c.size(),
        }
    }

    /// Back to surface syntax, without any macro re-sugaring.
    pub fn to_sexp(&self) -> Sexp {
        match self {
            Term::Var(v) => Sexp::Symbol(v.clone()),
            Term::Const(v) if v.is_self_evaluating() => v.to_sexp(),
            Term::Const(v) => Sexp::quote(v.to_sexp()),
            Term::If(a, b, c) => {
                Sexp::List(vec![Sexp::sym("IF"), a.to_sexp(), b.to_sexp(), c.to_sexp()])
            }
            Term::App(f, args) if f.name() == "THE" && args.len() == 2 => {
                let spec = match &args[0] {
                    Term::Const(v) => v.to_sexp(),
                    other => other.to_sexp(),
                };
                Sexp::List(vec![Sexp::sym("THE"), spec, args[1].to_sexp()])
            }
            Term::App(f, args) if f.name() == "MBE" && args.len() == 2 => Sexp::List(vec![
                Sexp::sym("MBE"),
                Sexp::sym(":LOGIC"),
                args[0].to_sexp(),
                Sexp::sym(":EXEC"),
                args[1].to_sexp(),
            ]),
            Term::App(f, args) => {
                let mut items = vec![Sexp::Symbol(f.clone())];
                items.extend(args.iter().map(Term::to_sexp));
                Sexp::List(items)
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexp())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::sexp::print_sexp(
            &self.to_sexp(),
            &PrintControl::default(),
        ))
    }
}

/// A user function definition as stored in the world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnDef {
    pub name: Symbol,
    pub formals: Vec<Symbol>,
    pub body: Term,
    pub guard: Term,
    /// Introduced with DEFUND/DEFND: the definition rune starts disabled.
    pub disabled: bool,
}

/// Built-in primitives and guard-holder heads with their arities.
pub const PRIMITIVES: &[(&str, usize)] = &[
    ("CONSP", 1),
    ("INTEGERP", 1),
    ("RATIONALP", 1),
    ("SYMBOLP", 1),
    ("STRINGP", 1),
    ("NATP", 1),
    ("POSP", 1),
    ("ATOM", 1),
    ("ENDP", 1),
    ("NULL", 1),
    ("NOT", 1),
    ("EQUAL", 2),
    ("<", 2),
    ("IMPLIES", 2),
    ("BINARY-+", 2),
    ("BINARY-*", 2),
    ("UNARY--", 1),
    ("CAR", 1),
    ("CDR", 1),
    ("CONS", 2),
    ("MEMBER-EQUAL", 2),
    ("ASSOC-EQUAL", 2),
    ("REMOVE-EQUAL", 2),
    // guard-holders
    ("THE", 2),
    ("RETURN-LAST", 3),
    ("MBE", 2),
    ("PROG2$", 2),
    ("MEMBER", 2),
    ("ASSOC", 2),
    ("REMOVE", 2),
];

pub fn primitive_arity(name: &str) -> Option<usize> {
    PRIMITIVES.iter().find(|(n, _)| *n == name).map(|&(_, a)| a)
}

/// Heads that are special syntax, not functions.
const SPECIAL_FORMS: &[&str] = &[
    "QUOTE", "IF", "AND", "OR", "LIST", "+", "*", "-", "<=", ">", ">=",
];

pub fn is_special_form(name: &str) -> bool {
    SPECIAL_FORMS.contains(&name)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("undeclared function {0}")]
    UnknownFunction(Symbol),
    #[error("{fun} expects {expected} arguments, got {got}")]
    Arity {
        fun: Symbol,
        expected: usize,
        got: usize,
    },
    #[error("not a term: {0}")]
    Malformed(String),
}

/// Translates surface syntax into a term, using `arity` to check calls.
/// Macro aliases are not expanded here.
pub fn sexp_to_term_with(
    s: &Sexp,
    arity: &dyn Fn(&Symbol) -> Option<usize>,
) -> Result<Term, TermError> {
    let tr = |x: &Sexp| sexp_to_term_with(x, arity);
    match s {
        Sexp::Symbol(sym) if sym.is_nil() || sym.name() == "T" || sym.is_keyword() => {
            Ok(Term::Const(Value::Sym(sym.clone())))
        }
        Sexp::Symbol(sym) => Ok(Term::Var(sym.clone())),
        Sexp::Integer(_) | Sexp::Rational(_) | Sexp::Str(_) => Ok(Term::Const(Value::from_sexp(s))),
        Sexp::Dotted(..) => Err(TermError::Malformed(s.to_string())),
        Sexp::List(items) => {
            let head = match &items[0] {
                Sexp::Symbol(h) => h,
                other => {
                    return Err(TermError::Malformed(format!(
                        "non-symbol in function position: {other}"
                    )))
                }
            };
            let args = &items[1..];
            let arity_err = |expected: usize| TermError::Arity {
                fun: head.clone(),
                expected,
                got: args.len(),
            };
            match head.name() {
                "QUOTE" => match args {
                    [x] => Ok(Term::Const(Value::from_sexp(x))),
                    _ => Err(arity_err(1)),
                },
                "IF" => match args {
                    [a, b, c] => Ok(Term::if_(tr(a)?, tr(b)?, tr(c)?)),
                    [a, b] => Ok(Term::if_(tr(a)?, tr(b)?, Term::nil())),
                    _ => Err(arity_err(3)),
                },
                "AND" => match args {
                    [] => Ok(Term::t()),
                    [a] => tr(a),
                    [a, rest @ ..] => {
                        let mut tail = vec![Sexp::sym("AND")];
                        tail.extend(rest.iter().cloned());
                        Ok(Term::if_(tr(a)?, tr(&Sexp::List(tail))?, Term::nil()))
                    }
                },
                "OR" => match args {
                    [] => Ok(Term::nil()),
                    [a] => tr(a),
                    [a, rest @ ..] => {
                        let mut tail = vec![Sexp::sym("OR")];
                        tail.extend(rest.iter().cloned());
                        let a = tr(a)?;
                        Ok(Term::if_(a.clone(), a, tr(&Sexp::List(tail))?))
                    }
                },
                "LIST" => {
                    let mut acc = Term::nil();
                    for a in args.iter().rev() {
                        acc = Term::app("CONS", vec![tr(a)?, acc]);
                    }
                    Ok(acc)
                }
                "+" | "*" => {
                    let (bin, unit) = if head.name() == "+" {
                        ("BINARY-+", 0)
                    } else {
                        ("BINARY-*", 1)
                    };
                    match args {
                        [] => Ok(Term::Const(Value::int(unit))),
                        [a] => Ok(Term::app(bin, vec![Term::Const(Value::int(unit)), tr(a)?])),
                        _ => {
                            let mut it = args.iter().rev();
                            let mut acc = tr(it.next().unwrap())?;
                            for a in it {
                                acc = Term::app(bin, vec![tr(a)?, acc]);
                            }
                            Ok(acc)
                        }
                    }
                }
                "-" => match args {
                    [a] => Ok(Term::app("UNARY--", vec![tr(a)?])),
                    [a, b] => Ok(Term::app(
                        "BINARY-+",
                        vec![tr(a)?, Term::app("UNARY--", vec![tr(b)?])],
                    )),
                    _ => Err(arity_err(2)),
                },
                "<=" | ">" | ">=" => match args {
                    [a, b] => {
                        let (a, b) = (tr(a)?, tr(b)?);
                        Ok(match head.name() {
                            "<=" => Term::not(Term::app("<", vec![b, a])),
                            ">" => Term::app("<", vec![b, a]),
                            _ => Term::not(Term::app("<", vec![a, b])),
                        })
                    }
                    _ => Err(arity_err(2)),
                },
                "THE" => match args {
                    [spec, x] => Ok(Term::app(
                        "THE",
                        vec![Term::Const(Value::from_sexp(spec)), tr(x)?],
                    )),
                    _ => Err(arity_err(2)),
                },
                "MBE" => {
                    let mut logic = None;
                    let mut exec = None;
                    let mut i = 0;
                    while i < args.len() {
                        match (&args[i], args.get(i + 1)) {
                            (k, Some(v)) if k.is_symbol(":LOGIC") => logic = Some(tr(v)?),
                            (k, Some(v)) if k.is_symbol(":EXEC") => exec = Some(tr(v)?),
                            _ => return Err(TermError::Malformed(s.to_string())),
                        }
                        i += 2;
                    }
                    match (logic, exec) {
                        (Some(l), Some(e)) => Ok(Term::app("MBE", vec![l, e])),
                        _ => Err(TermError::Malformed(s.to_string())),
                    }
                }
                _ => {
                    let expected =
                        arity(head).ok_or_else(|| TermError::UnknownFunction(head.clone()))?;
                    if expected != args.len() {
                        return Err(arity_err(expected));
                    }
                    let args = args.iter().map(tr).collect::<Result<Vec<_>, _>>()?;
                    Ok(Term::App(head.clone(), args))
                }
            }
        }
    }
}

/// Structural translation against the world's declared functions.
pub fn sexp_to_term(s: &Sexp, world: &World) -> Result<Term, TermError> {
    sexp_to_term_with(s, &|f| world.arity(f))
}

pub type Binding = BTreeMap<Symbol, Value>;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("evaluation diverged (fuel or call depth exhausted)")]
    Divergence,
    #[error("unbound variable {0}")]
    UnboundVariable(Symbol),
    #[error("unknown function {0}")]
    UnknownFunction(Symbol),
    #[error("{0} called with the wrong number of arguments")]
    Arity(Symbol),
}

/// Call-by-value evaluation with a step budget. `IF` only evaluates the
/// branch it selects.
pub fn eval_term(
    t: &Term,
    binding: &Binding,
    world: &World,
    fuel: u64,
) -> Result<Value, EvalError> {
    let env: Vec<(Symbol, Value)> = binding
        .iter()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let mut ev = Evaluator {
        world,
        fuel,
        depth: 0,
    };
    ev.eval(t, &env)
}

/// Applies a function (primitive or user-defined) to already-evaluated
/// arguments.
pub fn apply_fn(f: &Symbol, args: &[Value], world: &World, fuel: u64) -> Result<Value, EvalError> {
    let mut ev = Evaluator {
        world,
        fuel,
        depth: 0,
    };
    ev.apply(f, args.to_vec())
}

struct Evaluator<'w> {
    world: &'w World,
    fuel: u64,
    depth: usize,
}

impl Evaluator<'_> {
    fn tick(&mut self) -> Result<(), EvalError> {
        if self.fuel == 0 {
            return Err(EvalError::Divergence);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn eval(&mut self, t: &Term, env: &[(Symbol, Value)]) -> Result<Value, EvalError> {
        self.tick()?;
        match t {
            Term::Var(v) => env
                .iter()
                .rev()
                .find(|(k, _)| k == v)
                .map(|(_, val)| val.clone())
                .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            Term::Const(v) => Ok(v.clone()),
            Term::If(a, b, c) => {
                if self.eval(a, env)?.is_true() {
                    self.eval(b, env)
                } else {
                    self.eval(c, env)
                }
            }
            Term::App(f, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval(a, env))
                    .collect::<Result<Vec<_>, _>>()?;
                self.apply(f, vals)
            }
        }
    }

    fn apply(&mut self, f: &Symbol, args: Vec<Value>) -> Result<Value, EvalError> {
        if let Some(v) = self.apply_primitive(f, &args)? {
            return Ok(v);
        }
        let def = self
            .world
            .function(f)
            .ok_or_else(|| EvalError::UnknownFunction(f.clone()))?;
        if def.formals.len() != args.len() {
            return Err(EvalError::Arity(f.clone()));
        }
        if self.depth >= MAX_CALL_DEPTH {
            return Err(EvalError::Divergence);
        }
        let env: Vec<(Symbol, Value)> = def.formals.iter().cloned().zip(args).collect();
        self.depth += 1;
        let out = self.eval(&def.body, &env);
        self.depth -= 1;
        out
    }

    /// Returns `Ok(None)` if `f` is not a primitive.
    fn apply_primitive(&mut self, f: &Symbol, args: &[Value]) -> Result<Option<Value>, EvalError> {
        let expected = match primitive_arity(f.name()) {
            Some(a) => a,
            None => return Ok(None),
        };
        if expected != args.len() {
            return Err(EvalError::Arity(f.clone()));
        }
        let a = &args[0];
        let v = match f.name() {
            "CONSP" => Value::bool(matches!(a, Value::Cons(_))),
            "ATOM" | "ENDP" => Value::bool(!matches!(a, Value::Cons(_))),
            "INTEGERP" => Value::bool(a.is_integer()),
            "RATIONALP" => Value::bool(matches!(a, Value::Num(_))),
            "SYMBOLP" => Value::bool(matches!(a, Value::Sym(_))),
            "STRINGP" => Value::bool(matches!(a, Value::Str(_))),
            "NATP" => Value::bool(matches!(a, Value::Num(q) if q.is_integer() && !q.is_negative())),
            "POSP" => Value::bool(matches!(a, Value::Num(q) if q.is_integer() && q.is_positive())),
            "NULL" | "NOT" => Value::bool(a.is_nil()),
            "EQUAL" => Value::bool(a == &args[1]),
            "<" => Value::bool(a.rfix() < args[1].rfix()),
            "IMPLIES" => Value::bool(a.is_nil() || args[1].is_true()),
            "BINARY-+" => Value::Num(a.rfix() + args[1].rfix()),
            "BINARY-*" => Value::Num(a.rfix() * args[1].rfix()),
            "UNARY--" => Value::Num(-a.rfix()),
            "CAR" => a.car(),
            "CDR" => a.cdr(),
            "CONS" => Value::cons(a.clone(), args[1].clone()),
            "MEMBER-EQUAL" | "MEMBER" => {
                let mut cur = args[1].clone();
                loop {
                    self.tick()?;
                    match &cur {
                        Value::Cons(p) if &p.0 == a => break cur,
                        Value::Cons(p) => {
                            let next = p.1.clone();
                            cur = next;
                        }
                        _ => break Value::nil(),
                    }
                }
            }
            "ASSOC-EQUAL" | "ASSOC" => {
                let mut cur = args[1].clone();
                loop {
                    self.tick()?;
                    match &cur {
                        Value::Cons(p) => {
                            if &p.0.car() == a {
                                break p.0.clone();
                            }
                            let next = p.1.clone();
                            cur = next;
                        }
                        _ => break Value::nil(),
                    }
                }
            }
            "REMOVE-EQUAL" | "REMOVE" => {
                let mut kept = Vec::new();
                let mut cur = args[1].clone();
                while let Value::Cons(p) = &cur {
                    self.tick()?;
                    if &p.0 != a {
                        kept.push(p.0.clone());
                    }
                    let next = p.1.clone();
                    cur = next;
                }
                Value::list(kept)
            }
            "THE" => args[1].clone(),
            "RETURN-LAST" => args[2].clone(),
            // Execution runs the :exec branch.
            "MBE" => args[1].clone(),
            "PROG2$" => args[1].clone(),
            _ => unreachable!("primitive table and evaluator disagree on {f}"),
        };
        Ok(Some(v))
    }
}
