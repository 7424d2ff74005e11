//! Tau rules and their extraction from theorem formulas.

use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

use crate::interval::{Bound, Domain, Interval};
use crate::sexp::Symbol;
use crate::term::{Term, Value};
use crate::world::World;

/// A recognizer, possibly negated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedRec {
    pub rec: Symbol,
    pub positive: bool,
}

impl SignedRec {
    pub fn pos(rec: &str) -> Self {
        SignedRec {
            rec: Symbol::new(rec),
            positive: true,
        }
    }

    pub fn neg(rec: &str) -> Self {
        SignedRec {
            rec: Symbol::new(rec),
            positive: false,
        }
    }

    pub fn term(&self, arg: Term) -> Term {
        let t = Term::App(self.rec.clone(), vec![arg]);
        if self.positive {
            t
        } else {
            Term::not(t)
        }
    }
}

impl fmt::Display for SignedRec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.rec)
        } else {
            write!(f, "~{}", self.rec)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `(p x) => (q x)` or `(p x) => (not (q x))`.
    Implication { hyp: Symbol, concl: SignedRec },
    /// `(and reqs...) => (q (f x1 ... xn))`; `reqs[i]` constrains `xi`.
    Signature {
        fun: Symbol,
        reqs: Vec<Vec<SignedRec>>,
        concl: SignedRec,
    },
    /// `(p x) => x in interval`.
    Bound { hyp: Symbol, interval: Interval },
}

impl Rule {
    /// The rule as a formula over the variables `X`, or `X1 .. Xn` for
    /// signatures.
    pub fn to_term(&self) -> Term {
        let x = Term::var("X");
        match self {
            Rule::Implication { hyp, concl } => Term::app(
                "IMPLIES",
                vec![Term::App(hyp.clone(), vec![x.clone()]), concl.term(x)],
            ),
            Rule::Signature { fun, reqs, concl } => {
                let vars: Vec<Term> = (1..=reqs.len())
                    .map(|i| Term::var(&format!("X{i}")))
                    .collect();
                let hyps: Vec<Term> = reqs
                    .iter()
                    .zip(&vars)
                    .flat_map(|(rs, v)| rs.iter().map(|r| r.term(v.clone())))
                    .collect();
                let body = concl.term(Term::App(fun.clone(), vars));
                Term::app("IMPLIES", vec![conjunction(hyps), body])
            }
            Rule::Bound { hyp, interval } => {
                let mut lits = Vec::new();
                let lt = |a: Term, b: Term| Term::app("<", vec![a, b]);
                let num = |q: &BigRational| Term::Const(Value::Num(q.clone()));
                match interval.lo() {
                    Bound::Closed(q) => lits.push(Term::not(lt(x.clone(), num(q)))),
                    Bound::Open(q) => lits.push(lt(num(q), x.clone())),
                    Bound::Unbounded => {}
                }
                match interval.hi() {
                    Bound::Closed(q) => lits.push(Term::not(lt(num(q), x.clone()))),
                    Bound::Open(q) => lits.push(lt(x.clone(), num(q))),
                    Bound::Unbounded => {}
                }
                Term::app(
                    "IMPLIES",
                    vec![Term::App(hyp.clone(), vec![x]), conjunction(lits)],
                )
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Implication { hyp, concl } => write!(f, "{hyp} => {concl}"),
            Rule::Signature { fun, reqs, concl } => {
                let args: Vec<String> = reqs
                    .iter()
                    .map(|rs| {
                        let parts: Vec<String> = rs.iter().map(|r| r.to_string()).collect();
                        format!("{{{}}}", parts.join(","))
                    })
                    .collect();
                write!(f, "{fun}({}) => {concl}", args.join(", "))
            }
            Rule::Bound { hyp, interval } => write!(f, "{hyp} => {interval}"),
        }
    }
}

/// Right-nested IF conjunction; `T` when empty.
pub fn conjunction(mut lits: Vec<Term>) -> Term {
    match lits.len() {
        0 => Term::t(),
        1 => lits.pop().unwrap(),
        _ => {
            let first = lits.remove(0);
            Term::if_(first, conjunction(lits), Term::nil())
        }
    }
}

/// Splits `(IF a b NIL)` nests into their conjuncts.
pub fn conjuncts(t: &Term) -> Vec<&Term> {
    match t {
        Term::If(a, b, c) if **c == Term::nil() => {
            let mut out = conjuncts(a);
            out.extend(conjuncts(b));
            out
        }
        Term::Const(v) if *v == Value::t() => Vec::new(),
        other => vec![other],
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("{0} is not a declared recognizer")]
    NotARecognizer(Symbol),
    #[error("cannot use {0} as a tau rule")]
    Unsupported(String),
}

/// `(r v)` or `(NOT (r v))` for a declared recognizer `r` and variable `v`.
fn recognizer_literal<'a>(t: &'a Term, w: &World) -> Option<(SignedRec, &'a Term)> {
    let (positive, inner) = match t {
        Term::App(f, args) if f.name() == "NOT" => (false, &args[0]),
        other => (true, other),
    };
    match inner {
        Term::App(r, args) if args.len() == 1 && w.is_recognizer(r) => Some((
            SignedRec {
                rec: r.clone(),
                positive,
            },
            &args[0],
        )),
        _ => None,
    }
}

/// A bound on `v` written with `<` and a numeric constant.
fn bound_literal(t: &Term) -> Option<(&Symbol, Interval)> {
    let (negated, inner) = match t {
        Term::App(f, args) if f.name() == "NOT" => (true, &args[0]),
        other => (false, other),
    };
    let Term::App(f, args) = inner else {
        return None;
    };
    if f.name() != "<" {
        return None;
    }
    let num = |t: &Term| match t {
        Term::Const(v) => Some(v.rfix()),
        _ => None,
    };
    let (var, lo, hi) = match (&args[0], &args[1]) {
        (Term::Var(v), c) => {
            let c = num(c)?;
            if negated {
                (v, Bound::Closed(c), Bound::Unbounded)
            } else {
                (v, Bound::Unbounded, Bound::Open(c))
            }
        }
        (c, Term::Var(v)) => {
            let c = num(c)?;
            if negated {
                (v, Bound::Unbounded, Bound::Closed(c))
            } else {
                (v, Bound::Open(c), Bound::Unbounded)
            }
        }
        _ => return None,
    };
    Some((var, Interval::new(Domain::Unknown, lo, hi)?))
}

/// Extracts the tau rules stated by a (translated) theorem, one per
/// conjunct of the conclusion.
pub fn classify(formula: &Term, w: &World) -> Result<Vec<Rule>, RuleError> {
    let unsupported = || RuleError::Unsupported(formula.to_string());
    let (hyp_term, concl_term) = match formula {
        Term::App(f, args) if f.name() == "IMPLIES" => (Some(&args[0]), &args[1]),
        other => (None, other),
    };
    let mut hyps: Vec<(SignedRec, &Symbol)> = Vec::new();
    if let Some(h) = hyp_term {
        for lit in conjuncts(h) {
            match recognizer_literal(lit, w) {
                Some((r, Term::Var(v))) => hyps.push((r, v)),
                _ => return Err(unsupported()),
            }
        }
    }
    let single_positive_hyp = |v: &Symbol| match hyps.as_slice() {
        [(r, hv)] if r.positive && *hv == v => Some(r.rec.clone()),
        _ => None,
    };
    let mut rules = Vec::new();
    let concls = conjuncts(concl_term);
    if concls.is_empty() {
        return Err(unsupported());
    }
    for c in concls {
        if let Some((concl, arg)) = recognizer_literal(c, w) {
            match arg {
                Term::Var(v) => {
                    let hyp = single_positive_hyp(v).ok_or_else(unsupported)?;
                    rules.push(Rule::Implication { hyp, concl });
                }
                Term::App(fun, args) => {
                    let vars: Vec<&Symbol> = args
                        .iter()
                        .map(|a| match a {
                            Term::Var(v) => Some(v),
                            _ => None,
                        })
                        .collect::<Option<_>>()
                        .ok_or_else(unsupported)?;
                    let distinct: std::collections::BTreeSet<_> = vars.iter().collect();
                    if distinct.len() != vars.len() {
                        return Err(unsupported());
                    }
                    let mut reqs = vec![Vec::new(); vars.len()];
                    for (r, hv) in &hyps {
                        let i = vars.iter().position(|v| v == hv).ok_or_else(unsupported)?;
                        reqs[i].push(r.clone());
                    }
                    rules.push(Rule::Signature {
                        fun: fun.clone(),
                        reqs,
                        concl,
                    });
                }
                _ => return Err(unsupported()),
            }
        } else if let Some((v, interval)) = bound_literal(c) {
            let hyp = single_positive_hyp(v).ok_or_else(unsupported)?;
            rules.push(Rule::Bound { hyp, interval });
        } else {
            return Err(unsupported());
        }
    }
    Ok(rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::rat;
    use crate::normalize::translate;
    use crate::sexp::read_sexp;

    fn world() -> World {
        World::new()
            .process_form_str(
                "(defun evenp (x) (if (integerp x) (integerp (* x 1/2)) nil))
                 (declare-recognizer evenp)
                 (defun g (x y) (+ x y))",
            )
            .unwrap()
    }

    fn rules(text: &str) -> Result<Vec<Rule>, RuleError> {
        let w = world();
        classify(&translate(&read_sexp(text).unwrap(), &w).unwrap(), &w)
    }

    #[test]
    fn shapes() {
        assert_eq!(
            rules("(implies (evenp x) (integerp x))").unwrap(),
            vec![Rule::Implication {
                hyp: Symbol::new("EVENP"),
                concl: SignedRec::pos("INTEGERP")
            }]
        );
        assert_eq!(
            rules("(implies (evenp x) (and (integerp x) (not (consp x))))")
                .unwrap()
                .len(),
            2
        );
        let r = rules("(implies (and (integerp x) (evenp y)) (integerp (g x y)))").unwrap();
        match &r[0] {
            Rule::Signature { reqs, .. } => {
                assert_eq!(reqs[0], vec![SignedRec::pos("INTEGERP")]);
                assert_eq!(reqs[1], vec![SignedRec::pos("EVENP")]);
            }
            other => panic!("{other}"),
        }
        let r = rules("(implies (natp x) (< x 16))").unwrap();
        match &r[0] {
            Rule::Bound { interval, .. } => assert_eq!(interval.hi(), &Bound::Open(rat(16))),
            other => panic!("{other}"),
        }
        assert!(rules("(rationalp (g x y))").is_ok());
    }

    #[test]
    fn unsupported_shapes() {
        assert!(rules("(implies (and (evenp x) (natp x)) (posp x))").is_err());
        assert!(rules("(implies (not (evenp x)) (consp x))").is_err());
        assert!(rules("(equal x x)").is_err());
        assert!(rules("(implies (evenp x) (integerp y))").is_err());
        assert!(rules("(integerp (g x x))").is_err());
    }

    #[test]
    fn round_trip_through_terms() {
        let w = world();
        for text in [
            "(implies (evenp x) (integerp x))",
            "(implies (evenp x) (not (consp x)))",
            "(implies (natp x) (<= x 15))",
            "(implies (natp x) (< 3 x))",
        ] {
            let r = rules(text).unwrap();
            assert_eq!(classify(&r[0].to_term(), &w).unwrap(), r, "{text}");
        }
    }
}
