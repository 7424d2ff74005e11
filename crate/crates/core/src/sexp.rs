//! S-expressions: the surface syntax for books, terms and events.
//!
//! The empty list and the false symbol are the same object: the reader
//! returns `Sexp::Symbol(NIL)` for `()`, and `Sexp::List` is never empty.
//! A quoted form `'x` is just the two-element list `(QUOTE x)`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

mod print;
mod read;

pub use print::{print_integer, print_sexp, PrintBase, PrintControl};
pub use read::{read_all, read_sexp, ParseError, ParseErrorKind, Position};

/// An interned-by-value symbol name. Names are stored exactly as given;
/// the reader is responsible for upper-casing.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_keyword(&self) -> bool {
        self.0.starts_with(':') && self.0.len() > 1
    }

    pub fn nil() -> Self {
        Symbol::new("NIL")
    }

    pub fn t() -> Self {
        Symbol::new("T")
    }

    pub fn is_nil(&self) -> bool {
        &*self.0 == "NIL"
    }

    /// Returns a new symbol with `suffix` appended to the name.
    pub fn with_suffix(&self, suffix: &str) -> Self {
        Symbol::new(&format!("{}{}", self.0, suffix))
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Sexp {
    Symbol(Symbol),
    Integer(BigInt),
    /// Always reduced, with denominator greater than one.
    Rational(BigRational),
    Str(String),
    /// A proper, non-empty list.
    List(Vec<Sexp>),
    /// An improper list `(a b . c)`; the tail is an atom other than NIL.
    Dotted(Vec<Sexp>, Box<Sexp>),
}

impl Sexp {
    pub fn sym(name: &str) -> Self {
        Sexp::Symbol(Symbol::new(name))
    }

    pub fn int(n: i64) -> Self {
        Sexp::Integer(BigInt::from(n))
    }

    pub fn nil() -> Self {
        Sexp::Symbol(Symbol::nil())
    }

    pub fn t() -> Self {
        Sexp::Symbol(Symbol::t())
    }

    /// Builds a proper list, mapping the empty list to NIL.
    pub fn list(items: Vec<Sexp>) -> Self {
        if items.is_empty() {
            Sexp::nil()
        } else {
            Sexp::List(items)
        }
    }

    /// Builds `(items... . tail)` in canonical form.
    pub fn dotted(mut items: Vec<Sexp>, tail: Sexp) -> Self {
        match tail {
            Sexp::List(rest) => {
                items.extend(rest);
                Sexp::list(items)
            }
            Sexp::Dotted(rest, t) => {
                items.extend(rest);
                Sexp::dotted(items, *t)
            }
            t if t.is_nil() => Sexp::list(items),
            t if items.is_empty() => t,
            t => Sexp::Dotted(items, Box::new(t)),
        }
    }

    pub fn quote(x: Sexp) -> Self {
        Sexp::List(vec![Sexp::sym("QUOTE"), x])
    }

    /// Canonical numeric constructor: integral rationals become `Integer`.
    pub fn number(q: BigRational) -> Self {
        if q.is_integer() {
            Sexp::Integer(q.to_integer())
        } else {
            Sexp::Rational(q)
        }
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, Sexp::Symbol(s) if s.is_nil())
    }

    pub fn is_atom(&self) -> bool {
        !matches!(self, Sexp::List(_) | Sexp::Dotted(..))
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self {
            Sexp::Symbol(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_symbol(&self, name: &str) -> bool {
        matches!(self, Sexp::Symbol(s) if s.name() == name)
    }

    /// Elements of a proper list; NIL is the empty list.
    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items) => Some(items),
            s if s.is_nil() => Some(&[]),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<BigRational> {
        match self {
            Sexp::Integer(n) => Some(BigRational::from_integer(n.clone())),
            Sexp::Rational(q) => Some(q.clone()),
            _ => None,
        }
    }

    /// Returns the integer as `u64` if it is a natural that fits.
    pub fn as_natural(&self) -> Option<u64> {
        match self {
            Sexp::Integer(n) if !n.is_negative() => n.to_u64(),
            _ => None,
        }
    }

    /// If this is `(head args...)` with a symbol head, returns both parts.
    pub fn as_call(&self) -> Option<(&Symbol, &[Sexp])> {
        match self {
            Sexp::List(items) => match items.first() {
                Some(Sexp::Symbol(s)) => Some((s, &items[1..])),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn is_call_of(&self, name: &str) -> bool {
        self.as_call().is_some_and(|(h, _)| h.name() == name)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_sexp(self, &PrintControl::default()))
    }
}

impl fmt::Debug for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_sexp(self, &PrintControl::default()))
    }
}

/// Upper-cases a single character if its upper-case form is itself a single
/// latin-1 character; otherwise leaves it alone.
pub(crate) fn upcase_char(c: char) -> char {
    if !c.is_lowercase() {
        return c;
    }
    let mut up = c.to_uppercase();
    match (up.next(), up.next()) {
        (Some(u), None) if (u as u32) <= 0xFF => u,
        _ => c,
    }
}

pub(crate) fn make_rational(num: BigInt, den: BigInt) -> Sexp {
    let q = BigRational::new(num, den);
    if q.denom().is_one() {
        Sexp::Integer(q.to_integer())
    } else {
        Sexp::Rational(q)
    }
}
