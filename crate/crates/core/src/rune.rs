//! Rule names.

use std::fmt;

use crate::sexp::{Sexp, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuneClass {
    Definition,
    ExecutableCounterpart,
    Induction,
    TypePrescription,
    TauSystem,
}

impl RuneClass {
    pub const ALL: [RuneClass; 5] = [
        RuneClass::Definition,
        RuneClass::ExecutableCounterpart,
        RuneClass::Induction,
        RuneClass::TypePrescription,
        RuneClass::TauSystem,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            RuneClass::Definition => ":DEFINITION",
            RuneClass::ExecutableCounterpart => ":EXECUTABLE-COUNTERPART",
            RuneClass::Induction => ":INDUCTION",
            RuneClass::TypePrescription => ":TYPE-PRESCRIPTION",
            RuneClass::TauSystem => ":TAU-SYSTEM",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<RuneClass> {
        RuneClass::ALL.into_iter().find(|c| c.keyword() == kw)
    }

    /// The short designator keywords `:d`, `:e`, `:i`, `:t`.
    pub fn from_designator(kw: &str) -> Option<RuneClass> {
        match kw {
            ":D" => Some(RuneClass::Definition),
            ":E" => Some(RuneClass::ExecutableCounterpart),
            ":I" => Some(RuneClass::Induction),
            ":T" => Some(RuneClass::TypePrescription),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rune {
    pub class: RuneClass,
    pub base: Symbol,
    pub index: Option<u64>,
}

impl Rune {
    pub fn new(class: RuneClass, base: impl Into<Symbol>) -> Self {
        Rune {
            class,
            base: base.into(),
            index: None,
        }
    }

    pub fn indexed(class: RuneClass, base: impl Into<Symbol>, index: u64) -> Self {
        Rune {
            class,
            base: base.into(),
            index: Some(index),
        }
    }

    pub fn definition(base: &str) -> Self {
        Rune::new(RuneClass::Definition, base)
    }

    pub fn executable(base: &str) -> Self {
        Rune::new(RuneClass::ExecutableCounterpart, base)
    }

    pub fn to_sexp(&self) -> Sexp {
        let head = vec![
            Sexp::sym(self.class.keyword()),
            Sexp::Symbol(self.base.clone()),
        ];
        match self.index {
            None => Sexp::List(head),
            Some(i) => Sexp::dotted(head, Sexp::Integer(i.into())),
        }
    }
}

impl fmt::Display for Rune {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexp())
    }
}

impl fmt::Debug for Rune {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sexp())
    }
}

/// Reads the `. r` tail that designators and runes may carry: either a
/// dotted natural or a one-element list holding it.
pub(crate) fn parse_index_tail(rest: &[Sexp], tail: Option<&Sexp>) -> Option<Option<u64>> {
    match (rest, tail) {
        ([], None) => Some(None),
        ([], Some(t)) => t.as_natural().map(Some),
        ([n], None) => n.as_natural().map(Some),
        _ => None,
    }
}
