use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use super::read::is_terminator;
use super::{upcase_char, Sexp, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PrintBase {
    Binary,
    Octal,
    #[default]
    Decimal,
    Hex,
}

impl PrintBase {
    pub fn radix(self) -> u32 {
        match self {
            PrintBase::Binary => 2,
            PrintBase::Octal => 8,
            PrintBase::Decimal => 10,
            PrintBase::Hex => 16,
        }
    }

    pub const ALL: [PrintBase; 4] = [
        PrintBase::Binary,
        PrintBase::Octal,
        PrintBase::Decimal,
        PrintBase::Hex,
    ];
}

impl TryFrom<u32> for PrintBase {
    type Error = u32;

    fn try_from(n: u32) -> Result<Self, u32> {
        match n {
            2 => Ok(PrintBase::Binary),
            8 => Ok(PrintBase::Octal),
            10 => Ok(PrintBase::Decimal),
            16 => Ok(PrintBase::Hex),
            other => Err(other),
        }
    }
}

/// Session-level numeral printing settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct PrintControl {
    pub base: PrintBase,
    pub radix: bool,
}

impl PrintControl {
    pub fn new(base: PrintBase, radix: bool) -> Self {
        PrintControl { base, radix }
    }
}

fn magnitude(n: &BigInt, base: PrintBase) -> String {
    n.abs().to_str_radix(base.radix()).to_ascii_uppercase()
}

fn prefix(base: PrintBase) -> &'static str {
    match base {
        PrintBase::Binary => "#b",
        PrintBase::Octal => "#o",
        PrintBase::Hex => "#x",
        PrintBase::Decimal => "",
    }
}

/// Renders an integer. With the radix flag on, bases 2/8/16 get a `#b`/`#o`/`#x`
/// prefix ahead of the sign and base 10 gets a trailing period.
pub fn print_integer(n: &BigInt, ctl: &PrintControl) -> String {
    let sign = if n.is_negative() { "-" } else { "" };
    let digits = magnitude(n, ctl.base);
    match (ctl.radix, ctl.base) {
        (false, _) => format!("{sign}{digits}"),
        (true, PrintBase::Decimal) => format!("{sign}{digits}."),
        (true, base) => format!("{}{sign}{digits}", prefix(base)),
    }
}

fn print_rational(q: &BigRational, ctl: &PrintControl) -> String {
    let sign = if q.is_negative() { "-" } else { "" };
    let num = magnitude(q.numer(), ctl.base);
    let den = magnitude(q.denom(), ctl.base);
    // Base 10 needs no marker: the reader's default base is decimal.
    let pre = if ctl.radix { prefix(ctl.base) } else { "" };
    format!("{pre}{sign}{num}/{den}")
}

/// Whether a symbol name must be written inside `|...|` to read back as
/// the same symbol.
fn needs_bars(name: &str) -> bool {
    if name.is_empty() || name == "." || name.starts_with('#') {
        return true;
    }
    if name
        .chars()
        .any(|c| is_terminator(c) || c == '|' || c == '\\' || c.is_control() || upcase_char(c) != c)
    {
        return true;
    }
    super::read_sexp(name).map_or(
        true,
        |s| !matches!(s, Sexp::Symbol(ref sym) if sym.name() == name),
    )
}

fn print_symbol(sym: &Symbol, out: &mut String) {
    let name = sym.name();
    if needs_bars(name) {
        out.push('|');
        for c in name.chars() {
            if c == '|' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('|');
    } else {
        out.push_str(name);
    }
}

pub(crate) fn write_sexp(s: &Sexp, ctl: &PrintControl, out: &mut String) {
    match s {
        Sexp::Symbol(sym) => print_symbol(sym, out),
        Sexp::Integer(n) => out.push_str(&print_integer(n, ctl)),
        Sexp::Rational(q) => out.push_str(&print_rational(q, ctl)),
        Sexp::Str(text) => {
            out.push('"');
            for c in text.chars() {
                if c == '"' || c == '\\' {
                    out.push('\\');
                }
                out.push(c);
            }
            out.push('"');
        }
        Sexp::List(items) => {
            if let [q, x] = items.as_slice() {
                if q.is_symbol("QUOTE") {
                    out.push('\'');
                    write_sexp(x, ctl, out);
                    return;
                }
            }
            write_items(items, ctl, out);
            out.push(')');
        }
        Sexp::Dotted(items, tail) => {
            write_items(items, ctl, out);
            out.push_str(" . ");
            write_sexp(tail, ctl, out);
            out.push(')');
        }
    }
}

fn write_items(items: &[Sexp], ctl: &PrintControl, out: &mut String) {
    out.push('(');
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write_sexp(item, ctl, out);
    }
}

pub fn print_sexp(s: &Sexp, ctl: &PrintControl) -> String {
    let mut out = String::new();
    write_sexp(s, ctl, &mut out);
    out
}
