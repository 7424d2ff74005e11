use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{make_rational, upcase_char, Sexp, Symbol};

/// A location in the source text. `offset` counts characters, not bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Position {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEof,
    UnbalancedClose,
    IllegalChar(char),
    MalformedNumeral(String),
    UnterminatedString,
    UnterminatedEscape,
    MisplacedDot,
    TrailingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedEof => f.write_str("unexpected end of input"),
            ParseErrorKind::UnbalancedClose => f.write_str("unbalanced close parenthesis"),
            ParseErrorKind::IllegalChar(c) => write!(f, "illegal character {c:?}"),
            ParseErrorKind::MalformedNumeral(s) => write!(f, "malformed numeral {s:?}"),
            ParseErrorKind::UnterminatedString => f.write_str("unterminated string"),
            ParseErrorKind::UnterminatedEscape => f.write_str("unterminated |...| escape"),
            ParseErrorKind::MisplacedDot => f.write_str("misplaced dot"),
            ParseErrorKind::TrailingInput => f.write_str("input continues after the form"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Position,
    pub kind: ParseErrorKind,
}

/// Reads exactly one form; surrounding whitespace and comments are allowed.
pub fn read_sexp(text: &str) -> Result<Sexp, ParseError> {
    let mut r = Reader::new(text);
    r.skip_blank();
    let form = r.read()?;
    r.skip_blank();
    if !r.at_end() {
        return Err(r.error(ParseErrorKind::TrailingInput));
    }
    Ok(form)
}

/// Reads every top-level form, returning each with its starting position.
pub fn read_all(text: &str) -> Result<Vec<(Position, Sexp)>, ParseError> {
    let mut r = Reader::new(text);
    let mut out = Vec::new();
    loop {
        r.skip_blank();
        if r.at_end() {
            return Ok(out);
        }
        let pos = r.pos;
        out.push((pos, r.read()?));
    }
}

pub(super) fn is_terminator(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '\'' | '"' | ';' | '`' | ',')
}

fn is_illegal(c: char) -> bool {
    (c.is_control() && !c.is_whitespace()) || matches!(c, '`' | ',')
}

struct Reader {
    chars: Vec<char>,
    pos: Position,
}

enum Item {
    Form(Sexp),
    Dot,
    Close,
}

impl Reader {
    fn new(text: &str) -> Self {
        Reader {
            chars: text.chars().collect(),
            pos: Position {
                offset: 0,
                line: 1,
                column: 1,
            },
        }
    }

    fn at_end(&self) -> bool {
        self.pos.offset >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos.offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos.offset += 1;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            pos: self.pos,
            kind,
        }
    }

    fn error_at(pos: Position, kind: ParseErrorKind) -> ParseError {
        ParseError { pos, kind }
    }

    fn skip_blank(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, ParseError> {
        let start = self.pos;
        match self.read_item()? {
            Item::Form(s) => Ok(s),
            Item::Dot => Err(Self::error_at(start, ParseErrorKind::MisplacedDot)),
            Item::Close => Err(Self::error_at(start, ParseErrorKind::UnbalancedClose)),
        }
    }

    fn read_item(&mut self) -> Result<Item, ParseError> {
        self.skip_blank();
        let start = self.pos;
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.error(ParseErrorKind::UnexpectedEof)),
        };
        match c {
            '(' => {
                self.bump();
                self.read_list_tail(start).map(Item::Form)
            }
            ')' => {
                self.bump();
                Ok(Item::Close)
            }
            '\'' => {
                self.bump();
                let inner = self.read()?;
                Ok(Item::Form(Sexp::quote(inner)))
            }
            '"' => {
                self.bump();
                self.read_string().map(Item::Form)
            }
            '#' => {
                self.bump();
                self.read_dispatch(start).map(Item::Form)
            }
            c if is_illegal(c) => Err(self.error(ParseErrorKind::IllegalChar(c))),
            _ => self.read_token(start),
        }
    }

    fn read_list_tail(&mut self, open: Position) -> Result<Sexp, ParseError> {
        let mut items = Vec::new();
        loop {
            self.skip_blank();
            if self.at_end() {
                return Err(Self::error_at(open, ParseErrorKind::UnexpectedEof));
            }
            let here = self.pos;
            match self.read_item()? {
                Item::Close => return Ok(Sexp::list(items)),
                Item::Form(s) => items.push(s),
                Item::Dot => {
                    if items.is_empty() {
                        return Err(Self::error_at(here, ParseErrorKind::MisplacedDot));
                    }
                    let tail = self.read()?;
                    self.skip_blank();
                    let close = self.pos;
                    match self.read_item() {
                        Ok(Item::Close) => return Ok(Sexp::dotted(items, tail)),
                        Ok(_) => return Err(Self::error_at(close, ParseErrorKind::MisplacedDot)),
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }

    fn read_string(&mut self) -> Result<Sexp, ParseError> {
        let mut s = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error(ParseErrorKind::UnterminatedString)),
                Some('"') => return Ok(Sexp::Str(s)),
                Some('\\') => match self.bump() {
                    None => return Err(self.error(ParseErrorKind::UnterminatedString)),
                    Some(c) => s.push(c),
                },
                Some(c) => s.push(c),
            }
        }
    }

    /// Collects constituent characters, honouring `|...|` escapes. Returns
    /// the text and whether any character was escaped.
    fn collect_token(&mut self) -> Result<(String, bool), ParseError> {
        let mut text = String::new();
        let mut escaped = false;
        while let Some(c) = self.peek() {
            if c == '|' {
                escaped = true;
                let open = self.pos;
                self.bump();
                loop {
                    match self.bump() {
                        None => {
                            return Err(Self::error_at(open, ParseErrorKind::UnterminatedEscape))
                        }
                        Some('|') => break,
                        Some('\\') => match self.bump() {
                            None => {
                                return Err(Self::error_at(
                                    open,
                                    ParseErrorKind::UnterminatedEscape,
                                ))
                            }
                            Some(c) => text.push(c),
                        },
                        Some(c) => text.push(c),
                    }
                }
            } else if is_terminator(c) {
                break;
            } else if is_illegal(c) {
                return Err(self.error(ParseErrorKind::IllegalChar(c)));
            } else {
                self.bump();
                text.push(upcase_char(c));
            }
        }
        Ok((text, escaped))
    }

    fn read_token(&mut self, start: Position) -> Result<Item, ParseError> {
        let (text, escaped) = self.collect_token()?;
        if escaped {
            return Ok(Item::Form(Sexp::Symbol(Symbol::new(&text))));
        }
        if text == "." {
            return Ok(Item::Dot);
        }
        match parse_decimal(&text) {
            Some(Ok(n)) => Ok(Item::Form(n)),
            Some(Err(())) => Err(Self::error_at(
                start,
                ParseErrorKind::MalformedNumeral(text),
            )),
            None => Ok(Item::Form(Sexp::Symbol(Symbol::new(&text)))),
        }
    }

    fn read_dispatch(&mut self, start: Position) -> Result<Sexp, ParseError> {
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if is_terminator(c) || c == '|' {
                break;
            }
            if is_illegal(c) {
                return Err(self.error(ParseErrorKind::IllegalChar(c)));
            }
            self.bump();
            text.push(c);
        }
        let malformed =
            || Self::error_at(start, ParseErrorKind::MalformedNumeral(format!("#{text}")));
        let mut chars = text.chars();
        let mut underscores = false;
        let mut marker = match chars.next() {
            Some(c) => c.to_ascii_lowercase(),
            None => return Err(Self::error_at(start, ParseErrorKind::IllegalChar('#'))),
        };
        if marker == 'u' {
            underscores = true;
            marker = match chars.clone().next().map(|c| c.to_ascii_lowercase()) {
                Some(c @ ('b' | 'o' | 'x')) => {
                    chars.next();
                    c
                }
                _ => 'd',
            };
        }
        let radix = match marker {
            'b' => 2,
            'o' => 8,
            'x' => 16,
            'd' if underscores => 10,
            _ => return Err(Self::error_at(start, ParseErrorKind::IllegalChar('#'))),
        };
        parse_radix_body(chars.as_str(), radix, underscores).ok_or_else(malformed)
    }
}

/// Parses a plain decimal token. Returns `None` if the token is not
/// numeric-looking at all (so it is a symbol), `Some(Err)` for a numeral
/// with a zero denominator.
fn parse_decimal(text: &str) -> Option<Result<Sexp, ()>> {
    let (neg, body) = split_sign(text);
    if let Some((num, den)) = body.split_once('/') {
        if !is_digits(num, 10) || !is_digits(den, 10) {
            return None;
        }
        let n = BigInt::parse_bytes(num.as_bytes(), 10)?;
        let d = BigInt::parse_bytes(den.as_bytes(), 10)?;
        if d.is_zero() {
            return Some(Err(()));
        }
        return Some(Ok(make_rational(if neg { -n } else { n }, d)));
    }
    let digits = body.strip_suffix('.').unwrap_or(body);
    if !is_digits(digits, 10) {
        return None;
    }
    let n = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    Some(Ok(Sexp::Integer(if neg { -n } else { n })))
}

fn split_sign(text: &str) -> (bool, &str) {
    if let Some(rest) = text.strip_prefix('-') {
        (true, rest)
    } else if let Some(rest) = text.strip_prefix('+') {
        (false, rest)
    } else {
        (false, text)
    }
}

fn is_digits(s: &str, radix: u32) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_digit(radix))
}

/// Removes `_` separators from a digit group, rejecting underscores at
/// either edge or doubled.
fn strip_underscores(group: &str) -> Option<String> {
    if group.starts_with('_') || group.ends_with('_') || group.contains("__") {
        return None;
    }
    Some(group.chars().filter(|&c| c != '_').collect())
}

fn parse_radix_body(body: &str, radix: u32, underscores: bool) -> Option<Sexp> {
    let (neg, body) = split_sign(body);
    let group = |g: &str| -> Option<BigInt> {
        let g = if underscores {
            strip_underscores(g)?
        } else {
            g.to_string()
        };
        if !is_digits(&g, radix) {
            return None;
        }
        BigInt::parse_bytes(g.as_bytes(), radix)
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (group(n)?, group(d)?),
        None => (group(body)?, BigInt::from(1)),
    };
    if den.is_zero() {
        return None;
    }
    Some(make_rational(if neg { -num } else { num }, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn kind(text: &str) -> ParseErrorKind {
        read_sexp(text).unwrap_err().kind
    }

    #[test]
    fn reads_plain_lists_upcased() {
        assert_eq!(
            read_sexp("(append x y)").unwrap(),
            Sexp::List(vec![Sexp::sym("APPEND"), Sexp::sym("X"), Sexp::sym("Y")])
        );
    }

    #[test]
    fn reads_underscore_hex() {
        assert_eq!(read_sexp("#uxabcd_1234").unwrap(), Sexp::int(2882343476));
        assert_eq!(read_sexp("#UXABCD_1234").unwrap(), Sexp::int(2882343476));
        assert_eq!(read_sexp("#u1_000_000").unwrap(), Sexp::int(1_000_000));
        assert_eq!(read_sexp("#ub1010_1010").unwrap(), Sexp::int(170));
        assert_eq!(read_sexp("#uo7_7").unwrap(), Sexp::int(63));
    }

    #[test]
    fn radix_prefixes() {
        assert_eq!(read_sexp("#b101").unwrap(), Sexp::int(5));
        assert_eq!(read_sexp("#o17").unwrap(), Sexp::int(15));
        assert_eq!(read_sexp("#xff").unwrap(), Sexp::int(255));
        assert_eq!(read_sexp("#x-A").unwrap(), Sexp::int(-10));
        assert_eq!(
            read_sexp("#x1/10").unwrap(),
            Sexp::Rational(BigRational::new(1.into(), 16.into()))
        );
    }

    #[test]
    fn decimal_forms() {
        assert_eq!(read_sexp("10.").unwrap(), Sexp::int(10));
        assert_eq!(read_sexp("-10.").unwrap(), Sexp::int(-10));
        assert_eq!(read_sexp("+7").unwrap(), Sexp::int(7));
        assert_eq!(
            read_sexp("4/6").unwrap(),
            Sexp::Rational(BigRational::new(2.into(), 3.into()))
        );
        assert_eq!(read_sexp("6/3").unwrap(), Sexp::int(2));
        assert_eq!(read_sexp("1+").unwrap(), Sexp::sym("1+"));
        assert_eq!(read_sexp("-").unwrap(), Sexp::sym("-"));
        assert_eq!(read_sexp("12_3").unwrap(), Sexp::sym("12_3"));
    }

    #[test]
    fn quote_and_dotted() {
        assert_eq!(read_sexp("'foo").unwrap(), Sexp::quote(Sexp::sym("FOO")));
        assert_eq!(
            read_sexp("(:d append . 3)").unwrap(),
            Sexp::Dotted(
                vec![Sexp::sym(":D"), Sexp::sym("APPEND")],
                Box::new(Sexp::int(3))
            )
        );
        assert_eq!(
            read_sexp("(a . (b))").unwrap(),
            Sexp::List(vec![Sexp::sym("A"), Sexp::sym("B")])
        );
    }

    #[test]
    fn bars_and_strings() {
        assert_eq!(read_sexp("|foo bar|").unwrap(), Sexp::sym("foo bar"));
        assert_eq!(read_sexp("|12|").unwrap(), Sexp::sym("12"));
        assert_eq!(read_sexp(r#""a\"b""#).unwrap(), Sexp::Str("a\"b".into()));
    }

    #[test]
    fn comments_are_skipped() {
        let forms = read_all("; header\n(a) ; trailing\n\n(b)\n").unwrap();
        assert_eq!(forms.len(), 2);
        assert_eq!(forms[1].0.line, 4);
    }

    #[test]
    fn malformed_underscores() {
        assert!(matches!(
            kind("#ux_ab"),
            ParseErrorKind::MalformedNumeral(_)
        ));
        assert!(matches!(
            kind("#uxab_"),
            ParseErrorKind::MalformedNumeral(_)
        ));
        assert!(matches!(
            kind("#uxa__b"),
            ParseErrorKind::MalformedNumeral(_)
        ));
        // `_` only allowed under #u
        assert!(matches!(
            kind("#xab_cd"),
            ParseErrorKind::MalformedNumeral(_)
        ));
        assert!(matches!(kind("#b102"), ParseErrorKind::MalformedNumeral(_)));
        assert!(matches!(kind("1/0"), ParseErrorKind::MalformedNumeral(_)));
    }

    #[test]
    fn structural_errors_carry_position() {
        let e = read_sexp("(a b").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedEof);
        assert_eq!(e.pos.offset, 0);
        let e = read_sexp(")").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnbalancedClose);
        let e = read_sexp("(a\n  `b)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::IllegalChar('`'));
        assert_eq!((e.pos.line, e.pos.column), (2, 3));
        assert_eq!(kind("(a) b"), ParseErrorKind::TrailingInput);
        assert_eq!(kind("(. a)"), ParseErrorKind::MisplacedDot);
        assert_eq!(kind("(a . b c)"), ParseErrorKind::MisplacedDot);
        assert_eq!(kind("#q1"), ParseErrorKind::IllegalChar('#'));
    }
}
