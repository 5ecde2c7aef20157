//! Tokenizer for TPiet-QL. Keywords are case-insensitive; identifiers keep
//! their case. Bracketed names (`[Parcel Sales]`) may contain spaces; a
//! bracket whose content is a comma-separated pair of instants is an interval
//! literal (`[51,100]`, `[1/1/2009,12/31/2009]`).

use std::fmt;

use crate::time::TimeLiteral;
use crate::value::CmpOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kw {
    Select,
    Gis,
    Cube,
    Snapshot,
    Current,
    From,
    Overlap,
    Where,
    And,
    Or,
    Not,
    In,
    On,
    Rows,
    Columns,
    Slice,
    Now,
}

fn keyword(word: &str) -> Option<Kw> {
    match word.to_ascii_lowercase().as_str() {
        "select" => Some(Kw::Select),
        "gis" => Some(Kw::Gis),
        "cube" => Some(Kw::Cube),
        "snapshot" => Some(Kw::Snapshot),
        "current" => Some(Kw::Current),
        "from" => Some(Kw::From),
        "overlap" => Some(Kw::Overlap),
        "where" => Some(Kw::Where),
        "and" => Some(Kw::And),
        "or" => Some(Kw::Or),
        "not" => Some(Kw::Not),
        "in" => Some(Kw::In),
        "on" => Some(Kw::On),
        "rows" => Some(Kw::Rows),
        "columns" => Some(Kw::Columns),
        "slice" => Some(Kw::Slice),
        "now" => Some(Kw::Now),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokKind {
    Kw(Kw),
    Ident(String),
    /// `[name]` — one segment of a bracketed path.
    Bracket(String),
    /// `[a,b]` — an interval literal.
    Interval(TimeLiteral, TimeLiteral),
    Int(u64),
    Num(f64),
    Date {
        day: u32,
        month: u32,
        year: i64,
    },
    Str(String),
    Cmp(CmpOp),
    LParen,
    RParen,
    Comma,
    Dot,
    Semicolon,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Kw(k) => write!(f, "{k:?}"),
            TokKind::Ident(s) => write!(f, "identifier '{s}'"),
            TokKind::Bracket(s) => write!(f, "[{s}]"),
            TokKind::Interval(..) => write!(f, "interval literal"),
            TokKind::Int(n) => write!(f, "{n}"),
            TokKind::Num(n) => write!(f, "{n}"),
            TokKind::Date { day, month, year } => write!(f, "{day}/{month}/{year}"),
            TokKind::Str(s) => write!(f, "\"{s}\""),
            TokKind::Cmp(op) => write!(f, "{op}"),
            TokKind::LParen => write!(f, "("),
            TokKind::RParen => write!(f, ")"),
            TokKind::Comma => write!(f, ","),
            TokKind::Dot => write!(f, "."),
            TokKind::Semicolon => write!(f, ";"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokKind,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    text: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Lexer<'a> {
        Lexer {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            text,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<char> {
        self.chars.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, msg: impl Into<String>) -> LexError {
        LexError {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn number(&mut self) -> Result<TokKind, LexError> {
        let mut text = String::new();
        if self.peek() == Some('-') {
            text.push(self.bump().unwrap());
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            text.push(self.bump().unwrap());
        }
        // A slash continues into a date literal d/m/yyyy.
        if self.peek() == Some('/') && !text.starts_with('-') {
            self.bump();
            let mut mid = String::new();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                mid.push(self.bump().unwrap());
            }
            if self.peek() != Some('/') {
                return Err(self.err("expected a second '/' in date literal"));
            }
            self.bump();
            let mut year = String::new();
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                year.push(self.bump().unwrap());
            }
            if mid.is_empty() || year.is_empty() {
                return Err(self.err("incomplete date literal"));
            }
            return Ok(TokKind::Date {
                day: text.parse().map_err(|_| self.err("date field too large"))?,
                month: mid.parse().map_err(|_| self.err("date field too large"))?,
                year: year.parse().map_err(|_| self.err("date field too large"))?,
            });
        }
        let mut is_float = false;
        if self.peek() == Some('.') && matches!(self.peek2(), Some(c) if c.is_ascii_digit()) {
            is_float = true;
            text.push(self.bump().unwrap());
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                text.push(self.bump().unwrap());
            }
        }
        if is_float || text.starts_with('-') {
            text.parse::<f64>()
                .map(TokKind::Num)
                .map_err(|_| self.err("bad number"))
        } else {
            text.parse::<u64>()
                .map(TokKind::Int)
                .map_err(|_| self.err("integer too large"))
        }
    }

    fn bracket(&mut self) -> Result<TokKind, LexError> {
        self.bump(); // '['
        let mut content = String::new();
        loop {
            match self.peek() {
                Some(']') => {
                    self.bump();
                    break;
                }
                Some(_) => content.push(self.bump().unwrap()),
                None => return Err(self.err("unterminated '['")),
            }
        }
        if let Some((a, b)) = content.split_once(',') {
            if let (Some(lo), Some(hi)) = (parse_instant_text(a), parse_instant_text(b)) {
                return Ok(TokKind::Interval(lo, hi));
            }
        }
        Ok(TokKind::Bracket(content.trim().to_string()))
    }

    fn next_token(&mut self) -> Result<Option<Token>, LexError> {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let kind = match c {
            '(' => {
                self.bump();
                TokKind::LParen
            }
            ')' => {
                self.bump();
                TokKind::RParen
            }
            ',' => {
                self.bump();
                TokKind::Comma
            }
            '.' => {
                self.bump();
                TokKind::Dot
            }
            ';' => {
                self.bump();
                TokKind::Semicolon
            }
            '[' => self.bracket()?,
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.peek() {
                        Some('"') => {
                            self.bump();
                            break;
                        }
                        Some(_) => s.push(self.bump().unwrap()),
                        None => return Err(self.err("unterminated string literal")),
                    }
                }
                TokKind::Str(s)
            }
            '=' => {
                self.bump();
                TokKind::Cmp(CmpOp::Eq)
            }
            '<' => {
                self.bump();
                match self.peek() {
                    Some('=') => {
                        self.bump();
                        TokKind::Cmp(CmpOp::Le)
                    }
                    Some('>') => {
                        self.bump();
                        TokKind::Cmp(CmpOp::Ne)
                    }
                    _ => TokKind::Cmp(CmpOp::Lt),
                }
            }
            '>' => {
                self.bump();
                if self.peek() == Some('=') {
                    self.bump();
                    TokKind::Cmp(CmpOp::Ge)
                } else {
                    TokKind::Cmp(CmpOp::Gt)
                }
            }
            '!' if self.peek2() == Some('=') => {
                self.bump();
                self.bump();
                TokKind::Cmp(CmpOp::Ne)
            }
            c if c.is_ascii_digit() => self.number()?,
            '-' if matches!(self.peek2(), Some(d) if d.is_ascii_digit()) => self.number()?,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    word.push(self.bump().unwrap());
                }
                match keyword(&word) {
                    Some(kw) => TokKind::Kw(kw),
                    None => TokKind::Ident(word),
                }
            }
            other => {
                return Err(self.err(format!("illegal character '{other}'")));
            }
        };
        let _ = self.text;
        Ok(Some(Token { kind, line, col }))
    }
}

/// Instant syntax inside an interval literal: integer, date, or Now.
fn parse_instant_text(s: &str) -> Option<TimeLiteral> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("now") {
        return Some(TimeLiteral::Now);
    }
    if let Ok(n) = s.parse::<u64>() {
        return Some(TimeLiteral::Number(n));
    }
    let parts: Vec<&str> = s.split('/').collect();
    if parts.len() == 3 {
        return Some(TimeLiteral::Date {
            day: parts[0].trim().parse().ok()?,
            month: parts[1].trim().parse().ok()?,
            year: parts[2].trim().parse().ok()?,
        });
    }
    None
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        tokens.push(tok);
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokKind> {
        tokenize(text)
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    #[test]
    fn keywords_and_identifiers() {
        assert_eq!(
            kinds("SELECT GIS l.id"),
            vec![
                TokKind::Kw(Kw::Select),
                TokKind::Kw(Kw::Gis),
                TokKind::Ident("l".into()),
                TokKind::Dot,
                TokKind::Ident("id".into()),
            ]
        );
        assert_eq!(
            kinds("select"),
            kinds("SELECT"),
            "keywords case-insensitive"
        );
        assert_ne!(kinds("Land"), kinds("land"), "identifiers keep case");
    }

    #[test]
    fn bracket_paths() {
        assert_eq!(
            kinds("[Measures].[Parcel Sales]"),
            vec![
                TokKind::Bracket("Measures".into()),
                TokKind::Dot,
                TokKind::Bracket("Parcel Sales".into()),
            ]
        );
        assert_eq!(kinds("[2009]"), vec![TokKind::Bracket("2009".into())]);
    }

    #[test]
    fn interval_literals() {
        assert_eq!(
            kinds("COVERS(r,[1/1/2009,12/31/2009])"),
            vec![
                TokKind::Ident("COVERS".into()),
                TokKind::LParen,
                TokKind::Ident("r".into()),
                TokKind::Comma,
                TokKind::Interval(
                    TimeLiteral::Date {
                        day: 1,
                        month: 1,
                        year: 2009
                    },
                    TimeLiteral::Date {
                        day: 12,
                        month: 31,
                        year: 2009
                    }
                ),
                TokKind::RParen,
            ]
        );
        assert_eq!(
            kinds("[51,Now]"),
            vec![TokKind::Interval(TimeLiteral::Number(51), TimeLiteral::Now)]
        );
    }

    #[test]
    fn numbers_and_strings() {
        assert_eq!(kinds("5000"), vec![TokKind::Int(5000)]);
        assert_eq!(kinds("99.5"), vec![TokKind::Num(99.5)]);
        assert_eq!(kinds("-3"), vec![TokKind::Num(-3.0)]);
        assert_eq!(kinds("\"Uruguay\""), vec![TokKind::Str("Uruguay".into())]);
        assert_eq!(
            kinds("<= >= <> != < > ="),
            vec![
                TokKind::Cmp(CmpOp::Le),
                TokKind::Cmp(CmpOp::Ge),
                TokKind::Cmp(CmpOp::Ne),
                TokKind::Cmp(CmpOp::Ne),
                TokKind::Cmp(CmpOp::Lt),
                TokKind::Cmp(CmpOp::Gt),
                TokKind::Cmp(CmpOp::Eq),
            ]
        );
    }

    #[test]
    fn errors_carry_positions() {
        let err = tokenize("SELECT GIS x\n  WHERE a ~ b").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.col > 0);
        assert!(tokenize("\"unterminated").is_err());
    }
}
