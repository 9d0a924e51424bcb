//! Functional query language over asset tags, hostnames and addresses.
//!
//! ```text
//! expr   := term (OR term)*
//! term   := factor (AND factor)*
//! factor := NOT factor | "(" expr ")" | atom
//! atom   := ("geo" | "tag" | "host" | "ip") ":" value
//! ```
//!
//! Keywords are case-insensitive. `ip` takes a CIDR (bare or quoted; a bare
//! address means /32); the other atoms take a quoted string with backslash
//! escapes. [`QueryExpr`]'s `Display` prints the canonical form, which parses
//! back to the same tree.

use std::collections::BTreeSet;
use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use ipnet::Ipv4Net;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::ids::AssetId;
use crate::topology::{Asset, Topology};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryParseError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("invalid CIDR {text:?} at {position}")]
    InvalidCidr { position: usize, text: String },
}

impl QueryParseError {
    pub fn position(&self) -> usize {
        match self {
            Self::Syntax { position, .. } | Self::InvalidCidr { position, .. } => *position,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    Geo(String),
    Tag(String),
    Host(String),
    Ip(Ipv4Net),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryExpr {
    Atom(Atom),
    Not(Box<QueryExpr>),
    And(Box<QueryExpr>, Box<QueryExpr>),
    Or(Box<QueryExpr>, Box<QueryExpr>),
}

impl QueryExpr {
    pub fn not(e: QueryExpr) -> Self {
        Self::Not(Box::new(e))
    }

    pub fn and(a: QueryExpr, b: QueryExpr) -> Self {
        Self::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: QueryExpr, b: QueryExpr) -> Self {
        Self::Or(Box::new(a), Box::new(b))
    }
}

/// Case-insensitive glob over `*` and `?`.
pub fn glob_match(pattern: &str, text: &str) -> bool {
    let p: Vec<char> = pattern.to_lowercase().chars().collect();
    let t: Vec<char> = text.to_lowercase().chars().collect();
    let (mut pi, mut ti) = (0, 0);
    let mut star: Option<(usize, usize)> = None;
    while ti < t.len() {
        if pi < p.len() && (p[pi] == '?' || p[pi] == t[ti]) {
            pi += 1;
            ti += 1;
        } else if pi < p.len() && p[pi] == '*' {
            star = Some((pi, ti));
            pi += 1;
        } else if let Some((sp, st)) = star {
            pi = sp + 1;
            ti = st + 1;
            star = Some((sp, st + 1));
        } else {
            return false;
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}

fn tag_set_contains(tags: &BTreeSet<String>, value: &str) -> bool {
    let value = value.to_lowercase();
    tags.iter().any(|t| t.to_lowercase() == value)
}

impl Atom {
    pub fn matches(&self, asset: &Asset) -> bool {
        match self {
            Atom::Geo(v) => tag_set_contains(&asset.geo_tags, v),
            Atom::Tag(v) => tag_set_contains(&asset.function_tags, v),
            Atom::Host(g) => glob_match(g, &asset.hostname),
            Atom::Ip(net) => asset.addresses.iter().any(|a| net.contains(a)),
        }
    }
}

/// Assets satisfying `expr`.
pub fn evaluate_query(expr: &QueryExpr, topology: &Topology) -> BTreeSet<AssetId> {
    let assets: Vec<&Asset> = topology.assets().collect();
    let mask = evaluate_mask(expr, &assets);
    assets.iter().zip(mask).filter(|(_, hit)| *hit).map(|(a, _)| a.id.clone()).collect()
}

// One flag per asset, in `assets` order.
fn evaluate_mask(expr: &QueryExpr, assets: &[&Asset]) -> Vec<bool> {
    match expr {
        QueryExpr::Atom(atom) => assets.iter().map(|a| atom.matches(a)).collect(),
        QueryExpr::Not(inner) => {
            let mut m = evaluate_mask(inner, assets);
            m.iter_mut().for_each(|b| *b = !*b);
            m
        }
        QueryExpr::And(a, b) => {
            let mut left = evaluate_mask(a, assets);
            if left.iter().any(|&x| x) {
                let right = evaluate_mask(b, assets);
                left.iter_mut().zip(right).for_each(|(l, r)| *l &= r);
            }
            left
        }
        QueryExpr::Or(a, b) => {
            let mut left = evaluate_mask(a, assets);
            let right = evaluate_mask(b, assets);
            left.iter_mut().zip(right).for_each(|(l, r)| *l |= r);
            left
        }
    }
}

fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        if c == '"' || c == '\\' {
            f.write_str("\\")?;
        }
        write!(f, "{c}")?;
    }
    f.write_str("\"")
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Geo(v) => {
                f.write_str("geo:")?;
                write_quoted(f, v)
            }
            Atom::Tag(v) => {
                f.write_str("tag:")?;
                write_quoted(f, v)
            }
            Atom::Host(v) => {
                f.write_str("host:")?;
                write_quoted(f, v)
            }
            Atom::Ip(net) => write!(f, "ip:{net}"),
        }
    }
}

fn write_grouped(f: &mut fmt::Formatter<'_>, e: &QueryExpr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for QueryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use QueryExpr::*;
        match self {
            Atom(a) => write!(f, "{a}"),
            Not(e) => {
                f.write_str("NOT ")?;
                write_grouped(f, e, matches!(**e, And(..) | Or(..)))
            }
            // binary operators are left-associative; AND binds tighter
            And(a, b) => {
                write_grouped(f, a, matches!(**a, Or(..)))?;
                f.write_str(" AND ")?;
                write_grouped(f, b, matches!(**b, Or(..) | And(..)))
            }
            Or(a, b) => {
                write!(f, "{a}")?;
                f.write_str(" OR ")?;
                write_grouped(f, b, matches!(**b, Or(..)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Colon,
    Word(String),
    Str(String),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn syntax(&self, position: usize, message: impl Into<String>) -> QueryParseError {
        QueryParseError::Syntax {
            position,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>, QueryParseError> {
        let rest = &self.src[self.pos..];
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
        let start = self.pos;
        let mut chars = trimmed.chars();
        let Some(c) = chars.next() else {
            return Ok(None);
        };
        let tok = match c {
            '(' => {
                self.pos += 1;
                Tok::LParen
            }
            ')' => {
                self.pos += 1;
                Tok::RParen
            }
            ':' => {
                self.pos += 1;
                Tok::Colon
            }
            '"' => {
                let mut out = String::new();
                let mut consumed = 1;
                let mut escaped = false;
                let mut closed = false;
                for ch in chars {
                    consumed += ch.len_utf8();
                    if escaped {
                        out.push(ch);
                        escaped = false;
                    } else if ch == '\\' {
                        escaped = true;
                    } else if ch == '"' {
                        closed = true;
                        break;
                    } else {
                        out.push(ch);
                    }
                }
                if !closed {
                    return Err(self.syntax(start, "unterminated string"));
                }
                self.pos += consumed;
                Tok::Str(out)
            }
            _ => {
                let len = trimmed
                    .find(|ch: char| ch.is_whitespace() || matches!(ch, '(' | ')' | ':' | '"'))
                    .unwrap_or(trimmed.len());
                self.pos += len;
                Tok::Word(trimmed[..len].to_owned())
            }
        };
        Ok(Some((start, tok)))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    peeked: Option<(usize, Tok)>,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<Option<&(usize, Tok)>, QueryParseError> {
        if self.peeked.is_none() {
            self.peeked = self.lexer.next()?;
        }
        Ok(self.peeked.as_ref())
    }

    fn bump(&mut self) -> Result<Option<(usize, Tok)>, QueryParseError> {
        self.peek()?;
        Ok(self.peeked.take())
    }

    fn end_pos(&self) -> usize {
        self.lexer.src.len()
    }

    fn at_keyword(&mut self, kw: &str) -> Result<bool, QueryParseError> {
        Ok(matches!(self.peek()?, Some((_, Tok::Word(w))) if w.eq_ignore_ascii_case(kw)))
    }

    fn expr(&mut self) -> Result<QueryExpr, QueryParseError> {
        let mut left = self.term()?;
        while self.at_keyword("or")? {
            self.bump()?;
            let right = self.term()?;
            left = QueryExpr::or(left, right);
        }
        Ok(left)
    }

    fn term(&mut self) -> Result<QueryExpr, QueryParseError> {
        let mut left = self.factor()?;
        while self.at_keyword("and")? {
            self.bump()?;
            let right = self.factor()?;
            left = QueryExpr::and(left, right);
        }
        Ok(left)
    }

    fn factor(&mut self) -> Result<QueryExpr, QueryParseError> {
        if self.at_keyword("not")? {
            self.bump()?;
            return Ok(QueryExpr::not(self.factor()?));
        }
        match self.bump()? {
            Some((_, Tok::LParen)) => {
                let inner = self.expr()?;
                match self.bump()? {
                    Some((_, Tok::RParen)) => Ok(inner),
                    Some((pos, _)) => Err(self.lexer.syntax(pos, "expected ')'")),
                    None => Err(self.lexer.syntax(self.end_pos(), "expected ')'")),
                }
            }
            Some((pos, Tok::Word(field))) => self.atom(pos, &field),
            Some((pos, tok)) => Err(self.lexer.syntax(pos, format!("unexpected {tok:?}"))),
            None => Err(self.lexer.syntax(self.end_pos(), "unexpected end of query")),
        }
    }

    fn atom(&mut self, field_pos: usize, field: &str) -> Result<QueryExpr, QueryParseError> {
        let field = field.to_ascii_lowercase();
        if !matches!(field.as_str(), "geo" | "tag" | "host" | "ip") {
            return Err(self
                .lexer
                .syntax(field_pos, format!("unknown field {field:?}")));
        }
        match self.bump()? {
            Some((_, Tok::Colon)) => {}
            Some((pos, _)) => return Err(self.lexer.syntax(pos, "expected ':'")),
            None => return Err(self.lexer.syntax(self.end_pos(), "expected ':'")),
        }
        let (pos, value, quoted) = match self.bump()? {
            Some((pos, Tok::Str(s))) => (pos, s, true),
            Some((pos, Tok::Word(w))) => (pos, w, false),
            Some((pos, _)) => return Err(self.lexer.syntax(pos, "expected value")),
            None => return Err(self.lexer.syntax(self.end_pos(), "expected value")),
        };
        let atom = match field.as_str() {
            "ip" => Atom::Ip(parse_cidr(&value).ok_or(QueryParseError::InvalidCidr {
                position: pos,
                text: value,
            })?),
            _ if !quoted => {
                return Err(self.lexer.syntax(pos, "expected quoted string"));
            }
            "geo" => Atom::Geo(value),
            "tag" => Atom::Tag(value),
            _ => Atom::Host(value),
        };
        Ok(QueryExpr::Atom(atom))
    }
}

fn parse_cidr(text: &str) -> Option<Ipv4Net> {
    if text.contains('/') {
        Ipv4Net::from_str(text).ok()
    } else {
        Ipv4Addr::from_str(text).ok().map(Ipv4Net::from)
    }
}

/// Parses query text into an expression tree.
pub fn parse_query(text: &str) -> Result<QueryExpr, QueryParseError> {
    let mut parser = Parser {
        lexer: Lexer { src: text, pos: 0 },
        peeked: None,
    };
    let expr = parser.expr()?;
    match parser.bump()? {
        None => Ok(expr),
        Some((pos, tok)) => Err(parser
            .lexer
            .syntax(pos, format!("unexpected trailing {tok:?}"))),
    }
}

impl FromStr for QueryExpr {
    type Err = QueryParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_query(s)
    }
}

impl Serialize for QueryExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for QueryExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_query(&text).map_err(serde::de::Error::custom)
    }
}
