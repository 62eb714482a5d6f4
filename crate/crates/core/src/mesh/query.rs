use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TermClause {
    pub descriptor: String,
    pub explode: bool,
    pub major_only: bool,
}

impl TermClause {
    pub fn new(descriptor: impl Into<String>, explode: bool, major_only: bool) -> Self {
        TermClause {
            descriptor: descriptor.into(),
            explode,
            major_only,
        }
    }

    fn tag(&self) -> &'static str {
        match (self.major_only, self.explode) {
            (false, true) => "MH",
            (false, false) => "Mesh:NoExp",
            (true, true) => "MAJR",
            (true, false) => "MAJR:NoExp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Date {
    pub year: i32,
    pub month: u32,
    pub day: u32,
}

impl Date {
    pub fn new(year: i32, month: u32, day: u32) -> Option<Date> {
        let leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        let days = match month {
            1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
            4 | 6 | 9 | 11 => 30,
            2 if leap => 29,
            2 => 28,
            _ => return None,
        };
        (1..=days).contains(&day).then_some(Date { year, month, day })
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}/{:02}/{:02}", self.year, self.month, self.day)
    }
}

/// Publication date range; matches on calendar years only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DateRange {
    pub from: Date,
    pub to: Date,
}

impl DateRange {
    pub fn contains_year(&self, year: i32) -> bool {
        self.from.year <= year && year <= self.to.year
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryExpr {
    Term(TermClause),
    Date(DateRange),
    And(Vec<QueryExpr>),
    Or(Vec<QueryExpr>),
}

impl QueryExpr {
    /// Every term clause, depth first.
    pub fn terms(&self) -> Vec<&TermClause> {
        let mut out = Vec::new();
        self.collect_terms(&mut out);
        out
    }

    fn collect_terms<'a>(&'a self, out: &mut Vec<&'a TermClause>) {
        match self {
            QueryExpr::Term(t) => out.push(t),
            QueryExpr::Date(_) => {}
            QueryExpr::And(xs) | QueryExpr::Or(xs) => xs.iter().for_each(|x| x.collect_terms(out)),
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, parent_is_and: bool) -> fmt::Result {
        let needs_parens = match self {
            QueryExpr::Or(_) => parent_is_and,
            QueryExpr::And(_) => false,
            _ => false,
        };
        if needs_parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for QueryExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryExpr::Term(t) => write!(f, "\"{}\"[{}]", t.descriptor, t.tag()),
            QueryExpr::Date(d) => write!(f, "{}:{}[dp]", d.from, d.to),
            QueryExpr::And(xs) | QueryExpr::Or(xs) => {
                let is_and = matches!(self, QueryExpr::And(_));
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(if is_and { " AND " } else { " OR " })?;
                    }
                    x.fmt_child(f, is_and)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    And,
    Or,
    Term(TermClause),
    Date(DateRange),
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::QuerySyntax {
        position,
        message: message.into(),
    }
}

fn term_flags(tag: &str) -> Option<(bool, bool)> {
    // (explode, major_only)
    match tag.trim().to_ascii_lowercase().as_str() {
        "mh" | "mesh" | "mesh terms" => Some((true, false)),
        "mesh:noexp" | "mh:noexp" | "mesh terms:noexp" => Some((false, false)),
        "majr" | "mesh major topic" => Some((true, true)),
        "majr:noexp" | "mesh major topic:noexp" => Some((false, true)),
        _ => None,
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn read_tag(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() != Some('[') {
            return Err(syntax(start, "expected field tag like [MH]"));
        }
        let rest = &self.src[start + 1..];
        let close = rest.find(']').ok_or_else(|| syntax(start, "unterminated field tag"))?;
        self.pos = start + 1 + close + 1;
        Ok((start, &rest[..close]))
    }

    fn read_date(&mut self, start: usize) -> Result<Date> {
        let s = self
            .src
            .get(self.pos..self.pos + 10)
            .ok_or_else(|| syntax(start, "malformed date"))?;
        let b = s.as_bytes();
        let digits = |r: std::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
        if !(digits(0..4) && b[4] == b'/' && digits(5..7) && b[7] == b'/' && digits(8..10)) {
            return Err(syntax(self.pos, "malformed date, expected YYYY/MM/DD"));
        }
        let year: i32 = s[0..4].parse().unwrap();
        let month: u32 = s[5..7].parse().unwrap();
        let day: u32 = s[8..10].parse().unwrap();
        let d = Date::new(year, month, day).ok_or_else(|| syntax(self.pos, format!("invalid calendar date {s}")))?;
        self.pos += 10;
        Ok(d)
    }

    fn next(&mut self) -> Result<Option<(usize, Tok)>> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.peek() else { return Ok(None) };
        let tok = match c {
            '(' => {
                self.pos += 1;
                Tok::LParen
            }
            ')' => {
                self.pos += 1;
                Tok::RParen
            }
            '"' => {
                let rest = &self.src[start + 1..];
                let close = rest.find('"').ok_or_else(|| syntax(start, "unbalanced quote"))?;
                let name = rest[..close].trim();
                if name.is_empty() {
                    return Err(syntax(start, "empty descriptor name"));
                }
                self.pos = start + 1 + close + 1;
                let (tag_pos, tag) = self.read_tag()?;
                let (explode, major_only) =
                    term_flags(tag).ok_or_else(|| syntax(tag_pos, format!("unknown field tag [{tag}]")))?;
                Tok::Term(TermClause::new(name, explode, major_only))
            }
            c if c.is_ascii_digit() => {
                let from = self.read_date(start)?;
                if self.peek() != Some(':') {
                    return Err(syntax(self.pos, "expected ':' in date range"));
                }
                self.pos += 1;
                let to = self.read_date(start)?;
                let (tag_pos, tag) = self.read_tag()?;
                if !matches!(tag.to_ascii_lowercase().as_str(), "dp" | "pdat") {
                    return Err(syntax(tag_pos, format!("unknown date tag [{tag}]")));
                }
                if from > to {
                    return Err(syntax(start, "date range start after end"));
                }
                Tok::Date(DateRange { from, to })
            }
            c if c.is_alphabetic() => {
                let word_len = self.src[start..]
                    .find(|ch: char| !ch.is_alphanumeric())
                    .unwrap_or(self.src.len() - start);
                let word = &self.src[start..start + word_len];
                self.pos += word_len;
                match word.to_ascii_uppercase().as_str() {
                    "AND" => Tok::And,
                    "OR" => Tok::Or,
                    _ => return Err(syntax(start, format!("unexpected word \"{word}\""))),
                }
            }
            other => return Err(syntax(start, format!("unexpected character '{other}'"))),
        };
        Ok(Some((start, tok)))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn or_expr(&mut self) -> Result<QueryExpr> {
        let mut items = vec![self.and_expr()?];
        while self.peek() == Some(&Tok::Or) {
            self.i += 1;
            items.push(self.and_expr()?);
        }
        Ok(flatten(items, false))
    }

    fn and_expr(&mut self) -> Result<QueryExpr> {
        let mut items = vec![self.primary()?];
        while self.peek() == Some(&Tok::And) {
            self.i += 1;
            items.push(self.primary()?);
        }
        Ok(flatten(items, true))
    }

    fn primary(&mut self) -> Result<QueryExpr> {
        let pos = self.pos();
        match self.toks.get(self.i).map(|(_, t)| t.clone()) {
            Some(Tok::LParen) => {
                self.i += 1;
                let e = self.or_expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(syntax(
                        self.pos(),
                        format!("unbalanced parenthesis opened at byte {pos}"),
                    ));
                }
                self.i += 1;
                Ok(e)
            }
            Some(Tok::Term(t)) => {
                self.i += 1;
                Ok(QueryExpr::Term(t))
            }
            Some(Tok::Date(d)) => {
                self.i += 1;
                Ok(QueryExpr::Date(d))
            }
            Some(Tok::RParen) => Err(syntax(pos, "unbalanced parenthesis")),
            Some(_) => Err(syntax(pos, "expected a term, date range or '('")),
            None => Err(syntax(pos, "unexpected end of query")),
        }
    }
}

/// Collapses single-item lists and splices same-kind children.
fn flatten(items: Vec<QueryExpr>, is_and: bool) -> QueryExpr {
    if items.len() == 1 {
        return items.into_iter().next().unwrap();
    }
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        match (item, is_and) {
            (QueryExpr::And(xs), true) | (QueryExpr::Or(xs), false) => out.extend(xs),
            (other, _) => out.push(other),
        }
    }
    if is_and {
        QueryExpr::And(out)
    } else {
        QueryExpr::Or(out)
    }
}

/// Parses a query string. AND binds tighter than OR.
///
/// Term tags: `[MH]` (exploded), `[Mesh:NoExp]`, `[MAJR]` (major topic,
/// exploded), `[MAJR:NoExp]`. Dates: `YYYY/MM/DD:YYYY/MM/DD[dp]`.
pub fn parse_query(text: &str) -> Result<QueryExpr> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    if toks.is_empty() {
        return Err(syntax(0, "empty query"));
    }
    let mut parser = Parser {
        toks,
        i: 0,
        end: text.len(),
    };
    let expr = parser.or_expr()?;
    if parser.i < parser.toks.len() {
        let msg = match parser.peek() {
            Some(Tok::RParen) => "unbalanced parenthesis",
            _ => "expected AND or OR",
        };
        return Err(syntax(parser.pos(), msg));
    }
    Ok(expr)
}
