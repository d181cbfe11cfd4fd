//! Line/token cursor shared by the parsers.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

pub(crate) struct Line<'a> {
    pub no: usize,
    pub toks: Vec<(usize, &'a str)>,
    end_col: usize,
}

impl<'a> Line<'a> {
    fn new(no: usize, text: &'a str) -> Line<'a> {
        let mut toks = Vec::new();
        let mut start = None;
        for (i, c) in text.char_indices() {
            match (c.is_whitespace(), start) {
                (true, Some(s)) => {
                    toks.push((s, &text[s..i]));
                    start = None;
                }
                (false, None) => start = Some(i),
                _ => {}
            }
        }
        if let Some(s) = start {
            toks.push((s, &text[s..]));
        }
        let col = |byte: usize| text[..byte].chars().count() + 1;
        Line {
            no,
            toks: toks.into_iter().map(|(b, t)| (col(b), t)).collect(),
            end_col: text.chars().count() + 1,
        }
    }

    pub fn err(&self, i: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.no,
            column: self.toks.get(i).map_or(self.end_col, |t| t.0),
            message: message.into(),
        }
    }

    pub fn keyword(&self) -> &'a str {
        self.toks[0].1
    }

    pub fn tok(&self, i: usize) -> Result<&'a str, ParseError> {
        self.toks.get(i).map(|t| t.1).ok_or_else(|| self.err(i, "unexpected end of line"))
    }

    pub fn parse<T: FromStr>(&self, i: usize, what: &str) -> Result<T, ParseError> {
        let t = self.tok(i)?;
        t.parse().map_err(|_| self.err(i, format!("expected {what}, found `{t}`")))
    }

    pub fn len(&self) -> usize {
        self.toks.len()
    }

    pub fn expect_len(&self, n: usize) -> Result<(), ParseError> {
        if self.toks.len() > n {
            return Err(self.err(n, format!("unexpected `{}`", self.toks[n].1)));
        }
        if self.toks.len() < n {
            return Err(self.err(self.toks.len(), "unexpected end of line"));
        }
        Ok(())
    }

    /// `[ a=b c=d ]` starting at token `i`; returns pairs and the index
    /// after the closing bracket.
    pub fn bracket(&self, i: usize) -> Result<(Vec<(usize, &'a str, &'a str)>, usize), ParseError> {
        if self.tok(i)? != "[" {
            return Err(self.err(i, "expected `[`"));
        }
        let mut out = Vec::new();
        let mut j = i + 1;
        loop {
            let t = self.tok(j)?;
            if t == "]" {
                return Ok((out, j + 1));
            }
            let (a, b) = t
                .split_once('=')
                .ok_or_else(|| self.err(j, format!("expected `name=image`, found `{t}`")))?;
            out.push((j, a, b));
            j += 1;
        }
    }
}

/// Non-blank, non-comment lines.
pub(crate) struct Lines<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    last_line: usize,
}

impl<'a> Lines<'a> {
    pub fn new(text: &'a str) -> Lines<'a> {
        let mut last_line = 1;
        let lines = text
            .lines()
            .enumerate()
            .inspect(|(i, _)| last_line = i + 1)
            .map(|(i, l)| Line::new(i + 1, l))
            .filter(|l| !l.toks.is_empty() && !l.keyword().starts_with('#'))
            .collect();
        Lines { lines, pos: 0, last_line }
    }

    pub fn peek(&self) -> Option<&Line<'a>> {
        self.lines.get(self.pos)
    }

    pub fn next(&mut self) -> Result<&Line<'a>, ParseError> {
        let eof = ParseError {
            line: self.last_line,
            column: 1,
            message: "unexpected end of input".into(),
        };
        let l = self.lines.get(self.pos).ok_or(eof)?;
        self.pos += 1;
        Ok(l)
    }

    /// Next line, which must start with `kw`.
    pub fn expect(&mut self, kw: &str) -> Result<&Line<'a>, ParseError> {
        let l = self.next()?;
        if l.keyword() != kw {
            return Err(l.err(0, format!("expected `{kw}`, found `{}`", l.keyword())));
        }
        Ok(l)
    }

    pub fn header(&mut self, name: &str, version: u32) -> Result<(), ParseError> {
        let l = self.expect(name)?;
        let v: u32 = l.parse(1, "format version")?;
        if v != version {
            return Err(l.err(1, format!("unsupported {name} version {v}")));
        }
        l.expect_len(2)
    }

    pub fn finish(&mut self) -> Result<(), ParseError> {
        if let Some(l) = self.peek() {
            return Err(l.err(0, "trailing content after `end`"));
        }
        Ok(())
    }
}
