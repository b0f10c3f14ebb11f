//! Instance files: a ring line, an optional epsilon line and a square matrix.
//!
//! ```text
//! # comment
//! ring series-trivial 5 32
//! epsilon 1
//! matrix 2
//! [1, 0, 2]  0
//! 0          [0, 1]~
//! ```
//!
//! Series entries are coefficient lists `[c0, c1, ...]`, unramified series
//! entries are lists of `[a, b]` pairs (`a + b t` per coefficient), p-adic
//! entries are integers and the two p-adic extensions take `[a, b]`. A bare
//! integer is a constant in every ring. Entries are exact unless followed by
//! `~`, which marks a value known only modulo `y^N`.

use std::fmt;

use locform_core::form::Epsilon;
use locform_core::matrix::{Matrix, RingMatrix};
use locform_core::ring::{ElementView, RingDescriptor, RingElement, RingKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub ring: RingDescriptor,
    /// Absent for witness files, which hold a plain matrix.
    pub epsilon: Option<Epsilon>,
    pub matrix: RingMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Value {
    Int(i128),
    List(Vec<Value>),
}

struct Entry {
    value: Value,
    inexact: bool,
    col: usize,
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, line }
    }

    fn err<T>(&self, col: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, col: col + 1, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len() || self.chars[self.pos] == '#'
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let mut items = Vec::new();
                self.skip_ws();
                if self.peek() == Some(']') {
                    return self.err(start, "empty list");
                }
                loop {
                    items.push(self.value()?);
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some(']') => {
                            self.pos += 1;
                            return Ok(Value::List(items));
                        }
                        _ => return self.err(self.pos, "expected ',' or ']'"),
                    }
                }
            }
            Some(c) if c == '-' || c == '+' || c.is_ascii_digit() => {
                self.pos += 1;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().collect();
                text.parse().map(Value::Int).or_else(|_| self.err(start, format!("invalid integer '{text}'")))
            }
            Some(c) => self.err(start, format!("unexpected character '{c}'")),
            None => self.err(start, "expected a value"),
        }
    }

    fn entry(&mut self) -> Result<Entry, ParseError> {
        self.skip_ws();
        let col = self.pos;
        let value = self.value()?;
        let inexact = self.peek() == Some('~');
        if inexact {
            self.pos += 1;
        }
        if self.peek().is_some_and(|c| !c.is_whitespace() && c != ',' && c != '#') {
            return self.err(self.pos, "expected whitespace between entries");
        }
        if self.peek() == Some(',') {
            self.pos += 1;
        }
        Ok(Entry { value, inexact, col })
    }

    fn word(&mut self) -> Option<(usize, String)> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| !c.is_whitespace() && c != '#') {
            self.pos += 1;
        }
        (self.pos > start).then(|| (start, self.chars[start..self.pos].iter().collect()))
    }
}

fn int_list(v: &Value) -> Option<Vec<i128>> {
    match v {
        Value::List(items) => items
            .iter()
            .map(|x| match x {
                Value::Int(n) => Some(*n),
                Value::List(_) => None,
            })
            .collect(),
        Value::Int(_) => None,
    }
}

fn small(n: i128) -> Option<i64> {
    i64::try_from(n).ok()
}

fn element(ring: &RingDescriptor, v: &Value) -> Result<RingElement, String> {
    let bad = || format!("entry does not match the encoding for {}", ring.kind().name());
    let lib = |e: locform_core::Error| e.to_string();
    match (ring.kind(), v) {
        (RingKind::SeriesTrivial | RingKind::SeriesRamified, Value::Int(n)) => {
            ring.series(&[small(*n).ok_or_else(bad)?]).map_err(lib)
        }
        (RingKind::SeriesTrivial | RingKind::SeriesRamified, v) => {
            let c: Option<Vec<i64>> = int_list(v).ok_or_else(bad)?.into_iter().map(small).collect();
            ring.series(&c.ok_or_else(bad)?).map_err(lib)
        }
        (RingKind::SeriesUnramified, Value::Int(n)) => ring.series_ext(&[(small(*n).ok_or_else(bad)?, 0)]).map_err(lib),
        (RingKind::SeriesUnramified, Value::List(items)) => {
            let mut c = Vec::with_capacity(items.len());
            for x in items {
                let pair = match x {
                    Value::Int(n) => (small(*n).ok_or_else(bad)?, 0),
                    v => match int_list(v).ok_or_else(bad)?.as_slice() {
                        [a, b] => (small(*a).ok_or_else(bad)?, small(*b).ok_or_else(bad)?),
                        _ => return Err(bad()),
                    },
                };
                c.push(pair);
            }
            ring.series_ext(&c).map_err(lib)
        }
        (RingKind::PadicTrivial, Value::Int(n)) => ring.padic(*n).map_err(lib),
        (RingKind::PadicRamified | RingKind::PadicUnramified, Value::Int(n)) => ring.padic_pair(*n, 0).map_err(lib),
        (RingKind::PadicRamified | RingKind::PadicUnramified, v) => match int_list(v).ok_or_else(bad)?.as_slice() {
            [a, b] => ring.padic_pair(*a, *b).map_err(lib),
            _ => Err(bad()),
        },
        (RingKind::PadicTrivial, Value::List(_)) => Err(bad()),
    }
}

/// Parses an instance file; `precision` overrides the precision on the ring
/// line.
pub fn parse(text: &str, precision: Option<u32>) -> Result<Instance, ParseError> {
    let mut ring: Option<RingDescriptor> = None;
    let mut epsilon = None;
    let mut rows: Vec<Vec<RingElement>> = Vec::new();
    let mut expected_rows: Option<usize> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let mut cur = Cursor::new(raw, idx + 1);
        last_line = idx + 1;
        if cur.at_end() {
            continue;
        }
        if let Some(n) = expected_rows.filter(|&n| rows.len() < n) {
            let r = ring.expect("checked when the matrix line was read");
            let mut row = Vec::with_capacity(n);
            while !cur.at_end() {
                let e = cur.entry()?;
                let mut x = element(&r, &e.value).or_else(|m| cur.err(e.col, m))?;
                if e.inexact {
                    x = x.truncated();
                }
                row.push(x);
            }
            if row.len() != n {
                return cur.err(0, format!("row {} has {} entries, expected {n}", rows.len(), row.len()));
            }
            rows.push(row);
            continue;
        }
        let (col, key) = cur.word().expect("line is not empty");
        match key.as_str() {
            "ring" => {
                if ring.is_some() {
                    return cur.err(col, "duplicate ring line");
                }
                let (kc, kind) = cur.word().map_or_else(|| cur.err(cur.pos, "expected a ring kind"), Ok)?;
                let kind = RingKind::from_name(&kind).map_or_else(|| cur.err(kc, format!("unknown ring kind '{kind}'")), Ok)?;
                let mut number = |what: &str| -> Result<u64, ParseError> {
                    let (c, w) = cur.word().map_or_else(|| cur.err(cur.pos, format!("expected {what}")), Ok)?;
                    w.parse().or_else(|_| cur.err(c, format!("invalid {what} '{w}'")))
                };
                let p = number("prime")?;
                let n = number("precision")?;
                let n = u32::try_from(n).or_else(|_| cur.err(0, "precision out of range"))?;
                if !cur.at_end() {
                    return cur.err(cur.pos, "trailing input after ring line");
                }
                let r = RingDescriptor::new(kind, p, precision.unwrap_or(n)).or_else(|e| cur.err(col, e.to_string()))?;
                ring = Some(r);
            }
            "epsilon" => {
                if epsilon.is_some() {
                    return cur.err(col, "duplicate epsilon line");
                }
                let (c, w) = cur.word().map_or_else(|| cur.err(cur.pos, "expected 1 or -1"), Ok)?;
                epsilon = Some(match w.as_str() {
                    "1" | "+1" => Epsilon::Plus,
                    "-1" => Epsilon::Minus,
                    _ => return cur.err(c, format!("epsilon must be 1 or -1, got '{w}'")),
                });
                if !cur.at_end() {
                    return cur.err(cur.pos, "trailing input after epsilon line");
                }
            }
            "matrix" => {
                if ring.is_none() {
                    return cur.err(col, "the ring line must come before the matrix");
                }
                if expected_rows.is_some() {
                    return cur.err(col, "duplicate matrix");
                }
                let (c, w) = cur.word().map_or_else(|| cur.err(cur.pos, "expected the matrix size"), Ok)?;
                let n: usize = w.parse().or_else(|_| cur.err(c, format!("invalid matrix size '{w}'")))?;
                if !cur.at_end() {
                    return cur.err(cur.pos, "trailing input after matrix line");
                }
                expected_rows = Some(n);
            }
            other => return cur.err(col, format!("unknown directive '{other}'")),
        }
    }
    let eof = |message: &str| ParseError { line: last_line.max(1), col: 1, message: message.into() };
    let ring = ring.ok_or_else(|| eof("missing ring line"))?;
    let n = expected_rows.ok_or_else(|| eof("missing matrix"))?;
    if rows.len() != n {
        return Err(eof(&format!("matrix has {} rows, expected {n}", rows.len())));
    }
    let matrix = Matrix::from_rows(ring, rows).map_err(|e| eof(&e.to_string()))?;
    Ok(Instance { ring, epsilon, matrix })
}

fn balanced(c: u64, p: u64) -> i64 {
    if c > p / 2 {
        c as i64 - p as i64
    } else {
        c as i64
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    format!("[{}]", items.collect::<Vec<_>>().join(", "))
}

/// One entry in the file encoding.
pub fn format_element(x: &RingElement) -> String {
    let p = x.descriptor().p();
    let body = if x.is_zero() {
        "0".to_string()
    } else {
        match x.view() {
            ElementView::Series(c) => {
                let len = c.iter().rposition(|&v| v != 0).map_or(1, |i| i + 1);
                if len == 1 {
                    balanced(c[0], p).to_string()
                } else {
                    join(c[..len].iter().map(|&v| balanced(v, p).to_string()))
                }
            }
            ElementView::SeriesExt(c) => {
                let len = c.iter().rposition(|v| *v != [0, 0]).map_or(1, |i| i + 1);
                if len == 1 && c[0][1] == 0 {
                    balanced(c[0][0], p).to_string()
                } else {
                    join(c[..len].iter().map(|v| format!("[{}, {}]", balanced(v[0], p), balanced(v[1], p))))
                }
            }
            ElementView::Padic(_) | ElementView::PadicPair(..) => {
                let (a, b) = x.balanced_parts().expect("p-adic payload");
                if b == 0 {
                    a.to_string()
                } else {
                    format!("[{a}, {b}]")
                }
            }
        }
    };
    if x.is_exact() {
        body
    } else {
        body + "~"
    }
}

/// Matrix rows in the file encoding, entries padded to a common width.
pub fn format_rows(m: &RingMatrix) -> Vec<String> {
    let cells: Vec<Vec<String>> = (0..m.rows()).map(|i| (0..m.cols()).map(|j| format_element(m.get(i, j))).collect()).collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(0);
    cells
        .iter()
        .map(|row| {
            row.iter().map(|c| format!("{c:<width$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
        })
        .collect()
}

pub fn serialise(inst: &Instance) -> String {
    let r = &inst.ring;
    let mut out = format!("ring {} {} {}\n", r.kind().name(), r.p(), r.precision());
    if let Some(e) = inst.epsilon {
        out += &format!("epsilon {e}\n");
    }
    out += &format!("matrix {}\n", inst.matrix.rows());
    for row in format_rows(&inst.matrix) {
        out += &row;
        out.push('\n');
    }
    out
}
