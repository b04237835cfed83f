//! Plain-text graph files.
//!
//! ```text
//! dfsgraph 1 <n> <d> <0|1>
//! labels <l_1> ... <l_n>
//! e <u> <v>        (undirected, u < v by id; `a <u> <v>` for an arc u -> v)
//! end
//! ```

use std::fmt;
use std::io::{self, BufRead, Write};

use dfs_certify::{GraphError, LabeledGraph};
use thiserror::Error;

/// Line of a parse error; `None` is end of input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Line(pub Option<usize>);

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(l) => write!(f, "line {l}"),
            None => write!(f, "EOF"),
        }
    }
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error at {line}: {msg}")]
    Parse { line: Line, msg: String },
    #[error(transparent)]
    Invariant(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_graph<W: Write>(g: &LabeledGraph, mut out: W) -> io::Result<()> {
    let dir = u8::from(g.is_directed());
    writeln!(out, "dfsgraph 1 {} {} {dir}", g.n(), g.d())?;
    write!(out, "labels")?;
    for l in g.labels() {
        write!(out, " {l}")?;
    }
    writeln!(out)?;
    let tag = if g.is_directed() { 'a' } else { 'e' };
    for (u, v) in g.edges() {
        writeln!(out, "{tag} {} {}", u.0, v.0)?;
    }
    writeln!(out, "end")?;
    out.flush()
}

pub fn graph_to_string(g: &LabeledGraph) -> String {
    let mut buf = Vec::new();
    write_graph(g, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ASCII output")
}

fn err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { line: Line(Some(line)), msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<T, FormatError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| err(line, format!("bad {what} `{tok}`")))
}

pub fn parse_graph<R: BufRead>(input: R) -> Result<LabeledGraph, FormatError> {
    let mut lines = input.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = || -> Result<Option<(usize, String)>, FormatError> {
        match lines.next() {
            Some((i, l)) => Ok(Some((i, l?))),
            None => Ok(None),
        }
    };
    let eof = |what: &str| FormatError::Parse { line: Line(None), msg: format!("expected {what}") };

    let (ln, header) = next()?.ok_or_else(|| eof("header"))?;
    let mut t = header.split(' ');
    if t.next() != Some("dfsgraph") {
        return Err(err(ln, "expected `dfsgraph`"));
    }
    if t.next() != Some("1") {
        return Err(err(ln, "unsupported version"));
    }
    let n: u32 = num(ln, t.next(), "n")?;
    let d: usize = num(ln, t.next(), "d")?;
    let directed = match t.next() {
        Some("0") => false,
        Some("1") => true,
        _ => return Err(err(ln, "directed flag must be 0 or 1")),
    };
    if t.next().is_some() {
        return Err(err(ln, "trailing tokens"));
    }

    let (ln, lab) = next()?.ok_or_else(|| eof("labels"))?;
    let mut t = lab.split(' ');
    if t.next() != Some("labels") {
        return Err(err(ln, "expected `labels`"));
    }
    let labels = t.map(|s| num(ln, Some(s), "label")).collect::<Result<Vec<u32>, _>>()?;
    if labels.len() != n as usize {
        return Err(err(ln, format!("expected {n} labels, found {}", labels.len())));
    }

    let tag = if directed { "a" } else { "e" };
    let mut edges = Vec::new();
    loop {
        let (ln, line) = next()?.ok_or_else(|| eof("`end`"))?;
        if line == "end" {
            break;
        }
        let mut t = line.split(' ');
        if t.next() != Some(tag) {
            return Err(err(ln, format!("expected `{tag} <u> <v>` or `end`")));
        }
        let u: u32 = num(ln, t.next(), "endpoint")?;
        let v: u32 = num(ln, t.next(), "endpoint")?;
        if t.next().is_some() {
            return Err(err(ln, "trailing tokens"));
        }
        edges.push((u, v));
    }
    if let Some((ln, _)) = next()? {
        return Err(err(ln, "content after `end`"));
    }
    Ok(LabeledGraph::build(n, d, &edges, &labels, directed)?)
}

pub fn parse_str(s: &str) -> Result<LabeledGraph, FormatError> {
    parse_graph(s.as_bytes())
}
