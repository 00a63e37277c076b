//! `.app` text format.
//!
//! ```text
//! # comment
//! module src { lib = "vector_source"; value = 1 }
//! module snk { lib = "vector_sink" }
//! connect src.out -> snk.in
//! ```
//!
//! Parameter values are signed integers, decimals or double-quoted strings.
//! Whitespace, including newlines, is insignificant.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use super::graph::{cyclic_blocks, standard_registry, AppGraph, BlockSpec, Edge};
use super::registry::Registry;
use super::{ParamValue, Params};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AppError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("no blocks defined")]
    NoBlocks,
    #[error("{line}:{col}: duplicate block name `{name}`")]
    DuplicateBlock { name: String, line: usize, col: usize },
    #[error("{line}:{col}: block `{block}` has unknown kind `{kind}`")]
    UnknownKind {
        block: String,
        kind: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: dangling edge endpoint `{endpoint}`")]
    DanglingEndpoint {
        endpoint: String,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: type-mismatched connection {edge}: {detail}")]
    TypeMismatch {
        edge: String,
        detail: String,
        line: usize,
        col: usize,
    },
    #[error("cycle detected among blocks {}", .0.join(", "))]
    Cycle(Vec<String>),
}

impl AppError {
    /// Source position, when the error has one.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            AppError::Syntax { line, col, .. }
            | AppError::DuplicateBlock { line, col, .. }
            | AppError::UnknownKind { line, col, .. }
            | AppError::DanglingEndpoint { line, col, .. }
            | AppError::TypeMismatch { line, col, .. } => Some((*line, *col)),
            AppError::NoBlocks | AppError::Cycle(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(ParamValue),
    LBrace,
    RBrace,
    Eq,
    Semi,
    Dot,
    Arrow,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Num(v) => format!("number {v}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Arrow => "`->`".into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    col: usize,
}

fn syntax(pos: Pos, msg: impl Into<String>) -> AppError {
    AppError::Syntax {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, AppError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        match c {
            c if c.is_whitespace() => bump!(),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
            }
            '{' | '}' | '=' | ';' | '.' => {
                toks.push((
                    match c {
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        '=' => Tok::Eq,
                        ';' => Tok::Semi,
                        _ => Tok::Dot,
                    },
                    pos,
                ));
                bump!();
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                toks.push((Tok::Arrow, pos));
                bump!();
                bump!();
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(syntax(pos, "unterminated string")),
                        Some('"') => {
                            bump!();
                            break;
                        }
                        Some('\\') => {
                            bump!();
                            match chars.get(i) {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                _ => {
                                    return Err(syntax(Pos { line, col }, "invalid escape sequence"))
                                }
                            }
                            bump!();
                        }
                        Some(&ch) => {
                            s.push(ch);
                            bump!();
                        }
                    }
                }
                toks.push((Tok::Str(s), pos));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let start = i;
                bump!();
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric()
                        || chars[i] == '.'
                        || ((chars[i] == '-' || chars[i] == '+')
                            && matches!(chars[i - 1], 'e' | 'E')))
                {
                    bump!();
                }
                let word: String = chars[start..i].iter().collect();
                let value = if word.contains(['.', 'e', 'E']) {
                    word.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(ParamValue::Float)
                } else {
                    word.parse::<i64>().ok().map(ParamValue::Int)
                };
                match value {
                    Some(v) => toks.push((Tok::Num(v), pos)),
                    None => return Err(syntax(pos, format!("invalid number `{word}`"))),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    bump!();
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn next(&mut self, what: &str) -> Result<(Tok, Pos), AppError> {
        match self.toks.get(self.at) {
            Some(t) => {
                self.at += 1;
                Ok(t.clone())
            }
            None => Err(syntax(self.end, format!("expected {what}, found end of input"))),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, AppError> {
        let what = tok.describe();
        let (t, pos) = self.next(&what)?;
        if t == tok {
            Ok(pos)
        } else {
            Err(syntax(pos, format!("expected {what}, found {}", t.describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), AppError> {
        match self.next(what)? {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (t, pos) => Err(syntax(pos, format!("expected {what}, found {}", t.describe()))),
        }
    }

    fn endpoint(&mut self) -> Result<(String, String, Pos), AppError> {
        let (block, pos) = self.ident("block name")?;
        self.expect(Tok::Dot)?;
        let (port, _) = self.ident("port name")?;
        Ok((block, port, pos))
    }

    fn module(&mut self) -> Result<(BlockSpec, Pos), AppError> {
        let (name, pos) = self.ident("block name")?;
        self.expect(Tok::LBrace)?;
        let mut kind = None;
        let mut params = Params::new();
        let mut keys = BTreeSet::new();
        loop {
            if self.peek() == Some(&Tok::RBrace) {
                self.at += 1;
                break;
            }
            let (key, key_pos) = self.ident("parameter name")?;
            self.expect(Tok::Eq)?;
            let (value, value_pos) = match self.next("parameter value")? {
                (Tok::Str(s), p) => (ParamValue::Str(s), p),
                (Tok::Num(v), p) => (v, p),
                (t, p) => {
                    return Err(syntax(
                        p,
                        format!("expected string or number, found {}", t.describe()),
                    ))
                }
            };
            if !keys.insert(key.clone()) {
                return Err(syntax(key_pos, format!("duplicate parameter `{key}`")));
            }
            if key == "lib" {
                match value {
                    ParamValue::Str(s) => kind = Some(s),
                    _ => return Err(syntax(value_pos, "`lib` must be a string")),
                }
            } else {
                params.set(&key, value);
            }
            match self.next("`;` or `}`")? {
                (Tok::Semi, _) => {}
                (Tok::RBrace, _) => break,
                (t, p) => {
                    return Err(syntax(p, format!("expected `;` or `}}`, found {}", t.describe())))
                }
            }
        }
        let kind = kind.ok_or_else(|| syntax(pos, format!("module `{name}` has no `lib`")))?;
        Ok((BlockSpec { name, kind, params }, pos))
    }
}

pub fn parse_app(text: &str) -> Result<AppGraph, AppError> {
    parse_app_with(text, standard_registry())
}

/// Parse and check names, kinds, endpoints, port types and acyclicity.
pub fn parse_app_with(text: &str, registry: &Registry) -> Result<AppGraph, AppError> {
    let toks = lex(text)?;
    let last_line = text.lines().count().max(1);
    let last_col = text.lines().last().map(|l| l.chars().count() + 1).unwrap_or(1);
    let mut p = Parser {
        toks,
        at: 0,
        end: Pos {
            line: last_line,
            col: last_col,
        },
    };

    let mut graph = AppGraph::new();
    let mut block_pos = Vec::new();
    let mut edge_pos = Vec::new();
    while p.peek().is_some() {
        let (kw, pos) = p.ident("`module` or `connect`")?;
        match kw.as_str() {
            "module" => {
                let (b, bpos) = p.module()?;
                block_pos.push(bpos);
                graph.blocks.push(b);
            }
            "connect" => {
                let (src, src_port, spos) = p.endpoint()?;
                p.expect(Tok::Arrow)?;
                let (dst, dst_port, dpos) = p.endpoint()?;
                edge_pos.push((spos, dpos));
                graph.edges.push(Edge {
                    src,
                    src_port,
                    dst,
                    dst_port,
                });
            }
            other => {
                return Err(syntax(
                    pos,
                    format!("expected `module` or `connect`, found `{other}`"),
                ))
            }
        }
    }

    if graph.blocks.is_empty() {
        return Err(AppError::NoBlocks);
    }
    let mut names = BTreeSet::new();
    for (b, pos) in graph.blocks.iter().zip(&block_pos) {
        if !names.insert(b.name.as_str()) {
            return Err(AppError::DuplicateBlock {
                name: b.name.clone(),
                line: pos.line,
                col: pos.col,
            });
        }
        if registry.get(&b.kind).is_none() {
            return Err(AppError::UnknownKind {
                block: b.name.clone(),
                kind: b.kind.clone(),
                line: pos.line,
                col: pos.col,
            });
        }
    }
    for (e, (spos, dpos)) in graph.edges.iter().zip(&edge_pos) {
        let dangling = |endpoint: String, pos: &Pos| AppError::DanglingEndpoint {
            endpoint,
            line: pos.line,
            col: pos.col,
        };
        let ports_of = |name: &str| {
            let b = graph.block(name)?;
            registry.ports(&b.kind, &b.params)?.ok()
        };
        let src = ports_of(&e.src).ok_or_else(|| dangling(e.src.clone(), spos))?;
        let dst = ports_of(&e.dst).ok_or_else(|| dangling(e.dst.clone(), dpos))?;
        let (_, out) = src
            .output(&e.src_port)
            .ok_or_else(|| dangling(format!("{}.{}", e.src, e.src_port), spos))?;
        let (_, inp) = dst
            .input(&e.dst_port)
            .ok_or_else(|| dangling(format!("{}.{}", e.dst, e.dst_port), dpos))?;
        if out.kind != inp.kind {
            return Err(AppError::TypeMismatch {
                edge: e.to_string(),
                detail: format!("{} output feeds {} input", out.kind, inp.kind),
                line: spos.line,
                col: spos.col,
            });
        }
    }
    let cyclic = cyclic_blocks(&graph);
    if !cyclic.is_empty() {
        return Err(AppError::Cycle(cyclic));
    }
    Ok(graph)
}

/// Text form of `g`, blocks in declaration order followed by connections.
pub fn serialize_app(g: &AppGraph) -> String {
    let mut out = String::new();
    for b in &g.blocks {
        let _ = write!(out, "module {} {{ lib = {}", b.name, ParamValue::Str(b.kind.clone()));
        for (k, v) in b.params.iter() {
            let _ = write!(out, "; {k} = {v}");
        }
        out.push_str(" }\n");
    }
    for e in &g.edges {
        let _ = writeln!(out, "connect {e}");
    }
    out
}
