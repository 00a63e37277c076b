//! Graph structure, validation and scheduling.

use std::collections::{BTreeMap, BTreeSet};

use once_cell::sync::Lazy;

use super::registry::{Ports, Registry};
use super::Params;

static STANDARD: Lazy<Registry> = Lazy::new(Registry::standard);

pub(crate) fn standard_registry() -> &'static Registry {
    &STANDARD
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpec {
    pub name: String,
    pub kind: String,
    pub params: Params,
}

impl BlockSpec {
    pub fn new(name: &str, kind: &str, params: Params) -> Self {
        Self {
            name: name.into(),
            kind: kind.into(),
            params,
        }
    }
}

/// Directed FIFO connection `src.src_port -> dst.dst_port`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: String,
    pub src_port: String,
    pub dst: String,
    pub dst_port: String,
}

impl Edge {
    pub fn new(src: &str, src_port: &str, dst: &str, dst_port: &str) -> Self {
        Self {
            src: src.into(),
            src_port: src_port.into(),
            dst: dst.into(),
            dst_port: dst_port.into(),
        }
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{} -> {}.{}", self.src, self.src_port, self.dst, self.dst_port)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AppGraph {
    pub blocks: Vec<BlockSpec>,
    pub edges: Vec<Edge>,
}

impl AppGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn block(&self, name: &str) -> Option<&BlockSpec> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn add_block(&mut self, name: &str, kind: &str, params: Params) -> &mut Self {
        self.blocks.push(BlockSpec::new(name, kind, params));
        self
    }

    pub fn connect(&mut self, src: &str, src_port: &str, dst: &str, dst_port: &str) -> &mut Self {
        self.edges.push(Edge::new(src, src_port, dst, dst_port));
        self
    }
}

/// A validation finding tied to a block, port or edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

/// Blocks left over after Kahn's algorithm, i.e. on or behind a cycle.
pub(crate) fn cyclic_blocks(g: &AppGraph) -> Vec<String> {
    match topo_order(g) {
        Ok(_) => Vec::new(),
        Err(rest) => rest,
    }
}

/// Kahn's algorithm with lexicographic tie-breaking. Edges naming unknown
/// blocks are ignored.
fn topo_order(g: &AppGraph) -> Result<Vec<String>, Vec<String>> {
    let names: BTreeSet<&str> = g.blocks.iter().map(|b| b.name.as_str()).collect();
    let mut indegree: BTreeMap<&str, usize> = names.iter().map(|&n| (n, 0)).collect();
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &g.edges {
        if names.contains(e.src.as_str()) && names.contains(e.dst.as_str()) {
            *indegree.get_mut(e.dst.as_str()).unwrap() += 1;
            succ.entry(e.src.as_str()).or_default().push(e.dst.as_str());
        }
    }
    let mut ready: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&n, _)| n)
        .collect();
    let mut order = Vec::with_capacity(names.len());
    while let Some(n) = ready.pop_first() {
        order.push(n.to_string());
        for &m in succ.get(n).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indegree.get_mut(m).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(m);
            }
        }
    }
    if order.len() == names.len() {
        Ok(order)
    } else {
        let done: BTreeSet<&str> = order.iter().map(String::as_str).collect();
        Err(names
            .into_iter()
            .filter(|n| !done.contains(n))
            .map(String::from)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cycle detected among blocks {0:?}")]
pub struct CycleError(pub Vec<String>);

/// Topological execution order, ties broken by block name.
pub fn schedule(g: &AppGraph) -> Result<Vec<String>, CycleError> {
    topo_order(g).map_err(CycleError)
}

pub fn validate_graph(g: &AppGraph) -> Vec<Diagnostic> {
    validate_graph_with(g, standard_registry())
}

/// Every violated structural invariant of `g`; empty when the graph can run.
pub fn validate_graph_with(g: &AppGraph, registry: &Registry) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if g.blocks.is_empty() {
        diags.push(Diagnostic::new("graph", "no blocks defined"));
        return diags;
    }

    let mut seen = BTreeSet::new();
    for b in &g.blocks {
        if !seen.insert(b.name.as_str()) {
            diags.push(Diagnostic::new(&b.name, "duplicate block name"));
        }
        match registry.get(&b.kind) {
            None => diags.push(Diagnostic::new(
                &b.name,
                format!("unknown block kind `{}`", b.kind),
            )),
            Some(info) => {
                if let Err(e) = (info.factory)(&b.params) {
                    diags.push(Diagnostic::new(&b.name, e.to_string()));
                }
            }
        }
    }

    // ports of every block whose kind and parameters resolve
    let ports: BTreeMap<&str, Ports> = g
        .blocks
        .iter()
        .filter_map(|b| Some((b.name.as_str(), registry.ports(&b.kind, &b.params)?.ok()?)))
        .collect();
    let mut incoming: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for e in &g.edges {
        let subject = e.to_string();
        let (Some(src), Some(dst)) = (g.block(&e.src), g.block(&e.dst)) else {
            diags.push(Diagnostic::new(subject, "edge references an unknown block"));
            continue;
        };
        let (Some(src_ports), Some(dst_ports)) = (ports.get(src.name.as_str()), ports.get(dst.name.as_str())) else {
            continue;
        };
        let out = src_ports.output(&e.src_port);
        let inp = dst_ports.input(&e.dst_port);
        if out.is_none() {
            diags.push(Diagnostic::new(
                &subject,
                format!("`{}` ({}) has no output port `{}`", e.src, src.kind, e.src_port),
            ));
        }
        if inp.is_none() {
            diags.push(Diagnostic::new(
                &subject,
                format!("`{}` ({}) has no input port `{}`", e.dst, dst.kind, e.dst_port),
            ));
        }
        if let (Some((_, o)), Some((_, i))) = (out, inp) {
            if o.kind != i.kind {
                diags.push(Diagnostic::new(
                    &subject,
                    format!("type mismatch: {} output feeds {} input", o.kind, i.kind),
                ));
            }
            *incoming.entry((e.dst.as_str(), e.dst_port.as_str())).or_default() += 1;
        }
    }

    for b in &g.blocks {
        let Some(p) = ports.get(b.name.as_str()) else {
            continue;
        };
        for port in &p.inputs {
            let n = incoming.get(&(b.name.as_str(), port.name)).copied().unwrap_or(0);
            let subject = format!("{}.{}", b.name, port.name);
            if n > 1 {
                diags.push(Diagnostic::new(subject, format!("input port has {n} incoming edges")));
            } else if n == 0 && !port.optional {
                diags.push(Diagnostic::new(subject, "mandatory input is not connected"));
            }
        }
    }

    let cyclic = cyclic_blocks(g);
    if !cyclic.is_empty() {
        diags.push(Diagnostic::new(cyclic.join(","), "cycle detected"));
    } else {
        let has_source = g
            .blocks
            .iter()
            .any(|b| !g.edges.iter().any(|e| e.dst == b.name));
        let has_sink = g
            .blocks
            .iter()
            .any(|b| !g.edges.iter().any(|e| e.src == b.name));
        if !has_source {
            diags.push(Diagnostic::new("graph", "no source block"));
        }
        if !has_sink {
            diags.push(Diagnostic::new("graph", "no sink block"));
        }
    }
    diags
}
