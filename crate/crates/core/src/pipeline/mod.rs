//! Dataflow runtime: `.app` graph files, validation, static scheduling and
//! execution with per-invocation timing.
//!
//! One iteration of a graph corresponds to one transmission time interval:
//! every block runs once, in topological order, consuming everything its
//! input FIFOs hold.

mod app;
pub mod blocks;
mod cost;
mod fifo;
mod graph;
mod registry;
mod runtime;

use num_complex::Complex64;

pub use app::{parse_app, parse_app_with, serialize_app, AppError};
pub use cost::{cost_report, write_cost_csv, BlockCost, CostError, CostReport, CostSample, COST_CSV_HEADER};
pub use fifo::{FifoChannel, FifoError};
pub use graph::{schedule, validate_graph, validate_graph_with, AppGraph, BlockSpec, Diagnostic, Edge};
pub use registry::{
    check_param_names, element_kind_param, Block, BlockError, BlockFactory, BlockRole, KindInfo,
    PortSpec, Ports, Registry, WorkContext,
};
pub use runtime::{run_graph, run_graph_with, FifoStats, RunResult, Runtime, RuntimeError};

/// Type of the items a port produces or accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Bit,
    Soft,
    Complex,
    Byte,
}

impl ElementKind {
    /// Accepts the short names `bit`, `soft`, `complex`, `byte` and the
    /// display names.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bit" => Some(ElementKind::Bit),
            "soft" | "soft-bit" => Some(ElementKind::Soft),
            "complex" | "complex-sample" => Some(ElementKind::Complex),
            "byte" => Some(ElementKind::Byte),
            _ => None,
        }
    }
}

impl std::fmt::Display for ElementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ElementKind::Bit => "bit",
            ElementKind::Soft => "soft-bit",
            ElementKind::Complex => "complex-sample",
            ElementKind::Byte => "byte",
        })
    }
}

/// A run of items of one kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Bits(Vec<u8>),
    Soft(Vec<f64>),
    Complex(Vec<Complex64>),
    Bytes(Vec<u8>),
}

impl Payload {
    pub fn empty(kind: ElementKind) -> Self {
        match kind {
            ElementKind::Bit => Payload::Bits(Vec::new()),
            ElementKind::Soft => Payload::Soft(Vec::new()),
            ElementKind::Complex => Payload::Complex(Vec::new()),
            ElementKind::Byte => Payload::Bytes(Vec::new()),
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            Payload::Bits(_) => ElementKind::Bit,
            Payload::Soft(_) => ElementKind::Soft,
            Payload::Complex(_) => ElementKind::Complex,
            Payload::Bytes(_) => ElementKind::Byte,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Payload::Bits(v) | Payload::Bytes(v) => v.len(),
            Payload::Soft(v) => v.len(),
            Payload::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Append `other`, which must be of the same kind.
    pub fn append(&mut self, other: Payload) -> Result<(), (ElementKind, ElementKind)> {
        match (self, other) {
            (Payload::Bits(a), Payload::Bits(b)) | (Payload::Bytes(a), Payload::Bytes(b)) => {
                a.extend(b)
            }
            (Payload::Soft(a), Payload::Soft(b)) => a.extend(b),
            (Payload::Complex(a), Payload::Complex(b)) => a.extend(b),
            (a, b) => return Err((a.kind(), b.kind())),
        }
        Ok(())
    }

    pub fn into_bits(self) -> Option<Vec<u8>> {
        match self {
            Payload::Bits(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_soft(self) -> Option<Vec<f64>> {
        match self {
            Payload::Soft(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_complex(self) -> Option<Vec<Complex64>> {
        match self {
            Payload::Complex(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_bytes(self) -> Option<Vec<u8>> {
        match self {
            Payload::Bytes(v) => Some(v),
            _ => None,
        }
    }

    /// Canonical little-endian byte image, used for hashing sink contents.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        match self {
            Payload::Bits(v) | Payload::Bytes(v) => v.clone(),
            Payload::Soft(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            Payload::Complex(v) => v
                .iter()
                .flat_map(|c| c.re.to_le_bytes().into_iter().chain(c.im.to_le_bytes()))
                .collect(),
        }
    }
}

/// Block parameter value as written in `.app` files.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Str(String),
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            // Debug gives the shortest representation that parses back exactly
            ParamValue::Float(v) => write!(f, "{v:?}"),
            ParamValue::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

/// Ordered block parameters with unique keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(Vec<(String, ParamValue)>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style insert; replaces an existing key in place.
    pub fn with(mut self, key: &str, value: ParamValue) -> Self {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: ParamValue) {
        match self.0.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.0.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamValue)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn int(&self, key: &str) -> Result<Option<i64>, BlockError> {
        match self.get(key) {
            None => Ok(None),
            Some(ParamValue::Int(v)) => Ok(Some(*v)),
            Some(other) => Err(BlockError::Param(format!("{key}: expected integer, got {other}"))),
        }
    }

    pub fn int_or(&self, key: &str, default: i64) -> Result<i64, BlockError> {
        Ok(self.int(key)?.unwrap_or(default))
    }

    pub fn require_int(&self, key: &str) -> Result<i64, BlockError> {
        self.int(key)?
            .ok_or_else(|| BlockError::Param(format!("missing required parameter `{key}`")))
    }

    /// Integer restricted to `range`.
    pub fn int_in(
        &self,
        key: &str,
        default: Option<i64>,
        range: std::ops::RangeInclusive<i64>,
    ) -> Result<i64, BlockError> {
        let v = match (self.int(key)?, default) {
            (Some(v), _) | (None, Some(v)) => v,
            (None, None) => {
                return Err(BlockError::Param(format!("missing required parameter `{key}`")))
            }
        };
        if !range.contains(&v) {
            return Err(BlockError::Param(format!(
                "{key} = {v} outside {}..={}",
                range.start(),
                range.end()
            )));
        }
        Ok(v)
    }

    /// Decimal value; integers are accepted.
    pub fn float(&self, key: &str) -> Result<Option<f64>, BlockError> {
        match self.get(key) {
            None => Ok(None),
            Some(ParamValue::Int(v)) => Ok(Some(*v as f64)),
            Some(ParamValue::Float(v)) => Ok(Some(*v)),
            Some(other) => Err(BlockError::Param(format!("{key}: expected number, got {other}"))),
        }
    }

    pub fn string(&self, key: &str) -> Result<Option<&str>, BlockError> {
        match self.get(key) {
            None => Ok(None),
            Some(ParamValue::Str(s)) => Ok(Some(s)),
            Some(other) => Err(BlockError::Param(format!("{key}: expected string, got {other}"))),
        }
    }
}

impl FromIterator<(String, ParamValue)> for Params {
    fn from_iter<T: IntoIterator<Item = (String, ParamValue)>>(iter: T) -> Self {
        let mut p = Params::new();
        for (k, v) in iter {
            p.set(&k, v);
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_access() {
        let p = Params::new()
            .with("mcs", ParamValue::Int(10))
            .with("snr_db", ParamValue::Float(2.5))
            .with("lib", ParamValue::Str("x".into()));
        assert_eq!(p.require_int("mcs").unwrap(), 10);
        assert_eq!(p.float("mcs").unwrap(), Some(10.0));
        assert_eq!(p.float("snr_db").unwrap(), Some(2.5));
        assert!(p.int("snr_db").is_err());
        assert!(p.require_int("missing").is_err());
        assert!(p.int_in("mcs", None, 0..=5).is_err());
        assert_eq!(p.int_in("iters", Some(5), 1..=8).unwrap(), 5);
        assert_eq!(p.string("lib").unwrap(), Some("x"));
    }

    #[test]
    fn param_value_text() {
        assert_eq!(ParamValue::Float(1.0).to_string(), "1.0");
        assert_eq!(ParamValue::Float(-0.25).to_string(), "-0.25");
        assert_eq!(ParamValue::Str("a\"b".into()).to_string(), "\"a\\\"b\"");
    }
}
