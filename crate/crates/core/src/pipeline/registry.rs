//! Block kinds known to the runtime.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{ElementKind, Params, Payload};
use crate::rng::{stream_rng, StreamRng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BlockError {
    #[error("parameter error: {0}")]
    Param(String),
    #[error("bad input: {0}")]
    Input(String),
    #[error("{0}")]
    Failed(String),
    #[error("block kind `{0}` is reserved but not implemented")]
    NotImplemented(String),
}

impl BlockError {
    pub fn failed(e: impl std::fmt::Display) -> Self {
        BlockError::Failed(e.to_string())
    }

    pub fn param(e: impl std::fmt::Display) -> Self {
        BlockError::Param(e.to_string())
    }
}

/// What part of the link a block models. Cost reports are restricted to the
/// PHY roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockRole {
    Source,
    Sink,
    Tx,
    Channel,
    Rx,
}

impl BlockRole {
    pub fn is_phy(self) -> bool {
        matches!(self, BlockRole::Tx | BlockRole::Rx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortSpec {
    pub name: &'static str,
    pub kind: ElementKind,
    /// Optional inputs may stay unconnected.
    pub optional: bool,
}

impl PortSpec {
    pub const fn new(name: &'static str, kind: ElementKind) -> Self {
        Self {
            name,
            kind,
            optional: false,
        }
    }

    pub const fn optional(name: &'static str, kind: ElementKind) -> Self {
        Self {
            name,
            kind,
            optional: true,
        }
    }
}

/// Per-invocation information handed to a block.
#[derive(Debug, Clone, Copy)]
pub struct WorkContext<'a> {
    pub block: &'a str,
    /// Iteration (TTI) number, starting at 0.
    pub iteration: u64,
    pub seed: u64,
}

impl WorkContext<'_> {
    /// Subframe number within the radio frame.
    pub fn subframe(&self) -> usize {
        (self.iteration % 10) as usize
    }

    /// The block's random stream for this iteration.
    pub fn rng(&self) -> StreamRng {
        stream_rng(self.seed, self.block, self.iteration)
    }

    /// As [`rng`](Self::rng) but under an explicit master seed.
    pub fn rng_with_master(&self, master: u64) -> StreamRng {
        stream_rng(master, self.block, self.iteration)
    }
}

/// A processing block. Instances own their state and are moved between
/// threads as a whole.
pub trait Block: Send {
    /// Run one invocation. `inputs` has one entry per declared input port,
    /// `None` for an unconnected optional port; the result must hold one
    /// payload per declared output port.
    fn work(
        &mut self,
        ctx: &WorkContext<'_>,
        inputs: Vec<Option<Payload>>,
    ) -> Result<Vec<Payload>, BlockError>;

    /// Upper bound on items produced per invocation on `port`, used to size
    /// FIFOs.
    fn max_output_items(&self, _port: usize) -> Option<usize> {
        None
    }

    /// Drain anything the block retained (sinks).
    fn take_collected(&mut self) -> Vec<Payload> {
        Vec::new()
    }
}

pub type BlockFactory = fn(&Params) -> Result<Box<dyn Block>, BlockError>;

#[derive(Debug, Clone)]
pub struct KindInfo {
    pub name: &'static str,
    pub role: BlockRole,
    pub inputs: Vec<PortSpec>,
    pub outputs: Vec<PortSpec>,
    pub factory: BlockFactory,
    /// One-line parameter summary.
    pub params: &'static str,
    /// Port element kinds are taken from the block's `kind` parameter
    /// (default byte) instead of the declared ones.
    pub generic: bool,
}

/// Port layout of one configured block.
#[derive(Debug, Clone, PartialEq)]
pub struct Ports {
    pub inputs: Vec<PortSpec>,
    pub outputs: Vec<PortSpec>,
}

impl Ports {
    pub fn input(&self, name: &str) -> Option<(usize, &PortSpec)> {
        self.inputs.iter().enumerate().find(|(_, p)| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<(usize, &PortSpec)> {
        self.outputs.iter().enumerate().find(|(_, p)| p.name == name)
    }
}

impl KindInfo {
    /// Ports of a block of this kind configured with `params`.
    pub fn ports(&self, params: &Params) -> Result<Ports, BlockError> {
        let mut ports = Ports {
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
        };
        if self.generic {
            let kind = element_kind_param(params)?;
            for p in ports.inputs.iter_mut().chain(ports.outputs.iter_mut()) {
                p.kind = kind;
            }
        }
        Ok(ports)
    }
}

/// The `kind` parameter of generic blocks.
pub fn element_kind_param(params: &Params) -> Result<ElementKind, BlockError> {
    match params.string("kind")? {
        None => Ok(ElementKind::Byte),
        Some(s) => ElementKind::parse(s)
            .ok_or_else(|| BlockError::Param(format!("kind: unknown element kind `{s}`"))),
    }
}

/// Reject parameters outside `allowed`.
pub fn check_param_names(params: &Params, allowed: &[&str]) -> Result<(), BlockError> {
    match params.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(BlockError::Param(format!(
            "unknown parameter `{k}` (accepted: {})",
            if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
        ))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    kinds: BTreeMap<&'static str, KindInfo>,
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Generic sources and sinks, the PHY transmit and receive blocks and the
    /// AWGN channel.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        super::blocks::register(&mut r);
        crate::tx::blocks::register(&mut r);
        crate::channel::register(&mut r);
        crate::rx::blocks::register(&mut r);
        r
    }

    pub fn register(&mut self, info: KindInfo) {
        self.kinds.insert(info.name, info);
    }

    pub fn get(&self, kind: &str) -> Option<&KindInfo> {
        self.kinds.get(kind)
    }

    pub fn kinds(&self) -> impl Iterator<Item = &KindInfo> {
        self.kinds.values()
    }

    pub fn instantiate(&self, kind: &str, params: &Params) -> Result<Box<dyn Block>, BlockError> {
        let info = self
            .get(kind)
            .ok_or_else(|| BlockError::Param(format!("unknown block kind `{kind}`")))?;
        (info.factory)(params)
    }

    /// Ports of a configured block, `None` for an unknown kind.
    pub fn ports(&self, kind: &str, params: &Params) -> Option<Result<Ports, BlockError>> {
        self.get(kind).map(|info| info.ports(params))
    }
}
