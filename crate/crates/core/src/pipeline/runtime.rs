//! Single-threaded execution of a validated graph.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::cost::{cost_report, CostError, CostReport, CostSample};
use super::fifo::{FifoChannel, FifoError};
use super::graph::{schedule, standard_registry, validate_graph_with, AppGraph, Diagnostic, Edge};
use super::registry::{Block, BlockError, BlockRole, Registry, WorkContext};
use super::Payload;

/// FIFO capacity when the producer gives no bound.
pub const DEFAULT_FIFO_CAPACITY: usize = 1 << 20;
/// Capacity is this multiple of the producer's per-iteration maximum.
pub const FIFO_HEADROOM: usize = 4;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("invalid graph: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("block `{block}` failed: {source}")]
    Block {
        block: String,
        #[source]
        source: BlockError,
    },
    #[error("block `{block}` returned {got} outputs, expected {expected}")]
    OutputArity {
        block: String,
        got: usize,
        expected: usize,
    },
    #[error("FIFO {edge}: {source}")]
    Fifo {
        edge: String,
        #[source]
        source: FifoError,
    },
}

struct Node {
    name: String,
    role: BlockRole,
    block: Box<dyn Block>,
    /// FIFO index feeding each input port.
    inputs: Vec<Option<usize>>,
    /// FIFO indices fed by each output port.
    outputs: Vec<Vec<usize>>,
}

/// Traffic on one edge over a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FifoStats {
    pub edge: Edge,
    pub capacity: usize,
    pub produced: u64,
    pub consumed: u64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    /// Everything each sink collected, one payload per invocation.
    pub sinks: BTreeMap<String, Vec<Payload>>,
    pub samples: Vec<CostSample>,
    pub roles: BTreeMap<String, BlockRole>,
    pub wall: Duration,
    pub fifos: Vec<FifoStats>,
}

impl RunResult {
    /// Total items collected by `sink`.
    pub fn sink_items(&self, sink: &str) -> usize {
        self.sinks
            .get(sink)
            .map(|v| v.iter().map(Payload::len).sum())
            .unwrap_or(0)
    }

    /// SHA-256 over sink names and payload bytes, in name order.
    pub fn sink_hash(&self) -> String {
        let mut h = Sha256::new();
        for (name, payloads) in &self.sinks {
            h.update(name.as_bytes());
            h.update([0]);
            for p in payloads {
                h.update((p.len() as u64).to_le_bytes());
                h.update(p.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    /// Cost report over the transmit and receive blocks only.
    pub fn phy_cost_report(&self) -> Result<CostReport, CostError> {
        let phy: Vec<CostSample> = self
            .samples
            .iter()
            .filter(|s| self.roles.get(&s.block).is_some_and(|r| r.is_phy()))
            .cloned()
            .collect();
        cost_report(&phy, self.wall)
    }

    pub fn cost_report(&self) -> Result<CostReport, CostError> {
        cost_report(&self.samples, self.wall)
    }
}

pub struct Runtime {
    nodes: Vec<Node>,
    fifos: Vec<(Edge, FifoChannel)>,
    seed: u64,
    iteration: u64,
    samples: Vec<CostSample>,
    record_samples: bool,
    sinks: BTreeMap<String, Vec<Payload>>,
    started: Instant,
    busy: Duration,
}

impl Runtime {
    pub fn new(g: &AppGraph, seed: u64) -> Result<Self, RuntimeError> {
        Self::with_registry(g, standard_registry(), seed)
    }

    pub fn with_registry(g: &AppGraph, registry: &Registry, seed: u64) -> Result<Self, RuntimeError> {
        let diags = validate_graph_with(g, registry);
        if !diags.is_empty() {
            return Err(RuntimeError::Invalid(diags));
        }
        let order = schedule(g).map_err(|e| RuntimeError::Invalid(vec![Diagnostic::new(e.0.join(","), "cycle detected")]))?;

        let mut nodes = Vec::with_capacity(order.len());
        let mut index = BTreeMap::new();
        for name in &order {
            let spec = g.block(name).expect("scheduled block exists");
            let info = registry.get(&spec.kind).expect("validated kind");
            let ports = info.ports(&spec.params).map_err(|source| RuntimeError::Block {
                block: name.clone(),
                source,
            })?;
            let block = (info.factory)(&spec.params).map_err(|source| RuntimeError::Block {
                block: name.clone(),
                source,
            })?;
            index.insert(name.clone(), (nodes.len(), ports));
            nodes.push(Node {
                name: name.clone(),
                role: info.role,
                block,
                inputs: Vec::new(),
                outputs: Vec::new(),
            });
        }
        for (node, (_, ports)) in nodes.iter_mut().zip(order.iter().map(|n| &index[n])) {
            node.inputs = vec![None; ports.inputs.len()];
            node.outputs = vec![Vec::new(); ports.outputs.len()];
        }

        let mut fifos = Vec::with_capacity(g.edges.len());
        for e in &g.edges {
            let (src, src_ports) = &index[&e.src];
            let (dst, dst_ports) = &index[&e.dst];
            let (out_idx, out) = src_ports.output(&e.src_port).expect("validated port");
            let (in_idx, _) = dst_ports.input(&e.dst_port).expect("validated port");
            let capacity = nodes[*src]
                .block
                .max_output_items(out_idx)
                .map(|n| FIFO_HEADROOM * n.max(1))
                .unwrap_or(DEFAULT_FIFO_CAPACITY);
            let f = fifos.len();
            fifos.push((e.clone(), FifoChannel::new(out.kind, capacity)));
            nodes[*src].outputs[out_idx].push(f);
            nodes[*dst].inputs[in_idx] = Some(f);
        }

        Ok(Self {
            nodes,
            fifos,
            seed,
            iteration: 0,
            samples: Vec::new(),
            record_samples: true,
            sinks: BTreeMap::new(),
            started: Instant::now(),
            busy: Duration::ZERO,
        })
    }

    /// Start counting iterations at `first`. Subframe numbers and random
    /// streams follow the iteration index, so a run split into chunks that
    /// start at the right offsets reproduces a single long run.
    pub fn starting_at(mut self, first: u64) -> Self {
        self.iteration = first;
        self
    }

    /// Stop keeping per-invocation samples, to save memory on long runs.
    pub fn without_samples(mut self) -> Self {
        self.record_samples = false;
        self
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// Block names in execution order.
    pub fn order(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.name.as_str()).collect()
    }

    /// Run every block once, in schedule order.
    pub fn step(&mut self) -> Result<(), RuntimeError> {
        for node in &mut self.nodes {
            let inputs: Vec<Option<Payload>> = node
                .inputs
                .iter()
                .map(|f| f.map(|f| self.fifos[f].1.drain()))
                .collect();
            let consumed = inputs.iter().flatten().map(Payload::len).sum();
            let ctx = WorkContext {
                block: &node.name,
                iteration: self.iteration,
                seed: self.seed,
            };
            let t0 = Instant::now();
            let outputs = node.block.work(&ctx, inputs);
            let elapsed = t0.elapsed();
            let outputs = outputs.map_err(|source| RuntimeError::Block {
                block: node.name.clone(),
                source,
            })?;
            self.busy += elapsed;
            if outputs.len() != node.outputs.len() {
                return Err(RuntimeError::OutputArity {
                    block: node.name.clone(),
                    got: outputs.len(),
                    expected: node.outputs.len(),
                });
            }
            let produced = outputs.iter().map(Payload::len).sum();
            if self.record_samples {
                self.samples.push(CostSample {
                    block: node.name.clone(),
                    invocation: self.iteration,
                    elapsed_ns: elapsed.as_nanos() as u64,
                    consumed,
                    produced,
                });
            }
            for (payload, targets) in outputs.into_iter().zip(&node.outputs) {
                if let Some((last, rest)) = targets.split_last() {
                    for &f in rest {
                        push(&mut self.fifos[f], payload.clone())?;
                    }
                    push(&mut self.fifos[*last], payload)?;
                }
            }
            if node.role == BlockRole::Sink {
                let collected = node.block.take_collected();
                if !collected.is_empty() {
                    self.sinks.entry(node.name.clone()).or_default().extend(collected);
                }
            }
        }
        self.iteration += 1;
        Ok(())
    }

    pub fn run(&mut self, iterations: u64) -> Result<(), RuntimeError> {
        for _ in 0..iterations {
            self.step()?;
        }
        Ok(())
    }

    /// Remove and return what `sink` has collected so far.
    pub fn take_sink(&mut self, sink: &str) -> Vec<Payload> {
        self.sinks.remove(sink).unwrap_or_default()
    }

    /// Samples recorded so far, removed from the runtime.
    pub fn take_samples(&mut self) -> Vec<CostSample> {
        std::mem::take(&mut self.samples)
    }

    /// Time spent inside block `work` calls.
    pub fn busy(&self) -> Duration {
        self.busy
    }

    pub fn roles(&self) -> BTreeMap<String, BlockRole> {
        self.nodes.iter().map(|n| (n.name.clone(), n.role)).collect()
    }

    pub fn finish(self) -> RunResult {
        let roles = self.roles();
        RunResult {
            sinks: self.sinks,
            samples: self.samples,
            roles,
            wall: self.started.elapsed(),
            fifos: self
                .fifos
                .into_iter()
                .map(|(edge, f)| FifoStats {
                    edge,
                    capacity: f.capacity(),
                    produced: f.pushed(),
                    consumed: f.popped(),
                })
                .collect(),
        }
    }
}

fn push(slot: &mut (Edge, FifoChannel), payload: Payload) -> Result<(), RuntimeError> {
    slot.1.push(payload).map_err(|source| RuntimeError::Fifo {
        edge: slot.0.to_string(),
        source,
    })
}

pub fn run_graph(g: &AppGraph, iterations: u64, seed: u64) -> Result<RunResult, RuntimeError> {
    run_graph_with(g, standard_registry(), iterations, seed)
}

pub fn run_graph_with(
    g: &AppGraph,
    registry: &Registry,
    iterations: u64,
    seed: u64,
) -> Result<RunResult, RuntimeError> {
    let mut rt = Runtime::with_registry(g, registry, seed)?;
    rt.run(iterations)?;
    Ok(rt.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{ParamValue, Params};

    fn constant_chain() -> AppGraph {
        let mut g = AppGraph::new();
        g.add_block("src", "vector_source", Params::new().with("value", ParamValue::Int(1)))
            .add_block("snk", "vector_sink", Params::new());
        g.connect("src", "out", "snk", "in");
        g
    }

    #[test]
    fn constant_source_ten_iterations() {
        let r = run_graph(&constant_chain(), 10, 0).unwrap();
        assert_eq!(r.sink_items("snk"), 10);
        assert_eq!(r.samples.len(), 20);
        assert!(r.sinks["snk"].iter().all(|p| p == &Payload::Bytes(vec![1])));
        for f in &r.fifos {
            assert_eq!(f.produced, f.consumed);
        }
    }

    #[test]
    fn invocation_indices_increase() {
        let r = run_graph(&constant_chain(), 5, 0).unwrap();
        for block in ["src", "snk"] {
            let idx: Vec<u64> = r.samples.iter().filter(|s| s.block == block).map(|s| s.invocation).collect();
            assert_eq!(idx, vec![0, 1, 2, 3, 4]);
        }
        let report = r.cost_report().unwrap();
        assert!(report.total_ns() <= report.wall_ns);
    }

    #[test]
    fn invalid_graph_rejected() {
        let mut g = AppGraph::new();
        g.add_block("snk", "vector_sink", Params::new());
        assert!(matches!(Runtime::new(&g, 0), Err(RuntimeError::Invalid(_))));
    }

    #[test]
    fn fan_out_duplicates_payload() {
        let mut g = constant_chain();
        g.add_block("snk2", "vector_sink", Params::new());
        g.connect("src", "out", "snk2", "in");
        let r = run_graph(&g, 3, 0).unwrap();
        assert_eq!(r.sinks["snk"], r.sinks["snk2"]);
    }

    #[test]
    fn reserved_rf_kinds_fail_validation() {
        let mut g = AppGraph::new();
        g.add_block("rf", "rf_source", Params::new())
            .add_block("snk", "null_sink", Params::new().with("kind", ParamValue::Str("complex".into())));
        g.connect("rf", "out", "snk", "in");
        let Err(RuntimeError::Invalid(d)) = Runtime::new(&g, 0) else {
            panic!("rf_source must not run");
        };
        assert!(d[0].message.contains("not implemented"), "{d:?}");
    }
}
