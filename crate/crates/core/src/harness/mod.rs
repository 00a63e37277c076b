//! Conformance and performance experiments on the PDSCH link.

pub mod chain;
pub mod output;
pub mod plot;
pub mod point;
pub mod stats;
pub mod sweep;

pub use chain::{pdsch_graph, reference_block, BlockOutcome, ChainError, LinkConfig};
pub use output::{emit_cost_csv, emit_csv, emit_csv_string, read_cost_csv, read_csv, run_id, strip_timing, RESULTS_CSV_HEADER};
pub use point::{
    conformance_ber, conformance_bler, find_snr_threshold, gray_qam_ber, offered_throughput, run_bler_point,
    BerCheck, BerReport, BlerConformance, BlerPoint, LinkRunner, PointOptions, PointStatus, Threshold,
    ThroughputMode, BLER_TARGET, MIN_BLOCK_ERRORS,
};
pub use sweep::{point_seed, sweep, SweepSpec, MIN_BLOCKS_PER_POINT};

use crate::channel::ChannelError;
use crate::lte::LteError;
use crate::pipeline::{CostError, RuntimeError};
use crate::rx::DemodError;
use crate::tx::modulation::ModulationError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Lte(#[from] LteError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Modulation(#[from] ModulationError),
    #[error(transparent)]
    Demod(#[from] DemodError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed results: {0}")]
    Format(String),
    #[error("invalid sweep: {0}")]
    InvalidSpec(String),
    #[error("skipped: {0}")]
    Skipped(String),
    #[error("BLER target not reached for mcs {mcs} with {iterations} iterations up to 30 dB")]
    Unreachable { mcs: u8, iterations: usize },
}
