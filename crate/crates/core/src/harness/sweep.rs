//! Grids of operating points.

use rayon::prelude::*;

use crate::channel::Snr;
use crate::rng::derive_seed;

use super::chain::LinkConfig;
use super::point::{run_bler_point, BlerPoint, PointOptions, PointStatus, ThroughputMode, MIN_BLOCK_ERRORS};
use super::HarnessError;

/// Smallest per-point block budget a sweep accepts.
pub const MIN_BLOCKS_PER_POINT: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mcs: Vec<u8>,
    pub snr: Vec<Snr>,
    pub iterations: Vec<usize>,
    pub blocks: usize,
    pub min_block_errors: Option<usize>,
    pub seed: u64,
    /// Run points one at a time and record timing. Otherwise points run in
    /// parallel and timing columns stay empty.
    pub isolation: bool,
    pub throughput: ThroughputMode,
    pub enforce_rate_cap: bool,
}

impl SweepSpec {
    pub fn new(mcs: Vec<u8>, snr: Vec<Snr>, iterations: Vec<usize>, blocks: usize, seed: u64) -> Self {
        Self {
            mcs,
            snr,
            iterations,
            blocks,
            min_block_errors: Some(MIN_BLOCK_ERRORS),
            seed,
            isolation: true,
            throughput: ThroughputMode::Offered,
            enforce_rate_cap: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidSpec(m.into()));
        if self.mcs.is_empty() || self.snr.is_empty() || self.iterations.is_empty() {
            return bad("mcs, snr and iteration lists must be non-empty");
        }
        if self.blocks < MIN_BLOCKS_PER_POINT {
            return bad(&format!("blocks per point must be at least {MIN_BLOCKS_PER_POINT}"));
        }
        if let Some(m) = self.mcs.iter().find(|&&m| m > crate::lte::MAX_MCS) {
            return bad(&format!("mcs {m} out of range"));
        }
        if let Some(i) = self.iterations.iter().find(|&&i| !(1..=crate::rx::MAX_ITERATIONS).contains(&i)) {
            return bad(&format!("iterations {i} out of range 1..={}", crate::rx::MAX_ITERATIONS));
        }
        Ok(())
    }

    /// Points in result order: MCS, then SNR (noiseless last), then
    /// iterations, each ascending with duplicates removed.
    pub fn links(&self) -> Vec<LinkConfig> {
        let mut mcs = self.mcs.clone();
        mcs.sort_unstable();
        mcs.dedup();
        let mut snr = self.snr.clone();
        snr.sort_by(|a, b| snr_key(*a).total_cmp(&snr_key(*b)));
        snr.dedup();
        let mut iters = self.iterations.clone();
        iters.sort_unstable();
        iters.dedup();
        let mut out = Vec::new();
        for &m in &mcs {
            for &s in &snr {
                for &i in &iters {
                    out.push(LinkConfig {
                        mcs: m,
                        snr: s,
                        iterations: i,
                    });
                }
            }
        }
        out
    }
}

fn snr_key(s: Snr) -> f64 {
    s.db().unwrap_or(f64::INFINITY)
}

/// Seed of every point with this MCS. Points that differ only in SNR or
/// decoder iterations share it, so they see the same data and unit-variance
/// noise realisation (matched comparisons).
pub fn point_seed(master: u64, mcs: u8) -> u64 {
    derive_seed(master, "mcs", u64::from(mcs))
}

/// Runs every point of `spec`. A point that fails comes back with
/// [`PointStatus::Failed`] and the others are unaffected.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<BlerPoint>, HarnessError> {
    spec.validate()?;
    let opts = PointOptions {
        min_block_errors: spec.min_block_errors,
        timing: spec.isolation,
        throughput: spec.throughput,
        enforce_rate_cap: spec.enforce_rate_cap,
        keep_flags: false,
    };
    let run = |link: &LinkConfig| {
        let seed = point_seed(spec.seed, link.mcs);
        run_bler_point(link, spec.blocks, seed, &opts).unwrap_or_else(|e| BlerPoint {
            status: PointStatus::Failed(e.to_string()),
            ..BlerPoint::placeholder(link, seed)
        })
    };
    let links = spec.links();
    Ok(if spec.isolation {
        links.iter().map(run).collect()
    } else {
        links.par_iter().map(run).collect()
    })
}
