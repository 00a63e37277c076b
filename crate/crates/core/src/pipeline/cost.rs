//! Per-invocation timing samples and their aggregation.

use std::io::Write;
use std::time::Duration;

use thiserror::Error;

pub const COST_CSV_HEADER: &str = "run_id,block,calls,total_ns,mean_ns,max_ns,share";

/// Timing of one block invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostSample {
    pub block: String,
    pub invocation: u64,
    pub elapsed_ns: u64,
    pub consumed: usize,
    pub produced: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCost {
    pub block: String,
    pub calls: u64,
    pub total_ns: u64,
    pub mean_ns: f64,
    pub max_ns: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    /// Blocks in order of first appearance in the samples.
    pub blocks: Vec<BlockCost>,
    pub wall_ns: u64,
}

#[derive(Debug, Error)]
pub enum CostError {
    #[error("no cost samples")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CostReport {
    pub fn block(&self, name: &str) -> Option<&BlockCost> {
        self.blocks.iter().find(|b| b.block == name)
    }

    pub fn total_ns(&self) -> u64 {
        self.blocks.iter().map(|b| b.total_ns).sum()
    }

    /// Block with the largest total time.
    pub fn largest(&self) -> Option<&BlockCost> {
        self.blocks.iter().max_by_key(|b| b.total_ns)
    }

    /// Report restricted to the named blocks, shares renormalized.
    pub fn restrict(&self, keep: &[&str]) -> Result<CostReport, CostError> {
        let blocks: Vec<BlockCost> = self
            .blocks
            .iter()
            .filter(|b| keep.contains(&b.block.as_str()))
            .cloned()
            .collect();
        if blocks.is_empty() {
            return Err(CostError::Empty);
        }
        let mut r = CostReport {
            blocks,
            wall_ns: self.wall_ns,
        };
        set_shares(&mut r.blocks);
        Ok(r)
    }
}

fn set_shares(blocks: &mut [BlockCost]) {
    let total: u64 = blocks.iter().map(|b| b.total_ns).sum();
    let n = blocks.len() as f64;
    for b in blocks {
        // a run too fast for the clock splits evenly so shares still sum to 1
        b.share = if total == 0 {
            1.0 / n
        } else {
            b.total_ns as f64 / total as f64
        };
    }
}

pub fn cost_report(samples: &[CostSample], wall: Duration) -> Result<CostReport, CostError> {
    if samples.is_empty() {
        return Err(CostError::Empty);
    }
    let mut blocks: Vec<BlockCost> = Vec::new();
    for s in samples {
        let idx = match blocks.iter().position(|b| b.block == s.block) {
            Some(i) => i,
            None => {
                blocks.push(BlockCost {
                    block: s.block.clone(),
                    calls: 0,
                    total_ns: 0,
                    mean_ns: 0.0,
                    max_ns: 0,
                    share: 0.0,
                });
                blocks.len() - 1
            }
        };
        let b = &mut blocks[idx];
        b.calls += 1;
        b.total_ns += s.elapsed_ns;
        b.max_ns = b.max_ns.max(s.elapsed_ns);
    }
    for b in &mut blocks {
        b.mean_ns = b.total_ns as f64 / b.calls as f64;
    }
    set_shares(&mut blocks);
    Ok(CostReport {
        blocks,
        wall_ns: wall.as_nanos().min(u64::MAX as u128) as u64,
    })
}

/// Append `report` rows under `run_id`; the header is written when
/// `header` is set.
pub fn write_cost_csv<W: Write>(
    mut out: W,
    run_id: &str,
    report: &CostReport,
    header: bool,
) -> Result<(), CostError> {
    if header {
        writeln!(out, "{COST_CSV_HEADER}")?;
    }
    for b in &report.blocks {
        writeln!(
            out,
            "{run_id},{},{},{},{:.1},{},{:.6}",
            b.block, b.calls, b.total_ns, b.mean_ns, b.max_ns, b.share
        )?;
    }
    Ok(())
}
