//! Code-block segmentation.
//!
//! Follows the 36.212 sizing rule with Z = 6144 and no per-block CRC: the 6 PRB
//! configuration never produces more than one code block, so the CRC-24B used
//! for multi-block transport blocks is left out.

use super::qpp::{is_valid_block_size, valid_block_sizes};
use crate::Bit;

/// Largest turbo code block.
pub const MAX_BLOCK_SIZE: usize = 6144;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBlock {
    /// K bits including leading filler.
    pub bits: Vec<Bit>,
    /// Known-zero filler bits at the head of the block.
    pub filler: usize,
}

impl CodeBlock {
    pub fn k(&self) -> usize {
        self.bits.len()
    }
}

/// Block structure for an input of `input_len` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentPlan {
    pub input_len: usize,
    pub c_plus: usize,
    pub c_minus: usize,
    pub k_plus: usize,
    pub k_minus: usize,
    /// Filler bits, all at the head of the first block.
    pub filler: usize,
}

fn smallest_valid_at_least(n: usize) -> usize {
    valid_block_sizes()
        .find(|&k| k >= n)
        .expect("segment size bounded by the largest block size")
}

impl SegmentPlan {
    pub fn new(input_len: usize) -> Self {
        let c = input_len.div_ceil(MAX_BLOCK_SIZE).max(1);
        let k_plus = smallest_valid_at_least(input_len.div_ceil(c));
        if c == 1 {
            return Self {
                input_len,
                c_plus: 1,
                c_minus: 0,
                k_plus,
                k_minus: 0,
                filler: k_plus - input_len,
            };
        }
        let k_minus = valid_block_sizes()
            .take_while(|&k| k < k_plus)
            .last()
            .unwrap_or(0);
        let delta = k_plus - k_minus;
        let c_minus = if k_minus == 0 {
            0
        } else {
            (c * k_plus - input_len) / delta
        };
        let c_plus = c - c_minus;
        let filler = c_plus * k_plus + c_minus * k_minus - input_len;
        Self {
            input_len,
            c_plus,
            c_minus,
            k_plus,
            k_minus,
            filler,
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.c_plus + self.c_minus
    }

    /// K of each block in order: the smaller blocks first.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut v = vec![self.k_minus; self.c_minus];
        v.extend(std::iter::repeat_n(self.k_plus, self.c_plus));
        v
    }

    /// Filler count of block `r`.
    pub fn filler_of(&self, r: usize) -> usize {
        if r == 0 {
            self.filler
        } else {
            0
        }
    }
}

pub fn segment_code_blocks(bits: &[Bit]) -> Vec<CodeBlock> {
    let plan = SegmentPlan::new(bits.len());
    let mut rest = bits;
    plan.block_sizes()
        .into_iter()
        .enumerate()
        .map(|(r, k)| {
            let filler = plan.filler_of(r);
            let (take, tail) = rest.split_at(k - filler);
            rest = tail;
            let mut block = vec![0; filler];
            block.extend_from_slice(take);
            debug_assert!(is_valid_block_size(block.len()));
            CodeBlock { bits: block, filler }
        })
        .collect()
}

/// Concatenate blocks and drop filler, inverting [`segment_code_blocks`].
pub fn desegment(blocks: &[CodeBlock]) -> Vec<Bit> {
    blocks
        .iter()
        .flat_map(|b| b.bits[b.filler..].iter().copied())
        .collect()
}
