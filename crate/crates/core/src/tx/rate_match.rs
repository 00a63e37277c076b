//! Turbo rate matching: per-stream 32-column sub-block interleaving, circular
//! buffer collection and bit selection with wrap-around.
//!
//! The bit-selection pattern is computed once as an index map into the
//! flattened codeword `d0 ++ d1 ++ d2`; matching gathers through it and
//! dematching scatters soft values back through the same map.

use super::turbo::TurboCodeword;
use crate::Bit;

pub const SUBBLOCK_COLUMNS: usize = 32;

/// Inter-column permutation of the sub-block interleaver.
pub const COLUMN_PERMUTATION: [usize; SUBBLOCK_COLUMNS] = [
    0, 16, 8, 24, 4, 20, 12, 28, 2, 18, 10, 26, 6, 22, 14, 30, 1, 17, 9, 25, 5, 21, 13, 29, 3, 19,
    11, 27, 7, 23, 15, 31,
];

/// Position in the flattened codeword of every sub-block interleaver output,
/// `None` for dummy and filler positions.
fn subblock_output(stream: usize, k: usize, filler: usize) -> Vec<Option<u32>> {
    let d = k + 4;
    let rows = d.div_ceil(SUBBLOCK_COLUMNS);
    let k_pi = rows * SUBBLOCK_COLUMNS;
    let dummies = k_pi - d;
    let source = |y: usize| -> Option<u32> {
        let idx = y.checked_sub(dummies)?;
        if stream < 2 && idx < filler {
            None
        } else {
            Some((stream * d + idx) as u32)
        }
    };
    (0..k_pi)
        .map(|pos| {
            let (col, row) = (pos / rows, pos % rows);
            let y = if stream < 2 {
                row * SUBBLOCK_COLUMNS + COLUMN_PERMUTATION[col]
            } else {
                (COLUMN_PERMUTATION[col] + SUBBLOCK_COLUMNS * row + 1) % k_pi
            };
            source(y)
        })
        .collect()
}

/// Circular buffer w: v0 followed by v1 and v2 interlaced.
fn circular_buffer(k: usize, filler: usize) -> Vec<Option<u32>> {
    let v0 = subblock_output(0, k, filler);
    let v1 = subblock_output(1, k, filler);
    let v2 = subblock_output(2, k, filler);
    let mut w = v0;
    w.reserve(2 * v1.len());
    for (a, b) in v1.into_iter().zip(v2) {
        w.push(a);
        w.push(b);
    }
    w
}

/// Rate-matching pattern for one code block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateMatcher {
    k: usize,
    filler: usize,
    rv: u8,
    map: Vec<u32>,
}

impl RateMatcher {
    /// Pattern selecting `e` bits for block size `k` with `filler` leading
    /// filler bits and redundancy version `rv` (0..=3).
    pub fn new(k: usize, filler: usize, e: usize, rv: u8) -> Self {
        let w = circular_buffer(k, filler);
        let ncb = w.len();
        let rows = ncb / (3 * SUBBLOCK_COLUMNS);
        let k0 = rows * (2 * ncb.div_ceil(8 * rows) * usize::from(rv & 3) + 2);
        let mut map = Vec::with_capacity(e);
        let mut j = 0;
        while map.len() < e {
            if let Some(idx) = w[(k0 + j) % ncb] {
                map.push(idx);
            }
            j += 1;
        }
        Self { k, filler, rv, map }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn e(&self) -> usize {
        self.map.len()
    }

    pub fn rv(&self) -> u8 {
        self.rv
    }

    /// Length of the flattened codeword, 3K + 12.
    pub fn codeword_len(&self) -> usize {
        3 * (self.k + 4)
    }

    /// Indices into the flattened codeword, one per output bit.
    pub fn index_map(&self) -> &[u32] {
        &self.map
    }

    pub fn rate_match_flat(&self, codeword: &[Bit]) -> Vec<Bit> {
        assert_eq!(codeword.len(), self.codeword_len());
        self.map.iter().map(|&i| codeword[i as usize]).collect()
    }

    pub fn rate_match(&self, cw: &TurboCodeword) -> Vec<Bit> {
        self.rate_match_flat(&cw.flatten())
    }

    /// Soft values summed at their codeword positions; positions never
    /// transmitted stay zero.
    pub fn rate_dematch(&self, llrs: &[f64]) -> Vec<f64> {
        assert_eq!(llrs.len(), self.map.len());
        let mut out = vec![0.0; self.codeword_len()];
        for (&i, &l) in self.map.iter().zip(llrs) {
            out[i as usize] += l;
        }
        out
    }

    pub fn filler(&self) -> usize {
        self.filler
    }
}

pub fn rate_match(cw: &TurboCodeword, e: usize, rv: u8, filler: usize) -> Vec<Bit> {
    RateMatcher::new(cw.k, filler, e, rv).rate_match(cw)
}

/// Inverse of [`rate_match`] for soft values; output is 3K + 12 long.
pub fn rate_dematch(llrs: &[f64], k: usize, filler: usize, rv: u8) -> Vec<f64> {
    RateMatcher::new(k, filler, llrs.len(), rv).rate_dematch(llrs)
}

/// Rate-matched length E of each of `blocks` code blocks sharing `total`
/// bits with modulation order `qm` (single layer).
pub fn code_block_lengths(total: usize, qm: usize, blocks: usize) -> Vec<usize> {
    let symbols = total / qm;
    let gamma = symbols % blocks;
    (0..blocks)
        .map(|r| {
            if r < blocks - gamma {
                qm * (symbols / blocks)
            } else {
                qm * symbols.div_ceil(blocks)
            }
        })
        .collect()
}
