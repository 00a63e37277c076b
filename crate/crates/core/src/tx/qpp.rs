//! Turbo internal interleaver: quadratic permutation polynomial
//! Π(i) = (f1·i + f2·i²) mod K with the (K, f1, f2) table stored in
//! `fixtures/qpp_table.csv`.

use once_cell::sync::Lazy;
use thiserror::Error;

const QPP_CSV: &str = include_str!("../../fixtures/qpp_table.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QppParams {
    pub k: usize,
    pub f1: usize,
    pub f2: usize,
}

static TABLE: Lazy<Vec<QppParams>> = Lazy::new(|| {
    QPP_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Vec<usize> = l.split(',').map(|x| x.trim().parse().unwrap()).collect();
            QppParams {
                k: v[0],
                f1: v[1],
                f2: v[2],
            }
        })
        .collect()
});

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("no interleaver for block size {0}")]
pub struct UnsupportedBlockSize(pub usize);

pub fn qpp_table() -> &'static [QppParams] {
    &TABLE
}

pub fn valid_block_sizes() -> impl Iterator<Item = usize> {
    TABLE.iter().map(|p| p.k)
}

pub fn is_valid_block_size(k: usize) -> bool {
    TABLE.binary_search_by_key(&k, |p| p.k).is_ok()
}

pub fn qpp_params(k: usize) -> Result<QppParams, UnsupportedBlockSize> {
    TABLE
        .binary_search_by_key(&k, |p| p.k)
        .map(|i| TABLE[i])
        .map_err(|_| UnsupportedBlockSize(k))
}

#[derive(Debug, Clone)]
pub struct QppInterleaver {
    perm: Vec<u32>,
}

impl QppInterleaver {
    pub fn new(k: usize) -> Result<Self, UnsupportedBlockSize> {
        let p = qpp_params(k)?;
        // f1 + f2·(2i + 1) is the forward difference; stepping avoids i² overflow
        let mut perm = Vec::with_capacity(k);
        let mut pi = 0usize;
        let mut step = (p.f1 + p.f2) % k;
        for _ in 0..k {
            perm.push(pi as u32);
            pi = (pi + step) % k;
            step = (step + 2 * p.f2) % k;
        }
        Ok(Self { perm })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Π(i).
    pub fn index(&self, i: usize) -> usize {
        self.perm[i] as usize
    }

    pub fn permutation(&self) -> &[u32] {
        &self.perm
    }

    /// out[i] = input[Π(i)].
    pub fn interleave<T: Copy>(&self, input: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| input[p as usize]).collect()
    }

    /// Inverse of [`interleave`](Self::interleave).
    pub fn deinterleave<T: Copy + Default>(&self, input: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); input.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p as usize] = input[i];
        }
        out
    }
}
