//! Downlink transmitter: CRC, segmentation, turbo coding, rate matching,
//! scrambling, modulation, resource mapping and OFDM.

pub mod blocks;
pub mod crc;
pub mod grid;
pub mod modulation;
pub mod ofdm;
pub mod qpp;
pub mod rate_match;
pub mod scramble;
pub mod segment;
pub mod turbo;

use rand::Rng;

use crate::Bit;

/// `n` equiprobable bits drawn from `rng`, 64 per draw, LSB first.
pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Bit> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let word: u64 = rng.random();
        let take = (n - out.len()).min(64);
        out.extend((0..take).map(|i| ((word >> i) & 1) as Bit));
    }
    out
}
