//! Rate-1/3 turbo encoder: two 8-state recursive systematic constituent
//! encoders (feedback 1+D²+D³, feedforward 1+D+D³) joined by the QPP
//! interleaver, each terminated to the zero state.

use super::qpp::{QppInterleaver, UnsupportedBlockSize};
use super::segment::CodeBlock;
use crate::Bit;

pub const NUM_STATES: usize = 8;
pub const TAIL_BITS: usize = 12;

/// One trellis step of the constituent encoder.
///
/// The state packs the shift register as `r1 r2 r3` (r1 most recent) into
/// bits 2..0. Returns the next state and the parity bit.
#[inline]
pub fn rsc_step(state: usize, input: Bit) -> (usize, Bit) {
    let r1 = (state >> 2) & 1;
    let r2 = (state >> 1) & 1;
    let r3 = state & 1;
    let a = usize::from(input & 1) ^ r2 ^ r3;
    let parity = (a ^ r1 ^ r3) as Bit;
    ((a << 2) | (r1 << 1) | r2, parity)
}

/// Input that drives the feedback node to zero, used for termination.
#[inline]
pub fn termination_input(state: usize) -> Bit {
    (((state >> 1) & 1) ^ (state & 1)) as Bit
}

/// Encode `input` from the zero state. Returns the parity sequence, the three
/// tail systematic bits and the three tail parity bits.
pub fn rsc_encode(input: &[Bit]) -> (Vec<Bit>, [Bit; 3], [Bit; 3]) {
    let mut state = 0;
    let parity = input
        .iter()
        .map(|&u| {
            let (next, z) = rsc_step(state, u);
            state = next;
            z
        })
        .collect();
    let mut tail_x = [0; 3];
    let mut tail_z = [0; 3];
    for i in 0..3 {
        let u = termination_input(state);
        let (next, z) = rsc_step(state, u);
        tail_x[i] = u;
        tail_z[i] = z;
        state = next;
    }
    debug_assert_eq!(state, 0);
    (parity, tail_x, tail_z)
}

/// The three output streams d0, d1, d2, each K + 4 long.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurboCodeword {
    pub k: usize,
    pub streams: [Vec<Bit>; 3],
}

impl TurboCodeword {
    pub fn systematic(&self) -> &[Bit] {
        &self.streams[0][..self.k]
    }

    pub fn parity1(&self) -> &[Bit] {
        &self.streams[1][..self.k]
    }

    pub fn parity2(&self) -> &[Bit] {
        &self.streams[2][..self.k]
    }

    /// The 12 termination bits in stream order.
    pub fn tail(&self) -> Vec<Bit> {
        self.streams
            .iter()
            .flat_map(|s| s[self.k..].iter().copied())
            .collect()
    }

    /// d0 ++ d1 ++ d2, 3K + 12 bits.
    pub fn flatten(&self) -> Vec<Bit> {
        self.streams.concat()
    }

    pub fn from_flat(k: usize, flat: &[Bit]) -> Self {
        let d = k + 4;
        Self {
            k,
            streams: [
                flat[..d].to_vec(),
                flat[d..2 * d].to_vec(),
                flat[2 * d..3 * d].to_vec(),
            ],
        }
    }
}

pub fn turbo_encode_with(bits: &[Bit], interleaver: &QppInterleaver) -> TurboCodeword {
    let k = bits.len();
    assert_eq!(k, interleaver.len(), "block length does not match interleaver");
    let (z, x_t, z_t) = rsc_encode(bits);
    let (z2, x2_t, z2_t) = rsc_encode(&interleaver.interleave(bits));

    let mut d0 = bits.to_vec();
    let mut d1 = z;
    let mut d2 = z2;
    d0.extend_from_slice(&[x_t[0], z_t[1], x2_t[0], z2_t[1]]);
    d1.extend_from_slice(&[z_t[0], x_t[2], z2_t[0], x2_t[2]]);
    d2.extend_from_slice(&[x_t[1], z_t[2], x2_t[1], z2_t[2]]);
    TurboCodeword {
        k,
        streams: [d0, d1, d2],
    }
}

pub fn turbo_encode(cb: &CodeBlock) -> Result<TurboCodeword, UnsupportedBlockSize> {
    let il = QppInterleaver::new(cb.k())?;
    Ok(turbo_encode_with(&cb.bits, &il))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Shift-register recursion written out directly:
    /// a[n] = u[n] + a[n-2] + a[n-3], z[n] = a[n] + a[n-1] + a[n-3] over GF(2).
    fn recursion_oracle(u: &[Bit]) -> Vec<Bit> {
        let mut a = vec![0u8; u.len() + 3];
        let mut z = Vec::with_capacity(u.len());
        for n in 0..u.len() {
            let i = n + 3;
            a[i] = u[n] ^ a[i - 2] ^ a[i - 3];
            z.push(a[i] ^ a[i - 1] ^ a[i - 3]);
        }
        z
    }

    fn block(bits: Vec<Bit>) -> CodeBlock {
        CodeBlock { bits, filler: 0 }
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let cw = turbo_encode(&block(vec![0; 40])).unwrap();
        assert_eq!(cw.flatten().len(), 132);
        assert!(cw.flatten().iter().all(|&b| b == 0));
    }

    #[test]
    fn impulse_matches_recursion_oracle() {
        let mut u = vec![0; 40];
        u[0] = 1;
        let cw = turbo_encode(&block(u.clone())).unwrap();
        let p1 = recursion_oracle(&u);
        // frozen from the oracle: impulse response of (1+D+D^3)/(1+D^2+D^3)
        let head: Vec<Bit> = p1[..10].to_vec();
        assert_eq!(head, vec![1, 1, 1, 1, 0, 0, 1, 0, 1, 1]);
        assert_eq!(cw.parity1(), &p1[..]);
        let il = QppInterleaver::new(40).unwrap();
        assert_eq!(cw.parity2(), &recursion_oracle(&il.interleave(&u))[..]);
        assert_eq!(cw.systematic(), &u[..]);
        assert_eq!(cw.tail().len(), TAIL_BITS);
    }

    #[test]
    fn termination_returns_to_zero() {
        for seed in 0..20u64 {
            let u: Vec<Bit> = (0..64)
                .map(|i| (crate::rng::splitmix64(seed * 131 + i) & 1) as Bit)
                .collect();
            let (_, tx, tz) = rsc_encode(&u);
            // replaying data plus tail through the trellis ends in state 0
            let mut s = 0;
            for &b in u.iter().chain(tx.iter()) {
                s = rsc_step(s, b).0;
            }
            assert_eq!(s, 0);
            let mut s = 0;
            for &b in &u {
                s = rsc_step(s, b).0;
            }
            for (i, &x) in tx.iter().enumerate() {
                let (next, z) = rsc_step(s, x);
                assert_eq!(z, tz[i]);
                s = next;
            }
        }
    }
}
