//! Length-31 Gold sequence scrambling.

use crate::Bit;

/// Sequence offset Nc.
const NC: usize = 1600;

pub const DEFAULT_RNTI: u16 = 0x003C;

/// Scrambling sequence generator c(n) = x1(n + Nc) ⊕ x2(n + Nc).
#[derive(Debug, Clone)]
pub struct GoldSequence {
    x1: u32,
    x2: u32,
}

impl GoldSequence {
    pub fn new(c_init: u32) -> Self {
        let mut g = Self {
            x1: 1,
            x2: c_init & 0x7FFF_FFFF,
        };
        for _ in 0..NC {
            g.step();
        }
        g
    }

    /// Advance both registers by one; returns the output bit for the current n.
    #[inline]
    fn step(&mut self) -> Bit {
        let out = ((self.x1 ^ self.x2) & 1) as Bit;
        let f1 = (self.x1 ^ (self.x1 >> 3)) & 1;
        let f2 = (self.x2 ^ (self.x2 >> 1) ^ (self.x2 >> 2) ^ (self.x2 >> 3)) & 1;
        self.x1 = (self.x1 >> 1) | (f1 << 30);
        self.x2 = (self.x2 >> 1) | (f2 << 30);
        out
    }
}

impl Iterator for GoldSequence {
    type Item = Bit;

    fn next(&mut self) -> Option<Bit> {
        Some(self.step())
    }
}

pub fn gold_sequence(c_init: u32, len: usize) -> Vec<Bit> {
    GoldSequence::new(c_init).take(len).collect()
}

/// PDSCH scrambler initialisation for codeword `q` in slot `ns`.
pub fn pdsch_c_init(rnti: u16, q: u8, ns: u8, cell_id: u16) -> u32 {
    (u32::from(rnti) << 14)
        + (u32::from(q) << 13)
        + (u32::from(ns / 2) << 9)
        + u32::from(cell_id)
}

pub fn scramble_bits(bits: &[Bit], c_init: u32) -> Vec<Bit> {
    bits.iter()
        .zip(GoldSequence::new(c_init))
        .map(|(&b, c)| b ^ c)
        .collect()
}

/// PDSCH c_init for codeword 0 in `subframe` (slot ns = 2·subframe).
pub fn subframe_c_init(rnti: u16, cell_id: u16, subframe: usize) -> u32 {
    pdsch_c_init(rnti, 0, (2 * (subframe % 10)) as u8, cell_id)
}

/// Soft-bit descrambling: sign flip wherever c(n) = 1.
pub fn scramble_soft(llrs: &[f64], c_init: u32) -> Vec<f64> {
    llrs.iter()
        .zip(GoldSequence::new(c_init))
        .map(|(&l, c)| if c == 1 { -l } else { l })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two explicit LFSR arrays stepped from n = 0.
    fn lfsr_oracle(c_init: u32, len: usize) -> Vec<Bit> {
        let n = NC + len;
        let mut x1 = vec![0u8; n + 31];
        let mut x2 = vec![0u8; n + 31];
        x1[0] = 1;
        for i in 0..31 {
            x2[i] = ((c_init >> i) & 1) as u8;
        }
        for k in 0..n {
            x1[k + 31] = x1[k + 3] ^ x1[k];
            x2[k + 31] = x2[k + 3] ^ x2[k + 2] ^ x2[k + 1] ^ x2[k];
        }
        (0..len).map(|k| x1[k + NC] ^ x2[k + NC]).collect()
    }

    #[test]
    fn c_init_one_prefix() {
        let expected = vec![0, 0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 0, 0, 1, 1];
        assert_eq!(lfsr_oracle(1, 16), expected);
        assert_eq!(gold_sequence(1, 16), expected);
    }

    #[test]
    fn matches_oracle_for_pdsch_seeds() {
        for ns in (0..20).step_by(2) {
            let c = pdsch_c_init(0x3C, 0, ns, 1);
            assert_eq!(gold_sequence(c, 500), lfsr_oracle(c, 500));
        }
        assert_eq!(pdsch_c_init(0x3C, 0, 0, 1), 0x3C * 16384 + 1);
        assert_eq!(pdsch_c_init(0x3C, 1, 5, 7), 0x3C * 16384 + 8192 + 2 * 512 + 7);
    }

    #[test]
    fn zero_input_yields_sequence() {
        assert_eq!(scramble_bits(&[0; 64], 1234), gold_sequence(1234, 64));
    }

    #[test]
    fn soft_descramble_commutes_with_negation() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64 - 50.0) * 0.3).collect();
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let a = scramble_soft(&neg, 99);
        let b: Vec<f64> = scramble_soft(&x, 99).iter().map(|v| -v).collect();
        assert_eq!(a, b);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn scrambling_is_an_involution(
                bits in proptest::collection::vec(0u8..2, 0..2000),
                c_init in 0u32..(1 << 31),
            ) {
                prop_assert_eq!(scramble_bits(&scramble_bits(&bits, c_init), c_init), bits);
            }
        }
    }
}
