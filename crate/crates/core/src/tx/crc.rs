//! CRC-24A over hard bits, generator x^24+x^23+x^18+x^17+x^14+x^11+x^10+x^7+x^6+x^5+x^4+x^3+x+1.

use crate::Bit;

pub const CRC24A_POLY: u32 = 0x86_4CFB;
pub const CRC24_LEN: usize = 24;
const MASK: u32 = 0xFF_FFFF;

/// Remainder of `bits(x) · x^24` modulo the generator, MSB first.
pub fn crc24a(bits: &[Bit]) -> u32 {
    let mut reg = 0u32;
    for &b in bits {
        let feedback = ((reg >> 23) & 1) ^ u32::from(b & 1);
        reg = (reg << 1) & MASK;
        if feedback != 0 {
            reg ^= CRC24A_POLY;
        }
    }
    reg
}

/// `bits` followed by their 24 parity bits.
pub fn crc24a_attach(bits: &[Bit]) -> Vec<Bit> {
    let parity = crc24a(bits);
    let mut out = Vec::with_capacity(bits.len() + CRC24_LEN);
    out.extend_from_slice(bits);
    out.extend((0..CRC24_LEN).rev().map(|i| ((parity >> i) & 1) as Bit));
    out
}

/// True when `bits` (payload plus parity) leaves a zero remainder.
pub fn crc24a_check(bits: &[Bit]) -> bool {
    crc24a(bits) == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Long division of `msg · x^24` by the full 25-term generator.
    fn division_oracle(msg: &[Bit]) -> Vec<Bit> {
        let gen: Vec<Bit> = (0..=24).rev().map(|i| ((0x186_4CFBu32 >> i) & 1) as Bit).collect();
        let mut work: Vec<Bit> = msg.to_vec();
        work.extend(std::iter::repeat_n(0, 24));
        for i in 0..msg.len() {
            if work[i] == 1 {
                for (j, g) in gen.iter().enumerate() {
                    work[i + j] ^= g;
                }
            }
        }
        work[msg.len()..].to_vec()
    }

    fn bytes_to_bits(bytes: &[u8]) -> Vec<Bit> {
        bytes
            .iter()
            .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
            .collect()
    }

    #[test]
    fn zero_message_has_zero_parity() {
        let out = crc24a_attach(&[0; 100]);
        assert!(out[100..].iter().all(|&b| b == 0));
    }

    #[test]
    fn a5_pattern_matches_long_division() {
        let msg = bytes_to_bits(&[0xA5; 5]);
        let expected = division_oracle(&msg);
        // frozen from the oracle
        let frozen: u32 = expected.iter().fold(0, |acc, &b| (acc << 1) | u32::from(b));
        assert_eq!(frozen, 0xEC_E653);
        assert_eq!(&crc24a_attach(&msg)[40..], &expected[..]);
    }

    #[test]
    fn attach_then_check_passes() {
        for len in [1usize, 7, 40, 152, 1000] {
            let msg: Vec<Bit> = (0..len).map(|i| ((i * 7 + i / 3) % 2) as Bit).collect();
            assert!(crc24a_check(&crc24a_attach(&msg)));
            assert_eq!(&crc24a_attach(&msg)[len..], &division_oracle(&msg)[..]);
        }
    }

    #[test]
    fn detects_every_single_bit_error() {
        let msg: Vec<Bit> = (0..152).map(|i| ((i * 5 + 1) % 3 == 0) as Bit).collect();
        let coded = crc24a_attach(&msg);
        for pos in 0..coded.len() {
            let mut bad = coded.clone();
            bad[pos] ^= 1;
            assert!(!crc24a_check(&bad), "flip at {pos} undetected");
        }
    }
}
