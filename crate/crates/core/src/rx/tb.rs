//! Transport block recovery: desegmentation and CRC-24A check.

use crate::tx::crc::{crc24a_check, CRC24_LEN};
use crate::tx::segment::{desegment, CodeBlock};
use crate::Bit;

use super::turbo_dec::DecodeResult;

/// Recovered payload (CRC stripped) and whether the CRC passed.
pub fn recover_transport_block(blocks: &[DecodeResult]) -> (Vec<Bit>, bool) {
    let cbs: Vec<CodeBlock> = blocks
        .iter()
        .map(|b| CodeBlock {
            bits: b.bits.clone(),
            filler: b.filler,
        })
        .collect();
    recover_from_code_blocks(&cbs)
}

pub fn recover_from_code_blocks(blocks: &[CodeBlock]) -> (Vec<Bit>, bool) {
    let mut with_crc = desegment(blocks);
    let ok = with_crc.len() >= CRC24_LEN && crc24a_check(&with_crc);
    with_crc.truncate(with_crc.len().saturating_sub(CRC24_LEN));
    (with_crc, ok)
}
