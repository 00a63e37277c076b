//! Per-interface data volumes of the PDSCH chain for one subframe.

use super::{grid_dimensions, mcs_to_params, tbs_for_mcs, GridConfig, LteError};
use crate::tx::crc::CRC24_LEN;
use crate::tx::rate_match::code_block_lengths;
use crate::tx::segment::SegmentPlan;

/// Highest effective code rate a receiver is expected to decode.
pub const MAX_CODE_RATE: f64 = 0.93;

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceVolumes {
    pub mcs: u8,
    pub qm: usize,
    pub tb_bits: usize,
    pub crc_bits: usize,
    pub code_blocks: usize,
    /// K of every code block, in transmission order.
    pub block_sizes: Vec<usize>,
    pub filler_bits: usize,
    /// 3K + 12 per code block.
    pub coded_bits: Vec<usize>,
    /// Rate-matched bits E per code block.
    pub rate_matched: Vec<usize>,
    /// Total rate-matched bits, equal to data REs × qm.
    pub e_total: usize,
    pub symbols: usize,
    pub data_res: usize,
    pub samples: usize,
}

impl InterfaceVolumes {
    /// (TBS + 24) / E.
    pub fn code_rate(&self) -> f64 {
        self.crc_bits as f64 / self.e_total as f64
    }

    pub fn exceeds_rate_cap(&self) -> bool {
        self.code_rate() > MAX_CODE_RATE
    }

    /// Diagnostic for configurations above [`MAX_CODE_RATE`].
    pub fn check_rate(&self) -> Result<(), LteError> {
        if self.exceeds_rate_cap() {
            Err(LteError::RateUnachievable {
                mcs: self.mcs,
                rate: self.code_rate(),
                cap: MAX_CODE_RATE,
            })
        } else {
            Ok(())
        }
    }
}

/// Volumes for `mcs` under `cfg`. Rates above the cap are reported through
/// [`InterfaceVolumes::check_rate`] rather than refused here.
pub fn interface_volumes(mcs: u8, cfg: &GridConfig) -> Result<InterfaceVolumes, LteError> {
    cfg.validate()?;
    let entry = mcs_to_params(mcs)?;
    let qm = usize::from(entry.qm);
    let tb_bits = tbs_for_mcs(mcs)?;
    let crc_bits = tb_bits + CRC24_LEN;
    let plan = SegmentPlan::new(crc_bits);
    let block_sizes = plan.block_sizes();
    let (data_res, samples) = grid_dimensions(cfg);
    let e_total = data_res * qm;
    let rate_matched = code_block_lengths(e_total, qm, block_sizes.len());
    Ok(InterfaceVolumes {
        mcs,
        qm,
        tb_bits,
        crc_bits,
        code_blocks: block_sizes.len(),
        coded_bits: block_sizes.iter().map(|k| 3 * k + 12).collect(),
        block_sizes,
        filler_bits: plan.filler,
        rate_matched,
        e_total,
        symbols: e_total / qm,
        data_res,
        samples,
    })
}
