//! LTE numerology and MCS/TBS tables for the 1.4 MHz (6 PRB) configuration.

mod tables;
mod volumes;

use std::collections::BTreeMap;

use thiserror::Error;

pub use tables::{install_tables, tables, FixtureChecksums, LteTables, McsEntry};
pub use volumes::{interface_volumes, InterfaceVolumes, MAX_CODE_RATE};

/// Number of physical resource blocks (1.4 MHz).
pub const N_PRB: usize = 6;
pub const SUBCARRIERS_PER_PRB: usize = 12;
pub const SUBCARRIERS: usize = N_PRB * SUBCARRIERS_PER_PRB;
pub const SYMBOLS_PER_SUBFRAME: usize = 14;
pub const SYMBOLS_PER_SLOT: usize = 7;
pub const FFT_SIZE: usize = 128;
pub const SAMPLE_RATE_HZ: f64 = 1.92e6;
pub const SAMPLES_PER_SUBFRAME: usize = 1920;
/// Cyclic prefix of the first symbol of each slot, and of the others.
pub const CP_FIRST: usize = 10;
pub const CP_OTHER: usize = 9;
/// Duration of one transmission time interval.
pub const TTI_SECONDS: f64 = 1e-3;
pub const MAX_MCS: u8 = 28;

/// OFDM symbols that carry cell-specific reference signals (antenna port 0).
pub const CRS_SYMBOLS: [usize; 4] = [0, 4, 7, 11];
pub const CRS_PER_PRB_PER_SYMBOL: usize = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LteError {
    #[error("mcs {0} out of range 0..=28")]
    McsOutOfRange(u8),
    #[error("itbs {0} out of range 0..=26")]
    ItbsOutOfRange(u8),
    #[error("unsupported bandwidth: {0} PRB (only 6 is supported)")]
    UnsupportedPrb(usize),
    #[error("invalid grid configuration: {0}")]
    InvalidGrid(String),
    #[error("rate unachievable: mcs {mcs} needs code rate {rate:.4} > {cap}")]
    RateUnachievable { mcs: u8, rate: f64, cap: f64 },
    #[error("empty BLER table")]
    EmptyTable,
    #[error("fixture error: {0}")]
    Fixture(String),
}

/// Grid layout parameters. Everything except the control region size, the
/// reference-signal overhead and the cell identity is fixed by the 1.4 MHz
/// numerology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridConfig {
    /// Control region size L in OFDM symbols (0..=4).
    pub control_symbols: usize,
    /// CRS resource elements per PRB per subframe outside the control region.
    pub crs_per_prb: usize,
    pub cell_id: u16,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            control_symbols: 3,
            crs_per_prb: 6,
            cell_id: 1,
        }
    }
}

impl GridConfig {
    /// CRS symbols outside the control region that carry reference REs under
    /// this configuration, in time order.
    pub fn reference_symbols(&self) -> Vec<usize> {
        let n = self.crs_per_prb / CRS_PER_PRB_PER_SYMBOL;
        CRS_SYMBOLS
            .iter()
            .copied()
            .filter(|&l| l >= self.control_symbols)
            .take(n)
            .collect()
    }

    pub fn validate(&self) -> Result<(), LteError> {
        if self.control_symbols > 4 {
            return Err(LteError::InvalidGrid(format!(
                "control region of {} symbols (max 4)",
                self.control_symbols
            )));
        }
        if !self.crs_per_prb.is_multiple_of(CRS_PER_PRB_PER_SYMBOL) {
            return Err(LteError::InvalidGrid(format!(
                "crs_per_prb {} is not a multiple of {CRS_PER_PRB_PER_SYMBOL}",
                self.crs_per_prb
            )));
        }
        let available = CRS_SYMBOLS
            .iter()
            .filter(|&&l| l >= self.control_symbols)
            .count()
            * CRS_PER_PRB_PER_SYMBOL;
        if self.crs_per_prb > available {
            return Err(LteError::InvalidGrid(format!(
                "crs_per_prb {} exceeds the {available} reference REs outside a {}-symbol control region",
                self.crs_per_prb, self.control_symbols
            )));
        }
        Ok(())
    }
}

/// (data REs per subframe, samples per subframe).
pub fn grid_dimensions(cfg: &GridConfig) -> (usize, usize) {
    let per_prb =
        SUBCARRIERS_PER_PRB * (SYMBOLS_PER_SUBFRAME - cfg.control_symbols) - cfg.crs_per_prb;
    (N_PRB * per_prb, SAMPLES_PER_SUBFRAME)
}

pub fn mcs_to_params(mcs: u8) -> Result<McsEntry, LteError> {
    tables().mcs(mcs)
}

pub fn transport_block_size(itbs: u8, n_prb: usize) -> Result<usize, LteError> {
    tables().tbs(itbs, n_prb)
}

/// TBS in bits for an MCS index at 6 PRB.
pub fn tbs_for_mcs(mcs: u8) -> Result<usize, LteError> {
    let entry = mcs_to_params(mcs)?;
    transport_block_size(entry.itbs, N_PRB)
}

/// Offered throughput in bit/s: one transport block per TTI.
pub fn throughput_bps(mcs: u8) -> Result<f64, LteError> {
    Ok(tbs_for_mcs(mcs)? as f64 / TTI_SECONDS)
}

/// Largest MCS whose BLER does not exceed `target`.
pub fn select_mcs_for_target(
    bler_by_mcs: &BTreeMap<u8, f64>,
    target: f64,
) -> Result<Option<u8>, LteError> {
    if bler_by_mcs.is_empty() {
        return Err(LteError::EmptyTable);
    }
    Ok(bler_by_mcs
        .iter()
        .rev()
        .find(|(_, &bler)| bler <= target)
        .map(|(&mcs, _)| mcs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcs_rows_from_fixture() {
        let e = mcs_to_params(0).unwrap();
        assert_eq!((e.qm, e.itbs), (2, 0));
        let e = mcs_to_params(10).unwrap();
        assert_eq!((e.qm, e.itbs), (4, 9));
        let e = mcs_to_params(28).unwrap();
        assert_eq!((e.qm, e.itbs), (6, 26));
        assert_eq!(mcs_to_params(29), Err(LteError::McsOutOfRange(29)));
    }

    #[test]
    fn tbs_lookup() {
        let first = transport_block_size(0, 6).unwrap();
        let (data_res, _) = grid_dimensions(&GridConfig::default());
        assert!(first > 0 && first < data_res * 2);
        let last = transport_block_size(26, 6).unwrap();
        let max = (0..=26)
            .map(|i| transport_block_size(i, 6).unwrap())
            .max()
            .unwrap();
        assert_eq!(last, max);
        assert_eq!(transport_block_size(0, 3), Err(LteError::UnsupportedPrb(3)));
        assert_eq!(transport_block_size(27, 6), Err(LteError::ItbsOutOfRange(27)));
    }

    #[test]
    fn tbs_monotone_in_mcs() {
        let sizes: Vec<usize> = (0..=MAX_MCS).map(|m| tbs_for_mcs(m).unwrap()).collect();
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn grid_dimension_examples() {
        assert_eq!(grid_dimensions(&GridConfig::default()), (756, 1920));
        let bare = GridConfig {
            control_symbols: 0,
            crs_per_prb: 0,
            cell_id: 1,
        };
        assert_eq!(grid_dimensions(&bare), (1008, 1920));
        let per_slot = (FFT_SIZE + CP_FIRST) + 6 * (FFT_SIZE + CP_OTHER);
        assert_eq!(2 * per_slot, SAMPLES_PER_SUBFRAME);
        assert_eq!(SUBCARRIERS, 72);
    }

    #[test]
    fn grid_config_validation() {
        assert!(GridConfig::default().validate().is_ok());
        let too_many = GridConfig {
            control_symbols: 4,
            crs_per_prb: 6,
            cell_id: 1,
        };
        // symbols 4, 7, 11 remain: 6 REs fit
        assert!(too_many.validate().is_ok());
        let odd = GridConfig {
            crs_per_prb: 5,
            ..GridConfig::default()
        };
        assert!(odd.validate().is_err());
        let big = GridConfig {
            control_symbols: 5,
            ..GridConfig::default()
        };
        assert!(big.validate().is_err());
        assert_eq!(GridConfig::default().reference_symbols(), vec![4, 7, 11]);
    }

    #[test]
    fn mcs_selection_examples() {
        let table: BTreeMap<u8, f64> =
            [(0, 0.001), (1, 0.05), (2, 0.09), (3, 0.3), (4, 0.8)].into();
        assert_eq!(select_mcs_for_target(&table, 0.1).unwrap(), Some(2));
        let bad: BTreeMap<u8, f64> = (0..5).map(|m| (m, 1.0)).collect();
        assert_eq!(select_mcs_for_target(&bad, 0.1).unwrap(), None);
        let edge: BTreeMap<u8, f64> = [(5, 0.1)].into();
        assert_eq!(select_mcs_for_target(&edge, 0.1).unwrap(), Some(5));
        assert_eq!(
            select_mcs_for_target(&BTreeMap::new(), 0.1),
            Err(LteError::EmptyTable)
        );
    }

    #[test]
    fn throughput_is_tbs_per_tti() {
        for mcs in 0..=MAX_MCS {
            let tbs = tbs_for_mcs(mcs).unwrap();
            assert_eq!(throughput_bps(mcs).unwrap(), tbs as f64 * 1000.0);
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn selection_invariant_under_monotone_rescaling(
                blers in proptest::collection::vec(0.0f64..1.0, 1..29),
                power in 0.2f64..5.0,
            ) {
                let target = 0.1;
                let table: BTreeMap<u8, f64> =
                    blers.iter().enumerate().map(|(m, &b)| (m as u8, b)).collect();
                // x -> target * (x / target)^p is strictly monotone and fixes the target
                let rescaled: BTreeMap<u8, f64> = table
                    .iter()
                    .map(|(&m, &b)| (m, target * (b / target).powf(power)))
                    .collect();
                prop_assert_eq!(
                    select_mcs_for_target(&table, target).unwrap(),
                    select_mcs_for_target(&rescaled, target).unwrap()
                );
            }
        }
    }
}
