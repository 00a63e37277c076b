//! MCS and TBS fixtures.
//!
//! The tables ship as CSV files under `fixtures/` and are compiled into the
//! binary. A different directory holding files with the same names can be
//! installed once at start-up with [`install_tables`].

use std::path::Path;

use once_cell::sync::OnceCell;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{LteError, MAX_MCS, N_PRB};

pub const MCS_FILE: &str = "mcs_table.csv";
pub const TBS_FILE: &str = "tbs_6prb.csv";

const MCS_CSV: &str = include_str!("../../fixtures/mcs_table.csv");
const TBS_CSV: &str = include_str!("../../fixtures/tbs_6prb.csv");

/// SHA-256 of the embedded fixtures. A mismatch means the files were edited
/// without updating this constant.
pub const MCS_SHA256: &str = "81c95af3c22b2bc3ec43919a6d97319508d240a99be1b9b1bfe88f5571351e4c";
pub const TBS_SHA256: &str = "55eeea1b0b6e8c5d39e13bf6f8bf385f4be6d5dfc97e089a6d10f9b98f563dd3";

static TABLES: OnceCell<LteTables> = OnceCell::new();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct McsEntry {
    pub mcs: u8,
    /// Bits per modulation symbol.
    pub qm: u8,
    pub itbs: u8,
}

#[derive(Debug, Deserialize)]
struct TbsRow {
    itbs: u8,
    n_prb: usize,
    tbs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureChecksums {
    pub mcs_sha256: String,
    pub tbs_sha256: String,
}

#[derive(Debug, Clone)]
pub struct LteTables {
    mcs: Vec<McsEntry>,
    tbs: Vec<usize>,
    checksums: FixtureChecksums,
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl LteTables {
    pub fn embedded() -> Self {
        Self::from_csv(MCS_CSV, TBS_CSV).expect("embedded fixtures are valid")
    }

    pub fn from_dir(dir: &Path) -> Result<Self, LteError> {
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name))
                .map_err(|e| LteError::Fixture(format!("{}: {e}", dir.join(name).display())))
        };
        Self::from_csv(&read(MCS_FILE)?, &read(TBS_FILE)?)
    }

    pub fn from_csv(mcs_csv: &str, tbs_csv: &str) -> Result<Self, LteError> {
        let fixture = |e: csv::Error| LteError::Fixture(e.to_string());

        let mut mcs: Vec<McsEntry> = csv::Reader::from_reader(mcs_csv.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(fixture)?;
        mcs.sort_by_key(|e| e.mcs);
        if mcs.len() != usize::from(MAX_MCS) + 1
            || mcs.iter().enumerate().any(|(i, e)| usize::from(e.mcs) != i)
        {
            return Err(LteError::Fixture("MCS table must list 0..=28 once each".into()));
        }
        if mcs.iter().any(|e| !matches!(e.qm, 2 | 4 | 6)) {
            return Err(LteError::Fixture("qm must be 2, 4 or 6".into()));
        }
        if mcs.windows(2).any(|w| w[1].qm < w[0].qm || w[1].itbs < w[0].itbs) {
            return Err(LteError::Fixture("qm and itbs must be nondecreasing in mcs".into()));
        }

        let mut rows: Vec<TbsRow> = csv::Reader::from_reader(tbs_csv.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .map_err(fixture)?;
        rows.retain(|r| r.n_prb == N_PRB);
        rows.sort_by_key(|r| r.itbs);
        if rows.iter().enumerate().any(|(i, r)| usize::from(r.itbs) != i) {
            return Err(LteError::Fixture("TBS table must list itbs 0.. once each".into()));
        }
        let tbs: Vec<usize> = rows.iter().map(|r| r.tbs).collect();
        if tbs.contains(&0) || tbs.windows(2).any(|w| w[1] < w[0]) {
            return Err(LteError::Fixture("TBS must be positive and nondecreasing".into()));
        }
        if let Some(e) = mcs.iter().find(|e| usize::from(e.itbs) >= tbs.len()) {
            return Err(LteError::Fixture(format!(
                "mcs {} references missing itbs {}",
                e.mcs, e.itbs
            )));
        }

        Ok(Self {
            mcs,
            tbs,
            checksums: FixtureChecksums {
                mcs_sha256: sha256_hex(mcs_csv),
                tbs_sha256: sha256_hex(tbs_csv),
            },
        })
    }

    pub fn mcs(&self, mcs: u8) -> Result<McsEntry, LteError> {
        self.mcs
            .get(usize::from(mcs))
            .copied()
            .ok_or(LteError::McsOutOfRange(mcs))
    }

    pub fn tbs(&self, itbs: u8, n_prb: usize) -> Result<usize, LteError> {
        if n_prb != N_PRB {
            return Err(LteError::UnsupportedPrb(n_prb));
        }
        self.tbs
            .get(usize::from(itbs))
            .copied()
            .ok_or(LteError::ItbsOutOfRange(itbs))
    }

    pub fn checksums(&self) -> &FixtureChecksums {
        &self.checksums
    }

    pub fn is_embedded(&self) -> bool {
        self.checksums.mcs_sha256 == MCS_SHA256 && self.checksums.tbs_sha256 == TBS_SHA256
    }
}

/// Process-wide tables; the embedded fixtures unless [`install_tables`] ran first.
pub fn tables() -> &'static LteTables {
    TABLES.get_or_init(LteTables::embedded)
}

/// Install alternative tables. Fails if tables were already installed or used.
pub fn install_tables(tables: LteTables) -> Result<(), LteError> {
    TABLES
        .set(tables)
        .map_err(|_| LteError::Fixture("tables already initialised".into()))
}
