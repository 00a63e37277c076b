//! Resource grid for one subframe: 72 subcarriers × 14 OFDM symbols.

use num_complex::Complex64;
use thiserror::Error;

use super::scramble::GoldSequence;
use crate::lte::{grid_dimensions, GridConfig, LteError, SUBCARRIERS, SYMBOLS_PER_SUBFRAME};

pub const GRID_RES: usize = SUBCARRIERS * SYMBOLS_PER_SUBFRAME;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReClass {
    Data,
    Control,
    Reference,
    /// Reserved; no RE of the 6-PRB layout is left unused.
    Unused,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("expected {expected} data symbols, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("expected {expected} resource elements, got {got}")]
    WrongSize { expected: usize, got: usize },
    #[error(transparent)]
    Config(#[from] LteError),
}

/// RE classes in symbol-major order (index = symbol · 72 + subcarrier).
pub fn re_layout(cfg: &GridConfig) -> Vec<ReClass> {
    let mut classes = vec![ReClass::Data; GRID_RES];
    for l in 0..cfg.control_symbols.min(SYMBOLS_PER_SUBFRAME) {
        classes[l * SUBCARRIERS..(l + 1) * SUBCARRIERS].fill(ReClass::Control);
    }
    let v_shift = usize::from(cfg.cell_id) % 6;
    for l in cfg.reference_symbols() {
        let v = if l % 7 == 0 { 0 } else { 3 };
        for m in 0..SUBCARRIERS / 6 {
            let k = 6 * m + (v + v_shift) % 6;
            classes[l * SUBCARRIERS + k] = ReClass::Reference;
        }
    }
    classes
}

/// Deterministic QPSK filler for control and reference REs of a subframe.
fn placeholder_symbols(cfg: &GridConfig, subframe: usize) -> impl Iterator<Item = Complex64> {
    let ns = 2 * (subframe % 10) as u32;
    let id = u32::from(cfg.cell_id);
    let c_init = (((7 * (ns + 1) + 1) * (2 * id + 1)) << 10) + 2 * id + 1;
    let mut seq = GoldSequence::new(c_init);
    let a = 0.5f64.sqrt();
    std::iter::from_fn(move || {
        let i = seq.next()?;
        let q = seq.next()?;
        Some(Complex64::new(
            a * (1.0 - 2.0 * f64::from(i)),
            a * (1.0 - 2.0 * f64::from(q)),
        ))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    cfg: GridConfig,
    values: Vec<Complex64>,
}

impl ResourceGrid {
    pub fn zeros(cfg: GridConfig) -> Self {
        Self {
            cfg,
            values: vec![Complex64::new(0.0, 0.0); GRID_RES],
        }
    }

    /// Wrap symbol-major RE values.
    pub fn from_values(cfg: GridConfig, values: Vec<Complex64>) -> Result<Self, GridError> {
        if values.len() != GRID_RES {
            return Err(GridError::WrongSize {
                expected: GRID_RES,
                got: values.len(),
            });
        }
        Ok(Self { cfg, values })
    }

    pub fn config(&self) -> &GridConfig {
        &self.cfg
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn symbol(&self, l: usize) -> &[Complex64] {
        &self.values[l * SUBCARRIERS..(l + 1) * SUBCARRIERS]
    }

    pub fn symbol_mut(&mut self, l: usize) -> &mut [Complex64] {
        &mut self.values[l * SUBCARRIERS..(l + 1) * SUBCARRIERS]
    }

    pub fn get(&self, symbol: usize, subcarrier: usize) -> Complex64 {
        self.values[symbol * SUBCARRIERS + subcarrier]
    }

    pub fn classes(&self) -> Vec<ReClass> {
        re_layout(&self.cfg)
    }

    pub fn mean_power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }
}

/// Fill data REs frequency-first, then time; control and reference REs get
/// placeholder QPSK.
pub fn map_resources(
    symbols: &[Complex64],
    cfg: &GridConfig,
    subframe: usize,
) -> Result<ResourceGrid, GridError> {
    cfg.validate()?;
    let (expected, _) = grid_dimensions(cfg);
    if symbols.len() != expected {
        return Err(GridError::CountMismatch {
            expected,
            got: symbols.len(),
        });
    }
    let mut grid = ResourceGrid::zeros(*cfg);
    let mut data = symbols.iter();
    let mut filler = placeholder_symbols(cfg, subframe);
    for (re, class) in grid.values.iter_mut().zip(re_layout(cfg)) {
        match class {
            ReClass::Data => *re = *data.next().expect("count checked"),
            ReClass::Control | ReClass::Reference => {
                *re = filler.next().expect("sequence is unbounded")
            }
            ReClass::Unused => {}
        }
    }
    Ok(grid)
}

/// (data symbols in mapping order, control-region symbols).
pub fn demap_resources(grid: &ResourceGrid) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut data = Vec::with_capacity(grid_dimensions(&grid.cfg).0);
    let mut control = Vec::new();
    for (re, class) in grid.values.iter().zip(re_layout(&grid.cfg)) {
        match class {
            ReClass::Data => data.push(*re),
            ReClass::Control => control.push(*re),
            ReClass::Reference | ReClass::Unused => {}
        }
    }
    (data, control)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize) -> Vec<Complex64> {
        (0..n).map(|i| Complex64::new(i as f64, -(i as f64))).collect()
    }

    #[test]
    fn default_layout_counts() {
        let layout = re_layout(&GridConfig::default());
        let count = |c| layout.iter().filter(|&&x| x == c).count();
        assert_eq!(count(ReClass::Data), 756);
        assert_eq!(count(ReClass::Control), 216);
        assert_eq!(count(ReClass::Reference), 36);
        assert_eq!(count(ReClass::Unused), 0);
    }

    #[test]
    fn data_count_matches_dimensions_for_all_valid_configs() {
        for l in 0..=4 {
            for crs in [0, 2, 4, 6] {
                let cfg = GridConfig {
                    control_symbols: l,
                    crs_per_prb: crs,
                    cell_id: 3,
                };
                if cfg.validate().is_err() {
                    continue;
                }
                let data = re_layout(&cfg).iter().filter(|&&c| c == ReClass::Data).count();
                assert_eq!(data, grid_dimensions(&cfg).0, "L={l} crs={crs}");
            }
        }
    }

    #[test]
    fn map_demap_roundtrip() {
        let cfg = GridConfig::default();
        let syms = ramp(756);
        let grid = map_resources(&syms, &cfg, 4).unwrap();
        let (data, control) = demap_resources(&grid);
        assert_eq!(data, syms);
        assert_eq!(control.len(), 216);
        // frequency-first: the first data RE is subcarrier 0 of symbol 3
        assert_eq!(grid.get(3, 0), syms[0]);
        assert_eq!(grid.get(3, 71), syms[71]);
    }

    #[test]
    fn wrong_count_rejected() {
        let err = map_resources(&ramp(755), &GridConfig::default(), 0).unwrap_err();
        assert_eq!(err, GridError::CountMismatch { expected: 756, got: 755 });
    }

    #[test]
    fn placeholders_are_deterministic_qpsk() {
        let cfg = GridConfig::default();
        let a = map_resources(&ramp(756), &cfg, 2).unwrap();
        let b = map_resources(&ramp(756), &cfg, 2).unwrap();
        assert_eq!(a, b);
        for (v, c) in a.values().iter().zip(re_layout(&cfg)) {
            if c != ReClass::Data {
                assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }
}
