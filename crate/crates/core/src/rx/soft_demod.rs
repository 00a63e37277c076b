//! Max-log soft demodulation to LLRs, convention LLR = log P(b=0)/P(b=1).

use num_complex::Complex64;
use thiserror::Error;

use crate::tx::modulation::{Modulation, ModulationError};
use crate::Bit;

/// Smallest noise variance used when turning a measured or reported σ²
/// into LLRs; lets a noiseless channel (σ² = 0) feed the demodulator.
pub const NOISE_VAR_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DemodError {
    #[error("noise variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error(transparent)]
    Modulation(#[from] ModulationError),
}

/// Per-axis demodulation table: for each bit of the axis, the scaled levels
/// whose label has that bit 0 and 1.
struct AxisTable {
    levels: Vec<(usize, f64)>,
    bits: usize,
}

impl AxisTable {
    fn new(m: Modulation) -> Self {
        Self {
            levels: m.axis_points(),
            bits: m.bits_per_axis(),
        }
    }

    /// Writes the LLR of every axis bit for received coordinate `y`.
    fn llrs(&self, y: f64, inv_var: f64, out: &mut [f64; 3]) {
        let mut best = [[f64::INFINITY; 2]; 3];
        for &(label, a) in &self.levels {
            let d = (y - a) * (y - a);
            for (b, slot) in best.iter_mut().enumerate().take(self.bits) {
                let bit = (label >> (self.bits - 1 - b)) & 1;
                if d < slot[bit] {
                    slot[bit] = d;
                }
            }
        }
        for b in 0..self.bits {
            out[b] = (best[b][1] - best[b][0]) * inv_var;
        }
    }
}

/// LLR_i = (min_{s: b_i=1}|y−s|² − min_{s: b_i=0}|y−s|²) / σ².
pub fn soft_demodulate(
    symbols: &[Complex64],
    qm: usize,
    noise_var: f64,
) -> Result<Vec<f64>, DemodError> {
    if !(noise_var > 0.0) {
        return Err(DemodError::NonPositiveVariance(noise_var));
    }
    let m = Modulation::from_qm(qm)?;
    let table = AxisTable::new(m);
    let inv_var = noise_var.recip();
    let n = m.bits_per_axis();
    let mut out = Vec::with_capacity(symbols.len() * qm);
    let mut li = [0.0; 3];
    let mut lq = [0.0; 3];
    for s in symbols {
        table.llrs(s.re, inv_var, &mut li);
        table.llrs(s.im, inv_var, &mut lq);
        for a in 0..n {
            out.push(li[a]);
            out.push(lq[a]);
        }
    }
    Ok(out)
}

/// Hard decision with the tie rule LLR = 0 ⇒ 0.
pub fn hard_decision(llrs: &[f64]) -> Vec<Bit> {
    llrs.iter().map(|&l| Bit::from(l < 0.0)).collect()
}
