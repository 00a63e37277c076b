//! Gray-mapped QPSK, 16-QAM and 64-QAM.
//!
//! Even-indexed bits of a symbol label select the in-phase level, odd bits the
//! quadrature level. Per axis the first bit is the sign and the remaining bits
//! pick the magnitude by reflected Gray code.

use num_complex::Complex64;
use thiserror::Error;

use crate::Bit;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModulationError {
    #[error("unsupported modulation order {0} (expected 2, 4 or 6)")]
    UnsupportedOrder(usize),
    #[error("{len} bits is not a multiple of {qm}")]
    Misaligned { len: usize, qm: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn from_qm(qm: usize) -> Result<Self, ModulationError> {
        match qm {
            2 => Ok(Self::Qpsk),
            4 => Ok(Self::Qam16),
            6 => Ok(Self::Qam64),
            other => Err(ModulationError::UnsupportedOrder(other)),
        }
    }

    pub fn bits_per_symbol(self) -> usize {
        match self {
            Self::Qpsk => 2,
            Self::Qam16 => 4,
            Self::Qam64 => 6,
        }
    }

    pub fn bits_per_axis(self) -> usize {
        self.bits_per_symbol() / 2
    }

    /// 1/√2, 1/√10, 1/√42.
    pub fn scale(self) -> f64 {
        match self {
            Self::Qpsk => 0.5f64.sqrt(),
            Self::Qam16 => 10f64.sqrt().recip(),
            Self::Qam64 => 42f64.sqrt().recip(),
        }
    }

    /// Unscaled amplitude level of one axis for its bits (sign bit first).
    pub fn axis_level(self, axis_bits: &[Bit]) -> f64 {
        let sign = 1.0 - 2.0 * f64::from(axis_bits[0]);
        let magnitude = match self {
            Self::Qpsk => 1.0,
            Self::Qam16 => 2.0 - (1.0 - 2.0 * f64::from(axis_bits[1])),
            Self::Qam64 => {
                4.0 - (1.0 - 2.0 * f64::from(axis_bits[1]))
                    * (2.0 - (1.0 - 2.0 * f64::from(axis_bits[2])))
            }
        };
        sign * magnitude
    }

    /// Every per-axis (label, scaled level) pair; the label packs the axis bits
    /// MSB first.
    pub fn axis_points(self) -> Vec<(usize, f64)> {
        let n = self.bits_per_axis();
        (0..1usize << n)
            .map(|label| {
                let bits: Vec<Bit> = (0..n).map(|i| ((label >> (n - 1 - i)) & 1) as Bit).collect();
                (label, self.axis_level(&bits) * self.scale())
            })
            .collect()
    }

    pub fn map_symbol(self, bits: &[Bit]) -> Complex64 {
        let n = self.bits_per_axis();
        let mut i_bits = [0 as Bit; 3];
        let mut q_bits = [0 as Bit; 3];
        for a in 0..n {
            i_bits[a] = bits[2 * a];
            q_bits[a] = bits[2 * a + 1];
        }
        Complex64::new(
            self.axis_level(&i_bits[..n]) * self.scale(),
            self.axis_level(&q_bits[..n]) * self.scale(),
        )
    }

    /// All 2^qm points indexed by label (bit 0 of the symbol is the label MSB).
    pub fn constellation(self) -> Vec<Complex64> {
        let qm = self.bits_per_symbol();
        (0..1usize << qm)
            .map(|label| {
                let bits: Vec<Bit> = (0..qm).map(|i| ((label >> (qm - 1 - i)) & 1) as Bit).collect();
                self.map_symbol(&bits)
            })
            .collect()
    }
}

pub fn modulate(bits: &[Bit], qm: usize) -> Result<Vec<Complex64>, ModulationError> {
    let m = Modulation::from_qm(qm)?;
    if !bits.len().is_multiple_of(qm) {
        return Err(ModulationError::Misaligned {
            len: bits.len(),
            qm,
        });
    }
    Ok(bits.chunks_exact(qm).map(|c| m.map_symbol(c)).collect())
}
