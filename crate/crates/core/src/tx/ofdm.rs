//! OFDM modulation with a 128-point unitary transform.
//!
//! The 72 subcarriers sit on bins −36..−1 and +1..+36 around an unused DC
//! bin. Symbol 0 of each slot carries a 10-sample cyclic prefix, the others 9.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use super::grid::ResourceGrid;
use crate::lte::{
    GridConfig, CP_FIRST, CP_OTHER, FFT_SIZE, SAMPLES_PER_SUBFRAME, SUBCARRIERS,
    SYMBOLS_PER_SLOT, SYMBOLS_PER_SUBFRAME,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("expected {expected} samples, got {got}")]
pub struct SampleCountError {
    pub expected: usize,
    pub got: usize,
}

pub fn cp_len(symbol: usize) -> usize {
    if symbol.is_multiple_of(SYMBOLS_PER_SLOT) {
        CP_FIRST
    } else {
        CP_OTHER
    }
}

/// FFT bin of subcarrier `k`.
pub fn subcarrier_bin(k: usize) -> usize {
    let half = SUBCARRIERS / 2;
    if k < half {
        FFT_SIZE - half + k
    } else {
        k - half + 1
    }
}

#[derive(Clone)]
pub struct Ofdm {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Ofdm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Ofdm").field("fft_size", &FFT_SIZE).finish()
    }
}

impl Default for Ofdm {
    fn default() -> Self {
        Self::new()
    }
}

impl Ofdm {
    pub fn new() -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(FFT_SIZE),
            inverse: planner.plan_fft_inverse(FFT_SIZE),
            scale: (FFT_SIZE as f64).sqrt().recip(),
        }
    }

    pub fn modulate(&self, grid: &ResourceGrid) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(SAMPLES_PER_SUBFRAME);
        let mut buf = vec![Complex64::new(0.0, 0.0); FFT_SIZE];
        for l in 0..SYMBOLS_PER_SUBFRAME {
            buf.fill(Complex64::new(0.0, 0.0));
            for (k, &v) in grid.symbol(l).iter().enumerate() {
                buf[subcarrier_bin(k)] = v;
            }
            self.inverse.process(&mut buf);
            buf.iter_mut().for_each(|x| *x *= self.scale);
            out.extend_from_slice(&buf[FFT_SIZE - cp_len(l)..]);
            out.extend_from_slice(&buf);
        }
        out
    }

    pub fn demodulate(
        &self,
        samples: &[Complex64],
        cfg: GridConfig,
    ) -> Result<ResourceGrid, SampleCountError> {
        if samples.len() != SAMPLES_PER_SUBFRAME {
            return Err(SampleCountError {
                expected: SAMPLES_PER_SUBFRAME,
                got: samples.len(),
            });
        }
        let mut grid = ResourceGrid::zeros(cfg);
        let mut buf = vec![Complex64::new(0.0, 0.0); FFT_SIZE];
        let mut pos = 0;
        for l in 0..SYMBOLS_PER_SUBFRAME {
            pos += cp_len(l);
            buf.copy_from_slice(&samples[pos..pos + FFT_SIZE]);
            pos += FFT_SIZE;
            self.forward.process(&mut buf);
            for (k, re) in grid.symbol_mut(l).iter_mut().enumerate() {
                *re = buf[subcarrier_bin(k)] * self.scale;
            }
        }
        Ok(grid)
    }
}

pub fn ofdm_modulate(grid: &ResourceGrid) -> Vec<Complex64> {
    Ofdm::new().modulate(grid)
}

pub fn ofdm_demodulate(
    samples: &[Complex64],
    cfg: GridConfig,
) -> Result<ResourceGrid, SampleCountError> {
    Ofdm::new().demodulate(samples, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tx::grid::GRID_RES;
    use rand::{Rng, SeedableRng};

    fn random_grid(seed: u64) -> ResourceGrid {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let values = (0..GRID_RES)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ResourceGrid::from_values(GridConfig::default(), values).unwrap()
    }

    fn bodies(samples: &[Complex64]) -> Vec<&[Complex64]> {
        let mut pos = 0;
        (0..SYMBOLS_PER_SUBFRAME)
            .map(|l| {
                pos += cp_len(l);
                let body = &samples[pos..pos + FFT_SIZE];
                pos += FFT_SIZE;
                body
            })
            .collect()
    }

    #[test]
    fn bins_skip_dc_and_are_distinct() {
        let mut bins: Vec<usize> = (0..SUBCARRIERS).map(subcarrier_bin).collect();
        assert!(!bins.contains(&0));
        bins.sort();
        bins.dedup();
        assert_eq!(bins.len(), SUBCARRIERS);
    }

    #[test]
    fn output_length() {
        assert_eq!(ofdm_modulate(&random_grid(1)).len(), 1920);
    }

    #[test]
    fn roundtrip_within_tolerance() {
        let g = random_grid(2);
        let back = ofdm_demodulate(&ofdm_modulate(&g), GridConfig::default()).unwrap();
        let rms = (g
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            / GRID_RES as f64)
            .sqrt();
        assert!(rms <= 1e-9, "rms {rms}");
    }

    #[test]
    fn single_subcarrier_has_constant_modulus() {
        let mut g = ResourceGrid::zeros(GridConfig::default());
        g.symbol_mut(5)[10] = Complex64::new(1.0, 0.0);
        let samples = ofdm_modulate(&g);
        let body = bodies(&samples)[5];
        for s in body {
            assert!((s.norm() - (FFT_SIZE as f64).sqrt().recip()).abs() < 1e-12);
        }
    }

    #[test]
    fn cyclic_prefix_copies_symbol_tail() {
        let samples = ofdm_modulate(&random_grid(3));
        assert_eq!(&samples[..10], &samples[128..138]);
        let second = 138;
        assert_eq!(&samples[second..second + 9], &samples[second + 128..second + 137]);
    }

    #[test]
    fn parseval_per_symbol() {
        let g = random_grid(4);
        let samples = ofdm_modulate(&g);
        for (l, body) in bodies(&samples).iter().enumerate() {
            let time_power = body.iter().map(|s| s.norm_sqr()).sum::<f64>() / FFT_SIZE as f64;
            let re_power = g.symbol(l).iter().map(|s| s.norm_sqr()).sum::<f64>() / SUBCARRIERS as f64;
            let ratio = SUBCARRIERS as f64 / FFT_SIZE as f64;
            assert!((time_power - re_power * ratio).abs() < 1e-6);
        }
    }

    #[test]
    fn noise_energy_splits_by_occupied_bins() {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut grid_energy = 0.0;
        let mut body_energy = 0.0;
        for _ in 0..200 {
            let samples: Vec<Complex64> = (0..SAMPLES_PER_SUBFRAME)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect();
            let grid = ofdm_demodulate(&samples, GridConfig::default()).unwrap();
            grid_energy += grid.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
            body_energy += bodies(&samples)
                .iter()
                .flat_map(|b| b.iter())
                .map(|s| s.norm_sqr())
                .sum::<f64>();
        }
        // white noise spreads evenly over the 128 bins
        let ratio = grid_energy / body_energy;
        assert!((ratio - 72.0 / 128.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn wrong_length_rejected() {
        let err = ofdm_demodulate(&vec![Complex64::new(0.0, 0.0); 1919], GridConfig::default());
        assert_eq!(err.unwrap_err(), SampleCountError { expected: 1920, got: 1919 });
    }
}
