//! Additive white Gaussian noise channel with SNR defined on time-domain
//! samples: σ² = P_x / 10^(snr/10) with P_x the measured mean |x|².

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::lte::{FFT_SIZE, SAMPLES_PER_SUBFRAME, SUBCARRIERS};
use crate::pipeline::blocks::complex_in;
use crate::pipeline::{
    check_param_names, Block, BlockError, BlockRole, ElementKind, KindInfo, ParamValue, Params,
    Payload, PortSpec, Registry, WorkContext,
};
use crate::rng::StreamRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("empty sample buffer")]
    Empty,
    #[error("buffers differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("clean signal has zero power")]
    UndefinedSignal,
    #[error("invalid SNR {0}")]
    InvalidSnr(f64),
}

/// Signal-to-noise ratio setting, or no noise at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Db(f64),
    Noiseless,
}

impl Snr {
    pub fn db(self) -> Option<f64> {
        match self {
            Snr::Db(v) => Some(v),
            Snr::Noiseless => None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ChannelError> {
        let t = text.trim();
        if t.eq_ignore_ascii_case("noiseless") || t.eq_ignore_ascii_case("inf") {
            return Ok(Snr::Noiseless);
        }
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Snr::Db(v)),
            Ok(v) => Err(ChannelError::InvalidSnr(v)),
            Err(_) => Err(ChannelError::InvalidSnr(f64::NAN)),
        }
    }
}

impl std::fmt::Display for Snr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Snr::Db(v) => write!(f, "{v:.2}"),
            Snr::Noiseless => f.write_str("noiseless"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub snr: Snr,
    pub seed: u64,
}

/// Per-RE Es/N0 for a time-domain SNR: only 72 of 128 bins carry energy.
pub fn es_n0_db(snr_db: f64) -> f64 {
    snr_db + 10.0 * (FFT_SIZE as f64 / SUBCARRIERS as f64).log10()
}

pub fn snr_from_es_n0_db(es_n0_db: f64) -> f64 {
    es_n0_db - 10.0 * (FFT_SIZE as f64 / SUBCARRIERS as f64).log10()
}

pub fn mean_power(samples: &[Complex64]) -> f64 {
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Noisy samples together with the complex noise variance σ² that was used.
#[derive(Debug, Clone, PartialEq)]
pub struct AwgnOutput {
    pub samples: Vec<Complex64>,
    pub noise_var: f64,
}

/// Add noise drawn from `rng`. The noise is unit Gaussian scaled by σ, so a
/// given stream yields the same realisation at every SNR.
pub fn apply_awgn_with<R: Rng>(
    samples: &[Complex64],
    snr: Snr,
    rng: &mut R,
) -> Result<AwgnOutput, ChannelError> {
    if samples.is_empty() {
        return Err(ChannelError::Empty);
    }
    let snr_db = match snr {
        Snr::Noiseless => {
            return Ok(AwgnOutput {
                samples: samples.to_vec(),
                noise_var: 0.0,
            })
        }
        Snr::Db(v) if v.is_finite() => v,
        Snr::Db(v) => return Err(ChannelError::InvalidSnr(v)),
    };
    let noise_var = mean_power(samples) / 10f64.powf(snr_db / 10.0);
    let sigma = (noise_var / 2.0).sqrt();
    let out = samples
        .iter()
        .map(|&x| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            x + Complex64::new(re, im) * sigma
        })
        .collect();
    Ok(AwgnOutput {
        samples: out,
        noise_var,
    })
}

pub fn apply_awgn(samples: &[Complex64], cfg: &ChannelConfig) -> Result<AwgnOutput, ChannelError> {
    let mut rng = <StreamRng as rand::SeedableRng>::seed_from_u64(cfg.seed);
    apply_awgn_with(samples, cfg.snr, &mut rng)
}

/// 10·log10(Σ|x|² / Σ|y−x|²).
pub fn measure_snr(clean: &[Complex64], noisy: &[Complex64]) -> Result<Snr, ChannelError> {
    if clean.len() != noisy.len() {
        return Err(ChannelError::LengthMismatch(clean.len(), noisy.len()));
    }
    let signal: f64 = clean.iter().map(|x| x.norm_sqr()).sum();
    if signal == 0.0 {
        return Err(ChannelError::UndefinedSignal);
    }
    let noise: f64 = clean
        .iter()
        .zip(noisy)
        .map(|(x, y)| (y - x).norm_sqr())
        .sum();
    if noise == 0.0 {
        return Ok(Snr::Noiseless);
    }
    Ok(Snr::Db(10.0 * (signal / noise).log10()))
}

/// Registers the `awgn` block kind.
pub fn register(r: &mut Registry) {
    r.register(KindInfo {
        name: "awgn",
        role: BlockRole::Channel,
        inputs: vec![PortSpec::new("in", ElementKind::Complex)],
        outputs: vec![
            PortSpec::new("out", ElementKind::Complex),
            PortSpec::new("var", ElementKind::Soft),
        ],
        factory: AwgnBlock::create,
        params: "snr_db (number or \"noiseless\"), seed (default: run seed)",
        generic: false,
    });
}

/// AWGN on each subframe. Noise is drawn from the block's stream for the
/// current iteration, under the `seed` parameter when given and the run
/// seed otherwise. `var` carries the σ² used.
pub struct AwgnBlock {
    snr: Snr,
    seed: Option<u64>,
}

impl AwgnBlock {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["snr_db", "seed"])?;
        let snr = match p.get("snr_db") {
            None => return Err(BlockError::Param("missing required parameter `snr_db`".into())),
            Some(ParamValue::Str(s)) => Snr::parse(s).map_err(BlockError::param)?,
            Some(_) => Snr::Db(p.float("snr_db")?.expect("present")),
        };
        let seed = p.int("seed")?.map(|s| s as u64);
        Ok(Box::new(AwgnBlock { snr, seed }))
    }
}

impl Block for AwgnBlock {
    fn work(&mut self, ctx: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let samples = complex_in(&mut inputs, 0)?;
        let mut rng = ctx.rng_with_master(self.seed.unwrap_or(ctx.seed));
        let out = apply_awgn_with(&samples, self.snr, &mut rng).map_err(BlockError::failed)?;
        Ok(vec![Payload::Complex(out.samples), Payload::Soft(vec![out.noise_var])])
    }

    fn max_output_items(&self, port: usize) -> Option<usize> {
        Some(if port == 0 { SAMPLES_PER_SUBFRAME } else { 1 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| Complex64::from_polar(0.8, i as f64 * 0.37))
            .collect()
    }

    #[test]
    fn noiseless_is_identity() {
        let x = tone(100);
        let cfg = ChannelConfig {
            snr: Snr::Noiseless,
            seed: 1,
        };
        let out = apply_awgn(&x, &cfg).unwrap();
        assert_eq!(out.samples, x);
        assert_eq!(out.noise_var, 0.0);
        assert_eq!(measure_snr(&x, &out.samples).unwrap(), Snr::Noiseless);
    }

    #[test]
    fn zero_db_noise_power() {
        let n = 100_000;
        let x = tone(n);
        let out = apply_awgn(&x, &ChannelConfig { snr: Snr::Db(0.0), seed: 2 }).unwrap();
        let noise: f64 = x.iter().zip(&out.samples).map(|(a, b)| (b - a).norm_sqr()).sum::<f64>()
            / n as f64;
        let ratio = noise / mean_power(&x);
        // |n|² is exponential: relative standard deviation 1/√n
        let three_sigma = 3.0 / (n as f64).sqrt();
        assert!((ratio - 1.0).abs() < three_sigma, "ratio {ratio}");
    }

    #[test]
    fn same_seed_same_noise() {
        let x = tone(500);
        let cfg = ChannelConfig { snr: Snr::Db(5.0), seed: 3 };
        assert_eq!(apply_awgn(&x, &cfg).unwrap(), apply_awgn(&x, &cfg).unwrap());
        let other = ChannelConfig { seed: 4, ..cfg };
        assert_ne!(apply_awgn(&x, &cfg).unwrap(), apply_awgn(&x, &other).unwrap());
    }

    #[test]
    fn subframe_measurement_near_nominal() {
        let x = tone(1920);
        let mut within = 0;
        for seed in 0..200 {
            let y = apply_awgn(&x, &ChannelConfig { snr: Snr::Db(10.0), seed }).unwrap();
            let got = measure_snr(&x, &y.samples).unwrap().db().unwrap();
            if (got - 10.0).abs() <= 0.2 {
                within += 1;
            }
        }
        // ±0.2 dB is about two standard deviations of a 1920-sample estimate
        assert!(within >= 180, "{within}/200");
        let y = apply_awgn(&x, &ChannelConfig { snr: Snr::Db(10.0), seed: 42 }).unwrap();
        let got = measure_snr(&x, &y.samples).unwrap().db().unwrap();
        assert!((got - 10.0).abs() <= 0.2, "{got}");
    }

    #[test]
    fn calibration_at_large_sample_count() {
        let x = tone(100_000);
        for snr in [-5.0, 0.0, 7.5, 20.0] {
            let y = apply_awgn(&x, &ChannelConfig { snr: Snr::Db(snr), seed: 9 }).unwrap();
            let got = measure_snr(&x, &y.samples).unwrap().db().unwrap();
            assert!((got - snr).abs() < 0.05, "{snr}: {got}");
        }
    }

    #[test]
    fn noise_is_gaussian() {
        let x = vec![Complex64::new(1.0, 0.0); 1_000_000];
        let y = apply_awgn(&x, &ChannelConfig { snr: Snr::Db(0.0), seed: 5 }).unwrap();
        for part in [|c: Complex64| c.re, |c: Complex64| c.im] {
            let v: Vec<f64> = x.iter().zip(&y.samples).map(|(a, b)| part(b - a)).collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let m2 = v.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / v.len() as f64;
            let m4 = v.iter().map(|t| (t - mean).powi(4)).sum::<f64>() / v.len() as f64;
            let kurtosis = m4 / (m2 * m2);
            assert!((kurtosis - 3.0).abs() < 0.2, "kurtosis {kurtosis}");
            assert!((m2 - 0.5).abs() < 0.01);
        }
    }

    #[test]
    fn error_cases() {
        let cfg = ChannelConfig { snr: Snr::Db(0.0), seed: 0 };
        assert_eq!(apply_awgn(&[], &cfg).unwrap_err(), ChannelError::Empty);
        let z = vec![Complex64::new(0.0, 0.0); 4];
        assert_eq!(measure_snr(&z, &tone(4)).unwrap_err(), ChannelError::UndefinedSignal);
        assert!(measure_snr(&z, &tone(5)).is_err());
    }

    #[test]
    fn snr_text_forms() {
        assert_eq!(Snr::parse("noiseless").unwrap(), Snr::Noiseless);
        assert_eq!(Snr::parse(" -3.5 ").unwrap(), Snr::Db(-3.5));
        assert!(Snr::parse("loud").is_err());
        assert!((es_n0_db(0.0) - 2.498774732).abs() < 1e-6);
        assert!((snr_from_es_n0_db(es_n0_db(4.0)) - 4.0).abs() < 1e-12);
    }
}
