//! `key = value` defaults file. Flags override every key.

use std::path::Path;

use anyhow::{bail, Context, Result};

use pdsch_bench::harness::{ThroughputMode, MIN_BLOCK_ERRORS};
use pdsch_bench::rx::MAX_ITERATIONS;

/// Environment variable naming a defaults file to load when `--config` is absent.
pub const CONFIG_ENV: &str = "PDSCH_BENCH_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct Defaults {
    /// Transport blocks per operating point.
    pub blocks: usize,
    /// Early stop after this many block errors; 0 runs the full budget.
    pub max_block_errors: usize,
    /// Turbo decoder iterations.
    pub iterations: usize,
    pub seed: u64,
    /// Bits per SNR point of the uncoded BER test.
    pub ber_bits: usize,
    pub throughput: ThroughputMode,
}

impl Default for Defaults {
    fn default() -> Self {
        Self {
            blocks: 1000,
            max_block_errors: MIN_BLOCK_ERRORS,
            iterations: 5,
            seed: 1,
            ber_bits: 100_000,
            throughput: ThroughputMode::Offered,
        }
    }
}

pub fn parse_throughput(s: &str) -> Result<ThroughputMode> {
    match s {
        "offered" => Ok(ThroughputMode::Offered),
        "goodput" => Ok(ThroughputMode::Goodput),
        other => bail!("throughput must be `offered` or `goodput`, got `{other}`"),
    }
}

pub fn throughput_name(t: ThroughputMode) -> &'static str {
    match t {
        ThroughputMode::Offered => "offered",
        ThroughputMode::Goodput => "goodput",
    }
}

impl Defaults {
    pub fn parse(text: &str) -> Result<Self> {
        let mut d = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", n + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            let num = |what: &str| -> Result<u64> {
                value
                    .parse()
                    .with_context(|| format!("line {}: {what} must be a non-negative integer", n + 1))
            };
            match key {
                "blocks" => d.blocks = num(key)? as usize,
                "max_block_errors" => d.max_block_errors = num(key)? as usize,
                "iterations" => d.iterations = num(key)? as usize,
                "seed" => d.seed = num(key)?,
                "ber_bits" => d.ber_bits = num(key)? as usize,
                "throughput" => d.throughput = parse_throughput(value)?,
                other => bail!("line {}: unknown key `{other}`", n + 1),
            }
        }
        if !(1..=MAX_ITERATIONS).contains(&d.iterations) {
            bail!("iterations must be in 1..={MAX_ITERATIONS}");
        }
        Ok(d)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        let from_env = std::env::var_os(CONFIG_ENV).map(std::path::PathBuf::from);
        match path.map(Path::to_path_buf).or(from_env) {
            Some(p) => {
                let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                Self::parse(&text).with_context(|| format!("in {}", p.display()))
            }
            None => Ok(Self::default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_file_matches_builtin_defaults() {
        let text = include_str!("../../../pdsch-bench.conf");
        assert_eq!(Defaults::parse(text).unwrap(), Defaults::default());
    }

    #[test]
    fn overrides_and_errors() {
        let d = Defaults::parse("blocks = 200 # short\nthroughput=goodput\n").unwrap();
        assert_eq!(d.blocks, 200);
        assert_eq!(d.throughput, ThroughputMode::Goodput);
        assert!(Defaults::parse("blocks 200").is_err());
        assert!(Defaults::parse("colour = red").is_err());
        assert!(Defaults::parse("iterations = 9").is_err());
        assert!(Defaults::parse("seed = -1").is_err());
    }
}
