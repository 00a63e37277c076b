//! Single operating points: BLER measurement, conformance checks and SNR
//! threshold search.

use crate::channel::{apply_awgn_with, Snr};
use crate::lte::{interface_volumes, tbs_for_mcs, GridConfig, TTI_SECONDS};
use crate::pipeline::{BlockRole, CostReport, Runtime, RuntimeError};
use crate::rng::stream_rng;
use crate::rx::{hard_decision, soft_demodulate};
use crate::tx::modulation::{modulate, Modulation};
use crate::tx::random_bits;

use super::chain::{pdsch_graph, BlockOutcome, LinkConfig, OK_SINK, RX_SINK, TX_SINK};
use super::stats::{clopper_pearson, clopper_pearson_upper, q_function};
use super::HarnessError;

/// BLER target of the conformance test; a point passes when bler ≤ target.
pub const BLER_TARGET: f64 = 0.1;
/// Default stop rule: a point ends early once this many blocks failed.
pub const MIN_BLOCK_ERRORS: usize = 100;
/// SNR search range and lattice of [`find_snr_threshold`].
pub const SNR_SEARCH_MIN_DB: f64 = -10.0;
pub const SNR_SEARCH_MAX_DB: f64 = 30.0;
pub const SNR_LATTICE_DB: f64 = 0.25;

/// How the throughput column is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThroughputMode {
    /// TBS per 1 ms TTI, independent of errors.
    #[default]
    Offered,
    /// Offered × (1 − BLER).
    Goodput,
}

/// Settings of one BLER measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointOptions {
    /// Stop once this many blocks failed.
    pub min_block_errors: Option<usize>,
    /// Keep per-invocation timing and build a cost report.
    pub timing: bool,
    pub throughput: ThroughputMode,
    /// Skip points whose code rate exceeds the 0.93 cap instead of running
    /// them.
    pub enforce_rate_cap: bool,
    /// Keep the per-block error flags in the result.
    pub keep_flags: bool,
}

impl Default for PointOptions {
    fn default() -> Self {
        Self {
            min_block_errors: Some(MIN_BLOCK_ERRORS),
            timing: true,
            throughput: ThroughputMode::Offered,
            enforce_rate_cap: false,
            keep_flags: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointStatus {
    Done,
    Skipped(String),
    Failed(String),
}

/// One measured operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerPoint {
    pub mcs: u8,
    pub snr: Snr,
    pub iterations: usize,
    pub blocks: usize,
    pub block_errors: usize,
    pub bler: f64,
    pub bits: usize,
    pub bit_errors: usize,
    pub ber: f64,
    pub throughput_bps: f64,
    /// Receiver-side time over all blocks, when timing was kept.
    pub rx_total_ns: Option<u64>,
    pub seed: u64,
    pub cost: Option<CostReport>,
    /// Per-block CRC failures, in block order, when requested.
    pub error_flags: Vec<bool>,
    pub status: PointStatus,
}

impl BlerPoint {
    /// Mean receiver time per subframe in nanoseconds.
    pub fn rx_mean_ns(&self) -> Option<f64> {
        self.rx_total_ns
            .filter(|_| self.blocks > 0)
            .map(|t| t as f64 / self.blocks as f64)
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self.status, PointStatus::Skipped(_))
    }

    /// Two-sided 95 % Clopper-Pearson interval on the BLER.
    pub fn bler_interval(&self) -> (f64, f64) {
        clopper_pearson(self.block_errors as u64, self.blocks as u64, 0.95)
    }

    /// One-sided 95 % upper bound on the BLER.
    pub fn bler_upper95(&self) -> f64 {
        clopper_pearson_upper(self.block_errors as u64, self.blocks as u64, 0.95)
    }

    /// A point of `link` with no blocks run yet.
    pub fn placeholder(link: &LinkConfig, seed: u64) -> Self {
        Self::empty(link, seed, PointStatus::Done)
    }

    fn empty(link: &LinkConfig, seed: u64, status: PointStatus) -> Self {
        Self {
            mcs: link.mcs,
            snr: link.snr,
            iterations: link.iterations,
            blocks: 0,
            block_errors: 0,
            bler: 0.0,
            bits: 0,
            bit_errors: 0,
            ber: 0.0,
            throughput_bps: 0.0,
            rx_total_ns: None,
            seed,
            cost: None,
            error_flags: Vec::new(),
            status,
        }
    }
}

/// Offered throughput TBS / 1 ms.
pub fn offered_throughput(mcs: u8) -> Result<f64, HarnessError> {
    Ok(tbs_for_mcs(mcs)? as f64 / TTI_SECONDS)
}

/// Drives the pipeline graph of a link block by block.
pub struct LinkRunner {
    runtime: Runtime,
}

impl LinkRunner {
    pub fn new(link: &LinkConfig, seed: u64) -> Result<Self, RuntimeError> {
        Ok(Self {
            runtime: Runtime::new(&pdsch_graph(link), seed)?,
        })
    }

    pub fn without_samples(mut self) -> Self {
        self.runtime = self.runtime.without_samples();
        self
    }

    /// Run the next transport block through the graph.
    pub fn next_block(&mut self) -> Result<BlockOutcome, RuntimeError> {
        self.runtime.step()?;
        let take = |rt: &mut Runtime, sink: &str| -> Vec<u8> {
            rt.take_sink(sink)
                .into_iter()
                .flat_map(|p| p.into_bits().unwrap_or_default())
                .collect()
        };
        let tx = take(&mut self.runtime, TX_SINK);
        let rx = take(&mut self.runtime, RX_SINK);
        let ok = take(&mut self.runtime, OK_SINK);
        Ok(BlockOutcome {
            tx,
            rx,
            crc_ok: ok == [1],
        })
    }

    pub fn runtime(&mut self) -> &mut Runtime {
        &mut self.runtime
    }
}

/// Run up to `n_blocks` subframes of `link` through the pipeline runtime and
/// count CRC failures.
pub fn run_bler_point(
    link: &LinkConfig,
    n_blocks: usize,
    seed: u64,
    opts: &PointOptions,
) -> Result<BlerPoint, HarnessError> {
    let v = interface_volumes(link.mcs, &GridConfig::default())?;
    if v.code_rate() >= 1.0 || (opts.enforce_rate_cap && v.exceeds_rate_cap()) {
        let why = v.check_rate().err().map(|e| e.to_string()).unwrap_or_else(|| {
            format!("code rate {:.4} not below 1", v.code_rate())
        });
        return Ok(BlerPoint::empty(link, seed, PointStatus::Skipped(why)));
    }
    let mut runner = LinkRunner::new(link, seed)?;
    if !opts.timing {
        runner = runner.without_samples();
    }
    let mut p = BlerPoint::empty(link, seed, PointStatus::Done);
    for _ in 0..n_blocks {
        let out = runner.next_block()?;
        p.blocks += 1;
        p.bits += out.tx.len();
        p.bit_errors += out.bit_errors();
        p.block_errors += usize::from(out.is_error());
        if opts.keep_flags {
            p.error_flags.push(out.is_error());
        }
        if opts.min_block_errors.is_some_and(|m| p.block_errors >= m) {
            break;
        }
    }
    p.bler = if p.blocks == 0 { 0.0 } else { p.block_errors as f64 / p.blocks as f64 };
    p.ber = if p.bits == 0 { 0.0 } else { p.bit_errors as f64 / p.bits as f64 };
    let offered = offered_throughput(link.mcs)?;
    p.throughput_bps = match opts.throughput {
        ThroughputMode::Offered => offered,
        ThroughputMode::Goodput => offered * (1.0 - p.bler),
    };
    if opts.timing {
        let rt = runner.runtime();
        let roles = rt.roles();
        let samples = rt.take_samples();
        p.rx_total_ns = Some(
            samples
                .iter()
                .filter(|s| roles.get(&s.block) == Some(&BlockRole::Rx))
                .map(|s| s.elapsed_ns)
                .sum(),
        );
        let phy: Vec<_> = samples
            .into_iter()
            .filter(|s| roles.get(&s.block).is_some_and(|r| r.is_phy()))
            .collect();
        let wall = rt.busy();
        p.cost = crate::pipeline::cost_report(&phy, wall).ok();
    }
    Ok(p)
}

/// Outcome of the BLER conformance test at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerConformance {
    pub point: BlerPoint,
    /// Two-sided 95 % interval.
    pub interval: (f64, f64),
    /// One-sided 95 % upper bound.
    pub upper95: f64,
    /// bler ≤ [`BLER_TARGET`].
    pub pass: bool,
}

/// Runs exactly `n_blocks` blocks (no early stop) and compares the BLER to
/// the target.
pub fn conformance_bler(link: &LinkConfig, n_blocks: usize, seed: u64) -> Result<BlerConformance, HarnessError> {
    let opts = PointOptions {
        min_block_errors: None,
        timing: false,
        ..PointOptions::default()
    };
    let point = run_bler_point(link, n_blocks, seed, &opts)?;
    if point.blocks == 0 {
        return Err(HarnessError::Skipped(format!("mcs {} was not run", link.mcs)));
    }
    Ok(BlerConformance {
        interval: point.bler_interval(),
        upper95: point.bler_upper95(),
        pass: point.bler <= BLER_TARGET,
        point,
    })
}

/// Result of a threshold search.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub snr_db: f64,
    /// Every point evaluated, in evaluation order: (snr, blocks, errors).
    pub evaluations: Vec<(f64, usize, usize)>,
}

fn lattice(i: usize) -> f64 {
    SNR_SEARCH_MIN_DB + SNR_LATTICE_DB * i as f64
}

/// Smallest SNR on the 0.25 dB lattice over [−10, 30] dB whose measured BLER
/// is ≤ `target`, found by bisection with `budget` blocks per probe. A probe
/// stops as soon as its error count rules it out.
pub fn find_snr_threshold(
    mcs: u8,
    iterations: usize,
    target: f64,
    budget: usize,
    seed: u64,
) -> Result<Threshold, HarnessError> {
    let mut evaluations = Vec::new();
    let allowed = (target * budget as f64).floor() as usize;
    let mut passes = |i: usize| -> Result<bool, HarnessError> {
        let link = LinkConfig {
            mcs,
            snr: Snr::Db(lattice(i)),
            iterations,
        };
        let opts = PointOptions {
            min_block_errors: Some(allowed + 1),
            timing: false,
            ..PointOptions::default()
        };
        let p = run_bler_point(&link, budget, seed, &opts)?;
        if p.is_skipped() {
            return Err(HarnessError::Skipped(format!("mcs {mcs} skipped by rate cap")));
        }
        evaluations.push((lattice(i), p.blocks, p.block_errors));
        Ok(p.block_errors <= allowed && p.blocks == budget)
    };
    let last = ((SNR_SEARCH_MAX_DB - SNR_SEARCH_MIN_DB) / SNR_LATTICE_DB).round() as usize;
    if !passes(last)? {
        return Err(HarnessError::Unreachable { mcs, iterations });
    }
    let (mut lo, mut hi) = (0usize, last);
    if passes(lo)? {
        hi = lo;
    } else {
        // invariant: lo fails, hi passes
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if passes(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    Ok(Threshold {
        snr_db: lattice(hi),
        evaluations,
    })
}

/// Exact bit error probability of Gray square QAM with per-axis
/// nearest-level decisions, for unit symbol energy and complex noise
/// variance `noise_var`.
pub fn gray_qam_ber(qm: usize, noise_var: f64) -> f64 {
    let m = Modulation::from_qm(qm).expect("qm in {2, 4, 6}");
    if noise_var == 0.0 {
        return 0.0;
    }
    let bits = m.bits_per_axis();
    let mut levels = m.axis_points();
    levels.sort_by(|a, b| a.1.total_cmp(&b.1));
    let s = (noise_var / 2.0).sqrt();
    let n = levels.len();
    // decision region of each level: midpoints to its neighbours
    let bounds: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let lo = if j == 0 { f64::NEG_INFINITY } else { (levels[j - 1].1 + levels[j].1) / 2.0 };
            let hi = if j + 1 == n { f64::INFINITY } else { (levels[j].1 + levels[j + 1].1) / 2.0 };
            (lo, hi)
        })
        .collect();
    let mut total = 0.0;
    for &(label, a) in &levels {
        for b in 0..bits {
            let bit = (label >> (bits - 1 - b)) & 1;
            for (j, &(other, _)) in levels.iter().enumerate() {
                if (other >> (bits - 1 - b)) & 1 != bit {
                    let (lo, hi) = bounds[j];
                    total += q_function((lo - a) / s) - q_function((hi - a) / s);
                }
            }
        }
    }
    total / (n * bits) as f64
}

/// Measured against theory at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCheck {
    /// Es/N0 of the symbol stream, dB.
    pub snr: Snr,
    pub bits: usize,
    pub errors: usize,
    pub measured: f64,
    pub theory: f64,
    /// Binomial standard deviation of the measured BER under the theory.
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerReport {
    pub qm: usize,
    pub checks: Vec<BerCheck>,
}

impl BerReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Uncoded modulate → AWGN → hard-decision demodulate, compared with
/// [`gray_qam_ber`] at the noise variance actually applied. SNR points are
/// symbol Es/N0 in dB. Passes when every point is within 3σ binomial.
pub fn conformance_ber(qm: usize, snr_points: &[Snr], n_bits: usize, seed: u64) -> Result<BerReport, HarnessError> {
    let n_bits = n_bits.div_ceil(qm) * qm;
    let mut checks = Vec::new();
    for (i, &snr) in snr_points.iter().enumerate() {
        let bits = random_bits(&mut stream_rng(seed, "ber_bits", i as u64), n_bits);
        let symbols = modulate(&bits, qm)?;
        let rx = apply_awgn_with(&symbols, snr, &mut stream_rng(seed, "ber_noise", i as u64))?;
        let decided = if rx.noise_var == 0.0 {
            hard_decision(&soft_demodulate(&rx.samples, qm, 1.0)?)
        } else {
            hard_decision(&soft_demodulate(&rx.samples, qm, rx.noise_var)?)
        };
        let errors = bits.iter().zip(&decided).filter(|(a, b)| a != b).count();
        let measured = errors as f64 / n_bits as f64;
        let theory = gray_qam_ber(qm, rx.noise_var);
        let sigma = (theory * (1.0 - theory) / n_bits as f64).sqrt();
        let pass = (measured - theory).abs() <= 3.0 * sigma;
        checks.push(BerCheck {
            snr,
            bits: n_bits,
            errors,
            measured,
            theory,
            sigma,
            pass,
        });
    }
    Ok(BerReport { qm, checks })
}
