//! Iterative max-log-MAP turbo decoder.

use thiserror::Error;

use crate::tx::crc::crc24a_check;
use crate::tx::qpp::{QppInterleaver, UnsupportedBlockSize};
use crate::tx::turbo::{rsc_step, NUM_STATES};
use crate::Bit;

pub const MAX_ITERATIONS: usize = 8;
/// Damping applied to extrinsic information exchanged between the
/// constituent decoders.
pub const DEFAULT_EXTRINSIC_SCALE: f64 = 0.75;
/// Prior given to known-zero filler positions.
const FILLER_LLR: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("expected {expected} soft values for K={k}, got {got}")]
    InvalidLength { k: usize, expected: usize, got: usize },
    #[error("iterations must be in 1..={MAX_ITERATIONS}, got {0}")]
    InvalidIterations(usize),
    #[error(transparent)]
    BlockSize(#[from] UnsupportedBlockSize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    /// K hard decisions, filler positions included.
    pub bits: Vec<Bit>,
    pub filler: usize,
    /// CRC-24A over the non-filler bits. When the transport block fits in one
    /// code block this is the transport block check.
    pub crc_ok: bool,
    pub iterations: usize,
}

impl DecodeResult {
    pub fn payload(&self) -> &[Bit] {
        &self.bits[self.filler..]
    }
}

#[derive(Debug, Clone, Copy)]
struct Trellis {
    next: [[usize; 2]; NUM_STATES],
    parity_sign: [[f64; 2]; NUM_STATES],
}

impl Trellis {
    fn new() -> Self {
        let mut next = [[0; 2]; NUM_STATES];
        let mut parity_sign = [[0.0; 2]; NUM_STATES];
        for s in 0..NUM_STATES {
            for u in 0..2 {
                let (n, p) = rsc_step(s, u as Bit);
                next[s][u] = n;
                parity_sign[s][u] = 1.0 - 2.0 * f64::from(p);
            }
        }
        Self { next, parity_sign }
    }
}

/// One constituent max-log-MAP decoder with its scratch space.
#[derive(Debug, Clone)]
struct Siso {
    trellis: Trellis,
    alpha: Vec<[f64; NUM_STATES]>,
}

impl Siso {
    fn new(steps: usize) -> Self {
        Self {
            trellis: Trellis::new(),
            alpha: vec![[0.0; NUM_STATES]; steps + 1],
        }
    }

    /// `sys`/`par` are K+3 channel LLRs (tail included), `apriori` K values.
    /// Writes a-posteriori LLRs of the K information bits into `app`.
    fn run(&mut self, sys: &[f64], par: &[f64], apriori: &[f64], app: &mut [f64]) {
        let steps = sys.len();
        let k = apriori.len();
        let t = self.trellis;
        let neg = f64::NEG_INFINITY;

        // half-weight branch metrics: γ = (su·(Ls+La) + sp·Lp) / 2
        let half_sys = |i: usize| 0.5 * (sys[i] + if i < k { apriori[i] } else { 0.0 });

        self.alpha[0] = [neg; NUM_STATES];
        self.alpha[0][0] = 0.0;
        for i in 0..steps {
            let hs = half_sys(i);
            let hp = 0.5 * par[i];
            let mut next = [neg; NUM_STATES];
            let cur = self.alpha[i];
            for s in 0..NUM_STATES {
                if cur[s] == neg {
                    continue;
                }
                for u in 0..2 {
                    let su = if u == 0 { 1.0 } else { -1.0 };
                    let m = cur[s] + su * hs + t.parity_sign[s][u] * hp;
                    let n = t.next[s][u];
                    if m > next[n] {
                        next[n] = m;
                    }
                }
            }
            let top = next.iter().copied().fold(neg, f64::max);
            next.iter_mut().for_each(|a| *a -= top);
            self.alpha[i + 1] = next;
        }

        let mut beta = [neg; NUM_STATES];
        beta[0] = 0.0;
        for i in (0..steps).rev() {
            let hs = half_sys(i);
            let hp = 0.5 * par[i];
            let cur = self.alpha[i];
            let mut prev = [neg; NUM_STATES];
            let mut best = [neg; 2];
            for s in 0..NUM_STATES {
                for u in 0..2 {
                    let su = if u == 0 { 1.0 } else { -1.0 };
                    let g = su * hs + t.parity_sign[s][u] * hp;
                    let b = g + beta[t.next[s][u]];
                    if b > prev[s] {
                        prev[s] = b;
                    }
                    let full = cur[s] + b;
                    if full > best[u] {
                        best[u] = full;
                    }
                }
            }
            if i < k {
                app[i] = best[0] - best[1];
            }
            let top = prev.iter().copied().fold(neg, f64::max);
            prev.iter_mut().for_each(|b| *b -= top);
            beta = prev;
        }
    }
}

/// Turbo decoder for one block size; owns its scratch buffers.
#[derive(Debug, Clone)]
pub struct TurboDecoder {
    k: usize,
    interleaver: QppInterleaver,
    siso: Siso,
    extrinsic_scale: f64,
    early_stop: bool,
}

impl TurboDecoder {
    pub fn new(k: usize) -> Result<Self, DecodeError> {
        Ok(Self {
            k,
            interleaver: QppInterleaver::new(k)?,
            siso: Siso::new(k + 3),
            extrinsic_scale: DEFAULT_EXTRINSIC_SCALE,
            early_stop: false,
        })
    }

    pub fn with_extrinsic_scale(mut self, scale: f64) -> Self {
        self.extrinsic_scale = scale;
        self
    }

    /// Stop as soon as the CRC passes. Off by default so every decode runs the
    /// configured number of iterations.
    pub fn with_early_stop(mut self, on: bool) -> Self {
        self.early_stop = on;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Decode the flattened `d0 ++ d1 ++ d2` soft codeword (3K + 12 values).
    pub fn decode(
        &mut self,
        llrs: &[f64],
        filler: usize,
        iterations: usize,
    ) -> Result<DecodeResult, DecodeError> {
        let k = self.k;
        let d = k + 4;
        if llrs.len() != 3 * d {
            return Err(DecodeError::InvalidLength {
                k,
                expected: 3 * d,
                got: llrs.len(),
            });
        }
        if !(1..=MAX_ITERATIONS).contains(&iterations) {
            return Err(DecodeError::InvalidIterations(iterations));
        }
        let (d0, rest) = llrs.split_at(d);
        let (d1, d2) = rest.split_at(d);

        let mut sys1 = Vec::with_capacity(k + 3);
        sys1.extend_from_slice(&d0[..k]);
        sys1[..filler].fill(FILLER_LLR);
        let mut par1 = d1[..k].to_vec();
        par1[..filler].fill(FILLER_LLR);
        let mut sys2 = self.interleaver.interleave(&sys1);
        let mut par2 = d2[..k].to_vec();
        sys1.extend_from_slice(&[d0[k], d2[k], d1[k + 1]]);
        par1.extend_from_slice(&[d1[k], d0[k + 1], d2[k + 1]]);
        sys2.extend_from_slice(&[d0[k + 2], d2[k + 2], d1[k + 3]]);
        par2.extend_from_slice(&[d1[k + 2], d0[k + 3], d2[k + 3]]);

        let mut apriori1 = vec![0.0; k];
        let mut ext2 = vec![0.0; k];
        let mut app = vec![0.0; k];
        let mut bits = vec![0; k];
        let mut done = 0;
        let mut crc_ok = false;
        for _ in 0..iterations {
            self.siso.run(&sys1, &par1, &apriori1, &mut app);
            for i in 0..k {
                let ext = app[i] - sys1[i] - apriori1[i];
                // a-priori of decoder 2 at interleaved position j is ext[Π(j)]
                apriori1[i] = self.extrinsic_scale * ext;
            }
            let apriori2 = self.interleaver.interleave(&apriori1);
            self.siso.run(&sys2, &par2, &apriori2, &mut app);
            for j in 0..k {
                ext2[j] = self.extrinsic_scale * (app[j] - sys2[j] - apriori2[j]);
            }
            apriori1 = self.interleaver.deinterleave(&ext2);
            let posterior = self.interleaver.deinterleave(&app);
            for (b, &l) in bits.iter_mut().zip(&posterior) {
                *b = Bit::from(l < 0.0);
            }
            done += 1;
            crc_ok = crc24a_check(&bits[filler..]);
            if self.early_stop && crc_ok {
                break;
            }
        }
        Ok(DecodeResult {
            bits,
            filler,
            crc_ok,
            iterations: done,
        })
    }
}

/// One-shot decode of a flattened soft codeword for block size `k`.
pub fn turbo_decode(
    llrs: &[f64],
    k: usize,
    filler: usize,
    iterations: usize,
) -> Result<DecodeResult, DecodeError> {
    TurboDecoder::new(k)?.decode(llrs, filler, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tx::crc::crc24a_attach;
    use crate::tx::turbo::turbo_encode_with;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};

    fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<Bit> {
        (0..n).map(|_| rng.random_range(0..2u8)).collect()
    }

    fn to_llr(bits: &[Bit], a: f64) -> Vec<f64> {
        bits.iter().map(|&b| if b == 0 { a } else { -a }).collect()
    }

    #[test]
    fn saturated_loopback_k40() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let il = QppInterleaver::new(40).unwrap();
        let mut dec = TurboDecoder::new(40).unwrap();
        for _ in 0..64 {
            let x = random_bits(&mut rng, 40);
            let cw = turbo_encode_with(&x, &il);
            let res = dec.decode(&to_llr(&cw.flatten(), 20.0), 0, 1).unwrap();
            assert_eq!(res.bits, x);
            assert_eq!(res.iterations, 1);
        }
    }

    #[test]
    fn saturated_loopback_every_block_size() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for p in crate::tx::qpp::qpp_table() {
            let il = QppInterleaver::new(p.k).unwrap();
            let x = random_bits(&mut rng, p.k);
            let cw = turbo_encode_with(&x, &il);
            let res = turbo_decode(&to_llr(&cw.flatten(), 20.0), p.k, 0, 1).unwrap();
            assert_eq!(res.bits, x, "K={}", p.k);
        }
    }

    #[test]
    fn all_zero_input_is_deterministic() {
        let a = turbo_decode(&vec![0.0; 132], 40, 0, 3).unwrap();
        let b = turbo_decode(&vec![0.0; 132], 40, 0, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.bits.iter().all(|&b| b == 0));
    }

    #[test]
    fn corrects_noisy_codeword() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let k = 1024;
        let payload = random_bits(&mut rng, k - 24);
        let x = crc24a_attach(&payload);
        let cw = turbo_encode_with(&x, &QppInterleaver::new(k).unwrap());
        // BPSK at Es/N0 = 0 dB on a rate-1/3 code is far above threshold
        let sigma2: f64 = 1.0;
        let llr: Vec<f64> = cw
            .flatten()
            .iter()
            .map(|&b| {
                let s = 1.0 - 2.0 * f64::from(b);
                let n: f64 = StandardNormal.sample(&mut rng);
                2.0 * (s + sigma2.sqrt() * n) / sigma2
            })
            .collect();
        let hard_errors = llr
            .iter()
            .zip(cw.flatten())
            .filter(|(&l, b)| (l < 0.0) != (*b == 1))
            .count();
        assert!(hard_errors > 50);
        let res = turbo_decode(&llr, k, 0, 5).unwrap();
        assert_eq!(res.bits, x);
        assert!(res.crc_ok);
    }

    #[test]
    fn scale_invariant_hard_decisions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
        let k = 256;
        let x = random_bits(&mut rng, k);
        let cw = turbo_encode_with(&x, &QppInterleaver::new(k).unwrap());
        let llr: Vec<f64> = cw
            .flatten()
            .iter()
            .map(|&b| {
                let n: f64 = StandardNormal.sample(&mut rng);
                (1.0 - 2.0 * f64::from(b)) + 1.2 * n
            })
            .collect();
        let base = turbo_decode(&llr, k, 0, 4).unwrap();
        for lambda in [0.5, 2.0] {
            let scaled: Vec<f64> = llr.iter().map(|l| l * lambda).collect();
            assert_eq!(turbo_decode(&scaled, k, 0, 4).unwrap().bits, base.bits);
        }
    }

    #[test]
    fn filler_bits_forced_to_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
        let k = 40;
        let mut x = random_bits(&mut rng, k);
        x[..5].fill(0);
        let cw = turbo_encode_with(&x, &QppInterleaver::new(k).unwrap());
        let mut llr = to_llr(&cw.flatten(), 5.0);
        // filler positions are never transmitted
        llr[..5].fill(0.0);
        llr[44..49].fill(0.0);
        let res = turbo_decode(&llr, k, 5, 2).unwrap();
        assert_eq!(res.bits, x);
        assert_eq!(res.payload().len(), 35);
    }

    #[test]
    fn early_stop_reports_iterations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(16);
        let x = crc24a_attach(&random_bits(&mut rng, 40 - 24));
        let cw = turbo_encode_with(&x, &QppInterleaver::new(40).unwrap());
        let llr = to_llr(&cw.flatten(), 10.0);
        let mut dec = TurboDecoder::new(40).unwrap().with_early_stop(true);
        let res = dec.decode(&llr, 0, 8).unwrap();
        assert_eq!(res.iterations, 1);
        let mut dec = TurboDecoder::new(40).unwrap();
        assert_eq!(dec.decode(&llr, 0, 8).unwrap().iterations, 8);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            turbo_decode(&[0.0; 131], 40, 0, 1),
            Err(DecodeError::InvalidLength { .. })
        ));
        assert!(matches!(
            turbo_decode(&[0.0; 132], 40, 0, 0),
            Err(DecodeError::InvalidIterations(0))
        ));
        assert!(matches!(
            turbo_decode(&[0.0; 132], 40, 0, 9),
            Err(DecodeError::InvalidIterations(9))
        ));
        assert!(TurboDecoder::new(41).is_err());
    }
}
