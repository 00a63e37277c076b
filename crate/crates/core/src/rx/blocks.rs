//! Receive-side block kinds.

use crate::lte::{GridConfig, SAMPLES_PER_SUBFRAME};
use crate::pipeline::blocks::{bits_in, complex_in, expect_len, soft_in};
use crate::pipeline::{
    check_param_names, Block, BlockError, BlockRole, ElementKind, KindInfo, Params, Payload,
    PortSpec, Registry, WorkContext,
};
use crate::tx::blocks::{matchers, qm_param, rv_param, scrambler_params, volumes_param};
use crate::tx::crc::{crc24a_check, CRC24_LEN};
use crate::tx::grid::{demap_resources, GRID_RES};
use crate::tx::ofdm::Ofdm;
use crate::tx::rate_match::RateMatcher;
use crate::tx::scramble::{scramble_soft, subframe_c_init};
use crate::tx::segment::{desegment, CodeBlock};

use super::soft_demod::{soft_demodulate, NOISE_VAR_FLOOR};
use super::turbo_dec::{TurboDecoder, MAX_ITERATIONS};

/// Decoder iterations when the `iterations` parameter is absent.
pub const DEFAULT_ITERATIONS: usize = 5;

fn info(
    name: &'static str,
    inputs: Vec<PortSpec>,
    outputs: Vec<PortSpec>,
    factory: crate::pipeline::BlockFactory,
    params: &'static str,
) -> KindInfo {
    KindInfo {
        name,
        role: BlockRole::Rx,
        inputs,
        outputs,
        factory,
        params,
        generic: false,
    }
}

pub fn register(r: &mut Registry) {
    use ElementKind::{Bit, Complex, Soft};
    let port = PortSpec::new;
    r.register(info("ofdm_demod", vec![port("in", Complex)], vec![port("out", Complex)], OfdmDemod::create, "none"));
    r.register(info(
        "res_demap",
        vec![port("in", Complex)],
        vec![port("out", Complex), port("ctrl", Complex)],
        ResDemap::create,
        "none",
    ));
    r.register(info(
        "soft_demod",
        vec![port("in", Complex), PortSpec::optional("var", Soft)],
        vec![port("out", Soft)],
        SoftDemod::create,
        "qm (2|4|6) or mcs, noise_var (default 1.0, used when `var` is unconnected)",
    ));
    r.register(info(
        "descramble",
        vec![port("in", Soft)],
        vec![port("out", Soft)],
        Descramble::create,
        "rnti (default 60), cell_id (default 1)",
    ));
    r.register(info(
        "rate_dematch",
        vec![port("in", Soft)],
        vec![port("out", Soft)],
        RateDematch::create,
        "mcs, rv (default 0)",
    ));
    r.register(info(
        "turbo_dec",
        vec![port("in", Soft)],
        vec![port("out", Bit)],
        TurboDec::create,
        "mcs, iterations (1..8, default 5), early_stop (0|1, default 0)",
    ));
    r.register(info(
        "crc_check",
        vec![port("in", Bit)],
        vec![port("out", Bit), port("ok", Bit)],
        CrcCheck::create,
        "none",
    ));
}

pub struct OfdmDemod {
    ofdm: Ofdm,
    cfg: GridConfig,
}

impl OfdmDemod {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &[])?;
        Ok(Box::new(OfdmDemod {
            ofdm: Ofdm::new(),
            cfg: GridConfig::default(),
        }))
    }
}

impl Block for OfdmDemod {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let samples = complex_in(&mut inputs, 0)?;
        expect_len("ofdm_demod", samples.len(), SAMPLES_PER_SUBFRAME)?;
        let grid = self
            .ofdm
            .demodulate(&samples, self.cfg)
            .map_err(|e| BlockError::Input(e.to_string()))?;
        Ok(vec![Payload::Complex(grid.into_values())])
    }

    fn max_output_items(&self, _: usize) -> Option<usize> {
        Some(GRID_RES)
    }
}

/// RESDEMAP: splits a grid into data symbols and control-region symbols.
pub struct ResDemap {
    cfg: GridConfig,
}

impl ResDemap {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &[])?;
        Ok(Box::new(ResDemap {
            cfg: GridConfig::default(),
        }))
    }
}

impl Block for ResDemap {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let values = complex_in(&mut inputs, 0)?;
        let grid = crate::tx::grid::ResourceGrid::from_values(self.cfg, values)
            .map_err(|e| BlockError::Input(e.to_string()))?;
        let (data, control) = demap_resources(&grid);
        Ok(vec![Payload::Complex(data), Payload::Complex(control)])
    }

    fn max_output_items(&self, _: usize) -> Option<usize> {
        Some(GRID_RES)
    }
}

/// Max-log LLRs. σ² comes from the `var` input when connected (last value
/// received), else from the `noise_var` parameter; it is floored at
/// [`NOISE_VAR_FLOOR`].
pub struct SoftDemod {
    qm: usize,
    noise_var: f64,
}

impl SoftDemod {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["qm", "mcs", "noise_var"])?;
        let noise_var = p.float("noise_var")?.unwrap_or(1.0);
        if !(noise_var >= 0.0 && noise_var.is_finite()) {
            return Err(BlockError::Param(format!("noise_var = {noise_var} must be finite and ≥ 0")));
        }
        Ok(Box::new(SoftDemod {
            qm: qm_param(p)?,
            noise_var,
        }))
    }
}

impl Block for SoftDemod {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let symbols = complex_in(&mut inputs, 0)?;
        let var = match inputs.get_mut(1).and_then(Option::take) {
            Some(Payload::Soft(v)) => v.last().copied().unwrap_or(self.noise_var),
            Some(other) => {
                return Err(BlockError::Input(format!("var: expected soft values, got {}", other.kind())))
            }
            None => self.noise_var,
        };
        let llrs = soft_demodulate(&symbols, self.qm, var.max(NOISE_VAR_FLOOR))
            .map_err(|e| BlockError::Input(e.to_string()))?;
        Ok(vec![Payload::Soft(llrs)])
    }
}

pub struct Descramble {
    rnti: u16,
    cell_id: u16,
}

impl Descramble {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["rnti", "cell_id"])?;
        let (rnti, cell_id) = scrambler_params(p)?;
        Ok(Box::new(Descramble { rnti, cell_id }))
    }
}

impl Block for Descramble {
    fn work(&mut self, ctx: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let llrs = soft_in(&mut inputs, 0)?;
        let c_init = subframe_c_init(self.rnti, self.cell_id, ctx.subframe());
        Ok(vec![Payload::Soft(scramble_soft(&llrs, c_init))])
    }
}

pub struct RateDematch {
    matchers: Vec<RateMatcher>,
}

impl RateDematch {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["mcs", "rv"])?;
        let v = volumes_param(p)?;
        Ok(Box::new(RateDematch {
            matchers: matchers(&v, rv_param(p)?),
        }))
    }
}

impl Block for RateDematch {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let llrs = soft_in(&mut inputs, 0)?;
        let total: usize = self.matchers.iter().map(RateMatcher::e).sum();
        expect_len("rate_dematch", llrs.len(), total)?;
        let mut out = Vec::new();
        let mut rest = llrs.as_slice();
        for m in &self.matchers {
            let (block, tail) = rest.split_at(m.e());
            out.extend(m.rate_dematch(block));
            rest = tail;
        }
        Ok(vec![Payload::Soft(out)])
    }

    fn max_output_items(&self, _: usize) -> Option<usize> {
        Some(self.matchers.iter().map(RateMatcher::codeword_len).sum())
    }
}

/// Decodes every code block and emits the desegmented bits (transport block
/// followed by its CRC).
pub struct TurboDec {
    decoders: Vec<(TurboDecoder, usize)>,
    iterations: usize,
}

impl TurboDec {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["mcs", "iterations", "early_stop"])?;
        let v = volumes_param(p)?;
        let iterations = p.int_in("iterations", Some(DEFAULT_ITERATIONS as i64), 1..=MAX_ITERATIONS as i64)? as usize;
        let early_stop = p.int_in("early_stop", Some(0), 0..=1)? == 1;
        let decoders = v
            .block_sizes
            .iter()
            .enumerate()
            .map(|(r, &k)| {
                let dec = TurboDecoder::new(k).map_err(BlockError::param)?.with_early_stop(early_stop);
                Ok((dec, if r == 0 { v.filler_bits } else { 0 }))
            })
            .collect::<Result<_, BlockError>>()?;
        Ok(Box::new(TurboDec { decoders, iterations }))
    }
}

impl Block for TurboDec {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let llrs = soft_in(&mut inputs, 0)?;
        let total: usize = self.decoders.iter().map(|(d, _)| 3 * d.k() + 12).sum();
        expect_len("turbo_dec", llrs.len(), total)?;
        let mut blocks = Vec::with_capacity(self.decoders.len());
        let mut rest = llrs.as_slice();
        for (dec, filler) in &mut self.decoders {
            let (cw, tail) = rest.split_at(3 * dec.k() + 12);
            let r = dec.decode(cw, *filler, self.iterations).map_err(BlockError::failed)?;
            blocks.push(CodeBlock {
                bits: r.bits,
                filler: r.filler,
            });
            rest = tail;
        }
        Ok(vec![Payload::Bits(desegment(&blocks))])
    }

    fn max_output_items(&self, _: usize) -> Option<usize> {
        Some(self.decoders.iter().map(|(d, _)| d.k()).sum())
    }
}

/// Strips and checks the CRC-24A; `ok` carries one bit, 1 for pass.
pub struct CrcCheck;

impl CrcCheck {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &[])?;
        Ok(Box::new(CrcCheck))
    }
}

impl Block for CrcCheck {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let mut bits = bits_in(&mut inputs, 0)?;
        let ok = bits.len() >= CRC24_LEN && crc24a_check(&bits);
        bits.truncate(bits.len().saturating_sub(CRC24_LEN));
        Ok(vec![Payload::Bits(bits), Payload::Bits(vec![u8::from(ok)])])
    }
}
