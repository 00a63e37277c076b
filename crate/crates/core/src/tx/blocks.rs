//! Transmit-side block kinds.

use crate::lte::{interface_volumes, GridConfig, InterfaceVolumes, MAX_MCS, SAMPLES_PER_SUBFRAME};
use crate::pipeline::blocks::{bits_in, complex_in, expect_len};
use crate::pipeline::{
    check_param_names, Block, BlockError, BlockRole, ElementKind, KindInfo, Params, Payload,
    PortSpec, Registry, WorkContext,
};

use super::crc::crc24a_attach;
use super::grid::{map_resources, GRID_RES};
use super::modulation::{modulate, Modulation};
use super::ofdm::Ofdm;
use super::qpp::QppInterleaver;
use super::random_bits;
use super::rate_match::RateMatcher;
use super::scramble::{scramble_bits, subframe_c_init, DEFAULT_RNTI};
use super::segment::segment_code_blocks;
use super::turbo::turbo_encode_with;

fn kind(
    name: &'static str,
    role: BlockRole,
    input: Option<ElementKind>,
    output: ElementKind,
    factory: crate::pipeline::BlockFactory,
    params: &'static str,
) -> KindInfo {
    KindInfo {
        name,
        role,
        inputs: input.map(|k| vec![PortSpec::new("in", k)]).unwrap_or_default(),
        outputs: vec![PortSpec::new("out", output)],
        factory,
        params,
        generic: false,
    }
}

pub fn register(r: &mut Registry) {
    use BlockRole::{Source, Tx};
    use ElementKind::{Bit, Complex};
    r.register(kind("tb_source", Source, None, Bit, TbSource::create, "mcs (0..28)"));
    r.register(kind("crc24a", Tx, Some(Bit), Bit, CrcAttach::create, "none"));
    r.register(kind("segment", Tx, Some(Bit), Bit, Segment::create, "none"));
    r.register(kind("turbo_enc", Tx, Some(Bit), Bit, TurboEnc::create, "mcs"));
    r.register(kind("rate_match", Tx, Some(Bit), Bit, RateMatch::create, "mcs, rv (default 0)"));
    r.register(kind(
        "scramble",
        Tx,
        Some(Bit),
        Bit,
        Scramble::create,
        "rnti (default 60), cell_id (default 1)",
    ));
    r.register(kind("mod_mapper", Tx, Some(Bit), Complex, ModMapper::create, "qm (2|4|6) or mcs"));
    r.register(kind("res_map", Tx, Some(Complex), Complex, ResMap::create, "none"));
    r.register(kind("ofdm_mod", Tx, Some(Complex), Complex, OfdmMod::create, "none"));
}

pub(crate) fn mcs_param(p: &Params) -> Result<u8, BlockError> {
    Ok(p.int_in("mcs", None, 0..=i64::from(MAX_MCS))? as u8)
}

pub(crate) fn volumes_param(p: &Params) -> Result<InterfaceVolumes, BlockError> {
    interface_volumes(mcs_param(p)?, &GridConfig::default()).map_err(BlockError::param)
}

pub(crate) fn rv_param(p: &Params) -> Result<u8, BlockError> {
    Ok(p.int_in("rv", Some(0), 0..=3)? as u8)
}

pub(crate) fn scrambler_params(p: &Params) -> Result<(u16, u16), BlockError> {
    let rnti = p.int_in("rnti", Some(i64::from(DEFAULT_RNTI)), 0..=0xFFFF)? as u16;
    let cell_id = p.int_in("cell_id", Some(i64::from(GridConfig::default().cell_id)), 0..=503)? as u16;
    Ok((rnti, cell_id))
}

/// Bits per symbol from either `qm` or `mcs`.
pub(crate) fn qm_param(p: &Params) -> Result<usize, BlockError> {
    match (p.contains("qm"), p.contains("mcs")) {
        (true, true) => Err(BlockError::Param("give either qm or mcs, not both".into())),
        (true, false) => {
            let qm = p.require_int("qm")? as usize;
            Modulation::from_qm(qm).map_err(BlockError::param)?;
            Ok(qm)
        }
        (false, true) => Ok(volumes_param(p)?.qm),
        (false, false) => Err(BlockError::Param("missing required parameter `qm` or `mcs`".into())),
    }
}

/// One fresh transport block of TBS(mcs) random bits per iteration, drawn
/// from the block's own stream.
pub struct TbSource {
    tbs: usize,
}

impl TbSource {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["mcs"])?;
        Ok(Box::new(TbSource {
            tbs: volumes_param(p)?.tb_bits,
        }))
    }
}

impl Block for TbSource {
    fn work(&mut self, ctx: &WorkContext<'_>, _: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        Ok(vec![Payload::Bits(random_bits(&mut ctx.rng(), self.tbs))])
    }

    fn max_output_items(&self, _: usize) -> Option<usize> {
        Some(self.tbs)
    }
}

pub struct CrcAttach;

impl CrcAttach {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &[])?;
        Ok(Box::new(CrcAttach))
    }
}

impl Block for CrcAttach {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let bits = bits_in(&mut inputs, 0)?;
        if bits.is_empty() {
            return Ok(vec![Payload::Bits(bits)]);
        }
        Ok(vec![Payload::Bits(crc24a_attach(&bits))])
    }
}

/// Splits the input into code blocks and emits them back to back, filler
/// included.
pub struct Segment;

impl Segment {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &[])?;
        Ok(Box::new(Segment))
    }
}

impl Block for Segment {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let bits = bits_in(&mut inputs, 0)?;
        if bits.is_empty() {
            return Ok(vec![Payload::Bits(bits)]);
        }
        let out = segment_code_blocks(&bits)
            .into_iter()
            .flat_map(|cb| cb.bits)
            .collect();
        Ok(vec![Payload::Bits(out)])
    }
}

/// Encodes the code blocks of an `mcs` transport block, emitting each
/// `d0 ++ d1 ++ d2` codeword in turn.
pub struct TurboEnc {
    interleavers: Vec<QppInterleaver>,
}

impl TurboEnc {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["mcs"])?;
        let v = volumes_param(p)?;
        let interleavers = v
            .block_sizes
            .iter()
            .map(|&k| QppInterleaver::new(k).map_err(BlockError::param))
            .collect::<Result<_, _>>()?;
        Ok(Box::new(TurboEnc { interleavers }))
    }
}

impl Block for TurboEnc {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let bits = bits_in(&mut inputs, 0)?;
        let total: usize = self.interleavers.iter().map(QppInterleaver::len).sum();
        expect_len("turbo_enc", bits.len(), total)?;
        let mut out = Vec::with_capacity(3 * total + 12 * self.interleavers.len());
        let mut rest = bits.as_slice();
        for il in &self.interleavers {
            let (block, tail) = rest.split_at(il.len());
            out.extend(turbo_encode_with(block, il).flatten());
            rest = tail;
        }
        Ok(vec![Payload::Bits(out)])
    }

    fn max_output_items(&self, _: usize) -> Option<usize> {
        Some(self.interleavers.iter().map(|il| 3 * il.len() + 12).sum())
    }
}

pub struct RateMatch {
    matchers: Vec<RateMatcher>,
}

impl RateMatch {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["mcs", "rv"])?;
        let v = volumes_param(p)?;
        let rv = rv_param(p)?;
        Ok(Box::new(RateMatch {
            matchers: matchers(&v, rv),
        }))
    }
}

pub(crate) fn matchers(v: &InterfaceVolumes, rv: u8) -> Vec<RateMatcher> {
    v.block_sizes
        .iter()
        .zip(&v.rate_matched)
        .enumerate()
        .map(|(r, (&k, &e))| RateMatcher::new(k, if r == 0 { v.filler_bits } else { 0 }, e, rv))
        .collect()
}

impl Block for RateMatch {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let bits = bits_in(&mut inputs, 0)?;
        let total: usize = self.matchers.iter().map(RateMatcher::codeword_len).sum();
        expect_len("rate_match", bits.len(), total)?;
        let mut out = Vec::new();
        let mut rest = bits.as_slice();
        for m in &self.matchers {
            let (cw, tail) = rest.split_at(m.codeword_len());
            out.extend(m.rate_match_flat(cw));
            rest = tail;
        }
        Ok(vec![Payload::Bits(out)])
    }

    fn max_output_items(&self, _: usize) -> Option<usize> {
        Some(self.matchers.iter().map(RateMatcher::e).sum())
    }
}

/// Scrambles with the PDSCH sequence of the current subframe.
pub struct Scramble {
    rnti: u16,
    cell_id: u16,
}

impl Scramble {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["rnti", "cell_id"])?;
        let (rnti, cell_id) = scrambler_params(p)?;
        Ok(Box::new(Scramble { rnti, cell_id }))
    }
}

impl Block for Scramble {
    fn work(&mut self, ctx: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let bits = bits_in(&mut inputs, 0)?;
        let c_init = subframe_c_init(self.rnti, self.cell_id, ctx.subframe());
        Ok(vec![Payload::Bits(scramble_bits(&bits, c_init))])
    }
}

pub struct ModMapper {
    qm: usize,
}

impl ModMapper {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &["qm", "mcs"])?;
        Ok(Box::new(ModMapper { qm: qm_param(p)? }))
    }
}

impl Block for ModMapper {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let bits = bits_in(&mut inputs, 0)?;
        let symbols = modulate(&bits, self.qm).map_err(|e| BlockError::Input(e.to_string()))?;
        Ok(vec![Payload::Complex(symbols)])
    }
}

/// Data symbols in, the full 72 × 14 grid out (symbol-major).
pub struct ResMap {
    cfg: GridConfig,
}

impl ResMap {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &[])?;
        Ok(Box::new(ResMap {
            cfg: GridConfig::default(),
        }))
    }
}

impl Block for ResMap {
    fn work(&mut self, ctx: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let symbols = complex_in(&mut inputs, 0)?;
        let grid = map_resources(&symbols, &self.cfg, ctx.subframe())
            .map_err(|e| BlockError::Input(e.to_string()))?;
        Ok(vec![Payload::Complex(grid.into_values())])
    }

    fn max_output_items(&self, _: usize) -> Option<usize> {
        Some(GRID_RES)
    }
}

pub struct OfdmMod {
    ofdm: Ofdm,
    cfg: GridConfig,
}

impl OfdmMod {
    fn create(p: &Params) -> Result<Box<dyn Block>, BlockError> {
        check_param_names(p, &[])?;
        Ok(Box::new(OfdmMod {
            ofdm: Ofdm::new(),
            cfg: GridConfig::default(),
        }))
    }
}

impl Block for OfdmMod {
    fn work(&mut self, _: &WorkContext<'_>, mut inputs: Vec<Option<Payload>>) -> Result<Vec<Payload>, BlockError> {
        let values = complex_in(&mut inputs, 0)?;
        let grid = super::grid::ResourceGrid::from_values(self.cfg, values)
            .map_err(|e| BlockError::Input(e.to_string()))?;
        Ok(vec![Payload::Complex(self.ofdm.modulate(&grid))])
    }

    fn max_output_items(&self, _: usize) -> Option<usize> {
        Some(SAMPLES_PER_SUBFRAME)
    }
}
