//! The PDSCH link as a dataflow graph, and the same link as plain function
//! composition for cross-checking the runtime.

use crate::channel::{apply_awgn_with, ChannelError, Snr};
use crate::lte::{interface_volumes, GridConfig, LteError};
use crate::pipeline::{AppGraph, ParamValue, Params};
use crate::rng::stream_rng;
use crate::rx::{recover_transport_block, soft_demodulate, DecodeError, DemodError, TurboDecoder, NOISE_VAR_FLOOR};
use crate::tx::crc::crc24a_attach;
use crate::tx::grid::{demap_resources, map_resources, GridError};
use crate::tx::modulation::{modulate, ModulationError};
use crate::tx::ofdm::{Ofdm, SampleCountError};
use crate::tx::qpp::UnsupportedBlockSize;
use crate::tx::random_bits;
use crate::tx::rate_match::RateMatcher;
use crate::tx::scramble::{scramble_bits, scramble_soft, subframe_c_init, DEFAULT_RNTI};
use crate::tx::segment::segment_code_blocks;
use crate::tx::turbo::turbo_encode;
use crate::Bit;

/// Block names used by [`pdsch_graph`]; the reference chain draws from the
/// streams of the same names.
pub const SOURCE: &str = "src";
pub const CHANNEL: &str = "chan";
pub const TX_SINK: &str = "tx_tb";
pub const RX_SINK: &str = "rx_tb";
pub const OK_SINK: &str = "rx_ok";

/// One operating point of the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub mcs: u8,
    pub snr: Snr,
    pub iterations: usize,
}

/// Outcome of one transport block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockOutcome {
    pub tx: Vec<Bit>,
    pub rx: Vec<Bit>,
    pub crc_ok: bool,
}

impl BlockOutcome {
    pub fn bit_errors(&self) -> usize {
        self.tx.iter().zip(&self.rx).filter(|(a, b)| a != b).count()
            + self.tx.len().abs_diff(self.rx.len())
    }

    /// A block counts as an error when its CRC fails.
    pub fn is_error(&self) -> bool {
        !self.crc_ok
    }
}

fn int(v: i64) -> ParamValue {
    ParamValue::Int(v)
}

fn snr_param(snr: Snr) -> ParamValue {
    match snr {
        Snr::Db(v) => ParamValue::Float(v),
        Snr::Noiseless => ParamValue::Str("noiseless".into()),
    }
}

/// Source → TX chain → AWGN → RX chain → sinks. The transmitted block goes to
/// [`TX_SINK`], the recovered block to [`RX_SINK`] and the CRC flag to
/// [`OK_SINK`].
pub fn pdsch_graph(cfg: &LinkConfig) -> AppGraph {
    let mcs = || Params::new().with("mcs", int(cfg.mcs.into()));
    let none = Params::new;
    let bits = || Params::new().with("kind", ParamValue::Str("bit".into()));
    let mut g = AppGraph::new();
    g.add_block(SOURCE, "tb_source", mcs())
        .add_block("crc", "crc24a", none())
        .add_block("seg", "segment", none())
        .add_block("enc", "turbo_enc", mcs())
        .add_block("rm", "rate_match", mcs())
        .add_block("scr", "scramble", none())
        .add_block("map", "mod_mapper", mcs())
        .add_block("res", "res_map", none())
        .add_block("ofdm", "ofdm_mod", none())
        .add_block(CHANNEL, "awgn", Params::new().with("snr_db", snr_param(cfg.snr)))
        .add_block("fft", "ofdm_demod", none())
        .add_block("demap", "res_demap", none())
        .add_block("demod", "soft_demod", mcs())
        .add_block("descr", "descramble", none())
        .add_block("dematch", "rate_dematch", mcs())
        .add_block(
            "dec",
            "turbo_dec",
            mcs().with("iterations", int(cfg.iterations as i64)),
        )
        .add_block("check", "crc_check", none())
        .add_block(TX_SINK, "vector_sink", bits())
        .add_block(RX_SINK, "vector_sink", bits())
        .add_block(OK_SINK, "vector_sink", bits());
    let chain = [
        SOURCE, "crc", "seg", "enc", "rm", "scr", "map", "res", "ofdm", CHANNEL, "fft", "demap",
        "demod", "descr", "dematch", "dec", "check",
    ];
    for w in chain.windows(2) {
        g.connect(w[0], "out", w[1], "in");
    }
    g.connect(CHANNEL, "var", "demod", "var")
        .connect(SOURCE, "out", TX_SINK, "in")
        .connect("check", "out", RX_SINK, "in")
        .connect("check", "ok", OK_SINK, "in");
    g
}

#[derive(Debug, thiserror::Error)]
pub enum ChainError {
    #[error(transparent)]
    Lte(#[from] LteError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Modulation(#[from] ModulationError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Samples(#[from] SampleCountError),
    #[error(transparent)]
    Demod(#[from] DemodError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    BlockSize(#[from] UnsupportedBlockSize),
}

/// Transport block `iteration` of a run with master `seed`, computed by
/// calling the transmitter, channel and receiver functions directly.
pub fn reference_block(cfg: &LinkConfig, seed: u64, iteration: u64) -> Result<BlockOutcome, ChainError> {
    let grid_cfg = GridConfig::default();
    let v = interface_volumes(cfg.mcs, &grid_cfg)?;
    let subframe = (iteration % 10) as usize;
    let c_init = subframe_c_init(DEFAULT_RNTI, grid_cfg.cell_id, subframe);

    let tb = random_bits(&mut stream_rng(seed, SOURCE, iteration), v.tb_bits);
    let blocks = segment_code_blocks(&crc24a_attach(&tb));
    let mut coded = Vec::with_capacity(v.e_total);
    for (cb, &e) in blocks.iter().zip(&v.rate_matched) {
        let cw = turbo_encode(cb)?;
        coded.extend(RateMatcher::new(cb.k(), cb.filler, e, 0).rate_match(&cw));
    }
    let symbols = modulate(&scramble_bits(&coded, c_init), v.qm)?;
    let ofdm = Ofdm::new();
    let samples = ofdm.modulate(&map_resources(&symbols, &grid_cfg, subframe)?);

    let rx = apply_awgn_with(&samples, cfg.snr, &mut stream_rng(seed, CHANNEL, iteration))?;

    let (data, _) = demap_resources(&ofdm.demodulate(&rx.samples, grid_cfg)?);
    let llrs = soft_demodulate(&data, v.qm, rx.noise_var.max(NOISE_VAR_FLOOR))?;
    let llrs = scramble_soft(&llrs, c_init);
    let mut decoded = Vec::with_capacity(blocks.len());
    let mut rest = llrs.as_slice();
    for (cb, &e) in blocks.iter().zip(&v.rate_matched) {
        let (mine, tail) = rest.split_at(e);
        rest = tail;
        let soft = RateMatcher::new(cb.k(), cb.filler, e, 0).rate_dematch(mine);
        decoded.push(TurboDecoder::new(cb.k())?.decode(&soft, cb.filler, cfg.iterations)?);
    }
    let (rx_tb, crc_ok) = recover_transport_block(&decoded);
    Ok(BlockOutcome { tx: tb, rx: rx_tb, crc_ok })
}
