//! Downlink receiver: OFDM demodulation, resource demapping, soft
//! demodulation, descrambling, rate dematching, turbo decoding and the
//! transport-block CRC check.

pub mod blocks;
pub mod soft_demod;
pub mod tb;
pub mod turbo_dec;

pub use soft_demod::{hard_decision, soft_demodulate, DemodError, NOISE_VAR_FLOOR};
pub use tb::{recover_from_code_blocks, recover_transport_block};
pub use turbo_dec::{turbo_decode, DecodeError, DecodeResult, TurboDecoder, MAX_ITERATIONS};
