//! Link-level benchmark workbench for the LTE downlink shared channel.
//!
//! The crate is organised bottom-up:
//!
//! * [`pipeline`] parses `.app` dataflow descriptions, schedules them and runs
//!   them while timing every block invocation.
//! * [`lte`] holds the 1.4 MHz numerology and the MCS / TBS tables.
//! * [`tx`] and [`rx`] implement the PDSCH transmit and receive chains, both as
//!   plain functions and as pipeline blocks.
//! * [`channel`] is the AWGN channel.
//! * [`harness`] runs conformance and performance experiments and writes the
//!   CSV and SVG results.

pub mod channel;
pub mod harness;
pub mod lte;
pub mod pipeline;
pub mod rng;
pub mod rx;
pub mod tx;

pub use num_complex::Complex64;

/// Hard bits are stored one per byte, value 0 or 1.
pub type Bit = u8;
