use pdsch_bench::channel::Snr;
use pdsch_bench::harness::{reference_block, LinkConfig, LinkRunner};
use pdsch_bench::pipeline::{parse_app, run_graph, Payload};
use proptest::prelude::*;

const APP: &str = include_str!("../../../apps/pdsch.app");

fn link(mcs: u8, snr: Snr) -> LinkConfig {
    LinkConfig {
        mcs,
        snr,
        iterations: 5,
    }
}

#[test]
fn shipped_app_runs_clean_at_its_snr() {
    let g = parse_app(APP).unwrap();
    let res = run_graph(&g, 5, 7).unwrap();
    let tx = &res.sinks["tx_tb"];
    let rx = &res.sinks["rx_tb"];
    assert_eq!(tx.len(), 5);
    assert_eq!(tx, rx);
    for ok in &res.sinks["rx_ok"] {
        assert_eq!(ok, &Payload::Bits(vec![1]));
    }
}

#[test]
fn shipped_app_is_deterministic() {
    let g = parse_app(APP).unwrap();
    let a = run_graph(&g, 3, 11).unwrap().sink_hash();
    let b = run_graph(&g, 3, 11).unwrap().sink_hash();
    let c = run_graph(&g, 3, 12).unwrap().sink_hash();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn noiseless_loopback_every_modulation() {
    for mcs in [0, 9, 10, 16, 17, 28] {
        let mut r = LinkRunner::new(&link(mcs, Snr::Noiseless), 3).unwrap();
        for _ in 0..3 {
            let out = r.next_block().unwrap();
            assert!(out.crc_ok, "mcs {mcs}");
            assert_eq!(out.bit_errors(), 0, "mcs {mcs}");
        }
    }
}

#[test]
fn saturated_noise_fails_every_block() {
    let mut r = LinkRunner::new(&link(28, Snr::Db(-20.0)), 5).unwrap();
    for _ in 0..10 {
        assert!(r.next_block().unwrap().is_error());
    }
}

#[test]
fn runtime_matches_reference_at_mid_snr() {
    // MCS 10 around its waterfall: a mix of decoded and failed blocks
    let cfg = link(10, Snr::Db(0.75));
    let mut r = LinkRunner::new(&cfg, 42).unwrap();
    let mut errors = 0;
    for it in 0..20 {
        let got = r.next_block().unwrap();
        let want = reference_block(&cfg, 42, it).unwrap();
        assert_eq!(got, want, "iteration {it}");
        errors += usize::from(got.is_error());
    }
    assert!(errors > 0 && errors < 20, "errors {errors}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn runtime_adds_no_semantics(mcs in 0u8..=28, snr in -5.0f64..20.0, seed in any::<u64>()) {
        let cfg = LinkConfig { mcs, snr: Snr::Db(snr), iterations: 3 };
        let mut r = LinkRunner::new(&cfg, seed).unwrap();
        for it in 0..2 {
            prop_assert_eq!(r.next_block().unwrap(), reference_block(&cfg, seed, it).unwrap());
        }
    }
}
