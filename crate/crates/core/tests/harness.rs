use pdsch_bench::channel::Snr;
use pdsch_bench::harness::plot::{cost_by_mcs, fig3_svg, fig4a_svg, fig4b_svg};
use pdsch_bench::harness::stats::mcnemar_one_sided;
use pdsch_bench::harness::*;
use pdsch_bench::lte::tbs_for_mcs;

fn link(mcs: u8, snr: Snr, iterations: usize) -> LinkConfig {
    LinkConfig { mcs, snr, iterations }
}

fn flags(l: &LinkConfig, n: usize, seed: u64) -> Vec<bool> {
    let opts = PointOptions {
        min_block_errors: None,
        timing: false,
        keep_flags: true,
        ..PointOptions::default()
    };
    run_bler_point(l, n, seed, &opts).unwrap().error_flags
}

/// (only the first failed, only the second failed)
fn discordant(a: &[bool], b: &[bool]) -> (u64, u64) {
    let only_a = a.iter().zip(b).filter(|(x, y)| **x && !**y).count() as u64;
    let only_b = a.iter().zip(b).filter(|(x, y)| !**x && **y).count() as u64;
    (only_a, only_b)
}

#[test]
fn single_point_sweep_is_run_bler_point() {
    let spec = SweepSpec::new(vec![4], vec![Snr::Db(2.0)], vec![2], 100, 9);
    let pts = sweep(&spec).unwrap();
    assert_eq!(pts.len(), 1);
    let opts = PointOptions {
        timing: true,
        ..PointOptions::default()
    };
    let direct = run_bler_point(&spec.links()[0], 100, point_seed(9, 4), &opts).unwrap();
    let (a, b) = (&pts[0], &direct);
    assert_eq!(
        (a.blocks, a.block_errors, a.bits, a.bit_errors, a.seed),
        (b.blocks, b.block_errors, b.bits, b.bit_errors, b.seed)
    );
}

#[test]
fn sweep_csv_is_reproducible_and_parallel_agrees() {
    let mut spec = SweepSpec::new(vec![0, 3], vec![Snr::Db(-3.0), Snr::Noiseless], vec![1, 3], 100, 5);
    let first = emit_csv_string(&sweep(&spec).unwrap());
    let second = emit_csv_string(&sweep(&spec).unwrap());
    assert_eq!(strip_timing(&first), strip_timing(&second));
    spec.isolation = false;
    let parallel = emit_csv_string(&sweep(&spec).unwrap());
    assert_eq!(strip_timing(&first), parallel);
    assert_eq!(first.lines().count(), 1 + 8);
}

#[test]
fn results_round_trip_through_files() {
    let spec = SweepSpec::new(vec![1, 2], vec![Snr::Db(0.0)], vec![2], 100, 1);
    let pts = sweep(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.csv");
    emit_csv(std::fs::File::create(&path).unwrap(), &pts).unwrap();
    let back = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(emit_csv_string(&back), std::fs::read_to_string(&path).unwrap());

    let mut cost = Vec::new();
    emit_cost_csv(&mut cost, &pts).unwrap();
    let reports = read_cost_csv(cost.as_slice()).unwrap();
    assert_eq!(reports.len(), 2);
    for ((id, rep), p) in reports.iter().zip(&pts) {
        assert_eq!(id, &run_id(p));
        assert!(rep.block("dec").is_some());
        assert!(rep.block("chan").is_none(), "channel is not PHY cost");
    }
}

#[test]
fn figures_from_a_sweep() {
    let spec = SweepSpec::new(vec![0, 5, 10], vec![Snr::Db(1.0)], vec![1, 5], 100, 3);
    let pts = sweep(&spec).unwrap();
    let costs = cost_by_mcs(&pts);
    assert_eq!(costs.iter().map(|c| c.0).collect::<Vec<_>>(), [0, 5, 10]);
    for svg in [fig3_svg(&pts), fig4a_svg(&pts), fig4b_svg(&costs)] {
        assert!(svg.starts_with("<svg") && svg.contains("</svg>"));
    }
}

#[test]
fn throughput_column_is_offered_rate() {
    let spec = SweepSpec::new(vec![0, 28], vec![Snr::Db(-20.0)], vec![1], 100, 2);
    for p in sweep(&spec).unwrap() {
        assert_eq!(p.bler, 1.0);
        assert_eq!(p.throughput_bps, tbs_for_mcs(p.mcs).unwrap() as f64 * 1000.0);
    }
}

#[test]
fn bler_conformance_examples() {
    let ok = conformance_bler(&link(16, Snr::Noiseless, 5), 100, 4).unwrap();
    assert!(ok.pass);
    assert_eq!(ok.point.bler, 0.0);
    let bad = conformance_bler(&link(5, Snr::Db(-20.0), 5), 100, 4).unwrap();
    assert!(!bad.pass);
    assert!(bad.interval.0 > 0.9);
}

#[test]
fn ber_conformance_16qam_near_one_percent() {
    // 16QAM reaches BER 1e-2 near Es/N0 = 13 dB
    let r = conformance_ber(4, &[Snr::Db(13.0)], 100_000, 8).unwrap();
    let c = &r.checks[0];
    assert!((0.005..0.02).contains(&c.theory), "theory {}", c.theory);
    assert!(r.pass(), "{c:?}");
}

#[test]
fn more_iterations_never_raise_the_threshold() {
    let t5 = find_snr_threshold(2, 5, BLER_TARGET, 100, 6).unwrap();
    let t1 = find_snr_threshold(2, 1, BLER_TARGET, 100, 6).unwrap();
    assert!(t5.snr_db <= t1.snr_db + 0.25, "{} vs {}", t5.snr_db, t1.snr_db);
}

#[test]
fn threshold_search_evaluations_bracket_the_result() {
    let t = find_snr_threshold(0, 5, BLER_TARGET, 100, 2).unwrap();
    assert_eq!(t.evaluations[0].0, 30.0);
    let passing = |&(_, n, e): &(f64, usize, usize)| n == 100 && e <= 10;
    let at = t.evaluations.iter().find(|e| e.0 == t.snr_db).unwrap();
    assert!(passing(at));
    if let Some(below) = t.evaluations.iter().find(|e| e.0 == t.snr_db - 0.25) {
        assert!(!passing(below));
    }
}

#[test]
fn bler_nonincreasing_in_snr_on_matched_seeds() {
    let seed = point_seed(77, 7);
    let mut prev: Option<Vec<bool>> = None;
    for snr in [1.0, 2.0, 3.0, 4.0] {
        let f = flags(&link(7, Snr::Db(snr), 3), 200, seed);
        if let Some(p) = &prev {
            // is the higher SNR significantly worse than the lower one?
            let (worse, better) = discordant(&f, p);
            assert!(mcnemar_one_sided(worse, better) > 0.05, "snr {snr}: {worse} vs {better}");
        }
        prev = Some(f);
    }
}

#[test]
fn rejected_sweeps() {
    let base = SweepSpec::new(vec![0], vec![Snr::Db(0.0)], vec![1], 100, 0);
    let mut few = base.clone();
    few.blocks = 99;
    let mut wide = base.clone();
    wide.mcs = vec![29];
    let mut iters = base.clone();
    iters.iterations = vec![0];
    let mut empty = base;
    empty.snr.clear();
    for s in [few, wide, iters, empty] {
        assert!(matches!(sweep(&s), Err(HarnessError::InvalidSpec(_))));
    }
}
