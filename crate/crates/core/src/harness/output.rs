//! Result files: the per-point CSV and the per-block cost CSV.

use std::io::{Read, Write};

use crate::channel::Snr;
use crate::pipeline::{write_cost_csv, BlockCost, CostReport, COST_CSV_HEADER};

use super::point::{BlerPoint, PointStatus};
use super::HarnessError;

pub const RESULTS_CSV_HEADER: &str =
    "mcs,snr_db,iters,blocks,block_errors,bler,bits,bit_errors,ber,throughput_bps,rx_total_ns,seed";
/// Columns holding wall-clock measurements; excluded from reproducibility
/// comparisons.
pub const TIMING_COLUMNS: &[&str] = &["rx_total_ns"];

fn snr_text(s: Snr) -> String {
    match s {
        Snr::Db(v) => format!("{v}"),
        Snr::Noiseless => "noiseless".into(),
    }
}

/// One row per completed point, in the given order. Skipped and failed
/// points are left out.
pub fn emit_csv<W: Write>(mut out: W, points: &[BlerPoint]) -> Result<(), HarnessError> {
    writeln!(out, "{RESULTS_CSV_HEADER}")?;
    for p in points.iter().filter(|p| p.status == PointStatus::Done) {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            p.mcs,
            snr_text(p.snr),
            p.iterations,
            p.blocks,
            p.block_errors,
            p.bler,
            p.bits,
            p.bit_errors,
            p.ber,
            p.throughput_bps,
            p.rx_total_ns.map(|t| t.to_string()).unwrap_or_default(),
            p.seed
        )?;
    }
    Ok(())
}

pub fn emit_csv_string(points: &[BlerPoint]) -> String {
    let mut buf = Vec::new();
    emit_csv(&mut buf, points).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

/// Blank out the timing columns of a results CSV.
pub fn strip_timing(csv_text: &str) -> String {
    let mut lines = csv_text.lines();
    let Some(header) = lines.next() else {
        return String::new();
    };
    let drop: Vec<usize> = header
        .split(',')
        .enumerate()
        .filter(|(_, h)| TIMING_COLUMNS.contains(h))
        .map(|(i, _)| i)
        .collect();
    let mut out = format!("{header}\n");
    for line in lines {
        let fields: Vec<&str> = line
            .split(',')
            .enumerate()
            .map(|(i, f)| if drop.contains(&i) { "" } else { f })
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, serde::Deserialize)]
struct Row {
    mcs: u8,
    snr_db: String,
    iters: usize,
    blocks: usize,
    block_errors: usize,
    bler: f64,
    bits: usize,
    bit_errors: usize,
    ber: f64,
    throughput_bps: f64,
    rx_total_ns: Option<u64>,
    seed: u64,
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BlerPoint>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers()?.iter().collect::<Vec<_>>().join(",");
    if headers != RESULTS_CSV_HEADER {
        return Err(HarnessError::Format(format!("unexpected header `{headers}`")));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: Row = row?;
        let snr = Snr::parse(&r.snr_db).map_err(|e| HarnessError::Format(e.to_string()))?;
        out.push(BlerPoint {
            mcs: r.mcs,
            snr,
            iterations: r.iters,
            blocks: r.blocks,
            block_errors: r.block_errors,
            bler: r.bler,
            bits: r.bits,
            bit_errors: r.bit_errors,
            ber: r.ber,
            throughput_bps: r.throughput_bps,
            rx_total_ns: r.rx_total_ns,
            seed: r.seed,
            cost: None,
            error_flags: Vec::new(),
            status: PointStatus::Done,
        });
    }
    Ok(out)
}

/// Run identifier of a point in the cost CSV.
pub fn run_id(p: &BlerPoint) -> String {
    format!("mcs{}_snr{}_it{}", p.mcs, snr_text(p.snr), p.iterations)
}

/// Cost rows of every point that carries a report.
pub fn emit_cost_csv<W: Write>(mut out: W, points: &[BlerPoint]) -> Result<(), HarnessError> {
    writeln!(out, "{COST_CSV_HEADER}")?;
    for p in points {
        if let Some(c) = &p.cost {
            write_cost_csv(&mut out, &run_id(p), c, false)?;
        }
    }
    Ok(())
}

#[derive(Debug, serde::Deserialize)]
struct CostRow {
    run_id: String,
    block: String,
    calls: u64,
    total_ns: u64,
    mean_ns: f64,
    max_ns: u64,
    share: f64,
}

/// Cost reports keyed by run id, in file order.
pub fn read_cost_csv<R: Read>(input: R) -> Result<Vec<(String, CostReport)>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out: Vec<(String, CostReport)> = Vec::new();
    for row in rdr.deserialize() {
        let r: CostRow = row?;
        let cost = BlockCost {
            block: r.block,
            calls: r.calls,
            total_ns: r.total_ns,
            mean_ns: r.mean_ns,
            max_ns: r.max_ns,
            share: r.share,
        };
        match out.iter_mut().find(|(id, _)| *id == r.run_id) {
            Some((_, rep)) => rep.blocks.push(cost),
            None => out.push((
                r.run_id,
                CostReport {
                    blocks: vec![cost],
                    wall_ns: 0,
                },
            )),
        }
    }
    Ok(out)
}
