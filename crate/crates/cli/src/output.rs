//! CSV and JSON writers. Numbers are written with `.` decimals regardless of
//! locale and lines end in `\n`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::json;

use dvdm_core::analysis::{ConvergenceTable, LevelStatus};
use dvdm_core::{Family, TimeSeries};

use crate::config::Format;

pub const DIAGNOSTICS_HEADER: &str =
    "step,time,mass,energy,l2,sup_norm,iterations,contraction_estimate,update_norm";
pub const TABLE_HEADER: &str = "dx,dt,h1_error,order_estimate,K,M,max_sup,status";

/// Shortest round-trip form; scientific notation outside `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new)
}

#[derive(Serialize)]
struct DiagRecord {
    step: usize,
    time: f64,
    mass: f64,
    energy: f64,
    l2: f64,
    sup_norm: f64,
    iterations: usize,
    contraction_estimate: f64,
    update_norm: f64,
}

/// One row per computed step `m = 1..`.
pub fn write_diagnostics(path: &Path, format: Format, ts: &TimeSeries) -> io::Result<()> {
    let mut out = create(path)?;
    let rows = ts.diags.iter().enumerate().map(|(m, d)| DiagRecord {
        step: m + 1,
        time: ts.grid.time(m + 1),
        mass: d.mass,
        energy: d.energy,
        l2: d.l2,
        sup_norm: d.sup_norm,
        iterations: d.iterations,
        contraction_estimate: d.contraction_estimate,
        update_norm: d.final_update_norm,
    });
    match format {
        Format::Csv => {
            writeln!(out, "{DIAGNOSTICS_HEADER}")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.step,
                    num(r.time),
                    num(r.mass),
                    num(r.energy),
                    num(r.l2),
                    num(r.sup_norm),
                    r.iterations,
                    num(r.contraction_estimate),
                    num(r.update_norm)
                )?;
            }
        }
        Format::Json => {
            let rows: Vec<DiagRecord> = rows.collect();
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        }
    }
    out.flush()
}

fn equation_json(ts: &TimeSeries) -> serde_json::Value {
    let spec = &ts.spec;
    match spec.family() {
        Family::Kdv => json!({"family": "kdv", "alpha": spec.alpha(), "beta": spec.beta()}),
        Family::GeneralizedKdv { p } => {
            json!({"family": "gkdv", "alpha": spec.alpha(), "beta": spec.beta(), "p": p})
        }
        Family::Ostrovsky { gamma } => {
            json!({"family": "ostrovsky", "alpha": spec.alpha(), "beta": spec.beta(), "gamma": gamma})
        }
    }
}

/// Every `stride`-th level plus the last computed one, with grid metadata.
pub fn write_snapshots(path: &Path, ts: &TimeSeries, stride: usize) -> io::Result<()> {
    let g = &ts.grid;
    let last = ts.states.len() - 1;
    let snapshots: Vec<serde_json::Value> = ts
        .states
        .iter()
        .enumerate()
        .filter(|(m, _)| m % stride == 0 || *m == last)
        .map(|(m, s)| json!({"step": m, "time": g.time(m), "values": s.values()}))
        .collect();
    let doc = json!({
        "equation": equation_json(ts),
        "grid": {
            "L": g.length(),
            "K": g.nodes(),
            "T": g.final_time(),
            "M": g.steps(),
            "dx": g.dx(),
            "dt": g.dt(),
        },
        "state_stride": stride,
        "complete": ts.is_complete(),
        "snapshots": snapshots,
    });
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    out.flush()
}

pub fn write_table(out: &mut dyn Write, table: &ConvergenceTable) -> io::Result<()> {
    writeln!(out, "{TABLE_HEADER}")?;
    for r in &table.rows {
        let status = match &r.status {
            LevelStatus::Converged => "converged".to_string(),
            LevelStatus::Failed { step, .. } => format!("failed_at_step_{step}"),
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(r.dx),
            num(r.dt),
            num(r.h1_error),
            num(r.order),
            r.nodes,
            r.steps,
            num(r.max_sup),
            status
        )?;
    }
    out.flush()
}

pub fn write_table_file(path: &Path, table: &ConvergenceTable) -> io::Result<()> {
    let mut out = create(path)?;
    write_table(&mut out, table)
}
