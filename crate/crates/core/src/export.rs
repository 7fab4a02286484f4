//! CSV and JSON writers.
//!
//! Every file starts with the resolved configuration: a `# config: {json}`
//! line for CSV, a `config` field for JSON. Floats are written with 17
//! significant digits so values round-trip exactly.

use std::io::Write;

use serde::Serialize;
use serde_json::json;

use crate::analysis::{CellOutcome, CurveTable, PhaseDiagram};
use crate::closed_form::RankProfile;
use crate::encoding::Decomposition;
use crate::error::Result;
use crate::features::WidthSweepRow;

pub const SCHEMA_VERSION: u32 = 1;

/// Round-trip formatting: 17 significant digits, `nan`/`inf` spelled out.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_config_line<W: Write, C: Serialize>(w: &mut W, config: &C) -> Result<()> {
    writeln!(w, "# config: {}", serde_json::to_string(config)?)?;
    Ok(())
}

/// Wraps `body` as `{"schema_version", "kind", "config", "data"}`. Non-finite
/// floats become `null`.
pub fn write_json<W: Write, C: Serialize, B: Serialize>(w: &mut W, kind: &str, config: &C, body: &B) -> Result<()> {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "config": serde_json::to_value(config)?,
        "data": serde_json::to_value(body)?,
    });
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)?;
    Ok(())
}

/// Columns `alpha, creg_inv, split, min_margin, mean_margin, success`. A cell
/// that failed gets one row with split `error`.
pub fn write_phase_csv<W: Write, C: Serialize>(w: &mut W, config: &C, pd: &PhaseDiagram) -> Result<()> {
    write_config_line(w, config)?;
    writeln!(w, "alpha,creg_inv,split,min_margin,mean_margin,success")?;
    for cell in &pd.cells {
        let (a, c) = (fmt_f64(cell.alpha), fmt_f64(cell.creg_inv));
        match &cell.outcome {
            CellOutcome::Ok { splits, .. } => {
                for s in splits {
                    writeln!(
                        w,
                        "{a},{c},{},{},{},{}",
                        s.name,
                        fmt_f64(s.min_margin),
                        fmt_f64(s.mean_margin),
                        s.success
                    )?;
                }
            }
            CellOutcome::Error { .. } => writeln!(w, "{a},{c},error,nan,nan,false")?,
        }
    }
    Ok(())
}

/// Columns `j, r_ti, r_pert, r`.
pub fn write_ranks_csv<W: Write, C: Serialize>(w: &mut W, config: &C, profile: &RankProfile) -> Result<()> {
    write_config_line(w, config)?;
    writeln!(w, "j,r_ti,r_pert,r")?;
    for j in 0..profile.n() {
        writeln!(
            w,
            "{},{},{},{}",
            j + 1,
            fmt_f64(profile.r_ti[j]),
            fmt_f64(profile.r_pert[j]),
            fmt_f64(profile.ranks[j])
        )?;
    }
    Ok(())
}

/// Columns `j, r`, then a blank line and the conjunctive readout as an `n x n`
/// grid with row `j` and column `k`.
pub fn write_decomposition_csv<W: Write, C: Serialize>(w: &mut W, config: &C, dec: &Decomposition) -> Result<()> {
    write_config_line(w, config)?;
    writeln!(w, "# bias: {}", fmt_f64(dec.b))?;
    writeln!(w, "j,r")?;
    for (j, r) in dec.r.iter().enumerate() {
        writeln!(w, "{},{}", j + 1, fmt_f64(*r))?;
    }
    writeln!(w)?;
    let header: Vec<String> = (1..=dec.n).map(|k| format!("k{k}")).collect();
    writeln!(w, "j,{}", header.join(","))?;
    for j in 0..dec.n {
        let row: Vec<String> = (0..dec.n).map(|k| fmt_f64(dec.t[j * dec.n + k])).collect();
        writeln!(w, "{},{}", j + 1, row.join(","))?;
    }
    Ok(())
}

/// Columns `h, seed, alpha_hat, max_gap, max_antisym`.
pub fn write_width_sweep_csv<W: Write, C: Serialize>(w: &mut W, config: &C, rows: &[WidthSweepRow]) -> Result<()> {
    write_config_line(w, config)?;
    writeln!(w, "h,seed,alpha_hat,max_gap,max_antisym")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.width,
            r.seed,
            fmt_f64(r.alpha_hat),
            fmt_f64(r.max_gap),
            fmt_f64(r.max_antisym)
        )?;
    }
    Ok(())
}

/// Columns `<varied>, j, k, margin`; crossings go in `# crossing:` lines after
/// the config line.
pub fn write_curves_csv<W: Write, C: Serialize>(w: &mut W, config: &C, table: &CurveTable) -> Result<()> {
    write_config_line(w, config)?;
    for c in &table.crossings {
        writeln!(
            w,
            "# crossing: j={} k={} {}={} bracket=[{}, {}] falling={}",
            c.pair.j,
            c.pair.k,
            table.axis.varied_name(),
            fmt_f64(c.location),
            fmt_f64(c.bracket.0),
            fmt_f64(c.bracket.1),
            c.falling
        )?;
    }
    writeln!(w, "{},j,k,margin", table.axis.varied_name())?;
    for (i, pair) in table.pairs.iter().enumerate() {
        for (s, x) in table.samples.iter().enumerate() {
            writeln!(w, "{},{},{},{}", fmt_f64(*x), pair.j, pair.k, fmt_f64(table.margins[i][s]))?;
        }
    }
    Ok(())
}
