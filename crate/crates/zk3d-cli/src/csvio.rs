//! CSV output of the diagnostics series.
//!
//! The header is fixed and every value is printed with 17 significant
//! digits, which round-trips f64 exactly: re-parsing the file reproduces
//! the in-memory series bit for bit.

use zk3d::DiagnosticsRecord;

pub const CSV_HEADER: &str =
    "t,l2_sq,w_l2_sq,trace_x0,trace_accum,ux_sq,uy_sq,uz_sq,h2_sq,ut_w_sq,second_yz,uxx_sq";

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn series_to_csv(series: &[DiagnosticsRecord]) -> String {
    let mut out = String::with_capacity(64 + series.len() * 300);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in series {
        let cols = [
            r.t, r.l2_sq, r.w_l2_sq, r.trace_x0, r.trace_accum, r.ux_sq, r.uy_sq, r.uz_sq,
            r.h2_sq, r.ut_w_sq, r.second_yz, r.uxx_sq,
        ];
        let row: Vec<String> = cols.iter().map(|&c| fmt_f64(c)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parse a CSV produced by `series_to_csv`. The trace columns that are not
/// part of the file come back as zero; no summary statistic depends on
/// them.
pub fn series_from_csv(text: &str) -> Result<Vec<DiagnosticsRecord>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(format!("bad CSV header: {other:?}")),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1)))
            .collect::<Result<_, _>>()?;
        if vals.len() != 12 {
            return Err(format!("row {}: expected 12 columns, got {}", i + 1, vals.len()));
        }
        out.push(DiagnosticsRecord {
            t: vals[0],
            l2_sq: vals[1],
            w_l2_sq: vals[2],
            trace_x0: vals[3],
            trace_accum: vals[4],
            ux_sq: vals[5],
            uy_sq: vals[6],
            uz_sq: vals[7],
            h2_sq: vals[8],
            ut_w_sq: vals[9],
            second_yz: vals[10],
            uxx_sq: vals[11],
            trace_xy: 0.0,
            trace_xz: 0.0,
            trace_xyy: 0.0,
            trace_xzz: 0.0,
            trace_xyz: 0.0,
        });
    }
    Ok(out)
}
