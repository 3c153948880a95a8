use std::fmt::Write as _;

use super::StudyRecord;

pub const CSV_HEADER: &str = "scheme,ell,R,Tinv,nodes_per_unit,a11,a12,a21,a22,err_max,err_fro,seconds";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV with [`CSV_HEADER`]. Entries missing for `d = 1` or failed records
/// are left empty.
pub fn records_to_csv(records: &[StudyRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let cell = |k: usize, l: usize| opt(r.entries.as_ref().and_then(|e| e.get(k)?.get(l).copied()));
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.ell,
            r.r,
            r.tinv,
            r.nodes_per_unit,
            cell(0, 0),
            cell(0, 1),
            cell(1, 0),
            cell(1, 1),
            opt(r.err_max),
            opt(r.err_fro),
            r.seconds
        );
    }
    out
}

/// Two-column `log10 R,log10 err` data; nonpositive errors are skipped.
pub fn plot_data(points: &[(f64, f64)]) -> String {
    let mut out = String::from("log10_R,log10_err\n");
    for &(r, e) in points {
        if r > 0.0 && e > 0.0 && e.is_finite() {
            let _ = writeln!(out, "{},{}", r.log10(), e.log10());
        }
    }
    out
}
