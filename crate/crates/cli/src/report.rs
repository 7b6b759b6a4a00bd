//! Deviation reports as fixed-column CSV.

use std::fmt::Write;

use truthscore::ic_lab::DeviationReport;

pub const CSV_HEADER: &str = "instance_id,bidder,truthful_utility,best_gap,verdict,seed,grid";

pub struct CsvRow<'a> {
    pub instance_id: &'a str,
    pub report: &'a DeviationReport,
}

pub fn deviation_csv<'a>(rows: impl IntoIterator<Item = CsvRow<'a>>, seed: Option<u64>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let seed = seed.map(|s| s.to_string()).unwrap_or_default();
    for row in rows {
        let r = row.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}x{}",
            row.instance_id,
            r.bidder,
            number(r.truthful_utility),
            number(r.gap),
            r.verdict.as_str(),
            seed,
            r.grid.value_points,
            r.grid.prediction_points
        );
    }
    out
}

/// Shortest representation that parses back to the same float.
fn number(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}
