use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::eval::{RepeatabilityReport, ReportMatrix, RobustnessCurve};

/// Header of the repeatability CSV.
pub const REPORT_HEADER: [&str; 8] = [
    "method",
    "condition",
    "n",
    "repeatable",
    "degenerate",
    "repeatability_pct",
    "mean_angle_deg",
    "ns_per_axis",
];

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_default()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Writes the header and one row per report.
pub fn write_reports_csv<W: Write>(out: W, reports: &[RepeatabilityReport]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        w.write_record([
            r.method.clone(),
            r.condition.clone(),
            r.n.to_string(),
            r.repeatable.to_string(),
            r.degenerate.to_string(),
            format!("{:.4}", r.repeatability_pct),
            opt(r.mean_angle_deg, 4),
            opt(r.ns_per_axis, 1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One observation of the tidy long-form output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    pub table: String,
    pub method: String,
    pub column: String,
    pub pair: String,
    pub n: usize,
    pub repeatable: usize,
    pub degenerate: usize,
    pub repeatability_pct: f64,
    pub mean_angle_deg: Option<f64>,
}

impl LongRow {
    fn from_report(table: &str, method: &str, column: &str, pair: &str, r: &RepeatabilityReport) -> Self {
        Self {
            table: table.to_string(),
            method: method.to_string(),
            column: column.to_string(),
            pair: pair.to_string(),
            n: r.n,
            repeatable: r.repeatable,
            degenerate: r.degenerate,
            repeatability_pct: r.repeatability_pct,
            mean_angle_deg: r.mean_angle_deg,
        }
    }
}

impl ReportMatrix {
    /// Per-pair observations behind every cell, with pair `*` for the aggregate.
    pub fn long_rows(&self) -> Vec<LongRow> {
        let table = format!("sweep_{}", self.kind.name());
        let mut out = Vec::new();
        for row in &self.rows {
            for ((column, agg), (_, per)) in row.cells.iter().zip(&row.per_pair) {
                out.push(LongRow::from_report(&table, &row.method, column, "*", agg));
                for r in per {
                    let pair = r.condition.rsplit_once('=').map_or(r.condition.as_str(), |(p, _)| p);
                    out.push(LongRow::from_report(&table, &row.method, column, pair, r));
                }
            }
        }
        out
    }
}

impl RobustnessCurve {
    pub fn long_rows(&self) -> Vec<LongRow> {
        let table = format!("robustness_{}", self.kind);
        self.points
            .iter()
            .filter_map(|p| p.report.as_ref().map(|r| LongRow::from_report(&table, &self.method, &p.label, "*", r)))
            .collect()
    }
}

/// Writes tidy rows with a header.
pub fn write_long_csv<W: Write>(out: W, rows: &[LongRow]) -> csv::Result<()> {
    let mut w = writer(out);
    w.write_record([
        "table",
        "method",
        "column",
        "pair",
        "n",
        "repeatable",
        "degenerate",
        "repeatability_pct",
        "mean_angle_deg",
    ])?;
    for r in rows {
        w.write_record([
            r.table.clone(),
            r.method.clone(),
            r.column.clone(),
            r.pair.clone(),
            r.n.to_string(),
            r.repeatable.to_string(),
            r.degenerate.to_string(),
            format!("{:.4}", r.repeatability_pct),
            opt(r.mean_angle_deg, 4),
        ])?;
    }
    w.flush()?;
    Ok(())
}
