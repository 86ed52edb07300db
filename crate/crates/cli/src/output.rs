//! CSV tables written by the CLI. Numbers use 17 significant digits and
//! lines end in a bare line feed.

use std::fmt::Write;

use uq_core::eval::{InstanceRecord, RejectionCurve};
use uq_core::numfmt::format_number;
use uq_core::{Measure, Method, UncertaintyReport};

pub const CURVES_HEADER: &str = "method,measure,rejection_rate,mean_accuracy,std_accuracy,runs";

pub fn curves_csv(curves: &[RejectionCurve]) -> String {
    let mut out = String::new();
    writeln!(out, "{CURVES_HEADER}").unwrap();
    for c in curves {
        for j in 0..c.rejection_rates.len() {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                c.method,
                c.measure,
                format_number(c.rejection_rates[j]),
                format_number(c.mean_accuracy[j]),
                format_number(c.std_accuracy[j]),
                c.runs
            )
            .unwrap();
        }
    }
    out
}

/// `bayes_TU,bayes_AU,...,levi-ent_EU`.
pub fn score_columns() -> Vec<String> {
    Method::ALL
        .iter()
        .flat_map(|m| Measure::ALL.iter().map(move |u| format!("{m}_{u}")))
        .collect()
}

fn push_scores(out: &mut String, reports: &[UncertaintyReport; 3]) {
    for r in reports {
        for u in Measure::ALL {
            write!(out, ",{}", format_number(r.get(u))).unwrap();
        }
    }
}

/// Per-instance scores of one experiment run.
pub fn scores_csv(records: &[InstanceRecord]) -> String {
    let mut out = String::new();
    writeln!(out, "row,predicted,truth,{}", score_columns().join(",")).unwrap();
    for r in records {
        write!(out, "{},{},{}", r.row, r.predicted, r.truth).unwrap();
        push_scores(&mut out, &r.reports);
        out.push('\n');
    }
    out
}

/// One scored query row.
#[derive(Debug, Clone)]
pub struct QueryScores {
    pub predicted: usize,
    pub reports: [UncertaintyReport; 3],
}

pub fn query_csv(rows: &[QueryScores]) -> String {
    let mut out = String::new();
    writeln!(out, "query,predicted,{}", score_columns().join(",")).unwrap();
    for (i, r) in rows.iter().enumerate() {
        write!(out, "{},{}", i, r.predicted).unwrap();
        push_scores(&mut out, &r.reports);
        out.push('\n');
    }
    out
}
