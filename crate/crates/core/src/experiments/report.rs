//! CSV output for trial records and experiment summaries.

use std::io::Write;

use super::{ExperimentSpec, SummaryStats, TrialRecord};
use crate::error::Result;
use crate::network::{rule_capacity, NetworkCondition};

pub const TRIALS_HEADER: [&str; 7] = [
    "trial",
    "status",
    "truth_value",
    "trained_value",
    "abs_error",
    "train_ns",
    "eval_ns",
];

pub const SUMMARY_HEADER: [&str; 17] = [
    "preset",
    "condition",
    "facts",
    "rules",
    "epochs",
    "velocity",
    "mode",
    "avg_truth",
    "avg_trained",
    "avg_abs_err",
    "median_abs_err",
    "avg_above_0p1",
    "avg_below_0p1",
    "frac_below_0p1",
    "evaluated",
    "excluded",
    "total_ms",
];

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

fn fixed_opt(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}

pub fn write_trials_csv<W: Write>(records: &[TrialRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(TRIALS_HEADER)?;
    for r in records {
        w.write_record([
            r.trial_index.to_string(),
            r.status.as_str().to_string(),
            fixed(r.truth_value),
            fixed(r.trained_value),
            fixed(r.abs_error),
            r.train_duration.as_nanos().to_string(),
            r.eval_duration.as_nanos().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One summary CSV row.
pub struct SummaryRow<'a> {
    pub preset: &'a str,
    pub spec: &'a ExperimentSpec,
    pub summary: &'a SummaryStats,
}

impl SummaryRow<'_> {
    fn fields(&self) -> Vec<String> {
        let spec = self.spec;
        let rules = match spec.condition {
            NetworkCondition::FullyConnected => rule_capacity(spec.num_facts),
            _ => spec.num_rules,
        };
        let agg = self.summary.aggregates.as_ref();
        vec![
            self.preset.to_string(),
            spec.condition.to_string(),
            spec.num_facts.to_string(),
            rules.to_string(),
            spec.config.epochs.to_string(),
            spec.config.velocity.to_string(),
            spec.config.mode.to_string(),
            fixed_opt(agg.map(|a| a.avg_truth)),
            fixed_opt(agg.map(|a| a.avg_trained)),
            fixed_opt(agg.map(|a| a.avg_abs_error)),
            fixed_opt(agg.map(|a| a.median_abs_error)),
            fixed_opt(agg.and_then(|a| a.avg_error_above_0p1)),
            fixed_opt(agg.and_then(|a| a.avg_error_below_0p1)),
            fixed_opt(agg.map(|a| a.fraction_below_0p1)),
            self.summary.evaluated_count.to_string(),
            self.summary.excluded_count.to_string(),
            format!("{:.3}", self.summary.total_ms()),
        ]
    }
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow<'_>], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(SUMMARY_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}
