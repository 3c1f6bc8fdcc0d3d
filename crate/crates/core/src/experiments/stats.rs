use std::time::Duration;

use super::{TrialRecord, TrialStatus};

/// Evaluated trials with `abs_error` below this land in the low bucket;
/// everything else, including exact ties, in the high bucket.
pub const ERROR_BUCKET_BOUNDARY: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregates {
    pub avg_truth: f64,
    pub avg_trained: f64,
    pub avg_abs_error: f64,
    pub median_abs_error: f64,
    /// `None` when no evaluated trial reached the boundary.
    pub avg_error_above_0p1: Option<f64>,
    /// `None` when every evaluated trial reached the boundary.
    pub avg_error_below_0p1: Option<f64>,
    pub fraction_below_0p1: f64,
    pub above_count: usize,
    pub below_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub evaluated_count: usize,
    pub excluded_count: usize,
    /// Train plus evaluation time over evaluated trials.
    pub total_duration: Duration,
    /// `None` when no trial was evaluated.
    pub aggregates: Option<Aggregates>,
}

impl SummaryStats {
    pub fn is_degenerate(&self) -> bool {
        self.aggregates.is_none()
    }

    pub fn total_ms(&self) -> f64 {
        self.total_duration.as_secs_f64() * 1e3
    }

    /// Equality ignoring durations.
    pub fn same_statistics(&self, other: &Self) -> bool {
        self.evaluated_count == other.evaluated_count
            && self.excluded_count == other.excluded_count
            && self.aggregates == other.aggregates
    }
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> Option<f64> {
    let n = xs.len();
    (n > 0).then(|| xs.sum::<f64>() / n as f64)
}

/// Aggregates over evaluated records only.
pub fn summarize(records: &[TrialRecord]) -> SummaryStats {
    let evaluated: Vec<&TrialRecord> = records
        .iter()
        .filter(|r| r.status == TrialStatus::Evaluated)
        .collect();
    let excluded_count = records.len() - evaluated.len();
    let total_duration = evaluated
        .iter()
        .map(|r| r.train_duration + r.eval_duration)
        .sum();

    if evaluated.is_empty() {
        return SummaryStats {
            evaluated_count: 0,
            excluded_count,
            total_duration,
            aggregates: None,
        };
    }

    let n = evaluated.len();
    let mut errors: Vec<f64> = evaluated.iter().map(|r| r.abs_error).collect();
    errors.sort_by(f64::total_cmp);
    let median_abs_error = if n % 2 == 1 {
        errors[n / 2]
    } else {
        (errors[n / 2 - 1] + errors[n / 2]) / 2.0
    };
    let (below, above): (Vec<f64>, Vec<f64>) =
        errors.iter().partition(|&&e| e < ERROR_BUCKET_BOUNDARY);

    let aggregates = Aggregates {
        avg_truth: mean(evaluated.iter().map(|r| r.truth_value)).unwrap_or_default(),
        avg_trained: mean(evaluated.iter().map(|r| r.trained_value)).unwrap_or_default(),
        avg_abs_error: mean(evaluated.iter().map(|r| r.abs_error)).unwrap_or_default(),
        median_abs_error,
        avg_error_above_0p1: mean(above.iter().copied()),
        avg_error_below_0p1: mean(below.iter().copied()),
        fraction_below_0p1: below.len() as f64 / n as f64,
        above_count: above.len(),
        below_count: below.len(),
    };
    SummaryStats {
        evaluated_count: n,
        excluded_count,
        total_duration,
        aggregates: Some(aggregates),
    }
}
