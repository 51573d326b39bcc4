//! Mode detection error, state RMSE and cross-trial summaries.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::EstimatorKind;
use crate::linalg::Vector;
use crate::model::Mode;
use crate::sim::TrialRecord;

pub const DEFAULT_BIN_WIDTH: f64 = 2.0;

/// Percentage of steps whose estimated mode differs from the true one.
pub fn mde_percent(true_modes: &[Mode], est_modes: &[Mode]) -> Result<f64> {
    if true_modes.len() != est_modes.len() {
        return Err(Error::dim("mode sequences", true_modes.len(), est_modes.len()));
    }
    if true_modes.is_empty() {
        return Err(Error::Domain("mode sequences are empty".into()));
    }
    let misses = true_modes.iter().zip(est_modes).filter(|(a, b)| a != b).count();
    Ok(100.0 * misses as f64 / true_modes.len() as f64)
}

/// Root mean squared error of state component `i`.
pub fn rmse(true_states: &[Vector], est_states: &[Vector], i: usize) -> Result<f64> {
    if true_states.len() != est_states.len() {
        return Err(Error::dim("state sequences", true_states.len(), est_states.len()));
    }
    if true_states.is_empty() {
        return Err(Error::Domain("state sequences are empty".into()));
    }
    let mut sum = 0.0;
    for (x, xhat) in true_states.iter().zip(est_states) {
        if i >= x.len() || i >= xhat.len() {
            return Err(Error::Domain(format!("state index {i} out of range")));
        }
        let d = x[i] - xhat[i];
        sum += d * d;
    }
    Ok((sum / true_states.len() as f64).sqrt())
}

/// Metrics of one estimator on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub mde: f64,
    /// One entry per physical state component; empty if the estimator has no state.
    pub rmse: Vec<f64>,
    pub fallback_steps: usize,
}

/// `None` when the estimator is absent from the record or failed during it.
pub fn trial_metrics(record: &TrialRecord, kind: EstimatorKind) -> Option<Result<TrialMetrics>> {
    let trace = record.trace(kind)?;
    if trace.failed() {
        return None;
    }
    Some((|| {
        let mde = mde_percent(&record.truth.modes, &trace.modes)?;
        let states: Option<Vec<Vector>> = trace.states.iter().cloned().collect();
        let rmse = match states {
            Some(states) => (0..record.plant_dim)
                .map(|i| rmse(&record.truth.states, &states, i))
                .collect::<Result<_>>()?,
            None => Vec::new(),
        };
        Ok(TrialMetrics {
            mde,
            rmse,
            fallback_steps: trace.fallback_count(),
        })
    })())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` edges from 0 to 100; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Histogram of percentages over `[0, 100]` with bins of `bin_width`.
pub fn histogram(values: &[f64], bin_width: f64) -> Result<Histogram> {
    if !(bin_width.is_finite() && bin_width > 0.0 && bin_width <= 100.0) {
        return Err(Error::Domain(format!("bin width must be in (0, 100], got {bin_width}")));
    }
    let bins = (100.0 / bin_width).ceil() as usize;
    let edges: Vec<f64> = (0..=bins).map(|i| (i as f64 * bin_width).min(100.0)).collect();
    let mut counts = vec![0; bins];
    for &v in values {
        if !(0.0..=100.0).contains(&v) {
            return Err(Error::Domain(format!("value {v} outside [0, 100]")));
        }
        let bin = ((v / bin_width).floor() as usize).min(bins - 1);
        counts[bin] += 1;
    }
    Ok(Histogram { edges, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: EstimatorKind,
    /// Successful trials.
    pub trials: usize,
    pub failures: usize,
    pub mean_mde: f64,
    pub median_mde: f64,
    pub max_mde: f64,
    /// Mean RMSE per physical state component.
    pub mean_rmse: Vec<f64>,
    pub fallback_steps: usize,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub estimators: Vec<EstimatorSummary>,
}

/// Sum in sorted order so the result does not depend on trial order.
fn stable_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Cross-trial means, failures excluded and counted.
pub fn aggregate(records: &[TrialRecord], kinds: &[EstimatorKind], bin_width: f64) -> Result<MetricsSummary> {
    let mut estimators = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let mut ok = Vec::new();
        let mut failures = 0;
        for record in records {
            match trial_metrics(record, kind) {
                Some(m) => ok.push(m?),
                None if record.trace(kind).is_some() => failures += 1,
                None => {}
            }
        }
        if ok.is_empty() {
            return Err(Error::Domain(format!("no successful trials for {kind}")));
        }
        let mut mdes: Vec<f64> = ok.iter().map(|m| m.mde).collect();
        let mean_mde = stable_mean(&mut mdes);
        let dims = ok.iter().map(|m| m.rmse.len()).min().unwrap_or(0);
        let mean_rmse = (0..dims)
            .map(|i| stable_mean(&mut ok.iter().map(|m| m.rmse[i]).collect::<Vec<_>>()))
            .collect();
        estimators.push(EstimatorSummary {
            estimator: kind,
            trials: ok.len(),
            failures,
            mean_mde,
            median_mde: median(&mdes),
            max_mde: *mdes.last().unwrap_or(&0.0),
            mean_rmse,
            fallback_steps: ok.iter().map(|m| m.fallback_steps).sum(),
            histogram: histogram(&mdes, bin_width)?,
        });
    }
    Ok(MetricsSummary { estimators })
}

impl MetricsSummary {
    pub fn get(&self, kind: EstimatorKind) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == kind)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }

    /// Criterion rows, one column per estimator.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(String, Vec<String>)> = vec![
            ("E{%MDE}".into(), self.estimators.iter().map(|e| format!("{:.2}", e.mean_mde)).collect()),
        ];
        let dims = self.estimators.iter().map(|e| e.mean_rmse.len()).max().unwrap_or(0);
        for i in 0..dims {
            rows.push((
                format!("E{{RMSE_{}}}", i + 1),
                self.estimators
                    .iter()
                    .map(|e| e.mean_rmse.get(i).map_or("-".into(), |v| format!("{v:.4}")))
                    .collect(),
            ));
        }
        rows.push(("trials".into(), self.estimators.iter().map(|e| e.trials.to_string()).collect()));
        rows.push(("failures".into(), self.estimators.iter().map(|e| e.failures.to_string()).collect()));

        let header: Vec<String> = self.estimators.iter().map(|e| e.estimator.to_string()).collect();
        let first = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("criterion".len());
        let width = rows
            .iter()
            .flat_map(|r| r.1.iter().map(String::len))
            .chain(header.iter().map(String::len))
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        let _ = write!(out, "{:<first$}", "criterion");
        for h in &header {
            let _ = write!(out, " | {h:>width$}");
        }
        out.push('\n');
        out.push_str(&"-".repeat(first + header.len() * (width + 3)));
        out.push('\n');
        for (name, cells) in rows {
            let _ = write!(out, "{name:<first$}");
            for c in cells {
                let _ = write!(out, " | {c:>width$}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modes(xs: &[usize]) -> Vec<Mode> {
        xs.iter().map(|&i| Mode::from_index(i)).collect()
    }

    #[test]
    fn mde_examples() {
        assert_eq!(mde_percent(&modes(&[0, 1, 2]), &modes(&[0, 1, 2])).unwrap(), 0.0);
        assert_eq!(mde_percent(&modes(&[0, 1]), &modes(&[1, 0])).unwrap(), 100.0);
        assert_eq!(mde_percent(&modes(&[0, 1, 2, 3]), &modes(&[0, 1, 2, 0])).unwrap(), 25.0);
        assert!(mde_percent(&modes(&[0]), &modes(&[0, 1])).is_err());
    }

    #[test]
    fn rmse_examples() {
        let v = |x: f64| Vector::from_element(1, x);
        let truth = vec![v(1.0), v(-2.0), v(3.0)];
        assert_eq!(rmse(&truth, &truth, 0).unwrap(), 0.0);
        let shifted: Vec<_> = truth.iter().map(|x| x.add_scalar(2.0)).collect();
        assert_eq!(rmse(&truth, &shifted, 0).unwrap(), 2.0);
        let r = rmse(&[v(0.0), v(0.0)], &[v(3.0), v(4.0)], 0).unwrap();
        assert!((r - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(rmse(&truth, &truth, 1).is_err());
        assert!(rmse(&truth, &truth[..2], 0).is_err());
    }

    #[test]
    fn histogram_partitions_range() {
        let h = histogram(&[0.0, 1.9, 2.0, 99.0, 100.0], 2.0).unwrap();
        assert_eq!(h.counts.len(), 50);
        assert_eq!(h.edges.first(), Some(&0.0));
        assert_eq!(h.edges.last(), Some(&100.0));
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[49], 2);
        assert_eq!(h.counts.iter().sum::<usize>(), 5);

        let h = histogram(&[100.0, 50.0], 30.0).unwrap();
        assert_eq!(h.edges, vec![0.0, 30.0, 60.0, 90.0, 100.0]);
        assert_eq!(h.counts, vec![0, 1, 0, 1]);
        assert!(histogram(&[101.0], 2.0).is_err());
        assert!(histogram(&[1.0], 0.0).is_err());
    }

    #[test]
    fn stable_mean_ignores_order() {
        let mut a = vec![0.1, 1e16, 0.3, -1e16, 0.7];
        let mut b = vec![-1e16, 0.7, 0.1, 0.3, 1e16];
        assert_eq!(stable_mean(&mut a).to_bits(), stable_mean(&mut b).to_bits());
    }
}
