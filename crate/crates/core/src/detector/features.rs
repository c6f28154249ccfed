//! Fixed-width feature vectors from telemetry traces.
//!
//! Four series are summarized — response time, total pods, average relative
//! CPU, total nodes — each with five statistics: mean, standard deviation
//! (population), max, min, median. The 20 features are laid out
//! series-major, so the order is `response_time_mean, response_time_std,
//! …, nodes_median`.

use crate::error::{Error, Result};
use crate::trace::Trace;

/// The four summarized series, in feature order.
const SERIES: [&str; 4] = ["response_time", "pods", "cpu_load", "nodes"];
/// The five statistics per series, in feature order.
const STATS: [&str; 5] = ["mean", "std", "max", "min", "median"];

/// Number of features produced by [`extract_features`].
pub const FEATURE_COUNT: usize = SERIES.len() * STATS.len();

/// Feature names in vector order (`<series>_<stat>`).
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(FEATURE_COUNT);
    for series in SERIES {
        for stat in STATS {
            names.push(format!("{series}_{stat}"));
        }
    }
    names
}

/// Split-search scan order for the detection features: pod statistics
/// first, then nodes, CPU, and response time.
///
/// Replica and node counts are exact control-plane state, while CPU and
/// response time are sampled measurements that carry noise outside
/// simulation. Gain still decides every split; this order only settles
/// exact gain ties — common on clean simulated corpora, where several
/// statistics of different series separate the classes identically — in
/// favor of the series whose values survive the move to a real cluster.
pub fn detection_priority() -> Vec<usize> {
    const PREFERENCE: [&str; 4] = ["pods", "nodes", "cpu_load", "response_time"];
    let mut order = Vec::with_capacity(FEATURE_COUNT);
    for wanted in PREFERENCE {
        let series = SERIES.iter().position(|s| *s == wanted).expect("known series");
        order.extend(series * STATS.len()..(series + 1) * STATS.len());
    }
    order
}

/// Summarizes a trace into the 20-feature vector.
///
/// `min_span_secs` guards against summarizing traces too short to contain
/// the pattern being hunted (callers pass three cycle lengths of the burst
/// period of interest); the span is measured from the first to past the
/// last row.
pub fn extract_features(trace: &Trace, min_span_secs: u64) -> Result<Vec<f64>> {
    let rows = &trace.rows;
    if rows.is_empty() {
        return Err(Error::EmptyInput("feature extraction needs a non-empty trace".into()));
    }
    let tick = if rows.len() >= 2 {
        rows[1].t.saturating_sub(rows[0].t).max(1)
    } else {
        1
    };
    let span = rows.last().unwrap().t - rows[0].t + tick;
    if span < min_span_secs {
        return Err(Error::TraceTooShort {
            have: span,
            need: min_span_secs,
            context: "feature extraction".into(),
        });
    }

    let series: [Vec<f64>; 4] = [
        rows.iter().map(|r| r.response_time).collect(),
        rows.iter().map(|r| r.total_pods as f64).collect(),
        rows.iter().map(|r| r.avg_relative_cpu).collect(),
        rows.iter().map(|r| r.total_nodes as f64).collect(),
    ];
    let mut out = Vec::with_capacity(FEATURE_COUNT);
    for values in &series {
        out.push(mean(values));
        out.push(population_std(values));
        out.push(values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        out.push(values.iter().copied().fold(f64::INFINITY, f64::min));
        out.push(median(values));
    }
    Ok(out)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Median with the midpoint convention: for an even count, the average of
/// the two middle values.
fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("telemetry values are never NaN"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}
