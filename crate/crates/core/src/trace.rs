//! Per-tick telemetry and its export formats.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};

/// One tick of telemetry. Field order is the CSV column contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Simulated second.
    pub t: u64,
    /// Offered request rate after ramp and jitter, requests/s.
    pub offered_rate: f64,
    /// Pods serving traffic this tick.
    pub ready_pods: u32,
    /// Live pods: Pending + Warming + Ready (Terminating excluded).
    pub total_pods: u32,
    /// Nodes in the Ready phase.
    pub ready_nodes: u32,
    /// All nodes, including Warming and Draining — the billable count.
    pub total_nodes: u32,
    /// Average relative CPU across live pods, percent. Ready pods carry the
    /// even-split utilization; Pending/Warming pods contribute zero, so the
    /// value is `pod_utilization(rate, ready) * ready / total`.
    pub avg_relative_cpu: f64,
    /// Service response time this tick, milliseconds.
    pub response_time: f64,
    /// Requests failed this tick (saturation overflow plus scale-down
    /// disruption), rounded to whole requests.
    pub errors: u64,
}

/// A full run's telemetry, one row per tick.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Span in simulated seconds (one row per second).
    pub fn span_secs(&self) -> u64 {
        self.rows.len() as u64
    }

    /// Serializes all rows as CSV with the contract header.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer
                .serialize(row)
                .map_err(|e| Error::Parse(format!("trace CSV encode: {e}")))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Parse(format!("trace CSV flush: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(format!("trace CSV utf8: {e}")))
    }

    /// Parses a CSV produced by [`Trace::to_csv`].
    pub fn from_csv(text: &str) -> Result<Trace> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for record in reader.deserialize() {
            let row: TraceRow =
                record.map_err(|e| Error::Parse(format!("trace CSV decode: {e}")))?;
            rows.push(row);
        }
        Ok(Trace { rows })
    }

    /// Serializes rows as line-delimited JSON, one object per tick.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = Vec::new();
        for row in &self.rows {
            serde_json::to_writer(&mut out, row)
                .map_err(|e| Error::Parse(format!("trace JSONL encode: {e}")))?;
            out.push(b'\n');
        }
        String::from_utf8(out).map_err(|e| Error::Parse(format!("trace JSONL utf8: {e}")))
    }

    /// The reduced series used for plotting dashboards: offered rate, pod
    /// count, node count, average relative CPU, and response time.
    pub fn to_plot_csv(&self) -> Result<String> {
        let mut out = Vec::new();
        writeln!(out, "t,rate,pods,nodes,cpu,response_time")
            .map_err(|e| Error::Parse(format!("plot CSV: {e}")))?;
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.t,
                row.offered_rate,
                row.total_pods,
                row.total_nodes,
                row.avg_relative_cpu,
                row.response_time
            )
            .map_err(|e| Error::Parse(format!("plot CSV: {e}")))?;
        }
        String::from_utf8(out).map_err(|e| Error::Parse(format!("plot CSV utf8: {e}")))
    }

    pub fn response_time_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.response_time).collect()
    }

    pub fn total_pods_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.total_pods as f64).collect()
    }

    pub fn cpu_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.avg_relative_cpu).collect()
    }

    pub fn total_nodes_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.total_nodes as f64).collect()
    }

    /// Mean of `pick(row)` over rows with `t` in `[start, end)`.
    pub fn mean_over<F: Fn(&TraceRow) -> f64>(
        &self,
        start: u64,
        end: u64,
        pick: F,
    ) -> Result<f64> {
        let mut sum = 0.0;
        let mut n = 0u64;
        for row in &self.rows {
            if row.t >= start && row.t < end {
                sum += pick(row);
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::EmptyInput(format!(
                "trace window [{start}, {end}) contains no ticks"
            )));
        }
        Ok(sum / n as f64)
    }
}

/// Counts local maxima of a series, treating a flat plateau higher than
/// both the values before and after it as a single maximum. Endpoints
/// count when the series falls away from them (or rises into them).
pub fn count_local_maxima(series: &[f64]) -> usize {
    let mut count = 0;
    let mut rising = true; // from the left edge, a fall counts as a peak
    let mut i = 0;
    let n = series.len();
    while i + 1 < n {
        if series[i + 1] > series[i] {
            rising = true;
        } else if series[i + 1] < series[i] {
            if rising {
                count += 1;
            }
            rising = false;
        }
        i += 1;
    }
    if rising && n > 0 {
        count += 1; // series ends on a high plateau or climb
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_trace() -> Trace {
        Trace {
            rows: vec![
                TraceRow {
                    t: 0,
                    offered_rate: 30.0,
                    ready_pods: 3,
                    total_pods: 3,
                    ready_nodes: 4,
                    total_nodes: 4,
                    avg_relative_cpu: 50.0,
                    response_time: 20.0,
                    errors: 0,
                },
                TraceRow {
                    t: 1,
                    offered_rate: 630.5,
                    ready_pods: 3,
                    total_pods: 18,
                    ready_nodes: 4,
                    total_nodes: 6,
                    avg_relative_cpu: 50.25,
                    response_time: 1000.0,
                    errors: 450,
                },
            ],
        }
    }

    #[test]
    fn csv_has_contract_header_and_round_trips() {
        let trace = sample_trace();
        let csv = trace.to_csv().unwrap();
        let header = csv.lines().next().unwrap();
        assert_eq!(
            header,
            "t,offered_rate,ready_pods,total_pods,ready_nodes,total_nodes,avg_relative_cpu,response_time,errors"
        );
        let back = Trace::from_csv(&csv).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn jsonl_is_one_object_per_tick() {
        let trace = sample_trace();
        let jsonl = trace.to_jsonl().unwrap();
        let lines: Vec<&str> = jsonl.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: TraceRow = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first, trace.rows[0]);
    }

    #[test]
    fn plot_csv_exposes_the_dashboard_series() {
        let plot = sample_trace().to_plot_csv().unwrap();
        let mut lines = plot.lines();
        assert_eq!(lines.next().unwrap(), "t,rate,pods,nodes,cpu,response_time");
        assert_eq!(lines.next().unwrap(), "0,30,3,4,50,20");
    }

    #[test]
    fn mean_over_respects_window_and_rejects_empty() {
        let trace = sample_trace();
        let mean = trace.mean_over(0, 2, |r| r.response_time).unwrap();
        assert_eq!(mean, 510.0);
        let only_first = trace.mean_over(0, 1, |r| r.response_time).unwrap();
        assert_eq!(only_first, 20.0);
        assert!(trace.mean_over(5, 9, |r| r.response_time).is_err());
    }

    #[test]
    fn local_maxima_counts_plateaus_once() {
        assert_eq!(count_local_maxima(&[1.0, 2.0, 1.0]), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 2.0, 2.0, 1.0]), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 1.0, 3.0, 3.0, 1.0]), 2);
        // Ends on a climb: the last plateau is a maximum.
        assert_eq!(count_local_maxima(&[1.0, 2.0, 1.0, 3.0]), 2);
        // Monotone decreasing: the left edge is the single maximum.
        assert_eq!(count_local_maxima(&[3.0, 2.0, 1.0]), 1);
        // Constant series: one big plateau.
        assert_eq!(count_local_maxima(&[2.0, 2.0, 2.0]), 1);
        // Square wave with 3 highs.
        let wave = [
            4.0, 4.0, 22.0, 22.0, 3.0, 3.0, 21.0, 21.0, 3.0, 3.0, 21.0, 21.0, 3.0,
        ];
        assert_eq!(count_local_maxima(&wave), 3);
    }
}
