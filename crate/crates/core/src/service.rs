//! Service model: how offered load maps to per-pod relative CPU and how
//! relative CPU maps to response time.

use crate::config::ServiceModelConfig;

/// Per-pod relative CPU (percent) when `rate` requests/s are split evenly
/// over `ready_pods` pods of `capacity_rps` each, capped at `burst_limit`.
///
/// With zero ready pods every request fails and utilization is undefined;
/// the burst limit is reported for that tick so the series stays total.
pub fn pod_utilization(rate: f64, ready_pods: u32, capacity_rps: f64, burst_limit: f64) -> f64 {
    if ready_pods == 0 {
        return burst_limit;
    }
    let demand = 100.0 * (rate / ready_pods as f64) / capacity_rps;
    demand.min(burst_limit)
}

/// True when the offered load exceeds what the ready pods can absorb even
/// at their burst ceiling.
pub fn is_saturated(rate: f64, ready_pods: u32, capacity_rps: f64, burst_limit: f64) -> bool {
    if ready_pods == 0 {
        return rate > 0.0;
    }
    100.0 * (rate / ready_pods as f64) / capacity_rps >= burst_limit
}

/// Response time in milliseconds for a pod running at `utilization`
/// percent relative CPU, under the piecewise-linear service model:
/// flat at base latency below the knee, linear climb above it, and the
/// saturation latency once utilization reaches `burst_limit`.
///
/// The linear segment is clamped to the saturation latency so the curve is
/// monotone non-decreasing for any parameter choice.
pub fn response_time(utilization: f64, burst_limit: f64, model: &ServiceModelConfig) -> f64 {
    if utilization >= burst_limit {
        return model.saturation_latency_ms;
    }
    let rho = utilization / 100.0;
    let linear = if rho <= model.knee_utilization {
        model.base_latency_ms
    } else {
        model.base_latency_ms + model.latency_slope_ms * (rho - model.knee_utilization)
    };
    linear.min(model.saturation_latency_ms)
}

/// Requests per second that cannot be served this tick: demand beyond the
/// aggregate burst ceiling of the ready pods (all of it, when none are
/// ready).
pub fn unserved_rate(rate: f64, ready_pods: u32, capacity_rps: f64, burst_limit: f64) -> f64 {
    let ceiling = ready_pods as f64 * capacity_rps * burst_limit / 100.0;
    (rate - ceiling).max(0.0)
}
