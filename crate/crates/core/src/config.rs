//! Cluster, service-model, and pricing configuration.
//!
//! All durations are whole simulated seconds. In scenario files they may be
//! written either as bare integers (seconds) or as strings with an `s`, `m`,
//! or `h` suffix ("90", "10m", "600s").

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};

/// Whole seconds, deserializable from `60`, `"60"`, `"60s"`, `"10m"`, `"1h"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[derive(Default)]
pub struct DurationSecs(pub u64);

impl DurationSecs {
    pub fn secs(self) -> u64 {
        self.0
    }
}

impl fmt::Display for DurationSecs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.0)
    }
}

impl From<u64> for DurationSecs {
    fn from(v: u64) -> Self {
        DurationSecs(v)
    }
}


/// Parses "90", "90s", "10m", or "2h" into seconds.
pub fn parse_duration_str(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty duration".into());
    }
    let (num, mult) = match s.as_bytes()[s.len() - 1] {
        b's' => (&s[..s.len() - 1], 1u64),
        b'm' => (&s[..s.len() - 1], 60u64),
        b'h' => (&s[..s.len() - 1], 3600u64),
        _ => (s, 1u64),
    };
    let value: u64 = num
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse duration {s:?}: expected an integer with optional s/m/h suffix"))?;
    Ok(value * mult)
}

impl Serialize for DurationSecs {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u64(self.0)
    }
}

impl<'de> Deserialize<'de> for DurationSecs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> de::Visitor<'de> for V {
            type Value = DurationSecs;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer number of seconds or a string like \"10m\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<DurationSecs, E> {
                Ok(DurationSecs(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<DurationSecs, E> {
                if v < 0 {
                    return Err(E::custom("durations cannot be negative"));
                }
                Ok(DurationSecs(v as u64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<DurationSecs, E> {
                parse_duration_str(s).map(DurationSecs).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// Autoscaler and cluster-shape parameters.
///
/// The pod tier scales replicas toward a relative-CPU target; the node tier
/// adds nodes for unplaceable pods and reclaims nodes that stay idle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    /// Pod-tier relative CPU target, percent (e.g. 50.0).
    pub u_target: f64,
    /// Relative tolerance band around `u_target` within which the pod tier
    /// holds its current replica count (0.10 means +/-10%).
    pub hpa_tolerance: f64,
    /// Pods that fit on one node.
    pub pods_per_node: u32,
    /// Pods present at t=0 (all Ready).
    pub initial_pods: u32,
    /// Nodes present at t=0 (all Ready).
    pub initial_nodes: u32,
    /// Node-tier floor: ready nodes never drop below this.
    pub min_nodes: u32,
    /// Node-tier ceiling: total nodes never exceed this.
    pub max_nodes: u32,
    /// Sustained over-target time before a pod scale-up fires.
    pub i_p_up: DurationSecs,
    /// Sustained under-target time before a pod scale-down fires.
    pub i_p_down: DurationSecs,
    /// Cadence of the node-tier check for unplaceable pods.
    pub i_n_up: DurationSecs,
    /// Continuous idle time before a node is reclaimed.
    pub i_n_down: DurationSecs,
    /// Pod warm-up: placement to Ready.
    pub w_p_up: DurationSecs,
    /// Pod drain: Terminating to removed.
    pub w_p_down: DurationSecs,
    /// Node warm-up: creation to Ready.
    pub w_n_up: DurationSecs,
    /// Node drain: Draining to removed.
    pub w_n_down: DurationSecs,
    /// Requests per second one pod serves at 100% relative CPU.
    pub pod_capacity_rps: f64,
    /// Relative-CPU ceiling, percent; utilization demand beyond this is
    /// unserved (the pod is saturated).
    pub pod_burst_limit: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            u_target: 50.0,
            hpa_tolerance: 0.10,
            pods_per_node: 3,
            initial_pods: 3,
            initial_nodes: 4,
            min_nodes: 3,
            max_nodes: 32,
            i_p_up: DurationSecs(60),
            i_p_down: DurationSecs(300),
            i_n_up: DurationSecs(10),
            i_n_down: DurationSecs(600),
            w_p_up: DurationSecs(30),
            w_p_down: DurationSecs(5),
            w_n_up: DurationSecs(120),
            w_n_down: DurationSecs(120),
            pod_capacity_rps: 20.0,
            pod_burst_limit: 300.0,
        }
    }
}

impl ClusterConfig {
    /// Checks every documented constraint; returns the first violation.
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.u_target > 0.0 && self.u_target.is_finite()) {
            return err(format!("u_target must be positive, got {}", self.u_target));
        }
        if !(0.0..1.0).contains(&self.hpa_tolerance) {
            return err(format!(
                "hpa_tolerance must be in [0, 1), got {}",
                self.hpa_tolerance
            ));
        }
        if self.pods_per_node == 0 {
            return err("pods_per_node must be at least 1".into());
        }
        if self.initial_pods == 0 {
            return err("initial_pods must be at least 1 (the pod tier never scales to zero)".into());
        }
        if self.min_nodes == 0 {
            return err("min_nodes must be at least 1".into());
        }
        if self.min_nodes > self.max_nodes {
            return err(format!(
                "min_nodes ({}) exceeds max_nodes ({})",
                self.min_nodes, self.max_nodes
            ));
        }
        if self.initial_nodes < self.min_nodes || self.initial_nodes > self.max_nodes {
            return err(format!(
                "initial_nodes ({}) must lie within [min_nodes, max_nodes] = [{}, {}]",
                self.initial_nodes, self.min_nodes, self.max_nodes
            ));
        }
        if self.initial_pods > self.initial_nodes * self.pods_per_node {
            return err(format!(
                "initial_pods ({}) exceeds initial capacity ({} nodes x {} pods/node)",
                self.initial_pods, self.initial_nodes, self.pods_per_node
            ));
        }
        for (name, d) in [
            ("i_p_up", self.i_p_up),
            ("i_p_down", self.i_p_down),
            ("i_n_up", self.i_n_up),
            ("i_n_down", self.i_n_down),
            ("w_p_up", self.w_p_up),
            ("w_p_down", self.w_p_down),
            ("w_n_up", self.w_n_up),
            ("w_n_down", self.w_n_down),
        ] {
            if d.secs() == 0 {
                return err(format!("{name} must be a positive duration"));
            }
        }
        if !(self.pod_capacity_rps > 0.0 && self.pod_capacity_rps.is_finite()) {
            return err(format!(
                "pod_capacity_rps must be positive, got {}",
                self.pod_capacity_rps
            ));
        }
        if !(self.pod_burst_limit > 0.0 && self.pod_burst_limit.is_finite()) {
            return err(format!(
                "pod_burst_limit must be positive, got {}",
                self.pod_burst_limit
            ));
        }
        Ok(())
    }
}

/// Maps relative CPU to response time, and controls the disruption model
/// for node reclaim events.
///
/// Latency is flat at `base_latency_ms` up to `knee_utilization`, climbs
/// linearly above the knee, and jumps to `saturation_latency_ms` once pods
/// are saturated (demand at or beyond the burst limit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceModelConfig {
    /// Response time on an unloaded service, milliseconds.
    pub base_latency_ms: f64,
    /// Utilization fraction (of 100%) where latency starts climbing.
    pub knee_utilization: f64,
    /// Slope above the knee, milliseconds per unit utilization fraction.
    pub latency_slope_ms: f64,
    /// Response time when pods are saturated, milliseconds.
    pub saturation_latency_ms: f64,
    /// Whether reclaiming nodes disturbs in-flight traffic (transient
    /// rescheduling of co-hosted singleton pods observed on managed
    /// clusters); adds latency and error counts on removal ticks.
    pub model_rescheduling_errors: bool,
    /// Added milliseconds per node removed in a tick, when the disruption
    /// model is on.
    pub reschedule_penalty_ms: f64,
}

impl Default for ServiceModelConfig {
    fn default() -> Self {
        ServiceModelConfig {
            base_latency_ms: 20.0,
            knee_utilization: 0.7,
            // Chosen so a pod running at 100% answers at 5x base latency.
            latency_slope_ms: 800.0 / 3.0,
            saturation_latency_ms: 1000.0,
            model_rescheduling_errors: true,
            reschedule_penalty_ms: 20.0,
        }
    }
}

impl ServiceModelConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.base_latency_ms > 0.0 && self.base_latency_ms.is_finite()) {
            return err(format!(
                "base_latency_ms must be positive, got {}",
                self.base_latency_ms
            ));
        }
        if !(0.0..=1.0).contains(&self.knee_utilization) {
            return err(format!(
                "knee_utilization must be in [0, 1], got {}",
                self.knee_utilization
            ));
        }
        if !(self.latency_slope_ms >= 0.0 && self.latency_slope_ms.is_finite()) {
            return err(format!(
                "latency_slope_ms must be non-negative, got {}",
                self.latency_slope_ms
            ));
        }
        if self.saturation_latency_ms < self.base_latency_ms {
            return err(format!(
                "saturation_latency_ms ({}) must be at least base_latency_ms ({})",
                self.saturation_latency_ms, self.base_latency_ms
            ));
        }
        if !(self.reschedule_penalty_ms >= 0.0 && self.reschedule_penalty_ms.is_finite()) {
            return err(format!(
                "reschedule_penalty_ms must be non-negative, got {}",
                self.reschedule_penalty_ms
            ));
        }
        Ok(())
    }
}

/// Managed-cluster billing: per-second node rate with a minimum billed
/// lifetime per node, plus a flat per-hour management fee prorated over the
/// run without rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PricingConfig {
    /// Currency units billed per node-second.
    pub node_rate_per_sec: f64,
    /// Minimum billed seconds for any node lifetime.
    pub min_billing_secs: u64,
    /// Flat management fee per hour of run time, prorated.
    pub mgmt_fee_per_hour: f64,
}

impl Default for PricingConfig {
    fn default() -> Self {
        PricingConfig {
            // A small general-purpose instance at $0.0475/hour.
            node_rate_per_sec: 0.0475 / 3600.0,
            min_billing_secs: 60,
            mgmt_fee_per_hour: 0.10,
        }
    }
}

impl PricingConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.node_rate_per_sec >= 0.0 && self.node_rate_per_sec.is_finite()) {
            return err(format!(
                "node_rate_per_sec must be non-negative, got {}",
                self.node_rate_per_sec
            ));
        }
        if !(self.mgmt_fee_per_hour >= 0.0 && self.mgmt_fee_per_hour.is_finite()) {
            return err(format!(
                "mgmt_fee_per_hour must be non-negative, got {}",
                self.mgmt_fee_per_hour
            ));
        }
        Ok(())
    }
}
