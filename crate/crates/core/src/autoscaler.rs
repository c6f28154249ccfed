//! Two-tier autoscaling decisions.
//!
//! The pod tier compares average relative CPU against a target band and,
//! after a sustained breach, sets the replica count to
//! `ceil(sum(U_i) / U_target)`. The node tier adds nodes for pending pods
//! that fit nowhere and reclaims nodes that stay idle, never dropping
//! below the configured floor.

use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterState, NodeId, NodePhase};
use crate::config::ClusterConfig;
use crate::error::{Error, Result};

/// A scaling decision emitted by one tier, to be applied by the engine and
/// recorded in the run's event log. Timing provenance (when the breach or
/// idle stretch began) rides along so logs are auditable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingAction {
    /// Pod tier: create this many pods (they enter Pending).
    CreatePods { count: u32, breach_started_at: u64 },
    /// Pod tier: terminate this many pods, most recently created first.
    TerminatePods { count: u32, breach_started_at: u64 },
    /// Node tier: create this many nodes (they enter Warming).
    CreateNodes { count: u32, unplaceable: u32 },
    /// Node tier: start draining one idle node.
    DrainNode { node: NodeId, idle_since: u64 },
}

/// Mean of per-pod relative CPU percentages.
pub fn average_relative_cpu(utilizations: &[f64]) -> Result<f64> {
    if utilizations.is_empty() {
        return Err(Error::EmptyInput(
            "average_relative_cpu over zero pods is undefined".into(),
        ));
    }
    Ok(utilizations.iter().sum::<f64>() / utilizations.len() as f64)
}

/// Replica count the pod tier wants, given per-pod relative CPU.
///
/// If the average sits within `tolerance` of `u_target` (ratio in
/// `[1 - tolerance, 1 + tolerance]`, bounds included) the current count is
/// kept; otherwise the count is `ceil(sum(U_i) / u_target)`. The result may
/// be 0 for an all-idle fleet; the caller's step function clamps to 1.
pub fn target_pod_count(
    per_pod_utilization: &[f64],
    u_target: f64,
    current_pods: u32,
    tolerance: f64,
) -> Result<u32> {
    if per_pod_utilization.len() != current_pods as usize {
        return Err(Error::InvalidConfig(format!(
            "target_pod_count: utilization list has {} entries but current_pods is {}",
            per_pod_utilization.len(),
            current_pods
        )));
    }
    if per_pod_utilization.is_empty() {
        return Err(Error::EmptyInput(
            "target_pod_count needs at least one pod".into(),
        ));
    }
    if !(u_target > 0.0 && u_target.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "target_pod_count: u_target must be positive, got {u_target}"
        )));
    }
    if !(0.0..1.0).contains(&tolerance) {
        return Err(Error::InvalidConfig(format!(
            "target_pod_count: tolerance must be in [0, 1), got {tolerance}"
        )));
    }
    let sum: f64 = per_pod_utilization.iter().sum();
    Ok(target_from_aggregate(sum, current_pods, u_target, tolerance))
}

/// Band-check + ceiling on pre-aggregated utilization. This is the exact
/// arithmetic of [`target_pod_count`] without materializing the per-pod
/// list; the engine uses it on counts it already has.
pub fn target_from_aggregate(
    utilization_sum: f64,
    current_pods: u32,
    u_target: f64,
    tolerance: f64,
) -> u32 {
    let average = utilization_sum / current_pods as f64;
    let ratio = average / u_target;
    if ratio >= 1.0 - tolerance && ratio <= 1.0 + tolerance {
        return current_pods;
    }
    let desired = (utilization_sum / u_target).ceil();
    if desired <= 0.0 {
        0
    } else if desired >= u32::MAX as f64 {
        u32::MAX
    } else {
        desired as u32
    }
}

/// One pod-tier evaluation at `state.now`.
///
/// Maintains the breach timers: a scale-up fires only once `desired > live`
/// has held continuously for `i_p_up`, a scale-down only once
/// `desired < live` has held for `i_p_down`. Any direction change or return
/// to equality resets the timers. `desired` below 1 is clamped to 1.
pub fn hpa_step(
    state: &mut ClusterState,
    config: &ClusterConfig,
    desired: u32,
) -> Vec<ScalingAction> {
    let desired = desired.max(1);
    let live = state.live_pods();
    let now = state.now;
    let mut actions = Vec::new();
    use std::cmp::Ordering;
    match desired.cmp(&live) {
        Ordering::Greater => {
            state.hpa_breach_down_since = None;
            let since = *state.hpa_breach_up_since.get_or_insert(now);
            if now - since >= config.i_p_up.secs() {
                actions.push(ScalingAction::CreatePods {
                    count: desired - live,
                    breach_started_at: since,
                });
                state.hpa_breach_up_since = None;
            }
        }
        Ordering::Less => {
            state.hpa_breach_up_since = None;
            let since = *state.hpa_breach_down_since.get_or_insert(now);
            if now - since >= config.i_p_down.secs() {
                actions.push(ScalingAction::TerminatePods {
                    count: live - desired,
                    breach_started_at: since,
                });
                state.hpa_breach_down_since = None;
            }
        }
        Ordering::Equal => {
            state.hpa_breach_up_since = None;
            state.hpa_breach_down_since = None;
        }
    }
    actions
}

/// One node-tier evaluation at `state.now`.
///
/// Every `i_n_up` seconds (anchored to t=0) it counts pending pods that
/// cannot fit on Ready or Warming nodes and requests
/// `ceil(unplaceable / pods_per_node)` new nodes, clamped so total nodes
/// never exceed `max_nodes`. Independently, every tick, Ready nodes idle
/// for at least `i_n_down` are drained longest-idle first, stopping before
/// ready nodes would drop below `min_nodes`.
pub fn ca_step(state: &ClusterState, config: &ClusterConfig) -> Vec<ScalingAction> {
    let now = state.now;
    let mut actions = Vec::new();

    if now.is_multiple_of(config.i_n_up.secs()) {
        let pending = state.pending_pods();
        let free = state.free_capacity(config.pods_per_node);
        let unplaceable = pending.saturating_sub(free);
        if unplaceable > 0 {
            let want = unplaceable.div_ceil(config.pods_per_node);
            let allowed = config.max_nodes.saturating_sub(state.total_nodes());
            let count = want.min(allowed);
            if count > 0 {
                actions.push(ScalingAction::CreateNodes { count, unplaceable });
            }
        }
    }

    let mut candidates: Vec<(u64, NodeId)> = state
        .nodes
        .iter()
        .filter(|n| n.phase == NodePhase::Ready)
        .filter_map(|n| n.idle_since.map(|since| (since, n.id)))
        .filter(|(since, _)| now - since >= config.i_n_down.secs())
        .collect();
    candidates.sort_unstable();
    let mut ready = state.ready_nodes();
    for (idle_since, node) in candidates {
        if ready <= config.min_nodes {
            break;
        }
        actions.push(ScalingAction::DrainNode { node, idle_since });
        ready -= 1;
    }
    actions
}
