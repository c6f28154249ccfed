//! End-to-end simulation dynamics: reaction timing, scale-down paths,
//! conservation, and reproducibility on full-length runs.

use yoyosim::autoscaler::ScalingAction;
use yoyosim::cluster::NodeId;
use yoyosim::config::{ClusterConfig, ServiceModelConfig};
use yoyosim::engine::{run_simulation, run_simulation_opts, SimEvent, SimOptions};
use yoyosim::workload::WorkloadSchedule;

fn reference_cluster() -> ClusterConfig {
    ClusterConfig::default()
}

fn reference_burst() -> WorkloadSchedule {
    // Power 20, 10-minute bursts, 20-minute gaps, three cycles.
    WorkloadSchedule::yoyo(30.0, 20.0, 600, 1200, 3)
}

/// The full reaction chain of the first burst cycle, tick by tick:
/// breach at t=0, pod scale-up at t=60, node request the same tick (t=60
/// is on the 10 s creation cadence and the new pods are already pending),
/// burst ends at t=600, pod scale-down at t=900, pods gone at t=905, node
/// drains at t=1505, nodes removed at t=1625.
#[test]
fn burst_reaction_chain_is_exactly_timed() {
    let cluster = reference_cluster();
    let service = ServiceModelConfig::default();
    let result = run_simulation_opts(
        &cluster,
        &service,
        &reference_burst(),
        1800,
        7,
        &SimOptions {
            tick_secs: 1,
            check_invariants: true,
        },
    )
    .unwrap();
    let actions = result.actions();

    // First pod scale-up: the breach starts with the burst at t=0 and must
    // be sustained for 60 s. Saturated pods report 300% so the target is
    // ceil(3 * 300 / 50) = 18: 15 new pods.
    let (t, first) = actions[0];
    assert_eq!(t, 60);
    assert_eq!(
        first,
        ScalingAction::CreatePods {
            count: 15,
            breach_started_at: 0
        }
    );

    // First node request: 15 pending pods, 9 free slots on the initial
    // nodes; ceil(6 / 3) = 2 nodes, requested in the same tick because the
    // node tier runs after the pod tier and t=60 is on its cadence.
    let (t, second) = actions[1];
    assert_eq!(t, 60);
    assert_eq!(
        second,
        ScalingAction::CreateNodes {
            count: 2,
            unplaceable: 6
        }
    );

    // Pod scale-down: demand drops at t=600; 300 s sustained under-target.
    let scale_down = actions
        .iter()
        .find_map(|&(t, a)| match a {
            ScalingAction::TerminatePods {
                count,
                breach_started_at,
            } => Some((t, count, breach_started_at)),
            _ => None,
        })
        .expect("a scale-down fires after the burst");
    assert_eq!(scale_down.0, 900);
    assert_eq!(scale_down.2, 600);
    assert_eq!(scale_down.1, 60, "63 pods shrink back to 3");

    // Node reclaim: terminating pods vanish at t=905 (5 s drain), nodes sit
    // idle 600 s, drain at t=1505, and are removed 120 s later at t=1625.
    let drains: Vec<(u64, NodeId, u64)> = actions
        .iter()
        .filter_map(|&(t, a)| match a {
            ScalingAction::DrainNode { node, idle_since } => Some((t, node, idle_since)),
            _ => None,
        })
        .collect();
    assert!(!drains.is_empty());
    for &(t, _, idle_since) in &drains {
        assert_eq!(idle_since, 905);
        assert_eq!(t, 1505);
    }
    let removals: Vec<(u64, NodeId)> = result
        .events
        .iter()
        .filter_map(|r| match r.event {
            SimEvent::NodeRemoved { node } => Some((r.t, node)),
            _ => None,
        })
        .collect();
    assert_eq!(removals.len(), drains.len());
    for &(t, _) in &removals {
        assert_eq!(t, 1625);
    }

    // After the dust settles the cluster is back to 3 pods on the node
    // floor. The spare initial node hosted burst pods, so it is reclaimed
    // along with the autoscaled ones; min_nodes = 3 stops the shrink there.
    let last = result.trace.rows.last().unwrap();
    assert_eq!(last.total_pods, 3);
    assert_eq!(last.total_nodes, cluster.min_nodes);
    assert_eq!(last.response_time, service.base_latency_ms);
}

/// Every pod the burst creates is eventually placed, becomes ready, and is
/// torn down again; nothing leaks across three cycles.
#[test]
fn three_cycles_conserve_all_objects() {
    let cluster = reference_cluster();
    let service = ServiceModelConfig::default();
    let result = run_simulation_opts(
        &cluster,
        &service,
        &reference_burst(),
        5400,
        7,
        &SimOptions {
            tick_secs: 1,
            check_invariants: true,
        },
    )
    .unwrap();

    let mut created = 0i64;
    let mut removed = 0i64;
    let mut node_created = 0i64;
    let mut node_removed = 0i64;
    for record in &result.events {
        match record.event {
            SimEvent::PodCreated { .. } => created += 1,
            SimEvent::PodRemoved { .. } => removed += 1,
            SimEvent::NodeCreated { .. } => node_created += 1,
            SimEvent::NodeRemoved { .. } => node_removed += 1,
            _ => {}
        }
    }
    assert_eq!(
        created - removed,
        result.final_state.total_pods() as i64,
        "pods created minus removed equals pods alive at the end"
    );
    assert_eq!(node_created - node_removed, result.final_state.total_nodes() as i64);
    // Three cycles scale 3 -> 63 -> 3 each: 60 pods created and destroyed
    // per cycle, plus the 3 initial pods.
    assert_eq!(created, 3 + 3 * 60);
    assert_eq!(result.final_state.total_pods(), 3);
    assert_eq!(result.final_state.total_nodes(), cluster.min_nodes);
}

/// Node capacity is never exceeded and the node floor/ceiling hold across
/// a run that hits the configured maximum.
#[test]
fn node_ceiling_caps_growth() {
    let mut cluster = reference_cluster();
    cluster.max_nodes = 10; // 30 pod slots < the 63-pod demand
    let service = ServiceModelConfig::default();
    let result = run_simulation_opts(
        &cluster,
        &service,
        &reference_burst(),
        1800,
        7,
        &SimOptions {
            tick_secs: 1,
            check_invariants: true,
        },
    )
    .unwrap();
    let peak_nodes = result.trace.rows.iter().map(|r| r.total_nodes).max().unwrap();
    assert_eq!(peak_nodes, 10, "growth stops at the ceiling");
    let peak_ready_pods = result.trace.rows.iter().map(|r| r.ready_pods).max().unwrap();
    assert!(peak_ready_pods <= 30, "pods cannot exceed node capacity");
    // Demand beyond capacity shows up as failed requests instead.
    assert!(result.trace.rows.iter().any(|r| r.errors > 0));
}

/// Byte-level reproducibility of both artifacts on a jittered schedule.
#[test]
fn identical_seeds_reproduce_artifacts_byte_for_byte() {
    let cluster = reference_cluster();
    let service = ServiceModelConfig::default();
    let schedule = reference_burst().with_jitter(yoyosim::workload::Jitter::RandomUniform(0.8, 1.2));
    let a = run_simulation(&cluster, &service, &schedule, 3600, 99).unwrap();
    let b = run_simulation(&cluster, &service, &schedule, 3600, 99).unwrap();
    assert_eq!(a.trace.to_csv().unwrap(), b.trace.to_csv().unwrap());
    assert_eq!(a.trace.to_jsonl().unwrap(), b.trace.to_jsonl().unwrap());
    assert_eq!(a.events_jsonl().unwrap(), b.events_jsonl().unwrap());
}

/// The pod tier's view: scaling is driven by ready-pod utilization spread
/// over all live pods, so a warming fleet does not trigger a second
/// scale-up wave prematurely (the desired count already includes them).
#[test]
fn warming_pods_damp_repeat_scale_ups() {
    let cluster = reference_cluster();
    let service = ServiceModelConfig::default();
    let result = run_simulation(&cluster, &service, &reference_burst(), 600, 7).unwrap();
    let creates: Vec<(u64, u32)> = result
        .actions()
        .iter()
        .filter_map(|&(t, a)| match a {
            ScalingAction::CreatePods { count, .. } => Some((t, count)),
            _ => None,
        })
        .collect();
    // Two waves: 3 -> 18 at t=60 (everything saturated), then 18 -> 63 once
    // the 18 are ready and still over target. No third wave: 63 pods hold
    // 630 rps at exactly the 50% target.
    assert_eq!(creates.len(), 2, "got {creates:?}");
    assert_eq!(creates[0], (60, 15));
    assert_eq!(creates[1].1, 45);
    let peak = result.trace.rows.iter().map(|r| r.total_pods).max().unwrap();
    assert_eq!(peak, 63);
}

/// Admin nodes that never hosted anything are not reclaimed, so an
/// over-provisioned initial cluster keeps its spare machines.
#[test]
fn spare_admin_nodes_survive() {
    let mut cluster = reference_cluster();
    cluster.initial_nodes = 8; // far more than the 3 initial pods need
    cluster.min_nodes = 3;
    let service = ServiceModelConfig::default();
    let schedule = WorkloadSchedule::steady(30.0);
    let result = run_simulation_opts(
        &cluster,
        &service,
        &schedule,
        2000,
        7,
        &SimOptions {
            tick_secs: 1,
            check_invariants: true,
        },
    )
    .unwrap();
    assert!(result.actions().is_empty());
    assert_eq!(result.trace.rows.last().unwrap().total_nodes, 8);
}

/// Autoscaled nodes that become ready after the need has passed idle out
/// and are reclaimed even though they never hosted a pod.
#[test]
fn unused_autoscaled_nodes_are_reclaimed() {
    let cluster = reference_cluster();
    let service = ServiceModelConfig::default();
    // One short burst: nodes are requested at t=70 but the burst is over
    // before they matter; pods shrink back while the new nodes are still
    // warming.
    let schedule = WorkloadSchedule::yoyo(30.0, 20.0, 90, 1500, 1);
    let result = run_simulation_opts(
        &cluster,
        &service,
        &schedule,
        1800,
        7,
        &SimOptions {
            tick_secs: 1,
            check_invariants: true,
        },
    )
    .unwrap();
    let created: Vec<NodeId> = result
        .events
        .iter()
        .filter_map(|r| match r.event {
            SimEvent::NodeCreated { node } if r.t > 0 => Some(node),
            _ => None,
        })
        .collect();
    assert!(!created.is_empty(), "the burst requests at least one node");
    let removed: Vec<NodeId> = result
        .events
        .iter()
        .filter_map(|r| match r.event {
            SimEvent::NodeRemoved { node } => Some(node),
            _ => None,
        })
        .collect();
    for node in &created {
        assert!(removed.contains(node), "node {node:?} leaked");
    }
}

/// Coarser ticks preserve the macro dynamics when every window divides.
#[test]
fn coarse_ticks_match_macro_dynamics() {
    let mut cluster = reference_cluster();
    cluster.w_p_down = yoyosim::config::DurationSecs(5);
    let service = ServiceModelConfig::default();
    let fine = run_simulation(&cluster, &service, &reference_burst(), 1800, 7).unwrap();
    let coarse = run_simulation_opts(
        &cluster,
        &service,
        &reference_burst(),
        1800,
        7,
        &SimOptions {
            tick_secs: 5,
            check_invariants: false,
        },
    )
    .unwrap();
    let peak = |t: &yoyosim::Trace| t.rows.iter().map(|r| r.total_pods).max().unwrap();
    assert_eq!(peak(&fine.trace), peak(&coarse.trace));
    assert_eq!(
        fine.trace.rows.last().unwrap().total_nodes,
        coarse.trace.rows.last().unwrap().total_nodes
    );
}
