//! The discrete-time simulation engine.
//!
//! Each tick runs a fixed pipeline so runs are bit-reproducible:
//!
//! 1. advance node phases (warm-ups complete, drains finish and remove)
//! 2. advance pod phases (warm-ups complete, terminations finish)
//! 3. place pending pods, oldest first, onto the lowest-id Ready node
//!    with a free slot; then refresh each node's idle clock
//! 4. evaluate the offered rate for this tick
//! 5. serve: per-pod utilization, response time, failed requests
//! 6. pod-tier evaluation and application of its actions
//! 7. node-tier evaluation and application of its actions
//! 8. append the telemetry row (as served this tick)
//!
//! Pods created in step 6 therefore first serve no earlier than the next
//! tick, and a pod created at `t` can never be Ready before `t + w_p_up`.

use serde::{Deserialize, Serialize};

use crate::autoscaler::{ca_step, hpa_step, target_from_aggregate, ScalingAction};
use crate::cluster::{ClusterState, NodeId, NodeOrigin, NodePhase, NodeState, PodId, PodPhase, PodState};
use crate::config::{ClusterConfig, ServiceModelConfig};
use crate::error::{Error, Result};
use crate::service::{pod_utilization, response_time, unserved_rate};
use crate::trace::{Trace, TraceRow};
use crate::workload::{rate_at, WorkloadSchedule};

/// Everything that happens in a run, timestamped. Scaling decisions carry
/// their timing provenance; lifecycle events let tests and billing
/// reconstruct exact object lifetimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SimEvent {
    /// A scaling decision from one of the two tiers.
    Action(ScalingAction),
    PodCreated { pod: PodId },
    PodPlaced { pod: PodId, node: NodeId },
    PodReady { pod: PodId },
    PodTerminating { pod: PodId },
    PodRemoved { pod: PodId },
    NodeCreated { node: NodeId },
    NodeReady { node: NodeId },
    /// The node's continuous-idle clock started.
    NodeIdle { node: NodeId },
    /// The node stopped being idle (a pod was placed on it).
    NodeBusy { node: NodeId },
    NodeRemoved { node: NodeId },
}

/// A timestamped [`SimEvent`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: u64,
    pub event: SimEvent,
}

/// Observed lifetime of one node, for billing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeLifetime {
    pub node: NodeId,
    pub created_at: u64,
    /// `None` when the node was still running when the run ended.
    pub removed_at: Option<u64>,
}

/// Engine knobs beyond the scenario itself.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    /// Seconds per tick. Timer windows and warm-up durations must be
    /// multiples of this.
    pub tick_secs: u64,
    /// Run structural invariant checks every tick (slow; for tests).
    pub check_invariants: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            tick_secs: 1,
            check_invariants: false,
        }
    }
}

/// A completed run: telemetry, the full event log, and the final state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimResult {
    pub trace: Trace,
    pub events: Vec<EventRecord>,
    pub final_state: ClusterState,
}

impl SimResult {
    /// All scaling decisions, in order.
    pub fn actions(&self) -> Vec<(u64, ScalingAction)> {
        self.events
            .iter()
            .filter_map(|r| match r.event {
                SimEvent::Action(a) => Some((r.t, a)),
                _ => None,
            })
            .collect()
    }

    /// Node lifetimes observed in the event log, in creation order.
    pub fn node_lifetimes(&self) -> Vec<NodeLifetime> {
        let mut lifetimes: Vec<NodeLifetime> = Vec::new();
        for record in &self.events {
            match record.event {
                SimEvent::NodeCreated { node } => lifetimes.push(NodeLifetime {
                    node,
                    created_at: record.t,
                    removed_at: None,
                }),
                SimEvent::NodeRemoved { node } => {
                    if let Some(l) = lifetimes
                        .iter_mut()
                        .rev()
                        .find(|l| l.node == node && l.removed_at.is_none())
                    {
                        l.removed_at = Some(record.t);
                    }
                }
                _ => {}
            }
        }
        lifetimes
    }

    /// The event log as line-delimited JSON (used for byte-level
    /// reproducibility checks).
    pub fn events_jsonl(&self) -> Result<String> {
        let mut out = Vec::new();
        for record in &self.events {
            serde_json::to_writer(&mut out, record)
                .map_err(|e| Error::Parse(format!("event JSONL encode: {e}")))?;
            out.push(b'\n');
        }
        String::from_utf8(out).map_err(|e| Error::Parse(format!("event JSONL utf8: {e}")))
    }
}

/// Runs a simulation with default options (1-second ticks).
pub fn run_simulation(
    cluster: &ClusterConfig,
    service: &ServiceModelConfig,
    schedule: &WorkloadSchedule,
    duration_secs: u64,
    seed: u64,
) -> Result<SimResult> {
    run_simulation_opts(
        cluster,
        service,
        schedule,
        duration_secs,
        seed,
        &SimOptions::default(),
    )
}

/// Runs a simulation with explicit engine options.
pub fn run_simulation_opts(
    cluster: &ClusterConfig,
    service: &ServiceModelConfig,
    schedule: &WorkloadSchedule,
    duration_secs: u64,
    seed: u64,
    options: &SimOptions,
) -> Result<SimResult> {
    cluster.validate()?;
    service.validate()?;
    schedule.validate()?;
    let tick = options.tick_secs;
    if tick == 0 {
        return Err(Error::InvalidConfig("tick must be at least 1 second".into()));
    }
    if duration_secs == 0 || !duration_secs.is_multiple_of(tick) {
        return Err(Error::InvalidConfig(format!(
            "duration ({duration_secs}s) must be a positive multiple of the tick ({tick}s)"
        )));
    }
    if tick > 1 {
        for (name, d) in [
            ("i_p_up", cluster.i_p_up),
            ("i_p_down", cluster.i_p_down),
            ("i_n_up", cluster.i_n_up),
            ("i_n_down", cluster.i_n_down),
            ("w_p_up", cluster.w_p_up),
            ("w_p_down", cluster.w_p_down),
            ("w_n_up", cluster.w_n_up),
            ("w_n_down", cluster.w_n_down),
        ] {
            if d.secs() % tick != 0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} ({d}) is not a multiple of the tick ({tick}s); timer semantics would drift"
                )));
            }
        }
    }

    let mut state = ClusterState::initialize(cluster);
    let mut sim = Engine {
        cluster,
        service,
        schedule,
        seed,
        tick,
        events: Vec::new(),
        trace: Trace::default(),
    };
    sim.emit_initial(&state);

    let mut t = 0;
    while t < duration_secs {
        state.now = t;
        sim.step(&mut state);
        if options.check_invariants {
            state.assert_invariants(cluster);
        }
        t += tick;
    }

    Ok(SimResult {
        trace: sim.trace,
        events: sim.events,
        final_state: state,
    })
}

struct Engine<'a> {
    cluster: &'a ClusterConfig,
    service: &'a ServiceModelConfig,
    schedule: &'a WorkloadSchedule,
    seed: u64,
    tick: u64,
    events: Vec<EventRecord>,
    trace: Trace,
}

impl<'a> Engine<'a> {
    fn emit(&mut self, t: u64, event: SimEvent) {
        self.events.push(EventRecord { t, event });
    }

    /// Records the t=0 baseline objects so lifetimes are uniform.
    fn emit_initial(&mut self, state: &ClusterState) {
        for node in &state.nodes {
            self.emit(0, SimEvent::NodeCreated { node: node.id });
            self.emit(0, SimEvent::NodeReady { node: node.id });
        }
        for pod in &state.pods {
            self.emit(0, SimEvent::PodCreated { pod: pod.id });
            self.emit(
                0,
                SimEvent::PodPlaced {
                    pod: pod.id,
                    node: pod.node.expect("initial pods are placed"),
                },
            );
            self.emit(0, SimEvent::PodReady { pod: pod.id });
        }
    }

    fn step(&mut self, state: &mut ClusterState) {
        let now = state.now;

        // 1. Node phase advancement.
        let mut removed_nodes_this_tick = 0u32;
        let w_n_up = self.cluster.w_n_up.secs();
        let w_n_down = self.cluster.w_n_down.secs();
        let mut removed_node_ids = Vec::new();
        for node in &mut state.nodes {
            match node.phase {
                NodePhase::Warming if now - node.phase_entered_at >= w_n_up => {
                    node.phase = NodePhase::Ready;
                    node.phase_entered_at = now;
                    self.events.push(EventRecord {
                        t: now,
                        event: SimEvent::NodeReady { node: node.id },
                    });
                }
                NodePhase::Draining if now - node.phase_entered_at >= w_n_down => {
                    removed_node_ids.push(node.id);
                }
                _ => {}
            }
        }
        for id in removed_node_ids {
            state.nodes.retain(|n| n.id != id);
            removed_nodes_this_tick += 1;
            self.emit(now, SimEvent::NodeRemoved { node: id });
        }

        // 2. Pod phase advancement.
        let w_p_up = self.cluster.w_p_up.secs();
        let w_p_down = self.cluster.w_p_down.secs();
        let mut removed_pod_ids = Vec::new();
        for pod in &mut state.pods {
            match pod.phase {
                PodPhase::Warming if now - pod.phase_entered_at >= w_p_up => {
                    pod.phase = PodPhase::Ready;
                    pod.phase_entered_at = now;
                    self.events.push(EventRecord {
                        t: now,
                        event: SimEvent::PodReady { pod: pod.id },
                    });
                }
                PodPhase::Terminating if now - pod.phase_entered_at >= w_p_down => {
                    removed_pod_ids.push(pod.id);
                }
                _ => {}
            }
        }
        for id in removed_pod_ids {
            state.pods.retain(|p| p.id != id);
            self.emit(now, SimEvent::PodRemoved { pod: id });
        }

        // 3. Placement: oldest pending pod onto the lowest-id Ready node
        // with a free slot. Hosted counts are maintained incrementally.
        let mut hosted: Vec<u32> = state
            .nodes
            .iter()
            .map(|n| state.pods.iter().filter(|p| p.node == Some(n.id)).count() as u32)
            .collect();
        let mut assigned: Vec<u32> = state
            .nodes
            .iter()
            .map(|n| {
                state
                    .pods
                    .iter()
                    .filter(|p| p.node == Some(n.id) && p.phase != PodPhase::Terminating)
                    .count() as u32
            })
            .collect();
        let pending_exists = state.pods.iter().any(|p| p.phase == PodPhase::Pending);
        if pending_exists {
            let capacity = self.cluster.pods_per_node;
            // Indices of nodes able to take pods, id order == vec order.
            let placeable: Vec<usize> = state
                .nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| n.phase == NodePhase::Ready)
                .map(|(i, _)| i)
                .collect();
            let mut placements: Vec<(usize, usize)> = Vec::new(); // (pod idx, node idx)
            'pods: for (pi, pod) in state.pods.iter().enumerate() {
                if pod.phase != PodPhase::Pending {
                    continue;
                }
                for &ni in &placeable {
                    if assigned[ni] < capacity {
                        assigned[ni] += 1;
                        hosted[ni] += 1;
                        placements.push((pi, ni));
                        continue 'pods;
                    }
                }
                break; // every placeable node is full
            }
            for (pi, ni) in placements {
                let node_id = state.nodes[ni].id;
                let pod = &mut state.pods[pi];
                pod.phase = PodPhase::Warming;
                pod.phase_entered_at = now;
                pod.node = Some(node_id);
                state.nodes[ni].ever_hosted = true;
                self.events.push(EventRecord {
                    t: now,
                    event: SimEvent::PodPlaced {
                        pod: pod.id,
                        node: node_id,
                    },
                });
            }
        }

        // 3b. Idle clocks. Admin nodes only become reclaim candidates once
        // they have hosted pods; autoscaled nodes are candidates as soon as
        // they are Ready and empty, so unused scale-ups are reclaimed.
        for (i, node) in state.nodes.iter_mut().enumerate() {
            if node.phase != NodePhase::Ready {
                continue;
            }
            if hosted[i] > 0 {
                if node.idle_since.take().is_some() {
                    self.events.push(EventRecord {
                        t: now,
                        event: SimEvent::NodeBusy { node: node.id },
                    });
                }
            } else if node.idle_since.is_none()
                && (node.ever_hosted || node.origin == NodeOrigin::Autoscaled)
            {
                node.idle_since = Some(now);
                self.events.push(EventRecord {
                    t: now,
                    event: SimEvent::NodeIdle { node: node.id },
                });
            }
        }

        // 4. Offered rate.
        let rate = rate_at(self.schedule, now, self.seed);

        // 5. Serving.
        let capacity_rps = self.cluster.pod_capacity_rps;
        let burst = self.cluster.pod_burst_limit;
        let ready_pods = state.ready_pods();
        let live_pods = state.live_pods();
        let utilization = pod_utilization(rate, ready_pods, capacity_rps, burst);
        let mut response = response_time(utilization, burst, self.service);
        let unserved = unserved_rate(rate, ready_pods, capacity_rps, burst);
        let mut errors = (unserved * self.tick as f64).round() as u64;
        if self.service.model_rescheduling_errors && removed_nodes_this_tick > 0 {
            // Reclaiming nodes reschedules the singleton/system pods they
            // host, which shows up as a transient latency spike and a few
            // failed requests on the removal tick.
            response += removed_nodes_this_tick as f64 * self.service.reschedule_penalty_ms;
            errors += removed_nodes_this_tick as u64;
        }
        let avg_relative_cpu = if ready_pods == 0 {
            burst
        } else {
            utilization * ready_pods as f64 / live_pods.max(1) as f64
        };

        // Capture the telemetry counts before scaling mutates the state.
        let row = TraceRow {
            t: now,
            offered_rate: rate,
            ready_pods,
            total_pods: live_pods,
            ready_nodes: state.ready_nodes(),
            total_nodes: state.total_nodes(),
            avg_relative_cpu,
            response_time: response,
            errors,
        };

        // 6. Pod tier.
        let utilization_sum = utilization * ready_pods as f64;
        let desired = target_from_aggregate(
            utilization_sum,
            live_pods.max(1),
            self.cluster.u_target,
            self.cluster.hpa_tolerance,
        );
        let pod_actions = hpa_step(state, self.cluster, desired);
        for action in pod_actions {
            self.emit(now, SimEvent::Action(action));
            self.apply_pod_action(state, action);
        }

        // 7. Node tier.
        let node_actions = ca_step(state, self.cluster);
        for action in node_actions {
            self.emit(now, SimEvent::Action(action));
            self.apply_node_action(state, action);
        }

        // 8. Telemetry.
        self.trace.rows.push(row);
    }

    fn apply_pod_action(&mut self, state: &mut ClusterState, action: ScalingAction) {
        let now = state.now;
        match action {
            ScalingAction::CreatePods { count, .. } => {
                for _ in 0..count {
                    let id = state.alloc_pod_id();
                    state.pods.push(PodState {
                        id,
                        phase: PodPhase::Pending,
                        phase_entered_at: now,
                        created_at: now,
                        node: None,
                    });
                    self.emit(now, SimEvent::PodCreated { pod: id });
                }
            }
            ScalingAction::TerminatePods { count, .. } => {
                // Most recently created first; ids are allocation-ordered.
                let mut victims: Vec<PodId> = state
                    .pods
                    .iter()
                    .filter(|p| p.phase != PodPhase::Terminating)
                    .map(|p| p.id)
                    .collect();
                victims.sort_unstable_by(|a, b| b.cmp(a));
                victims.truncate(count as usize);
                for id in victims {
                    let pod = state
                        .pods
                        .iter_mut()
                        .find(|p| p.id == id)
                        .expect("victim pod exists");
                    if pod.phase == PodPhase::Pending {
                        // Never started; it vanishes without a drain.
                        let pid = pod.id;
                        state.pods.retain(|p| p.id != pid);
                        self.emit(now, SimEvent::PodRemoved { pod: pid });
                    } else {
                        pod.phase = PodPhase::Terminating;
                        pod.phase_entered_at = now;
                        self.emit(now, SimEvent::PodTerminating { pod: id });
                    }
                }
            }
            _ => unreachable!("pod tier emits only pod actions"),
        }
    }

    fn apply_node_action(&mut self, state: &mut ClusterState, action: ScalingAction) {
        let now = state.now;
        match action {
            ScalingAction::CreateNodes { count, .. } => {
                for _ in 0..count {
                    let id = state.alloc_node_id();
                    state.nodes.push(NodeState {
                        id,
                        phase: NodePhase::Warming,
                        phase_entered_at: now,
                        created_at: now,
                        origin: NodeOrigin::Autoscaled,
                        ever_hosted: false,
                        idle_since: None,
                    });
                    self.emit(now, SimEvent::NodeCreated { node: id });
                }
            }
            ScalingAction::DrainNode { node, .. } => {
                let n = state
                    .nodes
                    .iter_mut()
                    .find(|n| n.id == node)
                    .expect("drain target exists");
                debug_assert_eq!(
                    state.pods.iter().filter(|p| p.node == Some(node)).count(),
                    0,
                    "drain target must be empty"
                );
                n.phase = NodePhase::Draining;
                n.phase_entered_at = now;
            }
            _ => unreachable!("node tier emits only node actions"),
        }
    }
}
