//! Cluster state: pods, nodes, lifecycle phases, and scale-breach timers.

use serde::{Deserialize, Serialize};

use crate::config::ClusterConfig;

/// Identifier of a pod, unique for the lifetime of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PodId(pub u64);

/// Identifier of a node, unique for the lifetime of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u64);

/// Pod lifecycle. `Pending` pods await placement and have no node;
/// `Warming` pods are placed but not yet serving; `Ready` pods serve
/// traffic; `Terminating` pods are draining out and serve nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PodPhase {
    Pending,
    Warming,
    Ready,
    Terminating,
}

/// Node lifecycle. `Warming` nodes are booting; `Ready` nodes host pods;
/// `Draining` nodes accept no pods and are removed after the drain window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodePhase {
    Warming,
    Ready,
    Draining,
}

/// Who provisioned a node. Admin nodes are part of the fixed baseline and
/// only become reclaim candidates after they have hosted (and lost) pods;
/// autoscaled nodes start their idle clock as soon as they are Ready and
/// empty, so an unused scale-up is always reclaimed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeOrigin {
    Admin,
    Autoscaled,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PodState {
    pub id: PodId,
    pub phase: PodPhase,
    /// Tick at which the pod entered its current phase.
    pub phase_entered_at: u64,
    /// Tick at which the pod was created.
    pub created_at: u64,
    /// Hosting node; `None` exactly while Pending.
    pub node: Option<NodeId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    pub phase: NodePhase,
    /// Tick at which the node entered its current phase.
    pub phase_entered_at: u64,
    /// Tick at which the node was created.
    pub created_at: u64,
    pub origin: NodeOrigin,
    /// Whether the node has ever hosted a pod.
    pub ever_hosted: bool,
    /// Start of the current continuous idle stretch, if idle.
    pub idle_since: Option<u64>,
}

/// Mutable simulation state advanced tick by tick.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterState {
    pub now: u64,
    pub pods: Vec<PodState>,
    pub nodes: Vec<NodeState>,
    /// Start of the current continuous `desired > live` stretch.
    pub hpa_breach_up_since: Option<u64>,
    /// Start of the current continuous `desired < live` stretch.
    pub hpa_breach_down_since: Option<u64>,
    next_pod_id: u64,
    next_node_id: u64,
}

impl ClusterState {
    /// Builds the t=0 state: `initial_nodes` Ready admin nodes and
    /// `initial_pods` Ready pods spread round-robin across them.
    pub fn initialize(config: &ClusterConfig) -> Self {
        let mut state = ClusterState {
            now: 0,
            pods: Vec::new(),
            nodes: Vec::new(),
            hpa_breach_up_since: None,
            hpa_breach_down_since: None,
            next_pod_id: 0,
            next_node_id: 0,
        };
        for _ in 0..config.initial_nodes {
            let id = state.alloc_node_id();
            state.nodes.push(NodeState {
                id,
                phase: NodePhase::Ready,
                phase_entered_at: 0,
                created_at: 0,
                origin: NodeOrigin::Admin,
                ever_hosted: false,
                idle_since: None,
            });
        }
        for i in 0..config.initial_pods {
            let node_index = (i % config.initial_nodes) as usize;
            let node_id = state.nodes[node_index].id;
            state.nodes[node_index].ever_hosted = true;
            let id = state.alloc_pod_id();
            state.pods.push(PodState {
                id,
                phase: PodPhase::Ready,
                phase_entered_at: 0,
                created_at: 0,
                node: Some(node_id),
            });
        }
        state
    }

    pub fn alloc_pod_id(&mut self) -> PodId {
        let id = PodId(self.next_pod_id);
        self.next_pod_id += 1;
        id
    }

    pub fn alloc_node_id(&mut self) -> NodeId {
        let id = NodeId(self.next_node_id);
        self.next_node_id += 1;
        id
    }

    pub fn ready_pods(&self) -> u32 {
        self.pods.iter().filter(|p| p.phase == PodPhase::Ready).count() as u32
    }

    /// Pods in any phase except Terminating: the "live" replica count the
    /// pod tier compares against its desired count.
    pub fn live_pods(&self) -> u32 {
        self.pods
            .iter()
            .filter(|p| p.phase != PodPhase::Terminating)
            .count() as u32
    }

    /// All pod objects currently tracked, any phase.
    pub fn total_pods(&self) -> u32 {
        self.pods.len() as u32
    }

    pub fn ready_nodes(&self) -> u32 {
        self.nodes
            .iter()
            .filter(|n| n.phase == NodePhase::Ready)
            .count() as u32
    }

    /// All node objects currently tracked (warming and draining included);
    /// this is the count that billing sees.
    pub fn total_nodes(&self) -> u32 {
        self.nodes.len() as u32
    }

    /// Non-Terminating pods assigned to `node` — the capacity measure.
    pub fn pods_assigned(&self, node: NodeId) -> u32 {
        self.pods
            .iter()
            .filter(|p| p.node == Some(node) && p.phase != PodPhase::Terminating)
            .count() as u32
    }

    /// Pods of any phase assigned to `node` — the occupancy measure used
    /// for idleness (a node with only Terminating pods is still occupied).
    pub fn pods_hosted(&self, node: NodeId) -> u32 {
        self.pods.iter().filter(|p| p.node == Some(node)).count() as u32
    }

    /// Free slots on Ready and Warming (never Draining) nodes.
    pub fn free_capacity(&self, pods_per_node: u32) -> u32 {
        self.nodes
            .iter()
            .filter(|n| matches!(n.phase, NodePhase::Ready | NodePhase::Warming))
            .map(|n| pods_per_node.saturating_sub(self.pods_assigned(n.id)))
            .sum()
    }

    pub fn pending_pods(&self) -> u32 {
        self.pods
            .iter()
            .filter(|p| p.phase == PodPhase::Pending)
            .count() as u32
    }

    /// Panics if a structural invariant is violated; used by tests and
    /// debug builds of the engine loop.
    pub fn assert_invariants(&self, config: &ClusterConfig) {
        for p in &self.pods {
            match p.phase {
                PodPhase::Pending => assert!(
                    p.node.is_none(),
                    "pending pod {:?} has a node assignment",
                    p.id
                ),
                _ => assert!(
                    p.node.is_some(),
                    "placed pod {:?} in phase {:?} lacks a node",
                    p.id,
                    p.phase
                ),
            }
        }
        for n in &self.nodes {
            let assigned = self.pods_assigned(n.id);
            assert!(
                assigned <= config.pods_per_node,
                "node {:?} holds {} non-terminating pods, capacity {}",
                n.id,
                assigned,
                config.pods_per_node
            );
            if n.phase == NodePhase::Draining {
                assert_eq!(
                    self.pods_hosted(n.id),
                    0,
                    "draining node {:?} still hosts pods",
                    n.id
                );
            }
        }
        let ready = self.ready_nodes();
        assert!(
            ready >= config.min_nodes && self.total_nodes() <= config.max_nodes,
            "node counts out of bounds: ready {}, total {}, allowed [{}, {}]",
            ready,
            self.total_nodes(),
            config.min_nodes,
            config.max_nodes
        );
    }
}
