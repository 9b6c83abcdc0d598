//! Node-local programs: the direct template and the four-state protocol.
//!
//! A [`ProtocolNode`] sees the network only through its neighbour table.
//! Tables are stored as deltas over a shared [`Snapshot`] of the stable
//! configuration that preceded the change: an entry is either something the
//! node learned from a broadcast, something it was told it does not know
//! yet (a brand new neighbour), or else the snapshot value. At stability
//! every table agrees with reality, so the snapshot is exact for untouched
//! entries and only nodes that hear a message need materialising.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::graph::{locus, Graph, NodeId, Priority, PriorityMap, TopologyChange};
use crate::oracle::MisAssignment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeState {
    #[serde(rename = "M")]
    M,
    #[serde(rename = "NOT_M")]
    NotM,
    #[serde(rename = "C")]
    C,
    #[serde(rename = "R")]
    R,
}

impl NodeState {
    pub fn from_output(is_in: bool) -> Self {
        if is_in {
            NodeState::M
        } else {
            NodeState::NotM
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, NodeState::M | NodeState::NotM)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    /// Re-evaluate the invariant whenever a lower neighbour's output changes.
    Template,
    /// Algorithm with the C (may change) and R (ready) waiting states.
    FourState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BroadcastMsg {
    pub sender: NodeId,
    pub priority: Priority,
    pub state: NodeState,
}

/// The stable configuration a change starts from. `graph` is the network
/// the protocol runs on: the post-change graph, except for a graceful node
/// deletion where the departing node is still present.
#[derive(Clone, Copy, Debug)]
pub struct Snapshot<'a> {
    pub graph: &'a Graph,
    pub priorities: &'a PriorityMap,
    pub states: &'a MisAssignment,
}

/// What activated a node this round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trigger {
    /// The node noticed the topology change itself.
    Local,
    /// Broadcasts from neighbours, possibly none (a waiting C or R node).
    Neighbors,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Absorbed {
    /// A lower neighbour changed to C.
    pub lower_to_c: bool,
    /// A lower neighbour entered or left M.
    pub lower_output_changed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtocolNode {
    pub id: NodeId,
    pub priority: Priority,
    pub state: NodeState,
    pub kind: ProtocolKind,
    /// Gracefully deleted: still relays and still counts as a lower
    /// neighbour, but its own output can only go to NOT_M.
    pub departing: bool,
    pub entered_c_round: Option<u32>,
    pub c_entries: u32,
    pub r_exits: u32,
    learned: BTreeMap<NodeId, (Priority, NodeState)>,
    unknown: BTreeSet<NodeId>,
}

impl ProtocolNode {
    pub fn new(id: NodeId, priority: Priority, state: NodeState, kind: ProtocolKind) -> Self {
        ProtocolNode {
            id,
            priority,
            state,
            kind,
            departing: false,
            entered_c_round: None,
            c_entries: 0,
            r_exits: 0,
            learned: BTreeMap::new(),
            unknown: BTreeSet::new(),
        }
    }

    /// Marks `w` as a neighbour this node has not heard from yet.
    pub fn forget(&mut self, w: NodeId) {
        self.learned.remove(&w);
        self.unknown.insert(w);
    }

    /// True once every neighbour it was missing has announced itself.
    pub fn knows_all(&self) -> bool {
        self.unknown.is_empty()
    }

    /// This node's view of neighbour `w`.
    pub fn view(&self, snap: &Snapshot, w: NodeId) -> Option<(Priority, NodeState)> {
        if let Some(&e) = self.learned.get(&w) {
            return Some(e);
        }
        if self.unknown.contains(&w) {
            return None;
        }
        let s = snap.states.get(w)?;
        Some((snap.priorities.get(w)?, NodeState::from_output(s)))
    }

    /// The full neighbour table.
    pub fn neighbor_table(&self, snap: &Snapshot) -> BTreeMap<NodeId, (Priority, NodeState)> {
        snap.graph.neighbors(self.id).filter_map(|w| self.view(snap, w).map(|e| (w, e))).collect()
    }

    fn lower_states<'s>(&'s self, snap: &'s Snapshot) -> impl Iterator<Item = NodeState> + 's {
        snap.graph
            .neighbors(self.id)
            .filter_map(move |w| self.view(snap, w))
            .filter(move |(p, _)| *p < self.priority)
            .map(|(_, s)| s)
    }

    fn any_lower_in(&self, snap: &Snapshot) -> bool {
        self.lower_states(snap).any(|s| s == NodeState::M)
    }

    fn any_higher_c(&self, snap: &Snapshot) -> bool {
        snap.graph
            .neighbors(self.id)
            .filter_map(|w| self.view(snap, w))
            .any(|(p, s)| p > self.priority && s == NodeState::C)
    }

    /// The output the MIS invariant asks for, given the current table.
    pub fn desired_output(&self, snap: &Snapshot) -> NodeState {
        if self.departing || self.any_lower_in(snap) {
            NodeState::NotM
        } else {
            NodeState::M
        }
    }

    /// True when the node's stable output disagrees with its table.
    pub fn violated(&self, snap: &Snapshot) -> bool {
        self.state.is_stable() && self.state != self.desired_output(snap)
    }

    /// Records incoming broadcasts.
    pub fn absorb(&mut self, snap: &Snapshot, events: &[BroadcastMsg]) -> Absorbed {
        let mut out = Absorbed::default();
        for msg in events {
            if msg.sender == self.id {
                continue;
            }
            let before = self.view(snap, msg.sender).map(|(_, s)| s);
            self.learned.insert(msg.sender, (msg.priority, msg.state));
            self.unknown.remove(&msg.sender);
            if msg.priority < self.priority {
                if msg.state == NodeState::C && before != Some(NodeState::C) {
                    out.lower_to_c = true;
                }
                if (before == Some(NodeState::M)) != (msg.state == NodeState::M) {
                    out.lower_output_changed = true;
                }
            }
        }
        out
    }

    /// A broadcast of the current state without a state change.
    pub fn announce(&self) -> BroadcastMsg {
        BroadcastMsg { sender: self.id, priority: self.priority, state: self.state }
    }

    fn set_state(&mut self, state: NodeState, round: u32) -> BroadcastMsg {
        if self.state == NodeState::R {
            self.r_exits += 1;
        }
        if state == NodeState::C {
            self.c_entries += 1;
            self.entered_c_round = Some(round);
        } else {
            self.entered_c_round = None;
        }
        self.state = state;
        self.announce()
    }

    /// Dispatches to the node's protocol.
    pub fn react(
        &mut self,
        snap: &Snapshot,
        round: u32,
        events: &[BroadcastMsg],
        trigger: Trigger,
    ) -> Option<BroadcastMsg> {
        match self.kind {
            ProtocolKind::Template => template_react(self, snap, events, trigger),
            ProtocolKind::FourState => four_state_react(self, snap, round, events, trigger),
        }
    }
}

/// Direct distributed form of the greedy template: recompute the invariant
/// and broadcast when the output changes.
pub fn template_react(
    node: &mut ProtocolNode,
    snap: &Snapshot,
    events: &[BroadcastMsg],
    trigger: Trigger,
) -> Option<BroadcastMsg> {
    let absorbed = node.absorb(snap, events);
    if trigger == Trigger::Neighbors && !absorbed.lower_output_changed {
        return None;
    }
    let desired = node.desired_output(snap);
    (desired != node.state).then(|| node.set_state(desired, 0))
}

/// One round of the four-state protocol at `node`.
pub fn four_state_react(
    node: &mut ProtocolNode,
    snap: &Snapshot,
    round: u32,
    events: &[BroadcastMsg],
    trigger: Trigger,
) -> Option<BroadcastMsg> {
    let absorbed = node.absorb(snap, events);
    if trigger == Trigger::Local {
        return node.violated(snap).then(|| node.set_state(NodeState::C, round));
    }
    match node.state {
        NodeState::M => absorbed.lower_to_c.then(|| node.set_state(NodeState::C, round)),
        NodeState::NotM => {
            (absorbed.lower_to_c && !node.any_lower_in(snap)).then(|| node.set_state(NodeState::C, round))
        }
        NodeState::C => {
            let waited = node.entered_c_round.is_some_and(|t| round >= t + 2);
            (waited && !node.any_higher_c(snap)).then(|| node.set_state(NodeState::R, round))
        }
        NodeState::R => {
            if node.lower_states(snap).all(NodeState::is_stable) {
                let next = node.desired_output(snap);
                Some(node.set_state(next, round))
            } else {
                None
            }
        }
    }
}

/// How a change is set in motion: who announces, who replies, who starts
/// and when, and which neighbour pairs begin unaware of each other.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bootstrap {
    /// Broadcast (priority, state) in round 1 without changing state.
    pub announcers: Vec<NodeId>,
    /// Answer the announcement with (priority, state) in round 2.
    pub repliers: Vec<NodeId>,
    /// Evaluate their invariant locally in `start_round`.
    pub starters: Vec<NodeId>,
    pub start_round: u32,
    /// Starters broadcast even when their state does not change.
    pub announce_on_start: bool,
    pub joining: Option<NodeId>,
    pub departing: Option<NodeId>,
    /// (knower, known): `knower` has no entry for `known` yet.
    pub unknown_pairs: Vec<(NodeId, NodeId)>,
}

impl Bootstrap {
    /// Rounds spent on announcements before the protocol proper.
    pub fn preamble_rounds(&self) -> u32 {
        self.start_round - 1
    }
}

/// Bootstrap for change `c` on the pre-change graph `g_old`.
pub fn init_change(g_old: &Graph, p: &PriorityMap, c: &TopologyChange) -> Result<Bootstrap, GraphError> {
    g_old.validate(c)?;
    let l = locus(p, c)?;
    let mut b = Bootstrap { start_round: 1, ..Bootstrap::default() };
    match c {
        TopologyChange::EdgeInsert { u, v } => {
            b.announcers = vec![*u, *v];
            b.starters = vec![l.v_star, l.v_star_star];
            b.start_round = 2;
            b.unknown_pairs = vec![(*u, *v), (*v, *u)];
        }
        TopologyChange::EdgeDeleteGraceful { .. } | TopologyChange::EdgeDeleteAbrupt { .. } => {
            b.starters = vec![l.v_star, l.v_star_star];
        }
        TopologyChange::NodeInsert { v, nbrs } => {
            b.announcers = vec![*v];
            b.repliers = nbrs.clone();
            b.starters = vec![*v];
            b.start_round = 3;
            b.joining = Some(*v);
            for &w in nbrs {
                b.unknown_pairs.push((*v, w));
                b.unknown_pairs.push((w, *v));
            }
        }
        TopologyChange::NodeUnmute { v } => {
            b.starters = vec![*v];
            b.announce_on_start = true;
            b.joining = Some(*v);
            for w in g_old.all_neighbors(*v).filter(|&w| g_old.is_visible(w)) {
                b.unknown_pairs.push((w, *v));
            }
        }
        TopologyChange::NodeDeleteGraceful { v } => {
            b.starters = vec![*v];
            b.departing = Some(*v);
        }
        TopologyChange::NodeDeleteAbrupt { v } => {
            b.starters = g_old.neighbors(*v).collect();
        }
    }
    Ok(b)
}

/// True iff every node is in M or NOT_M, nothing is in flight and the
/// outputs satisfy the MIS invariant.
pub fn stability_check(
    g: &Graph,
    p: &PriorityMap,
    states: &BTreeMap<NodeId, NodeState>,
    undelivered: usize,
) -> bool {
    if undelivered > 0 || states.values().any(|s| !s.is_stable()) {
        return false;
    }
    let a: MisAssignment = states.iter().map(|(&v, &s)| (v, s == NodeState::M)).collect();
    crate::oracle::check_invariant(g, p, &a).unwrap_or(false)
}
