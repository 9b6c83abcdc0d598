//! Message-passing simulators.
//!
//! [`Simulator`] owns a graph in a stable configuration and applies one
//! topology change at a time, running a protocol until the network is
//! stable again. Synchronous mode delivers every broadcast of round `t` in
//! round `t+1`. Asynchronous mode keeps a FIFO channel per ordered pair of
//! neighbours and delivers from a uniformly chosen non-empty channel.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, GraphError};
use crate::graph::{locus, Graph, NodeId, PriorityMap, PrioritySource, TopologyChange};
use crate::oracle::{check_invariant, first_violation, greedy_mis, influence_on, InfluencedSet, MisAssignment};
use crate::protocol::{init_change, Bootstrap, BroadcastMsg, NodeState, ProtocolKind, ProtocolNode, Snapshot, Trigger};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeMetrics {
    /// Nodes present before and after whose output differs, plus a joining
    /// node that ends IN.
    pub adjustments: u64,
    /// Last round with a broadcast (sync) or longest causal chain (async).
    pub rounds: u32,
    /// All broadcasts, announcements included.
    pub broadcasts: u64,
    pub preamble_rounds: u32,
    pub preamble_broadcasts: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateChange {
    pub node: NodeId,
    pub from: NodeState,
    pub to: NodeState,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: u32,
    pub broadcasts: Vec<BroadcastMsg>,
    /// Broadcasts that announce a state without changing it.
    pub preambles: usize,
    pub state_changes: Vec<StateChange>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Sync,
    Async { seed: u64 },
}

/// Everything measured while handling one change.
#[derive(Clone, Debug, PartialEq)]
pub struct ChangeReport {
    pub change: TopologyChange,
    pub metrics: ChangeMetrics,
    pub influenced: InfluencedSet,
    /// Degree of v* in the graph the protocol ran on (pre-change for deletions).
    pub degree: usize,
    /// Nodes whose output differs after the change.
    pub adjusted: BTreeSet<NodeId>,
    /// Nodes that entered C at least once, with the number of entries.
    pub c_entries: BTreeMap<NodeId, u32>,
    /// Nodes that left R at least once, with the number of exits.
    pub r_exits: BTreeMap<NodeId, u32>,
    /// Synchronous mode only, when logging is enabled.
    pub logs: Vec<RoundLog>,
}

/// Result of a one-shot run.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub assignment: MisAssignment,
    pub report: ChangeReport,
}

/// Holds a graph in a stable configuration and applies changes to it.
#[derive(Clone, Debug)]
pub struct Simulator {
    graph: Graph,
    priorities: PriorityMap,
    assignment: MisAssignment,
    retired: BTreeSet<NodeId>,
    source: PrioritySource,
    kind: ProtocolKind,
    mode: Mode,
    record_logs: bool,
    full_check: bool,
    max_rounds: Option<u32>,
    max_events: Option<u64>,
}

impl Simulator {
    /// Empty network; new nodes draw priorities from `source`.
    pub fn new(kind: ProtocolKind, source: PrioritySource) -> Self {
        Simulator {
            graph: Graph::new(),
            priorities: PriorityMap::new(),
            assignment: MisAssignment::new(),
            retired: BTreeSet::new(),
            source,
            kind,
            mode: Mode::Sync,
            record_logs: false,
            full_check: false,
            max_rounds: None,
            max_events: None,
        }
    }

    /// Starts from `graph` in its greedy configuration under `priorities`.
    pub fn from_graph(graph: Graph, priorities: PriorityMap, kind: ProtocolKind) -> Result<Self, EngineError> {
        for v in graph.all_nodes() {
            priorities.try_get(v)?;
        }
        let assignment = greedy_mis(&graph, &priorities);
        let mut sim = Simulator::new(kind, PrioritySource::sequential(0));
        sim.graph = graph;
        sim.priorities = priorities;
        sim.assignment = assignment;
        Ok(sim)
    }

    /// Starts from `graph` with priorities drawn from `source` in id order;
    /// later insertions keep drawing from the same source.
    pub fn seeded(graph: Graph, kind: ProtocolKind, mut source: PrioritySource) -> Self {
        let mut priorities = PriorityMap::new();
        for v in graph.all_nodes() {
            priorities.set_draw(v, source.draw(v));
        }
        let assignment = greedy_mis(&graph, &priorities);
        let mut sim = Simulator::new(kind, source);
        sim.graph = graph;
        sim.priorities = priorities;
        sim.assignment = assignment;
        sim
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_logs(mut self, on: bool) -> Self {
        self.record_logs = on;
        self
    }

    /// Check the invariant on every node after each change instead of only
    /// the nodes whose neighbourhood or state moved.
    pub fn with_full_check(mut self, on: bool) -> Self {
        self.full_check = on;
        self
    }

    pub fn with_max_rounds(mut self, limit: u32) -> Self {
        self.max_rounds = Some(limit);
        self
    }

    pub fn with_max_events(mut self, limit: u64) -> Self {
        self.max_events = Some(limit);
        self
    }

    pub fn set_mode(&mut self, mode: Mode) {
        self.mode = mode;
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn priorities(&self) -> &PriorityMap {
        &self.priorities
    }

    pub fn assignment(&self) -> &MisAssignment {
        &self.assignment
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    fn claim_id(&mut self, v: NodeId) -> Result<(), EngineError> {
        if self.retired.contains(&v) {
            return Err(GraphError::ReusedId(v).into());
        }
        if !self.priorities.contains(v) {
            let draw = self.source.draw(v);
            self.priorities.set_draw(v, draw);
        }
        Ok(())
    }

    /// Adds `v` muted next to the visible nodes `nbrs`. Muted nodes take no
    /// part in the protocol until a [`TopologyChange::NodeUnmute`].
    pub fn add_muted(&mut self, v: NodeId, nbrs: &[NodeId]) -> Result<(), EngineError> {
        if self.retired.contains(&v) {
            return Err(GraphError::ReusedId(v).into());
        }
        self.graph.add_muted(v, nbrs)?;
        self.claim_id(v)
    }

    /// Applies `c`, runs the protocol to stability and checks the result.
    pub fn apply(&mut self, c: &TopologyChange) -> Result<ChangeReport, EngineError> {
        if self.mode != Mode::Sync && self.kind == ProtocolKind::FourState {
            return Err(EngineError::AsyncFourState);
        }
        self.graph.validate(c)?;
        if let TopologyChange::NodeInsert { v, .. } = c {
            self.claim_id(*v)?;
        }
        let v_star = locus(&self.priorities, c)?.v_star;
        let boot = init_change(&self.graph, &self.priorities, c)?;

        let mut check: BTreeSet<NodeId> = boot.starters.iter().chain(&boot.announcers).copied().collect();
        let influenced;
        let degree;
        match c {
            TopologyChange::NodeDeleteGraceful { v } => {
                influenced = influence_on(&self.graph, &self.priorities, &self.assignment, c)?;
                degree = self.graph.degree(*v);
                check.extend(self.graph.neighbors(*v));
            }
            TopologyChange::NodeDeleteAbrupt { v } => {
                influenced = influence_on(&self.graph, &self.priorities, &self.assignment, c)?;
                degree = self.graph.degree(*v);
                self.graph.apply(c)?;
                self.assignment.remove(*v);
            }
            _ => {
                self.graph.apply(c)?;
                influenced = influence_on(&self.graph, &self.priorities, &self.assignment, c)?;
                degree = self.graph.degree(v_star);
            }
        }

        let snap = Snapshot { graph: &self.graph, priorities: &self.priorities, states: &self.assignment };
        let n = self.graph.node_count() as u32;
        let run = match self.mode {
            Mode::Sync => {
                let limit = self.max_rounds.unwrap_or(3 * n + 10);
                run_rounds(snap, &boot, self.kind, limit, self.record_logs)?
            }
            Mode::Async { seed } => {
                let m = self.graph.edge_count() as u64;
                let limit = self.max_events.unwrap_or(1000 * (n as u64 + m + 10));
                run_events(snap, &boot, seed, limit)?
            }
        };

        let mut adjusted = BTreeSet::new();
        let mut c_entries = BTreeMap::new();
        let mut r_exits = BTreeMap::new();
        for (id, node) in &run.nodes {
            if !node.state.is_stable() {
                return Err(EngineError::Unstable(*id));
            }
            if node.c_entries > 0 {
                c_entries.insert(*id, node.c_entries);
            }
            if node.r_exits > 0 {
                r_exits.insert(*id, node.r_exits);
            }
            if node.departing {
                continue;
            }
            let after = node.state == NodeState::M;
            let before = self.assignment.get(*id);
            if before.map_or(after, |b| b != after) {
                adjusted.insert(*id);
            }
        }
        for (id, node) in &run.nodes {
            if !node.departing {
                self.assignment.set(*id, node.state == NodeState::M);
            }
        }
        if let TopologyChange::NodeDeleteGraceful { v } = c {
            self.graph.apply(c)?;
            self.assignment.remove(*v);
        }
        if let Some(v) = c.node() {
            if c.is_deletion() {
                self.retired.insert(v);
            }
        }

        if self.full_check {
            if let Some(node) = first_violation(&self.graph, &self.priorities, &self.assignment, self.graph.nodes())? {
                return Err(EngineError::InvariantViolation { node, change: c.kind().to_string(), logs: run.logs });
            }
        } else {
            for &v in &adjusted {
                check.insert(v);
                check.extend(self.graph.neighbors(v));
            }
            if let Some(node) = first_violation(&self.graph, &self.priorities, &self.assignment, check)? {
                return Err(EngineError::InvariantViolation { node, change: c.kind().to_string(), logs: run.logs });
            }
        }

        let metrics = ChangeMetrics {
            adjustments: adjusted.len() as u64,
            rounds: run.rounds,
            broadcasts: run.broadcasts,
            preamble_rounds: boot.preamble_rounds(),
            preamble_broadcasts: run.preambles,
        };
        Ok(ChangeReport {
            change: c.clone(),
            metrics,
            influenced,
            degree,
            adjusted,
            c_entries,
            r_exits,
            logs: run.logs,
        })
    }

    /// Full invariant check of the current configuration.
    pub fn is_stable(&self) -> bool {
        check_invariant(&self.graph, &self.priorities, &self.assignment).unwrap_or(false)
    }
}

/// Nodes a run touched, materialised on demand.
struct Network<'a> {
    snap: Snapshot<'a>,
    boot: &'a Bootstrap,
    kind: ProtocolKind,
    nodes: BTreeMap<NodeId, ProtocolNode>,
}

impl<'a> Network<'a> {
    fn new(snap: Snapshot<'a>, boot: &'a Bootstrap, kind: ProtocolKind) -> Self {
        Network { snap, boot, kind, nodes: BTreeMap::new() }
    }

    fn node(&mut self, id: NodeId) -> &mut ProtocolNode {
        let (snap, boot, kind) = (self.snap, self.boot, self.kind);
        self.nodes.entry(id).or_insert_with(|| {
            let state = NodeState::from_output(snap.states.is_in(id));
            let priority = snap.priorities.get(id).expect("priorities cover every node");
            let mut node = ProtocolNode::new(id, priority, state, kind);
            node.departing = boot.departing == Some(id);
            for &(knower, known) in &boot.unknown_pairs {
                if knower == id {
                    node.forget(known);
                }
            }
            node
        })
    }
}

struct Run {
    nodes: BTreeMap<NodeId, ProtocolNode>,
    rounds: u32,
    broadcasts: u64,
    preambles: u64,
    logs: Vec<RoundLog>,
}

fn run_rounds(
    snap: Snapshot,
    boot: &Bootstrap,
    kind: ProtocolKind,
    max_rounds: u32,
    record: bool,
) -> Result<Run, EngineError> {
    let mut net = Network::new(snap, boot, kind);
    let mut in_flight: Vec<BroadcastMsg> = Vec::new();
    let mut waiting: BTreeSet<NodeId> = BTreeSet::new();
    let mut logs = Vec::new();
    let (mut last, mut broadcasts, mut preambles) = (0u32, 0u64, 0u64);

    for round in 1..=max_rounds {
        let mut inbox: BTreeMap<NodeId, Vec<BroadcastMsg>> = BTreeMap::new();
        for m in &in_flight {
            for w in snap.graph.neighbors(m.sender) {
                inbox.entry(w).or_default().push(*m);
            }
        }
        let mut acting: BTreeSet<NodeId> = inbox.keys().copied().collect();
        acting.extend(&waiting);
        let announcing: &[NodeId] = match round {
            1 => &boot.announcers,
            2 => &boot.repliers,
            _ => &[],
        };
        acting.extend(announcing);
        let starting = round == boot.start_round;
        if starting {
            acting.extend(&boot.starters);
        }

        let mut sent = Vec::new();
        let mut changes = Vec::new();
        let mut round_preambles = 0usize;
        for id in acting {
            let events = inbox.remove(&id).unwrap_or_default();
            let node = net.node(id);
            let before = node.state;
            let out = if announcing.contains(&id) {
                node.absorb(&snap, &events);
                round_preambles += 1;
                Some(node.announce())
            } else {
                let trigger = if starting && boot.starters.contains(&id) { Trigger::Local } else { Trigger::Neighbors };
                match node.react(&snap, round, &events, trigger) {
                    None if trigger == Trigger::Local && boot.announce_on_start => {
                        round_preambles += 1;
                        Some(node.announce())
                    }
                    out => out,
                }
            };
            if node.state != before {
                changes.push(StateChange { node: id, from: before, to: node.state });
            }
            if node.state.is_stable() {
                waiting.remove(&id);
            } else {
                waiting.insert(id);
            }
            sent.extend(out);
        }

        if !sent.is_empty() {
            last = round;
        }
        broadcasts += sent.len() as u64;
        preambles += round_preambles as u64;
        if record {
            logs.push(RoundLog { round, broadcasts: sent.clone(), preambles: round_preambles, state_changes: changes });
        }
        in_flight = sent;
        if in_flight.is_empty() && waiting.is_empty() && round >= boot.start_round {
            return Ok(Run { nodes: net.nodes, rounds: last, broadcasts, preambles, logs });
        }
    }
    Err(EngineError::RoundLimit { limit: max_rounds })
}

struct Channels {
    queues: IndexMap<(NodeId, NodeId), VecDeque<(BroadcastMsg, u32)>>,
    broadcasts: u64,
    depth: u32,
}

impl Channels {
    fn send(&mut self, g: &Graph, m: BroadcastMsg, depth: u32) {
        for w in g.neighbors(m.sender) {
            self.queues.entry((m.sender, w)).or_default().push_back((m, depth));
        }
        self.broadcasts += 1;
        self.depth = self.depth.max(depth);
    }

    fn pop(&mut self, rng: &mut ChaCha8Rng) -> Option<(NodeId, BroadcastMsg, u32)> {
        if self.queues.is_empty() {
            return None;
        }
        let i = rng.random_range(0..self.queues.len());
        let (&(_, to), q) = self.queues.get_index_mut(i)?;
        let (m, d) = q.pop_front()?;
        if q.is_empty() {
            self.queues.swap_remove_index(i);
        }
        Some((to, m, d))
    }
}

fn run_events(snap: Snapshot, boot: &Bootstrap, seed: u64, max_events: u64) -> Result<Run, EngineError> {
    let mut net = Network::new(snap, boot, ProtocolKind::Template);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ch = Channels { queues: IndexMap::new(), broadcasts: 0, depth: 0 };
    let mut preambles = 0u64;

    for &a in &boot.announcers {
        let m = net.node(a).announce();
        ch.send(snap.graph, m, 1);
        preambles += 1;
    }
    let mut pending: BTreeSet<NodeId> = BTreeSet::new();
    if boot.start_round == 1 {
        for &s in &boot.starters {
            let node = net.node(s);
            match node.react(&snap, 0, &[], Trigger::Local) {
                Some(m) => ch.send(snap.graph, m, 1),
                None if boot.announce_on_start => {
                    let m = node.announce();
                    ch.send(snap.graph, m, 1);
                    preambles += 1;
                }
                None => {}
            }
        }
    } else {
        pending.extend(&boot.starters);
    }
    let mut replied: BTreeSet<NodeId> = BTreeSet::new();

    let mut events = 0u64;
    while let Some((to, m, depth)) = ch.pop(&mut rng) {
        events += 1;
        if events > max_events {
            return Err(EngineError::EventLimit { limit: max_events });
        }
        let node = net.node(to);
        if boot.joining == Some(m.sender) && boot.repliers.contains(&to) && replied.insert(to) {
            node.absorb(&snap, &[m]);
            let reply = node.announce();
            ch.send(snap.graph, reply, depth + 1);
            preambles += 1;
            continue;
        }
        if pending.contains(&to) {
            node.absorb(&snap, &[m]);
            if node.knows_all() {
                pending.remove(&to);
                if let Some(out) = node.react(&snap, 0, &[], Trigger::Local) {
                    ch.send(snap.graph, out, depth + 1);
                }
            }
            continue;
        }
        if let Some(out) = node.react(&snap, 0, &[m], Trigger::Neighbors) {
            ch.send(snap.graph, out, depth + 1);
        }
    }
    // An inserted node without neighbours hears nothing and starts alone.
    for s in pending {
        let node = net.node(s);
        if let Some(out) = node.react(&snap, 0, &[], Trigger::Local) {
            ch.send(snap.graph, out, ch.depth + 1);
        }
    }
    Ok(Run { nodes: net.nodes, rounds: ch.depth, broadcasts: ch.broadcasts, preambles, logs: Vec::new() })
}

/// Runs one change synchronously from the greedy configuration of `g_old`
/// under `p` (which must include any inserted node).
pub fn run_sync(
    g_old: &Graph,
    p: &PriorityMap,
    c: &TopologyChange,
    kind: ProtocolKind,
    max_rounds: Option<u32>,
) -> Result<Outcome, EngineError> {
    let mut sim = Simulator::from_graph(g_old.clone(), p.clone(), kind)?.with_logs(true);
    if let Some(limit) = max_rounds {
        sim = sim.with_max_rounds(limit);
    }
    let report = sim.apply(c)?;
    Ok(Outcome { assignment: sim.assignment, report })
}

/// Runs one change with the template protocol under a seeded random
/// delivery order.
pub fn run_async(
    g_old: &Graph,
    p: &PriorityMap,
    c: &TopologyChange,
    scheduler_seed: u64,
    max_events: Option<u64>,
) -> Result<Outcome, EngineError> {
    let mut sim = Simulator::from_graph(g_old.clone(), p.clone(), ProtocolKind::Template)?
        .with_mode(Mode::Async { seed: scheduler_seed });
    if let Some(limit) = max_events {
        sim = sim.with_max_events(limit);
    }
    let report = sim.apply(c)?;
    Ok(Outcome { assignment: sim.assignment, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::apply_change;

    fn n(v: u64) -> NodeId {
        NodeId(v)
    }

    const KINDS: [ProtocolKind; 2] = [ProtocolKind::Template, ProtocolKind::FourState];

    #[test]
    fn joining_two_in_nodes_flips_the_higher() {
        let g = Graph::from_edges(2, &[]).unwrap();
        let p = PriorityMap::identity(g.nodes());
        let c = TopologyChange::EdgeInsert { u: n(0), v: n(1) };
        for kind in KINDS {
            let out = run_sync(&g, &p, &c, kind, None).unwrap();
            assert_eq!(out.report.metrics.adjustments, 1);
            assert_eq!(out.assignment.in_set(), BTreeSet::from([n(0)]));
            assert_eq!(out.report.metrics.preamble_broadcasts, 2);
        }
        for seed in 0..20 {
            let out = run_async(&g, &p, &c, seed, None).unwrap();
            assert_eq!(out.assignment.in_set(), BTreeSet::from([n(0)]));
        }
    }

    #[test]
    fn untouched_invariant_means_no_adjustment() {
        // 2 is OUT behind 0; deleting edge 1-2 changes nothing.
        let g = Graph::from_edges(3, &[(0, 2), (1, 2)]).unwrap();
        let p = PriorityMap::identity(g.nodes());
        let c = TopologyChange::EdgeDeleteGraceful { u: n(1), v: n(2) };
        for kind in KINDS {
            let out = run_sync(&g, &p, &c, kind, None).unwrap();
            assert!(out.report.influenced.is_empty());
            assert_eq!(out.report.metrics.adjustments, 0);
            assert_eq!(out.report.metrics.broadcasts, out.report.metrics.preamble_broadcasts);
        }
    }

    #[test]
    fn worked_example_template_flips_u2_twice() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]).unwrap();
        let p = PriorityMap::identity(g.nodes());
        let c = TopologyChange::NodeDeleteGraceful { v: n(0) };
        let out = run_sync(&g, &p, &c, ProtocolKind::Template, None).unwrap();
        let flips_of_u2: Vec<_> = out
            .report
            .logs
            .iter()
            .flat_map(|l| &l.state_changes)
            .filter(|s| s.node == n(4))
            .map(|s| s.to)
            .collect();
        assert_eq!(flips_of_u2, vec![NodeState::M, NodeState::NotM]);
        let g_new = apply_change(&g, &c).unwrap();
        assert_eq!(out.assignment, greedy_mis(&g_new, &p));

        let out = run_sync(&g, &p, &c, ProtocolKind::FourState, None).unwrap();
        assert_eq!(out.assignment, greedy_mis(&g_new, &p));
        assert!(out.report.r_exits.values().all(|&r| r == 1));
    }

    #[test]
    fn abrupt_star_center_puts_every_leaf_in_c_at_once() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let p = PriorityMap::identity(g.nodes());
        let out = run_sync(&g, &p, &TopologyChange::NodeDeleteAbrupt { v: n(0) }, ProtocolKind::FourState, None)
            .unwrap();
        let first = &out.report.logs[0];
        assert_eq!(first.state_changes.len(), 4);
        assert!(first.state_changes.iter().all(|s| s.to == NodeState::C));
        assert_eq!(out.assignment.in_set(), BTreeSet::from([n(1), n(2), n(3), n(4)]));
        assert!(out.report.metrics.rounds <= 3 * out.report.influenced.len() as u32 + 2);
    }

    #[test]
    fn isolated_insert_ends_in() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let mut p = PriorityMap::identity(g.nodes());
        p.set_draw(n(7), 0);
        let c = TopologyChange::NodeInsert { v: n(7), nbrs: vec![] };
        for kind in KINDS {
            let out = run_sync(&g, &p, &c, kind, None).unwrap();
            assert!(out.assignment.is_in(n(7)));
            assert_eq!(out.report.metrics.adjustments, 1);
            assert!(out.report.metrics.broadcasts <= 1 + 3 * out.report.influenced.len() as u64);
        }
        assert!(run_async(&g, &p, &c, 1, None).unwrap().assignment.is_in(n(7)));
    }

    #[test]
    fn round_logs_account_for_every_broadcast() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]).unwrap();
        let mut p = PriorityMap::from_order(&[n(3), n(0), n(5), n(1), n(4), n(2)]);
        p.set_draw(n(9), 99);
        let c = TopologyChange::NodeInsert { v: n(9), nbrs: vec![n(0), n(2), n(4)] };
        for kind in KINDS {
            let out = run_sync(&g, &p, &c, kind, None).unwrap();
            let mut total = 0;
            for log in &out.report.logs {
                if kind == ProtocolKind::FourState {
                    assert_eq!(log.broadcasts.len(), log.state_changes.len() + log.preambles);
                }
                total += log.broadcasts.len() as u64;
            }
            assert_eq!(total, out.report.metrics.broadcasts);
        }
    }

    #[test]
    fn reused_ids_are_rejected() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let mut sim = Simulator::from_graph(g, PriorityMap::identity([n(0), n(1)]), ProtocolKind::Template).unwrap();
        sim.apply(&TopologyChange::NodeDeleteAbrupt { v: n(1) }).unwrap();
        let err = sim.apply(&TopologyChange::NodeInsert { v: n(1), nbrs: vec![] }).unwrap_err();
        assert_eq!(err, EngineError::Graph(GraphError::ReusedId(n(1))));
    }

    #[test]
    fn four_state_async_is_refused() {
        let g = Graph::from_edges(2, &[]).unwrap();
        let mut sim = Simulator::from_graph(g, PriorityMap::identity([n(0), n(1)]), ProtocolKind::FourState)
            .unwrap()
            .with_mode(Mode::Async { seed: 0 });
        let err = sim.apply(&TopologyChange::EdgeInsert { u: n(0), v: n(1) }).unwrap_err();
        assert_eq!(err, EngineError::AsyncFourState);
    }

    #[test]
    fn unmute_joins_with_known_neighbours() {
        let mut sim = Simulator::new(ProtocolKind::FourState, PrioritySource::Identity);
        sim.apply(&TopologyChange::NodeInsert { v: n(5), nbrs: vec![] }).unwrap();
        sim.apply(&TopologyChange::NodeInsert { v: n(6), nbrs: vec![n(5)] }).unwrap();
        sim.add_muted(n(1), &[n(5), n(6)]).unwrap();
        assert!(!sim.assignment().is_in(n(6)));
        let r = sim.apply(&TopologyChange::NodeUnmute { v: n(1) }).unwrap();
        assert_eq!(sim.assignment().in_set(), BTreeSet::from([n(1)]));
        assert_eq!(r.metrics.adjustments, 2);
        assert!(sim.is_stable());
    }
}
