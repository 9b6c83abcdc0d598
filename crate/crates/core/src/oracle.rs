//! Sequential reference for the random-greedy order: greedy MIS, the
//! influenced set `S` with its levels, the auxiliary set `S'`, and exhaustive
//! optima for small instances.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GraphError, OracleError};
use crate::graph::{apply_change, locus, Graph, NodeId, Priority, PriorityMap, TopologyChange};
use crate::stats::Accumulator;

/// IN/OUT state of every visible node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisAssignment {
    states: BTreeMap<NodeId, bool>,
}

impl MisAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, v: NodeId) -> Option<bool> {
        self.states.get(&v).copied()
    }

    /// False for unknown nodes.
    pub fn is_in(&self, v: NodeId) -> bool {
        self.get(v).unwrap_or(false)
    }

    pub fn set(&mut self, v: NodeId, is_in: bool) {
        self.states.insert(v, is_in);
    }

    pub fn remove(&mut self, v: NodeId) -> Option<bool> {
        self.states.remove(&v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, bool)> + '_ {
        self.states.iter().map(|(&v, &s)| (v, s))
    }

    pub fn in_set(&self) -> BTreeSet<NodeId> {
        self.iter().filter(|&(_, s)| s).map(|(v, _)| v).collect()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

impl FromIterator<(NodeId, bool)> for MisAssignment {
    fn from_iter<I: IntoIterator<Item = (NodeId, bool)>>(iter: I) -> Self {
        MisAssignment { states: iter.into_iter().collect() }
    }
}

/// The random-greedy MIS: visit visible nodes by increasing priority and
/// take each one whose earlier neighbours were all left out.
pub fn greedy_mis(g: &Graph, p: &PriorityMap) -> MisAssignment {
    greedy_by(g, |v| p.get(v), None)
}

fn greedy_by<K: Ord>(g: &Graph, key: impl Fn(NodeId) -> K, forced: Option<(NodeId, bool)>) -> MisAssignment {
    let mut order: Vec<NodeId> = g.nodes().collect();
    order.sort_by_cached_key(|&v| key(v));
    let mut a = MisAssignment::new();
    for v in order {
        let state = match forced {
            Some((f, s)) if f == v => s,
            _ => !g.neighbors(v).any(|w| a.is_in(w)),
        };
        a.set(v, state);
    }
    a
}

/// True iff every visible node satisfies the MIS invariant under `a`.
pub fn check_invariant(g: &Graph, p: &PriorityMap, a: &MisAssignment) -> Result<bool, OracleError> {
    Ok(first_violation(g, p, a, g.nodes())?.is_none())
}

/// First node among `nodes` whose state disagrees with its lower neighbours.
pub fn first_violation(
    g: &Graph,
    p: &PriorityMap,
    a: &MisAssignment,
    nodes: impl IntoIterator<Item = NodeId>,
) -> Result<Option<NodeId>, OracleError> {
    for v in nodes {
        if !g.is_visible(v) {
            continue;
        }
        let state = a.get(v).ok_or(OracleError::MissingState(v))?;
        let pv = p.try_get(v)?;
        let mut covered = false;
        for w in g.neighbors(v) {
            if p.try_get(w)? < pv && a.get(w).ok_or(OracleError::MissingState(w))? {
                covered = true;
                break;
            }
        }
        if state == covered {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

/// Nodes influenced by one topology change, with the last wave each joined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfluencedSet {
    pub v_star: NodeId,
    pub levels: BTreeMap<NodeId, u32>,
    /// Set when the result is empty because v*'s invariant survived the change.
    pub invariant_held: bool,
}

impl InfluencedSet {
    fn untouched(v_star: NodeId) -> Self {
        InfluencedSet { v_star, levels: BTreeMap::new(), invariant_held: true }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.levels.contains_key(&v)
    }

    pub fn level(&self, v: NodeId) -> Option<u32> {
        self.levels.get(&v).copied()
    }

    pub fn members(&self) -> BTreeSet<NodeId> {
        self.levels.keys().copied().collect()
    }

    /// Largest level, i.e. the number of waves after the first.
    pub fn depth(&self) -> u32 {
        self.levels.values().copied().max().unwrap_or(0)
    }
}

/// Wave recursion from `v_star`. A node joins wave `i` when a lower
/// neighbour sits in wave `i-1` and either it was IN, or every IN lower
/// neighbour it had has already joined some earlier wave.
fn waves<K: Ord + Copy>(
    g: &Graph,
    key: impl Fn(NodeId) -> K,
    was_in: impl Fn(NodeId) -> bool,
    v_star: NodeId,
) -> BTreeMap<NodeId, u32> {
    let mut levels = BTreeMap::from([(v_star, 0u32)]);
    let mut frontier = vec![v_star];
    let mut wave = 0;
    while !frontier.is_empty() {
        wave += 1;
        let mut candidates = BTreeSet::new();
        for &f in &frontier {
            let kf = key(f);
            candidates.extend(g.neighbors(f).filter(|&u| key(u) > kf));
        }
        let mut next = Vec::new();
        for u in candidates {
            let ku = key(u);
            let joins = was_in(u)
                || g.neighbors(u).filter(|&w| key(w) < ku && was_in(w)).all(|w| levels.contains_key(&w));
            if joins {
                next.push(u);
            }
        }
        for &u in &next {
            levels.insert(u, wave);
        }
        frontier = next;
    }
    levels
}

/// `S` for change `c` given the pre-change states `old`. `graph` is the
/// post-change graph, except for node deletions where it is the pre-change
/// graph. Assumes `old` is the greedy MIS.
pub(crate) fn influence_on(
    graph: &Graph,
    p: &PriorityMap,
    old: &MisAssignment,
    c: &TopologyChange,
) -> Result<InfluencedSet, OracleError> {
    let l = locus(p, c)?;
    let v = l.v_star;
    let pv = p.try_get(v)?;
    let lower_in = |g: &Graph| -> Result<bool, GraphError> {
        for w in g.neighbors(v) {
            if p.try_get(w)? < pv && old.is_in(w) {
                return Ok(true);
            }
        }
        Ok(false)
    };
    let violated = match c {
        TopologyChange::EdgeInsert { .. } => old.is_in(v) && old.is_in(l.v_star_star),
        TopologyChange::EdgeDeleteGraceful { .. } | TopologyChange::EdgeDeleteAbrupt { .. } => {
            !old.is_in(v) && !lower_in(graph)?
        }
        TopologyChange::NodeInsert { .. } | TopologyChange::NodeUnmute { .. } => !lower_in(graph)?,
        TopologyChange::NodeDeleteGraceful { .. } | TopologyChange::NodeDeleteAbrupt { .. } => old.is_in(v),
    };
    if !violated {
        return Ok(InfluencedSet::untouched(v));
    }
    let levels = waves(graph, |u| p.get(u), |u| old.is_in(u), v);
    Ok(InfluencedSet { v_star: v, levels, invariant_held: false })
}

fn recursion_graph<'a>(g_old: &'a Graph, g_new: &'a Graph, c: &TopologyChange) -> &'a Graph {
    match c {
        TopologyChange::NodeDeleteGraceful { .. } | TopologyChange::NodeDeleteAbrupt { .. } => g_old,
        _ => g_new,
    }
}

/// The influenced set `S` of change `c`, with the pre-change states taken
/// to be the greedy MIS of `g_old`.
pub fn influenced_set(
    g_old: &Graph,
    g_new: &Graph,
    p: &PriorityMap,
    c: &TopologyChange,
) -> Result<InfluencedSet, OracleError> {
    let old = greedy_mis(g_old, p);
    influence_on(recursion_graph(g_old, g_new, c), p, &old, c)
}

/// Same as [`influenced_set`] with caller-supplied pre-change states, which
/// must be the greedy MIS of `g_old`.
pub fn influenced_set_with_states(
    g_old: &Graph,
    g_new: &Graph,
    p: &PriorityMap,
    old: &MisAssignment,
    c: &TopologyChange,
) -> Result<InfluencedSet, OracleError> {
    if let Some(v) = first_violation(g_old, p, old, g_old.nodes())? {
        return Err(OracleError::Precondition(v));
    }
    influence_on(recursion_graph(g_old, g_new, c), p, old, c)
}

/// The set `S'`: the same recursion, always seeded at v*, run with v*
/// moved to the front of the order, on `g_old` for edge insertions and node
/// deletions and on `g_new` otherwise. The base states are the greedy MIS
/// of that graph under the modified order with v* held at its state from
/// before it flips.
pub fn s_prime(
    g_old: &Graph,
    g_new: &Graph,
    p: &PriorityMap,
    c: &TopologyChange,
) -> Result<InfluencedSet, OracleError> {
    let v = locus(p, c)?.v_star;
    let (graph, v_was_in) = match c {
        TopologyChange::EdgeInsert { .. } => (g_old, true),
        TopologyChange::NodeDeleteGraceful { .. } | TopologyChange::NodeDeleteAbrupt { .. } => (g_old, true),
        _ => (g_new, false),
    };
    for u in graph.nodes() {
        p.try_get(u)?;
    }
    let key = |u: NodeId| -> (bool, Option<Priority>) { (u != v, p.get(u)) };
    let base = greedy_by(graph, key, Some((v, v_was_in)));
    let levels = waves(graph, key, |u| base.is_in(u), v);
    Ok(InfluencedSet { v_star: v, levels, invariant_held: false })
}

/// A graph and a change valid for it.
#[derive(Clone, Debug)]
pub struct ChangeInstance {
    pub g_old: Graph,
    pub g_new: Graph,
    pub change: TopologyChange,
}

impl ChangeInstance {
    pub fn new(g_old: Graph, change: TopologyChange) -> Result<Self, GraphError> {
        let g_new = apply_change(&g_old, &change)?;
        Ok(ChangeInstance { g_old, g_new, change })
    }

    /// Every node that needs a priority, in a fixed order.
    pub fn node_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self.g_old.all_nodes().collect();
        if let TopologyChange::NodeInsert { v, .. } = self.change {
            ids.push(v);
        }
        ids
    }

    /// Fresh priorities for trial `trial` of a run seeded with `seed`.
    pub fn priorities(&self, seed: u64, trial: u64) -> PriorityMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial));
        PriorityMap::sample(self.node_ids(), &mut rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub trials: u64,
}

/// Monte-Carlo estimate of E|S| over fresh priorities. Trial `t` uses
/// instance `t mod instances.len()`.
pub fn mean_influence_estimate(
    instances: &[ChangeInstance],
    trials: u64,
    seed: u64,
) -> Result<Estimate, OracleError> {
    let mut acc = Accumulator::new();
    if instances.is_empty() {
        return Ok(Estimate { mean: 0.0, std_err: 0.0, trials: 0 });
    }
    for t in 0..trials {
        let inst = &instances[(t % instances.len() as u64) as usize];
        let p = inst.priorities(seed, t);
        let s = influenced_set(&inst.g_old, &inst.g_new, &p, &inst.change)?;
        acc.push(s.len() as f64);
    }
    Ok(Estimate { mean: acc.mean(), std_err: acc.std_err(), trials })
}

pub const CC_OPT_LIMIT: usize = 12;

/// Minimum correlation-clustering cost over all partitions of the visible
/// nodes.
pub fn brute_force_cc_opt(g: &Graph) -> Result<u64, OracleError> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    let n = nodes.len();
    if n > CC_OPT_LIMIT {
        return Err(OracleError::TooLarge { nodes: n, limit: CC_OPT_LIMIT });
    }
    if n == 0 {
        return Ok(0);
    }
    let mut adj = vec![vec![false; n]; n];
    for (i, &u) in nodes.iter().enumerate() {
        for (j, &v) in nodes.iter().enumerate() {
            adj[i][j] = i != j && g.has_edge(u, v);
        }
    }
    // Restricted-growth strings: label[i] <= 1 + max(label[..i]).
    let mut label = vec![0usize; n];
    let mut best = u64::MAX;
    loop {
        let mut cost = 0u64;
        for i in 0..n {
            for j in i + 1..n {
                if (label[i] == label[j]) != adj[i][j] {
                    cost += 1;
                }
            }
        }
        best = best.min(cost);
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(best);
            }
            let ceiling = label[..i].iter().copied().max().unwrap_or(0) + 1;
            if label[i] < ceiling {
                label[i] += 1;
                for l in &mut label[i + 1..] {
                    *l = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> NodeId {
        NodeId(v)
    }

    fn ids(v: &[u64]) -> BTreeSet<NodeId> {
        v.iter().map(|&x| n(x)).collect()
    }

    #[test]
    fn greedy_on_a_path() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let a = greedy_mis(&g, &PriorityMap::identity(g.nodes()));
        assert_eq!(a.in_set(), ids(&[0, 2]));
    }

    #[test]
    fn greedy_star_with_lowest_center() {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let a = greedy_mis(&g, &PriorityMap::identity(g.nodes()));
        assert_eq!(a.in_set(), ids(&[0]));
    }

    #[test]
    fn greedy_triangle_takes_the_minimum() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        for order in [[0, 1, 2], [2, 0, 1], [1, 2, 0]] {
            let p = PriorityMap::from_order(&order.map(n));
            assert_eq!(greedy_mis(&g, &p).in_set(), ids(&[order[0]]));
        }
    }

    #[test]
    fn invariant_examples() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let p = PriorityMap::identity(g.nodes());
        let bad: MisAssignment = [(n(0), true), (n(1), false), (n(2), false)].into_iter().collect();
        assert!(!check_invariant(&g, &p, &bad).unwrap());
        assert!(check_invariant(&g, &p, &greedy_mis(&g, &p)).unwrap());

        let e = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let both: MisAssignment = [(n(0), true), (n(1), true)].into_iter().collect();
        assert!(!check_invariant(&e, &p, &both).unwrap());

        let partial: MisAssignment = [(n(0), true)].into_iter().collect();
        assert_eq!(check_invariant(&e, &p, &partial), Err(OracleError::MissingState(n(1))));
    }

    /// v*=0, u1=1, w1=2, w2=3, u2=4 and the deletion of v* (IN before).
    fn worked_example() -> (Graph, PriorityMap, TopologyChange) {
        let g = Graph::from_edges(5, &[(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]).unwrap();
        let p = PriorityMap::identity(g.nodes());
        (g, p, TopologyChange::NodeDeleteGraceful { v: n(0) })
    }

    #[test]
    fn worked_example_levels() {
        let (g, p, c) = worked_example();
        let h = apply_change(&g, &c).unwrap();
        let s = influenced_set(&g, &h, &p, &c).unwrap();
        assert_eq!(s.members(), ids(&[0, 1, 2, 3, 4]));
        assert_eq!(s.level(n(1)), Some(1));
        assert_eq!(s.level(n(2)), Some(2));
        assert_eq!(s.level(n(3)), Some(3));
        assert_eq!(s.level(n(4)), Some(4));
    }

    #[test]
    fn worked_example_s_prime() {
        let (g, p, c) = worked_example();
        let h = apply_change(&g, &c).unwrap();
        let sp = s_prime(&g, &h, &p, &c).unwrap();
        assert!(sp.members().is_superset(&ids(&[0, 1, 2, 3, 4])));
    }

    #[test]
    fn edge_to_an_out_node_with_an_in_lower_neighbour() {
        // 1 is OUT, covered by 0, and is the higher endpoint of the new edge.
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let p = PriorityMap::from_order(&[n(0), n(2), n(1)]);
        let c = TopologyChange::EdgeInsert { u: n(2), v: n(1) };
        let h = apply_change(&g, &c).unwrap();
        let s = influenced_set(&g, &h, &p, &c).unwrap();
        assert!(s.is_empty());
        assert!(s.invariant_held);
    }

    #[test]
    fn joining_two_isolated_nodes_flips_exactly_one() {
        let g = Graph::from_edges(2, &[]).unwrap();
        let c = TopologyChange::EdgeInsert { u: n(0), v: n(1) };
        let inst = ChangeInstance::new(g, c).unwrap();
        let est = mean_influence_estimate(&[inst], 200, 3).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_err, 0.0);
    }

    #[test]
    fn s_prime_equals_s_when_v_star_is_globally_minimal() {
        let g = Graph::from_edges(5, &[(1, 2), (2, 3), (3, 4)]).unwrap();
        let c = TopologyChange::NodeInsert { v: n(9), nbrs: vec![n(1), n(3)] };
        let h = apply_change(&g, &c).unwrap();
        let p = PriorityMap::from_order(&[n(9), n(0), n(1), n(2), n(3), n(4)]);
        let s = influenced_set(&g, &h, &p, &c).unwrap();
        let sp = s_prime(&g, &h, &p, &c).unwrap();
        assert_eq!(s.members(), sp.members());
        assert_eq!(s.levels, sp.levels);
    }

    #[test]
    fn cc_opt_examples() {
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(brute_force_cc_opt(&tri).unwrap(), 0);
        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(brute_force_cc_opt(&path).unwrap(), 1);
        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(brute_force_cc_opt(&c4).unwrap(), 2);
        let big = Graph::from_edges(13, &[]).unwrap();
        assert!(matches!(brute_force_cc_opt(&big), Err(OracleError::TooLarge { .. })));
    }
}
