//! Dynamic undirected graphs, node priorities and topology changes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Identifier of a node. Ids are never reused within one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for NodeId {
    fn from(v: u64) -> Self {
        NodeId(v)
    }
}

/// Position of a node in the random order. Compared lexicographically, so
/// two distinct nodes never tie.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Priority {
    pub draw: u64,
    pub tiebreak: NodeId,
}

impl Priority {
    pub fn new(draw: u64, id: NodeId) -> Self {
        Priority { draw, tiebreak: id }
    }
}

/// Normalized undirected edge, smaller endpoint first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(pub NodeId, pub NodeId);

impl Edge {
    pub fn new(u: NodeId, v: NodeId) -> Self {
        if u <= v {
            Edge(u, v)
        } else {
            Edge(v, u)
        }
    }

    pub fn touches(&self, v: NodeId) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn other(&self, v: NodeId) -> NodeId {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

/// Priorities of all nodes that have ever existed in a run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PriorityMap {
    map: HashMap<NodeId, Priority>,
}

impl PriorityMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Priorities equal to the node ids: the fixed order of a deterministic baseline.
    pub fn identity<I: IntoIterator<Item = NodeId>>(ids: I) -> Self {
        let mut p = Self::new();
        for id in ids {
            p.set_draw(id, id.0);
        }
        p
    }

    /// Fresh uniform draws for `ids`, consumed from `rng` in iteration order.
    pub fn sample<I: IntoIterator<Item = NodeId>, R: Rng + ?Sized>(ids: I, rng: &mut R) -> Self {
        let mut p = Self::new();
        for id in ids {
            p.set_draw(id, rng.random());
        }
        p
    }

    /// Priorities consistent with the ranking `order` (first = lowest).
    pub fn from_order(order: &[NodeId]) -> Self {
        let mut p = Self::new();
        for (rank, &id) in order.iter().enumerate() {
            p.set_draw(id, rank as u64);
        }
        p
    }

    pub fn set_draw(&mut self, id: NodeId, draw: u64) {
        self.map.insert(id, Priority::new(draw, id));
    }

    pub fn get(&self, id: NodeId) -> Option<Priority> {
        self.map.get(&id).copied()
    }

    pub fn try_get(&self, id: NodeId) -> Result<Priority, GraphError> {
        self.get(id).ok_or(GraphError::MissingPriority(id))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.map.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// `ids` sorted by increasing priority. Nodes without a priority sort last.
    pub fn sorted(&self, ids: impl IntoIterator<Item = NodeId>) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = ids.into_iter().collect();
        v.sort_by_key(|&id| (self.get(id).is_none(), self.get(id)));
        v
    }
}

/// Where priorities for newly created nodes come from.
#[derive(Clone, Debug)]
pub enum PrioritySource {
    /// One stream consumed in node-creation order.
    Sequential(ChaCha8Rng),
    /// Each node's draw depends only on the seed and its id, so every
    /// construction history of the same node set sees the same order.
    Keyed(u64),
    /// Draw = id.
    Identity,
}

impl PrioritySource {
    pub fn sequential(seed: u64) -> Self {
        PrioritySource::Sequential(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn draw(&mut self, id: NodeId) -> u64 {
        match self {
            PrioritySource::Sequential(rng) => rng.random(),
            PrioritySource::Keyed(seed) => keyed_draw(*seed, id),
            PrioritySource::Identity => id.0,
        }
    }
}

pub fn keyed_draw(seed: u64, id: NodeId) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id.0);
    rng.random()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Slot {
    nbrs: BTreeSet<NodeId>,
    visible: bool,
}

/// Undirected simple graph whose nodes may be muted (present but invisible).
///
/// Muted nodes keep their incident edges but are skipped by every
/// neighbourhood query, so to the protocols they do not exist yet.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    slots: BTreeMap<NodeId, Slot>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph on nodes `0..n` with the given edges.
    pub fn from_edges(n: u64, edges: &[(u64, u64)]) -> Result<Self, GraphError> {
        let mut g = Graph::new();
        for v in 0..n {
            g.add_node(NodeId(v))?;
        }
        for &(u, v) in edges {
            g.add_edge(NodeId(u), NodeId(v))?;
        }
        Ok(g)
    }

    pub fn add_node(&mut self, v: NodeId) -> Result<(), GraphError> {
        if self.slots.contains_key(&v) {
            return Err(GraphError::NodeExists(v));
        }
        self.slots.insert(v, Slot { nbrs: BTreeSet::new(), visible: true });
        Ok(())
    }

    /// Adds `v` muted, attached to the visible nodes `nbrs`.
    pub fn add_muted(&mut self, v: NodeId, nbrs: &[NodeId]) -> Result<(), GraphError> {
        self.check_new_node(v, nbrs)?;
        self.slots.insert(v, Slot { nbrs: BTreeSet::new(), visible: false });
        for &w in nbrs {
            self.link(v, w);
        }
        Ok(())
    }

    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.validate(&TopologyChange::EdgeInsert { u, v })?;
        self.link(u, v);
        Ok(())
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.slots.contains_key(&v)
    }

    pub fn is_visible(&self, v: NodeId) -> bool {
        self.slots.get(&v).is_some_and(|s| s.visible)
    }

    pub fn is_muted(&self, v: NodeId) -> bool {
        self.slots.get(&v).is_some_and(|s| !s.visible)
    }

    /// Visible nodes.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.slots.iter().filter(|(_, s)| s.visible).map(|(&v, _)| v)
    }

    /// Visible and muted nodes.
    pub fn all_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.slots.keys().copied()
    }

    pub fn muted_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.slots.iter().filter(|(_, s)| !s.visible).map(|(&v, _)| v)
    }

    pub fn node_count(&self) -> usize {
        self.nodes().count()
    }

    /// Visible neighbours of `v` (empty if `v` is unknown).
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.slots
            .get(&v)
            .into_iter()
            .flat_map(|s| s.nbrs.iter().copied())
            .filter(move |w| self.is_visible(*w))
    }

    /// Every neighbour of `v`, muted ones included.
    pub fn all_neighbors(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.slots.get(&v).into_iter().flat_map(|s| s.nbrs.iter().copied())
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.neighbors(v).count()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.slots.get(&u).is_some_and(|s| s.nbrs.contains(&v))
    }

    /// Edges between visible nodes.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.slots
            .iter()
            .filter(|(_, s)| s.visible)
            .flat_map(move |(&u, s)| {
                s.nbrs.iter().filter(move |&&w| u < w && self.is_visible(w)).map(move |&w| Edge(u, w))
            })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    fn require_visible(&self, v: NodeId) -> Result<(), GraphError> {
        match self.slots.get(&v) {
            None => Err(GraphError::UnknownNode(v)),
            Some(s) if !s.visible => Err(GraphError::MutedNode(v)),
            Some(_) => Ok(()),
        }
    }

    fn check_new_node(&self, v: NodeId, nbrs: &[NodeId]) -> Result<(), GraphError> {
        if self.slots.contains_key(&v) {
            return Err(GraphError::NodeExists(v));
        }
        let mut seen = BTreeSet::new();
        for &w in nbrs {
            if w == v {
                return Err(GraphError::SelfLoop(v));
            }
            if !seen.insert(w) {
                return Err(GraphError::DuplicateNeighbor { node: v, neighbor: w });
            }
            self.require_visible(w)?;
        }
        Ok(())
    }

    /// Checks that `c` can be applied to this graph.
    pub fn validate(&self, c: &TopologyChange) -> Result<(), GraphError> {
        match *c {
            TopologyChange::EdgeInsert { u, v } => {
                if u == v {
                    return Err(GraphError::SelfLoop(u));
                }
                self.require_visible(u)?;
                self.require_visible(v)?;
                if self.has_edge(u, v) {
                    return Err(GraphError::EdgeExists(u, v));
                }
                Ok(())
            }
            TopologyChange::EdgeDeleteGraceful { u, v } | TopologyChange::EdgeDeleteAbrupt { u, v } => {
                self.require_visible(u)?;
                self.require_visible(v)?;
                if !self.has_edge(u, v) {
                    return Err(GraphError::MissingEdge(u, v));
                }
                Ok(())
            }
            TopologyChange::NodeInsert { v, ref nbrs } => self.check_new_node(v, nbrs),
            TopologyChange::NodeDeleteGraceful { v } | TopologyChange::NodeDeleteAbrupt { v } => {
                self.require_visible(v)
            }
            TopologyChange::NodeUnmute { v } => match self.slots.get(&v) {
                None => Err(GraphError::UnknownNode(v)),
                Some(s) if s.visible => Err(GraphError::AlreadyVisible(v)),
                Some(_) => Ok(()),
            },
        }
    }

    /// Applies `c` in place after validating it.
    pub fn apply(&mut self, c: &TopologyChange) -> Result<(), GraphError> {
        self.validate(c)?;
        match *c {
            TopologyChange::EdgeInsert { u, v } => self.link(u, v),
            TopologyChange::EdgeDeleteGraceful { u, v } | TopologyChange::EdgeDeleteAbrupt { u, v } => {
                self.unlink(u, v)
            }
            TopologyChange::NodeInsert { v, ref nbrs } => {
                self.slots.insert(v, Slot { nbrs: BTreeSet::new(), visible: true });
                for &w in nbrs {
                    self.link(v, w);
                }
            }
            TopologyChange::NodeDeleteGraceful { v } | TopologyChange::NodeDeleteAbrupt { v } => {
                if let Some(slot) = self.slots.remove(&v) {
                    for w in slot.nbrs {
                        if let Some(s) = self.slots.get_mut(&w) {
                            s.nbrs.remove(&v);
                        }
                    }
                }
            }
            TopologyChange::NodeUnmute { v } => {
                if let Some(s) = self.slots.get_mut(&v) {
                    s.visible = true;
                }
            }
        }
        Ok(())
    }

    fn link(&mut self, u: NodeId, v: NodeId) {
        if let Some(s) = self.slots.get_mut(&u) {
            s.nbrs.insert(v);
        }
        if let Some(s) = self.slots.get_mut(&v) {
            s.nbrs.insert(u);
        }
    }

    fn unlink(&mut self, u: NodeId, v: NodeId) {
        if let Some(s) = self.slots.get_mut(&u) {
            s.nbrs.remove(&v);
        }
        if let Some(s) = self.slots.get_mut(&v) {
            s.nbrs.remove(&u);
        }
    }
}

/// Returns the graph after `c`, leaving `g` untouched.
pub fn apply_change(g: &Graph, c: &TopologyChange) -> Result<Graph, GraphError> {
    let mut out = g.clone();
    out.apply(c)?;
    Ok(out)
}

/// Visible neighbours of `u` that precede it in the order.
pub fn lower_neighbors(g: &Graph, p: &PriorityMap, u: NodeId) -> Result<BTreeSet<NodeId>, GraphError> {
    if !g.contains(u) {
        return Err(GraphError::UnknownNode(u));
    }
    let pu = p.try_get(u)?;
    let mut out = BTreeSet::new();
    for w in g.neighbors(u) {
        if p.try_get(w)? < pu {
            out.insert(w);
        }
    }
    Ok(out)
}

/// One of the seven ways the topology can change.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TopologyChange {
    EdgeInsert { u: NodeId, v: NodeId },
    EdgeDeleteGraceful { u: NodeId, v: NodeId },
    EdgeDeleteAbrupt { u: NodeId, v: NodeId },
    NodeInsert { v: NodeId, nbrs: Vec<NodeId> },
    NodeDeleteGraceful { v: NodeId },
    NodeDeleteAbrupt { v: NodeId },
    NodeUnmute { v: NodeId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChangeKind {
    EdgeInsert,
    EdgeDeleteGraceful,
    EdgeDeleteAbrupt,
    NodeInsert,
    NodeDeleteGraceful,
    NodeDeleteAbrupt,
    NodeUnmute,
}

impl ChangeKind {
    pub const ALL: [ChangeKind; 7] = [
        ChangeKind::EdgeInsert,
        ChangeKind::EdgeDeleteGraceful,
        ChangeKind::EdgeDeleteAbrupt,
        ChangeKind::NodeInsert,
        ChangeKind::NodeDeleteGraceful,
        ChangeKind::NodeDeleteAbrupt,
        ChangeKind::NodeUnmute,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChangeKind::EdgeInsert => "edge_insert",
            ChangeKind::EdgeDeleteGraceful => "edge_delete_graceful",
            ChangeKind::EdgeDeleteAbrupt => "edge_delete_abrupt",
            ChangeKind::NodeInsert => "node_insert",
            ChangeKind::NodeDeleteGraceful => "node_delete_graceful",
            ChangeKind::NodeDeleteAbrupt => "node_delete_abrupt",
            ChangeKind::NodeUnmute => "node_unmute",
        }
    }

    pub fn is_node_change(self) -> bool {
        !matches!(
            self,
            ChangeKind::EdgeInsert | ChangeKind::EdgeDeleteGraceful | ChangeKind::EdgeDeleteAbrupt
        )
    }
}

impl fmt::Display for ChangeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TopologyChange {
    pub fn kind(&self) -> ChangeKind {
        match self {
            TopologyChange::EdgeInsert { .. } => ChangeKind::EdgeInsert,
            TopologyChange::EdgeDeleteGraceful { .. } => ChangeKind::EdgeDeleteGraceful,
            TopologyChange::EdgeDeleteAbrupt { .. } => ChangeKind::EdgeDeleteAbrupt,
            TopologyChange::NodeInsert { .. } => ChangeKind::NodeInsert,
            TopologyChange::NodeDeleteGraceful { .. } => ChangeKind::NodeDeleteGraceful,
            TopologyChange::NodeDeleteAbrupt { .. } => ChangeKind::NodeDeleteAbrupt,
            TopologyChange::NodeUnmute { .. } => ChangeKind::NodeUnmute,
        }
    }

    /// The endpoints of an edge change.
    pub fn edge(&self) -> Option<(NodeId, NodeId)> {
        match *self {
            TopologyChange::EdgeInsert { u, v }
            | TopologyChange::EdgeDeleteGraceful { u, v }
            | TopologyChange::EdgeDeleteAbrupt { u, v } => Some((u, v)),
            _ => None,
        }
    }

    /// The changed node of a node change.
    pub fn node(&self) -> Option<NodeId> {
        match *self {
            TopologyChange::NodeInsert { v, .. }
            | TopologyChange::NodeDeleteGraceful { v }
            | TopologyChange::NodeDeleteAbrupt { v }
            | TopologyChange::NodeUnmute { v } => Some(v),
            _ => None,
        }
    }

    pub fn is_deletion(&self) -> bool {
        matches!(
            self.kind(),
            ChangeKind::EdgeDeleteGraceful
                | ChangeKind::EdgeDeleteAbrupt
                | ChangeKind::NodeDeleteGraceful
                | ChangeKind::NodeDeleteAbrupt
        )
    }

    pub fn is_abrupt(&self) -> bool {
        matches!(self.kind(), ChangeKind::EdgeDeleteAbrupt | ChangeKind::NodeDeleteAbrupt)
    }

    /// The change that undoes this one, where one exists. `nbrs` is needed
    /// to invert a node deletion.
    pub fn inverse(&self, nbrs: Option<Vec<NodeId>>) -> Option<TopologyChange> {
        match *self {
            TopologyChange::EdgeInsert { u, v } => Some(TopologyChange::EdgeDeleteGraceful { u, v }),
            TopologyChange::EdgeDeleteGraceful { u, v } | TopologyChange::EdgeDeleteAbrupt { u, v } => {
                Some(TopologyChange::EdgeInsert { u, v })
            }
            TopologyChange::NodeInsert { v, .. } => Some(TopologyChange::NodeDeleteGraceful { v }),
            TopologyChange::NodeDeleteGraceful { v } | TopologyChange::NodeDeleteAbrupt { v } => {
                nbrs.map(|nbrs| TopologyChange::NodeInsert { v, nbrs })
            }
            TopologyChange::NodeUnmute { .. } => None,
        }
    }
}

/// The node whose invariant a change can break first (`v_star`) and, for
/// edge changes, the other endpoint. Node changes have both equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Locus {
    pub v_star: NodeId,
    pub v_star_star: NodeId,
}

pub fn locus(p: &PriorityMap, c: &TopologyChange) -> Result<Locus, GraphError> {
    if let Some((u, v)) = c.edge() {
        let (pu, pv) = (p.try_get(u)?, p.try_get(v)?);
        return Ok(if pu > pv {
            Locus { v_star: u, v_star_star: v }
        } else {
            Locus { v_star: v, v_star_star: u }
        });
    }
    let v = c.node().expect("non-edge change names a node");
    p.try_get(v)?;
    Ok(Locus { v_star: v, v_star_star: v })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> NodeId {
        NodeId(v)
    }

    #[test]
    fn edge_insert_extends_path() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let h = apply_change(&g, &TopologyChange::EdgeInsert { u: n(1), v: n(2) }).unwrap();
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![Edge(n(0), n(1)), Edge(n(1), n(2))]);
    }

    #[test]
    fn deleting_the_only_node_empties_the_graph() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let h = apply_change(&g, &TopologyChange::NodeDeleteGraceful { v: n(0) }).unwrap();
        assert_eq!(h, Graph::new());
    }

    #[test]
    fn abrupt_delete_in_k22_leaves_a_star() {
        // u1=0 u2=1 | v1=2 v2=3
        let g = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let h = apply_change(&g, &TopologyChange::NodeDeleteAbrupt { v: n(0) }).unwrap();
        let mut expect = Graph::new();
        for v in 1..4 {
            expect.add_node(n(v)).unwrap();
        }
        expect.add_edge(n(1), n(2)).unwrap();
        expect.add_edge(n(1), n(3)).unwrap();
        assert_eq!(h, expect);
    }

    #[test]
    fn malformed_changes_are_rejected() {
        let mut g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(
            g.validate(&TopologyChange::EdgeInsert { u: n(0), v: n(1) }),
            Err(GraphError::EdgeExists(n(0), n(1)))
        );
        assert_eq!(
            g.validate(&TopologyChange::EdgeInsert { u: n(0), v: n(7) }),
            Err(GraphError::UnknownNode(n(7)))
        );
        assert_eq!(
            g.validate(&TopologyChange::NodeUnmute { v: n(0) }),
            Err(GraphError::AlreadyVisible(n(0)))
        );
        g.add_muted(n(5), &[n(0)]).unwrap();
        assert_eq!(
            g.validate(&TopologyChange::EdgeInsert { u: n(1), v: n(5) }),
            Err(GraphError::MutedNode(n(5)))
        );
        assert_eq!(
            g.validate(&TopologyChange::NodeInsert { v: n(6), nbrs: vec![n(5)] }),
            Err(GraphError::MutedNode(n(5)))
        );
    }

    #[test]
    fn muted_nodes_are_invisible_until_unmuted() {
        let mut g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        g.add_muted(n(2), &[n(0), n(1)]).unwrap();
        assert_eq!(g.neighbors(n(0)).collect::<Vec<_>>(), vec![n(1)]);
        assert_eq!(g.edge_count(), 1);
        g.apply(&TopologyChange::NodeUnmute { v: n(2) }).unwrap();
        assert_eq!(g.neighbors(n(0)).collect::<Vec<_>>(), vec![n(1), n(2)]);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn lower_neighbors_examples() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let p = PriorityMap::identity(g.nodes());
        assert_eq!(lower_neighbors(&g, &p, n(1)).unwrap(), BTreeSet::from([n(0)]));
        let iso = Graph::from_edges(1, &[]).unwrap();
        assert!(lower_neighbors(&iso, &p, n(0)).unwrap().is_empty());
        assert_eq!(lower_neighbors(&g, &p, n(9)), Err(GraphError::UnknownNode(n(9))));

        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let p = PriorityMap::identity(star.nodes());
        assert!(lower_neighbors(&star, &p, n(0)).unwrap().is_empty());
        for leaf in 1..5 {
            assert_eq!(lower_neighbors(&star, &p, n(leaf)).unwrap(), BTreeSet::from([n(0)]));
        }
    }

    #[test]
    fn locus_examples() {
        let p = PriorityMap::from_order(&[n(0), n(1)]);
        let l = locus(&p, &TopologyChange::EdgeInsert { u: n(0), v: n(1) }).unwrap();
        assert_eq!((l.v_star, l.v_star_star), (n(1), n(0)));
        let p = PriorityMap::from_order(&[n(1), n(0)]);
        let l = locus(&p, &TopologyChange::EdgeDeleteAbrupt { u: n(0), v: n(1) }).unwrap();
        assert_eq!((l.v_star, l.v_star_star), (n(0), n(1)));
        let p = PriorityMap::from_order(&[n(4)]);
        let l = locus(&p, &TopologyChange::NodeInsert { v: n(4), nbrs: vec![] }).unwrap();
        assert_eq!((l.v_star, l.v_star_star), (n(4), n(4)));
    }

    #[test]
    fn change_json_shape() {
        let c = TopologyChange::EdgeInsert { u: n(3), v: n(7) };
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"op":"edge_insert","u":3,"v":7}"#);
        let c: TopologyChange = serde_json::from_str(r#"{"op":"node_insert","v":9,"nbrs":[1,2]}"#).unwrap();
        assert_eq!(c, TopologyChange::NodeInsert { v: n(9), nbrs: vec![n(1), n(2)] });
        for k in ChangeKind::ALL {
            assert_eq!(serde_json::to_value(k).unwrap(), serde_json::Value::from(k.as_str()));
        }
    }

    #[test]
    fn keyed_draws_depend_only_on_seed_and_id() {
        let mut a = PrioritySource::Keyed(7);
        let mut b = PrioritySource::Keyed(7);
        let x = a.draw(n(3));
        a.draw(n(1));
        assert_eq!(b.draw(n(3)), x);
        assert_ne!(keyed_draw(7, n(3)), keyed_draw(7, n(4)));
    }
}
