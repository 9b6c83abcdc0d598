//! Structures derived from the greedy MIS: correlation clustering around
//! MIS centres, and maximal matching as an MIS of the line graph.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::engine::{ChangeReport, Simulator};
use crate::error::{ClusterError, EngineError, GraphError};
use crate::graph::{Edge, Graph, NodeId, PriorityMap, PrioritySource, TopologyChange};
use crate::oracle::{greedy_mis, MisAssignment};
use crate::protocol::ProtocolKind;

/// Assignment of every visible node to a cluster centre.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    pub cluster_of: BTreeMap<NodeId, NodeId>,
}

impl Clustering {
    pub fn centers(&self) -> BTreeSet<NodeId> {
        self.cluster_of.values().copied().collect()
    }

    /// Members of each cluster, keyed by centre.
    pub fn clusters(&self) -> BTreeMap<NodeId, Vec<NodeId>> {
        let mut out: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (&v, &c) in &self.cluster_of {
            out.entry(c).or_default().push(v);
        }
        out
    }
}

/// IN nodes are centres; each OUT node joins its lowest-priority IN neighbour.
pub fn cluster_from_mis(g: &Graph, p: &PriorityMap, a: &MisAssignment) -> Result<Clustering, ClusterError> {
    let mut cluster_of = BTreeMap::new();
    for v in g.nodes() {
        let is_in = a.get(v).ok_or(ClusterError::MissingState(v))?;
        let center = if is_in {
            v
        } else {
            let mut best = None;
            for w in g.neighbors(v).filter(|&w| a.is_in(w)) {
                let pw = p.try_get(w)?;
                if best.is_none_or(|(pb, _)| pw < pb) {
                    best = Some((pw, w));
                }
            }
            best.ok_or(ClusterError::Uncovered(v))?.1
        };
        cluster_of.insert(v, center);
    }
    Ok(Clustering { cluster_of })
}

/// Missing edges inside clusters plus edges between clusters. Nodes absent
/// from `cl` count as singletons.
pub fn cc_cost(g: &Graph, cl: &Clustering) -> u64 {
    let center = |v: NodeId| cl.cluster_of.get(&v).copied().unwrap_or(v);
    let mut sizes: BTreeMap<NodeId, u64> = BTreeMap::new();
    for v in g.nodes() {
        *sizes.entry(center(v)).or_default() += 1;
    }
    let pairs_inside: u64 = sizes.values().map(|&k| k * (k.saturating_sub(1)) / 2).sum();
    let (mut inside, mut across) = (0u64, 0u64);
    for e in g.edges() {
        if center(e.0) == center(e.1) {
            inside += 1;
        } else {
            across += 1;
        }
    }
    (pairs_inside - inside) + across
}

/// The line graph with its correspondence to the original edges.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LineGraph {
    pub graph: Graph,
    pub edge_of: BTreeMap<NodeId, Edge>,
    pub node_of: BTreeMap<Edge, NodeId>,
}

/// One node per visible edge of `g` (numbered in edge order), adjacent when
/// the edges share an endpoint.
pub fn line_graph(g: &Graph) -> LineGraph {
    let mut lg = LineGraph::default();
    for (i, e) in g.edges().enumerate() {
        let id = NodeId(i as u64);
        lg.graph.add_node(id).expect("fresh id");
        lg.edge_of.insert(id, e);
        lg.node_of.insert(e, id);
    }
    for v in g.nodes() {
        let incident: Vec<NodeId> = g.neighbors(v).map(|w| lg.node_of[&Edge::new(v, w)]).collect();
        for (i, &a) in incident.iter().enumerate() {
            for &b in &incident[i + 1..] {
                if !lg.graph.has_edge(a, b) {
                    lg.graph.add_edge(a, b).expect("distinct edge-nodes");
                }
            }
        }
    }
    lg
}

/// Greedy MIS of the line graph under `p_edges`, read back as edges.
pub fn matching_via_line_graph(lg: &LineGraph, p_edges: &PriorityMap) -> BTreeSet<Edge> {
    greedy_mis(&lg.graph, p_edges).in_set().into_iter().map(|id| lg.edge_of[&id]).collect()
}

/// No two edges of `m` share an endpoint, and every other edge of `g` meets one.
pub fn is_maximal_matching(g: &Graph, m: &BTreeSet<Edge>) -> bool {
    let mut covered = BTreeSet::new();
    for e in m {
        if !g.has_edge(e.0, e.1) || !covered.insert(e.0) || !covered.insert(e.1) {
            return false;
        }
    }
    g.edges().all(|e| covered.contains(&e.0) || covered.contains(&e.1))
}

/// Maximal matching kept up to date by running the MIS protocol on the
/// line graph. Each edge gets its own line-graph node and priority when it
/// is created. A change that touches several edges (a node insertion,
/// deletion or unmuting) becomes one line-graph change per edge, applied
/// one after another with the network stable in between.
#[derive(Clone, Debug)]
pub struct DynamicMatching {
    graph: Graph,
    sim: Simulator,
    edge_node: BTreeMap<Edge, NodeId>,
    next_id: u64,
}

impl DynamicMatching {
    pub fn new(kind: ProtocolKind, source: PrioritySource) -> Self {
        DynamicMatching { graph: Graph::new(), sim: Simulator::new(kind, source), edge_node: BTreeMap::new(), next_id: 0 }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn line_simulator(&self) -> &Simulator {
        &self.sim
    }

    /// Line-graph node standing for edge `e`.
    pub fn edge_node(&self, e: Edge) -> Option<NodeId> {
        self.edge_node.get(&e).copied()
    }

    pub fn matching(&self) -> BTreeSet<Edge> {
        self.edge_node.iter().filter(|(_, &id)| self.sim.assignment().is_in(id)).map(|(&e, _)| e).collect()
    }

    pub fn add_muted(&mut self, v: NodeId, nbrs: &[NodeId]) -> Result<(), GraphError> {
        self.graph.add_muted(v, nbrs)
    }

    fn insert_edge(&mut self, u: NodeId, v: NodeId) -> Result<ChangeReport, EngineError> {
        let e = Edge::new(u, v);
        let id = NodeId(self.next_id);
        self.next_id += 1;
        let nbrs: Vec<NodeId> = self
            .edge_node
            .iter()
            .filter(|(f, _)| f.touches(u) || f.touches(v))
            .map(|(_, &n)| n)
            .collect();
        let report = self.sim.apply(&TopologyChange::NodeInsert { v: id, nbrs })?;
        self.edge_node.insert(e, id);
        Ok(report)
    }

    fn delete_edge(&mut self, u: NodeId, v: NodeId, abrupt: bool) -> Result<ChangeReport, EngineError> {
        let e = Edge::new(u, v);
        let id = self.edge_node[&e];
        let c = if abrupt {
            TopologyChange::NodeDeleteAbrupt { v: id }
        } else {
            TopologyChange::NodeDeleteGraceful { v: id }
        };
        let report = self.sim.apply(&c)?;
        self.edge_node.remove(&e);
        Ok(report)
    }

    /// Applies a change of the underlying graph; returns one report per
    /// line-graph change it expanded to.
    pub fn apply(&mut self, c: &TopologyChange) -> Result<Vec<ChangeReport>, EngineError> {
        self.graph.validate(c)?;
        let mut reports = Vec::new();
        match c {
            TopologyChange::EdgeInsert { u, v } => reports.push(self.insert_edge(*u, *v)?),
            TopologyChange::EdgeDeleteGraceful { u, v } => reports.push(self.delete_edge(*u, *v, false)?),
            TopologyChange::EdgeDeleteAbrupt { u, v } => reports.push(self.delete_edge(*u, *v, true)?),
            TopologyChange::NodeInsert { v, nbrs } => {
                self.graph.add_node(*v)?;
                for &w in nbrs {
                    self.graph.add_edge(*v, w)?;
                    reports.push(self.insert_edge(*v, w)?);
                }
                return Ok(reports);
            }
            TopologyChange::NodeDeleteGraceful { v } | TopologyChange::NodeDeleteAbrupt { v } => {
                let nbrs: Vec<NodeId> = self.graph.neighbors(*v).collect();
                for w in nbrs {
                    reports.push(self.delete_edge(*v, w, c.is_abrupt())?);
                }
            }
            TopologyChange::NodeUnmute { v } => {
                let nbrs: Vec<NodeId> = self.graph.all_neighbors(*v).filter(|&w| self.graph.is_visible(w)).collect();
                self.graph.apply(c)?;
                for w in nbrs {
                    reports.push(self.insert_edge(*v, w)?);
                }
                return Ok(reports);
            }
        }
        self.graph.apply(c)?;
        Ok(reports)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> NodeId {
        NodeId(v)
    }

    fn centers_of(g: &Graph, p: &PriorityMap) -> Clustering {
        cluster_from_mis(g, p, &greedy_mis(g, p)).unwrap()
    }

    #[test]
    fn triangle_is_one_cluster() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let cl = centers_of(&g, &PriorityMap::identity(g.nodes()));
        assert!(cl.cluster_of.values().all(|&c| c == n(0)));
        assert_eq!(cc_cost(&g, &cl), 0);
    }

    #[test]
    fn path_splits_after_the_middle() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let cl = centers_of(&g, &PriorityMap::identity(g.nodes()));
        assert_eq!(cl.clusters(), BTreeMap::from([(n(0), vec![n(0), n(1)]), (n(2), vec![n(2)])]));
        assert_eq!(cc_cost(&g, &cl), 1);
    }

    #[test]
    fn star_center_joins_the_lowest_leaf() {
        // Center 4 ranked last, leaves 0..4 all IN.
        let g = Graph::from_edges(5, &[(4, 0), (4, 1), (4, 2), (4, 3)]).unwrap();
        let p = PriorityMap::from_order(&[n(2), n(0), n(3), n(1), n(4)]);
        let cl = centers_of(&g, &p);
        assert_eq!(cl.cluster_of[&n(4)], n(2));
        assert_eq!(cl.clusters().len(), 4);
        assert_eq!(cl.clusters()[&n(2)], vec![n(2), n(4)]);
    }

    #[test]
    fn four_cycle_cost_by_hand() {
        // MIS {0, 2}; 1 and 3 both join 0: {0,1,3} misses 1-3, edges 1-2
        // and 2-3 cross.
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let cl = centers_of(&g, &PriorityMap::identity(g.nodes()));
        assert_eq!(cc_cost(&g, &cl), 3);
    }

    #[test]
    fn uncovered_out_node_is_an_error() {
        let g = Graph::from_edges(2, &[]).unwrap();
        let a: MisAssignment = [(n(0), true), (n(1), false)].into_iter().collect();
        let p = PriorityMap::identity(g.nodes());
        assert_eq!(cluster_from_mis(&g, &p, &a), Err(ClusterError::Uncovered(n(1))));
    }

    #[test]
    fn line_graph_examples() {
        let tri = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let lt = line_graph(&tri);
        assert_eq!((lt.graph.node_count(), lt.graph.edge_count()), (3, 3));

        let p4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let lp = line_graph(&p4);
        assert_eq!((lp.graph.node_count(), lp.graph.edge_count()), (3, 2));
        let mid = lp.node_of[&Edge(n(1), n(2))];
        assert_eq!(lp.graph.degree(mid), 2);

        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let ls = line_graph(&star);
        assert_eq!((ls.graph.node_count(), ls.graph.edge_count()), (4, 6));
    }

    #[test]
    fn matching_examples() {
        let e = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let le = line_graph(&e);
        let m = matching_via_line_graph(&le, &PriorityMap::identity(le.graph.nodes()));
        assert_eq!(m, BTreeSet::from([Edge(n(0), n(1))]));

        let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let lp = line_graph(&path);
        let e1 = lp.node_of[&Edge(n(0), n(1))];
        let e2 = lp.node_of[&Edge(n(1), n(2))];
        let m = matching_via_line_graph(&lp, &PriorityMap::from_order(&[e1, e2]));
        assert_eq!(m, BTreeSet::from([Edge(n(0), n(1))]));
        assert!(is_maximal_matching(&path, &m));
        assert!(!is_maximal_matching(&path, &BTreeSet::new()));
    }

    #[test]
    fn dynamic_matching_tracks_node_changes() {
        let mut dm = DynamicMatching::new(ProtocolKind::FourState, PrioritySource::sequential(5));
        for v in 0..4 {
            let nbrs: Vec<NodeId> = (0..v).map(NodeId).collect();
            dm.apply(&TopologyChange::NodeInsert { v: n(v), nbrs }).unwrap();
            assert!(is_maximal_matching(dm.graph(), &dm.matching()));
        }
        assert_eq!(dm.matching().len(), 2);
        dm.add_muted(n(9), &[n(0), n(1)]).unwrap();
        let reports = dm.apply(&TopologyChange::NodeDeleteAbrupt { v: n(2) }).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(is_maximal_matching(dm.graph(), &dm.matching()));
        dm.apply(&TopologyChange::NodeUnmute { v: n(9) }).unwrap();
        assert!(is_maximal_matching(dm.graph(), &dm.matching()));
        dm.apply(&TopologyChange::NodeDeleteGraceful { v: n(0) }).unwrap();
        assert!(is_maximal_matching(dm.graph(), &dm.matching()));
    }
}
