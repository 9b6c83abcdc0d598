//! Reproducible scenario generators.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{ChangeKind, Edge, Graph, NodeId, TopologyChange};

use super::scenario::{InitialGraph, MutedSpec, Scenario, Step};
use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Insert a centre, then `n - 1` leaves attached to it.
    Star { n: u64 },
    /// Build `paths` disjoint paths of three edges, nodes first.
    ThreePaths { paths: u64 },
    /// Build K_{k,k} side by side, then delete the first side gracefully.
    BipartiteKk { k: u64 },
    /// Random churn of all seven change types over a G(n, p) substrate.
    GnpChurn { n: u64, p: f64, steps: u64 },
}

fn node(v: u64) -> NodeId {
    NodeId(v)
}

pub fn generate_scenario(kind: ScenarioKind, seed: u64) -> Result<Scenario, HarnessError> {
    match kind {
        ScenarioKind::Star { n } => {
            if n < 1 {
                return Err(HarnessError::Params("star needs n >= 1".into()));
            }
            let mut sc = Scenario::new(format!("star-{n}"));
            sc.push(TopologyChange::NodeInsert { v: node(0), nbrs: vec![] });
            for leaf in 1..n {
                sc.push(TopologyChange::NodeInsert { v: node(leaf), nbrs: vec![node(0)] });
            }
            Ok(sc)
        }
        ScenarioKind::ThreePaths { paths } => {
            if paths < 1 {
                return Err(HarnessError::Params("three_paths needs paths >= 1".into()));
            }
            let mut sc = Scenario::new(format!("three-paths-{paths}"));
            for j in 0..paths {
                let base = 4 * j;
                for v in base..base + 4 {
                    sc.push(TopologyChange::NodeInsert { v: node(v), nbrs: vec![] });
                }
                for v in base..base + 3 {
                    sc.push(TopologyChange::EdgeInsert { u: node(v), v: node(v + 1) });
                }
            }
            Ok(sc)
        }
        ScenarioKind::BipartiteKk { k } => {
            if k < 1 {
                return Err(HarnessError::Params("bipartite_kk needs k >= 1".into()));
            }
            let mut sc = Scenario::new(format!("bipartite-k{k}"));
            let left: Vec<NodeId> = (0..k).map(node).collect();
            for &l in &left {
                sc.push(TopologyChange::NodeInsert { v: l, nbrs: vec![] });
            }
            for r in k..2 * k {
                sc.push(TopologyChange::NodeInsert { v: node(r), nbrs: left.clone() });
            }
            for &l in &left {
                sc.push(TopologyChange::NodeDeleteGraceful { v: l });
            }
            Ok(sc)
        }
        ScenarioKind::GnpChurn { n, p, steps } => {
            if n < 1 {
                return Err(HarnessError::Params("gnp_churn needs n >= 1".into()));
            }
            if !(p > 0.0 && p < 1.0) {
                return Err(HarnessError::Params("gnp_churn needs 0 < p < 1".into()));
            }
            Ok(gnp_churn(n, p, steps, seed))
        }
    }
}

/// Erdős–Rényi G(n, p) on ids `0..n`.
pub fn gnp<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> Graph {
    let mut g = Graph::new();
    for v in 0..n {
        g.add_node(node(v)).expect("fresh id");
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                g.add_edge(node(u), node(v)).expect("new edge");
            }
        }
    }
    g
}

/// Picks a valid change of kind `kind` for `g`, if one exists. New ids are
/// taken from `next_id`.
pub fn random_change<R: Rng + ?Sized>(
    g: &Graph,
    kind: ChangeKind,
    p: f64,
    next_id: &mut u64,
    rng: &mut R,
) -> Option<TopologyChange> {
    let nodes: Vec<NodeId> = g.nodes().collect();
    match kind {
        ChangeKind::EdgeInsert => {
            for _ in 0..64 {
                let (&u, &v) = (nodes.choose(rng)?, nodes.choose(rng)?);
                if u != v && !g.has_edge(u, v) {
                    return Some(TopologyChange::EdgeInsert { u, v });
                }
            }
            None
        }
        ChangeKind::EdgeDeleteGraceful | ChangeKind::EdgeDeleteAbrupt => {
            let edges: Vec<Edge> = g.edges().collect();
            let e = *edges.choose(rng)?;
            Some(if kind == ChangeKind::EdgeDeleteAbrupt {
                TopologyChange::EdgeDeleteAbrupt { u: e.0, v: e.1 }
            } else {
                TopologyChange::EdgeDeleteGraceful { u: e.0, v: e.1 }
            })
        }
        ChangeKind::NodeInsert => {
            let v = node(*next_id);
            *next_id += 1;
            let nbrs = nodes.iter().copied().filter(|_| rng.random_bool(p)).collect();
            Some(TopologyChange::NodeInsert { v, nbrs })
        }
        ChangeKind::NodeDeleteGraceful => Some(TopologyChange::NodeDeleteGraceful { v: *nodes.choose(rng)? }),
        ChangeKind::NodeDeleteAbrupt => Some(TopologyChange::NodeDeleteAbrupt { v: *nodes.choose(rng)? }),
        ChangeKind::NodeUnmute => {
            let muted: Vec<NodeId> = g.muted_nodes().collect();
            Some(TopologyChange::NodeUnmute { v: *muted.choose(rng)? })
        }
    }
}

fn gnp_churn(n: u64, p: f64, steps: u64, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = gnp(n, p, &mut rng);
    let mut sc = Scenario::new(format!("gnp-{n}-{p}-{steps}"));
    sc.initial = InitialGraph::from_graph(&g);
    let mut next_id = n;
    let add_muted = |g: &mut Graph, next_id: &mut u64, rng: &mut ChaCha8Rng| -> MutedSpec {
        let v = node(*next_id);
        *next_id += 1;
        let nbrs: Vec<NodeId> = g.nodes().filter(|_| rng.random_bool(p)).collect();
        g.add_muted(v, &nbrs).expect("fresh muted node");
        MutedSpec { v, nbrs }
    };
    for _ in 0..(n / 10).max(1) {
        let m = add_muted(&mut g, &mut next_id, &mut rng);
        sc.initial.muted.push(m);
    }
    let mut made = 0;
    while made < steps {
        if g.node_count() == 0 {
            let c = TopologyChange::NodeInsert { v: node(next_id), nbrs: vec![] };
            next_id += 1;
            g.apply(&c).expect("valid insert");
            sc.push(c);
            made += 1;
            continue;
        }
        let kind = *ChangeKind::ALL.choose(&mut rng).expect("non-empty");
        let Some(c) = random_change(&g, kind, p, &mut next_id, &mut rng) else {
            continue;
        };
        g.apply(&c).expect("generated change is valid");
        sc.push(c.clone());
        made += 1;
        if c.kind() == ChangeKind::NodeUnmute {
            let m = add_muted(&mut g, &mut next_id, &mut rng);
            sc.steps.push(Step::AddMuted(m));
        }
    }
    sc
}
