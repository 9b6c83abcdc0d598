//! History independence: different construction sequences of one graph end
//! in the same MIS once the priorities are fixed.
//!
//! Priorities come from [`PrioritySource::Keyed`], so a node's priority
//! depends only on the seed and its id, whatever order nodes are created in.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::Serialize;

use crate::engine::Simulator;
use crate::graph::{Edge, Graph, NodeId, PriorityMap, PrioritySource, TopologyChange};
use crate::oracle::greedy_mis;
use crate::protocol::ProtocolKind;

use super::scenario::{MutedSpec, Scenario, Step};
use super::HarnessError;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SeedResult {
    pub seed: u64,
    /// Sequences whose final MIS differs from the greedy MIS of the target.
    pub mismatches: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HistoryReport {
    pub sequences: usize,
    pub per_seed: Vec<SeedResult>,
}

impl HistoryReport {
    pub fn mismatches(&self) -> usize {
        self.per_seed.iter().map(|s| s.mismatches).sum()
    }

    pub fn passed(&self) -> bool {
        self.mismatches() == 0
    }
}

/// Replays every sequence under every seed and compares the final MIS with
/// the greedy MIS of `target` under the same priorities.
pub fn history_independence_demo(
    target: &Graph,
    sequences: &[Scenario],
    seeds: &[u64],
    kind: ProtocolKind,
) -> Result<HistoryReport, HarnessError> {
    for (i, sc) in sequences.iter().enumerate() {
        if sc.validate()? != *target {
            return Err(HarnessError::WrongTarget { sequence: i });
        }
    }
    let mut report = HistoryReport { sequences: sequences.len(), per_seed: Vec::with_capacity(seeds.len()) };
    for &seed in seeds {
        let mut p = PriorityMap::new();
        let mut source = PrioritySource::Keyed(seed);
        for v in target.all_nodes() {
            p.set_draw(v, source.draw(v));
        }
        let expected = greedy_mis(target, &p);
        let mut mismatches = 0;
        for sc in sequences {
            let g = sc.initial.build().map_err(|source| HarnessError::Invalid { step: 0, source })?;
            let mut sim = Simulator::seeded(g, kind, PrioritySource::Keyed(seed));
            for (change_idx, step) in sc.steps.iter().enumerate() {
                let engine = |source| HarnessError::Engine { trial: seed, change_idx, source };
                match step {
                    Step::AddMuted(m) => sim.add_muted(m.v, &m.nbrs).map_err(engine)?,
                    Step::Change(c) => {
                        sim.apply(c).map_err(engine)?;
                    }
                }
            }
            if *sim.assignment() != expected {
                mismatches += 1;
            }
        }
        report.per_seed.push(SeedResult { seed, mismatches });
    }
    Ok(report)
}

/// A random sequence of changes, starting from the empty graph, that ends in
/// `target`. Nodes arrive in random order, some muted and unmuted later,
/// with part of their edges deferred. Temporary nodes and edges come and go
/// along the way; temporary nodes take ids above every id of `target`.
pub fn random_construction<R: Rng + ?Sized>(target: &Graph, name: &str, rng: &mut R) -> Scenario {
    let mut sc = Scenario::new(name);
    let mut g = Graph::new();
    let mut next_temp = target.all_nodes().map(|v| v.0 + 1).max().unwrap_or(0);
    let mut order: Vec<NodeId> = target.nodes().collect();
    order.shuffle(rng);

    let mut deferred: Vec<Edge> = Vec::new();
    let mut muted: Vec<NodeId> = Vec::new();
    let apply = |g: &mut Graph, sc: &mut Scenario, c: TopologyChange| {
        g.apply(&c).expect("construction step is valid");
        sc.push(c);
    };

    for &v in &order {
        let (now, later): (Vec<NodeId>, Vec<NodeId>) = target
            .neighbors(v)
            .filter(|&u| g.contains(u))
            .partition(|&u| g.is_visible(u) && rng.random_bool(0.6));
        deferred.extend(later.into_iter().map(|u| Edge::new(u, v)));
        if rng.random_bool(0.25) {
            g.add_muted(v, &now).expect("fresh muted node");
            sc.steps.push(Step::AddMuted(MutedSpec { v, nbrs: now }));
            muted.push(v);
        } else {
            apply(&mut g, &mut sc, TopologyChange::NodeInsert { v, nbrs: now });
        }

        if !muted.is_empty() && rng.random_bool(0.5) {
            let u = muted.swap_remove(rng.random_range(0..muted.len()));
            apply(&mut g, &mut sc, TopologyChange::NodeUnmute { v: u });
        }
        let visible: Vec<NodeId> = g.nodes().collect();
        if rng.random_bool(0.2) {
            let t = NodeId(next_temp);
            next_temp += 1;
            let nbrs: Vec<NodeId> = visible.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            apply(&mut g, &mut sc, TopologyChange::NodeInsert { v: t, nbrs });
            let del = if rng.random_bool(0.5) {
                TopologyChange::NodeDeleteGraceful { v: t }
            } else {
                TopologyChange::NodeDeleteAbrupt { v: t }
            };
            apply(&mut g, &mut sc, del);
        }
        if rng.random_bool(0.2) && visible.len() >= 2 {
            let (&a, &b) = (visible.choose(rng).expect("non-empty"), visible.choose(rng).expect("non-empty"));
            if a != b && !g.has_edge(a, b) && !target.has_edge(a, b) {
                apply(&mut g, &mut sc, TopologyChange::EdgeInsert { u: a, v: b });
                let del = if rng.random_bool(0.5) {
                    TopologyChange::EdgeDeleteGraceful { u: a, v: b }
                } else {
                    TopologyChange::EdgeDeleteAbrupt { u: a, v: b }
                };
                apply(&mut g, &mut sc, del);
            }
        }
    }
    muted.shuffle(rng);
    for u in muted {
        apply(&mut g, &mut sc, TopologyChange::NodeUnmute { v: u });
    }
    deferred.shuffle(rng);
    for e in deferred {
        apply(&mut g, &mut sc, TopologyChange::EdgeInsert { u: e.0, v: e.1 });
    }
    sc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn path_builds(n: u64, reverse: bool) -> Scenario {
        let mut sc = Scenario::new("path");
        let ids: Vec<u64> = if reverse { (0..n).rev().collect() } else { (0..n).collect() };
        for (i, &v) in ids.iter().enumerate() {
            let nbrs = if i == 0 { vec![] } else { vec![NodeId(ids[i - 1])] };
            sc.push(TopologyChange::NodeInsert { v: NodeId(v), nbrs });
        }
        sc
    }

    #[test]
    fn path_directions_agree() {
        let target = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let seqs = [path_builds(5, false), path_builds(5, true)];
        let seeds: Vec<u64> = (0..30).collect();
        for kind in [ProtocolKind::Template, ProtocolKind::FourState] {
            let r = history_independence_demo(&target, &seqs, &seeds, kind).unwrap();
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn triangle_orders_agree() {
        let target = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let mut a = Scenario::new("nodes-first");
        for v in 0..3 {
            a.push(TopologyChange::NodeInsert { v: NodeId(v), nbrs: vec![] });
        }
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            a.push(TopologyChange::EdgeInsert { u: NodeId(u), v: NodeId(v) });
        }
        let mut b = Scenario::new("attached");
        b.push(TopologyChange::NodeInsert { v: NodeId(2), nbrs: vec![] });
        b.push(TopologyChange::NodeInsert { v: NodeId(0), nbrs: vec![NodeId(2)] });
        b.push(TopologyChange::NodeInsert { v: NodeId(1), nbrs: vec![NodeId(0), NodeId(2)] });
        let r = history_independence_demo(&target, &[a, b], &(0..50).collect::<Vec<_>>(), ProtocolKind::FourState)
            .unwrap();
        assert!(r.passed());
    }

    #[test]
    fn random_constructions_hit_the_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let target = super::super::generate::gnp(8, 0.3, &mut rng);
        let seqs: Vec<Scenario> = (0..20).map(|i| random_construction(&target, &format!("c{i}"), &mut rng)).collect();
        assert!(seqs.iter().any(|s| s.steps.iter().any(|st| matches!(st, Step::AddMuted(_)))));
        let r = history_independence_demo(&target, &seqs, &[1, 2, 3], ProtocolKind::FourState).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn wrong_target_is_reported() {
        let target = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let err = history_independence_demo(&target, &[path_builds(3, false)], &[0], ProtocolKind::Template);
        assert!(matches!(err, Err(HarnessError::WrongTarget { sequence: 0 })));
    }
}
