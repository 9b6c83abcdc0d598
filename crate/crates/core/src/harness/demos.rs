//! The named experiments behind `dynmis demo`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clustering::{cc_cost, cluster_from_mis, is_maximal_matching, line_graph, matching_via_line_graph, DynamicMatching};
use crate::graph::{ChangeKind, Graph, NodeId, PriorityMap, PrioritySource};
use crate::oracle::{brute_force_cc_opt, greedy_mis};
use crate::protocol::ProtocolKind;
use crate::stats::{Accumulator, Summary};

use super::baseline::baseline_adjustments;
use super::generate::{generate_scenario, gnp, ScenarioKind};
use super::history::{history_independence_demo, random_construction, HistoryReport};
use super::runner::{run_scenario, RunConfig};
use super::HarnessError;

#[derive(Clone, Debug, Serialize)]
pub struct StarReport {
    pub n: u64,
    pub trials: u64,
    pub final_mis: Summary,
    /// `(n-1)(1-1/n) + 1/n`: the centre is IN with probability `1/n`.
    pub expected: f64,
}

/// Builds a star centre-first and reports the final MIS size.
pub fn star_demo(n: u64, trials: u64, seed: u64, kind: ProtocolKind) -> Result<StarReport, HarnessError> {
    let sc = generate_scenario(ScenarioKind::Star { n }, seed)?;
    let out = run_scenario(&sc, &RunConfig { kind, trials, seed, ..RunConfig::default() })?;
    let nf = n as f64;
    Ok(StarReport { n, trials, final_mis: out.final_mis_summary(), expected: (nf - 1.0) * (1.0 - 1.0 / nf) + 1.0 / nf })
}

#[derive(Clone, Debug, Serialize)]
pub struct ThreePathsReport {
    pub paths: u64,
    pub n: u64,
    pub trials: u64,
    pub matching: Summary,
    /// `5n/12`.
    pub expected: f64,
    pub relative_error: f64,
    /// Trials also run through the dynamic line-graph protocol.
    pub dynamic_trials: u64,
    /// Dynamic trials whose matching equals the static greedy matching
    /// under the same edge priorities and is maximal.
    pub dynamic_agreed: u64,
}

/// Maximal matching of `paths` disjoint three-edge paths through the greedy
/// MIS of the line graph. All trials use fresh edge priorities; the first
/// `dynamic_trials` also build the graph change by change under the protocol.
pub fn three_paths_demo(
    paths: u64,
    trials: u64,
    dynamic_trials: u64,
    seed: u64,
    kind: ProtocolKind,
) -> Result<ThreePathsReport, HarnessError> {
    let sc = generate_scenario(ScenarioKind::ThreePaths { paths }, seed)?;
    let g = sc.validate()?;
    let lg = line_graph(&g);
    let sizes: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t));
            let p = PriorityMap::sample(lg.graph.nodes(), &mut rng);
            matching_via_line_graph(&lg, &p).len() as f64
        })
        .collect();
    let matching = sizes.into_iter().collect::<Accumulator>().summary();

    let agreed: Vec<bool> = (0..dynamic_trials.min(trials))
        .into_par_iter()
        .map(|t| -> Result<bool, HarnessError> {
            let mut dm = DynamicMatching::new(kind, PrioritySource::sequential(seed.wrapping_add(t)));
            for (change_idx, c) in sc.changes().enumerate() {
                dm.apply(c).map_err(|source| HarnessError::Engine { trial: t, change_idx, source })?;
            }
            let mut p = PriorityMap::new();
            for (id, e) in &lg.edge_of {
                let dyn_id = dm.edge_node(*e).expect("edge has a line-graph node");
                let prio = dm.line_simulator().priorities().try_get(dyn_id).expect("line-graph node has a priority");
                p.set_draw(*id, prio.draw);
            }
            let m = dm.matching();
            Ok(m == matching_via_line_graph(&lg, &p) && is_maximal_matching(&g, &m))
        })
        .collect::<Result<_, _>>()?;

    let n = 4 * paths;
    let expected = 5.0 * n as f64 / 12.0;
    Ok(ThreePathsReport {
        paths,
        n,
        trials,
        matching,
        expected,
        relative_error: (matching.mean - expected).abs() / expected,
        dynamic_trials: agreed.len() as u64,
        dynamic_agreed: agreed.iter().filter(|&&a| a).count() as u64,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub k: u64,
    /// Adjustments of each change under the id order.
    pub baseline: Vec<u64>,
    pub baseline_max: u64,
    pub trials: u64,
    /// Per-change adjustments over every change of every randomized trial.
    pub randomized: Summary,
    /// Per-change adjustments over the deletions only.
    pub randomized_deletions: Summary,
    /// Trials whose MIS was the deleted side before the deletions began.
    pub trials_starting_on_deleted_side: u64,
    /// Smallest deletion-phase total among those trials.
    pub min_total_when_starting_on_deleted_side: Option<u64>,
}

/// Builds K_{k,k}, then deletes one side node by node, under the id order
/// and under random priorities.
pub fn bipartite_separation_demo(
    k: u64,
    trials: u64,
    seed: u64,
    kind: ProtocolKind,
) -> Result<SeparationReport, HarnessError> {
    let sc = generate_scenario(ScenarioKind::BipartiteKk { k }, seed)?;
    let baseline = baseline_adjustments(&sc)?;
    let out = run_scenario(&sc, &RunConfig { kind, trials, seed, ..RunConfig::default() })?;
    let records = &out.stats.records;
    let randomized = records.iter().map(|r| r.adjustments as f64).collect::<Accumulator>().summary();
    let deletion = |r: &&super::runner::ChangeRecord| r.change_type == ChangeKind::NodeDeleteGraceful.as_str();
    let randomized_deletions =
        records.iter().filter(deletion).map(|r| r.adjustments as f64).collect::<Accumulator>().summary();

    // The deleted side holds the MIS after construction iff its lowest
    // priority beats the other side's, which the per-trial seed decides.
    let mut starting = 0;
    let mut min_total: Option<u64> = None;
    for t in 0..trials {
        let mut source = PrioritySource::sequential(super::runner::trial_seed(&sc, seed, t));
        let draws: Vec<(u64, NodeId)> = (0..2 * k).map(|v| (source.draw(NodeId(v)), NodeId(v))).collect();
        let lowest = draws.iter().min().expect("k >= 1").1;
        if lowest.0 < k {
            starting += 1;
            let total: u64 = records.iter().filter(|r| r.trial == t).filter(deletion).map(|r| r.adjustments).sum();
            min_total = Some(min_total.map_or(total, |m| m.min(total)));
        }
    }
    Ok(SeparationReport {
        k,
        baseline_max: baseline.iter().copied().max().unwrap_or(0),
        baseline,
        trials,
        randomized,
        randomized_deletions,
        trials_starting_on_deleted_side: starting,
        min_total_when_starting_on_deleted_side: min_total,
    })
}

/// Random G(`nodes`, `p`) targets, each built by `sequences` random
/// constructions and replayed under `seeds` priority seeds.
pub fn history_demo(
    targets: usize,
    nodes: u64,
    p: f64,
    sequences: usize,
    seeds: u64,
    seed: u64,
    kind: ProtocolKind,
) -> Result<Vec<HistoryReport>, HarnessError> {
    (0..targets)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let target = gnp(nodes, p, &mut rng);
            let seqs: Vec<_> =
                (0..sequences).map(|j| random_construction(&target, &format!("target{i}-seq{j}"), &mut rng)).collect();
            let seed_list: Vec<u64> = (0..seeds).map(|_| rng.random()).collect();
            history_independence_demo(&target, &seqs, &seed_list, kind)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusteringGraphReport {
    pub nodes: usize,
    pub edges: usize,
    pub optimum: u64,
    pub cost: Summary,
    /// `cost.mean <= 3 * optimum + 3 * cost.std_err`.
    pub within_bound: bool,
}

/// Correlation clustering around the greedy MIS on random small graphs,
/// against the exhaustive optimum.
pub fn clustering_demo(graphs: usize, max_n: u64, trials: u64, seed: u64) -> Result<Vec<ClusteringGraphReport>, HarnessError> {
    (0..graphs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let n = rng.random_range(2..=max_n);
            let p = rng.random_range(0.2..0.8);
            let g: Graph = gnp(n, p, &mut rng);
            let optimum = brute_force_cc_opt(&g).map_err(|e| HarnessError::Params(e.to_string()))?;
            let mut acc = Accumulator::new();
            for _ in 0..trials {
                let p = PriorityMap::sample(g.nodes(), &mut rng);
                let cl = cluster_from_mis(&g, &p, &greedy_mis(&g, &p)).map_err(|e| HarnessError::Params(e.to_string()))?;
                acc.push(cc_cost(&g, &cl) as f64);
            }
            let cost = acc.summary();
            Ok(ClusteringGraphReport {
                nodes: g.node_count(),
                edges: g.edge_count(),
                optimum,
                cost,
                within_bound: cost.mean <= 3.0 * optimum as f64 + 3.0 * cost.std_err,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_demos_run() {
        let star = star_demo(10, 200, 1, ProtocolKind::FourState).unwrap();
        assert!((star.final_mis.mean - star.expected).abs() < 1.0);

        let tp = three_paths_demo(20, 200, 5, 2, ProtocolKind::FourState).unwrap();
        assert_eq!(tp.dynamic_agreed, tp.dynamic_trials);
        assert!(tp.relative_error < 0.05);

        let sep = bipartite_separation_demo(5, 50, 3, ProtocolKind::FourState).unwrap();
        assert_eq!(sep.baseline_max, 5);
        assert!(sep.min_total_when_starting_on_deleted_side.is_none_or(|m| m >= 5));

        let hist = history_demo(2, 6, 0.3, 5, 5, 4, ProtocolKind::Template).unwrap();
        assert!(hist.iter().all(HistoryReport::passed));

        let cc = clustering_demo(3, 6, 300, 5).unwrap();
        assert!(cc.iter().all(|r| r.within_bound));
    }
}
