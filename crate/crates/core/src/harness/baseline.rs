//! A deterministic dynamic MIS: the same lazy template, ordered by node id.

use crate::engine::Simulator;
use crate::error::EngineError;
use crate::graph::{Graph, PrioritySource, TopologyChange};
use crate::oracle::MisAssignment;
use crate::protocol::ProtocolKind;

use super::scenario::{Scenario, Step};
use super::HarnessError;

fn simulator(g: Graph) -> Simulator {
    Simulator::seeded(g, ProtocolKind::Template, PrioritySource::Identity)
}

/// Stable assignment after applying `c` to `g`, where the lower id always wins.
pub fn deterministic_baseline(g: &Graph, c: &TopologyChange) -> Result<MisAssignment, EngineError> {
    let mut sim = simulator(g.clone());
    sim.apply(c)?;
    Ok(sim.assignment().clone())
}

/// Adjustments of every change of `sc` under the id order.
pub fn baseline_adjustments(sc: &Scenario) -> Result<Vec<u64>, HarnessError> {
    sc.validate()?;
    let g = sc.initial.build().map_err(|source| HarnessError::Invalid { step: 0, source })?;
    let mut sim = simulator(g);
    let mut out = Vec::new();
    for step in &sc.steps {
        let change_idx = out.len();
        let engine = |source| HarnessError::Engine { trial: 0, change_idx, source };
        match step {
            Step::AddMuted(m) => sim.add_muted(m.v, &m.nbrs).map_err(engine)?,
            Step::Change(c) => {
                let adjustments = sim.apply(c).map_err(engine)?.metrics.adjustments;
                out.push(adjustments);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeId;
    use crate::harness::generate::{generate_scenario, ScenarioKind};

    #[test]
    fn lower_side_wins_then_flips_together() {
        let mut g = Graph::new();
        for v in 1..=6 {
            g.add_node(NodeId(v)).unwrap();
        }
        for l in 1..=3 {
            for r in 4..=6 {
                g.add_edge(NodeId(l), NodeId(r)).unwrap();
            }
        }
        let a = deterministic_baseline(&g, &TopologyChange::NodeDeleteGraceful { v: NodeId(1) }).unwrap();
        assert_eq!(a.in_set(), [2, 3].map(NodeId).into());

        let sc = generate_scenario(ScenarioKind::BipartiteKk { k: 3 }, 0).unwrap();
        let adj = baseline_adjustments(&sc).unwrap();
        assert_eq!(&adj[6..], &[0, 0, 3]);
    }
}
