//! Scenario files: one JSON object per line.
//!
//! ```text
//! {"op":"initial","nodes":[0,1,2],"edges":[[0,1]],"muted":[{"v":5,"nbrs":[0]}]}
//! {"op":"edge_insert","u":1,"v":2}
//! {"op":"node_insert","v":9,"nbrs":[1,2]}
//! {"op":"node_add_muted","v":10,"nbrs":[9]}
//! {"op":"node_unmute","v":10}
//! ```
//!
//! The `initial` line is optional and must come first. `node_add_muted`
//! places a muted node; it is not a topology change and is not measured.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::GraphError;
use crate::graph::{Graph, NodeId, TopologyChange};

use super::HarnessError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutedSpec {
    pub v: NodeId,
    pub nbrs: Vec<NodeId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitialGraph {
    #[serde(default)]
    pub nodes: Vec<NodeId>,
    #[serde(default)]
    pub edges: Vec<(NodeId, NodeId)>,
    #[serde(default)]
    pub muted: Vec<MutedSpec>,
    /// Per-trial seeds; when present they replace `base_seed + trial`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
}

impl InitialGraph {
    pub fn from_graph(g: &Graph) -> Self {
        InitialGraph {
            nodes: g.nodes().collect(),
            edges: g.edges().map(|e| (e.0, e.1)).collect(),
            ..InitialGraph::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty() && self.muted.is_empty() && self.seeds.is_empty()
    }

    pub fn build(&self) -> Result<Graph, GraphError> {
        let mut g = Graph::new();
        for &v in &self.nodes {
            g.add_node(v)?;
        }
        for &(u, v) in &self.edges {
            g.add_edge(u, v)?;
        }
        for m in &self.muted {
            g.add_muted(m.v, &m.nbrs)?;
        }
        Ok(g)
    }

    /// Every id in creation order: visible nodes, then muted ones.
    pub fn node_order(&self) -> Vec<NodeId> {
        self.nodes.iter().copied().chain(self.muted.iter().map(|m| m.v)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Change(TopologyChange),
    AddMuted(MutedSpec),
}

impl Step {
    pub fn change(&self) -> Option<&TopologyChange> {
        match self {
            Step::Change(c) => Some(c),
            Step::AddMuted(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum Directive {
    Initial(InitialGraph),
    NodeAddMuted(MutedSpec),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub initial: InitialGraph,
    pub steps: Vec<Step>,
}

impl Scenario {
    pub fn new(name: impl Into<String>) -> Self {
        Scenario { name: name.into(), ..Scenario::default() }
    }

    pub fn push(&mut self, c: TopologyChange) {
        self.steps.push(Step::Change(c));
    }

    pub fn changes(&self) -> impl Iterator<Item = &TopologyChange> {
        self.steps.iter().filter_map(Step::change)
    }

    pub fn change_count(&self) -> usize {
        self.changes().count()
    }

    /// Parses JSON lines. Blank lines are skipped.
    pub fn from_jsonl<R: BufRead>(name: impl Into<String>, reader: R) -> Result<Self, HarnessError> {
        let mut sc = Scenario::new(name);
        let mut seen_any = false;
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| HarnessError::Io(e.to_string()))?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let malformed = |msg: String| HarnessError::Malformed { line: lineno, msg };
            let value: Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
            let op = value.get("op").and_then(Value::as_str).ok_or_else(|| malformed("missing \"op\"".into()))?;
            match op {
                "initial" | "node_add_muted" => {
                    match serde_json::from_value(value).map_err(|e| malformed(e.to_string()))? {
                        Directive::Initial(init) => {
                            if seen_any {
                                return Err(malformed("\"initial\" must be the first line".into()));
                            }
                            sc.initial = init;
                        }
                        Directive::NodeAddMuted(m) => sc.steps.push(Step::AddMuted(m)),
                    }
                }
                _ => {
                    let c: TopologyChange = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
                    sc.steps.push(Step::Change(c));
                }
            }
            seen_any = true;
        }
        Ok(sc)
    }

    pub fn to_jsonl<W: Write>(&self, mut w: W) -> Result<(), HarnessError> {
        let io = |e: std::io::Error| HarnessError::Io(e.to_string());
        if !self.initial.is_empty() {
            let line = serde_json::to_string(&Directive::Initial(self.initial.clone())).expect("serializable");
            writeln!(w, "{line}").map_err(io)?;
        }
        for step in &self.steps {
            let line = match step {
                Step::Change(c) => serde_json::to_string(c),
                Step::AddMuted(m) => serde_json::to_string(&Directive::NodeAddMuted(m.clone())),
            }
            .expect("serializable");
            writeln!(w, "{line}").map_err(io)?;
        }
        Ok(())
    }

    /// Replays the scenario on a bare graph; returns the final graph.
    pub fn validate(&self) -> Result<Graph, HarnessError> {
        let mut g = self.initial.build().map_err(|source| HarnessError::Invalid { step: 0, source })?;
        let mut retired = BTreeSet::new();
        for (i, step) in self.steps.iter().enumerate() {
            let invalid = |source| HarnessError::Invalid { step: i + 1, source };
            match step {
                Step::Change(c) => {
                    if let TopologyChange::NodeInsert { v, .. } = c {
                        if retired.contains(v) {
                            return Err(invalid(GraphError::ReusedId(*v)));
                        }
                    }
                    g.apply(c).map_err(invalid)?;
                    if c.is_deletion() {
                        if let Some(v) = c.node() {
                            retired.insert(v);
                        }
                    }
                }
                Step::AddMuted(m) => {
                    if retired.contains(&m.v) {
                        return Err(invalid(GraphError::ReusedId(m.v)));
                    }
                    g.add_muted(m.v, &m.nbrs).map_err(invalid)?;
                }
            }
        }
        Ok(g)
    }
}
