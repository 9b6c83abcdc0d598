//! Dynamic maximal independent set maintenance in a broadcast network.
//!
//! The crate keeps a random-greedy MIS up to date under edge and node
//! insertions, deletions and unmutings. It contains:
//!
//! * [`graph`]: dynamic graphs, priorities and topology changes,
//! * [`oracle`]: the sequential greedy reference and the influenced set,
//! * [`protocol`]: the per-node state machines,
//! * [`engine`]: synchronous and asynchronous message-passing simulators,
//! * [`clustering`]: correlation clustering and maximal matching built on the MIS,
//! * [`harness`]: scenarios, generators, trial statistics and demos.

pub mod clustering;
pub mod engine;
pub mod error;
pub mod graph;
pub mod harness;
pub mod oracle;
pub mod protocol;
pub mod stats;

pub use error::{ClusterError, EngineError, GraphError, OracleError};
pub use graph::{apply_change, locus, ChangeKind, Edge, Graph, NodeId, Priority, PriorityMap, PrioritySource, TopologyChange};
pub use oracle::{check_invariant, greedy_mis, influenced_set, s_prime, InfluencedSet, MisAssignment};
pub use engine::{run_async, run_sync, ChangeMetrics, ChangeReport, Mode, Simulator};
pub use protocol::{NodeState, ProtocolKind};
