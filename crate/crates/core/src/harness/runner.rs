//! Trial runs over a scenario, per-change records and their aggregates.
//!
//! Trial `t` seeds its priorities with `initial.seeds[t]` when the scenario
//! lists seeds and `base_seed + t` otherwise. In asynchronous mode the
//! scheduler seed of each change is drawn from a second stream of the same
//! seed, so a trial is reproducible on its own.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{ChangeReport, Mode, RoundLog, Simulator};
use crate::graph::PrioritySource;
use crate::protocol::ProtocolKind;
use crate::stats::{quantile, Accumulator, Summary};

use super::scenario::{Scenario, Step};
use super::HarnessError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    #[default]
    Sync,
    Async,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub kind: ProtocolKind,
    pub schedule: Schedule,
    pub trials: u64,
    pub seed: u64,
    /// Check every node after every change rather than the touched ones.
    pub full_check: bool,
    /// Keep synchronous round logs.
    pub debug_rounds: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kind: ProtocolKind::FourState,
            schedule: Schedule::Sync,
            trials: 1,
            seed: 0,
            full_check: false,
            debug_rounds: false,
        }
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeRecord {
    pub scenario: String,
    pub trial: u64,
    pub change_idx: usize,
    pub change_type: String,
    pub adjustments: u64,
    pub rounds: u32,
    pub broadcasts: u64,
    #[serde(rename = "S_size")]
    pub s_size: usize,
}

impl ChangeRecord {
    fn new(scenario: &str, trial: u64, change_idx: usize, r: &ChangeReport) -> Self {
        ChangeRecord {
            scenario: scenario.to_string(),
            trial,
            change_idx,
            change_type: r.change.kind().to_string(),
            adjustments: r.metrics.adjustments,
            rounds: r.metrics.rounds,
            broadcasts: r.metrics.broadcasts,
            s_size: r.influenced.len(),
        }
    }
}

/// A round log tagged with where it came from, for the JSONL debug stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedRoundLog {
    pub trial: u64,
    pub change_idx: usize,
    #[serde(flatten)]
    pub log: RoundLog,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub records: Vec<ChangeRecord>,
    pub adjustments: Summary,
    pub rounds: Summary,
    pub broadcasts: Summary,
    pub s_size: Summary,
    /// Tail of the per-change adjustment distribution; reported only.
    pub adjustment_tail: Quantiles,
}

impl TrialStats {
    pub fn from_records(records: Vec<ChangeRecord>) -> Self {
        let col = |f: fn(&ChangeRecord) -> f64| records.iter().map(f).collect::<Accumulator>().summary();
        let adjustments = col(|r| r.adjustments as f64);
        let rounds = col(|r| r.rounds as f64);
        let broadcasts = col(|r| r.broadcasts as f64);
        let s_size = col(|r| r.s_size as f64);
        let mut adj: Vec<f64> = records.iter().map(|r| r.adjustments as f64).collect();
        let adjustment_tail = Quantiles {
            p50: quantile(&mut adj, 0.5),
            p90: quantile(&mut adj, 0.9),
            p99: quantile(&mut adj, 0.99),
            max: adj.last().copied().unwrap_or(0.0),
        };
        TrialStats { records, adjustments, rounds, broadcasts, s_size, adjustment_tail }
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub stats: TrialStats,
    /// Final MIS size of each trial.
    pub final_mis: Vec<usize>,
    pub round_logs: Vec<TaggedRoundLog>,
}

impl RunOutput {
    pub fn final_mis_summary(&self) -> Summary {
        self.final_mis.iter().map(|&s| s as f64).collect::<Accumulator>().summary()
    }
}

struct TrialResult {
    records: Vec<ChangeRecord>,
    final_mis: usize,
    logs: Vec<TaggedRoundLog>,
}

pub fn trial_seed(sc: &Scenario, base: u64, trial: u64) -> u64 {
    sc.initial.seeds.get(trial as usize).copied().unwrap_or_else(|| base.wrapping_add(trial))
}

fn run_trial(sc: &Scenario, cfg: &RunConfig, trial: u64) -> Result<TrialResult, HarnessError> {
    let seed = trial_seed(sc, cfg.seed, trial);
    let graph = sc.initial.build().map_err(|source| HarnessError::Invalid { step: 0, source })?;
    let mut sim = Simulator::seeded(graph, cfg.kind, PrioritySource::sequential(seed))
        .with_full_check(cfg.full_check)
        .with_logs(cfg.debug_rounds);
    let mut scheduler = ChaCha8Rng::seed_from_u64(seed);
    scheduler.set_stream(1);

    let mut records = Vec::with_capacity(sc.steps.len());
    let mut logs = Vec::new();
    let mut change_idx = 0;
    for (step_idx, step) in sc.steps.iter().enumerate() {
        match step {
            Step::AddMuted(m) => {
                sim.add_muted(m.v, &m.nbrs).map_err(|source| HarnessError::Engine { trial, change_idx, source })?;
            }
            Step::Change(c) => {
                if cfg.schedule == Schedule::Async {
                    sim.set_mode(Mode::Async { seed: scheduler.random() });
                }
                let report = sim.apply(c).map_err(|source| match source {
                    crate::error::EngineError::Graph(g) => HarnessError::Invalid { step: step_idx + 1, source: g },
                    source => HarnessError::Engine { trial, change_idx, source },
                })?;
                records.push(ChangeRecord::new(&sc.name, trial, change_idx, &report));
                logs.extend(report.logs.into_iter().map(|log| TaggedRoundLog { trial, change_idx, log }));
                change_idx += 1;
            }
        }
    }
    let final_mis = sim.assignment().iter().filter(|&(_, is_in)| is_in).count();
    Ok(TrialResult { records, final_mis, logs })
}

/// Runs every trial of `sc` in parallel and gathers the results in trial order.
pub fn run_scenario(sc: &Scenario, cfg: &RunConfig) -> Result<RunOutput, HarnessError> {
    sc.validate()?;
    if cfg.schedule == Schedule::Async && cfg.kind == ProtocolKind::FourState {
        return Err(HarnessError::Params("the asynchronous schedule runs the template protocol only".into()));
    }
    let results: Vec<TrialResult> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(sc, cfg, t)).collect::<Result<_, _>>()?;
    let mut out = RunOutput::default();
    let mut records = Vec::new();
    for r in results {
        records.extend(r.records);
        out.final_mis.push(r.final_mis);
        out.round_logs.extend(r.logs);
    }
    out.stats = TrialStats::from_records(records);
    Ok(out)
}

pub fn write_records<W: Write>(w: W, records: &[ChangeRecord]) -> Result<(), HarnessError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ChangeRecord>, HarnessError> {
    let mut rd = csv::Reader::from_path(path)?;
    rd.deserialize().map(|r| r.map_err(HarnessError::from)).collect()
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    scenario: &'a str,
    metric: &'a str,
    count: u64,
    mean: f64,
    std_err: f64,
    min: f64,
    max: f64,
}

/// Aggregate table: one row per scenario and metric.
pub fn write_summary<'a, W: Write>(
    w: W,
    runs: impl IntoIterator<Item = (&'a str, &'a TrialStats)>,
) -> Result<(), HarnessError> {
    let mut wr = csv::Writer::from_writer(w);
    for (scenario, stats) in runs {
        for (metric, s) in [
            ("adjustments", &stats.adjustments),
            ("rounds", &stats.rounds),
            ("broadcasts", &stats.broadcasts),
            ("S_size", &stats.s_size),
        ] {
            let row = SummaryRow { scenario, metric, count: s.count, mean: s.mean, std_err: s.std_err, min: s.min, max: s.max };
            wr.serialize(row)?;
        }
    }
    wr.flush()?;
    Ok(())
}

pub fn write_round_logs<W: Write>(mut w: W, logs: &[TaggedRoundLog]) -> Result<(), HarnessError> {
    for log in logs {
        let line = serde_json::to_string(log).map_err(|e| HarnessError::Io(e.to_string()))?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::{generate_scenario, ScenarioKind};

    #[test]
    fn empty_scenario_gives_empty_stats() {
        let out = run_scenario(&Scenario::new("e"), &RunConfig { trials: 3, ..RunConfig::default() }).unwrap();
        assert!(out.stats.is_empty());
        assert_eq!(out.final_mis, vec![0, 0, 0]);
        assert_eq!(out.stats.adjustments.count, 0);
    }

    #[test]
    fn csv_round_trip_reproduces_aggregates() {
        let sc = generate_scenario(ScenarioKind::GnpChurn { n: 20, p: 0.2, steps: 40 }, 3).unwrap();
        let cfg = RunConfig { trials: 4, seed: 9, ..RunConfig::default() };
        let out = run_scenario(&sc, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        write_records(std::fs::File::create(&path).unwrap(), &out.stats.records).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(back, out.stats.records);
        assert_eq!(TrialStats::from_records(back), out.stats);
    }

    #[test]
    fn runs_are_reproducible_and_seeded_per_trial() {
        let sc = generate_scenario(ScenarioKind::Star { n: 12 }, 0).unwrap();
        let cfg = RunConfig { trials: 5, seed: 100, ..RunConfig::default() };
        let a = run_scenario(&sc, &cfg).unwrap();
        let b = run_scenario(&sc, &cfg).unwrap();
        assert_eq!(a, b);
        let shifted = run_scenario(&sc, &RunConfig { trials: 4, seed: 101, ..cfg }).unwrap();
        assert_eq!(&a.final_mis[1..], &shifted.final_mis[..]);
    }

    #[test]
    fn async_template_matches_sync_final_state() {
        let sc = generate_scenario(ScenarioKind::GnpChurn { n: 15, p: 0.2, steps: 30 }, 5).unwrap();
        let sync = RunConfig { kind: ProtocolKind::Template, trials: 3, seed: 1, ..RunConfig::default() };
        let asy = RunConfig { schedule: Schedule::Async, ..sync };
        let a = run_scenario(&sc, &sync).unwrap();
        let b = run_scenario(&sc, &asy).unwrap();
        assert_eq!(a.final_mis, b.final_mis);
        let adj = |o: &RunOutput| o.stats.records.iter().map(|r| r.adjustments).collect::<Vec<_>>();
        assert_eq!(adj(&a), adj(&b));
        assert!(run_scenario(&sc, &RunConfig { kind: ProtocolKind::FourState, ..asy }).is_err());
    }

    #[test]
    fn debug_rounds_emit_logs() {
        let sc = generate_scenario(ScenarioKind::Star { n: 3 }, 0).unwrap();
        let out = run_scenario(&sc, &RunConfig { debug_rounds: true, ..RunConfig::default() }).unwrap();
        assert!(!out.round_logs.is_empty());
        let mut buf = Vec::new();
        write_round_logs(&mut buf, &out.round_logs).unwrap();
        let first: serde_json::Value = serde_json::from_slice(buf.split(|&b| b == b'\n').next().unwrap()).unwrap();
        assert!(first.get("round").is_some() && first.get("trial").is_some());
    }
}
