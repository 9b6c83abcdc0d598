use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dynmis::harness::demos;
use dynmis::harness::runner::{write_records, write_round_logs, write_summary, RunConfig, Schedule};
use dynmis::harness::{generate_scenario, run_scenario, HarnessError, Scenario, ScenarioKind};
use dynmis::ProtocolKind;

#[derive(Parser, Debug)]
#[command(name = "dynmis", version, about = "Dynamic MIS simulator and experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario file (JSON lines) for a number of trials.
    Run {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Generate scenarios over a parameter grid and run each one.
    Sweep {
        #[arg(long, value_enum)]
        generator: Generator,
        /// Node counts (star, gnp-churn).
        #[arg(long, value_delimiter = ',', default_value = "50")]
        n: Vec<u64>,
        /// Edge probabilities (gnp-churn).
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        p: Vec<f64>,
        /// Churn steps (gnp-churn).
        #[arg(long, value_delimiter = ',', default_value = "100")]
        steps: Vec<u64>,
        /// Side sizes (bipartite-kk).
        #[arg(long, value_delimiter = ',', default_value = "20")]
        k: Vec<u64>,
        /// Path counts (three-paths).
        #[arg(long, value_delimiter = ',', default_value = "10")]
        paths: Vec<u64>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Write a generated scenario as JSON lines.
    Generate {
        #[arg(long, value_enum)]
        generator: Generator,
        #[arg(long, default_value_t = 50)]
        n: u64,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long, default_value_t = 100)]
        steps: u64,
        #[arg(long, default_value_t = 20)]
        k: u64,
        #[arg(long, default_value_t = 10)]
        paths: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one of the named experiments and print its report as JSON.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
        #[arg(long, value_enum, default_value_t = Protocol::FourState)]
        protocol: Protocol,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunOpts {
    #[arg(long, value_enum, default_value_t = Protocol::FourState)]
    protocol: Protocol,
    #[arg(long, value_enum, default_value_t = ModeArg::Sync)]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for records.csv, summary.csv and rounds.jsonl.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep per-round logs and write them as JSON lines.
    #[arg(long)]
    debug_rounds: bool,
    /// Check the MIS invariant on every node after every change.
    #[arg(long)]
    full_check: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Protocol {
    Template,
    FourState,
}

impl From<Protocol> for ProtocolKind {
    fn from(p: Protocol) -> Self {
        match p {
            Protocol::Template => ProtocolKind::Template,
            Protocol::FourState => ProtocolKind::FourState,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Sync,
    Async,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Generator {
    Star,
    ThreePaths,
    BipartiteKk,
    GnpChurn,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DemoName {
    Star,
    ThreePaths,
    BipartiteSeparation,
    HistoryIndependence,
    ClusteringApprox,
}

impl RunOpts {
    fn config(&self) -> RunConfig {
        RunConfig {
            kind: self.protocol.into(),
            schedule: match self.mode {
                ModeArg::Sync => Schedule::Sync,
                ModeArg::Async => Schedule::Async,
            },
            trials: self.trials,
            seed: self.seed,
            full_check: self.full_check,
            debug_rounds: self.debug_rounds,
        }
    }
}

fn scenario_kind(generator: Generator, n: u64, p: f64, steps: u64, k: u64, paths: u64) -> ScenarioKind {
    match generator {
        Generator::Star => ScenarioKind::Star { n },
        Generator::ThreePaths => ScenarioKind::ThreePaths { paths },
        Generator::BipartiteKk => ScenarioKind::BipartiteKk { k },
        Generator::GnpChurn => ScenarioKind::GnpChurn { n, p, steps },
    }
}

fn grid(generator: Generator, n: &[u64], p: &[f64], steps: &[u64], k: &[u64], paths: &[u64]) -> Vec<ScenarioKind> {
    let mut out = Vec::new();
    match generator {
        Generator::Star => out.extend(n.iter().map(|&n| ScenarioKind::Star { n })),
        Generator::ThreePaths => out.extend(paths.iter().map(|&paths| ScenarioKind::ThreePaths { paths })),
        Generator::BipartiteKk => out.extend(k.iter().map(|&k| ScenarioKind::BipartiteKk { k })),
        Generator::GnpChurn => {
            for &n in n {
                for &p in p {
                    for &steps in steps {
                        out.push(ScenarioKind::GnpChurn { n, p, steps });
                    }
                }
            }
        }
    }
    out
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => writeln!(io::stdout().lock(), "{text}")?,
    }
    Ok(())
}

fn run_and_write(scenarios: &[Scenario], opts: &RunOpts) -> anyhow::Result<()> {
    let cfg = opts.config();
    let mut records = Vec::new();
    let mut logs = Vec::new();
    let mut summaries = Vec::new();
    for sc in scenarios {
        let out = run_scenario(sc, &cfg)?;
        summaries.push((sc.name.clone(), out.stats.clone(), out.final_mis_summary()));
        records.extend(out.stats.records);
        logs.extend(out.round_logs);
    }
    match &opts.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_records(File::create(dir.join("records.csv"))?, &records)?;
            let runs = summaries.iter().map(|(name, stats, _)| (name.as_str(), stats));
            write_summary(File::create(dir.join("summary.csv"))?, runs)?;
            if opts.debug_rounds {
                write_round_logs(File::create(dir.join("rounds.jsonl"))?, &logs)?;
            }
        }
        None => {
            let stdout = io::stdout();
            write_records(stdout.lock(), &records)?;
            if opts.debug_rounds {
                write_round_logs(stdout.lock(), &logs)?;
            }
        }
    }
    for (name, stats, mis) in &summaries {
        eprintln!(
            "{name}: {} changes, adjustments {:.4} ± {:.4}, rounds {:.4}, broadcasts {:.4}, final MIS {:.3}",
            stats.records.len(),
            stats.adjustments.mean,
            stats.adjustments.std_err,
            stats.rounds.mean,
            stats.broadcasts.mean,
            mis.mean,
        );
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { file, opts } => {
            let name = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let reader = BufReader::new(File::open(&file).map_err(|e| HarnessError::Io(format!("{}: {e}", file.display())))?);
            let sc = Scenario::from_jsonl(name, reader)?;
            run_and_write(&[sc], &opts)
        }
        Command::Sweep { generator, n, p, steps, k, paths, opts } => {
            let scenarios = grid(generator, &n, &p, &steps, &k, &paths)
                .into_iter()
                .map(|kind| generate_scenario(kind, opts.seed))
                .collect::<Result<Vec<_>, _>>()?;
            run_and_write(&scenarios, &opts)
        }
        Command::Generate { generator, n, p, steps, k, paths, seed, out } => {
            let sc = generate_scenario(scenario_kind(generator, n, p, steps, k, paths), seed)?;
            match out {
                Some(path) => sc.to_jsonl(File::create(&path).with_context(|| format!("creating {}", path.display()))?)?,
                None => sc.to_jsonl(io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Demo { name, protocol, trials, seed, out } => {
            let kind = protocol.into();
            let out = out.as_deref();
            match name {
                DemoName::Star => emit_json(&demos::star_demo(100, trials, seed, kind)?, out),
                DemoName::ThreePaths => {
                    emit_json(&demos::three_paths_demo(500, trials, trials.min(20), seed, kind)?, out)
                }
                DemoName::BipartiteSeparation => emit_json(&demos::bipartite_separation_demo(20, trials, seed, kind)?, out),
                DemoName::HistoryIndependence => {
                    let reports = demos::history_demo(10, 8, 0.3, 100, trials.min(100), seed, kind)?;
                    emit_json(&reports, out)?;
                    let mismatches: usize = reports.iter().map(|r| r.mismatches()).sum();
                    if mismatches > 0 {
                        return Err(HarnessError::HistoryMismatch { count: mismatches }.into());
                    }
                    Ok(())
                }
                DemoName::ClusteringApprox => emit_json(&demos::clustering_demo(50, 8, trials, seed)?, out),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<HarnessError>().map_or(2, HarnessError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
