use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lanemerge_core::closed_loop::episode::initial_world;
use lanemerge_core::closed_loop::{
    plan_cycle, render_plan, run_episode, run_experiment, write_report_json, write_trace_csv, PlannerKind,
    ScenarioConfig,
};
use lanemerge_core::EgoDecision;

#[derive(Parser)]
#[command(name = "lanemerge", version, about = "Game-theoretic lane-merge planner and traffic simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one planning cycle and print the cost matrix and the selection.
    Plan(Common),
    /// Run one closed-loop episode and write its trace as CSV.
    Simulate(Common),
    /// Run the open-loop equilibrium study and the closed-loop planner comparison.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        /// Instances per belief setting and episodes per planner.
        #[arg(long, default_value_t = 500)]
        n: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML). Defaults to the built-in merge scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the planner from the config. For `montecarlo`, restricts the
    /// closed-loop comparison to this planner.
    #[arg(long, value_enum)]
    planner: Option<PlannerArg>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlannerArg {
    Nash,
    StackelbergEv,
    LowestCost,
}

impl From<PlannerArg> for PlannerKind {
    fn from(p: PlannerArg) -> Self {
        match p {
            PlannerArg::Nash => PlannerKind::Nash,
            PlannerArg::StackelbergEv => PlannerKind::StackelbergEv,
            PlannerArg::LowestCost => PlannerKind::LowestCost,
        }
    }
}

impl Common {
    fn scenario(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(p) = self.planner {
            cfg.planner = p.into();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn main() -> Result<()> {
    match run(Cli::parse()) {
        // a closed downstream pipe (e.g. `| head`) is not a failure
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => Ok(()),
        other => other,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan(common) => {
            let cfg = common.scenario()?;
            let world = initial_world(&cfg)?;
            let beliefs = cfg.initial_beliefs(cfg.belief.initial_assert);
            let plan = plan_cycle(&world, &beliefs, EgoDecision::default(), &cfg, cfg.planner)?;
            let mut out = common.output()?;
            writeln!(out, "seed: {}  planner: {}", cfg.seed, cfg.planner.name())?;
            out.write_all(render_plan(&plan).as_bytes())?;
            out.flush()?;
        }
        Command::Simulate(common) => {
            let cfg = common.scenario()?;
            let trace = run_episode(&cfg)?;
            let mut out = common.output()?;
            write_trace_csv(&trace, &mut out)?;
            out.flush()?;
            eprintln!(
                "{} after {} cycles{}",
                trace.outcome.name(),
                trace.cycles.len(),
                trace.time_to_merge.map(|t| format!(", time to merge {t:.1} s")).unwrap_or_default()
            );
        }
        Command::Montecarlo { common, n } => {
            let cfg = common.scenario()?;
            let planners: Vec<PlannerKind> = match common.planner {
                Some(p) => vec![p.into()],
                None => PlannerKind::ALL.to_vec(),
            };
            let report = run_experiment(&cfg, n, &planners)?;
            let mut out = common.output()?;
            write_report_json(&report, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}
