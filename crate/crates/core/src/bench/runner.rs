//! Multi-seed experiments: run a strategy on an environment, score every
//! selection against the oracle target, and write traces, aggregates, plot
//! and summary.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bench::catalog;
use crate::bench::factory::{StrategyFactory, StrategyParams, StrategySpec};
use crate::bench::stats::{mean, stderr};
use crate::bench::svg::{line_plot, Curve};
use crate::cspace::{planner_rng, CSpace, CSpaceParams, Task};
use crate::error::{GuideError, Result};
use crate::geometry::EnvironmentDesc;
use crate::metric::oracle::load_or_build;
use crate::metric::target::suboptimality;
use crate::metric::{sampling_efficiency, target_distribution, GridShape, OracleField, SeMode, TargetParams};
use crate::par::{self, ExecMode};
use crate::strategies::PathDatabase;
use crate::tree::{guided_search_observed, SearchOptions, SearchOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: String,
    pub strategy: String,
    pub seeds: usize,
    /// Seeds run are `seed_offset .. seed_offset + seeds`.
    pub seed_offset: u64,
    pub budget: usize,
    pub metric: SeMode,
    pub target: TargetParams,
    pub grid: GridShape,
    pub strategy_params: StrategyParams,
    pub db_path: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub sequential: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: "simple_passage".into(),
            strategy: "voronoi".into(),
            seeds: 128,
            seed_offset: 0,
            budget: 5000,
            metric: SeMode::Nll,
            target: TargetParams::default(),
            grid: GridShape::default(),
            strategy_params: StrategyParams::default(),
            db_path: None,
            out: None,
            sequential: false,
        }
    }
}

impl ExperimentConfig {
    pub fn new(env: &str, strategy: &str, seeds: usize, budget: usize) -> Self {
        ExperimentConfig { env: env.into(), strategy: strategy.into(), seeds, budget, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GuideError::InvalidParameter(m));
        if self.seeds == 0 {
            return bad("seeds must be >= 1".into());
        }
        if self.budget == 0 {
            return bad("budget must be >= 1".into());
        }
        let t = &self.target;
        if !(t.delta > 0.0 && t.tau > 0.0) {
            return bad("delta and tau must be > 0".into());
        }
        // Trees hold at most budget + 2 nodes (root and goal).
        if !(t.eps > 0.0) || t.eps * (self.budget + 2) as f64 >= 1.0 {
            return bad(format!("eps must satisfy 0 < eps*(budget+2) < 1, got eps={} budget={}", t.eps, self.budget));
        }
        if self.grid.nx == 0 || self.grid.ny == 0 || self.grid.nt == 0 {
            return bad("grid dimensions must be >= 1".into());
        }
        Ok(())
    }

    pub fn exec_mode(&self) -> ExecMode {
        if self.sequential {
            ExecMode::Sequential
        } else {
            ExecMode::Auto
        }
    }
}

/// Every parameter that shaped a run, defaults included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunHeader {
    pub env: String,
    pub strategy: String,
    pub seeds: usize,
    pub seed_offset: u64,
    pub budget: usize,
    pub metric: SeMode,
    pub target: TargetParams,
    pub grid: String,
    pub cspace: CSpaceParams,
    pub strategy_params: StrategyParams,
    pub parallel: bool,
}

impl RunHeader {
    pub fn log(&self) {
        match serde_json::to_string(self) {
            Ok(s) => log::info!("run header: {s}"),
            Err(e) => log::warn!("run header not serializable: {e}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub solved: bool,
    /// Iterations until the goal was connected, or the budget.
    pub samples_to_goal: usize,
    /// Per-iteration sampling efficiency.
    pub se: Vec<f64>,
    /// Smallest smoothed target probability seen in this run.
    pub min_target_prob: f64,
    pub outcome: SearchOutcome,
    pub wall_seconds: f64,
}

impl SeedResult {
    /// Mean SE over the iterations this seed actually ran.
    pub fn whole_run_se(&self) -> f64 {
        mean(&self.se)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub header: RunHeader,
    pub success_rate: f64,
    pub mean_samples_to_goal: f64,
    pub samples_to_goal: Vec<usize>,
    pub whole_run_se: Vec<f64>,
    pub mean_whole_run_se: f64,
    pub min_target_prob: f64,
    pub max_se: f64,
    /// Iteration (1-based) where the mean SE curve peaks.
    pub peak_iteration: usize,
    #[serde(skip)]
    pub mean_se: Vec<f64>,
    #[serde(skip)]
    pub stderr_se: Vec<f64>,
    #[serde(skip)]
    pub success_by_iteration: Vec<f64>,
    pub wall_seconds: WallStats,
}

/// An environment, its oracle and a strategy, ready to run seeds.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub desc: EnvironmentDesc,
    pub cs: CSpace,
    pub task: Task,
    pub oracle: Arc<OracleField>,
    pub factory: StrategyFactory,
}

impl Experiment {
    /// Resolves names, loads or builds the oracle and strategy inputs.
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let desc = catalog::environment(&config.env)?;
        let spec: StrategySpec = config.strategy.parse()?;
        let database = match (&config.db_path, spec.needs_database()) {
            (Some(p), true) => Some(PathDatabase::load(p)?),
            (None, true) => {
                return Err(GuideError::InvalidParameter("strategy pathdb needs a path database (--db FILE)".into()))
            }
            _ => None,
        };
        let (cs, task) = CSpace::from_desc(&desc)?;
        let factory = StrategyFactory::new(spec, config.strategy_params.clone(), &cs, database.as_ref())?;
        let oracle = Arc::new(load_or_build(&cs, &desc, &task.goal, config.grid)?);
        Ok(Experiment { config, desc, cs, task, oracle, factory })
    }

    /// Assembles an experiment from already prepared parts.
    pub fn from_parts(config: ExperimentConfig, desc: EnvironmentDesc, oracle: Arc<OracleField>, factory: StrategyFactory) -> Result<Self> {
        config.validate()?;
        let (cs, task) = CSpace::from_desc(&desc)?;
        Ok(Experiment { config, desc, cs, task, oracle, factory })
    }

    pub fn header(&self) -> RunHeader {
        let c = &self.config;
        RunHeader {
            env: c.env.clone(),
            strategy: self.factory.spec.to_string(),
            seeds: c.seeds,
            seed_offset: c.seed_offset,
            budget: c.budget,
            metric: c.metric,
            target: c.target,
            grid: c.grid.to_string(),
            cspace: *self.cs.params(),
            strategy_params: self.factory.params.clone(),
            parallel: par::is_parallel() && !c.sequential,
        }
    }

    /// One seeded search with per-iteration scoring.
    pub fn run_seed(&self, seed: u64) -> Result<SeedResult> {
        let clock = Instant::now();
        let (cs, task, oracle) = (&self.cs, &self.task, &self.oracle);
        let mode = self.config.metric;
        let params = self.config.target;
        let mut guidance = self.factory.build(cs, task, seed)?;
        let mut rng = planner_rng(seed, 0);
        let opts = SearchOptions { want_distribution: mode.needs_distribution(), keep_distributions: false };
        let mut tau: Vec<f64> = Vec::new();
        let mut delta: Vec<f64> = Vec::new();
        let mut se = Vec::new();
        let mut min_q = f64::INFINITY;
        let outcome = guided_search_observed(cs, task, guidance.as_mut(), self.config.budget, &mut rng, opts, |tree, _, sel| {
            for v in tau.len()..tree.len() {
                tau.push(oracle.query(tree.pose(v)));
            }
            delta.clear();
            delta.extend((0..tree.len()).map(|v| suboptimality(tree.cost_from_root(v), tau[v], tau[0])));
            let target = target_distribution(&delta, &tau[..tree.len()], &params)?;
            min_q = target.probs.iter().copied().fold(min_q, f64::min);
            let dist = sel.distribution.as_ref().map(|d| d.probs());
            se.push(sampling_efficiency(mode, sel.node, dist, &target)?);
            Ok(())
        })?;
        let solved = outcome.solved();
        Ok(SeedResult {
            seed,
            solved,
            samples_to_goal: if solved { outcome.iterations() } else { self.config.budget },
            se,
            min_target_prob: min_q,
            outcome,
            wall_seconds: clock.elapsed().as_secs_f64(),
        })
    }

    /// All configured seeds, in seed order.
    pub fn run_seeds(&self) -> Result<Vec<SeedResult>> {
        let c = &self.config;
        par::map_range(c.exec_mode(), c.seeds, |i| self.run_seed(c.seed_offset + i as u64)).into_iter().collect()
    }

    /// Runs every seed, aggregates, and writes outputs when `config.out` is set.
    pub fn run(&self) -> Result<(RunSummary, Vec<SeedResult>)> {
        let header = self.header();
        header.log();
        let results = self.run_seeds()?;
        let summary = summarize(header, &results);
        if let Some(dir) = &self.config.out {
            write_outputs(dir, &summary, &results)?;
        }
        Ok((summary, results))
    }
}

/// Convenience wrapper: prepare and run.
pub fn run_experiment(config: ExperimentConfig) -> Result<RunSummary> {
    Ok(Experiment::prepare(config)?.run()?.0)
}

/// Mean SE per iteration across seeds; seeds that already finished count
/// as 0. Also returns stderr and the fraction of seeds solved so far.
pub fn aggregate(results: &[SeedResult]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let len = results.iter().map(|r| r.se.len()).max().unwrap_or(0);
    let mut m = Vec::with_capacity(len);
    let mut e = Vec::with_capacity(len);
    let mut s = Vec::with_capacity(len);
    let mut col = vec![0.0; results.len()];
    for i in 0..len {
        for (c, r) in col.iter_mut().zip(results) {
            *c = r.se.get(i).copied().unwrap_or(0.0);
        }
        m.push(mean(&col));
        e.push(stderr(&col));
        let done = results.iter().filter(|r| r.solved && r.samples_to_goal <= i + 1).count();
        s.push(done as f64 / results.len() as f64);
    }
    (m, e, s)
}

pub fn summarize(header: RunHeader, results: &[SeedResult]) -> RunSummary {
    let (mean_se, stderr_se, success_by_iteration) = aggregate(results);
    let walls: Vec<f64> = results.iter().map(|r| r.wall_seconds).collect();
    let samples: Vec<usize> = results.iter().map(|r| r.samples_to_goal).collect();
    let whole: Vec<f64> = results.iter().map(|r| r.whole_run_se()).collect();
    let mut peak = (0, f64::NEG_INFINITY);
    for (i, &v) in mean_se.iter().enumerate() {
        if v > peak.1 {
            peak = (i + 1, v);
        }
    }
    RunSummary {
        header,
        success_rate: results.iter().filter(|r| r.solved).count() as f64 / results.len() as f64,
        mean_samples_to_goal: mean(&samples.iter().map(|&s| s as f64).collect::<Vec<_>>()),
        samples_to_goal: samples,
        mean_whole_run_se: mean(&whole),
        whole_run_se: whole,
        min_target_prob: results.iter().map(|r| r.min_target_prob).fold(f64::INFINITY, f64::min),
        max_se: results.iter().flat_map(|r| r.se.iter().copied()).fold(0.0, f64::max),
        peak_iteration: peak.0,
        mean_se,
        stderr_se,
        success_by_iteration,
        wall_seconds: WallStats {
            mean: mean(&walls),
            min: walls.iter().copied().fold(f64::INFINITY, f64::min),
            max: walls.iter().copied().fold(0.0, f64::max),
            total: walls.iter().sum(),
        },
    }
}

/// Per-iteration trace of one seed, with its SE column.
pub fn write_seed_trace(path: &Path, r: &SeedResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "selected_node", "valid", "new_node", "x", "y", "theta", "selected_prob", "se"])?;
    for (rec, se) in r.outcome.records.iter().zip(&r.se) {
        w.write_record([
            rec.iteration.to_string(),
            rec.selected_node.to_string(),
            (rec.expansion_valid as u8).to_string(),
            rec.new_node.map(|v| v.to_string()).unwrap_or_default(),
            rec.attempted.x.to_string(),
            rec.attempted.y.to_string(),
            rec.attempted.theta.to_string(),
            rec.selected_probability.map(|p| p.to_string()).unwrap_or_default(),
            se.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate(path: &Path, s: &RunSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "mean_se", "stderr", "success_fraction"])?;
    for i in 0..s.mean_se.len() {
        w.write_record([
            (i + 1).to_string(),
            s.mean_se[i].to_string(),
            s.stderr_se[i].to_string(),
            s.success_by_iteration[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an aggregate CSV back as (mean, stderr) columns.
pub fn read_aggregate(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path)?;
    let (mut m, mut e) = (Vec::new(), Vec::new());
    for row in r.records() {
        let row = row?;
        let num = |k: usize| -> Result<f64> {
            row.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| GuideError::InvalidParameter(format!("{}: malformed row", path.display())))
        };
        m.push(num(1)?);
        e.push(num(2)?);
    }
    Ok((m, e))
}

pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const PLOT_FILE: &str = "se.svg";
pub const TRACE_DIR: &str = "traces";

/// Writes `traces/seed_N.csv`, `aggregate.csv`, `se.svg` and `summary.json`.
pub fn write_outputs(dir: &Path, summary: &RunSummary, results: &[SeedResult]) -> Result<()> {
    let traces = dir.join(TRACE_DIR);
    fs::create_dir_all(&traces)?;
    for r in results {
        write_seed_trace(&traces.join(format!("seed_{}.csv", r.seed)), r)?;
    }
    write_aggregate(&dir.join(AGGREGATE_FILE), summary)?;
    let label = format!("{} on {}", summary.header.strategy, summary.header.env);
    let curve = Curve { label, y: summary.mean_se.clone(), band: summary.stderr_se.clone() };
    fs::write(dir.join(PLOT_FILE), line_plot("Sampling efficiency", "iteration", "mean SE (nats)", &[curve]))?;
    fs::write(dir.join(SUMMARY_FILE), serde_json::to_string_pretty(summary)?)?;
    Ok(())
}

/// Regenerates plots from aggregate CSVs under `dir`: one per directory that
/// has an aggregate, plus a combined plot of all of them. Returns the files
/// written.
pub fn plot_dir(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut found = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        if d.join(AGGREGATE_FILE).is_file() {
            found.push(d.clone());
        }
        for entry in fs::read_dir(&d)? {
            let p = entry?.path();
            if p.is_dir() && p.file_name().is_some_and(|n| n != TRACE_DIR) {
                stack.push(p);
            }
        }
    }
    found.sort();
    if found.is_empty() {
        return Err(GuideError::InvalidParameter(format!("no {AGGREGATE_FILE} under {}", dir.display())));
    }
    let mut written = Vec::new();
    let mut curves = Vec::new();
    for d in &found {
        let (m, e) = read_aggregate(&d.join(AGGREGATE_FILE))?;
        let label = d.strip_prefix(dir).ok().and_then(|p| p.to_str()).filter(|s| !s.is_empty()).unwrap_or(".").to_string();
        let curve = Curve { label, y: m, band: e };
        let out = d.join(PLOT_FILE);
        fs::write(&out, line_plot("Sampling efficiency", "iteration", "mean SE (nats)", std::slice::from_ref(&curve)))?;
        written.push(out);
        curves.push(curve);
    }
    if curves.len() > 1 {
        let out = dir.join("combined.svg");
        fs::write(&out, line_plot("Sampling efficiency", "iteration", "mean SE (nats)", &curves))?;
        written.push(out);
    }
    Ok(written)
}
