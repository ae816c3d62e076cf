//! Path-database size sweep: one database, nested prefixes, fresh instances
//! of the randomized passage family.

use std::fs;
use std::hint::black_box;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::bench::catalog;
use crate::bench::factory::{StrategyFactory, StrategyParams, StrategySpec};
use crate::bench::runner::{Experiment, ExperimentConfig, SeedResult};
use crate::bench::stats::{mean, spearman, stderr, Spearman};
use crate::bench::svg::{line_plot, Curve};
use crate::cspace::{planner_rng, CSpace};
use crate::error::{GuideError, Result};
use crate::metric::oracle::load_or_build;
use crate::metric::{GridShape, SeMode, TargetParams};
use crate::par::{self, ExecMode};
use crate::strategies::{db_build, DbBuildParams, PathDatabase, PreparedDatabase};

/// Evaluation instances use seeds from here upward; database seeds are drawn
/// from the full `u64` range.
pub const EVAL_SEED_BASE: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    /// Evaluation instances per size; the same instances serve every size.
    pub seeds: usize,
    pub budget: usize,
    pub metric: SeMode,
    pub target: TargetParams,
    pub grid: GridShape,
    pub strategy_params: StrategyParams,
    /// Load the database from here instead of building it.
    pub db_path: Option<PathBuf>,
    pub db_seed: u64,
    pub db_params: DbBuildParams,
    pub eval_seed_base: u64,
    /// Repetitions per timing batch are `query_work / size`.
    pub query_work: usize,
    pub out: Option<PathBuf>,
    pub sequential: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            sizes: vec![1, 4, 16, 64, 256],
            seeds: 64,
            budget: 2000,
            metric: SeMode::Nll,
            target: TargetParams::default(),
            grid: GridShape::default(),
            strategy_params: StrategyParams::default(),
            db_path: None,
            db_seed: 0,
            db_params: DbBuildParams::default(),
            eval_seed_base: EVAL_SEED_BASE,
            query_work: 1 << 20,
            out: None,
            sequential: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeResult {
    pub size: usize,
    pub whole_run_se: Vec<f64>,
    pub mean_whole_run_se: f64,
    pub stderr_whole_run_se: f64,
    pub success_rate: f64,
    pub mean_samples_to_goal: f64,
    /// Best-of-batches nanoseconds per database query.
    pub query_ns: f64,
    pub min_target_prob: f64,
    pub max_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub sizes: Vec<SizeResult>,
    /// Rank correlation of size against whole-run SE over all (size, seed) pairs.
    pub spearman: Spearman,
}

impl SweepResult {
    pub fn query_time_strictly_increasing(&self) -> bool {
        self.sizes.windows(2).all(|w| w[1].query_ns > w[0].query_ns)
    }
}

/// Nanoseconds per query, minimum over a few timed batches.
pub fn time_query(cs: &CSpace, db: &PreparedDatabase, work: usize) -> f64 {
    let reps = (work / db.len().max(1)).max(64);
    let alive = vec![true; db.len()];
    let (s, g) = (db.entries[0].start, db.entries[0].goal);
    let mut best = f64::INFINITY;
    for _ in 0..7 {
        let t = Instant::now();
        for _ in 0..reps {
            black_box(db.query(cs, black_box(&s), black_box(&g), black_box(&alive)));
        }
        best = best.min(t.elapsed().as_nanos() as f64 / reps as f64);
    }
    best
}

pub fn load_or_build_database(config: &SweepConfig) -> Result<PathDatabase> {
    let need = config.sizes.iter().copied().max().unwrap_or(0);
    let db = match &config.db_path {
        Some(p) if p.is_file() => PathDatabase::load(p)?,
        _ => {
            let mut rng = planner_rng(config.db_seed, 0);
            let db = db_build(&|s| Ok(catalog::random_simple_passage(s)), need, &mut rng, &config.db_params)?;
            if let Some(p) = &config.db_path {
                db.save(p)?;
            }
            db
        }
    };
    if db.len() < need {
        return Err(GuideError::InvalidParameter(format!("database has {} entries, sweep needs {need}", db.len())));
    }
    Ok(db)
}

pub fn run_pathdb_sweep(config: SweepConfig) -> Result<SweepResult> {
    if config.sizes.is_empty() || config.sizes.contains(&0) {
        return Err(GuideError::InvalidParameter("sizes must be non-empty and positive".into()));
    }
    let base = ExperimentConfig {
        env: "random_simple_passage".into(),
        strategy: "pathdb".into(),
        seeds: 1,
        budget: config.budget,
        metric: config.metric,
        target: config.target,
        grid: config.grid,
        strategy_params: config.strategy_params.clone(),
        sequential: config.sequential,
        ..Default::default()
    };
    base.validate()?;
    let db = load_or_build_database(&config)?;
    let (cs, _) = CSpace::from_desc(&catalog::random_simple_passage(config.eval_seed_base))?;
    let params = config.strategy_params.resolved(&cs);
    let prepared: Vec<Arc<PreparedDatabase>> =
        config.sizes.iter().map(|&n| PreparedDatabase::new(&cs, &db.prefix(n)).map(Arc::new)).collect::<Result<_>>()?;
    let query_ns: Vec<f64> = prepared.iter().map(|p| time_query(&cs, p, config.query_work)).collect();

    let mode = if config.sequential { ExecMode::Sequential } else { ExecMode::Auto };
    let per_instance: Vec<Result<Vec<SeedResult>>> = par::map_range(mode, config.seeds, |i| {
        let env_seed = config.eval_seed_base + i as u64;
        let desc = catalog::random_simple_passage(env_seed);
        let (cs, task) = CSpace::from_desc(&desc)?;
        let oracle = Arc::new(load_or_build(&cs, &desc, &task.goal, config.grid)?);
        let mut out = Vec::with_capacity(prepared.len());
        for db in &prepared {
            let factory = StrategyFactory::with_shared(StrategySpec::PathDb, params.clone(), None, Some(db.clone()));
            let mut cfg = base.clone();
            cfg.env = format!("random_simple_passage:{env_seed}");
            cfg.seed_offset = i as u64;
            let exp = Experiment::from_parts(cfg, desc.clone(), oracle.clone(), factory)?;
            let r = exp.run_seed(i as u64)?;
            out.push(r);
        }
        Ok(out)
    });
    // per_instance[instance][size]
    let per_instance: Vec<Vec<SeedResult>> = per_instance.into_iter().collect::<Result<_>>()?;

    let mut sizes = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (k, &n) in config.sizes.iter().enumerate() {
        let runs: Vec<&SeedResult> = per_instance.iter().map(|r| &r[k]).collect();
        let se: Vec<f64> = runs.iter().map(|r| r.whole_run_se()).collect();
        let solved = runs.iter().filter(|r| r.solved).count();
        let samples: Vec<f64> = runs.iter().map(|r| r.samples_to_goal as f64).collect();
        xs.extend(std::iter::repeat_n(n as f64, se.len()));
        ys.extend_from_slice(&se);
        sizes.push(SizeResult {
            size: n,
            mean_whole_run_se: mean(&se),
            stderr_whole_run_se: stderr(&se),
            whole_run_se: se,
            success_rate: solved as f64 / config.seeds as f64,
            mean_samples_to_goal: mean(&samples),
            query_ns: query_ns[k],
            min_target_prob: runs.iter().map(|r| r.min_target_prob).fold(f64::INFINITY, f64::min),
            max_se: runs.iter().flat_map(|r| r.se.iter().copied()).fold(0.0, f64::max),
        });
    }
    let result = SweepResult { spearman: spearman(&xs, &ys), config, sizes };
    if let Some(dir) = &result.config.out {
        write_sweep(dir, &result)?;
    }
    Ok(result)
}

/// Writes `sweep.csv`, `sweep.json` and `sweep.svg` (mean SE against size index).
pub fn write_sweep(dir: &Path, r: &SweepResult) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("sweep.csv"))?;
    w.write_record(["size", "mean_whole_run_se", "stderr", "success_rate", "mean_samples_to_goal", "query_ns"])?;
    for s in &r.sizes {
        w.write_record([
            s.size.to_string(),
            s.mean_whole_run_se.to_string(),
            s.stderr_whole_run_se.to_string(),
            s.success_rate.to_string(),
            s.mean_samples_to_goal.to_string(),
            s.query_ns.to_string(),
        ])?;
    }
    w.flush()?;
    fs::write(dir.join("sweep.json"), serde_json::to_string_pretty(r)?)?;
    let sizes: Vec<String> = r.sizes.iter().map(|s| s.size.to_string()).collect();
    let curve = Curve {
        label: format!("sizes {}", sizes.join(",")),
        y: r.sizes.iter().map(|s| s.mean_whole_run_se).collect(),
        band: r.sizes.iter().map(|s| s.stderr_whole_run_se).collect(),
    };
    fs::write(dir.join("sweep.svg"), line_plot("Path database sweep", "size index", "whole-run SE (nats)", &[curve]))?;
    Ok(())
}
