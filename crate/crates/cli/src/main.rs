use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use guidekit_core::bench::runner::{plot_dir, Experiment, ExperimentConfig};
use guidekit_core::bench::sweep::{run_pathdb_sweep, SweepConfig};
use guidekit_core::bench::{catalog, StrategyParams};
use guidekit_core::cspace::planner_rng;
use guidekit_core::metric::oracle::{load_or_build, oracle_build};
use guidekit_core::metric::{GridShape, Normalization, SeMode, TargetParams};
use guidekit_core::strategies::{db_build, DbBuildParams};
use guidekit_core::{CSpace, GuideError};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_UNSOLVED: u8 = 3;

#[derive(Parser)]
#[command(name = "guidekit", version, about = "Guided sampling-based planning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a strategy on an environment over many seeds.
    Run(RunArgs),
    /// Build a path database from the randomized passage family.
    Dbbuild(DbBuildArgs),
    /// Sweep path-database size and report SE and query time.
    SweepDb(SweepArgs),
    /// Build (or load from cache) the cost-to-go oracle and save it.
    Oracle(OracleArgs),
    /// Regenerate SVG plots from aggregate CSVs under a directory.
    Plot(PlotArgs),
}

#[derive(Args, Clone)]
struct MetricArgs {
    #[arg(long, default_value = "nll")]
    metric: SeMode,
    #[arg(long, default_value_t = 1e-4)]
    eps: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    #[arg(long, default_value = "min-max")]
    normalization: Normalization,
    #[arg(long, default_value = "128x128x32")]
    grid: GridShape,
    /// Run seeds one after another.
    #[arg(long)]
    sequential: bool,
}

impl MetricArgs {
    fn target(&self) -> TargetParams {
        TargetParams { delta: self.delta, tau: self.tau, eps: self.eps, normalization: self.normalization }
    }
}

#[derive(Args, Clone)]
struct StrategyArgs {
    #[arg(long)]
    r_del: Option<f64>,
    #[arg(long)]
    r_filter: Option<f64>,
    #[arg(long)]
    w_penalty: Option<f64>,
    #[arg(long)]
    n_mc: Option<usize>,
    #[arg(long)]
    lazy_vertices: Option<usize>,
}

impl StrategyArgs {
    fn params(&self) -> StrategyParams {
        let d = StrategyParams::default();
        StrategyParams {
            r_del: self.r_del,
            r_filter: self.r_filter,
            w_penalty: self.w_penalty.unwrap_or(d.w_penalty),
            n_mc: self.n_mc.unwrap_or(d.n_mc),
            lazy_n_vertices: self.lazy_vertices.unwrap_or(d.lazy_n_vertices),
            ..d
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    env: String,
    #[arg(long)]
    strategy: String,
    #[arg(long, default_value_t = 128)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed_offset: u64,
    #[arg(long, default_value_t = 5000)]
    budget: usize,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    strategy_args: StrategyArgs,
    /// Path database file, required by `pathdb`.
    #[arg(long)]
    db: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Exit with status 3 unless every seed reaches the goal.
    #[arg(long)]
    require_success: bool,
}

#[derive(Args)]
struct DbBuildArgs {
    #[arg(long, default_value = "random_simple_passage")]
    family: String,
    #[arg(long)]
    size: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,4,16,64,256")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 64)]
    seeds: usize,
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    #[command(flatten)]
    metric: MetricArgs,
    #[command(flatten)]
    strategy_args: StrategyArgs,
    /// Reuse this database file, or build and save it there.
    #[arg(long)]
    db: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    db_seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    env: String,
    #[arg(long, default_value = "128x128x32")]
    grid: GridShape,
    #[arg(long)]
    out: PathBuf,
    /// Skip the cache and always rebuild.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long = "in")]
    input: PathBuf,
}

enum Failure {
    Error(GuideError),
    Unsolved(String),
}

impl From<GuideError> for Failure {
    fn from(e: GuideError) -> Self {
        Failure::Error(e)
    }
}

fn is_config_error(e: &GuideError) -> bool {
    matches!(
        e,
        GuideError::InvalidParameter(_)
            | GuideError::UnknownName { .. }
            | GuideError::InvalidTask(_)
            | GuideError::MissingDistribution(_)
            | GuideError::EmptyDatabase
    )
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let config = ExperimentConfig {
        env: a.env,
        strategy: a.strategy,
        seeds: a.seeds,
        seed_offset: a.seed_offset,
        budget: a.budget,
        metric: a.metric.metric,
        target: a.metric.target(),
        grid: a.metric.grid,
        strategy_params: a.strategy_args.params(),
        db_path: a.db,
        out: Some(a.out.clone()),
        sequential: a.metric.sequential,
    };
    let exp = Experiment::prepare(config)?;
    let (s, _) = exp.run()?;
    println!(
        "{} on {}: success {:.3}, mean samples-to-goal {:.1}, whole-run SE {:.4}, min target prob {:.3e}, wrote {}",
        s.header.strategy,
        s.header.env,
        s.success_rate,
        s.mean_samples_to_goal,
        s.mean_whole_run_se,
        s.min_target_prob,
        a.out.display()
    );
    if a.require_success && s.success_rate < 1.0 {
        let unsolved = s.samples_to_goal.len() - (s.success_rate * s.samples_to_goal.len() as f64).round() as usize;
        return Err(Failure::Unsolved(format!("{unsolved} seed(s) did not reach the goal")));
    }
    Ok(())
}

fn dbbuild(a: DbBuildArgs) -> Result<(), Failure> {
    let family = a.family.replace('-', "_").to_ascii_lowercase();
    if family != "random_simple_passage" {
        return Err(GuideError::UnknownName { kind: "family", name: a.family, valid: "random_simple_passage".into() }.into());
    }
    let params = DbBuildParams { budget: a.budget, ..DbBuildParams::default() };
    let mut rng = planner_rng(a.seed, 0);
    let db = db_build(&|s| Ok(catalog::random_simple_passage(s)), a.size, &mut rng, &params)?;
    db.save(&a.out)?;
    println!("wrote {} entries to {}", db.len(), a.out.display());
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let config = SweepConfig {
        sizes: a.sizes,
        seeds: a.seeds,
        budget: a.budget,
        metric: a.metric.metric,
        target: a.metric.target(),
        grid: a.metric.grid,
        strategy_params: a.strategy_args.params(),
        db_path: a.db,
        db_seed: a.db_seed,
        out: Some(a.out.clone()),
        sequential: a.metric.sequential,
        ..SweepConfig::default()
    };
    log::info!("sweep config: {}", serde_json::to_string(&config).unwrap_or_default());
    let r = run_pathdb_sweep(config)?;
    for s in &r.sizes {
        println!(
            "size {:>4}: whole-run SE {:.4} ± {:.4}, success {:.3}, query {:.1} ns",
            s.size, s.mean_whole_run_se, s.stderr_whole_run_se, s.success_rate, s.query_ns
        );
    }
    println!("spearman rho {:.4}, one-sided p {:.3e}; wrote {}", r.spearman.rho, r.spearman.p_negative, a.out.display());
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<(), Failure> {
    let desc = catalog::environment(&a.env)?;
    let (cs, task) = CSpace::from_desc(&desc)?;
    let field =
        if a.no_cache { oracle_build(&cs, &task.goal, a.grid)? } else { load_or_build(&cs, &desc, &task.goal, a.grid)? };
    field.save(&a.out)?;
    let finite = field.cost.iter().filter(|c| c.is_finite()).count();
    println!(
        "{} oracle {}: {finite}/{} reachable cells, start cost {:.4}, wrote {}",
        a.env,
        a.grid,
        field.cost.len(),
        field.query(&task.start),
        a.out.display()
    );
    Ok(())
}

fn plot(a: PlotArgs) -> Result<(), Failure> {
    for p in plot_dir(&a.input)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Dbbuild(a) => dbbuild(a),
        Command::SweepDb(a) => sweep(a),
        Command::Oracle(a) => oracle(a),
        Command::Plot(a) => plot(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Unsolved(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_UNSOLVED)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_config_error(&e) { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}
