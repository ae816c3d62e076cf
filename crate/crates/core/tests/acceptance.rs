//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use guidekit_core::bench::catalog;
use guidekit_core::bench::runner::{summarize, Experiment, ExperimentConfig, RunSummary, SeedResult};
use guidekit_core::bench::stats::{bootstrap_mean_diff, Bootstrap};
use guidekit_core::bench::sweep::{run_pathdb_sweep, SweepConfig};
use guidekit_core::cspace::planner_rng;
use guidekit_core::metric::divergence::{js_divergence, kl_divergence};
use guidekit_core::metric::oracle::{cache_dir, oracle_build};
use guidekit_core::metric::target::{smooth, smoothing_gamma};
use guidekit_core::metric::GridShape;
use guidekit_core::CSpace;
use rand::Rng;

const SEEDS: usize = 128;
const BUDGET: usize = 5000;
const RESAMPLES: usize = 2000;
const EPS: f64 = 1e-4;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Everything a criterion needs from one (env, strategy) experiment.
struct Run {
    summary: RunSummary,
    results: Vec<SeedResult>,
}

fn run(env: &str, strategy: &str, seeds: usize) -> Run {
    let t = Instant::now();
    let exp = Experiment::prepare(ExperimentConfig::new(env, strategy, seeds, BUDGET)).expect("prepare");
    let results = exp.run_seeds().expect("run");
    let summary = summarize(exp.header(), &results);
    eprintln!(
        "  ran {strategy} on {env}: {seeds} seeds, success {:.3}, samples {:.1}, whole-run SE {:.4}, peak at {} ({:.1}s)",
        summary.success_rate,
        summary.mean_samples_to_goal,
        summary.mean_whole_run_se,
        summary.peak_iteration,
        t.elapsed().as_secs_f64()
    );
    Run { summary, results }
}

/// Tracks the smoothing floor and SE range over every run made here.
struct Extremes {
    min_q: f64,
    min_se: f64,
    max_se: f64,
    runs: usize,
}

impl Extremes {
    fn new() -> Self {
        Extremes { min_q: f64::INFINITY, min_se: f64::INFINITY, max_se: f64::NEG_INFINITY, runs: 0 }
    }

    fn add(&mut self, min_q: f64, se: impl Iterator<Item = f64>) {
        self.min_q = self.min_q.min(min_q);
        for s in se {
            self.min_se = self.min_se.min(s);
            self.max_se = self.max_se.max(s);
        }
        self.runs += 1;
    }

    fn add_run(&mut self, r: &Run) {
        for s in &r.results {
            self.add(s.min_target_prob, s.se.iter().copied());
        }
    }
}

fn whole_run(r: &Run) -> Vec<f64> {
    r.summary.whole_run_se.clone()
}

fn samples(r: &Run) -> Vec<f64> {
    r.summary.samples_to_goal.iter().map(|&s| s as f64).collect()
}

fn fmt_boot(b: &Bootstrap) -> String {
    format!("diff {:.4}, 95% lower bound {:.4}", b.diff, b.lower)
}

fn bit_identical(a: &SeedResult, b: &SeedResult) -> bool {
    let bits = |x: &[f64]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    let poses = |r: &SeedResult| r.outcome.tree.poses().iter().flat_map(|p| p.to_array()).map(f64::to_bits).collect::<Vec<_>>();
    a.seed == b.seed
        && a.solved == b.solved
        && a.samples_to_goal == b.samples_to_goal
        && bits(&a.se) == bits(&b.se)
        && a.min_target_prob.to_bits() == b.min_target_prob.to_bits()
        && a.outcome.records == b.outcome.records
        && a.outcome.goal_node == b.outcome.goal_node
        && poses(a) == poses(b)
}

fn all_identical(a: &[SeedResult], b: &[SeedResult]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| bit_identical(x, y))
}

fn criterion_1() -> Verdict {
    let mut rng = planner_rng(1, 1);
    let mut worst_self = 0.0f64;
    let mut worst_det = 0.0f64;
    let mut worst_sym = 0.0f64;
    let mut max_js = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..40);
        let mut draw = |n: usize| {
            let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>().powi(3) + 1e-9).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let p = draw(n);
        let q = draw(n);
        worst_self = worst_self.max(kl_divergence(&p, &p).abs());
        let u = n / 2;
        let mut one_hot = vec![0.0; n];
        one_hot[u] = 1.0;
        worst_det = worst_det.max((kl_divergence(&one_hot, &q) + q[u].ln()).abs());
        let (a, b) = (js_divergence(&p, &q), js_divergence(&q, &p));
        worst_sym = worst_sym.max((a - b).abs());
        max_js = max_js.max(a).max(b);
    }
    let ln4 = kl_divergence(&[1.0, 0.0, 0.0, 0.0], &[0.25; 4]);
    let half = kl_divergence(&[0.5, 0.5], &[0.9, 0.1]);
    let disjoint = js_divergence(&[1.0, 0.0], &[0.0, 1.0]);
    let r4 = |x: f64| (x * 1e4).round() / 1e4;
    let examples = r4(ln4) == r4(4f64.ln()) && r4(half) == 0.5108 && r4(disjoint) == r4(2f64.ln());
    let pass = worst_self == 0.0
        && worst_det <= 1e-12
        && worst_sym <= 1e-12
        && max_js <= 2f64.ln() + 1e-12
        && examples;
    verdict(
        pass,
        format!(
            "KL(P,P) max {worst_self:.1e}, |KL(onehot,Q)+ln Q(u)| max {worst_det:.1e}, JS asymmetry max {worst_sym:.1e}, JS max {max_js:.6}; examples {ln4:.4} {half:.4} {disjoint:.4}"
        ),
    )
}

fn criterion_3() -> Verdict {
    let mut rng = planner_rng(3, 1);
    let mut floor_ok = true;
    let mut tight_ok = true;
    let mut positive = 0;
    let mut worst_margin = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.random_range(2..2000);
        let eps = rng.random_range(1e-6..1.0 / (2.0 * n as f64));
        let spread = rng.random_range(0.0..40.0);
        let mut w: Vec<f64> = (0..n).map(|_| (-spread * rng.random::<f64>()).exp()).collect();
        let top = w.iter().copied().fold(0.0, f64::max);
        w.iter_mut().for_each(|x| *x /= top);
        let gamma = smoothing_gamma(&w, eps);
        let min_q = smooth(&w, gamma).into_iter().fold(f64::INFINITY, f64::min);
        worst_margin = worst_margin.min(min_q / eps - 1.0);
        floor_ok &= min_q >= eps * (1.0 - 1e-12);
        if gamma > 0.0 {
            positive += 1;
            let lowered = smooth(&w, gamma - 1e-6).into_iter().fold(f64::INFINITY, f64::min);
            tight_ok &= lowered < eps;
        }
    }
    verdict(
        floor_ok && tight_ok && positive > 0,
        format!("floor held: {floor_ok} (worst relative margin {worst_margin:.1e}); gamma-1e-6 violates in all {positive} cases with gamma>0: {tight_ok}"),
    )
}

fn criterion_4() -> Verdict {
    let shape = GridShape::default();
    let (cs, _) = CSpace::from_desc(&catalog::empty()).expect("empty env");
    let mut rng = planner_rng(4, 1);
    let (mut lo_ok, mut hi_ok) = (true, true);
    let (mut min_ratio, mut max_excess) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..10 {
        let goal = cs.sample_valid(&mut rng, 1000).expect("goal");
        let field = oracle_build(&cs, &goal, shape).expect("oracle");
        let cell = field.cell_cost();
        for _ in 0..10 {
            let start = cs.sample_valid(&mut rng, 1000).expect("start");
            let analytic = cs.distance(&start, &goal);
            let cost = field.query(&start);
            lo_ok &= cost >= analytic - 1e-9;
            hi_ok &= cost <= 1.09 * analytic + 2.0 * cell;
            if analytic > 0.0 {
                min_ratio = min_ratio.min(cost / analytic);
            }
            max_excess = max_excess.max((cost - 1.09 * analytic) / cell);
        }
    }

    let trap = catalog::trap();
    let (robot_cs, task) = CSpace::from_desc(&trap).expect("trap");
    let robot_field = oracle_build(&robot_cs, &task.goal, shape).expect("robot oracle");
    let mut point = trap.clone();
    point.robot.half_length = 1e-3;
    point.robot.half_width = 1e-3;
    let (point_cs, _) = CSpace::from_desc(&point).expect("point trap");
    let point_field = oracle_build(&point_cs, &task.goal, shape).expect("point oracle");
    // Cells whose centers lie inside the short corridor (x in the wall, |y - 5| < slit/2).
    let (mut cells, mut robot_inf, mut point_finite) = (0, 0, 0);
    for k in 0..shape.nt {
        for j in 0..shape.ny {
            for i in 0..shape.nx {
                let c = robot_field.center(i, j, k);
                if c.x > 4.55 && c.x < 5.45 && (c.y - 5.0).abs() < 0.15 {
                    cells += 1;
                    let idx = robot_field.index(i, j, k);
                    robot_inf += robot_field.cost[idx].is_infinite() as usize;
                    point_finite += point_field.cost[idx].is_finite() as usize;
                }
            }
        }
    }
    let dual = cells > 0 && robot_inf == cells && point_finite == cells;
    verdict(
        lo_ok && hi_ok && dual,
        format!(
            "empty env: 100 pairs, min cost/analytic {min_ratio:.4}, max (cost-1.09 analytic) {max_excess:.2} cells; trap corridor {cells} cells: robot +inf {robot_inf}, point finite {point_finite}"
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut lines: Vec<(usize, Verdict)> = Vec::new();
    let mut report = |n: usize, v: Verdict| {
        println!("criterion {n:>2} [{}] {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        lines.push((n, v));
    };

    report(1, criterion_1());
    report(3, criterion_3());
    report(4, criterion_4());

    let mut ext = Extremes::new();

    let rrt = run("simple_passage", "voronoi", SEEDS);
    ext.add_run(&rrt);
    let peak = rrt.summary.peak_iteration;
    report(5, verdict(peak > 50, format!("voronoi on simple_passage: mean SE curve peaks at iteration {peak} (max {:.4})", rrt.summary.mean_se[peak - 1])));

    let lazy_sp = run("simple_passage", "lazyprm", SEEDS);
    let lazy_cup = run("cup", "lazyprm", SEEDS);
    ext.add_run(&lazy_sp);
    ext.add_run(&lazy_cup);
    let b6 = bootstrap_mean_diff(&whole_run(&lazy_cup), &whole_run(&lazy_sp), RESAMPLES, 0.95, 6);
    report(
        6,
        verdict(
            b6.excludes_zero(),
            format!(
                "lazyprm whole-run SE cup {:.4} vs simple_passage {:.4}: {}",
                lazy_cup.summary.mean_whole_run_se,
                lazy_sp.summary.mean_whole_run_se,
                fmt_boot(&b6)
            ),
        ),
    );

    let med_sp = run("simple_passage", "medialaxis", SEEDS);
    let med_trap = run("trap", "medialaxis", SEEDS);
    ext.add_run(&med_sp);
    ext.add_run(&med_trap);
    let b7 = bootstrap_mean_diff(&whole_run(&med_trap), &whole_run(&med_sp), RESAMPLES, 0.95, 7);
    report(
        7,
        verdict(
            b7.excludes_zero(),
            format!(
                "medialaxis whole-run SE trap {:.4} vs simple_passage {:.4}: {}",
                med_trap.summary.mean_whole_run_se,
                med_sp.summary.mean_whole_run_se,
                fmt_boot(&b7)
            ),
        ),
    );

    let t = Instant::now();
    let sweep = run_pathdb_sweep(SweepConfig {
        db_path: Some(cache_dir().join("pathdb-random_simple_passage-256-seed0.json")),
        ..SweepConfig::default()
    })
    .expect("sweep");
    eprintln!("  ran pathdb sweep ({:.1}s)", t.elapsed().as_secs_f64());
    for s in &sweep.sizes {
        ext.add(s.min_target_prob, [s.max_se].into_iter());
    }
    let sizes: Vec<String> =
        sweep.sizes.iter().map(|s| format!("{}:{:.3}/{:.0}ns", s.size, s.mean_whole_run_se, s.query_ns)).collect();
    let sp = sweep.spearman;
    report(
        8,
        verdict(
            sp.rho <= 0.0 && sp.p_negative < 0.05 && sweep.query_time_strictly_increasing(),
            format!(
                "spearman rho {:.4} (p {:.2e}), query time strictly increasing: {}; size:SE/query [{}]",
                sp.rho,
                sp.p_negative,
                sweep.query_time_strictly_increasing(),
                sizes.join(" ")
            ),
        ),
    );

    let tc_med = run("trap_cup", "medialaxis", SEEDS);
    let tc_lazy = run("trap_cup", "lazyprm", SEEDS);
    let tc_hyb = run("trap_cup", "hybrid:medialaxis+lazyprm", SEEDS);
    for r in [&tc_med, &tc_lazy, &tc_hyb] {
        ext.add_run(r);
    }
    let mut ok9 = true;
    let mut parts = Vec::new();
    for (name, m) in [("medialaxis", &tc_med), ("lazyprm", &tc_lazy)] {
        let a = bootstrap_mean_diff(&samples(m), &samples(&tc_hyb), RESAMPLES, 0.95, 90);
        let b = bootstrap_mean_diff(&whole_run(m), &whole_run(&tc_hyb), RESAMPLES, 0.95, 91);
        let a_ok = a.diff >= 0.0 && a.lower >= 0.0;
        let b_ok = b.excludes_zero();
        ok9 &= a_ok && b_ok;
        parts.push(format!(
            "vs {name}: samples {:.1} vs {:.1} ({}, {}), SE {:.4} vs {:.4} ({}, {})",
            tc_hyb.summary.mean_samples_to_goal,
            m.summary.mean_samples_to_goal,
            fmt_boot(&a),
            if a_ok { "ok" } else { "no" },
            tc_hyb.summary.mean_whole_run_se,
            m.summary.mean_whole_run_se,
            fmt_boot(&b),
            if b_ok { "ok" } else { "no" },
        ));
    }
    let (pm, pl) = (tc_med.summary.peak_iteration, tc_lazy.summary.peak_iteration);
    ok9 &= pm != pl;
    parts.push(format!("member SE peaks at iterations {pm} and {pl}"));
    report(9, verdict(ok9, format!("trap_cup hybrid {}", parts.join("; "))));

    report(
        2,
        verdict(
            ext.min_q >= EPS - 1e-12 && ext.min_se >= 0.0 && ext.max_se <= (1.0 / EPS).ln() + 1e-12,
            format!(
                "{} seed runs: min target probability {:.6e}, per-iteration SE in [{:.6}, {:.6}] (bound ln 1e4 = {:.6})",
                ext.runs, ext.min_q, ext.min_se, ext.max_se, (1.0 / EPS).ln()
            ),
        ),
    );

    let mut ok10 = true;
    let mut notes = Vec::new();
    for member in ["voronoi", "lazyprm", "medialaxis"] {
        let solo = Experiment::prepare(ExperimentConfig::new("trap_cup", member, 8, 2000)).unwrap().run_seeds().unwrap();
        let hybrid = Experiment::prepare(ExperimentConfig::new("trap_cup", &format!("hybrid:{member}"), 8, 2000))
            .unwrap()
            .run_seeds()
            .unwrap();
        let same = all_identical(&solo, &hybrid);
        ok10 &= same;
        notes.push(format!("hybrid:{member}=={member}: {same}"));
    }
    for (env, strategy) in [("cup", "lazyprm"), ("trap_cup", "hybrid:medialaxis+lazyprm"), ("simple_passage", "voronoi")] {
        let cfg = ExperimentConfig::new(env, strategy, 8, 2000);
        let a = Experiment::prepare(cfg.clone()).unwrap().run_seeds().unwrap();
        let b = Experiment::prepare(cfg.clone()).unwrap().run_seeds().unwrap();
        let seq = Experiment::prepare(ExperimentConfig { sequential: true, ..cfg }).unwrap().run_seeds().unwrap();
        let same = all_identical(&a, &b) && all_identical(&a, &seq);
        ok10 &= same;
        notes.push(format!("rerun {strategy} on {env} (incl. sequential): {same}"));
    }
    report(10, verdict(ok10, notes.join(", ")));

    lines.sort_by_key(|(n, _)| *n);
    let failed: Vec<String> = lines.iter().filter(|(_, v)| !v.pass).map(|(n, _)| n.to_string()).collect();
    println!(
        "acceptance: {}/{} criteria pass ({:.0}s){}",
        lines.len() - failed.len(),
        lines.len(),
        start.elapsed().as_secs_f64(),
        if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(", ")) }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
