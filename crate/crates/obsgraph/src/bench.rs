use std::fmt::Write as _;
use std::hint::black_box;
use std::time::Instant;

use obsgraph_core::graph::check_structural_observability;
use obsgraph_core::lie::{generic_rank, LieError, LieOptions};
use obsgraph_core::model::DynSystem;
use obsgraph_core::synthetic::chain_of_cycles;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub repeat: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            repeat: 10,
            warmup: 2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimingStats {
    pub runs: usize,
    pub median_ms: f64,
    pub mean_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

/// Runs `f` `warmup` times untimed, then `repeat` times timed. Returns the
/// stats and the last result.
pub fn time_runs<R>(repeat: usize, warmup: usize, mut f: impl FnMut() -> R) -> (TimingStats, R) {
    for _ in 0..warmup {
        black_box(f());
    }
    let mut times = Vec::with_capacity(repeat.max(1));
    let mut last = None;
    for _ in 0..repeat.max(1) {
        let start = Instant::now();
        let r = black_box(f());
        times.push(start.elapsed().as_secs_f64() * 1e3);
        last = Some(r);
    }
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    let median = if times.len() % 2 == 0 {
        (times[mid - 1] + times[mid]) / 2.0
    } else {
        times[mid]
    };
    let stats = TimingStats {
        runs: times.len(),
        median_ms: median,
        mean_ms: times.iter().sum::<f64>() / times.len() as f64,
        min_ms: times[0],
        max_ms: times[times.len() - 1],
    };
    (stats, last.expect("at least one run"))
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelBench {
    pub model: String,
    pub states: usize,
    pub graph: TimingStats,
    pub graph_result: String,
    /// Absent when the Lie path could not run.
    pub lie: Option<TimingStats>,
    pub lie_result: String,
    /// Lie median over graph median.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub target_edges: usize,
    pub nodes: usize,
    pub edges: usize,
    pub timing: TimingStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub repeat: usize,
    pub warmup: usize,
    pub models: Vec<ModelBench>,
    pub scaling: Vec<ScalingRow>,
    /// Median of each scaling row over the previous one.
    pub scaling_ratios: Vec<f64>,
}

/// Lie options used for timing: sequential, so the timed region measures
/// single-analysis latency.
pub fn bench_lie_options(seed: u64) -> LieOptions {
    LieOptions {
        seed,
        parallel: false,
        ..LieOptions::default()
    }
}

pub fn bench_model(name: &str, system: &DynSystem, cfg: &BenchConfig) -> ModelBench {
    let (graph, report) = time_runs(cfg.repeat, cfg.warmup, || {
        check_structural_observability(system)
    });
    let graph_result = verdict_text(report.verdict.is_observable()).to_string();
    let n = system.state_count();
    let opts = bench_lie_options(cfg.seed);
    let (lie, lie_result) = match generic_rank(system, &opts) {
        Err(LieError::GraphOnlyModel(_)) => (None, "skipped: dependency-only model".to_string()),
        Err(e) => (None, format!("failed: {e}")),
        Ok(_) => {
            let (stats, report) = time_runs(cfg.repeat, cfg.warmup, || generic_rank(system, &opts));
            let report = report.expect("succeeded once, deterministic");
            (
                Some(stats),
                format!(
                    "rank {}/{n}, {}",
                    report.final_rank,
                    verdict_text(report.is_observable())
                ),
            )
        }
    };
    ModelBench {
        model: name.to_string(),
        states: n,
        ratio: lie.map(|l| l.median_ms / graph.median_ms),
        graph,
        graph_result,
        lie,
        lie_result,
    }
}

fn verdict_text(observable: bool) -> &'static str {
    if observable {
        "observable"
    } else {
        "not observable"
    }
}

/// Full structural analysis (digraph, SCCs, coverage) on chain-of-cycles
/// systems of roughly each requested size. Generation is not timed.
pub fn bench_scaling(targets: &[usize], cfg: &BenchConfig) -> Vec<ScalingRow> {
    targets
        .iter()
        .map(|&target| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let system = chain_of_cycles(target, &mut rng);
            let (timing, report) = time_runs(cfg.repeat, cfg.warmup, || {
                check_structural_observability(&system)
            });
            let edges = system
                .derivatives()
                .iter()
                .map(|r| r.state_dependencies().len())
                .sum();
            ScalingRow {
                target_edges: target,
                nodes: report.states.len(),
                edges,
                timing,
            }
        })
        .collect()
}

pub fn run_bench(
    models: &[(String, DynSystem)],
    scaling: &[usize],
    cfg: &BenchConfig,
) -> BenchReport {
    let models = models
        .iter()
        .map(|(name, s)| bench_model(name, s, cfg))
        .collect();
    let scaling = bench_scaling(scaling, cfg);
    let scaling_ratios = scaling
        .windows(2)
        .map(|w| w[1].timing.median_ms / w[0].timing.median_ms)
        .collect();
    BenchReport {
        repeat: cfg.repeat,
        warmup: cfg.warmup,
        models,
        scaling,
        scaling_ratios,
    }
}

fn ms(x: f64) -> String {
    if x >= 100.0 {
        format!("{x:.1}")
    } else if x >= 1.0 {
        format!("{x:.3}")
    } else {
        format!("{x:.4}")
    }
}

pub fn markdown(report: &BenchReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Median and mean wall time over {} runs after {} warmups (ms).\n",
        report.repeat, report.warmup
    );
    if !report.models.is_empty() {
        out.push_str("| Model | States | Graph median | Graph mean | Graph verdict | Lie median | Lie mean | Lie result | Lie / graph |\n");
        out.push_str("|---|---:|---:|---:|---|---:|---:|---|---:|\n");
        for m in &report.models {
            let (lm, la) = m.lie.map_or(("-".into(), "-".into()), |l| {
                (ms(l.median_ms), ms(l.mean_ms))
            });
            let ratio = m.ratio.map_or("-".into(), |r| format!("{r:.0}x"));
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {lm} | {la} | {} | {ratio} |",
                m.model,
                m.states,
                ms(m.graph.median_ms),
                ms(m.graph.mean_ms),
                m.graph_result,
                m.lie_result
            );
        }
    }
    if !report.scaling.is_empty() {
        out.push_str("\n| Target edges | Nodes | Edges | Graph median | Ratio to previous |\n");
        out.push_str("|---:|---:|---:|---:|---:|\n");
        for (i, row) in report.scaling.iter().enumerate() {
            let ratio = i
                .checked_sub(1)
                .map_or("-".into(), |j| format!("{:.2}", report.scaling_ratios[j]));
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {ratio} |",
                row.target_edges,
                row.nodes,
                row.edges,
                ms(row.timing.median_ms)
            );
        }
    }
    out
}
