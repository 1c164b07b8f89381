//! `obsgraph` command-line front end.
//!
//! Exit codes: 0 observable (or success), 1 usage error, 2 parse/model/IO
//! error, 3 not observable, 4 Lie analysis requested on a dependency-only
//! model.

pub mod bench;
pub mod cli;
pub mod report;
pub mod source;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use clap::Parser;
use obsgraph_core::builtin::list_models;
use obsgraph_core::graph::{build_digraph, decompose, export_csv, export_dot, structural_report};
use obsgraph_core::lie::{generic_rank, JacobianMode, LieError, LieOptions};

use crate::bench::{run_bench, BenchConfig};
use crate::cli::{AnalyzeArgs, BenchArgs, Cli, Command, LieArgs};
use crate::report::{AnalysisKind, AnalysisReportDocument, StructuralPayload, Timing};
use crate::source::{load, LoadError, LoadedModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MODEL: i32 = 2;
pub const EXIT_NOT_OBSERVABLE: i32 = 3;
pub const EXIT_GRAPH_ONLY: i32 = 4;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "OBSGRAPH_SEED";

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        let message = match &e {
            LoadError::Parse { path, diagnostics } => {
                let mut m = format!("{path}:\n");
                for d in diagnostics {
                    m.push_str(&d.to_string());
                }
                m.trim_end().to_string()
            }
            other => other.to_string(),
        };
        Failure::new(EXIT_MODEL, message)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Check { model } => cmd_check(&model),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Lie(a) => cmd_lie(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Models { json } => cmd_models(json),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn resolve_seed(flag: u64) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::new(
                EXIT_USAGE,
                format!("{SEED_ENV}='{v}' is not an unsigned integer"),
            )
        }),
        Err(_) => Ok(flag),
    }
}

fn print_warnings(model: &LoadedModel) {
    for w in &model.warnings {
        eprint!("{w}");
    }
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    if path == Path::new("-") {
        print!("{text}");
        let _ = std::io::stdout().flush();
        Ok(())
    } else {
        std::fs::write(path, text)
            .map_err(|e| Failure::new(EXIT_MODEL, format!("cannot write {}: {e}", path.display())))
    }
}

fn plural(n: usize, word: &str) -> String {
    format!("{n} {word}{}", if n == 1 { "" } else { "s" })
}

fn cmd_check(spec: &str) -> Result<i32, Failure> {
    let model = load(spec)?;
    print_warnings(&model);
    let s = &model.system;
    println!(
        "ok: {} ({}, {}, {}, {})",
        s.name(),
        plural(s.state_count(), "state"),
        plural(s.inputs().len(), "input"),
        plural(s.parameters().len(), "parameter"),
        plural(s.outputs().len(), "output"),
    );
    Ok(EXIT_OK)
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32, Failure> {
    let model = load(&args.model)?;
    print_warnings(&model);
    let system = &model.system;
    let start = Instant::now();
    let graph = build_digraph(system);
    let report = structural_report(system, &graph, decompose(&graph));
    let timing = Timing::monotonic(start.elapsed());

    if let Some(path) = &args.dot {
        write_output(path, &export_dot(&graph, &report.decomposition))?;
    }
    if let Some(path) = &args.csv {
        write_output(path, &export_csv(&graph))?;
    }
    let observable = report.verdict.is_observable();
    if args.json {
        let mut doc = AnalysisReportDocument::new(
            AnalysisKind::Structural,
            vec![model.reference.clone()],
            timing,
        );
        doc.structural = Some(StructuralPayload::new(&graph, report));
        print!("{}", doc.to_json());
    } else {
        print_structural(&model, &graph, &report, args.suggest, &timing);
    }
    Ok(if observable {
        EXIT_OK
    } else {
        EXIT_NOT_OBSERVABLE
    })
}

fn print_structural(
    model: &LoadedModel,
    graph: &obsgraph_core::graph::InferenceDigraph,
    report: &obsgraph_core::graph::StructuralReport,
    suggest: bool,
    timing: &Timing,
) {
    let s = &model.system;
    println!(
        "model: {} ({}, {}, {})",
        model.reference.name,
        plural(s.state_count(), "state"),
        plural(graph.edge_count(), "edge"),
        plural(s.outputs().len(), "output")
    );
    let names = report.component_names();
    println!("strongly connected components (topological order):");
    for (c, members) in names.iter().enumerate() {
        let tag = if report.decomposition.root_flags[c] {
            " [root]"
        } else {
            ""
        };
        println!("  C{c}{tag}: {{{}}}", members.join(", "));
    }
    println!("root coverage:");
    for root in &report.roots {
        let by = if root.covered_by.is_empty() {
            "UNCOVERED".to_string()
        } else {
            format!("covered by {}", root.covered_by.join(", "))
        };
        println!("  C{} {{{}}}: {by}", root.component, root.states.join(", "));
    }
    let verdict = if report.verdict.is_observable() {
        "structurally observable"
    } else {
        "not structurally observable"
    };
    println!("verdict: {verdict}");
    if suggest {
        if report.suggested_placement.is_empty() {
            println!("suggested placement: none needed");
        } else {
            println!(
                "suggested placement: measure {}",
                report.suggested_placement.join(", ")
            );
        }
    }
    println!("analysis time: {:.3} ms", timing.wall_ms);
}

fn cmd_lie(args: &LieArgs) -> Result<i32, Failure> {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(Failure::new(EXIT_USAGE, "--tol must be a positive number"));
    }
    let time_budget = match args.time_budget {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            return Err(Failure::new(
                EXIT_USAGE,
                "--time-budget must be a positive number of seconds",
            ))
        }
        t => t.map(Duration::from_secs_f64),
    };
    let seed = resolve_seed(args.seed)?;
    let model = load(&args.model)?;
    print_warnings(&model);
    let opts = LieOptions {
        order_cap: args.order_cap,
        samples: args.samples as usize,
        tol: args.tol,
        seed,
        jacobian: if args.symbolic_jacobian {
            JacobianMode::Symbolic
        } else {
            JacobianMode::Dual
        },
        parallel: true,
        time_budget,
    };
    let start = Instant::now();
    let report = match generic_rank(&model.system, &opts) {
        Ok(r) => r,
        Err(e @ LieError::GraphOnlyModel(_)) => {
            return Err(Failure::new(
                EXIT_GRAPH_ONLY,
                format!(
                    "{e}\nhint: `obsgraph analyze {}` runs the structural test",
                    args.model
                ),
            ))
        }
        Err(e @ LieError::AllSamplesSingular { .. }) => {
            return Err(Failure::new(
                EXIT_MODEL,
                format!("{e}\nhint: retry with a different --seed"),
            ))
        }
        Err(e) => return Err(Failure::new(EXIT_MODEL, e.to_string())),
    };
    let timing = Timing::monotonic(start.elapsed());
    let observable = report.is_observable();
    if args.json {
        let mut doc =
            AnalysisReportDocument::new(AnalysisKind::Lie, vec![model.reference.clone()], timing);
        doc.seed = Some(seed);
        doc.tolerance = Some(args.tol);
        doc.lie = Some(report);
        print!("{}", doc.to_json());
    } else {
        println!(
            "model: {} ({}, {})",
            model.reference.name,
            plural(report.n, "state"),
            plural(model.system.outputs().len(), "output")
        );
        println!(
            "samples: {}, tol: {:e}, seed: {}, jacobian: {}, order cap: {}",
            report.samples.len(),
            report.tolerance,
            report.seed,
            if report.jacobian == JacobianMode::Dual {
                "dual"
            } else {
                "symbolic"
            },
            report.order_cap
        );
        for (k, rank) in report.rank_by_order.iter().enumerate() {
            println!("  through order {k}: rank {rank}");
        }
        for (i, err) in report.sample_errors.iter().enumerate() {
            if let Some(err) = err {
                println!("  sample {i} failed: {err}");
            }
        }
        if report.budget_exhausted {
            println!("time budget exhausted before the order cap");
        }
        println!("final rank: {}/{}", report.final_rank, report.n);
        let verdict = if observable {
            "observable".to_string()
        } else {
            format!("not observable up to order {}", report.orders_computed())
        };
        println!("verdict: {verdict}");
        println!("analysis time: {:.3} ms", timing.wall_ms);
    }
    Ok(if observable {
        EXIT_OK
    } else {
        EXIT_NOT_OBSERVABLE
    })
}

fn cmd_bench(args: &BenchArgs) -> Result<i32, Failure> {
    if args.models.is_empty() && args.scaling.is_empty() {
        return Err(Failure::new(
            EXIT_USAGE,
            "give at least one model or --scaling sizes",
        ));
    }
    let cfg = BenchConfig {
        repeat: args.repeat as usize,
        warmup: args.warmup as usize,
        seed: resolve_seed(args.seed)?,
    };
    let mut models = Vec::new();
    let mut refs = Vec::new();
    for spec in &args.models {
        let m = load(spec)?;
        print_warnings(&m);
        models.push((m.reference.name.clone(), m.system));
        refs.push(m.reference);
    }
    let start = Instant::now();
    let report = run_bench(&models, &args.scaling, &cfg);
    let timing = Timing::monotonic(start.elapsed());
    let stdout_json = args.json.as_deref() == Some(Path::new("-"));
    if !stdout_json {
        print!("{}", bench::markdown(&report));
    }
    if let Some(path) = &args.json {
        let mut doc = AnalysisReportDocument::new(AnalysisKind::Bench, refs, timing);
        doc.seed = Some(cfg.seed);
        doc.tolerance = Some(bench::bench_lie_options(cfg.seed).tol);
        doc.bench = Some(report);
        write_output(path, &doc.to_json())?;
    }
    Ok(EXIT_OK)
}

fn cmd_models(json: bool) -> Result<i32, Failure> {
    let models = list_models();
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(models).expect("catalog serializes")
        );
        return Ok(EXIT_OK);
    }
    let key_w = models.iter().map(|e| e.key.len()).max().unwrap_or(3);
    println!("{:key_w$}  {:10}  PROVENANCE", "KEY", "KIND");
    for e in models {
        let kind = serde_json::to_value(e.kind).expect("kind serializes");
        println!(
            "{:key_w$}  {:10}  {}",
            e.key,
            kind.as_str().unwrap_or_default(),
            e.provenance
        );
    }
    Ok(EXIT_OK)
}
