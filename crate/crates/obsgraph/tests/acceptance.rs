//! Acceptance checks. Prints one PASS/FAIL line per criterion. Exits nonzero
//! if a criterion fails that is not listed in `KNOWN_FAILING`. Thresholds are
//! pinned below.

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use obsgraph::bench::{bench_model, time_runs, BenchConfig};
use obsgraph_core::builtin::{get_model, list_models};
use obsgraph_core::dsl;
use obsgraph_core::expr::{
    differentiate, dual_evaluate, evaluate, simplify, Environment, Expression,
};
use obsgraph_core::graph::{
    build_digraph, check_structural_observability, decompose, export_csv, kosaraju,
    parse_adjacency_csv, InferenceDigraph, SccDecomposition,
};
use obsgraph_core::lie::{generic_rank, LieOptions};
use obsgraph_core::model::{DynSystem, Parameter};
use obsgraph_core::synthetic::{chain_of_cycles, random_expression, random_sparse_system};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXAMPLE_GRAPH_MS: f64 = 1.0;
const EXAMPLE_LIE_S: f64 = 1.0;
const CASE1_GRAPH_MS: f64 = 10.0;
const CASE1_LIE_S: f64 = 60.0;
const CASE2_GRAPH_MS: f64 = 100.0;
const CASE2_LIE_BUDGET: Duration = Duration::from_secs(30 * 60);
const MIN_SPEEDUP: f64 = 100.0;
const MAX_DOUBLING_RATIO: f64 = 2.5;
const MILLION_EDGES_S: f64 = 5.0;
const DERIV_REL_ERR: f64 = 1e-6;

/// Criteria that fail on the reference machine. They still print FAIL.
const KNOWN_FAILING: &[&str] = &["5a"];

type Verdict = Result<String, String>;

fn names(g: &InferenceDigraph, idx: &[usize]) -> BTreeSet<String> {
    idx.iter().map(|&i| g.nodes()[i].clone()).collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn model(key: &str) -> DynSystem {
    get_model(key).unwrap_or_else(|e| panic!("{key}: {e}"))
}

/// Reachability closure by Floyd-Warshall; reach[u][u] is always true.
fn closure(g: &InferenceDigraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut r = g.adjacency_matrix();
    for (u, row) in r.iter_mut().enumerate() {
        row[u] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

fn bfs_reach(g: &InferenceDigraph, from: usize) -> Vec<bool> {
    let mut seen = vec![false; g.node_count()];
    let mut queue = std::collections::VecDeque::from([from]);
    seen[from] = true;
    while let Some(u) = queue.pop_front() {
        for &v in g.successors(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

fn random_digraph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> InferenceDigraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    InferenceDigraph::from_edges((0..n).map(|i| format!("v{i}")).collect(), edges)
}

/// Rank by Gaussian elimination with partial pivoting, tolerance relative to
/// the largest entry.
fn oracle_rank(mut m: Vec<Vec<f64>>, rel_tol: f64) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
        else {
            break;
        };
        if m[p][c].abs() <= rel_tol * scale {
            continue;
        }
        m.swap(rank, p);
        for r in rank + 1..m.len() {
            let f = m[r][c] / m[rank][c];
            for k in c..cols {
                m[r][k] -= f * m[rank][k];
            }
        }
        rank += 1;
    }
    rank
}

/// Observability rank by repeated symbolic differentiation, evaluated at a
/// few random points. Only for fully symbolic systems without inputs.
fn brute_force_lie_rank(s: &DynSystem, seed: u64) -> usize {
    let states = s.states();
    let f: Vec<Expression> = s
        .derivatives()
        .iter()
        .map(|r| r.as_expression().expect("symbolic").clone())
        .collect();
    let mut rows = Vec::new();
    for out in s.outputs() {
        let mut h = out.rhs.as_expression().expect("symbolic").clone();
        for _ in 0..states.len() {
            let grad: Vec<Expression> = states
                .iter()
                .map(|x| simplify(&differentiate(&h, x)))
                .collect();
            let next = grad
                .iter()
                .zip(&f)
                .fold(Expression::zero(), |acc, (g, fi)| &acc + &(g * fi));
            rows.push(grad);
            h = simplify(&next);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..5)
        .map(|_| {
            let env = states.iter().fold(Environment::new(), |e, x| {
                let sign = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
                e.with_state(x, sign * rng.gen_range(0.2..1.5))
            });
            let m = rows
                .iter()
                .map(|g| g.iter().map(|d| evaluate(d, &env).unwrap()).collect())
                .collect();
            oracle_rank(m, 1e-9)
        })
        .max()
        .unwrap_or(0)
}

/// Central differences extrapolated to zero step (Ridders). Returns the
/// estimate and its error bound.
fn ridders(f: &impl Fn(f64) -> f64, h0: f64) -> (f64, f64) {
    const SHRINK: f64 = 1.4;
    const N: usize = 12;
    let mut table = [[0.0f64; N]; N];
    let mut h = h0;
    let mut best = (f64::NAN, f64::INFINITY);
    table[0][0] = (f(h) - f(-h)) / (2.0 * h);
    for i in 1..N {
        h /= SHRINK;
        table[0][i] = (f(h) - f(-h)) / (2.0 * h);
        let mut fac = SHRINK * SHRINK;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= SHRINK * SHRINK;
            let err = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if err <= best.1 {
                best = (table[j][i], err);
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * best.1 {
            break;
        }
    }
    best
}

/// Ridders from several starting steps; keeps the tightest error bound.
fn numeric_derivative(f: impl Fn(f64) -> f64) -> f64 {
    [1e-1, 1e-2, 1e-3, 1e-4]
        .into_iter()
        .map(|h0| ridders(&f, h0))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(d, _)| d)
        .unwrap()
}

fn finite_difference(e: &Expression, point: &[f64], j: usize) -> f64 {
    numeric_derivative(|d| {
        let env = point
            .iter()
            .enumerate()
            .fold(Environment::new(), |env, (i, &v)| {
                env.with_state(&format!("x{i}"), if i == j { v + d } else { v })
            });
        evaluate(e, &env).unwrap()
    })
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn example_two() -> Verdict {
    let s = model("example1_y1");
    let (timing, (g, d)) = time_runs(20, 3, || {
        let g = build_digraph(&s);
        let d = decompose(&g);
        (g, d)
    });
    let edges: BTreeSet<(String, String)> = g
        .edges()
        .map(|(u, v)| (g.nodes()[u].clone(), g.nodes()[v].clone()))
        .collect();
    let expected: BTreeSet<(String, String)> = [
        ("x1", "x1"),
        ("x1", "x2"),
        ("x1", "x4"),
        ("x2", "x3"),
        ("x3", "x1"),
        ("x4", "x4"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    ensure(edges == expected, || format!("edges {edges:?}"))?;
    let comps: BTreeSet<BTreeSet<String>> = d.components.iter().map(|c| names(&g, c)).collect();
    let want: BTreeSet<BTreeSet<String>> = [vec!["x1", "x2", "x3"], vec!["x4"]]
        .iter()
        .map(|c| c.iter().map(|x| x.to_string()).collect())
        .collect();
    ensure(comps == want, || format!("components {comps:?}"))?;
    let roots: Vec<BTreeSet<String>> = d.roots().map(|c| names(&g, &d.components[c])).collect();
    ensure(
        roots == vec![want.iter().max_by_key(|c| c.len()).unwrap().clone()],
        || format!("roots {roots:?}"),
    )?;
    ensure(timing.median_ms < EXAMPLE_GRAPH_MS, || {
        format!("median {:.4} ms", timing.median_ms)
    })?;
    Ok(format!(
        "6 edges, 2 SCCs, root {{x1,x2,x3}}, median {:.4} ms",
        timing.median_ms
    ))
}

fn example_one() -> Verdict {
    let cases = [
        ("example1_y1", true, 4),
        ("example1_y2", true, 4),
        ("example1_y3", false, 1),
    ];
    let mut detail = Vec::new();
    for (key, observable, rank) in cases {
        let s = model(key);
        let structural = check_structural_observability(&s).verdict.is_observable();
        ensure(structural == observable, || {
            format!("{key}: structural {structural}")
        })?;
        let start = Instant::now();
        let report = generic_rank(&s, &LieOptions::default()).map_err(|e| format!("{key}: {e}"))?;
        let secs = start.elapsed().as_secs_f64();
        ensure(report.final_rank == rank, || {
            format!("{key}: rank {}", report.final_rank)
        })?;
        let oracle = brute_force_lie_rank(&s, 11);
        ensure(oracle == rank, || format!("{key}: oracle rank {oracle}"))?;
        ensure(secs < EXAMPLE_LIE_S, || format!("{key}: Lie {secs:.3} s"))?;
        detail.push(format!("{key} rank {rank} ({:.1} ms)", secs * 1e3));
    }
    Ok(detail.join(", "))
}

fn case_one() -> Verdict {
    let s = model("wscc_decentralized");
    let printed = [
        [1, 1, 1, 0, 1, 0, 0],
        [1, 1, 1, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 0],
        [1, 1, 1, 1, 0, 0, 0],
        [0, 0, 0, 0, 1, 0, 1],
        [0, 0, 0, 0, 1, 1, 0],
        [0, 0, 0, 0, 1, 1, 1],
    ];
    let g = build_digraph(&s);
    let adj: Vec<Vec<u8>> = g
        .adjacency_matrix()
        .iter()
        .map(|r| r.iter().map(|&b| b as u8).collect())
        .collect();
    ensure(adj == printed.map(|r| r.to_vec()).to_vec(), || {
        format!("adjacency {adj:?}")
    })?;
    let (timing, report) = time_runs(20, 3, || check_structural_observability(&s));
    ensure(report.decomposition.len() == 2, || {
        format!("{} SCCs", report.decomposition.len())
    })?;
    let roots: Vec<&[String]> = report.roots.iter().map(|r| r.states.as_slice()).collect();
    ensure(roots == [["Eq1", "Ed1", "delta1", "omega1"]], || {
        format!("roots {roots:?}")
    })?;
    ensure(report.verdict.is_observable(), || "not observable".into())?;
    let covered: Vec<&str> = report.roots[0]
        .covered_by
        .iter()
        .map(String::as_str)
        .collect();
    ensure(covered == ["ID1", "IQ1"], || {
        format!("covered by {covered:?}")
    })?;
    ensure(timing.median_ms < CASE1_GRAPH_MS, || {
        format!("graph {:.4} ms", timing.median_ms)
    })?;
    let start = Instant::now();
    let lie = generic_rank(&s, &LieOptions::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    ensure(lie.final_rank == 7, || {
        format!("Lie rank {}", lie.final_rank)
    })?;
    ensure(secs < CASE1_LIE_S, || format!("Lie {secs:.2} s"))?;
    Ok(format!(
        "graph {:.4} ms, Lie rank 7 in {:.1} ms",
        timing.median_ms,
        secs * 1e3
    ))
}

fn case_two() -> Verdict {
    let s = model("wscc_centralized_structural");
    let (timing, report) = time_runs(20, 3, || check_structural_observability(&s));
    let mut sizes: Vec<usize> = report
        .decomposition
        .components
        .iter()
        .map(Vec::len)
        .collect();
    sizes.sort_unstable();
    ensure(sizes == [3, 3, 3, 12], || {
        format!("component sizes {sizes:?}")
    })?;
    ensure(
        report.roots.len() == 1 && report.roots[0].states.len() == 12,
        || "root is not the 12-state SCC".into(),
    )?;
    ensure(report.verdict.is_observable(), || "not observable".into())?;
    let covered: BTreeSet<&str> = report.roots[0]
        .covered_by
        .iter()
        .map(String::as_str)
        .collect();
    let want: BTreeSet<&str> = ["VD1", "VQ1", "VD2", "VQ2", "VD3", "VQ3"].into();
    ensure(covered == want, || format!("covered by {covered:?}"))?;
    ensure(timing.median_ms < CASE2_GRAPH_MS, || {
        format!("graph {:.4} ms", timing.median_ms)
    })?;

    // Reported only: the rank on the symbolic fixture is not gated.
    let synthetic = model("wscc_centralized_synthetic");
    let opts = LieOptions {
        order_cap: Some(synthetic.state_count() - 1),
        time_budget: Some(CASE2_LIE_BUDGET),
        ..LieOptions::default()
    };
    let start = Instant::now();
    let lie = match generic_rank(&synthetic, &opts) {
        Ok(r) => format!(
            "synthetic Lie rank {}/{} in {:.1} ms",
            r.final_rank,
            r.n,
            start.elapsed().as_secs_f64() * 1e3
        ),
        Err(e) => format!("synthetic Lie failed: {e}"),
    };
    Ok(format!(
        "SCC sizes {sizes:?}, graph {:.4} ms; {lie} (not gated)",
        timing.median_ms
    ))
}

fn speedup() -> Verdict {
    let cfg = BenchConfig {
        repeat: 30,
        warmup: 3,
        seed: 42,
    };
    let b = bench_model("wscc_decentralized", &model("wscc_decentralized"), &cfg);
    let lie = b.lie.ok_or_else(|| b.lie_result.clone())?;
    let ratio = b.ratio.expect("lie ran");
    let detail = format!(
        "graph median {:.4} ms, Lie median {:.4} ms, ratio {ratio:.0}x (need >= {MIN_SPEEDUP:.0}x)",
        b.graph.median_ms, lie.median_ms
    );
    if ratio >= MIN_SPEEDUP {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 0 {
        (xs[mid - 1] + xs[mid]) / 2.0
    } else {
        xs[mid]
    }
}

/// Times N and 2N alternately so drift on a shared machine hits both sizes.
fn scaling() -> Verdict {
    const ROUNDS: usize = 9;
    let mut detail = Vec::new();
    let mut ok = true;
    for n in [100_000, 500_000] {
        let systems = [n, 2 * n].map(|t| chain_of_cycles(t, &mut ChaCha8Rng::seed_from_u64(42)));
        let mut times = [Vec::new(), Vec::new()];
        for round in 0..=ROUNDS {
            for (k, system) in systems.iter().enumerate() {
                let start = Instant::now();
                std::hint::black_box(check_structural_observability(system));
                if round > 0 {
                    times[k].push(start.elapsed().as_secs_f64() * 1e3);
                }
            }
        }
        let [small, large] = times.map(median);
        let ratio = large / small;
        ok &= ratio <= MAX_DOUBLING_RATIO;
        detail.push(format!(
            "{n}->{}: {large:.1}/{small:.1} ms = {ratio:.2}",
            2 * n
        ));
    }
    let detail = format!("{} (need <= {MAX_DOUBLING_RATIO})", detail.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn million_edges() -> Verdict {
    let system = chain_of_cycles(1_000_000, &mut ChaCha8Rng::seed_from_u64(42));
    let start = Instant::now();
    let report = check_structural_observability(&system);
    let secs = start.elapsed().as_secs_f64();
    let edges = build_digraph(&system).edge_count();
    ensure(edges >= 900_000, || format!("only {edges} edges"))?;
    ensure(report.verdict.is_observable(), || {
        "chain of cycles should be observable".into()
    })?;
    ensure(secs < MILLION_EDGES_S, || format!("{secs:.2} s"))?;
    Ok(format!(
        "{edges} edges, {} nodes in {:.0} ms",
        report.states.len(),
        secs * 1e3
    ))
}

fn kosaraju_matches_closure() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..500 {
        let n = rng.gen_range(0..=10);
        let density = rng.gen_range(0.05..0.5);
        let g = random_digraph(&mut rng, n, density);
        let reach = closure(&g);
        let oracle: BTreeSet<BTreeSet<usize>> = (0..n)
            .map(|u| (0..n).filter(|&v| reach[u][v] && reach[v][u]).collect())
            .collect();
        let got: BTreeSet<BTreeSet<usize>> = kosaraju(&g)
            .components
            .iter()
            .map(|c| c.iter().copied().collect())
            .collect();
        ensure(got == oracle, || {
            format!("graph {trial}: {got:?} vs {oracle:?}")
        })?;
    }
    Ok("500 graphs, 0 mismatches".into())
}

fn check_invariants(g: &InferenceDigraph, d: &SccDecomposition) -> Result<(), String> {
    let n = g.node_count();
    let mut count = vec![0; n];
    for (c, members) in d.components.iter().enumerate() {
        for &v in members {
            count[v] += 1;
            ensure(d.component_of[v] == c, || format!("component_of[{v}]"))?;
        }
    }
    ensure(count.iter().all(|&k| k == 1), || "not a partition".into())?;
    let reach: Vec<Vec<bool>> = (0..n).map(|u| bfs_reach(g, u)).collect();
    for u in 0..n {
        for v in 0..n {
            let same = d.component_of[u] == d.component_of[v];
            ensure(same == (reach[u][v] && reach[v][u]), || {
                format!("maximality at ({u},{v})")
            })?;
        }
    }
    let mut has_incoming = vec![false; d.len()];
    for &(a, b) in &d.condensation_edges {
        ensure(a < b, || {
            format!("condensation edge ({a},{b}) against emission order")
        })?;
        has_incoming[b] = true;
    }
    for (u, v) in g.edges() {
        let (a, b) = (d.component_of[u], d.component_of[v]);
        ensure(a == b || d.condensation_edges.contains(&(a, b)), || {
            format!("missing condensation edge ({a},{b})")
        })?;
    }
    let roots: Vec<bool> = has_incoming.iter().map(|&h| !h).collect();
    ensure(roots == d.root_flags, || "root flags".into())
}

fn scc_invariants() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..200 {
        let n = rng.gen_range(1..=200);
        let density = rng.gen_range(0.1..3.0) / n as f64;
        let g = random_digraph(&mut rng, n, density.min(1.0));
        check_invariants(&g, &decompose(&g)).map_err(|e| format!("graph {trial} (n={n}): {e}"))?;
    }
    Ok("200 graphs, n <= 200".into())
}

fn derivative_agreement() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let states = ["x0", "x1", "x2"];
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let e = random_expression(&mut rng, 3, 5);
        let point: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let env = states
            .iter()
            .zip(&point)
            .fold(Environment::new(), |env, (x, &v)| env.with_state(x, v));
        for (j, x) in states.iter().enumerate() {
            let symbolic = evaluate(&differentiate(&e, x), &env).map_err(|err| err.to_string())?;
            let (_, dual) = dual_evaluate(&e, &env, &HashMap::from([(x.to_string(), 1.0)]))
                .map_err(|err| err.to_string())?;
            let fd = finite_difference(&e, &point, j);
            let err = rel_err(symbolic, dual).max(rel_err(dual, fd));
            worst = worst.max(err);
            ensure(err <= DERIV_REL_ERR, || {
                format!("expression {k} d/d{x}: {symbolic} / {dual} / {fd}: {e}")
            })?;
        }
    }
    Ok(format!("1000 expressions, worst rel err {worst:.1e}"))
}

fn structural_necessity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for _ in 0..200 {
        let s = random_sparse_system(&mut rng, 6);
        if check_structural_observability(&s).verdict.is_observable() {
            continue;
        }
        checked += 1;
        let n = s.state_count();
        let r = generic_rank(&s, &LieOptions::default()).map_err(|e| e.to_string())?;
        let all_full = r.sample_ranks.iter().all(|&k| k == Some(n));
        ensure(!all_full, || {
            format!(
                "full rank but structurally unobservable:\n{}",
                dsl::serialize(&s)
            )
        })?;
    }
    ensure(checked > 0, || "no unobservable systems drawn".into())?;
    Ok(format!(
        "{checked} structurally unobservable systems, none Lie-full-rank"
    ))
}

fn parameter_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut rescalings = 0;
    for entry in list_models() {
        let s = model(entry.key);
        let graph = build_digraph(&s);
        let baseline = check_structural_observability(&s);
        for _ in 0..10 {
            let params = s
                .parameters()
                .iter()
                .map(|p| {
                    let sign = if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
                    Parameter::new(
                        &p.name,
                        Some(p.default.unwrap_or(1.0) * sign * rng.gen_range(0.01..100.0)),
                    )
                })
                .collect();
            let rescaled = s.with_parameters(params).map_err(|e| e.to_string())?;
            ensure(build_digraph(&rescaled) == graph, || {
                format!("{}: digraph changed", entry.key)
            })?;
            ensure(
                check_structural_observability(&rescaled) == baseline,
                || format!("{}: report changed", entry.key),
            )?;
            rescalings += 1;
        }
    }
    Ok(format!(
        "{rescalings} rescalings over {} models",
        list_models().len()
    ))
}

fn dsl_round_trip() -> Verdict {
    for entry in list_models() {
        let s = model(entry.key);
        let back = dsl::parse(&dsl::serialize(&s)).map_err(|d| format!("{}: {d:?}", entry.key))?;
        ensure(back == s, || format!("{}: round trip differs", entry.key))?;
        let g = build_digraph(&s);
        ensure(parse_adjacency_csv(&export_csv(&g)).ok() == Some(g), || {
            format!("{}: CSV round trip", entry.key)
        })?;
    }
    Ok(format!("{} fixtures", list_models().len()))
}

fn exit_codes() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bad = dir.path().join("bad.dyn");
    std::fs::write(&bad, "system s\nstates x\nderiv x = x +\n").map_err(|e| e.to_string())?;
    let bad = bad.to_str().unwrap();
    let cases: [(&[&str], Option<&str>, i32); 9] = [
        (&["analyze", "example1_y1"], None, 0),
        (&["lie", "wscc_decentralized"], None, 0),
        (&[], None, 1),
        (&["lie", "example1_y1", "--samples", "0"], None, 1),
        (&["lie", "example1_y1"], Some("not-a-number"), 1),
        (&["check", bad], None, 2),
        (&["analyze", "example1_y3"], None, 3),
        (&["lie", "example1_y3"], None, 3),
        (&["lie", "wscc_centralized_structural"], None, 4),
    ];
    for (args, seed_env, want) in cases {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_obsgraph"));
        cmd.args(args).env_remove("OBSGRAPH_SEED");
        if let Some(v) = seed_env {
            cmd.env("OBSGRAPH_SEED", v);
        }
        let got = cmd.output().map_err(|e| e.to_string())?.status.code();
        ensure(got == Some(want), || {
            format!("{args:?}: exit {got:?}, want {want}")
        })?;
    }
    Ok("codes 0-4 as documented".into())
}

fn main() {
    let criteria: [(&str, &str, fn() -> Verdict); 14] = [
        ("1", "example digraph edges, SCCs and roots", example_two),
        (
            "2",
            "four-state example verdicts and Lie ranks",
            example_one,
        ),
        ("3", "decentralized machine adjacency, SCCs, rank", case_one),
        ("4", "centralized three-machine SCCs and verdict", case_two),
        ("5a", "graph vs Lie speedup on decentralized model", speedup),
        ("5b", "near-linear scaling on synthetic graphs", scaling),
        ("5c", "full analysis of a 1e6-edge system", million_edges),
        (
            "6a",
            "Kosaraju vs transitive-closure oracle",
            kosaraju_matches_closure,
        ),
        (
            "6b",
            "SCC partition, maximality, condensation",
            scc_invariants,
        ),
        (
            "6c",
            "symbolic vs dual vs finite-difference",
            derivative_agreement,
        ),
        (
            "6d",
            "structural necessity on random systems",
            structural_necessity,
        ),
        (
            "6e",
            "parameter invariance of structural results",
            parameter_invariance,
        ),
        ("6f", "DSL round trip on fixtures", dsl_round_trip),
        ("6g", "exit-code contract", exit_codes),
    ];
    let (mut failed, mut unexpected) = (0, 0);
    for (id, what, check) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("PASS {id:<3} {what}: {detail}"),
            Err(detail) => {
                failed += 1;
                let known = KNOWN_FAILING.contains(&id);
                unexpected += usize::from(!known);
                println!(
                    "FAIL {id:<3} {what}: {detail}{}",
                    if known { " [known]" } else { "" }
                );
            }
        }
    }
    println!(
        "{} passed, {failed} failed ({unexpected} unexpected)",
        criteria.len() - failed
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
