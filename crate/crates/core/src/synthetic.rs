//! Seeded generators for benchmarks and property tests.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::expr::Expression;
use crate::model::{DependencySpec, DynSystem, Output, Rhs};

const CYCLE_LEN: usize = 8;

/// Dependency-only system whose digraph is a chain of 8-node cycles.
///
/// Each node has a cycle edge and one random chord inside its cycle; node 0 of
/// every cycle also points at node 0 of the next one. The first cycle is the
/// only root; one output measures `x0`. The edge count is close to
/// `target_edges` (duplicates collapse).
pub fn chain_of_cycles(target_edges: usize, rng: &mut impl Rng) -> DynSystem {
    let per_cycle = 2 * CYCLE_LEN + 1;
    let cycles = (target_edges / per_cycle).max(1);
    let n = cycles * CYCLE_LEN;
    let states: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut derivatives = Vec::with_capacity(n);
    for c in 0..cycles {
        let base = c * CYCLE_LEN;
        for k in 0..CYCLE_LEN {
            let u = base + k;
            let mut deps = vec![
                base + (k + 1) % CYCLE_LEN,
                base + rng.gen_range(0..CYCLE_LEN),
            ];
            if k == 0 && c + 1 < cycles {
                deps.push(base + CYCLE_LEN);
            }
            let spec = DependencySpec::new(deps.iter().map(|&v| states[v].as_str()), []);
            derivatives.push((states[u].clone(), Rhs::Depends(spec)));
        }
    }
    let outputs = vec![Output::new("y", DependencySpec::new(["x0"], []))];
    DynSystem::new(
        "chain_of_cycles",
        states,
        vec![],
        vec![],
        derivatives,
        outputs,
    )
    .expect("generated system is valid")
}

/// Random expression over states `x0..x{n_states}` with depth at most
/// `depth`. Denominators are bounded away from zero and `exp` arguments are
/// bounded, so values stay finite on `[-1, 1]^n`.
pub fn random_expression(rng: &mut impl Rng, n_states: usize, depth: u32) -> Expression {
    expression_rec(rng, n_states, depth)
}

fn expression_rec(rng: &mut dyn RngCore, n_states: usize, depth: u32) -> Expression {
    if depth == 0 || rng.gen_bool(0.2) {
        return if rng.gen_bool(0.75) {
            Expression::state(&format!("x{}", rng.gen_range(0..n_states)))
        } else {
            Expression::constant((rng.gen_range(-2.0..2.0f64) * 100.0).round() / 100.0)
        };
    }
    let sub = |rng: &mut dyn RngCore| expression_rec(rng, n_states, depth - 1);
    match rng.gen_range(0..10) {
        0 => sub(rng) + sub(rng),
        1 => sub(rng) - sub(rng),
        2 | 3 => sub(rng) * sub(rng),
        4 => {
            let den = sub(rng);
            sub(rng) / (Expression::constant(1.5) + den.powi(2))
        }
        5 => sub(rng).powi(rng.gen_range(0..4)),
        6 => sub(rng).sin(),
        7 => sub(rng).cos(),
        8 => sub(rng).sin().exp(),
        _ => -sub(rng),
    }
}

/// Small fully symbolic system with a random sparse dependency pattern and
/// one or two randomly measured states.
///
/// Every chosen dependency of `ẋ_i` appears in its own additive term, so the
/// syntactic dependency set is exactly the chosen one.
pub fn random_sparse_system(rng: &mut impl Rng, max_states: usize) -> DynSystem {
    let n = rng.gen_range(2..=max_states.max(2));
    let states: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let x = |j: usize| Expression::state(&states[j]);
    let mut derivatives = Vec::with_capacity(n);
    for (i, name) in states.iter().enumerate() {
        let deps: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.35)).collect();
        let mut f = Expression::constant(rng.gen_range(0.5..1.5));
        for &j in &deps {
            let coef = Expression::constant((rng.gen_range(0.5..2.0f64) * 100.0).round() / 100.0);
            // The last variant adds x_i, so it is only allowed when x_i was chosen.
            let variants = if deps.contains(&i) { 5 } else { 4 };
            let term = match rng.gen_range(0..variants) {
                0 => coef * x(j),
                1 => coef * x(j).sin(),
                2 => coef * x(j).powi(2),
                3 => coef * x(j) * x(deps[rng.gen_range(0..deps.len())]),
                _ => coef * x(j).cos() * x(i),
            };
            f = f + term;
        }
        derivatives.push((name.clone(), Rhs::Expression(f)));
    }
    let measured = rng.gen_range(1..=2.min(n));
    let mut picks: Vec<usize> = (0..n).collect();
    picks.shuffle(rng);
    let outputs = picks[..measured]
        .iter()
        .enumerate()
        .map(|(k, &j)| Output::new(&format!("y{k}"), x(j)))
        .collect();
    DynSystem::new(
        "random_sparse",
        states.clone(),
        vec![],
        vec![],
        derivatives,
        outputs,
    )
    .expect("generated system is valid")
}
