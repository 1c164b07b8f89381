use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{layout, numeric_rank, symbolic_parts, LieError, Matrix, OrderRows, SlotValues};
use crate::expr::Environment;
use crate::model::DynSystem;

/// How observability-matrix entries are obtained from the Lie chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JacobianMode {
    /// Unit-seed tangent sweeps over the compiled chain.
    #[default]
    Dual,
    /// Symbolic partials of each chain element, then evaluated.
    Symbolic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieOptions {
    /// Highest derivative order; `None` means `n - 1`.
    pub order_cap: Option<usize>,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub jacobian: JacobianMode,
    /// Evaluate samples on the rayon pool. Results do not depend on this.
    pub parallel: bool,
    /// Stop after the first order that finishes past this budget.
    pub time_budget: Option<Duration>,
}

impl Default for LieOptions {
    fn default() -> Self {
        LieOptions {
            order_cap: None,
            samples: 5,
            tol: 1e-8,
            seed: 42,
            jacobian: JacobianMode::Dual,
            parallel: true,
            time_budget: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LieVerdict {
    Observable,
    NotObservableUpToOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LieReport {
    pub n: usize,
    pub samples: Vec<Environment>,
    pub tolerance: f64,
    pub seed: u64,
    pub order_cap: usize,
    pub jacobian: JacobianMode,
    /// Best rank over samples after each order, 0-based by order.
    pub rank_by_order: Vec<usize>,
    /// Final rank per sample; `None` where evaluation failed.
    pub sample_ranks: Vec<Option<usize>>,
    pub sample_errors: Vec<Option<String>>,
    pub final_rank: usize,
    pub verdict: LieVerdict,
    pub budget_exhausted: bool,
    pub wall_time_ms: f64,
}

impl LieReport {
    pub fn is_observable(&self) -> bool {
        self.verdict == LieVerdict::Observable
    }

    /// Highest order whose rows were computed.
    pub fn orders_computed(&self) -> usize {
        self.rank_by_order.len().saturating_sub(1)
    }
}

/// States and inputs: magnitude uniform in [0.1, 1] with a random sign, which
/// keeps them away from zero. Parameters: declared default, otherwise uniform
/// in [0.5, 1.5].
pub(crate) fn draw_sample(rng: &mut ChaCha8Rng, system: &DynSystem) -> Environment {
    let signed = |rng: &mut ChaCha8Rng| {
        let m: f64 = rng.gen_range(0.1..=1.0);
        if rng.gen_bool(0.5) {
            m
        } else {
            -m
        }
    };
    let mut env = Environment::new();
    for s in system.states() {
        env.states.insert(s.clone(), signed(rng));
    }
    for u in system.inputs() {
        env.inputs.insert(u.clone(), signed(rng));
    }
    for p in system.parameters() {
        let drawn: f64 = rng.gen_range(0.5..=1.5);
        env.parameters
            .insert(p.name.clone(), p.default.unwrap_or(drawn));
    }
    env
}

struct SampleState {
    at: SlotValues,
    matrix: Matrix,
    rank: usize,
    error: Option<LieError>,
}

/// Generic rank of the observability matrix: maximum numeric rank over
/// `options.samples` random points, grown one derivative order at a time
/// until full rank or the order cap.
pub fn generic_rank(system: &DynSystem, options: &LieOptions) -> Result<LieReport, LieError> {
    let start = Instant::now();
    let (field, mut terms) = symbolic_parts(system)?;
    let n = system.state_count();
    let order_cap = options.order_cap.unwrap_or(n.saturating_sub(1));
    let layout = layout(system);

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let envs: Vec<Environment> = (0..options.samples)
        .map(|_| draw_sample(&mut rng, system))
        .collect();
    let mut states: Vec<SampleState> = envs
        .iter()
        .map(|e| SampleState {
            at: SlotValues::new(system, e),
            matrix: Matrix::zeros(0, n),
            rank: 0,
            error: None,
        })
        .collect();

    let mut rank_by_order = Vec::new();
    let mut final_rank = 0;
    let mut budget_exhausted = false;
    for order in 0..=order_cap {
        if order > 0 {
            terms = terms.iter().map(|t| field.step(t)).collect();
        }
        let rows = OrderRows::new(system, order, &terms, &layout, options.jacobian);
        let update = |(s, env): (&mut SampleState, &Environment)| {
            if s.error.is_some() {
                return;
            }
            let result = rows.rows(&s.at, env).and_then(|r| {
                for row in &r {
                    s.matrix.push_row(row);
                }
                numeric_rank(&s.matrix, options.tol)
            });
            match result {
                Ok(r) => s.rank = r,
                Err(e) => s.error = Some(e),
            }
        };
        if options.parallel {
            states.par_iter_mut().zip(envs.par_iter()).for_each(update);
        } else {
            states.iter_mut().zip(envs.iter()).for_each(update);
        }

        let live = states.iter().filter(|s| s.error.is_none());
        let best = live.clone().map(|s| s.rank).max();
        let Some(best) = best else {
            let last = states
                .iter()
                .rev()
                .find_map(|s| s.error.as_ref())
                .map(ToString::to_string)
                .unwrap_or_else(|| "no samples requested".into());
            return Err(LieError::AllSamplesSingular {
                samples: options.samples,
                seed: options.seed,
                last,
            });
        };
        final_rank = final_rank.max(best);
        rank_by_order.push(final_rank);
        if final_rank == n {
            break;
        }
        if options.time_budget.is_some_and(|b| start.elapsed() > b) && order < order_cap {
            budget_exhausted = true;
            break;
        }
    }

    Ok(LieReport {
        n,
        samples: envs,
        tolerance: options.tol,
        seed: options.seed,
        order_cap,
        jacobian: options.jacobian,
        rank_by_order,
        sample_ranks: states
            .iter()
            .map(|s| s.error.is_none().then_some(s.rank))
            .collect(),
        sample_errors: states
            .iter()
            .map(|s| s.error.as_ref().map(ToString::to_string))
            .collect(),
        final_rank,
        verdict: if final_rank == n {
            LieVerdict::Observable
        } else {
            LieVerdict::NotObservableUpToOrder
        },
        budget_exhausted,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
