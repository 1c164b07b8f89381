//! Lie-derivative observability oracle.
//!
//! `L⁰y = h`, `Lᵏ⁺¹y = Σᵢ ∂(Lᵏy)/∂xᵢ · fᵢ`, computed in one directional
//! derivative pass per step. Inputs are held constant. Observability-matrix
//! entries `∂(Lᵏy)/∂xⱼ` are evaluated numerically with one tangent sweep per
//! state over a compiled tape, or from symbolic partials on request.

mod matrix;
mod rank;

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{
    derivative_along, differentiate, evaluate, share_subexpressions, simplify, Environment,
    EvalError, Expression, Node, SymbolKind, Tape, VarLayout,
};
use crate::model::{DynSystem, Rhs};

pub use matrix::{numeric_rank, Matrix};
pub use rank::{generic_rank, JacobianMode, LieOptions, LieReport, LieVerdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("model '{0}' has dependency-only entries; the Lie oracle needs an expression for every derivative and output")]
    GraphOnlyModel(String),
    #[error("evaluation failed for output '{output}' at order {order}: {source}")]
    Evaluation {
        output: String,
        order: usize,
        source: EvalError,
    },
    #[error(
        "non-finite derivative of output '{output}' at order {order} with respect to '{state}'"
    )]
    NonFiniteDerivative {
        output: String,
        order: usize,
        state: String,
    },
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error(
        "all {samples} samples failed to evaluate with seed {seed}; try a different seed ({last})"
    )]
    AllSamplesSingular {
        samples: usize,
        seed: u64,
        last: String,
    },
}

/// `Lᵏy` for k = 0..=order of one output.
#[derive(Debug, Clone, PartialEq)]
pub struct LieChain {
    pub output: String,
    pub terms: Vec<Expression>,
}

/// Rows of the observability matrix for one derivative order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservabilityMatrixSlice {
    pub order: usize,
    /// One row per output, one column per state.
    pub rows: Matrix,
}

/// The map `x_i -> f_i` of a fully symbolic system.
pub(crate) struct VectorField {
    field: HashMap<String, Expression>,
    zero: Expression,
}

impl VectorField {
    pub(crate) fn step(&self, expr: &Expression) -> Expression {
        let d = derivative_along(expr, &|node| match node {
            Node::State(s) => self
                .field
                .get(&**s)
                .cloned()
                .unwrap_or_else(|| self.zero.clone()),
            _ => self.zero.clone(),
        });
        simplify(&d)
    }
}

/// Vector field and output expressions with common subtrees shared, so the
/// memoized derivative passes visit each distinct subtree once.
pub(crate) fn symbolic_parts(
    system: &DynSystem,
) -> Result<(VectorField, Vec<Expression>), LieError> {
    let graph_only = || LieError::GraphOnlyModel(system.name().to_string());
    let mut roots = Vec::with_capacity(system.state_count() + system.outputs().len());
    for rhs in system
        .derivatives()
        .iter()
        .chain(system.outputs().iter().map(|o| &o.rhs))
    {
        match rhs {
            Rhs::Expression(e) => roots.push(e.clone()),
            Rhs::Depends(_) => return Err(graph_only()),
        }
    }
    let mut shared = share_subexpressions(&roots);
    let outputs = shared.split_off(system.state_count());
    let field = VectorField {
        field: system.states().iter().cloned().zip(shared).collect(),
        zero: Expression::zero(),
    };
    Ok((field, outputs))
}

/// `k`-th Lie derivative of `expr` along the system dynamics.
pub fn lie_derivative(
    system: &DynSystem,
    expr: &Expression,
    k: usize,
) -> Result<Expression, LieError> {
    let (field, _) = symbolic_parts(system)?;
    let mut e = expr.clone();
    for _ in 0..k {
        e = field.step(&e);
    }
    Ok(e)
}

/// Chains up to `max_order` for every output.
pub fn lie_chains(system: &DynSystem, max_order: usize) -> Result<Vec<LieChain>, LieError> {
    let (field, outputs) = symbolic_parts(system)?;
    Ok(system
        .outputs()
        .iter()
        .zip(outputs)
        .map(|(o, h)| {
            let mut terms = vec![h];
            for _ in 0..max_order {
                let next = field.step(terms.last().expect("non-empty"));
                terms.push(next);
            }
            LieChain {
                output: o.name.clone(),
                terms,
            }
        })
        .collect())
}

pub(crate) fn layout(system: &DynSystem) -> VarLayout {
    VarLayout::new(
        system.states().iter().map(String::as_str),
        system.inputs().iter().map(String::as_str),
        system.parameters().iter().map(|p| p.name.as_str()),
    )
}

/// Slot vectors for one evaluation point.
#[derive(Debug, Clone)]
pub(crate) struct SlotValues {
    states: Vec<f64>,
    inputs: Vec<f64>,
    params: Vec<f64>,
}

impl SlotValues {
    /// Unbound names become NaN; the tape only reads symbols that occur.
    pub(crate) fn new(system: &DynSystem, env: &Environment) -> Self {
        let get = |kind, name: &str| env.lookup(kind, name).unwrap_or(f64::NAN);
        SlotValues {
            states: system
                .states()
                .iter()
                .map(|s| get(SymbolKind::State, s))
                .collect(),
            inputs: system
                .inputs()
                .iter()
                .map(|s| get(SymbolKind::Input, s))
                .collect(),
            params: system
                .parameters()
                .iter()
                .map(|p| get(SymbolKind::Parameter, &p.name))
                .collect(),
        }
    }
}

/// Compiled evaluator for the rows of one order.
pub(crate) struct OrderRows<'a> {
    order: usize,
    names: Vec<String>,
    states: &'a [String],
    terms: Vec<Expression>,
    tape: Tape,
    mode: JacobianMode,
}

impl<'a> OrderRows<'a> {
    pub(crate) fn new(
        system: &'a DynSystem,
        order: usize,
        terms: &[Expression],
        layout: &VarLayout,
        mode: JacobianMode,
    ) -> Self {
        let roots: Vec<Expression> = match mode {
            JacobianMode::Dual => terms.to_vec(),
            JacobianMode::Symbolic => terms
                .iter()
                .flat_map(|t| system.states().iter().map(move |s| differentiate(t, s)))
                .collect(),
        };
        // Every symbol of a validated system has a slot.
        let tape = Tape::compile(&roots, layout).expect("validated system compiles");
        OrderRows {
            order,
            names: system.outputs().iter().map(|o| o.name.clone()).collect(),
            states: system.states(),
            terms: terms.to_vec(),
            tape,
            mode,
        }
    }

    pub(crate) fn rows(
        &self,
        at: &SlotValues,
        env: &Environment,
    ) -> Result<Vec<Vec<f64>>, LieError> {
        let n = self.states.len();
        let values = self
            .tape
            .forward(&at.states, &at.inputs, &at.params)
            .map_err(|e| self.locate(env, e))?;
        let rows = match self.mode {
            JacobianMode::Dual => self.tape.jacobian(&values, n),
            JacobianMode::Symbolic => {
                let flat = self.tape.root_values(&values);
                (0..self.terms.len())
                    .map(|o| flat[o * n..(o + 1) * n].to_vec())
                    .collect()
            }
        };
        for (o, row) in rows.iter().enumerate() {
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(LieError::NonFiniteDerivative {
                    output: self.names[o].clone(),
                    order: self.order,
                    state: self.states[j].clone(),
                });
            }
        }
        Ok(rows)
    }

    /// Re-evaluates term by term to name the output that failed.
    fn locate(&self, env: &Environment, fallback: EvalError) -> LieError {
        for (o, t) in self.terms.iter().enumerate() {
            if let Err(source) = evaluate(t, env) {
                return LieError::Evaluation {
                    output: self.names[o].clone(),
                    order: self.order,
                    source,
                };
            }
        }
        LieError::Evaluation {
            output: self.names.first().cloned().unwrap_or_default(),
            order: self.order,
            source: fallback,
        }
    }
}

/// Stacked observability matrix for orders `0..=max_order` at one point.
/// Rows are grouped by order, then by output.
pub fn observability_matrix(
    system: &DynSystem,
    max_order: usize,
    sample: &Environment,
) -> Result<Matrix, LieError> {
    observability_matrix_with(system, max_order, sample, JacobianMode::Dual)
}

pub fn observability_matrix_with(
    system: &DynSystem,
    max_order: usize,
    sample: &Environment,
    mode: JacobianMode,
) -> Result<Matrix, LieError> {
    Ok(stack(
        &observability_slices(system, max_order, sample, mode)?,
        system.state_count(),
    ))
}

pub fn observability_slices(
    system: &DynSystem,
    max_order: usize,
    sample: &Environment,
    mode: JacobianMode,
) -> Result<Vec<ObservabilityMatrixSlice>, LieError> {
    let (field, mut terms) = symbolic_parts(system)?;
    let layout = layout(system);
    let at = SlotValues::new(system, sample);
    let mut out = Vec::with_capacity(max_order + 1);
    for order in 0..=max_order {
        if order > 0 {
            terms = terms.iter().map(|t| field.step(t)).collect();
        }
        let rows = OrderRows::new(system, order, &terms, &layout, mode).rows(&at, sample)?;
        out.push(ObservabilityMatrixSlice {
            order,
            rows: Matrix::from_rows(system.state_count(), &rows),
        });
    }
    Ok(out)
}

fn stack(slices: &[ObservabilityMatrixSlice], n: usize) -> Matrix {
    let mut m = Matrix::zeros(0, n);
    for s in slices {
        for i in 0..s.rows.rows() {
            m.push_row(s.rows.row(i));
        }
    }
    m
}

/// Entry `(k·p + o, j)` is `∂(Lᵏy_o)/∂x_j`, symbolically.
pub fn symbolic_observability_matrix(
    system: &DynSystem,
    max_order: usize,
) -> Result<Vec<Vec<Expression>>, LieError> {
    let chains = lie_chains(system, max_order)?;
    let mut rows = Vec::new();
    for k in 0..=max_order {
        for c in &chains {
            rows.push(
                system
                    .states()
                    .iter()
                    .map(|s| differentiate(&c.terms[k], s))
                    .collect(),
            );
        }
    }
    Ok(rows)
}
