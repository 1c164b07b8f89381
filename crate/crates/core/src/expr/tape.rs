//! Linearised form of an expression DAG for repeated numeric sweeps.
//!
//! Symbols are resolved to slot indices once at compile time. A forward pass
//! stores every node value; each tangent pass then reuses those values, which
//! makes one unit-seed dual sweep cost a single scan of the tape.

use std::collections::HashMap;

use rustc_hash::FxHashMap;

use super::{powi, EvalError, Expression, Node, SymbolKind};

/// Slot assignment for states, inputs and parameters.
#[derive(Debug, Clone, Default)]
pub struct VarLayout {
    slots: HashMap<(SymbolKind, String), usize>,
    counts: [usize; 3],
}

impl VarLayout {
    pub fn new<'a>(
        states: impl IntoIterator<Item = &'a str>,
        inputs: impl IntoIterator<Item = &'a str>,
        parameters: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        let mut layout = VarLayout::default();
        for (k, names) in [
            (SymbolKind::State, states.into_iter().collect::<Vec<_>>()),
            (SymbolKind::Input, inputs.into_iter().collect()),
            (SymbolKind::Parameter, parameters.into_iter().collect()),
        ] {
            for (i, n) in names.into_iter().enumerate() {
                layout.slots.insert((k, n.to_string()), i);
            }
        }
        layout.counts = [SymbolKind::State, SymbolKind::Input, SymbolKind::Parameter]
            .map(|k| layout.slots.keys().filter(|(kk, _)| *kk == k).count());
        layout
    }

    pub fn slot(&self, kind: SymbolKind, name: &str) -> Option<usize> {
        self.slots.get(&(kind, name.to_string())).copied()
    }

    pub fn state_count(&self) -> usize {
        self.counts[0]
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Const(f64),
    State(usize),
    Input(usize),
    Param(usize),
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Pow(usize, u32),
    Sin(usize),
    Cos(usize),
    Exp(usize),
}

/// A compiled multi-root expression DAG.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    roots: Vec<usize>,
}

impl Tape {
    pub fn compile(roots: &[Expression], layout: &VarLayout) -> Result<Tape, EvalError> {
        let mut tape = Tape {
            ops: Vec::new(),
            roots: Vec::with_capacity(roots.len()),
        };
        let mut memo: FxHashMap<*const Node, usize> = FxHashMap::default();
        for r in roots {
            let idx = tape.emit(r, layout, &mut memo)?;
            tape.roots.push(idx);
        }
        Ok(tape)
    }

    fn emit(
        &mut self,
        root: &Expression,
        layout: &VarLayout,
        memo: &mut FxHashMap<*const Node, usize>,
    ) -> Result<usize, EvalError> {
        // Post-order without recursion: Lie chains can be deep.
        let mut stack: Vec<(&Expression, bool)> = vec![(root, false)];
        while let Some((e, expanded)) = stack.pop() {
            if memo.contains_key(&e.key()) {
                continue;
            }
            if !expanded {
                stack.push((e, true));
                for c in e.children().into_iter().rev() {
                    if !memo.contains_key(&c.key()) {
                        stack.push((c, false));
                    }
                }
                continue;
            }
            let at = |c: &Expression| memo[&c.key()];
            let resolve = |kind: SymbolKind, s: &str| {
                layout
                    .slot(kind, s)
                    .ok_or_else(|| EvalError::UnboundSymbol {
                        kind,
                        name: s.to_string(),
                    })
            };
            let op = match e.node() {
                Node::Constant(c) => Op::Const(*c),
                Node::State(s) => Op::State(resolve(SymbolKind::State, s)?),
                Node::Input(s) => Op::Input(resolve(SymbolKind::Input, s)?),
                Node::Parameter(s) => Op::Param(resolve(SymbolKind::Parameter, s)?),
                Node::Negate(a) => Op::Neg(at(a)),
                Node::Add(a, b) => Op::Add(at(a), at(b)),
                Node::Sub(a, b) => Op::Sub(at(a), at(b)),
                Node::Mul(a, b) => Op::Mul(at(a), at(b)),
                Node::Div(a, b) => Op::Div(at(a), at(b)),
                Node::IntPow(a, k) => Op::Pow(at(a), *k),
                Node::Sin(a) => Op::Sin(at(a)),
                Node::Cos(a) => Op::Cos(at(a)),
                Node::Exp(a) => Op::Exp(at(a)),
            };
            self.ops.push(op);
            memo.insert(e.key(), self.ops.len() - 1);
        }
        Ok(memo[&root.key()])
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn root_count(&self) -> usize {
        self.roots.len()
    }

    /// Values of every tape node.
    pub fn forward(
        &self,
        states: &[f64],
        inputs: &[f64],
        params: &[f64],
    ) -> Result<Vec<f64>, EvalError> {
        let mut v: Vec<f64> = Vec::with_capacity(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let x = match *op {
                Op::Const(c) => c,
                Op::State(s) => states[s],
                Op::Input(s) => inputs[s],
                Op::Param(s) => params[s],
                Op::Neg(a) => -v[a],
                Op::Add(a, b) => v[a] + v[b],
                Op::Sub(a, b) => v[a] - v[b],
                Op::Mul(a, b) => v[a] * v[b],
                Op::Div(a, b) => {
                    if v[b] == 0.0 {
                        return Err(EvalError::DivisionByZero {
                            path: vec![],
                            subtree: format!("compiled node #{i}"),
                        });
                    }
                    v[a] / v[b]
                }
                Op::Pow(a, k) => powi(v[a], k),
                Op::Sin(a) => v[a].sin(),
                Op::Cos(a) => v[a].cos(),
                Op::Exp(a) => v[a].exp(),
            };
            v.push(x);
        }
        Ok(v)
    }

    pub fn root_values(&self, values: &[f64]) -> Vec<f64> {
        self.roots.iter().map(|&r| values[r]).collect()
    }

    /// Tangents of the roots for a unit seed on state slot `state`, given the
    /// node values from [`Tape::forward`].
    pub fn tangent(&self, values: &[f64], state: usize, scratch: &mut Vec<f64>) -> Vec<f64> {
        scratch.clear();
        scratch.reserve(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let v = values;
            let t = &*scratch;
            let d = match *op {
                Op::Const(_) | Op::Input(_) | Op::Param(_) => 0.0,
                Op::State(s) => f64::from(u8::from(s == state)),
                Op::Neg(a) => -t[a],
                Op::Add(a, b) => t[a] + t[b],
                Op::Sub(a, b) => t[a] - t[b],
                Op::Mul(a, b) => t[a] * v[b] + v[a] * t[b],
                Op::Div(a, b) => (t[a] * v[b] - v[a] * t[b]) / (v[b] * v[b]),
                Op::Pow(a, k) => match k {
                    0 => 0.0,
                    _ => f64::from(k) * powi(v[a], k - 1) * t[a],
                },
                Op::Sin(a) => t[a] * v[a].cos(),
                Op::Cos(a) => -t[a] * v[a].sin(),
                Op::Exp(a) => t[a] * v[i],
            };
            scratch.push(d);
        }
        self.roots.iter().map(|&r| scratch[r]).collect()
    }

    /// Jacobian of the roots with respect to the first `n_states` state slots:
    /// one unit-seed tangent sweep per state. Row per root.
    pub fn jacobian(&self, values: &[f64], n_states: usize) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; n_states]; self.roots.len()];
        let mut scratch = Vec::new();
        for j in 0..n_states {
            for (r, t) in self
                .tangent(values, j, &mut scratch)
                .into_iter()
                .enumerate()
            {
                rows[r][j] = t;
            }
        }
        rows
    }
}
