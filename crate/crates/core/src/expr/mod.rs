//! Immutable symbolic expressions over states, inputs and parameters.
//!
//! An [`Expression`] is a reference-counted node. Cloning is cheap and
//! subtrees are shared freely, so Lie chains and symbolic derivatives form a
//! DAG rather than a tree. Every traversal in this module memoizes shared
//! nodes by address, which keeps work proportional to the DAG size.

mod diff;
mod dual;
mod intern;
mod simplify;
mod tape;

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::{FxHashMap, FxHashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use diff::{derivative_along, differentiate};
pub use dual::{dual_evaluate, Dual};
pub use intern::share_subexpressions;
pub use simplify::simplify;
pub use tape::{Tape, VarLayout};

/// Interned symbol name.
pub type Symbol = Arc<str>;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Constant(f64),
    Parameter(Symbol),
    State(Symbol),
    Input(Symbol),
    Negate(Expression),
    Add(Expression, Expression),
    Sub(Expression, Expression),
    Mul(Expression, Expression),
    Div(Expression, Expression),
    IntPow(Expression, u32),
    Sin(Expression),
    Cos(Expression),
    Exp(Expression),
}

/// A shared, immutable expression node.
#[derive(Clone)]
pub struct Expression(Arc<Node>);

impl Expression {
    pub fn new(node: Node) -> Self {
        Expression(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: f64) -> Self {
        Self::new(Node::Constant(value))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn state(name: &str) -> Self {
        Self::new(Node::State(name.into()))
    }

    pub fn input(name: &str) -> Self {
        Self::new(Node::Input(name.into()))
    }

    pub fn parameter(name: &str) -> Self {
        Self::new(Node::Parameter(name.into()))
    }

    pub fn powi(&self, exponent: u32) -> Self {
        Self::new(Node::IntPow(self.clone(), exponent))
    }

    pub fn sin(&self) -> Self {
        Self::new(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Self {
        Self::new(Node::Cos(self.clone()))
    }

    pub fn exp(&self) -> Self {
        Self::new(Node::Exp(self.clone()))
    }

    pub fn as_constant(&self) -> Option<f64> {
        match *self.0 {
            Node::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_constant(&self, value: f64) -> bool {
        self.as_constant() == Some(value)
    }

    pub fn ptr_eq(&self, other: &Expression) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Child expressions, in operand order.
    pub fn children(&self) -> Vec<&Expression> {
        match self.node() {
            Node::Constant(_) | Node::Parameter(_) | Node::State(_) | Node::Input(_) => vec![],
            Node::Negate(a) | Node::IntPow(a, _) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) => {
                vec![a]
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => vec![a, b],
        }
    }

    pub(crate) fn key(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    /// True when more than one handle refers to this node, i.e. it may be
    /// reached again during a traversal and is worth memoizing.
    pub(crate) fn is_shared(&self) -> bool {
        Arc::strong_count(&self.0) > 1
    }

    /// Number of distinct nodes in the DAG rooted here.
    pub fn dag_size(&self) -> usize {
        let mut seen = FxHashSet::default();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if seen.insert(e.key()) {
                stack.extend(e.children());
            }
        }
        seen.len()
    }

    /// Calls `f` on each child, in operand order, without allocating.
    pub(crate) fn for_each_child<'a>(&'a self, mut f: impl FnMut(&'a Expression)) {
        match self.node() {
            Node::Constant(_) | Node::Parameter(_) | Node::State(_) | Node::Input(_) => {}
            Node::Negate(a) | Node::IntPow(a, _) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) => {
                f(a)
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                f(a);
                f(b);
            }
        }
    }

    /// Every state, input and parameter name that occurs syntactically.
    pub fn free_symbols(&self) -> BTreeSet<(SymbolKind, String)> {
        self.symbols_borrowed()
            .into_iter()
            .map(|(k, n)| (k, n.to_string()))
            .collect()
    }

    fn symbols_borrowed(&self) -> BTreeSet<(SymbolKind, &str)> {
        let mut out = BTreeSet::new();
        let mut seen = FxHashSet::default();
        let mut stack = vec![self];
        while let Some(e) = stack.pop() {
            if e.is_shared() && !seen.insert(e.key()) {
                continue;
            }
            match e.node() {
                Node::State(s) => {
                    out.insert((SymbolKind::State, &**s));
                }
                Node::Input(s) => {
                    out.insert((SymbolKind::Input, &**s));
                }
                Node::Parameter(s) => {
                    out.insert((SymbolKind::Parameter, &**s));
                }
                _ => e.for_each_child(|c| stack.push(c)),
            }
        }
        out
    }
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.ptr_eq(other) || *self.0 == *other.0
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({self})")
    }
}

impl From<f64> for Expression {
    fn from(value: f64) -> Self {
        Expression::constant(value)
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                Expression::new(Node::$variant(self, rhs))
            }
        }
        impl std::ops::$trait<&Expression> for &Expression {
            type Output = Expression;
            fn $method(self, rhs: &Expression) -> Expression {
                Expression::new(Node::$variant(self.clone(), rhs.clone()))
            }
        }
        impl std::ops::$trait<&Expression> for Expression {
            type Output = Expression;
            fn $method(self, rhs: &Expression) -> Expression {
                Expression::new(Node::$variant(self, rhs.clone()))
            }
        }
        impl std::ops::$trait<Expression> for &Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                Expression::new(Node::$variant(self.clone(), rhs))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl std::ops::Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::new(Node::Negate(self))
    }
}

impl std::ops::Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::new(Node::Negate(self.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    State,
    Input,
    Parameter,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolKind::State => "state",
            SymbolKind::Input => "input",
            SymbolKind::Parameter => "parameter",
        })
    }
}

/// Numeric bindings for every free symbol of an expression.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct Environment {
    pub states: BTreeMap<String, f64>,
    pub inputs: BTreeMap<String, f64>,
    pub parameters: BTreeMap<String, f64>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_state(mut self, name: &str, value: f64) -> Self {
        self.states.insert(name.to_string(), value);
        self
    }

    pub fn with_input(mut self, name: &str, value: f64) -> Self {
        self.inputs.insert(name.to_string(), value);
        self
    }

    pub fn with_parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    pub fn lookup(&self, kind: SymbolKind, name: &str) -> Option<f64> {
        match kind {
            SymbolKind::State => self.states.get(name),
            SymbolKind::Input => self.inputs.get(name),
            SymbolKind::Parameter => self.parameters.get(name),
        }
        .copied()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound {kind} '{name}'")]
    UnboundSymbol { kind: SymbolKind, name: String },
    #[error("division by zero in '{subtree}' (at path {path:?})")]
    DivisionByZero {
        /// Child indices from the root down to the offending division.
        path: Vec<usize>,
        subtree: String,
    },
}

/// Evaluates `expr` at `env`.
pub fn evaluate(expr: &Expression, env: &Environment) -> Result<f64, EvalError> {
    let mut memo = FxHashMap::default();
    let mut path = Vec::new();
    eval_rec(expr, env, &mut memo, &mut path)
}

fn eval_rec(
    expr: &Expression,
    env: &Environment,
    memo: &mut FxHashMap<*const Node, f64>,
    path: &mut Vec<usize>,
) -> Result<f64, EvalError> {
    let shared = expr.is_shared();
    if shared {
        if let Some(&v) = memo.get(&expr.key()) {
            return Ok(v);
        }
    }
    let mut child = |i: usize, e: &Expression, memo: &mut FxHashMap<*const Node, f64>| {
        path.push(i);
        let r = eval_rec(e, env, memo, path);
        path.pop();
        r
    };
    let value = match expr.node() {
        Node::Constant(c) => *c,
        Node::State(s) => lookup(env, SymbolKind::State, s)?,
        Node::Input(s) => lookup(env, SymbolKind::Input, s)?,
        Node::Parameter(s) => lookup(env, SymbolKind::Parameter, s)?,
        Node::Negate(a) => -child(0, a, memo)?,
        Node::Add(a, b) => child(0, a, memo)? + child(1, b, memo)?,
        Node::Sub(a, b) => child(0, a, memo)? - child(1, b, memo)?,
        Node::Mul(a, b) => child(0, a, memo)? * child(1, b, memo)?,
        Node::Div(a, b) => {
            let num = child(0, a, memo)?;
            let den = child(1, b, memo)?;
            if den == 0.0 {
                return Err(EvalError::DivisionByZero {
                    path: path.clone(),
                    subtree: expr.to_string(),
                });
            }
            num / den
        }
        Node::IntPow(a, k) => powi(child(0, a, memo)?, *k),
        Node::Sin(a) => child(0, a, memo)?.sin(),
        Node::Cos(a) => child(0, a, memo)?.cos(),
        Node::Exp(a) => child(0, a, memo)?.exp(),
    };
    if shared {
        memo.insert(expr.key(), value);
    }
    Ok(value)
}

fn lookup(env: &Environment, kind: SymbolKind, name: &str) -> Result<f64, EvalError> {
    env.lookup(kind, name)
        .ok_or_else(|| EvalError::UnboundSymbol {
            kind,
            name: name.to_string(),
        })
}

pub(crate) fn powi(base: f64, exponent: u32) -> f64 {
    match i32::try_from(exponent) {
        Ok(k) => base.powi(k),
        Err(_) => base.powf(exponent as f64),
    }
}

/// State names present in `expr` after local simplification.
///
/// Occurrence is syntactic: a state that survives simplification counts as a
/// dependency even if it would cancel algebraically.
pub fn dependencies(expr: &Expression) -> BTreeSet<String> {
    syntactic_states(&simplify(expr))
}

/// Sorted state indices each expression depends on after simplification.
/// `index` maps a state name to its slot below `n_states`; other names are
/// ignored. Simplification shares one memo across all roots.
pub(crate) fn state_index_rows(
    roots: &[&Expression],
    n_states: usize,
    index: impl Fn(&str) -> Option<usize>,
) -> Vec<Vec<usize>> {
    let simplified = simplify::simplify_all(roots);
    let mut mark = vec![usize::MAX; n_states];
    let mut seen = FxHashSet::with_capacity_and_hasher(64, Default::default());
    let mut stack = Vec::new();
    let mut rows = Vec::with_capacity(simplified.len());
    for (r, root) in simplified.iter().enumerate() {
        seen.clear();
        let mut row = Vec::new();
        stack.push(root);
        while let Some(e) = stack.pop() {
            if e.is_shared() && !seen.insert(e.key()) {
                continue;
            }
            match e.node() {
                Node::State(s) => {
                    if let Some(i) = index(s) {
                        if mark[i] != r {
                            mark[i] = r;
                            row.push(i);
                        }
                    }
                }
                _ => e.for_each_child(|c| stack.push(c)),
            }
        }
        row.sort_unstable();
        rows.push(row);
    }
    rows
}

/// State names present in `expr` as written, without simplifying first.
pub fn syntactic_states(expr: &Expression) -> BTreeSet<String> {
    expr.symbols_borrowed()
        .into_iter()
        .filter(|(k, _)| *k == SymbolKind::State)
        .map(|(_, n)| n.to_string())
        .collect()
}

// Binding strength used by the printer. Mirrors the DSL grammar.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_ATOM: u8 = 5;

fn precedence(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => PREC_SUM,
        Node::Mul(..) | Node::Div(..) => PREC_PRODUCT,
        Node::Negate(_) => PREC_UNARY,
        Node::IntPow(..) => 4,
        _ => PREC_ATOM,
    }
}

fn write_prec(f: &mut fmt::Formatter<'_>, e: &Expression, min: u8) -> fmt::Result {
    if precedence(e.node()) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Formats a constant so the DSL parser reads back the identical value:
/// negative values are parenthesised so they are lexed as one literal.
fn write_constant(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.is_sign_negative() {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{c:?}")
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Constant(c) => write_constant(f, *c),
            Node::Parameter(s) | Node::State(s) | Node::Input(s) => f.write_str(s),
            Node::Negate(a) => {
                f.write_str("-")?;
                let starts_numeric = matches!(a.node(), Node::Constant(_))
                    || matches!(a.node(), Node::IntPow(b, _) if b.as_constant().is_some_and(|c| !c.is_sign_negative()));
                if starts_numeric {
                    write!(f, "({a})")
                } else {
                    write_prec(f, a, PREC_UNARY)
                }
            }
            Node::Add(a, b) => {
                write_prec(f, a, PREC_SUM)?;
                f.write_str(" + ")?;
                write_prec(f, b, PREC_PRODUCT)
            }
            Node::Sub(a, b) => {
                write_prec(f, a, PREC_SUM)?;
                f.write_str(" - ")?;
                write_prec(f, b, PREC_PRODUCT)
            }
            Node::Mul(a, b) => {
                write_prec(f, a, PREC_PRODUCT)?;
                f.write_str("*")?;
                write_prec(f, b, PREC_UNARY)
            }
            Node::Div(a, b) => {
                write_prec(f, a, PREC_PRODUCT)?;
                f.write_str("/")?;
                write_prec(f, b, PREC_UNARY)
            }
            Node::IntPow(a, k) => {
                write_prec(f, a, PREC_ATOM)?;
                write!(f, "^{k}")
            }
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Exp(a) => write!(f, "exp({a})"),
        }
    }
}
