use rustc_hash::FxHashMap;

use super::{powi, Expression, Node};

/// Applies local rewrites bottom-up: constant folding, additive and
/// multiplicative identities, `0*e`, trivial powers, double negation and
/// `e - e` for structurally equal operands.
///
/// Folding only happens when the folded value is finite, so the result can
/// always be printed and reparsed. Unchanged subtrees keep their identity.
pub fn simplify(expr: &Expression) -> Expression {
    let mut memo = FxHashMap::default();
    simplify_rec(expr, &mut memo)
}

/// Simplifies several expressions with one shared memo, so subterms shared
/// between them are processed once.
pub(crate) fn simplify_all(exprs: &[&Expression]) -> Vec<Expression> {
    let mut memo = FxHashMap::with_capacity_and_hasher(64 * exprs.len(), Default::default());
    exprs.iter().map(|e| simplify_rec(e, &mut memo)).collect()
}

fn simplify_rec(expr: &Expression, memo: &mut FxHashMap<*const Node, Expression>) -> Expression {
    let shared = expr.is_shared();
    if shared {
        if let Some(e) = memo.get(&expr.key()) {
            return e.clone();
        }
    }
    // Each arm: simplified children, then a rewrite if one applies, else the
    // original node when the children are unchanged, else a rebuilt node.
    macro_rules! unary {
        ($a:expr, $rewrite:expr, $build:expr) => {{
            let sa = simplify_rec($a, memo);
            match $rewrite(&sa) {
                Some(e) => e,
                None if sa.ptr_eq($a) => expr.clone(),
                None => $build(&sa),
            }
        }};
    }
    macro_rules! binary {
        ($a:expr, $b:expr, $rewrite:expr, $build:expr) => {{
            let (sa, sb) = (simplify_rec($a, memo), simplify_rec($b, memo));
            match $rewrite(&sa, &sb) {
                Some(e) => e,
                None if sa.ptr_eq($a) && sb.ptr_eq($b) => expr.clone(),
                None => $build(&sa, &sb),
            }
        }};
    }
    let out = match expr.node() {
        Node::Constant(_) | Node::Parameter(_) | Node::State(_) | Node::Input(_) => expr.clone(),
        Node::Negate(a) => unary!(a, try_neg, |x: &Expression| -x),
        Node::Sin(a) => unary!(a, try_sin, Expression::sin),
        Node::Cos(a) => unary!(a, try_cos, Expression::cos),
        Node::Exp(a) => unary!(a, try_exp, Expression::exp),
        Node::IntPow(a, k) => unary!(a, |x| try_pow(x, *k), |x: &Expression| x.powi(*k)),
        Node::Add(a, b) => binary!(a, b, try_add, |x: &Expression, y: &Expression| x + y),
        Node::Sub(a, b) => binary!(a, b, try_sub, |x: &Expression, y: &Expression| x - y),
        Node::Mul(a, b) => binary!(a, b, try_mul, |x: &Expression, y: &Expression| x * y),
        Node::Div(a, b) => binary!(a, b, try_div, |x: &Expression, y: &Expression| x / y),
    };
    if shared {
        memo.insert(expr.key(), out.clone());
    }
    out
}

fn fold(value: f64) -> Option<Expression> {
    value.is_finite().then(|| Expression::constant(value))
}

// Rewrites. Each assumes its operands are already simplified and returns
// `None` when the plain node is already simplified.

fn try_neg(a: &Expression) -> Option<Expression> {
    if let Some(c) = a.as_constant() {
        return Some(Expression::constant(-c));
    }
    match a.node() {
        Node::Negate(inner) => Some(inner.clone()),
        _ => None,
    }
}

fn try_add(a: &Expression, b: &Expression) -> Option<Expression> {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => fold(x + y),
        (Some(0.0), _) => Some(b.clone()),
        (_, Some(0.0)) => Some(a.clone()),
        _ => None,
    }
}

fn try_sub(a: &Expression, b: &Expression) -> Option<Expression> {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => fold(x - y),
        (_, Some(0.0)) => Some(a.clone()),
        (Some(0.0), _) => Some(neg(b)),
        _ if a == b => Some(Expression::zero()),
        _ => None,
    }
}

fn try_mul(a: &Expression, b: &Expression) -> Option<Expression> {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => fold(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => Some(Expression::zero()),
        (Some(1.0), _) => Some(b.clone()),
        (_, Some(1.0)) => Some(a.clone()),
        _ => None,
    }
}

fn try_div(a: &Expression, b: &Expression) -> Option<Expression> {
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) if y != 0.0 => fold(x / y),
        (_, Some(1.0)) => Some(a.clone()),
        _ => None,
    }
}

fn try_pow(a: &Expression, k: u32) -> Option<Expression> {
    match k {
        0 => Some(Expression::one()),
        1 => Some(a.clone()),
        _ => a.as_constant().and_then(|c| fold(powi(c, k))),
    }
}

fn try_sin(a: &Expression) -> Option<Expression> {
    a.as_constant().and_then(|c| fold(c.sin()))
}

fn try_cos(a: &Expression) -> Option<Expression> {
    a.as_constant().and_then(|c| fold(c.cos()))
}

fn try_exp(a: &Expression) -> Option<Expression> {
    a.as_constant().and_then(|c| fold(c.exp()))
}

// Smart constructors for callers building new simplified trees.

pub(crate) fn neg(a: &Expression) -> Expression {
    try_neg(a).unwrap_or_else(|| -a)
}

pub(crate) fn add(a: &Expression, b: &Expression) -> Expression {
    try_add(a, b).unwrap_or_else(|| a + b)
}

pub(crate) fn sub(a: &Expression, b: &Expression) -> Expression {
    try_sub(a, b).unwrap_or_else(|| a - b)
}

pub(crate) fn mul(a: &Expression, b: &Expression) -> Expression {
    try_mul(a, b).unwrap_or_else(|| a * b)
}

pub(crate) fn div(a: &Expression, b: &Expression) -> Expression {
    try_div(a, b).unwrap_or_else(|| a / b)
}

pub(crate) fn pow(a: &Expression, k: u32) -> Expression {
    try_pow(a, k).unwrap_or_else(|| a.powi(k))
}

pub(crate) fn sin(a: &Expression) -> Expression {
    try_sin(a).unwrap_or_else(|| a.sin())
}

pub(crate) fn cos(a: &Expression) -> Expression {
    try_cos(a).unwrap_or_else(|| a.cos())
}
