use rustc_hash::FxHashMap;

use super::simplify::{add, cos, div, mul, neg, pow, simplify, sin, sub};
use super::{Expression, Node};

/// Symbolic partial derivative of `expr` with respect to the state or input
/// named `wrt`. The result is simplified; an absent symbol yields zero.
pub fn differentiate(expr: &Expression, wrt: &str) -> Expression {
    let one = Expression::one();
    let zero = Expression::zero();
    derivative_along(expr, &|node| match node {
        Node::State(s) | Node::Input(s) if &**s == wrt => one.clone(),
        _ => zero.clone(),
    })
}

/// Derivative of `expr` along a direction given by the derivative of each
/// leaf: `Σ_v ∂expr/∂v · leaf(v)`. `leaf` is only called on symbol nodes.
pub fn derivative_along(expr: &Expression, leaf: &dyn Fn(&Node) -> Expression) -> Expression {
    let simplified = simplify(expr);
    let mut memo = FxHashMap::default();
    diff_rec(&simplified, leaf, &mut memo)
}

fn diff_rec(
    expr: &Expression,
    leaf: &dyn Fn(&Node) -> Expression,
    memo: &mut FxHashMap<*const Node, Expression>,
) -> Expression {
    let shared = expr.is_shared();
    if shared {
        if let Some(d) = memo.get(&expr.key()) {
            return d.clone();
        }
    }
    let d = match expr.node() {
        Node::Constant(_) => Expression::zero(),
        Node::State(_) | Node::Input(_) | Node::Parameter(_) => leaf(expr.node()),
        Node::Negate(a) => neg(&diff_rec(a, leaf, memo)),
        Node::Add(a, b) => add(&diff_rec(a, leaf, memo), &diff_rec(b, leaf, memo)),
        Node::Sub(a, b) => sub(&diff_rec(a, leaf, memo), &diff_rec(b, leaf, memo)),
        Node::Mul(a, b) => {
            let (da, db) = (diff_rec(a, leaf, memo), diff_rec(b, leaf, memo));
            add(&mul(&da, b), &mul(a, &db))
        }
        Node::Div(a, b) => {
            let (da, db) = (diff_rec(a, leaf, memo), diff_rec(b, leaf, memo));
            if db.is_constant(0.0) {
                div(&da, b)
            } else {
                let num = sub(&mul(&da, b), &mul(a, &db));
                div(&num, &pow(b, 2))
            }
        }
        Node::IntPow(a, k) => {
            let da = diff_rec(a, leaf, memo);
            if *k == 0 || da.is_constant(0.0) {
                Expression::zero()
            } else {
                let outer = mul(&Expression::constant(f64::from(*k)), &pow(a, k - 1));
                mul(&outer, &da)
            }
        }
        Node::Sin(a) => mul(&cos(a), &diff_rec(a, leaf, memo)),
        Node::Cos(a) => mul(&neg(&sin(a)), &diff_rec(a, leaf, memo)),
        // d exp(u) = exp(u) du, reusing the node itself
        Node::Exp(_) => {
            let Node::Exp(a) = expr.node() else {
                unreachable!()
            };
            mul(expr, &diff_rec(a, leaf, memo))
        }
    };
    if shared {
        memo.insert(expr.key(), d.clone());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{evaluate, Environment};

    fn x(i: usize) -> Expression {
        Expression::state(&format!("x{i}"))
    }

    #[test]
    fn square() {
        let d = differentiate(&x(1).powi(2), "x1");
        assert_eq!(d, Expression::constant(2.0) * x(1));
        assert_eq!(d.to_string(), "2.0*x1");
    }

    #[test]
    fn sine() {
        assert_eq!(differentiate(&x(2).sin(), "x2"), x(2).cos());
    }

    #[test]
    fn absent_symbol_is_zero() {
        let e = Expression::parameter("c2") * Expression::input("Id");
        assert!(differentiate(&e, "omega").is_constant(0.0));
    }

    #[test]
    fn with_respect_to_input() {
        let e = Expression::parameter("c2") * Expression::input("Id");
        assert_eq!(differentiate(&e, "Id"), Expression::parameter("c2"));
    }

    #[test]
    fn quotient_and_exp() {
        // d/dx (exp(2x) / x) = exp(2x)(2x - 1)/x^2
        let e = (Expression::constant(2.0) * x(1)).exp() / x(1);
        let d = differentiate(&e, "x1");
        let env = Environment::new().with_state("x1", 0.7);
        let expected = (1.4f64).exp() * (1.4 - 1.0) / 0.49;
        let got = evaluate(&d, &env).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected.abs());
    }

    #[test]
    fn example1_third_lie_row() {
        // d/dx1 of 2 x1 (sin x2 - x1 + x4) = 2 sin x2 - 4 x1 + 2 x4
        let l3 = Expression::constant(2.0) * x(1) * (x(2).sin() - x(1) + x(4));
        let d = differentiate(&l3, "x1");
        let env = Environment::new()
            .with_state("x1", 0.3)
            .with_state("x2", 1.1)
            .with_state("x4", -0.4);
        let expected = 2.0 * 1.1f64.sin() - 4.0 * 0.3 + 2.0 * -0.4;
        assert!((evaluate(&d, &env).unwrap() - expected).abs() < 1e-14);
    }
}
