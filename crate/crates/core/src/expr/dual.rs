use std::collections::HashMap;

use rustc_hash::FxHashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{lookup, EvalError, Expression, Node, SymbolKind};
use crate::expr::Environment;

/// Forward-mode dual number `value + tangent·ε`, `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub value: f64,
    pub tangent: f64,
}

impl Dual {
    pub fn new(value: f64, tangent: f64) -> Self {
        Dual { value, tangent }
    }

    pub fn constant(value: f64) -> Self {
        Dual {
            value,
            tangent: 0.0,
        }
    }

    pub fn sin(self) -> Self {
        Dual::new(self.value.sin(), self.tangent * self.value.cos())
    }

    pub fn cos(self) -> Self {
        Dual::new(self.value.cos(), -self.tangent * self.value.sin())
    }

    pub fn exp(self) -> Self {
        let e = self.value.exp();
        Dual::new(e, self.tangent * e)
    }

    pub fn powi(self, k: u32) -> Self {
        match k {
            0 => Dual::constant(1.0),
            _ => {
                let lower = super::powi(self.value, k - 1);
                Dual::new(lower * self.value, f64::from(k) * lower * self.tangent)
            }
        }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.tangent + rhs.tangent)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.tangent - rhs.tangent)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value * rhs.value,
            self.tangent * rhs.value + self.value * rhs.tangent,
        )
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value / rhs.value,
            (self.tangent * rhs.value - self.value * rhs.tangent) / (rhs.value * rhs.value),
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.tangent)
    }
}

/// Evaluates `expr` together with its directional derivative along `seed`
/// (state name → tangent component; missing states have zero tangent).
pub fn dual_evaluate(
    expr: &Expression,
    env: &Environment,
    seed: &HashMap<String, f64>,
) -> Result<(f64, f64), EvalError> {
    let mut memo = FxHashMap::default();
    let mut path = Vec::new();
    let d = dual_rec(expr, env, seed, &mut memo, &mut path)?;
    Ok((d.value, d.tangent))
}

fn dual_rec(
    expr: &Expression,
    env: &Environment,
    seed: &HashMap<String, f64>,
    memo: &mut FxHashMap<*const Node, Dual>,
    path: &mut Vec<usize>,
) -> Result<Dual, EvalError> {
    let shared = expr.is_shared();
    if shared {
        if let Some(&d) = memo.get(&expr.key()) {
            return Ok(d);
        }
    }
    let mut child = |i: usize, e: &Expression, memo: &mut FxHashMap<*const Node, Dual>| {
        path.push(i);
        let r = dual_rec(e, env, seed, memo, path);
        path.pop();
        r
    };
    let d = match expr.node() {
        Node::Constant(c) => Dual::constant(*c),
        Node::State(s) => Dual::new(
            lookup(env, SymbolKind::State, s)?,
            seed.get(&**s).copied().unwrap_or(0.0),
        ),
        Node::Input(s) => Dual::constant(lookup(env, SymbolKind::Input, s)?),
        Node::Parameter(s) => Dual::constant(lookup(env, SymbolKind::Parameter, s)?),
        Node::Negate(a) => -child(0, a, memo)?,
        Node::Add(a, b) => child(0, a, memo)? + child(1, b, memo)?,
        Node::Sub(a, b) => child(0, a, memo)? - child(1, b, memo)?,
        Node::Mul(a, b) => child(0, a, memo)? * child(1, b, memo)?,
        Node::Div(a, b) => {
            let num = child(0, a, memo)?;
            let den = child(1, b, memo)?;
            if den.value == 0.0 {
                return Err(EvalError::DivisionByZero {
                    path: path.clone(),
                    subtree: expr.to_string(),
                });
            }
            num / den
        }
        Node::IntPow(a, k) => child(0, a, memo)?.powi(*k),
        Node::Sin(a) => child(0, a, memo)?.sin(),
        Node::Cos(a) => child(0, a, memo)?.cos(),
        Node::Exp(a) => child(0, a, memo)?.exp(),
    };
    if shared {
        memo.insert(expr.key(), d);
    }
    Ok(d)
}
