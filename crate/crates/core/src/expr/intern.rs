use rustc_hash::FxHashMap;
use std::sync::Arc;

use super::{Expression, Node};

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Constant(u64),
    State(Arc<str>),
    Input(Arc<str>),
    Parameter(Arc<str>),
    Unary(u8, usize),
    Binary(u8, usize, usize),
    Pow(usize, u32),
}

/// Hash-consing: rebuilds `roots` so structurally identical subtrees are one
/// shared node. Values and printed forms are unchanged.
pub fn share_subexpressions(roots: &[Expression]) -> Vec<Expression> {
    let mut table: FxHashMap<Key, Expression> = FxHashMap::default();
    let mut done: FxHashMap<*const Node, Expression> = FxHashMap::default();
    let mut out = Vec::with_capacity(roots.len());
    for root in roots {
        let mut stack: Vec<(&Expression, bool)> = vec![(root, false)];
        while let Some((e, expanded)) = stack.pop() {
            if done.contains_key(&e.key()) {
                continue;
            }
            if !expanded {
                stack.push((e, true));
                stack.extend(e.children().into_iter().rev().map(|c| (c, false)));
                continue;
            }
            let id = |c: &Expression| done[&c.key()].key() as usize;
            let get = |c: &Expression| done[&c.key()].clone();
            let (key, rebuilt) = match e.node() {
                Node::Constant(c) => (Key::Constant(c.to_bits()), None),
                Node::State(s) => (Key::State(s.clone()), None),
                Node::Input(s) => (Key::Input(s.clone()), None),
                Node::Parameter(s) => (Key::Parameter(s.clone()), None),
                Node::Negate(a) => (Key::Unary(0, id(a)), Some(Node::Negate(get(a)))),
                Node::Sin(a) => (Key::Unary(1, id(a)), Some(Node::Sin(get(a)))),
                Node::Cos(a) => (Key::Unary(2, id(a)), Some(Node::Cos(get(a)))),
                Node::Exp(a) => (Key::Unary(3, id(a)), Some(Node::Exp(get(a)))),
                Node::IntPow(a, k) => (Key::Pow(id(a), *k), Some(Node::IntPow(get(a), *k))),
                Node::Add(a, b) => (
                    Key::Binary(0, id(a), id(b)),
                    Some(Node::Add(get(a), get(b))),
                ),
                Node::Sub(a, b) => (
                    Key::Binary(1, id(a), id(b)),
                    Some(Node::Sub(get(a), get(b))),
                ),
                Node::Mul(a, b) => (
                    Key::Binary(2, id(a), id(b)),
                    Some(Node::Mul(get(a), get(b))),
                ),
                Node::Div(a, b) => (
                    Key::Binary(3, id(a), id(b)),
                    Some(Node::Div(get(a), get(b))),
                ),
            };
            let canonical = table
                .entry(key)
                .or_insert_with(|| rebuilt.map_or_else(|| e.clone(), Expression::new))
                .clone();
            done.insert(e.key(), canonical);
        }
        out.push(done[&root.key()].clone());
    }
    out
}
