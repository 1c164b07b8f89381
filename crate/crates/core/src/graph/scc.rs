use serde::Serialize;

use super::InferenceDigraph;

/// Strongly connected components in emission order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sccs {
    /// Member node indices, ascending within each component.
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
}

/// Root flags and condensation edges for a set of components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootAnalysis {
    pub root_flags: Vec<bool>,
    /// Distinct `(from, to)` component pairs, `from != to`, sorted.
    pub condensation_edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SccDecomposition {
    pub components: Vec<Vec<usize>>,
    pub component_of: Vec<usize>,
    pub root_flags: Vec<bool>,
    pub condensation_edges: Vec<(usize, usize)>,
}

impl SccDecomposition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Indices of root components, ascending.
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        self.root_flags
            .iter()
            .enumerate()
            .filter(|(_, &r)| r)
            .map(|(i, _)| i)
    }
}

/// Two-pass Kosaraju–Sharir with explicit stacks.
///
/// Pass one visits roots and successors in ascending index order and records
/// finishing order. Pass two pops that order and grows one component per tree
/// on the transposed graph.
pub fn kosaraju(graph: &InferenceDigraph) -> Sccs {
    let n = graph.node_count();
    let mut visited = vec![false; n];
    let mut finished = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push((start, 0));
        while let Some(top) = stack.last_mut() {
            let (u, next) = *top;
            let succ = graph.successors(u);
            if let Some(&v) = succ.get(next) {
                top.1 += 1;
                if !visited[v] {
                    visited[v] = true;
                    stack.push((v, 0));
                }
            } else {
                finished.push(u);
                stack.pop();
            }
        }
    }

    let transposed = graph.transpose();
    let mut component_of = vec![usize::MAX; n];
    let mut components = Vec::new();
    let mut work = Vec::new();
    while let Some(s) = finished.pop() {
        if component_of[s] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut members = vec![s];
        component_of[s] = id;
        work.push(s);
        while let Some(u) = work.pop() {
            for &v in transposed.successors(u) {
                if component_of[v] == usize::MAX {
                    component_of[v] = id;
                    members.push(v);
                    work.push(v);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    Sccs {
        components,
        component_of,
    }
}

/// A component is a root iff no edge enters it from another component.
pub fn root_sccs(sccs: &Sccs, graph: &InferenceDigraph) -> RootAnalysis {
    let k = sccs.components.len();
    let mut root_flags = vec![true; k];
    let mut last_seen = vec![usize::MAX; k];
    let mut condensation_edges = Vec::new();
    for (c, members) in sccs.components.iter().enumerate() {
        for &u in members {
            for &v in graph.successors(u) {
                let cv = sccs.component_of[v];
                if cv != c {
                    root_flags[cv] = false;
                    if last_seen[cv] != c {
                        last_seen[cv] = c;
                        condensation_edges.push((c, cv));
                    }
                }
            }
        }
    }
    condensation_edges.sort_unstable();
    RootAnalysis {
        root_flags,
        condensation_edges,
    }
}

pub fn decompose(graph: &InferenceDigraph) -> SccDecomposition {
    let sccs = kosaraju(graph);
    let roots = root_sccs(&sccs, graph);
    SccDecomposition {
        components: sccs.components,
        component_of: sccs.component_of,
        root_flags: roots.root_flags,
        condensation_edges: roots.condensation_edges,
    }
}
