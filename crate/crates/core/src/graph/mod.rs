//! Inference digraph and structural observability.
//!
//! One node per state, in declaration order. Edge `x_i -> x_j` exists iff the
//! derivative of `x_i` depends on `x_j`, so row `i` of the adjacency matrix
//! lists what `ẋ_i` reads. Self-loops are kept.

mod export;
mod observability;
mod scc;

use serde::Serialize;

use crate::expr::{state_index_rows, Expression};
use crate::model::{DependencySpec, DynSystem, ModelError, Rhs};

pub use export::{
    export_csv, export_digraph, export_dot, parse_adjacency_csv, CsvError, ExportFormat,
};
pub use observability::{
    check_structural_observability, structural_report, suggest_placement, RootCoverage,
    StructuralReport, StructuralVerdict,
};
pub use scc::{decompose, kosaraju, root_sccs, RootAnalysis, SccDecomposition, Sccs};

/// Directed graph stored as sorted adjacency lists (CSR). Dense matrix views
/// are derived on demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InferenceDigraph {
    nodes: Vec<String>,
    #[serde(skip)]
    offsets: Vec<usize>,
    #[serde(skip)]
    targets: Vec<usize>,
}

impl InferenceDigraph {
    /// Builds a graph from an edge list. Duplicate edges collapse.
    ///
    /// Panics if an endpoint is out of range.
    pub fn from_edges(nodes: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let n = nodes.len();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} nodes");
            rows[u].push(v);
        }
        Self::from_rows(nodes, rows)
    }

    fn from_rows(nodes: Vec<String>, rows: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(nodes.len() + 1);
        let mut targets = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        offsets.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            targets.extend(row);
            offsets.push(targets.len());
        }
        InferenceDigraph {
            nodes,
            offsets,
            targets,
        }
    }

    /// Builds a graph from a dense 0/1 matrix, row = source.
    pub fn from_matrix(nodes: Vec<String>, matrix: &[Vec<bool>]) -> Self {
        let rows = matrix
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Self::from_rows(nodes, rows)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Out-neighbours of `u`, ascending.
    pub fn successors(&self, u: usize) -> &[usize] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.successors(u).binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| self.successors(u).iter().map(move |&v| (u, v)))
    }

    /// Reversed graph; in-neighbour lists come out ascending.
    pub fn transpose(&self) -> InferenceDigraph {
        let n = self.node_count();
        let mut counts = vec![0usize; n + 1];
        for &v in &self.targets {
            counts[v + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut fill = counts;
        let mut targets = vec![0; self.targets.len()];
        for u in 0..n {
            for &v in self.successors(u) {
                targets[fill[v]] = u;
                fill[v] += 1;
            }
        }
        InferenceDigraph {
            nodes: self.nodes.clone(),
            offsets,
            targets,
        }
    }

    /// Dense adjacency matrix, `a[i][j]` = edge `i -> j`.
    pub fn adjacency_matrix(&self) -> Vec<Vec<bool>> {
        let n = self.node_count();
        (0..n)
            .map(|u| {
                let mut row = vec![false; n];
                for &v in self.successors(u) {
                    row[v] = true;
                }
                row
            })
            .collect()
    }
}

/// Inference digraph of `system`; inputs and parameters add nothing.
pub fn build_digraph(system: &DynSystem) -> InferenceDigraph {
    let exprs: Vec<&Expression> = system
        .derivatives()
        .iter()
        .filter_map(Rhs::as_expression)
        .collect();
    let mut expr_rows =
        state_index_rows(&exprs, system.state_count(), |s| system.state_index(s)).into_iter();
    let rows = (0..system.state_count())
        .map(|i| match system.declared_row(i) {
            Some(row) => row.to_vec(),
            None => expr_rows.next().expect("one row per expression"),
        })
        .collect();
    InferenceDigraph::from_rows(system.states().to_vec(), rows)
}

/// Dependency-only system with one state per node and no inputs or outputs;
/// the inverse of [`build_digraph`] up to outputs.
pub fn structural_system(name: &str, graph: &InferenceDigraph) -> Result<DynSystem, ModelError> {
    let derivatives = graph
        .nodes()
        .iter()
        .enumerate()
        .map(|(u, node)| {
            let deps = graph
                .successors(u)
                .iter()
                .map(|&v| graph.nodes()[v].as_str());
            (node.clone(), Rhs::Depends(DependencySpec::new(deps, [])))
        })
        .collect();
    DynSystem::new(
        name,
        graph.nodes().to_vec(),
        vec![],
        vec![],
        derivatives,
        vec![],
    )
}
