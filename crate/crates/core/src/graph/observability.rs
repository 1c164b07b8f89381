use serde::Serialize;

use super::{build_digraph, decompose, InferenceDigraph, SccDecomposition};
use crate::expr::{state_index_rows, Expression};
use crate::model::{DynSystem, Rhs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructuralVerdict {
    StructurallyObservable,
    NotStructurallyObservable,
}

impl StructuralVerdict {
    pub fn is_observable(self) -> bool {
        self == StructuralVerdict::StructurallyObservable
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootCoverage {
    pub component: usize,
    pub states: Vec<String>,
    pub covered_by: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructuralReport {
    pub states: Vec<String>,
    pub decomposition: SccDecomposition,
    /// One entry per root component, in emission order.
    pub roots: Vec<RootCoverage>,
    pub uncovered: Vec<Vec<String>>,
    pub verdict: StructuralVerdict,
    pub suggested_placement: Vec<String>,
}

impl StructuralReport {
    /// Component member names, in emission order.
    pub fn component_names(&self) -> Vec<Vec<String>> {
        self.decomposition
            .components
            .iter()
            .map(|c| c.iter().map(|&i| self.states[i].clone()).collect())
            .collect()
    }
}

pub fn check_structural_observability(system: &DynSystem) -> StructuralReport {
    let graph = build_digraph(system);
    let decomposition = decompose(&graph);
    structural_report(system, &graph, decomposition)
}

/// Coverage analysis over a precomputed decomposition of `graph`.
pub fn structural_report(
    system: &DynSystem,
    graph: &InferenceDigraph,
    decomposition: SccDecomposition,
) -> StructuralReport {
    let exprs: Vec<&Expression> = system
        .outputs()
        .iter()
        .filter_map(|o| o.rhs.as_expression())
        .collect();
    let mut expr_rows =
        state_index_rows(&exprs, system.state_count(), |s| system.state_index(s)).into_iter();
    let output_deps: Vec<(&str, Vec<usize>)> = system
        .outputs()
        .iter()
        .map(|o| {
            let idx = match &o.rhs {
                Rhs::Expression(_) => expr_rows.next().expect("one row per expression"),
                Rhs::Depends(d) => d
                    .states
                    .iter()
                    .filter_map(|s| system.state_index(s))
                    .collect(),
            };
            (o.name.as_str(), idx)
        })
        .collect();

    let name = |i: usize| graph.nodes()[i].clone();
    let mut roots = Vec::new();
    for c in decomposition.roots() {
        let covered_by = output_deps
            .iter()
            .filter(|(_, deps)| deps.iter().any(|&s| decomposition.component_of[s] == c))
            .map(|(n, _)| n.to_string())
            .collect();
        roots.push(RootCoverage {
            component: c,
            states: decomposition.components[c]
                .iter()
                .map(|&i| name(i))
                .collect(),
            covered_by,
        });
    }
    let uncovered: Vec<Vec<String>> = roots
        .iter()
        .filter(|r| r.covered_by.is_empty())
        .map(|r| r.states.clone())
        .collect();
    let verdict = if uncovered.is_empty() {
        StructuralVerdict::StructurallyObservable
    } else {
        StructuralVerdict::NotStructurallyObservable
    };
    let mut report = StructuralReport {
        states: graph.nodes().to_vec(),
        decomposition,
        roots,
        uncovered,
        verdict,
        suggested_placement: Vec::new(),
    };
    report.suggested_placement = suggest_placement(&report);
    report
}

/// Lowest-index state of every uncovered root component. One measurement per
/// uncovered root is necessary, so the result is minimum-cardinality.
pub fn suggest_placement(report: &StructuralReport) -> Vec<String> {
    report
        .uncovered
        .iter()
        .filter_map(|states| states.first().cloned())
        .collect()
}
