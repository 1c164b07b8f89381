//! Built-in model catalog. Every entry is parsed from a text fixture under
//! the workspace `models/` directory.

pub mod generate;

use serde::Serialize;
use thiserror::Error;

use crate::dsl;
use crate::graph::{parse_adjacency_csv, structural_system};
use crate::model::DynSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Every derivative and output has a closed-form expression.
    Symbolic,
    /// Dependency sets only; graph analysis only.
    Structural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureFormat {
    Dyn,
    AdjacencyCsv,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelCatalogEntry {
    pub key: &'static str,
    pub provenance: &'static str,
    pub kind: ModelKind,
    /// File name under `models/`.
    pub file: &'static str,
    #[serde(skip)]
    pub format: FixtureFormat,
    #[serde(skip)]
    pub source: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown model '{0}'; run `obsgraph models` for the list")]
    UnknownModel(String),
    #[error("built-in fixture {file} is invalid: {message}")]
    BadFixture { file: &'static str, message: String },
}

macro_rules! entry {
    ($key:literal, $kind:ident, $fmt:ident, $ext:literal, $prov:literal) => {
        ModelCatalogEntry {
            key: $key,
            provenance: $prov,
            kind: ModelKind::$kind,
            file: concat!($key, $ext),
            format: FixtureFormat::$fmt,
            source: include_str!(concat!("../../../../models/", $key, $ext)),
        }
    };
}

static CATALOG: [ModelCatalogEntry; 7] = [
    entry!(
        "example1_y1",
        Symbolic,
        Dyn,
        ".dyn",
        "four-state nonlinear example, measured y = x2"
    ),
    entry!(
        "example1_y2",
        Symbolic,
        Dyn,
        ".dyn",
        "four-state nonlinear example, measured y = x2 + sin(x1)"
    ),
    entry!(
        "example1_y3",
        Symbolic,
        Dyn,
        ".dyn",
        "four-state nonlinear example, measured y = x4"
    ),
    entry!(
        "tableII_literal",
        Structural,
        AdjacencyCsv,
        ".csv",
        "three-machine centralized adjacency matrix as printed, field-voltage rows marking Rf instead of VR"
    ),
    entry!(
        "wscc_centralized_structural",
        Structural,
        Dyn,
        ".dyn",
        "three-machine Kron-reduced model, dependency sets only, terminal voltages VD/VQ measured"
    ),
    entry!(
        "wscc_centralized_synthetic",
        Symbolic,
        Dyn,
        ".dyn",
        "three-machine model with a seeded synthetic reduced network, terminal voltages VD/VQ measured"
    ),
    entry!(
        "wscc_decentralized",
        Symbolic,
        Dyn,
        ".dyn",
        "single machine with IEEE type-1 exciter, stator currents ID/IQ measured, terminal voltages as inputs"
    ),
];

/// Catalog entries sorted by key.
pub fn list_models() -> &'static [ModelCatalogEntry] {
    &CATALOG
}

pub fn catalog_entry(key: &str) -> Option<&'static ModelCatalogEntry> {
    CATALOG.iter().find(|e| e.key == key)
}

pub fn get_model(key: &str) -> Result<DynSystem, CatalogError> {
    let entry = catalog_entry(key).ok_or_else(|| CatalogError::UnknownModel(key.to_string()))?;
    let bad = |message: String| CatalogError::BadFixture {
        file: entry.file,
        message,
    };
    match entry.format {
        FixtureFormat::Dyn => dsl::parse(entry.source).map_err(|d| bad(d[0].to_string())),
        FixtureFormat::AdjacencyCsv => {
            let graph = parse_adjacency_csv(entry.source).map_err(|e| bad(e.to_string()))?;
            structural_system(key, &graph).map_err(|e| bad(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::graph::{build_digraph, check_structural_observability, decompose};

    fn names(g: &crate::graph::InferenceDigraph, comp: &[usize]) -> Vec<String> {
        comp.iter().map(|&i| g.nodes()[i].clone()).collect()
    }

    #[test]
    fn catalog_is_sorted_and_loads() {
        let keys: Vec<_> = list_models().iter().map(|e| e.key).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        assert_eq!(keys, sorted);
        assert_eq!(keys.len(), 7);
        for e in list_models() {
            let s = get_model(e.key).unwrap();
            assert_eq!(s.name(), e.key);
            assert_eq!(
                s.is_fully_symbolic(),
                e.kind == ModelKind::Symbolic,
                "{}",
                e.key
            );
            assert!(!e.provenance.is_empty());
        }
        assert_eq!(
            get_model("nope"),
            Err(CatalogError::UnknownModel("nope".into()))
        );
    }

    #[test]
    fn generated_fixtures_are_current() {
        let src = |k| catalog_entry(k).unwrap().source;
        assert_eq!(
            src("wscc_decentralized"),
            generate::decentralized_source(generate::FIXTURE_SEED)
        );
        assert_eq!(
            src("wscc_centralized_synthetic"),
            generate::centralized_synthetic_source(generate::FIXTURE_SEED)
        );
    }

    #[test]
    fn example1_outputs() {
        let y3 = get_model("example1_y3").unwrap();
        assert_eq!(y3.outputs().len(), 1);
        assert_eq!(
            y3.outputs()[0].rhs.as_expression(),
            Some(&Expression::state("x4"))
        );
    }

    #[test]
    fn decentralized_adjacency() {
        let g = build_digraph(&get_model("wscc_decentralized").unwrap());
        let expected = [
            [1, 1, 1, 0, 1, 0, 0],
            [1, 1, 1, 0, 0, 0, 0],
            [0, 0, 0, 1, 0, 0, 0],
            [1, 1, 1, 1, 0, 0, 0],
            [0, 0, 0, 0, 1, 0, 1],
            [0, 0, 0, 0, 1, 1, 0],
            [0, 0, 0, 0, 1, 1, 1],
        ];
        let expected: Vec<Vec<bool>> = expected
            .iter()
            .map(|r| r.iter().map(|&b| b == 1).collect())
            .collect();
        assert_eq!(g.adjacency_matrix(), expected);
        let d = decompose(&g);
        assert_eq!(d.len(), 2);
        let roots: Vec<_> = d.roots().map(|c| names(&g, &d.components[c])).collect();
        assert_eq!(roots, vec![vec!["Eq1", "Ed1", "delta1", "omega1"]]);
    }

    #[test]
    fn centralized_structure() {
        for key in ["wscc_centralized_structural", "wscc_centralized_synthetic"] {
            let s = get_model(key).unwrap();
            let g = build_digraph(&s);
            let d = decompose(&g);
            assert_eq!(d.len(), 4, "{key}");
            let roots: Vec<_> = d.roots().collect();
            assert_eq!(roots.len(), 1);
            assert_eq!(d.components[roots[0]].len(), 12);
            for (c, comp) in d.components.iter().enumerate() {
                if c != roots[0] {
                    assert_eq!(comp.len(), 3);
                }
            }
            let r = check_structural_observability(&s);
            assert!(r.verdict.is_observable(), "{key}");
            let none = check_structural_observability(&s.with_outputs(vec![]).unwrap());
            assert_eq!(none.suggested_placement, ["Ed1"]);
        }
        assert_eq!(
            build_digraph(&get_model("wscc_centralized_structural").unwrap()),
            build_digraph(&get_model("wscc_centralized_synthetic").unwrap())
        );
    }

    #[test]
    fn centralized_field_voltage_rows() {
        let s = get_model("wscc_centralized_structural").unwrap();
        let g = build_digraph(&s);
        for i in 1..=3 {
            let row = s.state_index(&format!("Efd{i}")).unwrap();
            let deps: Vec<_> = g
                .successors(row)
                .iter()
                .map(|&v| g.nodes()[v].as_str())
                .collect();
            assert_eq!(deps, [format!("Efd{i}"), format!("VR{i}")]);
        }
    }

    #[test]
    fn literal_table_splits_off_regulator_roots() {
        let g = build_digraph(&get_model("tableII_literal").unwrap());
        assert_eq!(g.node_count(), 21);
        let d = decompose(&g);
        assert_eq!(d.len(), 7);
        let mut roots: Vec<_> = d.roots().map(|c| names(&g, &d.components[c])).collect();
        roots.sort();
        assert_eq!(roots.len(), 4);
        assert_eq!(roots[1..], [vec!["VR1"], vec!["VR2"], vec!["VR3"]]);
        // Same matrix as the structural fixture except the three field-voltage rows.
        let structural = build_digraph(&get_model("wscc_centralized_structural").unwrap());
        let (a, b) = (g.adjacency_matrix(), structural.adjacency_matrix());
        let differing: Vec<_> = (0..21)
            .filter(|&i| a[i] != b[i])
            .map(|i| g.nodes()[i].as_str())
            .collect();
        assert_eq!(differing, ["Efd1", "Efd2", "Efd3"]);
    }
}
