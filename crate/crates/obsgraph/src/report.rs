use obsgraph_core::graph::{InferenceDigraph, StructuralReport};
use obsgraph_core::lie::LieReport;
use serde::Serialize;

use crate::bench::BenchReport;
use crate::source::ModelRef;

/// Bumped on any incompatible change to the JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Committed JSON schema for [`AnalysisReportDocument`].
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalysisKind {
    Structural,
    Lie,
    Bench,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub clock: &'static str,
    pub wall_ms: f64,
}

impl Timing {
    pub fn monotonic(elapsed: std::time::Duration) -> Self {
        Timing {
            clock: "monotonic",
            wall_ms: elapsed.as_secs_f64() * 1e3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StructuralPayload {
    pub edges: Vec<(String, String)>,
    /// Member names per component, same order as `decomposition.components`.
    pub components: Vec<Vec<String>>,
    #[serde(flatten)]
    pub report: StructuralReport,
}

impl StructuralPayload {
    pub fn new(graph: &InferenceDigraph, report: StructuralReport) -> Self {
        let names = graph.nodes();
        StructuralPayload {
            edges: graph
                .edges()
                .map(|(u, v)| (names[u].clone(), names[v].clone()))
                .collect(),
            components: report.component_names(),
            report,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReportDocument {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub analysis: AnalysisKind,
    pub models: Vec<ModelRef>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub timing: Timing,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structural: Option<StructuralPayload>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lie: Option<LieReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchReport>,
}

impl AnalysisReportDocument {
    pub fn new(analysis: AnalysisKind, models: Vec<ModelRef>, timing: Timing) -> Self {
        AnalysisReportDocument {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo::default(),
            analysis,
            models,
            seed: None,
            tolerance: None,
            timing,
            structural: None,
            lie: None,
            bench: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
