use std::fmt::Write as _;

use thiserror::Error;

use super::{decompose, InferenceDigraph, SccDecomposition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    Csv,
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("empty input")]
    Empty,
    #[error("header has {header} names but row {row} has {found} entries")]
    RowLength {
        row: usize,
        header: usize,
        found: usize,
    },
    #[error("row {row} is labelled '{found}', expected '{expected}'")]
    RowLabel {
        row: usize,
        expected: String,
        found: String,
    },
    #[error("row {row}: entry '{value}' is not 0 or 1")]
    Entry { row: usize, value: String },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
}

pub fn export_digraph(graph: &InferenceDigraph, format: ExportFormat) -> String {
    match format {
        ExportFormat::Dot => export_dot(graph, &decompose(graph)),
        ExportFormat::Csv => export_csv(graph),
    }
}

/// DOT rendering; root-component members are filled and tagged `root=true`.
pub fn export_dot(graph: &InferenceDigraph, decomposition: &SccDecomposition) -> String {
    let mut out = String::from("digraph inference {\n");
    for (i, name) in graph.nodes().iter().enumerate() {
        let c = decomposition.component_of[i];
        if decomposition.root_flags[c] {
            let _ = writeln!(
                out,
                "  {} [scc={c}, root=true, style=filled, fillcolor=lightgray];",
                quote(name)
            );
        } else {
            let _ = writeln!(out, "  {} [scc={c}];", quote(name));
        }
    }
    for (u, v) in graph.edges() {
        let _ = writeln!(
            out,
            "  {} -> {};",
            quote(&graph.nodes()[u]),
            quote(&graph.nodes()[v])
        );
    }
    out.push_str("}\n");
    out
}

fn quote(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Adjacency matrix with a header row and column of node names.
pub fn export_csv(graph: &InferenceDigraph) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = std::iter::once("").chain(graph.nodes().iter().map(String::as_str));
    w.write_record(header).expect("write to Vec");
    for (u, name) in graph.nodes().iter().enumerate() {
        let mut row = vec![false; graph.node_count()];
        for &v in graph.successors(u) {
            row[v] = true;
        }
        let cells =
            std::iter::once(name.as_str()).chain(row.iter().map(|&b| if b { "1" } else { "0" }));
        w.write_record(cells).expect("write to Vec");
    }
    String::from_utf8(w.into_inner().expect("flush to Vec")).expect("csv output is UTF-8")
}

/// Inverse of [`export_csv`]. Row labels must repeat the header order.
pub fn parse_adjacency_csv(text: &str) -> Result<InferenceDigraph, CsvError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let header = records.next().ok_or(CsvError::Empty)??;
    let nodes: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = nodes.len();
    let mut matrix = Vec::with_capacity(n);
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        let row = i + 1;
        if rec.len() != n + 1 {
            return Err(CsvError::RowLength {
                row,
                header: n,
                found: rec.len().saturating_sub(1),
            });
        }
        let label = &rec[0];
        if nodes.get(i).map(String::as_str) != Some(label) {
            return Err(CsvError::RowLabel {
                row,
                expected: nodes.get(i).cloned().unwrap_or_default(),
                found: label.to_string(),
            });
        }
        let entries = rec
            .iter()
            .skip(1)
            .map(|v| match v {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(CsvError::Entry {
                    row,
                    value: v.to_string(),
                }),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        matrix.push(entries);
    }
    if matrix.len() != n {
        return Err(CsvError::RowCount {
            expected: n,
            found: matrix.len(),
        });
    }
    Ok(InferenceDigraph::from_matrix(nodes, &matrix))
}
