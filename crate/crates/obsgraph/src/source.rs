use std::io::Read;
use std::path::Path;

use obsgraph_core::builtin::{catalog_entry, get_model, CatalogError};
use obsgraph_core::dsl::{self, Diagnostic};
use obsgraph_core::graph::{parse_adjacency_csv, structural_system, CsvError};
use obsgraph_core::model::{DynSystem, ModelError};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Builtin,
    File,
    Stdin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelRef {
    pub name: String,
    pub origin: Origin,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug)]
pub struct LoadedModel {
    pub reference: ModelRef,
    pub system: DynSystem,
    pub warnings: Vec<Diagnostic>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {} error(s)", diagnostics.len())]
    Parse {
        path: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("{path}: {source}")]
    Csv { path: String, source: CsvError },
    #[error("{path}: {source}")]
    Model { path: String, source: ModelError },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Resolves `spec` as `-` (stdin), a built-in key, or a file path. Files
/// ending in `.csv` are adjacency matrices; anything else is model text.
pub fn load(spec: &str) -> Result<LoadedModel, LoadError> {
    if spec == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|source| LoadError::Io {
                path: "<stdin>".into(),
                source,
            })?;
        return parse_text("<stdin>", &text, Origin::Stdin);
    }
    let path = Path::new(spec);
    if catalog_entry(spec).is_some() && !path.exists() {
        let system = get_model(spec)?;
        return Ok(LoadedModel {
            reference: ModelRef {
                name: spec.to_string(),
                origin: Origin::Builtin,
                path: None,
            },
            system,
            warnings: Vec::new(),
        });
    }
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: spec.into(),
        source,
    })?;
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        let graph = parse_adjacency_csv(&text).map_err(|source| LoadError::Csv {
            path: spec.into(),
            source,
        })?;
        let name = path
            .file_stem()
            .map_or("adjacency".into(), |s| s.to_string_lossy().into_owned());
        let system = structural_system(&name, &graph).map_err(|source| LoadError::Model {
            path: spec.into(),
            source,
        })?;
        return Ok(LoadedModel {
            reference: ModelRef {
                name,
                origin: Origin::File,
                path: Some(spec.into()),
            },
            system,
            warnings: Vec::new(),
        });
    }
    parse_text(spec, &text, Origin::File)
}

fn parse_text(path: &str, text: &str, origin: Origin) -> Result<LoadedModel, LoadError> {
    let (system, warnings) =
        dsl::parse_with_warnings(text).map_err(|diagnostics| LoadError::Parse {
            path: path.into(),
            diagnostics,
        })?;
    let reference = ModelRef {
        name: system.name().to_string(),
        path: (origin == Origin::File).then(|| path.to_string()),
        origin,
    };
    Ok(LoadedModel {
        reference,
        system,
        warnings,
    })
}
