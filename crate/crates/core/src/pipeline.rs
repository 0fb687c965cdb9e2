//! File discovery and the parse → abstract → measure chain for one file.

use std::path::{Path, PathBuf};

use walkdir::WalkDir;

use crate::abstraction::{abstract_workflow, ConstructBag};
use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::metrics::{workflow_metrics, WorkflowMetrics};
use crate::workflow::{enumerate_paths, parse_workflow, ConcretePath};

/// Everything derived from one workflow file.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub paths: Vec<ConcretePath>,
    pub bag: ConstructBag,
    pub metrics: WorkflowMetrics,
}

pub fn analyze_str(text: &str, catalog: &Catalog) -> Result<Analysis> {
    let tree = parse_workflow(text)?;
    let paths = enumerate_paths(&tree);
    let bag = abstract_workflow(&paths, catalog.rules());
    let metrics = workflow_metrics(&bag, catalog)?;
    Ok(Analysis {
        paths,
        bag,
        metrics,
    })
}

pub fn analyze_file(path: &Path, catalog: &Catalog) -> Result<Analysis> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    analyze_str(&text, catalog)
}

fn is_workflow_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("yml" | "yaml")
    )
}

/// Expands inputs into workflow files. Files are taken as given. For a
/// directory containing `.github/workflows`, only that folder is searched;
/// otherwise every `*.yml` / `*.yaml` below it is. Results are sorted and
/// deduplicated.
pub fn discover_workflows(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_file() {
            out.push(input.clone());
            continue;
        }
        if !input.is_dir() {
            return Err(Error::io(
                input,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
            ));
        }
        let github = input.join(".github").join("workflows");
        let root = if github.is_dir() {
            github
        } else {
            input.clone()
        };
        for entry in WalkDir::new(&root).sort_by_file_name() {
            let entry = entry.map_err(|e| Error::Invalid(e.to_string()))?;
            if entry.file_type().is_file() && is_workflow_file(entry.path()) {
                out.push(entry.into_path());
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}
