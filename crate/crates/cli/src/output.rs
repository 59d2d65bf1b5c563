use std::fs;
use std::io::Write;
use std::path::Path;

use distgeom::graphs::WeightedGraph;
use distgeom::linalg::read_matrix_csv;
use distgeom::Matrix;
use tempfile::NamedTempFile;

use crate::CliError;

/// Writes through a temporary file in the target directory, then renames.
/// Without a path the bytes go to stdout.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)?;
        return Ok(out.flush()?);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let text = read_text(path)?;
    read_matrix_csv(text.as_bytes()).map_err(|e| CliError::core("reading matrix", e))
}

/// `.json` is graph JSON, `.csv` is a point matrix turned into the complete
/// graph of its pairwise distances, anything else an edge list.
pub fn read_graph(path: &Path) -> Result<WeightedGraph, CliError> {
    let text = read_text(path)?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let parsed = match ext {
        "json" => WeightedGraph::from_json(&text),
        "csv" => read_matrix_csv(text.as_bytes()).and_then(|x| {
            WeightedGraph::complete_from_matrix(&distgeom::embed_exact::pairwise_distances(&x))
        }),
        _ => WeightedGraph::from_edge_list(&text),
    };
    parsed.map_err(|e| CliError::core("reading graph", e))
}

pub fn matrix_bytes(m: &Matrix) -> Vec<u8> {
    distgeom::linalg::matrix_to_csv(m).into_bytes()
}

pub fn json_bytes<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}
