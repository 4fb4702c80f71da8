use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::CliError;
use crate::fracops::SampledPath;
use crate::galerkin::FieldLattice;

/// Writes `bytes` to `dir/name` through a temporary file in `dir` and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    let target = dir.join(name);
    let io = |source| CliError::Io {
        path: target.display().to_string(),
        source,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644)).map_err(io)?;
    }
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(&target).map_err(|e| io(e.error))?;
    Ok(target)
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serializes");
    bytes.push(b'\n');
    write_atomic(dir, name, &bytes)
}

pub fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn field_csv(field: &FieldLattice) -> Vec<u8> {
    let header = ["t", "x", "u"].map(String::from);
    let rows = field.t.iter().enumerate().flat_map(|(ti, t)| {
        field
            .x
            .iter()
            .enumerate()
            .map(move |(xj, x)| vec![num(*t), num(*x), num(field.at(ti, xj))])
    });
    csv_bytes(&header, rows)
}

pub fn coeffs_csv(p: &SampledPath) -> Vec<u8> {
    let mut header = vec!["t".to_string()];
    header.extend((1..=p.dim()).map(|k| format!("p_{k}")));
    let rows = p.grid().nodes().enumerate().map(|(i, t)| {
        let mut row = vec![num(t)];
        row.extend(p.at(i).iter().map(|v| num(*v)));
        row
    });
    csv_bytes(&header, rows)
}
