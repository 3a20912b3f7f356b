//! CSV samples and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use accelcal::Vec3d;
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

pub const SAMPLE_HEADER: [&str; 3] = ["ax", "ay", "az"];

/// Reads an `ax,ay,az` file. An empty file or a header-only file yields no rows.
pub fn read_samples(path: &Path) -> CliResult<Vec<Vec3d>> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
    parse_samples(file, path)
}

pub fn parse_samples<R: std::io::Read>(source: R, path: &Path) -> CliResult<Vec<Vec3d>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let where_ = path.display();
    let headers = reader
        .headers()
        .map_err(|e| CliError::Malformed(format!("{where_}: {e}")))?
        .clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let found: Vec<&str> = headers.iter().map(str::trim).collect();
    if found != SAMPLE_HEADER {
        return Err(CliError::Malformed(format!(
            "{where_}: line 1: expected header ax,ay,az, found {}",
            found.join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Malformed(format!("{where_}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(CliError::Malformed(format!(
                "{where_}: line {line}: expected 3 fields, found {}",
                record.len()
            )));
        }
        let mut v = [0.0; 3];
        for (slot, field) in v.iter_mut().zip(record.iter()) {
            *slot = field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    CliError::Malformed(format!("{where_}: line {line}: bad number {field:?}"))
                })?;
        }
        rows.push(Vec3d::from_array(v));
    }
    Ok(rows)
}

pub fn samples_to_csv(rows: &[Vec3d]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SAMPLE_HEADER).map_err(csv_failure)?;
    for r in rows {
        w.write_record([r.x.to_string(), r.y.to_string(), r.z.to_string()])
            .map_err(csv_failure)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Malformed(e.to_string()))
}

pub fn csv_failure(e: csv::Error) -> CliError {
    CliError::Malformed(e.to_string())
}

/// Where a command sends its main artifact.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

impl Sink {
    pub fn from_option(path: Option<&Path>) -> Self {
        path.map_or(Sink::Stdout, |p| Sink::File(p.to_path_buf()))
    }

    pub fn write(&self, bytes: &[u8]) -> CliResult<()> {
        match self {
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::Malformed(format!("stdout: {e}")))
            }
            Sink::File(path) => write_atomic(path, bytes),
        }
    }
}

/// Writes through a temporary file in the target directory, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: std::io::Error| CliError::Malformed(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}
