//! CSV and JSON artifacts. CSV uses LF line endings and 17 significant
//! digits; JSON keys are sorted, so identical runs give identical bytes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::CliError;

/// `{:.16e}`: 17 significant digits with a '.' separator.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Default)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// What a subcommand produced.
#[derive(Debug)]
pub struct Artifacts {
    pub table: Option<Table>,
    pub summary: Value,
    /// Human-readable lines for stderr (or stdout when there is no table).
    pub notes: Vec<String>,
    /// Set when the run completed but found an invariant violation.
    pub violation: Option<String>,
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// CSV goes to `out` (or stdout); the JSON summary goes to `json`, or next
/// to `out` with a `.json` extension. Without either path the JSON is not
/// written.
pub fn emit(artifacts: &Artifacts, out: Option<&str>, json: Option<&str>) -> Result<(), CliError> {
    let json_path: Option<PathBuf> = match (json, out) {
        (Some(j), _) => Some(j.into()),
        (None, Some(o)) => Some(Path::new(o).with_extension("json")),
        (None, None) => None,
    };
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    let io = |source| CliError::Io { path: "stdout".into(), source };
    match (&artifacts.table, out) {
        (Some(t), Some(o)) => write_file(Path::new(o), &t.to_csv())?,
        (Some(t), None) => stdout.write_all(t.to_csv().as_bytes()).map_err(io)?,
        (None, _) => {
            for line in &artifacts.notes {
                writeln!(stdout, "{line}").map_err(io)?;
            }
        }
    }
    if let Some(p) = json_path {
        let mut text = serde_json::to_string_pretty(&artifacts.summary).expect("summaries are plain JSON");
        text.push('\n');
        write_file(&p, &text)?;
    }
    if artifacts.table.is_some() {
        for line in &artifacts.notes {
            eprintln!("{line}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(std::f64::consts::LN_2), "6.9314718055994529e-1");
        assert_eq!(num(0.0), "0.0000000000000000e0");
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,2\n");
    }
}
