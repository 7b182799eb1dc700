//! Deterministic CSV writing with a `#` metadata block.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const OUTPUT_DIR_VAR: &str = "SLOWLIGHT_OUTPUT_DIR";

/// Metadata lines shared by every file of one run.
#[derive(Debug, Clone)]
pub struct Metadata {
    lines: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str, config_text: &str) -> Self {
        let hash = hex::encode(Sha256::digest(config_text.as_bytes()));
        Self {
            lines: vec![
                ("generator".into(), format!("slowlight {}", env!("CARGO_PKG_VERSION"))),
                ("command".into(), command.into()),
                ("config_sha256".into(), hash),
            ],
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.lines.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.lines.push((key.into(), value)),
        }
    }

    fn render(&self, extra: &[(String, String)]) -> String {
        self.lines
            .iter()
            .chain(extra)
            .map(|(k, v)| format!("# {k} = {v}\n"))
            .collect()
    }
}

/// Rows of one CSV file.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// File-specific metadata lines, appended after the shared ones.
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }
}

/// Shortest round-trip representation, always in exponent form.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

pub struct OutputDir {
    pub root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    /// `SLOWLIGHT_OUTPUT_DIR` if set, otherwise the configured directory.
    pub fn resolve(configured: &str) -> Result<Self, CliError> {
        let root = std::env::var_os(OUTPUT_DIR_VAR)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(configured));
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, meta: &Metadata, table: &Table) -> Result<PathBuf, CliError> {
        let mut out = meta.render(&table.notes).into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut out);
            let write_err = |e: csv::Error| CliError::io(self.root.join(name), std::io::Error::other(e));
            w.write_record(&table.header).map_err(write_err)?;
            for row in &table.rows {
                w.write_record(row).map_err(write_err)?;
            }
            w.flush().map_err(|e| CliError::io(self.root.join(name), e))?;
        }
        let path = self.root.join(name);
        fs::write(&path, out).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Sidecar log; the only file carrying a timestamp.
    pub fn write_log(&self, lines: &[String]) -> Result<(), CliError> {
        let stamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let mut text = format!("run finished at unix time {stamp}\n");
        for l in lines {
            text.push_str(l);
            text.push('\n');
        }
        for p in &self.written {
            text.push_str(&format!("wrote {}\n", display_rel(&self.root, p)));
        }
        let path = self.root.join("run.log");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}

fn display_rel(root: &Path, p: &Path) -> String {
    p.strip_prefix(root).unwrap_or(p).display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1.07e-11, -3.5, 299_792_458.0, 80_022_705_494_254_700_000.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::NAN), "");
    }

    #[test]
    fn metadata_block_precedes_header() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir {
            root: dir.path().to_owned(),
            written: Vec::new(),
        };
        let meta = Metadata::new("test", "{}").with("length_definition", "2 rms");
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![num(1.0), "x, y".into()]);
        let path = out.write("t.csv", &meta, &t).unwrap();
        let text = fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# generator = slowlight"));
        assert!(lines[2].starts_with("# config_sha256 = 44136fa3"));
        assert_eq!(lines[3], "# length_definition = 2 rms");
        assert_eq!(lines[4], "a,b");
        assert_eq!(lines[5], "1e0,\"x, y\"");
    }
}
