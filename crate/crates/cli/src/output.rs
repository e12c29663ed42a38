//! CSV tables, atomic file writes and the run manifest.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// Shortest round-trip decimal, switching to exponent form for very large or
/// small magnitudes.
pub fn format_float(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-4..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Float(x) => f.write_str(&format_float(*x)),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// A CSV table with `#` comment lines above the column header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { comments: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn comment(mut self, line: impl Into<String>) -> Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of column `name`; text cells are skipped.
    pub fn floats(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter_map(|r| match r[i] {
                Cell::Float(x) => Some(x),
                Cell::Int(k) => Some(k as f64),
                Cell::Text(_) => None,
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }
}

/// Writes via a sibling temporary file and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub experiment: String,
    pub version: String,
    pub wall_time_s: f64,
    pub workers: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Written last; its presence marks a completed run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run: RunInfo,
    #[serde(default)]
    pub results: BTreeMap<String, toml::Value>,
    pub files: BTreeMap<String, String>,
    pub config: ExperimentConfig,
}

pub const MANIFEST: &str = "manifest.toml";
pub const CONFIG_ECHO: &str = "config.toml";

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST);
        write_atomic(&path, toml::to_string(self)?.as_bytes())?;
        Ok(path)
    }

    /// Files whose checksum no longer matches (or which are missing).
    pub fn verify(&self, dir: &Path) -> Vec<String> {
        self.files
            .iter()
            .filter(|(name, sum)| match fs::read(dir.join(name)) {
                Ok(bytes) => &sha256_hex(&bytes) != *sum,
                Err(_) => true,
            })
            .map(|(name, _)| name.clone())
            .collect()
    }
}

/// Output directory that records a checksum for every file it writes.
pub struct OutputDir {
    pub root: PathBuf,
    pub files: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root, files: BTreeMap::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        if name.contains('/') || name == MANIFEST {
            bail!("reserved or nested output name `{name}`");
        }
        let path = self.root.join(name);
        write_atomic(&path, bytes)?;
        self.files.insert(name.to_string(), sha256_hex(bytes));
        Ok(path)
    }

    pub fn write_table(&mut self, stem: &str, table: &CsvTable) -> Result<PathBuf> {
        self.write(&format!("{stem}.csv"), table.render().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(7.5705), "7.5705");
        assert_eq!(format_float(1e-9), "1e-9");
        assert_eq!(format_float(-2.5e8), "-2.5e8");
        assert_eq!(format_float(0.0), "0");
        let x = 0.1 + 0.2;
        assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn table_rendering() {
        let mut t = CsvTable::new(&["theta", "rho"]).comment("units: rad");
        t.push(vec![0.25.into(), 1.5e-12.into()]);
        t.push(vec![1.0.into(), Cell::Int(3)]);
        assert_eq!(t.render(), "# units: rad\ntheta,rho\n0.25,1.5e-12\n1,3\n");
        assert_eq!(t.floats("rho"), vec![1.5e-12, 3.0]);
        assert!(t.floats("missing").is_empty());
    }

    #[test]
    fn atomic_write_and_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path().join("run")).unwrap();
        out.write("a.csv", b"x\n1\n").unwrap();
        assert_eq!(out.files["a.csv"], sha256_hex(b"x\n1\n"));
        assert!(out.write("manifest.toml", b"").is_err());
        let leftovers: Vec<_> = fs::read_dir(&out.root)
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().contains(".tmp"))
            .collect();
        assert!(leftovers.is_empty());
    }
}
