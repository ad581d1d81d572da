//! CSV files with `#`-prefixed header comments and 17-significant-digit floats.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::ExperimentConfig;

/// Scientific notation with 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(command: &str, cfg: &ExperimentConfig, columns: &[&str]) -> Self {
        let mut header = vec![format!("morozov {command}")];
        header.extend(cfg.header_lines().into_iter().map(|l| l[2.min(l.len())..].to_string()));
        CsvTable { header, columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.header.push(format!("{key} = {value}"));
    }

    pub fn meta_f64(&mut self, key: &str, value: f64) {
        self.meta(key, fmt(value));
    }

    pub fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.columns.len());
        self.rows.push(fields);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for h in &self.header {
            let _ = writeln!(s, "# {h}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(name);
        std::fs::write(&path, self.render()).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_17_digits() {
        let x = 0.1f64 + 0.2;
        let s = fmt(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(s.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    }

    #[test]
    fn header_embeds_config() {
        let cfg = ExperimentConfig::default();
        let mut t = CsvTable::new("curve", &cfg, &["a", "b"]);
        t.meta_f64("delta", 0.1);
        t.row(vec![fmt(1.0), fmt(2.0)]);
        let text = t.render();
        assert!(text.lines().all(|l| l.starts_with('#') || l == "a,b" || l.contains(',')));
        let dir = std::env::temp_dir().join(format!("morozov-out-{}", std::process::id()));
        let path = t.write(&dir, "t.csv").unwrap();
        assert_eq!(ExperimentConfig::load(&path).unwrap(), cfg);
        std::fs::remove_dir_all(dir).ok();
    }
}
