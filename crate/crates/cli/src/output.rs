//! CSV tables with a commented provenance header, and JSON summaries.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const TOOL_VERSION: &str = concat!("awva ", env!("CARGO_PKG_VERSION"));

/// Lines written as `# key: value` above every table.
pub fn header(command: &str, cfg: &RunConfig) -> Result<String, CliError> {
    let s = cfg.scenario()?;
    let mut h = String::new();
    let mut line = |k: &str, v: String| writeln!(h, "# {k}: {v}").expect("write to String");
    line("tool", TOOL_VERSION.to_string());
    line("command", command.to_string());
    line("config_sha256", cfg.hash());
    line("master_seed", cfg.master_seed.to_string());
    line("omega0_rad_per_fs", s.omega0().to_string());
    line("delta_rad_per_fs", s.delta().to_string());
    line("tau_fs", s.tau().to_string());
    line("epsilon_swva_rad", s.epsilon().to_string());
    line("step_rad", cfg.adaptive.step.to_string());
    line("units", "frequencies rad/fs, delays fs, angles rad".to_string());
    Ok(h)
}

/// A table of already formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn num(x: f64) -> String {
    x.to_string()
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".to_string(), num)
}

pub fn write_table(dir: &Path, name: &str, header: &str, table: &Table) -> Result<(), CliError> {
    write_file(dir, name, table.render(header).as_bytes())
}

pub fn write_summary<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("summary serialises");
    bytes.push(b'\n');
    write_file(dir, name, &bytes)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))
}

/// Data rows of a rendered table, with the `#` header stripped.
pub fn data_section(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| [l, "\n"])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendered_table_has_header_then_rows() {
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![num(1.5), opt_num(None)]);
        let text = t.render("# x: 1\n");
        assert_eq!(text, "# x: 1\na,b\n1.5,NaN\n");
        assert_eq!(data_section(&text), "a,b\n1.5,NaN\n");
    }

    #[test]
    fn header_records_internal_units() {
        let h = header("adaptive", &RunConfig::default()).unwrap();
        assert!(h.contains("# omega0_rad_per_fs: 2.4\n"));
        assert!(h.contains("# tau_fs: 0.008\n"));
        assert!(h.lines().all(|l| l.starts_with("# ")));
    }
}
