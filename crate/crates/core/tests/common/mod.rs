#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub const CONFIG: &str = r#"
[gas]
gamma = 1.4

[nozzle]
l0 = 0.0
l1 = 1.0
rho0 = 1.0
u0 = 2.0

[force]
coeffs = [0.1]

[exit]
ls = 0.5
epsilon = 1e-3

[grid]
n1 = 33
n2 = 33
"#;

pub fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path
}

/// Replaces the first data row whose `column` matches, negating that cell.
pub fn negate_cell(csv: &Path, column: &str, data_row: usize) {
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    let k = lines[header].split(',').position(|c| c == column).unwrap();
    let mut cells: Vec<String> = lines[header + 1 + data_row].split(',').map(str::to_string).collect();
    cells[k] = format!("-{}", cells[k]);
    lines[header + 1 + data_row] = cells.join(",");
    std::fs::write(csv, lines.join("\n") + "\n").unwrap();
}
