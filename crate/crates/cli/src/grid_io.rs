//! Plain-text grids: one row per line, whitespace-separated values.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .with_context(|| format!("line {}: {t:?} is not a number", lineno + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("grid is empty");
    }
    Ok(rows)
}

/// Reads from `path`, or standard input for `-`.
pub fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .context("reading standard input")?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

/// Values print in shortest round-trip form.
pub fn format_rows(rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" ")).expect("writing to a String");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rows = parse_rows("# grid\n1 -2.5\n\n0.1, 3e-4\n").unwrap();
        assert_eq!(rows, vec![vec![1.0, -2.5], vec![0.1, 3e-4]]);
        assert_eq!(parse_rows(&format_rows(&rows)).unwrap(), rows);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_rows("1 x\n").is_err());
        assert!(parse_rows("# only a comment\n").is_err());
    }
}
