//! Trajectory files: CSV with a `t, x1..xn` header row, values printed in
//! Rust's shortest round-trip form so re-emitting a parsed file is
//! byte-identical.

use std::path::Path;

use anyhow::{anyhow, Context, Result};

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn format_table(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.header.join(", "));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        out.push_str(&cells.join(", "));
        out.push('\n');
    }
    out
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    std::fs::write(path, format_table(table))
        .with_context(|| format!("cannot write `{}`", path.display()))
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read `{}`", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| anyhow!("`{}` is empty", path.display()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| anyhow!("`{}` line {}: bad number `{s}`", path.display(), idx + 2))
            })
            .collect::<Result<_>>()?;
        if row.len() != header.len() {
            anyhow::bail!(
                "`{}` line {}: {} columns, header has {}",
                path.display(),
                idx + 2,
                row.len(),
                header.len()
            );
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub fn state_table(times: &[f64], states: &[Vec<f64>], names: Option<&[&str]>) -> Table {
    let dim = states.first().map_or(0, |s| s.len());
    let header = match names {
        Some(names) => {
            let mut h = vec!["t".to_string()];
            h.extend(names.iter().map(|s| s.to_string()));
            h
        }
        None => {
            let mut h = vec!["t".to_string()];
            h.extend((1..=dim).map(|i| format!("x{i}")));
            h
        }
    };
    let rows = times
        .iter()
        .zip(states)
        .map(|(t, s)| {
            let mut row = vec![*t];
            row.extend_from_slice(s);
            row
        })
        .collect();
    Table { header, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_identical() {
        let table = Table {
            header: vec!["t".into(), "x1".into()],
            rows: vec![vec![0.0, 0.1], vec![0.3333333333333333, -1.25e-7]],
        };
        let dir = std::env::temp_dir().join("liesys-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        write_table(&path, &table).unwrap();
        let first = std::fs::read(&path).unwrap();
        let parsed = read_table(&path).unwrap();
        write_table(&path, &parsed).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
    }
}
