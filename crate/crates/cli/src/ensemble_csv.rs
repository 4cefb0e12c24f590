//! Ensemble exchange format.
//!
//! ```text
//! dim,half_width,points_per_axis,codomain_dim
//! 1,2,81,1
//! <member 0: nodes * codomain_dim values, node-major>
//! <member 1>
//! ...
//! ```
//!
//! Node order is the grid's row-major order (last axis fastest); the values
//! of one node are contiguous. Blank lines are ignored.

use std::path::Path;

use qmn::{FunctionEnsemble64, GridRef, SampledFunction64};

use crate::error::CliError;
use crate::output::{csv_writer, fmt_f64};

pub const HEADER: [&str; 4] = ["dim", "half_width", "points_per_axis", "codomain_dim"];

/// Reads an ensemble and checks it against `grid`.
pub fn read_ensemble(path: &Path, grid: &GridRef<f64>) -> Result<FunctionEnsemble64, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_ensemble(&text, grid).map_err(|(line, message)| CliError::Ensemble {
        path: path.to_path_buf(),
        line,
        message,
    })
}

/// Parses the exchange format; errors carry the 1-based line number.
pub fn parse_ensemble(text: &str, grid: &GridRef<f64>) -> Result<FunctionEnsemble64, (u64, String)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            (line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, record));
    }
    let mut rows = rows.into_iter();

    let Some((line, header)) = rows.next() else {
        return Err((1, "empty file".into()));
    };
    if header.iter().ne(HEADER) {
        return Err((line, format!("expected header `{}`", HEADER.join(","))));
    }
    let Some((line, params)) = rows.next() else {
        return Err((line + 1, "missing grid parameter row".into()));
    };
    if params.len() != HEADER.len() {
        return Err((
            line,
            format!("expected {} grid parameters, found {}", HEADER.len(), params.len()),
        ));
    }
    let int = |i: usize| {
        params[i].parse::<usize>().map_err(|_| {
            (
                line,
                format!("{}: `{}` is not a nonnegative integer", HEADER[i], &params[i]),
            )
        })
    };
    let dim = int(0)?;
    let half_width: f64 = params[1]
        .parse()
        .map_err(|_| (line, format!("half_width: `{}` is not a number", &params[1])))?;
    let points = int(2)?;
    let m = int(3)?;
    if dim != grid.dim() || half_width != grid.half_width() || points != grid.points_per_axis() {
        return Err((
            line,
            format!(
                "grid ({dim}, {half_width}, {points}) does not match the config grid ({}, {}, {})",
                grid.dim(),
                grid.half_width(),
                grid.points_per_axis()
            ),
        ));
    }
    if m == 0 {
        return Err((line, "codomain_dim must be positive".into()));
    }

    let width = grid.len() * m;
    let mut members = Vec::new();
    for (line, row) in rows {
        if row.len() != width {
            return Err((line, format!("expected {width} values, found {}", row.len())));
        }
        let values = row
            .iter()
            .enumerate()
            .map(|(i, field)| match field.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err((line, format!("value {}: `{field}` is not a finite number", i + 1))),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        members.push(SampledFunction64::new(grid, m, values).map_err(|e| (line, e.to_string()))?);
    }
    if members.is_empty() {
        return Err((line + 1, "no member rows".into()));
    }
    FunctionEnsemble64::new(members).map_err(|e| (line, e.to_string()))
}

pub fn write_ensemble(path: &Path, f: &FunctionEnsemble64) -> Result<(), CliError> {
    let grid = f.grid();
    let mut w = csv_writer(path)?;
    let io = |e: csv::Error| CliError::io(path, e.into());
    w.write_record(HEADER).map_err(io)?;
    w.write_record([
        grid.dim().to_string(),
        fmt_f64(grid.half_width()),
        grid.points_per_axis().to_string(),
        f.codomain_dim().to_string(),
    ])
    .map_err(io)?;
    for member in f.members() {
        w.write_record(member.values().iter().map(|&v| fmt_f64(v)))
            .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
