//! Plain-text transition matrices: the first line holds `N`, followed by `N`
//! rows of `N` whitespace-separated decimals.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sleepwake_core::env::{TransitionModel, ROW_SUM_TOLERANCE};

use crate::{Error, Result};

pub fn parse_matrix(text: &str, path: &Path) -> Result<TransitionModel> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (first, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty matrix file".into()))?;
    let n: usize = header
        .parse()
        .map_err(|_| err(first, format!("expected the dimension, found `{header}`")))?;
    if n == 0 {
        return Err(err(first, "dimension must be positive".into()));
    }
    let mut probs = Vec::with_capacity(n * n);
    for row in 0..n {
        let (line, body) = lines
            .next()
            .ok_or_else(|| err(first + row + 1, format!("expected {n} rows, found {row}")))?;
        let before = probs.len();
        for token in body.split_whitespace() {
            let v: f64 = token
                .parse()
                .map_err(|_| err(line, format!("not a number: `{token}`")))?;
            probs.push(v);
        }
        let found = probs.len() - before;
        if found != n {
            return Err(err(line, format!("expected {n} entries, found {found}")));
        }
        let sum: f64 = probs[before..].iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(err(line, format!("row sums to {sum}")));
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line, format!("trailing data after {n} rows")));
    }
    TransitionModel::new(n, probs).map_err(Error::from)
}

pub fn read_matrix(path: &Path) -> Result<TransitionModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

/// Shortest round-trip decimals, so reading back gives identical values.
pub fn format_matrix(model: &TransitionModel) -> String {
    let n = model.cells();
    let mut out = format!("{n}\n");
    for i in 0..n {
        for (j, v) in model.row(i).iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{v}").expect("writing to a string");
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix(model: &TransitionModel, path: &Path) -> Result<()> {
    fs::write(path, format_matrix(model)).map_err(|e| Error::io(path, e))
}
