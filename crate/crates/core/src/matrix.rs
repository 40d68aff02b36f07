//! Square matrices of meaning bounds.
//!
//! Cell (row A, column B) holds M(A,B), the bound of the column query with
//! respect to the row query. Over an exact provider the matrix is symmetric;
//! the diagonal holds self-bounds n(www) / n(A).

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::measures::{Epsilon, MeaningBound};
use crate::provider::{bound_between, universe_size, CountProvider, ProviderError};
use crate::query::QueryExpr;

/// Marker used for cells that could not be computed in permissive mode.
pub const NOT_AVAILABLE: &str = "n/a";

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix needs at least one query")]
    NoQueries,
    #[error("cell ({row}, {col}): {source}")]
    Cell {
        row: String,
        col: String,
        #[source]
        source: ProviderError,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Bound(MeaningBound),
    Unavailable(String),
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Bound(b) => Some(b.value),
            Cell::Unavailable(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundMatrix {
    labels: Vec<String>,
    universe: u64,
    cells: Vec<Vec<Cell>>,
}

/// Computes every cell, in parallel. Unless `permissive`, the first failing
/// cell in row-major order aborts the whole matrix; with `permissive` it is
/// kept as [`Cell::Unavailable`].
pub fn compute_matrix<P: CountProvider + ?Sized>(
    provider: &P,
    queries: &[QueryExpr],
    epsilon: Epsilon,
    permissive: bool,
) -> Result<BoundMatrix, MatrixError> {
    if queries.is_empty() {
        return Err(MatrixError::NoQueries);
    }
    let n = queries.len();
    let results: Vec<Result<MeaningBound, ProviderError>> = (0..n * n)
        .into_par_iter()
        .map(|i| bound_between(provider, &queries[i / n], &queries[i % n], epsilon))
        .collect();

    let mut cells = Vec::with_capacity(n);
    let mut it = results.into_iter();
    for row in queries {
        let mut out = Vec::with_capacity(n);
        for col in queries {
            match it.next().unwrap() {
                Ok(b) => out.push(Cell::Bound(b)),
                Err(e) if permissive => out.push(Cell::Unavailable(e.to_string())),
                Err(source) => {
                    return Err(MatrixError::Cell {
                        row: row.label(),
                        col: col.label(),
                        source,
                    })
                }
            }
        }
        cells.push(out);
    }
    Ok(BoundMatrix {
        labels: queries.iter().map(QueryExpr::label).collect(),
        universe: universe_size(provider),
        cells,
    })
}

/// `value` rounded half-to-even at `precision` decimals.
///
/// Rounds the exact binary value, so the result is the same whether one
/// starts from the `f64` or from its shortest round-trip decimal string.
pub fn format_fixed(value: f64, precision: usize) -> String {
    format!("{value:.precision$}")
}

impl BoundMatrix {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> &Cell {
        &self.cells[row][col]
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.cells
    }

    /// Fixed-width text table, cells rounded to `precision`.
    pub fn to_table(&self, precision: usize) -> String {
        let rendered: Vec<Vec<String>> = self
            .cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        Cell::Bound(b) => format_fixed(b.value, precision),
                        Cell::Unavailable(_) => NOT_AVAILABLE.to_owned(),
                    })
                    .collect()
            })
            .collect();
        let label_w = self
            .labels
            .iter()
            .map(|l| l.chars().count())
            .max()
            .unwrap_or(0);
        let widths: Vec<usize> = (0..self.size())
            .map(|j| {
                rendered
                    .iter()
                    .map(|r| r[j].len())
                    .chain(std::iter::once(self.labels[j].chars().count()))
                    .max()
                    .unwrap()
            })
            .collect();

        let mut out = String::new();
        let _ = write!(out, "{:label_w$}", "");
        for (l, w) in self.labels.iter().zip(&widths) {
            let _ = write!(out, "  {l:>w$}");
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&rendered) {
            let _ = write!(out, "{label:<label_w$}");
            for (cell, w) in row.iter().zip(&widths) {
                let _ = write!(out, "  {cell:>w$}");
            }
            out.push('\n');
        }
        out
    }

    /// Header row of labels, one row per query, full-precision cells.
    pub fn to_csv(&self) -> Result<String, MatrixError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.labels.iter().cloned());
        w.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.cells) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|c| match c {
                Cell::Bound(b) => b.value.to_string(),
                Cell::Unavailable(_) => NOT_AVAILABLE.to_owned(),
            }));
            w.write_record(&rec)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn to_json(&self) -> Value {
        let matrix: Vec<Vec<Value>> = self
            .cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        Cell::Bound(b) => json!(b.value),
                        Cell::Unavailable(_) => json!(NOT_AVAILABLE),
                    })
                    .collect()
            })
            .collect();
        let classes: Vec<Vec<&str>> = self
            .cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        Cell::Bound(b) => b.class.label(),
                        Cell::Unavailable(_) => NOT_AVAILABLE,
                    })
                    .collect()
            })
            .collect();
        json!({
            "terms": self.labels,
            "universe": self.universe,
            "matrix": matrix,
            "classes": classes,
        })
    }
}
