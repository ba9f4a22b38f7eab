//! Confusion matrices expressed as joint proportions.
//!
//! Rows are estimated classes and columns are true classes, so the column
//! sums are the true class proportions of the evaluated dataset. Class
//! indices are zero-based throughout the library.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the unit sum of an input matrix.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A k×k matrix of nonnegative proportions summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixRepr", try_from = "MatrixRepr")]
pub struct ConfusionMatrix {
    k: usize,
    cells: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    cells: Vec<Vec<f64>>,
}

impl From<ConfusionMatrix> for MatrixRepr {
    fn from(m: ConfusionMatrix) -> Self {
        MatrixRepr { cells: m.to_rows() }
    }
}

impl TryFrom<MatrixRepr> for ConfusionMatrix {
    type Error = Error;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        ConfusionMatrix::from_proportions(&repr.cells)
    }
}

/// Row and column sums of a confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Marginals {
    /// Proportion of instances estimated in each class.
    pub rows: Vec<f64>,
    /// Proportion of instances truly in each class.
    pub cols: Vec<f64>,
}

/// One-vs-rest decomposition of a matrix around a single class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryCounts {
    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub tn: f64,
}

impl BinaryCounts {
    pub fn total(&self) -> f64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Per-cell importance weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    k: usize,
    weights: Vec<f64>,
}

impl WeightMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let (k, weights) = flatten_square(rows)?;
        if let Some(pos) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid(format!(
                "weight at row {}, column {} must be a nonnegative finite number, got {}",
                pos / k + 1,
                pos % k + 1,
                weights[pos]
            )));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::invalid("weight matrix has no positive weight"));
        }
        Ok(WeightMatrix { k, weights })
    }

    /// Unit weights on every cell.
    pub fn ones(k: usize) -> Self {
        WeightMatrix {
            k,
            weights: vec![1.0; k * k],
        }
    }

    /// Unit weights on the diagonal and `off` everywhere else.
    pub fn off_diagonal(k: usize, off: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { off }).collect())
            .collect();
        WeightMatrix::new(&rows)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.k + j]
    }
}

fn flatten_square(rows: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let k = rows.len();
    if k < 2 {
        return Err(Error::invalid(format!(
            "matrix must have at least 2 classes, got {k}"
        )));
    }
    let mut cells = Vec::with_capacity(k * k);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(Error::invalid(format!(
                "matrix is not square: row {} has {} entries, expected {k}",
                i + 1,
                row.len()
            )));
        }
        cells.extend_from_slice(row);
    }
    Ok((k, cells))
}

impl ConfusionMatrix {
    /// Builds a matrix from raw instance counts.
    pub fn from_counts(counts: &[Vec<i64>]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = counts
            .iter()
            .map(|r| r.iter().map(|&c| c as f64).collect())
            .collect();
        let (k, raw) = flatten_square(&rows)?;
        if let Some(pos) = counts.iter().flatten().position(|&c| c < 0) {
            return Err(Error::invalid(format!(
                "negative count at row {}, column {}",
                pos / k + 1,
                pos % k + 1
            )));
        }
        let total: i64 = counts.iter().flatten().sum();
        if total == 0 {
            return Err(Error::EmptyMatrix);
        }
        let total = total as f64;
        let cells = raw.into_iter().map(|c| c / total).collect();
        Ok(ConfusionMatrix { k, cells })
    }

    /// Builds a matrix from proportions that must already sum to one.
    pub fn from_proportions(rows: &[Vec<f64>]) -> Result<Self> {
        let (k, cells) = flatten_square(rows)?;
        check_cells(k, &cells)?;
        let total: f64 = cells.iter().sum();
        if total == 0.0 {
            return Err(Error::EmptyMatrix);
        }
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(format!(
                "cells sum to {total}, expected 1 within {SUM_TOLERANCE:e}"
            )));
        }
        Ok(ConfusionMatrix { k, cells })
    }

    /// Builds a matrix from any nonnegative grid by dividing by its total.
    pub fn normalized(rows: &[Vec<f64>]) -> Result<Self> {
        let (k, cells) = flatten_square(rows)?;
        check_cells(k, &cells)?;
        let total: f64 = cells.iter().sum();
        if total == 0.0 {
            return Err(Error::EmptyMatrix);
        }
        let cells = cells.into_iter().map(|c| c / total).collect();
        Ok(ConfusionMatrix { k, cells })
    }

    /// Constructor for generators that guarantee the invariants themselves.
    pub(crate) fn from_flat_unchecked(k: usize, cells: Vec<f64>) -> Self {
        debug_assert_eq!(cells.len(), k * k);
        ConfusionMatrix { k, cells }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Proportion estimated in class `i` while truly in class `j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.k + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.cells.chunks(self.k).map(|r| r.to_vec()).collect()
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.cells.chunks(self.k).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.k)
            .map(|j| (0..self.k).map(|i| self.get(i, j)).sum())
            .collect()
    }

    pub fn marginals(&self) -> Marginals {
        Marginals {
            rows: self.row_sums(),
            cols: self.col_sums(),
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.k).all(|i| (0..self.k).all(|j| i == j || self.get(i, j) == 0.0))
    }

    pub(crate) fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.k {
            Err(Error::invalid(format!(
                "class index {class} out of range for {} classes",
                self.k
            )))
        } else {
            Ok(())
        }
    }

    /// TP/FP/FN/TN proportions of class `class` against all the others.
    pub fn class_counts(&self, class: usize) -> Result<BinaryCounts> {
        self.check_class(class)?;
        let tp = self.get(class, class);
        let row: f64 = (0..self.k).map(|j| self.get(class, j)).sum();
        let col: f64 = (0..self.k).map(|i| self.get(i, class)).sum();
        let fp = row - tp;
        let fn_ = col - tp;
        // only negative when the input sum sits just above 1
        let tn = (1.0 - tp - fp - fn_).max(0.0);
        Ok(BinaryCounts { tp, fp, fn_, tn })
    }

    /// Merges every class except `class` into a single one.
    ///
    /// The result is 2×2 with the kept class first: `[[tp, fp], [fn, tn]]`.
    pub fn binarize(&self, class: usize) -> Result<ConfusionMatrix> {
        let c = self.class_counts(class)?;
        Ok(ConfusionMatrix {
            k: 2,
            cells: vec![c.tp, c.fp, c.fn_, c.tn],
        })
    }

    /// Weights every cell, then rescales so the result sums to one again.
    pub fn apply_weights(&self, weights: &WeightMatrix) -> Result<ConfusionMatrix> {
        if weights.k() != self.k {
            return Err(Error::invalid(format!(
                "weight matrix has {} classes, confusion matrix has {}",
                weights.k(),
                self.k
            )));
        }
        let weighted: Vec<f64> = self
            .cells
            .iter()
            .zip(&weights.weights)
            .map(|(p, w)| p * w)
            .collect();
        let total: f64 = weighted.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateWeights);
        }
        Ok(ConfusionMatrix {
            k: self.k,
            cells: weighted.into_iter().map(|c| c / total).collect(),
        })
    }

    /// Swaps the roles of estimated and true classes.
    pub fn transpose(&self) -> ConfusionMatrix {
        let k = self.k;
        let cells = (0..k * k).map(|n| self.get(n % k, n / k)).collect();
        ConfusionMatrix { k, cells }
    }
}

fn check_cells(k: usize, cells: &[f64]) -> Result<()> {
    if let Some(pos) = cells.iter().position(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::invalid(format!(
            "cell at row {}, column {} must be a nonnegative finite number, got {}",
            pos / k + 1,
            pos % k + 1,
            cells[pos]
        )));
    }
    Ok(())
}
