//! Parametric confusion matrices with controlled errors.
//!
//! Class proportions are interpolated between the balanced case (`p = 0`)
//! and a halving sequence where each class has twice the instances of the
//! next one (`p = 1`). For a retention vector `c`, column `j` keeps `c_j`
//! of its mass on the diagonal and spreads the rest evenly over the other
//! `k - 1` rows, so the true class proportions never change.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ConfusionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMode {
    /// Same retention `c` in every class (x axis).
    AllClasses,
    /// Retention `c` in the first class only, the others perfect (y axis).
    FirstClassOnly,
}

impl SeriesMode {
    pub fn retention(self, k: usize, c: f64) -> Vec<f64> {
        match self {
            SeriesMode::AllClasses => vec![c; k],
            SeriesMode::FirstClassOnly => {
                let mut v = vec![1.0; k];
                v[0] = c;
                v
            }
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            SeriesMode::AllClasses => "x",
            SeriesMode::FirstClassOnly => "y",
        }
    }
}

/// True class proportions, positive and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionVector(Vec<f64>);

impl ProportionVector {
    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.len() < 2 {
            return Err(Error::invalid("need at least 2 class proportions"));
        }
        if pi.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::invalid("class proportions must be positive"));
        }
        let s: f64 = pi.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "class proportions sum to {s}, expected 1"
            )));
        }
        Ok(ProportionVector(pi))
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Class proportions for `k` classes at imbalance `p`:
/// `pi_i = (1 - p)/k + p * 2^(k-i) / (2^k - 1)` with one-based `i`.
pub fn class_proportions(k: usize, p: f64) -> Result<ProportionVector> {
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p must lie in [0, 1], got {p}")));
    }
    if k > 60 {
        return Err(Error::invalid(format!("k must be at most 60, got {k}")));
    }
    let denom = ((1u64 << k) - 1) as f64;
    let balanced = (1.0 - p) / k as f64;
    let pi = (1..=k)
        .map(|i| balanced + p * (1u64 << (k - i)) as f64 / denom)
        .collect();
    Ok(ProportionVector(pi))
}

/// Matrix whose column `j` keeps `c_j` of `pi_j` on the diagonal.
pub fn controlled_matrix(pi: &ProportionVector, retention: &[f64]) -> Result<ConfusionMatrix> {
    let k = pi.k();
    if retention.len() != k {
        return Err(Error::invalid(format!(
            "got {} retention values for {k} classes",
            retention.len()
        )));
    }
    if let Some(c) = retention.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(Error::invalid(format!("retention {c} outside [0, 1]")));
    }
    let spread = (k - 1) as f64;
    let mut cells = vec![0.0; k * k];
    for (j, (&pj, &cj)) in pi.as_slice().iter().zip(retention).enumerate() {
        let wrong = (1.0 - cj) / spread * pj;
        for i in 0..k {
            cells[i * k + j] = if i == j { cj * pj } else { wrong };
        }
    }
    Ok(ConfusionMatrix::from_flat_unchecked(k, cells))
}

/// Grid of retention values from `c_lo` to 1 inclusive.
pub fn retention_grid(c_lo: f64, step: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&c_lo) {
        return Err(Error::invalid(format!(
            "c-lo must lie in [0, 1), got {c_lo}"
        )));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::invalid(format!(
            "grid step must lie in (0, 1], got {step}"
        )));
    }
    let span = 1.0 - c_lo;
    let n = (span / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(Error::invalid(format!("grid step {step} is too small")));
    }
    let mut grid: Vec<f64> = (0..=n).map(|i| c_lo + i as f64 * step).collect();
    // snap the last point onto 1 when the step divides the span
    let last = grid.last_mut().expect("grid has at least one point");
    if (1.0 - *last).abs() < 1e-9 {
        *last = 1.0;
    } else {
        grid.push(1.0);
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSpec {
    pub k: usize,
    pub p: f64,
    pub grid: Vec<f64>,
    pub mode: SeriesMode,
    pub c_lo: f64,
}

impl SeriesSpec {
    /// 101-point grid over [0, 1].
    pub fn new(k: usize, p: f64, mode: SeriesMode) -> Result<Self> {
        SeriesSpec::with_grid(k, p, mode, retention_grid(0.0, 0.01)?)
    }

    pub fn with_grid(k: usize, p: f64, mode: SeriesMode, grid: Vec<f64>) -> Result<Self> {
        class_proportions(k, p)?;
        if grid.is_empty() {
            return Err(Error::invalid("retention grid is empty"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("retention grid must be strictly increasing"));
        }
        if grid.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::invalid("retention grid must lie in [0, 1]"));
        }
        Ok(SeriesSpec {
            k,
            p,
            c_lo: grid[0],
            grid,
            mode,
        })
    }

    pub fn proportions(&self) -> ProportionVector {
        class_proportions(self.k, self.p).expect("validated at construction")
    }

    pub fn matrix_at(&self, c: f64) -> Result<ConfusionMatrix> {
        controlled_matrix(&self.proportions(), &self.mode.retention(self.k, c))
    }
}

/// One matrix per grid value, all sharing the same column marginals.
pub fn make_series(spec: &SeriesSpec) -> Result<Vec<ConfusionMatrix>> {
    let pi = spec.proportions();
    spec.grid
        .iter()
        .map(|&c| controlled_matrix(&pi, &spec.mode.retention(spec.k, c)))
        .collect()
}
