//! Ground truth index under the quasi-independence model.
//!
//! The classifier is modelled as an infallible component plus a random one.
//! Off-diagonal cells then factor as `p_ij = a_i * b_j`, where `a` is the
//! random component's assignment distribution over estimated classes and
//! `b_j` the mass of true class `j` it handles. The diagonal is left free.
//! Both factors are estimated by iterative proportional fitting on the
//! off-diagonal margins, and the index of class `i` is the true positive
//! rate corrected for the chance rate `a_i`.
//!
//! The column proportion is absorbed into `b`, so `b_j = (1 - theta_j) * pi_j`
//! in terms of the mixture model. `a` is normalized to sum to one.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::ConfusionMatrix;

pub const MAX_ITERATIONS: usize = 1000;
/// Stop once no parameter moves by more than this between iterations.
pub const PARAMETER_TOLERANCE: f64 = 1e-10;
/// Largest off-diagonal reconstruction error still counted as a model fit.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiIndependenceFit {
    /// Random assignment probability per estimated class, sums to one.
    pub a: Vec<f64>,
    /// Mass of each true class distributed at random.
    pub b: Vec<f64>,
    pub iterations: usize,
    /// Largest `|p_ij - a_i b_j|` over off-diagonal cells.
    pub residual: f64,
    /// Whether `residual` is within [`RESIDUAL_TOLERANCE`].
    pub quasi_independent: bool,
}

impl QuasiIndependenceFit {
    /// Rescales `a` to unit sum, compensating in `b`.
    pub fn renormalize(&mut self) {
        let s: f64 = self.a.iter().sum();
        if s > 0.0 {
            self.a.iter_mut().for_each(|x| *x /= s);
            self.b.iter_mut().for_each(|x| *x *= s);
        }
    }

    pub fn reconstruct(&self, i: usize, j: usize) -> f64 {
        self.a[i] * self.b[j]
    }

    fn residual_against(&self, m: &ConfusionMatrix) -> f64 {
        let k = m.k();
        (0..k)
            .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| (m.get(i, j) - self.reconstruct(i, j)).abs())
            .fold(0.0, f64::max)
    }
}

/// Fits `p_ij = a_i b_j` on off-diagonal cells by alternating row and
/// column rescaling.
pub fn fit_quasi_independence(m: &ConfusionMatrix) -> Result<QuasiIndependenceFit> {
    let k = m.k();
    if k < 3 {
        return Err(Error::TooFewClasses(k));
    }
    let off = |i: usize, j: usize| if i == j { 0.0 } else { m.get(i, j) };
    let row_targets: Vec<f64> = (0..k).map(|i| (0..k).map(|j| off(i, j)).sum()).collect();
    let col_targets: Vec<f64> = (0..k).map(|j| (0..k).map(|i| off(i, j)).sum()).collect();
    if row_targets.iter().all(|&r| r == 0.0) {
        return Err(Error::PerfectClassification);
    }

    let mut a = vec![1.0 / k as f64; k];
    let mut b = col_targets.clone();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let b_total: f64 = b.iter().sum();
        let next_a: Vec<f64> = (0..k)
            .map(|i| safe_div(row_targets[i], b_total - b[i]))
            .collect();
        let a_total: f64 = next_a.iter().sum();
        let next_b: Vec<f64> = (0..k)
            .map(|j| safe_div(col_targets[j], a_total - next_a[j]))
            .collect();
        let change = a
            .iter()
            .zip(&next_a)
            .chain(b.iter().zip(&next_b))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        a = next_a;
        b = next_b;
        if change < PARAMETER_TOLERANCE {
            converged = true;
            break;
        }
    }

    let mut fit = QuasiIndependenceFit {
        a,
        b,
        iterations,
        residual: 0.0,
        quasi_independent: false,
    };
    fit.renormalize();
    fit.residual = fit.residual_against(m);
    fit.quasi_independent = fit.residual <= RESIDUAL_TOLERANCE;
    if !converged {
        return Err(Error::NoConvergence {
            iterations,
            residual: fit.residual,
        });
    }
    Ok(fit)
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GtIndexResult {
    /// Index per class; `None` when the true class is empty or `a_i = 1`.
    pub theta: Vec<Option<f64>>,
    pub fit: QuasiIndependenceFit,
}

impl GtIndexResult {
    /// Index of one class, with the reason when it is undefined.
    pub fn class_theta(&self, class: usize) -> Result<f64> {
        if class >= self.theta.len() {
            return Err(Error::invalid(format!("class index {class} out of range")));
        }
        match self.theta[class] {
            Some(t) => Ok(t),
            None if 1.0 - self.fit.a[class] <= 1e-12 => Err(Error::DegenerateChance),
            None => Err(Error::invalid(format!(
                "class {} has no true instances",
                class + 1
            ))),
        }
    }
}

/// Chance-corrected TPR per class: `(TPR_i - a_i) / (1 - a_i)`.
pub fn gt_index(m: &ConfusionMatrix) -> Result<GtIndexResult> {
    let fit = fit_quasi_independence(m)?;
    let cols = m.col_sums();
    let theta = (0..m.k())
        .map(|i| {
            let a = fit.a[i];
            if cols[i] <= 0.0 || 1.0 - a <= 1e-12 {
                return None;
            }
            let tpr = m.get(i, i) / cols[i];
            Some((tpr - a) / (1.0 - a))
        })
        .collect();
    Ok(GtIndexResult { theta, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Mixture model: column `j` holds `pi_j`, a share `theta_j` of it is
    /// classified correctly, the rest is spread over all rows following `a`.
    fn mixture(a: &[f64], theta: &[f64], pi: &[f64]) -> ConfusionMatrix {
        let k = a.len();
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        let random = a[i] * (1.0 - theta[j]) * pi[j];
                        if i == j {
                            theta[j] * pi[j] + random
                        } else {
                            random
                        }
                    })
                    .collect()
            })
            .collect();
        ConfusionMatrix::from_proportions(&rows).unwrap()
    }

    #[test]
    fn recovers_assignment_distribution() {
        let a = [0.5, 0.3, 0.2];
        let m = mixture(&a, &[0.6, 0.5, 0.4], &[0.3, 0.3, 0.4]);
        let fit = fit_quasi_independence(&m).unwrap();
        for (x, y) in fit.a.iter().zip(&a) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-6);
        }
        assert!(fit.residual <= 1e-8);
        assert!(fit.quasi_independent);
        assert_abs_diff_eq!(fit.a.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn recovers_theta() {
        let theta = [0.8, 0.7, 0.6];
        let m = mixture(&[0.2, 0.5, 0.3], &theta, &[1.0 / 3.0; 3]);
        let r = gt_index(&m).unwrap();
        for (t, e) in r.theta.iter().zip(&theta) {
            assert_abs_diff_eq!(t.unwrap(), *e, epsilon = 1e-6);
        }
    }

    #[test]
    fn chance_level_class_scores_zero() {
        // theta_0 = 0: the first class is handled by the random component only
        let m = mixture(&[0.4, 0.35, 0.25], &[0.0, 0.5, 0.7], &[0.3, 0.4, 0.3]);
        let r = gt_index(&m).unwrap();
        assert_abs_diff_eq!(r.theta[0].unwrap(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn rejects_two_classes_and_diagonal() {
        let two = ConfusionMatrix::from_proportions(&[vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
        assert_eq!(fit_quasi_independence(&two), Err(Error::TooFewClasses(2)));
        let perfect =
            ConfusionMatrix::from_counts(&[vec![33, 0, 0], vec![0, 34, 0], vec![0, 0, 33]])
                .unwrap();
        assert_eq!(gt_index(&perfect), Err(Error::PerfectClassification));
    }

    #[test]
    fn misfit_is_flagged_not_fatal() {
        let m = ConfusionMatrix::from_proportions(&[
            vec![0.0, 0.1, 0.1],
            vec![0.3, 0.0, 0.1],
            vec![0.2, 0.2, 0.0],
        ])
        .unwrap();
        let fit = fit_quasi_independence(&m).unwrap();
        assert!(fit.residual > RESIDUAL_TOLERANCE);
        assert!(!fit.quasi_independent);
        // the fitted margins still match the observed off-diagonal margins
        for i in 0..3 {
            let observed: f64 = (0..3).filter(|&j| j != i).map(|j| m.get(i, j)).sum();
            let fitted: f64 = (0..3)
                .filter(|&j| j != i)
                .map(|j| fit.reconstruct(i, j))
                .sum();
            assert_abs_diff_eq!(observed, fitted, epsilon = 1e-8);
        }
    }

    #[test]
    fn theta_ignores_factor_scaling() {
        let m = mixture(
            &[0.25, 0.25, 0.3, 0.2],
            &[0.9, 0.5, 0.6, 0.3],
            &[0.4, 0.3, 0.2, 0.1],
        );
        let r = gt_index(&m).unwrap();
        let mut scaled = r.fit.clone();
        scaled.a.iter_mut().for_each(|x| *x *= 7.5);
        scaled.b.iter_mut().for_each(|x| *x /= 7.5);
        scaled.renormalize();
        for (x, y) in scaled.a.iter().zip(&r.fit.a) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn theta_never_exceeds_tpr() {
        let m = ConfusionMatrix::from_counts(&[vec![30, 12, 2], vec![2, 19, 1], vec![1, 3, 30]])
            .unwrap();
        let r = gt_index(&m).unwrap();
        let cols = m.col_sums();
        for (i, col) in cols.iter().enumerate() {
            let tpr = m.get(i, i) / col;
            assert!(r.class_theta(i).unwrap() <= tpr + 1e-15);
        }
        assert!(r.class_theta(3).is_err());
    }
}
