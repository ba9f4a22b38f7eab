//! Accuracy measures computed from confusion matrices, controlled-error
//! matrix series, and discrimination lines comparing how measures rank
//! classifiers.
//!
//! Matrices hold joint proportions with estimated classes on rows and true
//! classes on columns. Class indices are zero-based in the API and
//! one-based in every text format.

pub mod discrimination;
pub mod error;
pub mod gt;
pub mod io;
pub mod matrix;
pub mod measures;
pub mod plot;
pub mod series;

pub use discrimination::{
    consistency, discrimination_line, equivalence_classes, preference, ConcordanceResult,
    DiscriminationLine, Equivalence, GridConfig, LinePoint, Preference, SeriesPair,
};
pub use error::{Error, Result};
pub use gt::{fit_quasi_independence, gt_index, GtIndexResult, QuasiIndependenceFit};
pub use matrix::{BinaryCounts, ConfusionMatrix, Marginals, WeightMatrix};
pub use measures::{
    agreement, class_measure, overall_measure, report, AgreementDecomposition, Measure,
    MeasureKind, MeasureReport, MeasureValue, Scope,
};
pub use series::{
    class_proportions, controlled_matrix, make_series, ProportionVector, SeriesMode, SeriesSpec,
};
