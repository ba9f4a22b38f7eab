//! Discrimination lines and measure concordance.
//!
//! Two matrix families are compared: the x series, where every class keeps
//! a share `c_x` of its instances, and the y series, where only the first
//! class loses instances and keeps `c_y`. For a measure and each `c_x` of a
//! grid, the discrimination line is the `c_y` at which the measure rates
//! both matrices equally. When no such `c_y` exists in `[c_lo, 1]` the
//! point records which series the measure always prefers instead.
//!
//! Two measures are concordant on a pair of matrices when they prefer the
//! same matrix (or both see a tie).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::ConfusionMatrix;
use crate::measures::{Measure, MeasureKind};
use crate::series::{
    class_proportions, controlled_matrix, retention_grid, ProportionVector, SeriesMode,
};

/// Differences below this are ties.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Largest measure difference accepted at an emitted crossing.
pub const SOLVER_TOLERANCE: f64 = 1e-9;
const SCAN_SAMPLES: usize = 32;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preference {
    First,
    Second,
    Tie,
}

impl Preference {
    pub fn as_str(self) -> &'static str {
        match self {
            Preference::First => "first",
            Preference::Second => "second",
            Preference::Tie => "tie",
        }
    }

    fn from_difference(d: f64) -> Self {
        if d > TIE_TOLERANCE {
            Preference::First
        } else if d < -TIE_TOLERANCE {
            Preference::Second
        } else {
            Preference::Tie
        }
    }
}

/// Difference `a - b` oriented so that positive always favours `a`.
fn oriented_difference(kind: MeasureKind, a: f64, b: f64) -> f64 {
    if kind.higher_is_better() {
        a - b
    } else {
        b - a
    }
}

/// Which of two matrices the measure rates as more accurate.
///
/// Measures where lower is better (FPR) are compared in reverse.
pub fn preference(
    measure: &Measure,
    a: &ConfusionMatrix,
    b: &ConfusionMatrix,
) -> Result<Preference> {
    let va = measure.value(a)?.ok_or(Error::NotComparable)?;
    let vb = measure.value(b)?.ok_or(Error::NotComparable)?;
    Ok(Preference::from_difference(oriented_difference(
        measure.kind,
        va,
        vb,
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridConfig {
    pub step: f64,
    pub c_lo: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            step: 0.01,
            c_lo: 0.0,
        }
    }
}

impl GridConfig {
    pub fn points(&self) -> Result<Vec<f64>> {
        retention_grid(self.c_lo, self.step)
    }
}

/// One grid abscissa of a discrimination line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinePoint {
    pub c_x: f64,
    /// Zero-difference ordinate, present only for crossings.
    pub c_y: Option<f64>,
    pub crossing: bool,
    /// Constant preference over the whole `c_y` range when there is no
    /// crossing, `Tie` at a crossing, `None` when the measure is undefined.
    pub preference: Option<Preference>,
}

impl LinePoint {
    fn crossing(c_x: f64, c_y: f64) -> Self {
        LinePoint {
            c_x,
            c_y: Some(c_y),
            crossing: true,
            preference: Some(Preference::Tie),
        }
    }

    fn constant(c_x: f64, preference: Preference) -> Self {
        LinePoint {
            c_x,
            c_y: None,
            crossing: false,
            preference: Some(preference),
        }
    }

    fn undefined(c_x: f64) -> Self {
        LinePoint {
            c_x,
            c_y: None,
            crossing: false,
            preference: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscriminationLine {
    pub measure: Measure,
    pub k: usize,
    pub p: f64,
    pub c_lo: f64,
    pub points: Vec<LinePoint>,
}

impl DiscriminationLine {
    /// `(c_x, c_y)` pairs where the difference vanishes.
    pub fn crossings(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .filter_map(|pt| pt.c_y.map(|cy| (pt.c_x, cy)))
    }

    /// Abscissas where one series is preferred over the whole `c_y` range.
    pub fn no_crossing(&self) -> impl Iterator<Item = (f64, Preference)> + '_ {
        self.points
            .iter()
            .filter(|pt| !pt.crossing)
            .filter_map(|pt| pt.preference.map(|p| (pt.c_x, p)))
    }

    pub fn crossing_at(&self, c_x: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|pt| (pt.c_x - c_x).abs() < 1e-12)
            .and_then(|pt| pt.c_y)
    }
}

/// The pair of series compared by a discrimination line.
#[derive(Debug, Clone)]
pub struct SeriesPair {
    pi: ProportionVector,
}

impl SeriesPair {
    pub fn new(k: usize, p: f64) -> Result<Self> {
        Ok(SeriesPair {
            pi: class_proportions(k, p)?,
        })
    }

    pub fn k(&self) -> usize {
        self.pi.k()
    }

    pub fn x(&self, c: f64) -> ConfusionMatrix {
        controlled_matrix(&self.pi, &SeriesMode::AllClasses.retention(self.k(), c))
            .expect("retention validated by caller")
    }

    pub fn y(&self, c: f64) -> ConfusionMatrix {
        controlled_matrix(&self.pi, &SeriesMode::FirstClassOnly.retention(self.k(), c))
            .expect("retention validated by caller")
    }

    /// Every `(x(c_x), y(c_y))` combination over the grid, row-major in `c_x`.
    pub fn all_pairs(&self, grid: &[f64]) -> Vec<(ConfusionMatrix, ConfusionMatrix)> {
        let xs: Vec<_> = grid.iter().map(|&c| self.x(c)).collect();
        let ys: Vec<_> = grid.iter().map(|&c| self.y(c)).collect();
        xs.iter()
            .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
            .collect()
    }
}

/// Solves `measure(x(c_x)) = measure(y(c_y))` for every `c_x` of the grid.
pub fn discrimination_line(
    measure: Measure,
    k: usize,
    p: f64,
    grid: &GridConfig,
) -> Result<DiscriminationLine> {
    measure.validate(k)?;
    let series = SeriesPair::new(k, p)?;
    let xs = grid.points()?;
    let points = xs
        .iter()
        .map(|&c_x| solve_point(&measure, &series, c_x, grid.c_lo))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscriminationLine {
        measure,
        k,
        p,
        c_lo: grid.c_lo,
        points,
    })
}

fn solve_point(measure: &Measure, series: &SeriesPair, c_x: f64, c_lo: f64) -> Result<LinePoint> {
    let Some(target) = measure.value(&series.x(c_x))? else {
        return Ok(LinePoint::undefined(c_x));
    };
    // positive when the x matrix is preferred
    let diff = |c_y: f64| -> Result<Option<f64>> {
        Ok(measure
            .value(&series.y(c_y))?
            .map(|v| oriented_difference(measure.kind, target, v)))
    };

    // coarse scan guards against non-monotone measures: bracket the first
    // sign change rather than assuming a single one
    let mut samples = Vec::with_capacity(SCAN_SAMPLES + 1);
    for n in 0..=SCAN_SAMPLES {
        let c = if n == SCAN_SAMPLES {
            1.0
        } else {
            c_lo + (1.0 - c_lo) * n as f64 / SCAN_SAMPLES as f64
        };
        if let Some(d) = diff(c)? {
            samples.push((c, Preference::from_difference(d)));
        }
    }
    let Some(&(first_c, first_sign)) = samples.first() else {
        return Ok(LinePoint::undefined(c_x));
    };
    let Some(change) = samples.iter().position(|&(_, s)| s != first_sign) else {
        return Ok(LinePoint::constant(c_x, first_sign));
    };
    if first_sign == Preference::Tie {
        return Ok(LinePoint::crossing(c_x, first_c));
    }

    let (mut lo, mut hi) = (samples[change - 1].0, samples[change].0);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= f64::EPSILON * 4.0 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match diff(mid)? {
            Some(d) if Preference::from_difference(d) == first_sign => lo = mid,
            _ => hi = mid,
        }
    }
    // prefer whichever end has the smaller residual
    let lo_d = diff(lo)?.map(f64::abs).unwrap_or(f64::INFINITY);
    let hi_d = diff(hi)?.map(f64::abs).unwrap_or(f64::INFINITY);
    let c_y = if lo_d <= hi_d { lo } else { hi };
    Ok(LinePoint::crossing(c_x, c_y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceResult {
    pub first: Measure,
    pub second: Measure,
    /// Pairs on which both measures are defined.
    pub total: usize,
    pub concordant: usize,
    /// Pairs skipped because a measure is undefined on one of the matrices.
    pub excluded: usize,
    pub fraction: f64,
}

impl ConcordanceResult {
    pub fn is_consistent(&self) -> bool {
        self.total > 0 && self.concordant == self.total
    }
}

fn verdicts(
    measure: &Measure,
    pairs: &[(ConfusionMatrix, ConfusionMatrix)],
) -> Result<Vec<Option<Preference>>> {
    pairs
        .iter()
        .map(|(a, b)| match preference(measure, a, b) {
            Ok(p) => Ok(Some(p)),
            Err(Error::NotComparable) => Ok(None),
            Err(e) => Err(e),
        })
        .collect()
}

fn concordance(
    first: Measure,
    second: Measure,
    va: &[Option<Preference>],
    vb: &[Option<Preference>],
) -> ConcordanceResult {
    let mut total = 0;
    let mut concordant = 0;
    for (a, b) in va.iter().zip(vb) {
        if let (Some(a), Some(b)) = (a, b) {
            total += 1;
            if a == b {
                concordant += 1;
            }
        }
    }
    ConcordanceResult {
        first,
        second,
        total,
        concordant,
        excluded: va.len() - total,
        fraction: if total > 0 {
            concordant as f64 / total as f64
        } else {
            0.0
        },
    }
}

/// Share of pairs on which two measures prefer the same matrix.
pub fn consistency(
    first: Measure,
    second: Measure,
    pairs: &[(ConfusionMatrix, ConfusionMatrix)],
) -> Result<ConcordanceResult> {
    let va = verdicts(&first, pairs)?;
    let vb = verdicts(&second, pairs)?;
    let result = concordance(first, second, &va, &vb);
    if result.total == 0 {
        return Err(Error::InsufficientData);
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equivalence {
    /// Groups of measures that rank every comparable pair identically.
    pub classes: Vec<Vec<Measure>>,
    /// Number of pairs examined.
    pub pairs: usize,
    /// Pairwise concordance behind the grouping.
    pub concordance: Vec<ConcordanceResult>,
}

/// Groups measures by the transitive closure of full concordance.
pub fn equivalence_classes(
    measures: &[Measure],
    pairs: &[(ConfusionMatrix, ConfusionMatrix)],
) -> Result<Equivalence> {
    if measures.is_empty() {
        return Err(Error::invalid("no measures given"));
    }
    let table = measures
        .iter()
        .map(|m| verdicts(m, pairs))
        .collect::<Result<Vec<_>>>()?;
    if !table.iter().flatten().any(Option::is_some) {
        return Err(Error::InsufficientData);
    }

    let n = measures.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut results = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let r = concordance(measures[i], measures[j], &table[i], &table[j]);
            if r.is_consistent() {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
            results.push(r);
        }
    }

    let mut classes: Vec<Vec<Measure>> = Vec::new();
    let mut class_of_root = vec![usize::MAX; n];
    for (i, &measure) in measures.iter().enumerate() {
        let r = root(&mut parent, i);
        if class_of_root[r] == usize::MAX {
            class_of_root[r] = classes.len();
            classes.push(Vec::new());
        }
        classes[class_of_root[r]].push(measure);
    }
    Ok(Equivalence {
        classes,
        pairs: pairs.len(),
        concordance: results,
    })
}
