//! Class-specific and multiclass accuracy measures.
//!
//! Class-specific measures work on the one-vs-rest decomposition of a single
//! class. Multiclass measures summarize the whole matrix; the three
//! chance-corrected agreement coefficients share the `(Po - Pe) / (1 - Pe)`
//! form and differ only in how the expected agreement is modelled.
//!
//! A rate whose denominator is zero is reported as undefined (`None`), never
//! as `0` or `NaN`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gt;
use crate::matrix::{BinaryCounts, ConfusionMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    ClassSpecific,
    Multiclass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MeasureKind {
    /// Overall success rate, the trace of the matrix.
    Osr,
    /// True positive rate (sensitivity, recall).
    Tpr,
    /// True negative rate (specificity).
    Tnr,
    /// Positive predictive value (precision).
    Ppv,
    /// Negative predictive value.
    Npv,
    /// False positive rate, `1 - TNR`. Lower is better.
    Fpr,
    FMeasure,
    /// Jaccard's coefficient of community.
    Jcc,
    /// Individual classification success index, `PPV + TPR - 1`.
    Icsi,
    /// Arithmetic mean of TPR and PPV.
    Kulczynski,
    /// Mean of ICSI over all classes.
    Csi,
    CohenKappa,
    ScottPi,
    /// Maxwell's random error, chance agreement `1/k`.
    MaxwellRe,
    /// Türk's ground truth index.
    GtIndex,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 15] = [
        MeasureKind::Osr,
        MeasureKind::Tpr,
        MeasureKind::Tnr,
        MeasureKind::Ppv,
        MeasureKind::Npv,
        MeasureKind::Fpr,
        MeasureKind::FMeasure,
        MeasureKind::Jcc,
        MeasureKind::Icsi,
        MeasureKind::Kulczynski,
        MeasureKind::Csi,
        MeasureKind::CohenKappa,
        MeasureKind::ScottPi,
        MeasureKind::MaxwellRe,
        MeasureKind::GtIndex,
    ];

    pub const CLASS_SPECIFIC: [MeasureKind; 10] = [
        MeasureKind::Tpr,
        MeasureKind::Tnr,
        MeasureKind::Ppv,
        MeasureKind::Npv,
        MeasureKind::Fpr,
        MeasureKind::FMeasure,
        MeasureKind::Jcc,
        MeasureKind::Icsi,
        MeasureKind::Kulczynski,
        MeasureKind::GtIndex,
    ];

    pub const MULTICLASS: [MeasureKind; 5] = [
        MeasureKind::Osr,
        MeasureKind::Csi,
        MeasureKind::CohenKappa,
        MeasureKind::ScottPi,
        MeasureKind::MaxwellRe,
    ];

    pub fn scope(self) -> Scope {
        match self {
            MeasureKind::Osr
            | MeasureKind::Csi
            | MeasureKind::CohenKappa
            | MeasureKind::ScottPi
            | MeasureKind::MaxwellRe => Scope::Multiclass,
            _ => Scope::ClassSpecific,
        }
    }

    pub fn is_class_specific(self) -> bool {
        self.scope() == Scope::ClassSpecific
    }

    /// False only for complements of accuracy rates.
    pub fn higher_is_better(self) -> bool {
        self != MeasureKind::Fpr
    }

    pub fn chance_corrected(self) -> bool {
        matches!(
            self,
            MeasureKind::CohenKappa
                | MeasureKind::ScottPi
                | MeasureKind::MaxwellRe
                | MeasureKind::GtIndex
        )
    }

    /// Closed range of defined values for a `k`-class matrix.
    pub fn range(self, k: usize) -> (f64, f64) {
        match self {
            MeasureKind::Icsi | MeasureKind::Csi => (-1.0, 1.0),
            MeasureKind::CohenKappa | MeasureKind::ScottPi | MeasureKind::GtIndex => {
                (f64::NEG_INFINITY, 1.0)
            }
            MeasureKind::MaxwellRe => (-1.0 / (k as f64 - 1.0), 1.0),
            _ => (0.0, 1.0),
        }
    }

    /// Short lowercase name used on the command line.
    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Osr => "osr",
            MeasureKind::Tpr => "tpr",
            MeasureKind::Tnr => "tnr",
            MeasureKind::Ppv => "ppv",
            MeasureKind::Npv => "npv",
            MeasureKind::Fpr => "fpr",
            MeasureKind::FMeasure => "f",
            MeasureKind::Jcc => "jcc",
            MeasureKind::Icsi => "icsi",
            MeasureKind::Kulczynski => "kulczynski",
            MeasureKind::Csi => "csi",
            MeasureKind::CohenKappa => "ckc",
            MeasureKind::ScottPi => "spc",
            MeasureKind::MaxwellRe => "mre",
            MeasureKind::GtIndex => "gt",
        }
    }

    /// Label used in printed tables.
    pub fn label(self) -> &'static str {
        match self {
            MeasureKind::Osr => "OSR",
            MeasureKind::Tpr => "TPR",
            MeasureKind::Tnr => "TNR",
            MeasureKind::Ppv => "PPV",
            MeasureKind::Npv => "NPV",
            MeasureKind::Fpr => "FPR",
            MeasureKind::FMeasure => "F-meas.",
            MeasureKind::Jcc => "JCC",
            MeasureKind::Icsi => "ICSI",
            MeasureKind::Kulczynski => "Kulcz.",
            MeasureKind::Csi => "CSI",
            MeasureKind::CohenKappa => "CKC",
            MeasureKind::ScottPi => "SPC",
            MeasureKind::MaxwellRe => "MRE",
            MeasureKind::GtIndex => "GT",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "osr" | "accuracy" => MeasureKind::Osr,
            "tpr" | "sensitivity" | "recall" => MeasureKind::Tpr,
            "tnr" | "specificity" => MeasureKind::Tnr,
            "ppv" | "precision" => MeasureKind::Ppv,
            "npv" => MeasureKind::Npv,
            "fpr" | "fallout" => MeasureKind::Fpr,
            "f" | "f_measure" | "fmeasure" | "f1" => MeasureKind::FMeasure,
            "jcc" | "jaccard" => MeasureKind::Jcc,
            "icsi" => MeasureKind::Icsi,
            "kulczynski" | "kulc" => MeasureKind::Kulczynski,
            "csi" => MeasureKind::Csi,
            "ckc" | "ckp" | "kappa" | "cohen_kappa" => MeasureKind::CohenKappa,
            "spc" | "scott_pi" | "pi" => MeasureKind::ScottPi,
            "mre" | "maxwell_re" => MeasureKind::MaxwellRe,
            "gt" | "gti" | "gt_index" => MeasureKind::GtIndex,
            _ => return Err(Error::invalid(format!("unknown measure '{s}'"))),
        };
        Ok(kind)
    }
}

/// A measure evaluated on one matrix; `value` is `None` when undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureValue {
    pub kind: MeasureKind,
    /// Zero-based class index, absent for multiclass measures. Serialized
    /// one-based.
    #[serde(
        skip_serializing_if = "Option::is_none",
        serialize_with = "serialize_one_based"
    )]
    pub class: Option<usize>,
    pub value: Option<f64>,
}

fn serialize_one_based<S: serde::Serializer>(
    class: &Option<usize>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match class {
        Some(c) => s.serialize_some(&(c + 1)),
        None => s.serialize_none(),
    }
}

impl MeasureValue {
    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }

    /// Value rounded half-up to two decimals, as printed in tables.
    pub fn display(&self) -> Option<f64> {
        self.value.map(round2)
    }
}

/// Half-up rounding to two decimals. The small bias absorbs representation
/// error on exact halves such as 0.685.
pub fn round2(v: f64) -> f64 {
    (v * 100.0 + 0.5 + 1e-9).floor() / 100.0
}

/// Observed and expected agreement proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementDecomposition {
    pub po: f64,
    pub pe: f64,
}

/// Chance-corrected agreement `(Po - Pe) / (1 - Pe)`.
pub fn agreement(d: AgreementDecomposition) -> Result<f64> {
    if 1.0 - d.pe <= 1e-12 {
        return Err(Error::DegenerateChance);
    }
    Ok((d.po - d.pe) / (1.0 - d.pe))
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

fn tpr(c: &BinaryCounts) -> Option<f64> {
    ratio(c.tp, c.tp + c.fn_)
}

fn ppv(c: &BinaryCounts) -> Option<f64> {
    ratio(c.tp, c.tp + c.fp)
}

fn tnr(c: &BinaryCounts) -> Option<f64> {
    ratio(c.tn, c.tn + c.fp)
}

fn rate_from_counts(kind: MeasureKind, c: &BinaryCounts) -> Option<f64> {
    match kind {
        MeasureKind::Tpr => tpr(c),
        MeasureKind::Tnr => tnr(c),
        MeasureKind::Ppv => ppv(c),
        MeasureKind::Npv => ratio(c.tn, c.tn + c.fn_),
        MeasureKind::Fpr => tnr(c).map(|t| 1.0 - t),
        MeasureKind::FMeasure => ratio(2.0 * c.tp, 2.0 * c.tp + c.fn_ + c.fp),
        MeasureKind::Jcc => ratio(c.tp, c.tp + c.fp + c.fn_),
        MeasureKind::Icsi => Some(ppv(c)? + tpr(c)? - 1.0),
        MeasureKind::Kulczynski => Some((tpr(c)? + ppv(c)?) / 2.0),
        _ => unreachable!("{kind} is not a rate"),
    }
}

/// Evaluates a class-specific measure on class `class` (zero-based).
pub fn class_measure(m: &ConfusionMatrix, class: usize, kind: MeasureKind) -> Result<MeasureValue> {
    if !kind.is_class_specific() {
        return Err(Error::invalid(format!("{kind} is a multiclass measure")));
    }
    m.check_class(class)?;
    let value = match kind {
        MeasureKind::GtIndex => gt::gt_index(m).ok().and_then(|r| r.theta[class]),
        _ => rate_from_counts(kind, &m.class_counts(class)?),
    };
    Ok(MeasureValue {
        kind,
        class: Some(class),
        value,
    })
}

/// Observed and expected agreement for a chance-corrected multiclass kind.
pub fn agreement_decomposition(
    m: &ConfusionMatrix,
    kind: MeasureKind,
) -> Result<AgreementDecomposition> {
    let po = m.trace();
    let pe = match kind {
        MeasureKind::CohenKappa => {
            let marg = m.marginals();
            marg.rows.iter().zip(&marg.cols).map(|(r, c)| r * c).sum()
        }
        MeasureKind::ScottPi => m.col_sums().iter().map(|p| p * p).sum(),
        MeasureKind::MaxwellRe => 1.0 / m.k() as f64,
        _ => {
            return Err(Error::invalid(format!(
                "{kind} is not an agreement coefficient"
            )))
        }
    };
    Ok(AgreementDecomposition { po, pe })
}

/// Evaluates a multiclass measure.
pub fn overall_measure(m: &ConfusionMatrix, kind: MeasureKind) -> Result<MeasureValue> {
    let value = match kind {
        MeasureKind::Osr => Some(m.trace()),
        MeasureKind::Csi => (0..m.k())
            .map(|i| rate_from_counts(MeasureKind::Icsi, &m.class_counts(i).ok()?))
            .sum::<Option<f64>>()
            .map(|s| s / m.k() as f64),
        MeasureKind::CohenKappa | MeasureKind::ScottPi | MeasureKind::MaxwellRe => {
            Some(agreement(agreement_decomposition(m, kind)?)?)
        }
        _ => {
            return Err(Error::invalid(format!(
                "{kind} is a class-specific measure"
            )))
        }
    };
    Ok(MeasureValue {
        kind,
        class: None,
        value,
    })
}

/// A measure kind bound to a class when it needs one.
///
/// Written as `kind` or `kind:class` with a one-based class, e.g. `tpr:2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "String")]
pub struct Measure {
    pub kind: MeasureKind,
    pub class: Option<usize>,
}

impl From<Measure> for String {
    fn from(m: Measure) -> String {
        m.to_string()
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None => Ok(Measure {
                kind: s.parse()?,
                class: None,
            }),
            Some((kind, class)) => {
                let class: usize = class
                    .trim()
                    .parse()
                    .ok()
                    .filter(|&c| c >= 1)
                    .ok_or_else(|| Error::invalid(format!("bad class index in '{s}'")))?;
                Ok(Measure::for_class(kind.parse()?, class - 1))
            }
        }
    }
}

impl Measure {
    pub fn overall(kind: MeasureKind) -> Self {
        Measure { kind, class: None }
    }

    pub fn for_class(kind: MeasureKind, class: usize) -> Self {
        Measure {
            kind,
            class: Some(class),
        }
    }

    /// Checks that the class index is present exactly when the kind needs it.
    pub fn validate(&self, k: usize) -> Result<()> {
        match (self.kind.is_class_specific(), self.class) {
            (true, None) => Err(Error::invalid(format!(
                "{} is class-specific and needs a class index",
                self.kind
            ))),
            (true, Some(c)) if c >= k => Err(Error::invalid(format!(
                "class index {c} out of range for {k} classes"
            ))),
            (false, Some(_)) => Err(Error::invalid(format!(
                "{} is a multiclass measure and takes no class index",
                self.kind
            ))),
            _ => Ok(()),
        }
    }

    pub fn evaluate(&self, m: &ConfusionMatrix) -> Result<MeasureValue> {
        self.validate(m.k())?;
        match self.class {
            Some(c) => class_measure(m, c, self.kind),
            None => overall_measure(m, self.kind),
        }
    }

    /// Defined value, with degenerate chance correction folded into `None`.
    pub fn value(&self, m: &ConfusionMatrix) -> Result<Option<f64>> {
        match self.evaluate(m) {
            Ok(v) => Ok(v.value),
            Err(Error::DegenerateChance) => Ok(None),
            Err(e) => Err(e),
        }
    }

    pub fn label(&self) -> String {
        match self.class {
            Some(c) => format!("{}_{}", self.kind.label(), c + 1),
            None => self.kind.label().to_string(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class {
            Some(c) => write!(f, "{}:{}", self.kind, c + 1),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// One class-specific measure evaluated on every class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub kind: MeasureKind,
    pub values: Vec<MeasureValue>,
}

/// Every measure of the catalog evaluated on one matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub k: usize,
    pub class_specific: Vec<ClassRow>,
    pub multiclass: Vec<MeasureValue>,
}

impl MeasureReport {
    pub fn class_value(&self, kind: MeasureKind, class: usize) -> Option<f64> {
        self.class_specific
            .iter()
            .find(|r| r.kind == kind)
            .and_then(|r| r.values.get(class))
            .and_then(|v| v.value)
    }

    pub fn overall_value(&self, kind: MeasureKind) -> Option<f64> {
        self.multiclass
            .iter()
            .find(|v| v.kind == kind)
            .and_then(|v| v.value)
    }

    /// Plain-text table with one row per measure and one column per class,
    /// plus a multiclass column. Values use two decimals.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<10}", ""));
        for c in 0..self.k {
            out.push_str(&format!("{:>8}", format!("Cls.{}", c + 1)));
        }
        out.push_str(&format!("{:>8}\n", "Multi."));
        let cell = |v: Option<&MeasureValue>| match v {
            None => "-".to_string(),
            Some(v) => match v.display() {
                Some(x) => format!("{x:.2}"),
                None => "undef".to_string(),
            },
        };
        for kind in MeasureKind::ALL {
            out.push_str(&format!("{:<10}", kind.label()));
            let row = self.class_specific.iter().find(|r| r.kind == kind);
            for c in 0..self.k {
                out.push_str(&format!("{:>8}", cell(row.and_then(|r| r.values.get(c)))));
            }
            let multi = self.multiclass.iter().find(|v| v.kind == kind);
            out.push_str(&format!("{:>8}\n", cell(multi)));
        }
        out
    }
}

/// Evaluates the whole catalog; undefined cells never abort the report.
pub fn report(m: &ConfusionMatrix) -> MeasureReport {
    let k = m.k();
    let gt_theta = gt::gt_index(m).ok().map(|r| r.theta);
    let class_specific = MeasureKind::CLASS_SPECIFIC
        .iter()
        .map(|&kind| {
            let values = (0..k)
                .map(|class| {
                    let value = match kind {
                        MeasureKind::GtIndex => gt_theta.as_ref().and_then(|t| t[class]),
                        _ => m
                            .class_counts(class)
                            .ok()
                            .and_then(|c| rate_from_counts(kind, &c)),
                    };
                    MeasureValue {
                        kind,
                        class: Some(class),
                        value,
                    }
                })
                .collect();
            ClassRow { kind, values }
        })
        .collect();
    let multiclass = MeasureKind::MULTICLASS
        .iter()
        .map(|&kind| {
            overall_measure(m, kind).unwrap_or(MeasureValue {
                kind,
                class: None,
                value: None,
            })
        })
        .collect();
    MeasureReport {
        k,
        class_specific,
        multiclass,
    }
}
