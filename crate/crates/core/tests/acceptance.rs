//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use confmeasures::gt::{fit_quasi_independence, gt_index};
use confmeasures::measures::round2;
use confmeasures::{
    class_measure, class_proportions, consistency, discrimination_line, equivalence_classes,
    overall_measure, preference, ConfusionMatrix, Error, GridConfig, Measure, MeasureKind,
    Preference, SeriesPair,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Checks = Vec<String>;
type Criterion = (&'static str, &'static str, fn() -> Checks);

fn table(rows: [[f64; 3]; 3]) -> ConfusionMatrix {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    ConfusionMatrix::from_proportions(&rows).unwrap()
}

fn rotated() -> ConfusionMatrix {
    table([[0.0, 0.0, 0.33], [0.33, 0.0, 0.0], [0.0, 0.34, 0.0]])
}

fn perfect() -> ConfusionMatrix {
    table([[0.33, 0.0, 0.0], [0.0, 0.34, 0.0], [0.0, 0.0, 0.33]])
}

fn misclassified() -> ConfusionMatrix {
    table([[0.0, 0.1, 0.1], [0.3, 0.0, 0.1], [0.2, 0.2, 0.0]])
}

fn intermediate() -> ConfusionMatrix {
    table([[0.30, 0.12, 0.02], [0.02, 0.19, 0.01], [0.01, 0.03, 0.30]])
}

fn second_classifier() -> ConfusionMatrix {
    table([[0.33, 0.11, 0.0], [0.0, 0.12, 0.0], [0.0, 0.11, 0.33]])
}

fn cls(m: &ConfusionMatrix, kind: MeasureKind, class: usize) -> Option<f64> {
    class_measure(m, class, kind).ok().and_then(|v| v.value)
}

fn all(m: &ConfusionMatrix, kind: MeasureKind) -> Option<f64> {
    overall_measure(m, kind).ok().and_then(|v| v.value)
}

fn near(checks: &mut Checks, what: &str, got: Option<f64>, expected: f64, tol: f64) {
    match got {
        Some(v) if (v - expected).abs() <= tol => {}
        Some(v) => checks.push(format!("{what} = {v}, expected {expected} within {tol:e}")),
        None => checks.push(format!("{what} is undefined, expected {expected}")),
    }
}

/// Matrix with independent uniform cells, normalized to unit mass.
fn random_matrix(rng: &mut StdRng, k: usize) -> ConfusionMatrix {
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..k).map(|_| rng.gen_range(0.001..1.0)).collect())
        .collect();
    ConfusionMatrix::normalized(&rows).unwrap()
}

fn default_measures(k: usize) -> Vec<Measure> {
    let mut out: Vec<Measure> = MeasureKind::MULTICLASS
        .iter()
        .map(|&kind| Measure::overall(kind))
        .collect();
    for kind in MeasureKind::CLASS_SPECIFIC {
        if kind == MeasureKind::GtIndex {
            continue;
        }
        for c in 0..k {
            out.push(Measure::for_class(kind, c));
        }
    }
    out
}

fn criterion_1() -> Checks {
    let mut checks = Vec::new();
    let m = intermediate();
    let printed: [(MeasureKind, [f64; 3]); 7] = [
        (MeasureKind::Tpr, [0.91, 0.56, 0.91]),
        (MeasureKind::Tnr, [0.79, 0.95, 0.94]),
        (MeasureKind::Ppv, [0.68, 0.86, 0.88]),
        (MeasureKind::Npv, [0.95, 0.81, 0.95]),
        (MeasureKind::FMeasure, [0.78, 0.68, 0.90]),
        (MeasureKind::Jcc, [0.64, 0.51, 0.81]),
        (MeasureKind::Icsi, [0.59, 0.42, 0.79]),
    ];
    for (kind, row) in printed {
        for (c, &e) in row.iter().enumerate() {
            near(
                &mut checks,
                &format!("{kind}_{}", c + 1),
                cls(&m, kind, c),
                e,
                0.006,
            );
        }
    }
    for (kind, e) in [
        (MeasureKind::Osr, 0.79),
        (MeasureKind::Csi, 0.60),
        (MeasureKind::CohenKappa, 0.69),
        (MeasureKind::ScottPi, 0.68),
        (MeasureKind::MaxwellRe, 0.69),
    ] {
        near(&mut checks, kind.name(), all(&m, kind), e, 0.006);
    }
    checks
}

fn criterion_2() -> Checks {
    let mut checks = Vec::new();
    let perfect = perfect();
    for kind in MeasureKind::ALL {
        let values: Vec<(String, Result<Option<f64>, Error>)> = if kind.is_class_specific() {
            (0..3)
                .map(|c| {
                    let v = class_measure(&perfect, c, kind).map(|v| v.value);
                    (format!("{kind}_{}", c + 1), v)
                })
                .collect()
        } else {
            vec![(
                kind.to_string(),
                overall_measure(&perfect, kind).map(|v| v.value),
            )]
        };
        let best = if kind.higher_is_better() { 1.0 } else { 0.0 };
        for (what, v) in values {
            match v {
                Ok(Some(x)) if x == best => {}
                Ok(Some(x)) => checks.push(format!(
                    "{what} = {x} on the perfect matrix, expected {best}"
                )),
                // the GT index is not defined on a diagonal matrix
                Ok(None) | Err(_) if kind == MeasureKind::GtIndex => {}
                other => checks.push(format!("{what} on the perfect matrix: {other:?}")),
            }
        }
    }
    let m = misclassified();
    near(
        &mut checks,
        "CKC(misclassified)",
        all(&m, MeasureKind::CohenKappa),
        -0.43,
        0.005,
    );
    near(
        &mut checks,
        "SPC(misclassified)",
        all(&m, MeasureKind::ScottPi),
        -0.61,
        0.005,
    );
    near(
        &mut checks,
        "MRE(misclassified)",
        all(&m, MeasureKind::MaxwellRe),
        -0.50,
        0.005,
    );
    match cls(&m, MeasureKind::Tnr, 0) {
        Some(v) if round2(v) == 0.60 && (v - 0.6).abs() < 1e-12 => {}
        other => checks.push(format!("TNR_1(misclassified) = {other:?}, expected 0.6")),
    }
    checks
}

fn criterion_3() -> Checks {
    let mut checks = Vec::new();
    let m = second_classifier();
    near(
        &mut checks,
        "OSR(second classifier)",
        all(&m, MeasureKind::Osr),
        0.78,
        1e-12,
    );
    near(
        &mut checks,
        "CSI(second classifier)",
        all(&m, MeasureKind::Csi),
        0.62,
        0.005,
    );
    for kind in [
        MeasureKind::CohenKappa,
        MeasureKind::ScottPi,
        MeasureKind::MaxwellRe,
    ] {
        near(
            &mut checks,
            &format!("{kind}(second classifier)"),
            all(&m, kind),
            0.67,
            0.005,
        );
    }
    let osr = preference(&Measure::overall(MeasureKind::Osr), &intermediate(), &m);
    if osr != Ok(Preference::First) {
        checks.push(format!(
            "preference(OSR, intermediate, second classifier) = {osr:?}"
        ));
    }
    let csi = preference(&Measure::overall(MeasureKind::Csi), &intermediate(), &m);
    if csi != Ok(Preference::Second) {
        checks.push(format!(
            "preference(CSI, intermediate, second classifier) = {csi:?}"
        ));
    }
    checks
}

fn criterion_4() -> Checks {
    let mut checks = Vec::new();
    let m = rotated();
    for kind in [
        MeasureKind::CohenKappa,
        MeasureKind::ScottPi,
        MeasureKind::MaxwellRe,
    ] {
        near(
            &mut checks,
            &format!("{kind}(rotated)"),
            all(&m, kind),
            -0.5,
            1e-9,
        );
    }
    checks
}

fn criterion_5() -> Checks {
    let mut checks = Vec::new();
    let grid = GridConfig::default();
    let tpr = discrimination_line(Measure::for_class(MeasureKind::Tpr, 0), 3, 0.0, &grid).unwrap();
    for pt in &tpr.points {
        match pt.c_y {
            Some(cy) if (cy - pt.c_x).abs() <= 1e-9 => {}
            other => checks.push(format!("TPR_1 line at c_x = {}: {other:?}", pt.c_x)),
        }
    }
    let osr = discrimination_line(Measure::overall(MeasureKind::Osr), 3, 0.0, &grid).unwrap();
    for pt in &osr.points {
        if pt.c_x < 2.0 / 3.0 - 1e-12 {
            if pt.crossing || pt.preference != Some(Preference::Second) {
                checks.push(format!(
                    "OSR line at c_x = {}: {pt:?}, expected y preference",
                    pt.c_x
                ));
            }
        } else {
            match pt.c_y {
                Some(cy) if (cy - (3.0 * pt.c_x - 2.0)).abs() <= 1e-6 => {}
                other => checks.push(format!("OSR line at c_x = {}: {other:?}", pt.c_x)),
            }
        }
    }
    checks
}

fn partition_names(k: usize, p: f64, measures: &[Measure]) -> Vec<Vec<String>> {
    let grid = GridConfig::default().points().unwrap();
    let pairs = SeriesPair::new(k, p).unwrap().all_pairs(&grid);
    equivalence_classes(measures, &pairs)
        .unwrap()
        .classes
        .iter()
        .map(|c| c.iter().map(|m| m.kind.label().to_string()).collect())
        .collect()
}

fn criterion_6() -> Checks {
    let mut checks = Vec::new();
    let measures: Vec<Measure> = ["osr", "ckc", "spc", "mre", "csi"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let expected = |groups: &[&[&str]]| -> Vec<Vec<String>> {
        groups
            .iter()
            .map(|g| g.iter().map(|s| s.to_string()).collect())
            .collect()
    };
    let p0 = partition_names(3, 0.0, &measures);
    if p0 != expected(&[&["OSR", "CKC", "SPC", "MRE"], &["CSI"]]) {
        checks.push(format!("partition at p = 0: {p0:?}"));
    }
    let p5 = partition_names(3, 0.5, &measures);
    if p5 != expected(&[&["OSR", "SPC", "MRE"], &["CKC"], &["CSI"]]) {
        checks.push(format!("partition at p = 0.5: {p5:?}"));
    }

    let mut rng = StdRng::seed_from_u64(6);
    let pairs: Vec<(ConfusionMatrix, ConfusionMatrix)> = (0..1000)
        .map(|_| {
            let k = rng.gen_range(2..=6);
            (random_matrix(&mut rng, k), random_matrix(&mut rng, k))
        })
        .collect();
    let r = consistency(
        Measure::for_class(MeasureKind::FMeasure, 0),
        Measure::for_class(MeasureKind::Jcc, 0),
        &pairs,
    )
    .unwrap();
    if r.fraction != 1.0 || r.total != 1000 {
        checks.push(format!(
            "F/JCC concordance {} over {} pairs",
            r.fraction, r.total
        ));
    }
    checks
}

fn criterion_7a() -> Checks {
    let mut checks = Vec::new();
    let grid = GridConfig::default();
    for m in default_measures(3) {
        if m == Measure::for_class(MeasureKind::Tpr, 0) {
            continue;
        }
        let line = discrimination_line(m, 3, 0.0, &grid).unwrap();
        for pt in &line.points {
            let above = match (pt.c_y, pt.preference) {
                (Some(cy), _) => cy > pt.c_x + 1e-9,
                // x preferred over the whole range puts the line at the top
                (None, Some(Preference::First)) => true,
                _ => false,
            };
            if above {
                checks.push(format!("{m} at c_x = {}: {pt:?}", pt.c_x));
            }
        }
    }
    checks
}

fn criterion_7b() -> Checks {
    let mut checks = Vec::new();
    let grid = GridConfig::default();
    for kind in [MeasureKind::Tpr, MeasureKind::Npv] {
        for c in 0..3 {
            let m = Measure::for_class(kind, c);
            let base = discrimination_line(m, 3, 0.0, &grid).unwrap();
            for p in [0.5, 1.0] {
                let other = discrimination_line(m, 3, p, &grid).unwrap();
                for (a, b) in base.points.iter().zip(&other.points) {
                    let same_cy = match (a.c_y, b.c_y) {
                        (Some(x), Some(y)) => (x - y).abs() <= 1e-9,
                        (None, None) => true,
                        _ => false,
                    };
                    if !same_cy || a.crossing != b.crossing || a.preference != b.preference {
                        checks.push(format!("{m} at c_x = {}, p = {p}: {a:?} vs {b:?}", a.c_x));
                    }
                }
            }
        }
    }
    checks
}

fn criterion_7c() -> Checks {
    let mut checks = Vec::new();
    let grid = GridConfig::default();
    let osr = Measure::overall(MeasureKind::Osr);
    for p in [0.0, 1.0] {
        let lines: Vec<_> = (3..=10)
            .map(|k| discrimination_line(osr, k, p, &grid).unwrap())
            .collect();
        for w in lines.windows(2) {
            for (a, b) in w[0].points.iter().zip(&w[1].points) {
                // a missing crossing that prefers y sits below every crossing
                let height = |pt: &confmeasures::LinePoint| match (pt.c_y, pt.preference) {
                    (Some(cy), _) => cy,
                    (None, Some(Preference::Second)) => f64::NEG_INFINITY,
                    _ => f64::INFINITY,
                };
                if height(b) > height(a) + 1e-9 {
                    checks.push(format!(
                        "p = {p}, c_x = {}: k = {} gives {:?}, k = {} gives {:?}",
                        a.c_x, w[0].k, a.c_y, w[1].k, b.c_y
                    ));
                }
            }
        }
    }
    checks
}

fn random_class_rates(seed: u64) -> Vec<(ConfusionMatrix, usize)> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..10_000)
        .map(|_| {
            let k = rng.gen_range(2..=8);
            let c = rng.gen_range(0..k);
            (random_matrix(&mut rng, k), c)
        })
        .collect()
}

fn criterion_7d() -> Checks {
    let mut checks = Vec::new();
    for (m, c) in random_class_rates(74) {
        let tpr = cls(&m, MeasureKind::Tpr, c).unwrap();
        let ppv = cls(&m, MeasureKind::Ppv, c).unwrap();
        let f = cls(&m, MeasureKind::FMeasure, c).unwrap();
        let kul = cls(&m, MeasureKind::Kulczynski, c).unwrap();
        let eps = 1e-12;
        if !(tpr * ppv <= f + eps && f <= kul + eps && kul <= tpr.max(ppv) + eps) {
            checks.push(format!(
                "class {}: TPR {tpr}, PPV {ppv}, F {f}, Kulczynski {kul}",
                c + 1
            ));
        }
    }
    checks
}

fn criterion_7e() -> Checks {
    let mut checks = Vec::new();
    let mut worst = [0.0f64; 4];
    for (m, c) in random_class_rates(75) {
        let v = |kind| cls(&m, kind, c).unwrap();
        let f = v(MeasureKind::FMeasure);
        let cols = m.col_sums();
        let weighted: f64 = (0..m.k())
            .map(|i| cols[i] * cls(&m, MeasureKind::Tpr, i).unwrap())
            .sum();
        let gaps = [
            (v(MeasureKind::Jcc) - f / (1.0 + f)).abs(),
            (v(MeasureKind::Icsi) - (v(MeasureKind::Tpr) + v(MeasureKind::Ppv) - 1.0)).abs(),
            (v(MeasureKind::Fpr) - (1.0 - v(MeasureKind::Tnr))).abs(),
            (all(&m, MeasureKind::Osr).unwrap() - weighted).abs(),
        ];
        for (w, g) in worst.iter_mut().zip(gaps) {
            *w = w.max(g);
        }
    }
    let names = [
        "JCC = F/(1+F)",
        "ICSI = TPR+PPV-1",
        "FPR = 1-TNR",
        "OSR = sum pi_i TPR_i",
    ];
    for (name, w) in names.iter().zip(worst) {
        if w > 1e-12 {
            checks.push(format!("{name}: largest deviation {w:e}"));
        }
    }
    checks
}

fn criterion_8() -> Checks {
    let mut checks = Vec::new();
    let mut rng = StdRng::seed_from_u64(8);
    for k in 3..=5 {
        for trial in 0..20 {
            let raw_a: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
            let sa: f64 = raw_a.iter().sum();
            let a: Vec<f64> = raw_a.iter().map(|x| x / sa).collect();
            let b: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
            let diag: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..2.0)).collect();
            let mut cells: Vec<Vec<f64>> = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| if i == j { diag[i] } else { a[i] * b[j] })
                        .collect()
                })
                .collect();
            let total: f64 = cells.iter().flatten().sum();
            cells.iter_mut().flatten().for_each(|x| *x /= total);
            let m = ConfusionMatrix::from_proportions(&cells).unwrap();
            let fit = match fit_quasi_independence(&m) {
                Ok(f) => f,
                Err(e) => {
                    checks.push(format!("k = {k}, trial {trial}: {e}"));
                    continue;
                }
            };
            let da = fit
                .a
                .iter()
                .zip(&a)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            if da > 1e-6 {
                checks.push(format!("k = {k}, trial {trial}: a off by {da:e}"));
            }
            for i in 0..k {
                for j in (0..k).filter(|&j| j != i) {
                    let d = (fit.reconstruct(i, j) - m.get(i, j)).abs();
                    if d > 1e-8 {
                        checks.push(format!(
                            "k = {k}, trial {trial}: cell ({i},{j}) off by {d:e}"
                        ));
                    }
                }
            }
        }
    }
    let two = ConfusionMatrix::from_proportions(&[vec![0.4, 0.1], vec![0.2, 0.3]]).unwrap();
    match gt_index(&two) {
        Err(Error::TooFewClasses(2)) => {}
        other => checks.push(format!("2x2 input: {other:?}")),
    }
    match gt_index(&perfect()) {
        Err(Error::PerfectClassification) => {}
        other => checks.push(format!("diagonal input: {other:?}")),
    }
    checks
}

fn criterion_9() -> Checks {
    let mut checks = Vec::new();
    let pi = class_proportions(5, 1.0).unwrap();
    for (i, (&v, e)) in pi
        .as_slice()
        .iter()
        .zip([0.52, 0.26, 0.13, 0.06, 0.03])
        .enumerate()
    {
        if (round2(v) - e).abs() > 1e-12 {
            checks.push(format!("pi_{} = {v} at k = 5, p = 1, expected {e}", i + 1));
        }
    }
    for k in 2..=12 {
        let pi = class_proportions(k, 0.0).unwrap();
        if pi.as_slice().iter().any(|&v| v != 1.0 / k as f64) {
            checks.push(format!("p = 0, k = {k}: {:?}", pi.as_slice()));
        }
    }
    let mut rng = StdRng::seed_from_u64(9);
    for _ in 0..100 {
        let k = rng.gen_range(2..=30);
        let p = rng.gen_range(0.0..=1.0);
        let s: f64 = class_proportions(k, p).unwrap().as_slice().iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            checks.push(format!("k = {k}, p = {p}: sum {s}"));
        }
    }
    checks
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        (
            "1",
            "reference report of the intermediate matrix",
            criterion_1,
        ),
        ("2", "extreme cases", criterion_2),
        ("3", "second classifier", criterion_3),
        (
            "4",
            "agreement coefficients of the rotated matrix",
            criterion_4,
        ),
        ("5", "TPR and OSR line oracles", criterion_5),
        (
            "6",
            "equivalence partitions and F/JCC concordance",
            criterion_6,
        ),
        ("7a", "lines below the diagonal", criterion_7a),
        ("7b", "TPR and NPV lines ignore p", criterion_7b),
        ("7c", "OSR lines drop with k", criterion_7c),
        ("7d", "mean ordering", criterion_7d),
        ("7e", "functional identities", criterion_7e),
        ("8", "GT index inversion", criterion_8),
        ("9", "class proportions", criterion_9),
    ];
    let mut failed = Vec::new();
    for (id, title, run) in criteria {
        let checks = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(c) => c,
            Err(_) => vec!["panicked".to_string()],
        };
        if checks.is_empty() {
            println!("criterion {id:<3} PASS  {title}");
        } else {
            println!("criterion {id:<3} FAIL  {title}");
            for c in checks.iter().take(10) {
                println!("    {c}");
            }
            if checks.len() > 10 {
                println!("    ... {} more", checks.len() - 10);
            }
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
