//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes plain strings and numbers and returns a JSON or SVG
//! string, so the page needs no bundler.

use confmeasures::io::{parse_matrix, MatrixOptions};
use confmeasures::plot::{render_svg, PlotDocument};
use confmeasures::{
    discrimination_line, equivalence_classes, report, GridConfig, Measure, SeriesPair,
};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn parse_measures(list: &str, k: usize) -> Result<Vec<Measure>, String> {
    let measures = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let m: Measure = s.parse().map_err(|e| format!("{s}: {e}"))?;
            m.validate(k).map_err(|e| format!("{s}: {e}"))?;
            Ok(m)
        })
        .collect::<Result<Vec<_>, String>>()?;
    if measures.is_empty() {
        return Err("no measures given".into());
    }
    Ok(measures)
}

/// Text table and JSON report for a CSV matrix.
pub fn measure_report_json(csv: &str, counts: bool, transpose: bool) -> Result<String, String> {
    let options = MatrixOptions {
        counts,
        transpose,
        ..MatrixOptions::default()
    };
    let m = parse_matrix(csv, &options).map_err(|e| e.to_string())?;
    let r = report(&m);
    Ok(json!({ "table": r.render_table(), "report": r }).to_string())
}

/// One SVG with a discrimination line per listed measure.
pub fn discrimination_lines_svg(
    measures: &str,
    k: usize,
    p: f64,
    step: f64,
) -> Result<String, String> {
    let measures = parse_measures(measures, k)?;
    let grid = GridConfig { step, c_lo: 0.0 };
    let mut doc = PlotDocument::new(format!("k = {k}, p = {p}"));
    for m in measures {
        let line = discrimination_line(m, k, p, &grid).map_err(|e| e.to_string())?;
        doc = doc.with_line(m.label(), line.points);
    }
    Ok(render_svg(&doc))
}

/// Partition of the listed measures over all series pairs.
pub fn equivalence_json(measures: &str, k: usize, p: f64, step: f64) -> Result<String, String> {
    let measures = parse_measures(measures, k)?;
    let grid = GridConfig { step, c_lo: 0.0 }
        .points()
        .map_err(|e| e.to_string())?;
    let pairs = SeriesPair::new(k, p)
        .map_err(|e| e.to_string())?
        .all_pairs(&grid);
    let eq = equivalence_classes(&measures, &pairs).map_err(|e| e.to_string())?;
    let labels: Vec<Vec<String>> = eq
        .classes
        .iter()
        .map(|c| c.iter().map(Measure::label).collect())
        .collect();
    Ok(json!({ "classes": labels, "pairs": eq.pairs, "concordance": eq.concordance }).to_string())
}

#[wasm_bindgen]
pub fn measure_report(csv: &str, counts: bool, transpose: bool) -> Result<String, JsError> {
    measure_report_json(csv, counts, transpose).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn discrimination_svg(measures: &str, k: usize, p: f64, step: f64) -> Result<String, JsError> {
    discrimination_lines_svg(measures, k, p, step).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn equivalence(measures: &str, k: usize, p: f64, step: f64) -> Result<String, JsError> {
    equivalence_json(measures, k, p, step).map_err(|e| JsError::new(&e))
}
