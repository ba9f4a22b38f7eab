//! Text formats: matrix CSV/JSON, discrimination-line CSV and numbers.
//!
//! Matrix CSV is `k` lines of `k` comma-separated numbers, rows being
//! estimated classes. A first line whose first token is not numeric is
//! taken as a header, in which case rows may also carry a leading label.
//! Blank lines and lines starting with `#` are skipped.

use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::Value;

use crate::discrimination::{LinePoint, Preference};
use crate::error::{Error, Result};
use crate::matrix::ConfusionMatrix;

/// Significant digits of every number written to CSV.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(MatrixFormat::Csv),
            "json" => Ok(MatrixFormat::Json),
            _ => Err(Error::invalid(format!(
                "unknown format '{s}', expected csv or json"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatrixOptions {
    pub format: MatrixFormat,
    /// Input has true classes on rows.
    pub transpose: bool,
    /// Entries are instance counts to divide by their total.
    pub counts: bool,
    /// Rescale proportions that do not sum to one.
    pub normalize: bool,
}

/// Parses a matrix document and validates the result.
pub fn parse_matrix(text: &str, options: &MatrixOptions) -> Result<ConfusionMatrix> {
    let rows = match options.format {
        MatrixFormat::Csv => parse_csv_grid(text)?,
        MatrixFormat::Json => parse_json_grid(text)?,
    };
    let m = if options.counts {
        let counts = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        if v.fract() != 0.0 || v.abs() > 9.0e15 {
                            Err(Error::invalid(format!(
                                "row {}, column {}: count {v} is not an integer",
                                i + 1,
                                j + 1
                            )))
                        } else {
                            Ok(v as i64)
                        }
                    })
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        ConfusionMatrix::from_counts(&counts)?
    } else if options.normalize {
        ConfusionMatrix::normalized(&rows)?
    } else {
        ConfusionMatrix::from_proportions(&rows)?
    };
    Ok(if options.transpose { m.transpose() } else { m })
}

fn parse_number(token: &str) -> Option<f64> {
    let v: f64 = token.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

fn parse_csv_grid(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .peekable();
    let mut has_header = false;
    if let Some((_, first)) = lines.peek() {
        let token = first.split(',').next().unwrap_or("");
        if parse_number(token).is_none() {
            has_header = true;
            lines.next();
        }
    }
    let mut rows = Vec::new();
    for (line_no, line) in lines {
        let mut tokens: Vec<&str> = line.split(',').map(str::trim).collect();
        if has_header && parse_number(tokens[0]).is_none() {
            tokens.remove(0);
        }
        let row = tokens
            .iter()
            .enumerate()
            .map(|(j, t)| {
                parse_number(t).ok_or_else(|| {
                    Error::invalid(format!(
                        "line {line_no}, column {}: cannot parse '{t}' as a number",
                        j + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::invalid("no matrix rows found"));
    }
    Ok(rows)
}

fn parse_json_grid(text: &str) -> Result<Vec<Vec<f64>>> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("invalid JSON: {e}")))?;
    let grid = match &value {
        Value::Array(_) => &value,
        Value::Object(map) => map
            .get("cells")
            .or_else(|| map.get("matrix"))
            .ok_or_else(|| Error::invalid("JSON object needs a 'cells' or 'matrix' field"))?,
        _ => return Err(Error::invalid("JSON matrix must be an array of rows")),
    };
    let rows = grid
        .as_array()
        .ok_or_else(|| Error::invalid("JSON matrix must be an array of rows"))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row
                .as_array()
                .ok_or_else(|| Error::invalid(format!("row {} is not an array", i + 1)))?;
            row.iter()
                .enumerate()
                .map(|(j, v)| {
                    v.as_f64().ok_or_else(|| {
                        Error::invalid(format!(
                            "row {}, column {}: {v} is not a number",
                            i + 1,
                            j + 1
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

/// Formats `v` with twelve significant digits in plain decimal notation.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    // {:e} rounds correctly; shift the decimal point by hand afterwards
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

/// Matrix as `k` CSV lines, rows are estimated classes.
pub fn matrix_to_csv(m: &ConfusionMatrix) -> String {
    let mut out = String::new();
    for row in m.to_rows() {
        let line: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub const LINE_CSV_HEADER: &str = "c_x,c_y,crossing,preference";

pub fn line_to_csv(points: &[LinePoint]) -> String {
    let mut out = String::from(LINE_CSV_HEADER);
    out.push('\n');
    for pt in points {
        let c_y = pt.c_y.map(format_number).unwrap_or_default();
        let pref = pt.preference.map(Preference::as_str).unwrap_or("na");
        let _ = writeln!(
            out,
            "{},{},{},{}",
            format_number(pt.c_x),
            c_y,
            u8::from(pt.crossing),
            pref
        );
    }
    out
}

/// Reads back a discrimination-line CSV.
pub fn parse_line_csv(text: &str) -> Result<Vec<LinePoint>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == LINE_CSV_HEADER => {}
        Some((_, h)) => {
            return Err(Error::invalid(format!(
                "line CSV header must be '{LINE_CSV_HEADER}', got '{}'",
                h.trim()
            )))
        }
        None => return Err(Error::invalid("line CSV is empty")),
    }
    lines
        .map(|(n, line)| {
            let err = |what: &str| Error::invalid(format!("line {}: {what}", n + 1));
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(err("expected 4 fields"));
            }
            let c_x = parse_number(fields[0]).ok_or_else(|| err("bad c_x"))?;
            let c_y = match fields[1] {
                "" => None,
                t => Some(parse_number(t).ok_or_else(|| err("bad c_y"))?),
            };
            let crossing = match fields[2] {
                "1" => true,
                "0" => false,
                _ => return Err(err("crossing must be 0 or 1")),
            };
            let preference = match fields[3] {
                "first" => Some(Preference::First),
                "second" => Some(Preference::Second),
                "tie" => Some(Preference::Tie),
                "na" => None,
                _ => return Err(err("preference must be first, second, tie or na")),
            };
            if crossing && c_y.is_none() {
                return Err(err("crossing row without c_y"));
            }
            Ok(LinePoint {
                c_x,
                c_y,
                crossing,
                preference,
            })
        })
        .collect()
}
