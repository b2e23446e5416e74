//! Text, CSV and JSON formatting shared by reports and the CLI.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ratedistortion::CurvePoint;

/// Round-trip decimal: 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `key: value` lines.
pub fn key_value_text(pairs: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(k);
        out.push_str(": ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

pub const CURVE_HEADER: &str = "delta,alpha,d,R,r,lambda1";
pub const S1_HEADER: &str = "theta,d,S";

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for p in points {
        let row = [p.delta, p.alpha, p.d, p.rate, p.classical_rate, p.lambda1].map(fmt_f64);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Rows of `(theta, d, S)`.
pub fn s1_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from(S1_HEADER);
    out.push('\n');
    for &(t, d, s) in rows {
        out.push_str(&[t, d, s].map(fmt_f64).join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct S1Row {
    theta: f64,
    d: f64,
    #[serde(rename = "S")]
    s: f64,
}

pub fn s1_json(rows: &[(f64, f64, f64)]) -> Result<String> {
    let rows: Vec<S1Row> = rows.iter().map(|&(theta, d, s)| S1Row { theta, d, s }).collect();
    to_json(&rows)
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Contract(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Parses a CSV produced by [`curve_csv`].
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurvePoint>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CURVE_HEADER => {}
        other => return Err(Error::Shape(format!("unexpected curve header {other:?}"))),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let v: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| Error::Shape(format!("bad number '{c}': {e}"))))
                .collect::<Result<_>>()?;
            if v.len() != 6 {
                return Err(Error::Shape(format!("expected 6 columns, got {}", v.len())));
            }
            Ok(CurvePoint { delta: v[0], alpha: v[1], d: v[2], rate: v[3], classical_rate: v[4], lambda1: v[5] })
        })
        .collect()
}
