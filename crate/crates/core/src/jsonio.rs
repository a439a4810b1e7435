//! JSON input parsing and the canonical writer.
//!
//! Input schema (shared by the CLI), either form:
//!
//! ```json
//! {"n": 2, "L": [[0, 1, 0], [1, 0, 0], [0, 0, 0]], "mode": "float", "tolerance": 1e-9}
//! {"n": 2, "mu": 0, "v0": [1, 0], "w0": ["1/2", 0], "D": [[0, 0], [0, 0]], "mode": "exact"}
//! ```
//!
//! Entries are numbers or `"p/q"` strings; exact mode rejects non-integral
//! number literals. Output JSON is canonical: keys sorted, floats printed
//! with 12 significant digits, so identical inputs give byte-identical bytes.

use serde_json::Value;

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::scalar::{parse_entry, Exact, Mode, Scalar, ScalarContext, DEFAULT_TOLERANCE};

/// A parsed algebra in whichever scalar context the input requested.
pub enum ParsedAlgebra {
    Float(AlgebraSpec<f64>),
    Exact(AlgebraSpec<Exact>),
}

impl ParsedAlgebra {
    pub fn mode(&self) -> Mode {
        match self {
            ParsedAlgebra::Float(_) => Mode::Float,
            ParsedAlgebra::Exact(_) => Mode::ExactRational,
        }
    }
}

fn entry_from_value<S: Scalar>(v: &Value) -> Result<S> {
    match v {
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                Ok(S::from_int(i))
            } else {
                S::try_from_f64(
                    num.as_f64().ok_or_else(|| Error::invalid_input("unreadable number"))?,
                )
            }
        }
        Value::String(s) => parse_entry(s),
        other => Err(Error::invalid_input(format!("matrix entry must be a number or \"p/q\", got {other}"))),
    }
}

fn matrix_from_value<S: Scalar>(v: &Value, what: &str) -> Result<Mat<S>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::invalid_input(format!("{what} must be an array of rows")))?;
    let mut data = Vec::with_capacity(rows.len());
    for row in rows {
        let cells = row
            .as_array()
            .ok_or_else(|| Error::invalid_input(format!("{what} rows must be arrays")))?;
        data.push(cells.iter().map(entry_from_value).collect::<Result<Vec<S>>>()?);
    }
    if data.is_empty() || data.iter().any(|r| r.len() != data.len()) {
        return Err(Error::invalid_input(format!("{what} must be square and nonempty")));
    }
    Ok(Mat::from_rows(data))
}

fn vector_from_value<S: Scalar>(v: &Value, what: &str) -> Result<Vec<S>> {
    v.as_array()
        .ok_or_else(|| Error::invalid_input(format!("{what} must be an array")))?
        .iter()
        .map(entry_from_value)
        .collect()
}

fn build<S: Scalar>(root: &Value, n: usize, ctx: ScalarContext) -> Result<AlgebraSpec<S>> {
    if let Some(lv) = root.get("L") {
        AlgebraSpec::new(n, matrix_from_value::<S>(lv, "L")?, ctx)
    } else {
        let mu = root
            .get("mu")
            .map(entry_from_value::<S>)
            .transpose()?
            .ok_or_else(|| Error::invalid_input("input needs either \"L\" or (\"mu\", \"v0\", \"w0\", \"D\")"))?;
        let v0 = vector_from_value::<S>(
            root.get("v0").ok_or_else(|| Error::invalid_input("missing \"v0\""))?,
            "v0",
        )?;
        let w0 = vector_from_value::<S>(
            root.get("w0").ok_or_else(|| Error::invalid_input("missing \"w0\""))?,
            "w0",
        )?;
        let d = matrix_from_value::<S>(
            root.get("D").ok_or_else(|| Error::invalid_input("missing \"D\""))?,
            "D",
        )?;
        AlgebraSpec::from_components(n, mu, v0, w0, d, ctx)
    }
}

/// Parse the shared input schema. `force_exact` and `tol_override` come from
/// CLI flags and win over the file's own fields.
pub fn parse_algebra(
    root: &Value,
    force_exact: bool,
    tol_override: Option<f64>,
) -> Result<ParsedAlgebra> {
    let n = root
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::invalid_input("missing or non-integer \"n\""))? as usize;
    let mode = if force_exact {
        Mode::ExactRational
    } else {
        match root.get("mode").and_then(Value::as_str) {
            Some("exact") => Mode::ExactRational,
            Some("float") | None => Mode::Float,
            Some(other) => {
                return Err(Error::invalid_input(format!(
                    "mode must be \"float\" or \"exact\", got \"{other}\""
                )))
            }
        }
    };
    let tolerance = tol_override
        .or_else(|| root.get("tolerance").and_then(Value::as_f64))
        .unwrap_or(DEFAULT_TOLERANCE);
    match mode {
        Mode::Float => {
            Ok(ParsedAlgebra::Float(build::<f64>(root, n, ScalarContext::float(tolerance)?)?))
        }
        Mode::ExactRational => {
            Ok(ParsedAlgebra::Exact(build::<Exact>(root, n, ScalarContext::exact())?))
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical writer
// ---------------------------------------------------------------------------

/// Format a float with 12 significant digits; integral values print bare.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    let s = format!("{x:.11e}");
    // trim trailing zeros of the mantissa: 1.20000000000e-3 -> 1.2e-3
    match s.split_once('e') {
        Some((mant, exp)) => {
            let mant = mant.trim_end_matches('0').trim_end_matches('.');
            format!("{mant}e{exp}")
        }
        None => s,
    }
}

/// Render a JSON value canonically: object keys sorted, floats through
/// [`fmt_f64`]. Two runs over identical data give identical bytes.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(num) => {
            if let Some(i) = num.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = num.as_u64() {
                out.push_str(&u.to_string());
            } else {
                out.push_str(&fmt_f64(num.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serialization"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json maps are BTree-backed: keys already sorted
            out.push('{');
            for (i, (k, val)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key serialization"));
                out.push(':');
                write_value(val, out);
            }
            out.push('}');
        }
    }
}

/// JSON value for a float matrix.
pub fn mat_to_value(m: &Mat<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| float_value(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn vec_to_value(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| float_value(*x)).collect())
}

/// A float as a JSON number, rounding out NaN (which serde_json rejects).
pub fn float_value(x: f64) -> Value {
    serde_json::Number::from_f64(if x.is_finite() { x } else { 0.0 })
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn parses_both_schemas() {
        let full = json!({"n": 2, "L": [[0, 1, 0], [1, 0, 0], [0, 0, 0]]});
        let parsed = parse_algebra(&full, false, None).unwrap();
        let ParsedAlgebra::Float(spec) = parsed else { panic!("expected float") };
        assert_eq!(spec.l[(0, 1)], 1.0);

        let comp = json!({"n": 2, "mu": 0, "v0": [1, 0], "w0": [1, 0], "D": [[0,0],[0,0]]});
        let ParsedAlgebra::Float(spec2) = parse_algebra(&comp, false, None).unwrap() else {
            panic!()
        };
        assert_eq!(spec2.l, spec.l);
    }

    #[test]
    fn exact_mode_parses_rational_strings() {
        let v = json!({"n": 2, "mode": "exact",
                       "L": [["1/2", 0, 0], [0, "-1/2", 0], [0, 0, 0]]});
        let ParsedAlgebra::Exact(spec) = parse_algebra(&v, false, None).unwrap() else { panic!() };
        assert_eq!(spec.l[(0, 0)], Exact::from_ratio(1, 2));
        // and rejects non-integral floats
        let bad = json!({"n": 2, "mode": "exact", "L": [[0.5, 0, 0], [0, 0, 0], [0, 0, 0]]});
        assert!(parse_algebra(&bad, false, None).is_err());
    }

    #[test]
    fn canonical_floats() {
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(2.0), "2");
        assert_eq!(fmt_f64(-3.0), "-3");
        assert_eq!(fmt_f64(0.5), "5e-1");
        assert_eq!(fmt_f64(1.0 / 3.0), "3.33333333333e-1");
    }

    #[test]
    fn canonical_objects_sort_keys() {
        let v = json!({"zeta": 1, "alpha": [1.5, 2], "mid": {"b": true, "a": null}});
        assert_eq!(
            to_canonical_string(&v),
            r#"{"alpha":[1.5e0,2],"mid":{"a":null,"b":true},"zeta":1}"#
        );
    }
}
