//! Canonical JSON: sorted object keys, two-space indentation, scalar-only
//! arrays on one line, every float as 17 significant digits in exponent form
//! (`1.2500000000000000e+1`, the shape of JavaScript's `toExponential(16)`),
//! and a trailing newline. Integers stay integers.

use serde::Serialize;
use serde_json::Value;

/// Serializes `value` to canonical JSON bytes.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<Vec<u8>, serde_json::Error> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out.into_bytes())
}

/// Single-line canonical form, for JSON-Lines records (no trailing newline).
pub fn to_canonical_line<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_compact(&v, &mut out);
    Ok(out)
}

/// Formats a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0.0000000000000000e+0".to_string();
    }
    let s = format!("{x:.16e}");
    match s.split_once('e') {
        Some((mant, exp)) if !exp.starts_with('-') => format!("{mant}e+{exp}"),
        _ => s,
    }
}

fn write_scalar(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serialization is infallible"))
        }
        Value::Array(_) | Value::Object(_) => unreachable!("not a scalar"),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn sorted_entries(m: &serde_json::Map<String, Value>) -> Vec<(&String, &Value)> {
    let mut entries: Vec<_> = m.iter().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    entries
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(v: &Value, level: usize, out: &mut String) {
    match v {
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_scalar(item, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(level + 1, out);
                write_value(item, level + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(level, out);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            let entries = sorted_entries(m);
            for (i, (k, val)) in entries.iter().enumerate() {
                indent(level + 1, out);
                write_scalar(&Value::String((*k).clone()), out);
                out.push_str(": ");
                write_value(val, level + 1, out);
                if i + 1 < entries.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(level, out);
            out.push('}');
        }
        _ => write_scalar(v, out),
    }
}

fn write_compact(v: &Value, out: &mut String) {
    match v {
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_compact(item, out);
            }
            out.push(']');
        }
        Value::Object(m) => {
            out.push('{');
            for (i, (k, val)) in sorted_entries(m).into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_scalar(&Value::String(k.clone()), out);
                out.push(':');
                write_compact(val, out);
            }
            out.push('}');
        }
        _ => write_scalar(v, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn float_formatting_matches_exponent_form() {
        assert_eq!(format_float(12.5), "1.2500000000000000e+1");
        assert_eq!(format_float(0.001), "1.0000000000000000e-3");
        assert_eq!(format_float(-0.0), "0.0000000000000000e+0");
        assert_eq!(format_float(1.0), "1.0000000000000000e+0");
    }

    #[test]
    fn keys_are_sorted_and_output_newline_terminated() {
        let v = json!({"b": 1, "a": [1.5, 2], "c": {"z": true, "y": null}});
        let s = String::from_utf8(to_canonical_json(&v).unwrap()).unwrap();
        assert_eq!(
            s,
            "{\n  \"a\": [1.5000000000000000e+0, 2],\n  \"b\": 1,\n  \"c\": {\n    \"y\": null,\n    \"z\": true\n  }\n}\n"
        );
        assert_eq!(
            to_canonical_line(&v).unwrap(),
            "{\"a\":[1.5000000000000000e+0,2],\"b\":1,\"c\":{\"y\":null,\"z\":true}}"
        );
    }

    proptest! {
        #[test]
        fn floats_round_trip_exactly(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = format_float(x);
            let back: f64 = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back.to_bits(), if x == 0.0 { 0 } else { x.to_bits() });
        }
    }
}
