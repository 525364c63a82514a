//! Deterministic JSON and CSV rendering.

use qpoly::C64;
use serde_json::{json, Map, Value};

/// `{re, im}` object.
pub fn cplx(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn pair(p: [f64; 2]) -> Value {
    json!({ "re": p[0], "im": p[1] })
}

/// A float with 17 significant digits; non-finite values become strings.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "\"NaN\"".into()
    } else if x > 0.0 {
        "\"Infinity\"".into()
    } else {
        "\"-Infinity\"".into()
    }
}

/// Pretty JSON with insertion-ordered keys and fixed float formatting.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                indent(out, depth + 1);
                write_value(out, item, depth + 1);
            }
            out.push('\n');
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => write_object(out, map, depth),
    }
}

fn write_object(out: &mut String, map: &Map<String, Value>, depth: usize) {
    if map.is_empty() {
        out.push_str("{}");
        return;
    }
    out.push('{');
    for (i, (k, item)) in map.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        indent(out, depth + 1);
        out.push_str(&Value::String(k.clone()).to_string());
        out.push_str(": ");
        write_value(out, item, depth + 1);
    }
    out.push('\n');
    indent(out, depth);
    out.push('}');
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// CSV field for a float, same digits as the JSON.
pub fn csv_float(x: f64) -> String {
    float(x).trim_matches('"').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(1.0), "1.0000000000000000e0");
        assert_eq!(float(f64::INFINITY), "\"Infinity\"");
        let back: f64 = float(0.1).parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn keeps_key_order_and_integers() {
        let v = json!({ "z": 1, "a": [0.5, -2], "m": {}, "s": "x\"y" });
        let text = render(&v);
        assert!(text.find("\"z\"").unwrap() < text.find("\"a\"").unwrap());
        assert!(text.contains("5.0000000000000000e-1"));
        assert!(text.contains("-2\n"));
        let parsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["s"], "x\"y");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let text = csv_text(&["a", "b"], &[vec!["1".into(), "x, y".into()]]).unwrap();
        assert_eq!(text, "a,b\n1,\"x, y\"\n");
    }
}
