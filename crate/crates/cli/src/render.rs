//! Plain-text rendering of a JSON report.
//!
//! Text and structured output are produced from the same value, so both
//! always carry the same fields.

use std::fmt::Write as _;

use serde_json::Value;

pub fn text(value: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = value {
        for (k, v) in map {
            field(&mut out, 0, k, v);
        }
    }
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn field(out: &mut String, indent: usize, key: &str, v: &Value) {
    let pad = " ".repeat(indent);
    match v {
        Value::String(s) if s.contains('\n') => {
            let _ = writeln!(out, "{pad}{key}:");
            for line in s.lines() {
                let _ = writeln!(out, "{pad}  {line}");
            }
        }
        Value::Array(items) if items.iter().all(is_scalar) => {
            let items: Vec<String> = items.iter().map(scalar).collect();
            let _ = writeln!(out, "{pad}{key}: [{}]", items.join(", "));
        }
        Value::Array(items) if items.iter().all(|i| i.is_object()) => {
            let _ = writeln!(out, "{pad}{key}:");
            table(out, indent + 2, items);
        }
        Value::Array(items) => {
            let _ = writeln!(out, "{pad}{key}:");
            for (i, item) in items.iter().enumerate() {
                field(out, indent + 2, &format!("[{i}]"), item);
            }
        }
        Value::Object(map) if map.is_empty() => {
            let _ = writeln!(out, "{pad}{key}: -");
        }
        Value::Object(map) => {
            let _ = writeln!(out, "{pad}{key}:");
            for (k, v) in map {
                field(out, indent + 2, k, v);
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{key}: {}", scalar(other));
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| format!("{k}={}", scalar(v)))
            .collect::<Vec<_>>()
            .join(","),
        other => scalar(other),
    }
}

fn table(out: &mut String, indent: usize, rows: &[Value]) {
    let Some(Value::Object(first)) = rows.first() else { return };
    let headers: Vec<&String> = first.keys().collect();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| headers.iter().map(|h| cell(&r[h.as_str()])).collect())
        .collect();
    let widths: Vec<usize> = headers
        .iter()
        .enumerate()
        .map(|(c, h)| cells.iter().map(|r| r[c].len()).chain([h.len()]).max().unwrap_or(0))
        .collect();
    let pad = " ".repeat(indent);
    let line = |items: Vec<&str>| {
        let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
        format!("{pad}{}", padded.join("  ").trim_end())
    };
    let _ = writeln!(out, "{}", line(headers.iter().map(|h| h.as_str()).collect()));
    for r in &cells {
        let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
    }
}
