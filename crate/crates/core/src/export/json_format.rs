use std::io::Write;

use serde_json::{Map, Value as Json};

use super::{render_float, Column, ColumnType, ExportError, ExportMode, ImportError, Record, Value};
use crate::clock::{format_iso_ms, parse_iso_ms};

/// `{"kind":"…","rows":[{…},…]}` with one row per line.
pub(super) fn write(
    kind: &str,
    columns: &[Column],
    rows: impl Iterator<Item = Vec<Value>>,
    out: &mut dyn Write,
) -> Result<(), ExportError> {
    write!(out, "{{\"kind\":{},\"rows\":[", quote(kind))?;
    for (n, row) in rows.enumerate() {
        out.write_all(if n == 0 { b"\n{" } else { b",\n{" })?;
        for (i, (col, v)) in columns.iter().zip(&row).enumerate() {
            if i > 0 {
                out.write_all(b",")?;
            }
            write!(out, "{}:{}", quote(col.name), literal(v))?;
        }
        out.write_all(b"}")?;
    }
    out.write_all(b"\n]}\n")?;
    Ok(())
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn literal(v: &Value) -> String {
    match v {
        Value::Text(s) => quote(s),
        Value::Int(i) => i.to_string(),
        Value::Float(f) if f.is_finite() => render_float(*f),
        Value::Float(_) => "null".into(),
        Value::Time(ms) => quote(&format_iso_ms(*ms)),
    }
}

pub(super) fn read<R: Record>(text: &str) -> Result<Vec<Vec<Value>>, ImportError> {
    let doc: Json = serde_json::from_str(text)
        .map_err(|e| ImportError::parse(e.line(), e.column(), e.to_string()))?;
    read_document::<R>(&doc)
}

/// Validates the `{kind, rows}` envelope and converts each row.
pub(super) fn read_document<R: Record>(doc: &Json) -> Result<Vec<Vec<Value>>, ImportError> {
    let obj = doc.as_object().ok_or_else(|| mismatch("a top-level object", doc))?;
    let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    let mut sorted = keys.clone();
    sorted.sort_unstable();
    if sorted != ["kind", "rows"] {
        return Err(ImportError::SchemaMismatch {
            expected: "keys kind, rows".into(),
            found: keys.join(", "),
        });
    }
    if obj["kind"].as_str() != Some(R::KIND) {
        return Err(mismatch(&format!("kind {:?}", R::KIND), &obj["kind"]));
    }
    let rows = obj["rows"].as_array().ok_or_else(|| mismatch("rows array", &obj["rows"]))?;

    let mut mode: Option<ExportMode> = None;
    rows.iter()
        .enumerate()
        .map(|(n, row)| {
            let row = row.as_object().ok_or_else(|| mismatch("row object", row))?;
            let row_mode = mode_of::<R>(row)?;
            if *mode.get_or_insert(row_mode) != row_mode {
                return Err(ImportError::SchemaMismatch {
                    expected: "every row with the same columns".into(),
                    found: format!("row {n} differs"),
                });
            }
            R::columns(row_mode)
                .iter()
                .map(|col| typed(col, &row[col.name], n))
                .collect()
        })
        .collect()
}

pub(super) fn mode_of<R: Record>(row: &Map<String, Json>) -> Result<ExportMode, ImportError> {
    let mut keys: Vec<&str> = row.keys().map(String::as_str).collect();
    keys.sort_unstable();
    [ExportMode::PaperExact, ExportMode::Extended]
        .into_iter()
        .find(|m| {
            let mut names = R::column_names(*m);
            names.sort_unstable();
            names == keys
        })
        .ok_or_else(|| ImportError::SchemaMismatch {
            expected: R::column_names(ExportMode::Extended).join(","),
            found: keys.join(","),
        })
}

fn mismatch(expected: &str, found: &Json) -> ImportError {
    let text = found.to_string();
    let mut found: String = text.chars().take(60).collect();
    if found.len() < text.len() {
        found.push('…');
    }
    ImportError::SchemaMismatch {
        expected: expected.into(),
        found,
    }
}

/// Converts one JSON (or YAML-converted) value to the column's type.
pub(super) fn typed(col: &Column, v: &Json, row: usize) -> Result<Value, ImportError> {
    let bad = |what: &str| ImportError::SchemaMismatch {
        expected: format!("{} as {what}", col.name),
        found: format!("row {row}: {v}"),
    };
    match col.ty {
        ColumnType::Text => v.as_str().map(|s| Value::Text(s.to_owned())).ok_or_else(|| bad("string")),
        ColumnType::Int => v.as_i64().map(Value::Int).ok_or_else(|| bad("integer")),
        ColumnType::Float => match v {
            Json::Number(n) => n.as_f64().map(Value::Float).ok_or_else(|| bad("number")),
            Json::String(s) => super::parse_float(s).map(Value::Float).ok_or_else(|| bad("number")),
            _ => Err(bad("number")),
        },
        ColumnType::Time => v
            .as_str()
            .and_then(parse_iso_ms)
            .map(Value::Time)
            .ok_or_else(|| bad("ISO 8601 timestamp")),
    }
}
