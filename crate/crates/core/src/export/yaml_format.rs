use std::fmt::Write as _;
use std::io::Write;

use super::{render_float, Column, ExportError, ImportError, Record, Value};
use crate::clock::format_iso_ms;

/// Block-style mapping with every string double-quoted, so no scalar is
/// subject to implicit typing (`yes`, `null`, `0x1f`, …).
pub(super) fn write(
    kind: &str,
    columns: &[Column],
    rows: impl Iterator<Item = Vec<Value>>,
    out: &mut dyn Write,
) -> Result<(), ExportError> {
    let mut buf = String::new();
    writeln!(buf, "kind: {}", quote(kind)).ok();
    let mut any = false;
    for row in rows {
        if !any {
            buf.push_str("rows:\n");
            any = true;
        }
        for (i, (col, v)) in columns.iter().zip(&row).enumerate() {
            let lead = if i == 0 { "  - " } else { "    " };
            writeln!(buf, "{lead}{}: {}", col.name, scalar(v)).ok();
        }
        out.write_all(buf.as_bytes())?;
        buf.clear();
    }
    if !any {
        buf.push_str("rows: []\n");
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Text(s) => quote(s),
        Value::Int(i) => i.to_string(),
        Value::Float(f) if f.is_nan() => ".nan".into(),
        Value::Float(f) if f.is_infinite() => if *f > 0.0 { ".inf" } else { "-.inf" }.into(),
        Value::Float(f) => render_float(*f),
        Value::Time(ms) => quote(&format_iso_ms(*ms)),
    }
}

/// Double-quoted YAML scalar. Line breaks, C0/C1 controls and the Unicode
/// line/paragraph separators are escaped because YAML parsers would
/// otherwise fold or reject them.
fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\r' => q.push_str("\\r"),
            '\t' => q.push_str("\\t"),
            c if (c as u32) < 0x20
                || (0x7f..=0x9f).contains(&(c as u32))
                || matches!(c, '\u{2028}' | '\u{2029}' | '\u{feff}' | '\u{fffe}' | '\u{ffff}') =>
            {
                write!(q, "\\u{:04x}", c as u32).ok();
            }
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

pub(super) fn read<R: Record>(text: &str) -> Result<Vec<Vec<Value>>, ImportError> {
    let doc: serde_yaml::Value = serde_yaml::from_str(text).map_err(|e| {
        let (line, column) = e.location().map_or((0, 0), |l| (l.line(), l.column()));
        ImportError::parse(line, column, e.to_string())
    })?;
    let doc = serde_json::to_value(&doc).map_err(|e| ImportError::SchemaMismatch {
        expected: "a mapping with string keys".into(),
        found: e.to_string(),
    })?;
    super::json_format::read_document::<R>(&doc)
}
