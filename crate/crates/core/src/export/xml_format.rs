use std::io::Write;

use quick_xml::events::Event;
use quick_xml::Reader;

use super::{line_col, parse_text, value_text, Column, ExportError, ImportError, Record, Value};

pub(super) fn write(
    kind: &str,
    columns: &[Column],
    rows: impl Iterator<Item = Vec<Value>>,
    out: &mut dyn Write,
) -> Result<(), ExportError> {
    out.write_all(b"<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n")?;
    write!(out, "<export kind=\"{}\">", escape(kind))?;
    for row in rows {
        out.write_all(b"\n<row>")?;
        for (col, v) in columns.iter().zip(&row) {
            write!(out, "<{0}>{1}</{0}>", col.name, escape(&value_text(v)))?;
        }
        out.write_all(b"</row>")?;
    }
    out.write_all(b"\n</export>\n")?;
    Ok(())
}

/// Escapes markup characters. Carriage returns and other control characters
/// become character references so parsers do not normalize them away.
fn escape(s: &str) -> String {
    let mut e = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => e.push_str("&amp;"),
            '<' => e.push_str("&lt;"),
            '>' => e.push_str("&gt;"),
            '"' => e.push_str("&quot;"),
            '\'' => e.push_str("&apos;"),
            '\n' => e.push('\n'),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                e.push_str(&format!("&#{};", c as u32));
            }
            c => e.push(c),
        }
    }
    e
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Prolog,
    InExport,
    InRow,
    InField,
    Done,
}

pub(super) fn read<R: Record>(text: &str) -> Result<Vec<Vec<Value>>, ImportError> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(false);
    let bytes = text.as_bytes();
    let at = |reader: &Reader<&[u8]>| line_col(bytes, reader.buffer_position() as usize);
    let syntax = |pos: (usize, usize), msg: String| ImportError::parse(pos.0, pos.1, msg);

    let mut state = State::Prolog;
    let mut rows: Vec<Vec<Value>> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut texts: Vec<String> = Vec::new();
    let mut field_text = String::new();
    let mut expected: Option<Vec<&'static str>> = None;

    loop {
        let event = reader
            .read_event()
            .map_err(|e| syntax(at(&reader), e.to_string()))?;
        match (state, event) {
            (_, Event::Eof) => break,
            (_, Event::Comment(_) | Event::PI(_) | Event::DocType(_)) => {}
            (State::Prolog, Event::Decl(_)) => {}
            (State::Prolog, Event::Start(start)) if start.name().as_ref() == b"export" => {
                let kind = start
                    .try_get_attribute("kind")
                    .map_err(|e| syntax(at(&reader), e.to_string()))?
                    .map(|a| a.unescape_value().map(|v| v.into_owned()))
                    .transpose()
                    .map_err(|e| syntax(at(&reader), e.to_string()))?;
                if kind.as_deref() != Some(R::KIND) {
                    return Err(ImportError::SchemaMismatch {
                        expected: format!("<export kind=\"{}\">", R::KIND),
                        found: format!("kind {kind:?}"),
                    });
                }
                state = State::InExport;
            }
            (State::Prolog, Event::Empty(start)) if start.name().as_ref() == b"export" => {
                state = State::Done;
            }
            (State::InExport, Event::Start(start)) if start.name().as_ref() == b"row" => {
                names.clear();
                texts.clear();
                state = State::InRow;
            }
            (State::InExport, Event::End(_)) => state = State::Done,
            (State::InRow, Event::Start(start)) => {
                names.push(String::from_utf8_lossy(start.name().as_ref()).into_owned());
                field_text.clear();
                state = State::InField;
            }
            (State::InRow, Event::Empty(start)) => {
                names.push(String::from_utf8_lossy(start.name().as_ref()).into_owned());
                texts.push(String::new());
            }
            (State::InField, Event::Text(t)) => {
                let s = t.unescape().map_err(|e| syntax(at(&reader), e.to_string()))?;
                field_text.push_str(&s);
            }
            (State::InField, Event::CData(c)) => {
                field_text.push_str(&String::from_utf8_lossy(&c));
            }
            (State::InField, Event::End(_)) => {
                texts.push(std::mem::take(&mut field_text));
                state = State::InRow;
            }
            (State::InRow, Event::End(_)) => {
                let found: Vec<&str> = names.iter().map(String::as_str).collect();
                let mode = R::mode_for(&found).ok_or_else(|| ImportError::SchemaMismatch {
                    expected: R::column_names(super::ExportMode::Extended).join(","),
                    found: found.join(","),
                })?;
                let cols = R::column_names(mode);
                if expected.get_or_insert_with(|| cols.clone()) != &cols {
                    return Err(ImportError::SchemaMismatch {
                        expected: "every row with the same columns".into(),
                        found: format!("row {} differs", rows.len()),
                    });
                }
                let pos = at(&reader);
                let values = R::columns(mode)
                    .iter()
                    .zip(&texts)
                    .map(|(col, t)| {
                        parse_text(col.ty, t)
                            .map_err(|m| syntax(pos, format!("{}: {m}", col.name)))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                rows.push(values);
                state = State::InExport;
            }
            (State::Prolog | State::InExport | State::InRow | State::Done, Event::Text(t))
                if t.iter().all(u8::is_ascii_whitespace) => {}
            (_, other) => {
                return Err(syntax(at(&reader), format!("unexpected {other:?}")));
            }
        }
    }
    if state != State::Done {
        let (line, column) = line_col(bytes, bytes.len());
        return Err(ImportError::parse(line, column, "document ended before </export>"));
    }
    Ok(rows)
}
