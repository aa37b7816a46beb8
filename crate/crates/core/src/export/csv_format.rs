use std::io::Write;

use super::{parse_text, value_text, Column, ExportError, ImportError, Record, Value};

pub(super) fn write(
    columns: &[Column],
    rows: impl Iterator<Item = Vec<Value>>,
    out: &mut dyn Write,
) -> Result<(), ExportError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(out);
    w.write_record(columns.iter().map(|c| c.name))
        .map_err(csv_io)?;
    for row in rows {
        w.write_record(row.iter().map(value_text)).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> ExportError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => ExportError::Io(io),
        other => ExportError::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

pub(super) fn read<R: Record>(text: &str) -> Result<Vec<Vec<Value>>, ImportError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| csv_error(&e))?.clone();
    let names: Vec<&str> = header.iter().collect();
    let mode = R::mode_for(&names).ok_or_else(|| ImportError::SchemaMismatch {
        expected: format!(
            "{:?} or {:?}",
            R::column_names(super::ExportMode::PaperExact).join(","),
            R::column_names(super::ExportMode::Extended).join(",")
        ),
        found: format!("{:?}", names.join(",")),
    })?;
    let columns = R::columns(mode);

    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let values = record
            .iter()
            .zip(columns)
            .enumerate()
            .map(|(i, (field, col))| {
                parse_text(col.ty, field)
                    .map_err(|m| ImportError::parse(line, i + 1, format!("{}: {m}", col.name)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(values);
    }
    Ok(rows)
}

fn csv_error(e: &csv::Error) -> ImportError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    ImportError::parse(line, 1, e.to_string())
}
