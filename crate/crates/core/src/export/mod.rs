//! Serialization of action and movement rows to CSV, JSON, XML and YAML.
//!
//! Every format shares one column schema per record kind. In `PaperExact`
//! mode only the original survey fields are written; `Extended` appends the
//! session id (and, for actions, the time to answer). Imports detect the
//! mode from the header or keys and reject anything else.
//!
//! Output is UTF-8 without a byte-order mark, LF line endings. Floats use
//! the shortest decimal that round-trips, without an exponent for
//! magnitudes in `[1e-3, 1e7)`. Timestamps are ISO 8601 UTC with
//! milliseconds.

mod csv_format;
mod json_format;
mod number;
mod records;
mod xml_format;
mod yaml_format;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::clock::Millis;
use crate::store::{ActionRow, MovementRow};

pub use number::{parse_float, render_float};
pub use records::{ACTION_COLUMNS, MOVEMENT_COLUMNS};

pub const PAPER_ACTIONS_HEADER: &str =
    "player_name,question_answer,question_number,question_description,timestamp";
pub const PAPER_MOVEMENTS_HEADER: &str =
    "player_name,x_axis,y_axis,z_axis,euler_x,euler_y,euler_z,quat_x,quat_y,quat_z,quat_w,timestamp";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExportFormat {
    Csv,
    Json,
    Xml,
    Yaml,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 4] = [Self::Csv, Self::Json, Self::Xml, Self::Yaml];

    pub fn content_type(self) -> &'static str {
        match self {
            Self::Csv => "text/csv",
            Self::Json => "application/json",
            Self::Xml => "application/xml",
            Self::Yaml => "application/yaml",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Xml => "xml",
            Self::Yaml => "yaml",
        }
    }
}

impl FromStr for ExportFormat {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "xml" => Ok(Self::Xml),
            "yaml" | "yml" => Ok(Self::Yaml),
            _ => Err(ExportError::UnsupportedFormat(s.to_owned())),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

/// Which table to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExportKind {
    Actions,
    Movements,
}

impl ExportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Actions => "actions",
            Self::Movements => "movements",
        }
    }
}

impl FromStr for ExportKind {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "actions" => Ok(Self::Actions),
            "movements" => Ok(Self::Movements),
            _ => Err(ExportError::UnsupportedKind(s.to_owned())),
        }
    }
}

impl fmt::Display for ExportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExportMode {
    #[default]
    PaperExact,
    Extended,
}

impl FromStr for ExportMode {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "paper" | "paper_exact" | "paperexact" => Ok(Self::PaperExact),
            "extended" => Ok(Self::Extended),
            _ => Err(ExportError::UnsupportedMode(s.to_owned())),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("unsupported format {0:?}; expected csv, json, xml or yaml")]
    UnsupportedFormat(String),
    #[error("unsupported kind {0:?}; expected actions or movements")]
    UnsupportedKind(String),
    #[error("unsupported mode {0:?}; expected paper or extended")]
    UnsupportedMode(String),
    #[error("write failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ImportError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },
}

impl ImportError {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Typed cell value shared by every format.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Value {
    Text(String),
    Int(i64),
    Float(f64),
    Time(Millis),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ColumnType {
    Text,
    Int,
    Float,
    Time,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Column {
    pub name: &'static str,
    pub ty: ColumnType,
}

/// Row types with a fixed column schema. Paper-mode columns are a prefix
/// of the extended ones.
pub(crate) trait Record: Sized {
    const KIND: &'static str;
    const COLUMNS: &'static [Column];
    const PAPER_LEN: usize;

    fn values(&self) -> Vec<Value>;
    /// Columns beyond `values.len()` take their defaults.
    fn from_values(values: Vec<Value>) -> Self;

    fn columns(mode: ExportMode) -> &'static [Column] {
        match mode {
            ExportMode::PaperExact => &Self::COLUMNS[..Self::PAPER_LEN],
            ExportMode::Extended => Self::COLUMNS,
        }
    }

    fn column_names(mode: ExportMode) -> Vec<&'static str> {
        Self::columns(mode).iter().map(|c| c.name).collect()
    }

    /// Mode whose column names equal `names` exactly, in order.
    fn mode_for(names: &[&str]) -> Option<ExportMode> {
        [ExportMode::PaperExact, ExportMode::Extended]
            .into_iter()
            .find(|m| Self::column_names(*m) == names)
    }
}

/// Rendering of one value as text (CSV fields, XML element text).
pub(crate) fn value_text(v: &Value) -> String {
    match v {
        Value::Text(s) => s.clone(),
        Value::Int(i) => i.to_string(),
        Value::Float(f) => render_float(*f),
        Value::Time(ms) => crate::clock::format_iso_ms(*ms),
    }
}

/// Inverse of [`value_text`].
pub(crate) fn parse_text(ty: ColumnType, s: &str) -> Result<Value, String> {
    match ty {
        ColumnType::Text => Ok(Value::Text(s.to_owned())),
        ColumnType::Int => s
            .parse()
            .map(Value::Int)
            .map_err(|_| format!("expected an integer, found {s:?}")),
        ColumnType::Float => parse_float(s)
            .map(Value::Float)
            .ok_or_else(|| format!("expected a number, found {s:?}")),
        ColumnType::Time => crate::clock::parse_iso_ms(s)
            .map(Value::Time)
            .ok_or_else(|| format!("expected an ISO 8601 timestamp, found {s:?}")),
    }
}

fn export<R: Record>(
    rows: &[R],
    format: ExportFormat,
    mode: ExportMode,
    out: &mut dyn Write,
) -> Result<(), ExportError> {
    let columns = R::columns(mode);
    let values = rows.iter().map(|r| {
        let mut v = r.values();
        v.truncate(columns.len());
        v
    });
    match format {
        ExportFormat::Csv => csv_format::write(columns, values, out),
        ExportFormat::Json => json_format::write(R::KIND, columns, values, out),
        ExportFormat::Xml => xml_format::write(R::KIND, columns, values, out),
        ExportFormat::Yaml => yaml_format::write(R::KIND, columns, values, out),
    }
}

fn import<R: Record>(input: &[u8], format: ExportFormat) -> Result<Vec<R>, ImportError> {
    let text = std::str::from_utf8(input).map_err(|e| {
        let (line, column) = line_col(input, e.valid_up_to());
        ImportError::parse(line, column, "input is not valid UTF-8")
    })?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let rows = match format {
        ExportFormat::Csv => csv_format::read::<R>(text)?,
        ExportFormat::Json => json_format::read::<R>(text)?,
        ExportFormat::Xml => xml_format::read::<R>(text)?,
        ExportFormat::Yaml => yaml_format::read::<R>(text)?,
    };
    Ok(rows.into_iter().map(R::from_values).collect())
}

/// 1-based line and column of a byte offset.
pub(crate) fn line_col(input: &[u8], offset: usize) -> (usize, usize) {
    let offset = offset.min(input.len());
    let before = &input[..offset];
    let line = before.iter().filter(|b| **b == b'\n').count() + 1;
    let line_start = before.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
    let column = String::from_utf8_lossy(&before[line_start..]).chars().count() + 1;
    (line, column)
}

pub fn export_actions(
    rows: &[ActionRow],
    format: ExportFormat,
    mode: ExportMode,
    out: &mut dyn Write,
) -> Result<(), ExportError> {
    export(rows, format, mode, out)
}

pub fn export_movements(
    rows: &[MovementRow],
    format: ExportFormat,
    mode: ExportMode,
    out: &mut dyn Write,
) -> Result<(), ExportError> {
    export(rows, format, mode, out)
}

pub fn actions_to_vec(rows: &[ActionRow], format: ExportFormat, mode: ExportMode) -> Vec<u8> {
    let mut out = Vec::new();
    export_actions(rows, format, mode, &mut out).expect("writing to memory cannot fail");
    out
}

pub fn movements_to_vec(rows: &[MovementRow], format: ExportFormat, mode: ExportMode) -> Vec<u8> {
    let mut out = Vec::new();
    export_movements(rows, format, mode, &mut out).expect("writing to memory cannot fail");
    out
}

/// Parses rows written by [`export_actions`]. In paper mode the session id is
/// empty and the time to answer is 0.
pub fn import_actions(input: &[u8], format: ExportFormat) -> Result<Vec<ActionRow>, ImportError> {
    import(input, format)
}

/// Parses rows written by [`export_movements`]. In paper mode the session id
/// is empty.
pub fn import_movements(
    input: &[u8],
    format: ExportFormat,
) -> Result<Vec<MovementRow>, ImportError> {
    import(input, format)
}
