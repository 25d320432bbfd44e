//! Number formatting and table/JSON writers shared by the verify module and
//! the command-line tool.
//!
//! Every float goes out with 17 significant digits (`{:.16e}`), which round
//! trips any f64 and keeps text diffs between runs and implementations
//! meaningful. Non-finite values are written as `nan`, `inf`, `-inf` in CSV
//! and as `null` in JSON.

use std::io::{self, Write};

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};

/// 17 significant digits in scientific notation; −0 prints as 0.
pub fn fmt_f64(x: f64) -> String {
    let x = x + 0.0;
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Comma separated, header row first, LF line endings.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::Input(format!("row {i} has {} cells, header has {}", row.len(), header.len())));
        }
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with every float at 17 significant digits and a trailing
/// newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).map_err(|e| Error::Io(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Num(x) => s.serialize_f64(*x),
            Cell::Int(i) => s.serialize_i64(*i),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
        }
    }
}

struct Row<'a>(&'a [&'a str], &'a [Cell]);

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

/// A table as a JSON array of objects, keys in header order.
pub fn table_json(header: &[&str], rows: &[Vec<Cell>]) -> Result<String> {
    if let Some(bad) = rows.iter().position(|r| r.len() != header.len()) {
        return Err(Error::Input(format!("row {bad} does not match the header")));
    }
    let rows: Vec<Row> = rows.iter().map(|r| Row(header, r)).collect();
    to_json(&rows)
}
