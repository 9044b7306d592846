use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use matchstat::Error;
use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// A command's result: a JSON body and, where the data is tabular, rows
/// for CSV output.
pub struct Output {
    pub body: Value,
    pub table: Option<Table>,
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

impl Output {
    pub fn json(body: Value) -> Self {
        Output { body, table: None }
    }

    pub fn with_table(body: Value, table: Table) -> Self {
        Output {
            body,
            table: Some(table),
        }
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

/// Decimal digits backed by `bits` bits of agreement.
pub fn certified_digits(bits: u32, prec: u32) -> usize {
    let b = bits.min(prec).min(4096);
    ((b as f64) * std::f64::consts::LOG10_2).floor().max(1.0) as usize
}

fn envelope(command: &str, params: &Value, result: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA));
    m.insert("command".into(), json!(command));
    m.insert("params".into(), params.clone());
    m.insert("result".into(), result);
    Value::Object(m)
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::String(s) => out.push(vec![prefix.to_string(), s.clone()]),
        other => out.push(vec![prefix.to_string(), other.to_string()]),
    }
}

pub fn write(command: &str, params: &Value, out: Output, format: Format, path: Option<&Path>) -> io::Result<()> {
    let mut sink: Box<dyn Write> = match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Json => {
            let v = envelope(command, params, out.body);
            serde_json::to_writer_pretty(&mut sink, &v)?;
            writeln!(sink)?;
        }
        Format::Csv => {
            let table = out.table.unwrap_or_else(|| {
                let mut t = Table::new(&["key", "value"]);
                flatten("", &out.body, &mut t.rows);
                t
            });
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(&table.header)?;
            for r in &table.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn error_json(e: &Error) -> Value {
    let mut v = json!({
        "schema": SCHEMA,
        "error_kind": e.kind(),
        "message": e.to_string(),
    });
    if let Error::Precision { suggested_bits, .. } = e {
        v["suggested_bits"] = json!(suggested_bits);
    }
    v
}
