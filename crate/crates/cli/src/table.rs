//! Tabular output in CSV, JSON or gnuplot data format.

use serde_json::{Map, Value as Json};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
    /// A value that does not exist for this row, e.g. a fit that failed.
    Missing,
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

/// 17 significant digits, locale independent. Negative zero prints as
/// zero.
pub fn num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

impl Value {
    fn text(&self, gnuplot: bool) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Num(x) => num(*x),
            Value::Text(s) => s.clone(),
            Value::Bool(b) if gnuplot => (*b as u8).to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Missing if gnuplot => "NaN".into(),
            Value::Missing => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(i) => Json::from(*i),
            Value::Num(x) => {
                serde_json::Number::from_f64(*x + 0.0).map_or(Json::Null, Json::Number)
            }
            Value::Text(s) => Json::from(s.as_str()),
            Value::Bool(b) => Json::from(*b),
            Value::Missing => Json::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    /// Units, conventions and diagnostics, written as `#` comments.
    pub notes: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&'static str]) -> Self {
        Self {
            command: command.to_string(),
            notes: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
            Format::GnuplotDat => self.gnuplot(),
        }
    }

    fn header(&self) -> String {
        let mut out = format!("# kgml {}\n", self.command);
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        out
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.text(false)))
                .expect("in-memory write");
        }
        let body =
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output");
        self.header() + &body
    }

    fn gnuplot(&self) -> String {
        let mut out = self.header();
        out.push_str(&format!("# {}\n", self.columns.join(" ")));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.text(true)).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    fn json(&self) -> String {
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert(c.to_string(), v.json());
                }
                Json::Object(m)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("command".into(), Json::from(self.command.as_str()));
        doc.insert("notes".into(), Json::from(self.notes.clone()));
        doc.insert("rows".into(), Json::Array(rows));
        let mut s = serde_json::to_string_pretty(&Json::Object(doc)).expect("serializable");
        s.push('\n');
        s
    }
}
