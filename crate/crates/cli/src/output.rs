use serde::Serialize;
use serde_json::{Map, Value};

/// Output format of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// A rectangular result table for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        self.rows.push(row);
    }
}

/// Everything a command produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub results: Value,
    pub witnesses: Value,
    pub bounds: Value,
    pub pass: bool,
    /// A single headline number, printed alone in text mode.
    pub scalar: Option<f64>,
    pub table: Option<Table>,
}

impl Report {
    pub fn new(command: &'static str, config: Value, results: Value) -> Self {
        Report {
            command,
            config,
            results,
            witnesses: Value::Null,
            bounds: Value::Null,
            pass: true,
            scalar: None,
            table: None,
        }
    }
}

/// Rounds every float in `v` to 12 significant digits.
pub fn round_value(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            Value::from(round12(x))
        }
        Value::Array(a) => Value::Array(a.iter().map(round_value).collect()),
        Value::Object(o) => {
            Value::Object(o.iter().map(|(k, v)| (k.clone(), round_value(v))).collect())
        }
        other => other.clone(),
    }
}

pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(_) => round_value(v).to_string(),
        Value::String(s) if s.contains([',', '"', '\n']) => {
            format!("\"{}\"", s.replace('"', "\"\""))
        }
        Value::String(s) => s.clone(),
        other => {
            let s = round_value(other).to_string();
            format!("\"{}\"", s.replace('"', "\"\""))
        }
    }
}

pub fn render(report: &Report, format: Format, version: &str, seed: u64) -> String {
    match format {
        Format::Json => {
            let mut m = Map::new();
            m.insert("command".into(), Value::from(report.command));
            m.insert("version".into(), Value::from(version));
            m.insert("seed".into(), Value::from(seed));
            m.insert("config".into(), report.config.clone());
            m.insert("results".into(), report.results.clone());
            m.insert("witnesses".into(), report.witnesses.clone());
            m.insert("bounds".into(), report.bounds.clone());
            m.insert("pass".into(), Value::from(report.pass));
            let mut s = serde_json::to_string_pretty(&round_value(&Value::Object(m)))
                .expect("values serialize");
            s.push('\n');
            s
        }
        Format::Csv => match &report.table {
            Some(t) => {
                let mut s = t.headers.join(",");
                s.push('\n');
                for row in &t.rows {
                    s.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
                s
            }
            None => {
                let mut s = String::from("key,value\n");
                if let Value::Object(o) = &report.results {
                    for (k, v) in o {
                        s.push_str(&format!("{k},{}\n", csv_cell(v)));
                    }
                }
                s.push_str(&format!("pass,{}\n", report.pass));
                s
            }
        },
        Format::Text => match report.scalar {
            Some(x) => format!("{x:.6}\n"),
            None => {
                let mut s = serde_json::to_string_pretty(&round_value(&report.results))
                    .expect("values serialize");
                s.push_str(&format!("\npass: {}\n", report.pass));
                s
            }
        },
    }
}
