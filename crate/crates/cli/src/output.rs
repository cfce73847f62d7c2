//! Result tables: tab-separated text with a commented metadata header, or a
//! JSON tree carrying the same content.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::error::CliError;

pub const CODE_VERSION: &str = concat!("catlattice ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Tree,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "tree" => Ok(Format::Tree),
            _ => Err(format!("unknown format `{s}` (table, tree)")),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Table => "tsv",
            Format::Tree => "json",
        }
    }
}

/// Table cell. Non-finite numbers are written as text in the tree format,
/// which has no literal for them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, from = "Cell")]
pub enum Value {
    Int(i64),
    #[serde(serialize_with = "number")]
    Num(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl From<Cell> for Value {
    fn from(c: Cell) -> Self {
        match c {
            Cell::Int(i) => Value::Int(i),
            Cell::Num(x) => Value::Num(x),
            Cell::Text(s) => match s.as_str() {
                "NaN" | "inf" | "-inf" => Value::Num(s.parse().expect("non-finite literal")),
                _ => Value::Text(s),
            },
        }
    }
}

fn number<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&format!("{x:e}"))
    }
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Int(i) => i.to_string(),
            Value::Num(x) => format!("{x:e}"),
            Value::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Num(x) => Some(*x),
            Value::Text(_) => None,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as i64)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    /// Empty for dimensionless quantities.
    pub unit: String,
}

impl Column {
    pub fn new(name: &str, unit: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }

    pub fn header(&self) -> String {
        if self.unit.is_empty() {
            self.name.clone()
        } else {
            format!("{}[{}]", self.name, self.unit)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub code_version: String,
    pub scenario: String,
    /// Resolved configuration of the run.
    pub config: ConfigFile,
    pub tolerances: BTreeMap<String, f64>,
    /// Predictions and summary quantities.
    pub derived: BTreeMap<String, Value>,
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn new(scenario: &str, config: ConfigFile) -> Self {
        Self {
            code_version: CODE_VERSION.into(),
            scenario: scenario.into(),
            config,
            tolerances: BTreeMap::new(),
            derived: BTreeMap::new(),
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn new(metadata: Metadata, columns: Vec<Column>) -> Self {
        Self {
            metadata,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the column schema");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Numeric column by name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.to_text(),
            Format::Tree => serde_json::to_string_pretty(self).expect("table serializes") + "\n",
        }
    }

    fn to_text(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        let mut block = |title: &str, body: &str| {
            let _ = writeln!(out, "## {title}");
            for line in body.lines() {
                let _ = writeln!(out, "# {line}");
            }
        };
        block(
            "run",
            &format!("code_version = {:?}\nscenario = {:?}\n", m.code_version, m.scenario),
        );
        block("config", &m.config.to_toml());
        let tolerances: String = m.tolerances.iter().map(|(k, v)| format!("{k} = {v:e}\n")).collect();
        block("tolerances", &tolerances);
        let derived: String = m
            .derived
            .iter()
            .map(|(k, v)| format!("{k} = {}\n", v.render()))
            .collect();
        block("derived", &derived);
        block("notes", &m.notes.join("\n"));
        let header: Vec<String> = self.columns.iter().map(Column::header).collect();
        out.push_str(&header.join("\t"));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::render).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }

    /// Data lines only, without the metadata header.
    pub fn payload(&self) -> String {
        let text = self.to_text();
        text.lines()
            .filter(|l| !l.starts_with('#'))
            .map(|l| format!("{l}\n"))
            .collect()
    }

    pub fn write(&self, path: Option<&Path>, format: Format) -> Result<(), CliError> {
        let text = self.render(format);
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                }
                std::fs::write(p, text).map_err(|e| CliError::io(p, e))
            }
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

/// Recovers the resolved configuration from an emitted file of either format.
pub fn read_config(text: &str) -> Result<ConfigFile, CliError> {
    if text.trim_start().starts_with('{') {
        let table: ResultTable = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        return Ok(table.metadata.config);
    }
    let mut inside = false;
    let mut body = String::new();
    for line in text.lines() {
        if let Some(title) = line.strip_prefix("## ") {
            inside = title == "config";
        } else if inside {
            match line.strip_prefix('#') {
                Some(rest) => {
                    body.push_str(rest.strip_prefix(' ').unwrap_or(rest));
                    body.push('\n');
                }
                None => break,
            }
        }
    }
    ConfigFile::from_toml(&body)
}
