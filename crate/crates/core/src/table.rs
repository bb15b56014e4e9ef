//! Result tables: CSV with a block of `#` comment lines on top, and an
//! optional JSON mirror. Floats are written with 17 significant digits so a
//! re-read gives back the same bits.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::OutputFormat;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(usize),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// Header lines without the leading `# `.
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Starts a table whose header carries the schema version, a title and
    /// the config echo.
    pub fn new(title: &str, config_echo: &str, columns: Vec<String>) -> Self {
        let mut comments = vec![
            format!("fwmix {title}"),
            format!("schema_version = {SCHEMA_VERSION}"),
            format!("generator = fwmix {}", env!("CARGO_PKG_VERSION")),
        ];
        comments.extend(config_echo.lines().map(|l| format!("config: {l}")));
        Table {
            comments,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Table(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("cells are utf-8")
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> =
                    self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                Value::Object(m)
            })
            .collect();
        serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "header": self.comments,
            "columns": self.columns,
            "rows": rows,
        })
    }

    /// Writes `path` (CSV) and/or its `.json` sibling. Returns the files written.
    pub fn write_to(&self, path: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
            let f = std::io::BufWriter::new(std::fs::File::create(path)?);
            self.write_csv(f)?;
            written.push(path.to_path_buf());
        }
        if matches!(format, OutputFormat::Json | OutputFormat::Both) {
            let json_path = if format == OutputFormat::Json {
                path.to_path_buf()
            } else {
                path.with_extension("json")
            };
            let mut f = std::io::BufWriter::new(std::fs::File::create(&json_path)?);
            serde_json::to_writer_pretty(&mut f, &self.to_json())?;
            f.write_all(b"\n")?;
            written.push(json_path);
        }
        Ok(written)
    }
}

/// A CSV table read back as text cells.
#[derive(Clone, Debug, PartialEq)]
pub struct TextTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut comments = Vec::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            match line.strip_prefix('#') {
                Some(rest) => {
                    comments.push(rest.trim_start_matches(' ').trim_end_matches(['\r', '\n']).to_string());
                    body_start += line.len();
                }
                None if line.trim().is_empty() => body_start += line.len(),
                None => break,
            }
        }
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(&text.as_bytes()[body_start..]);
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if columns.is_empty() || columns.iter().all(String::is_empty) {
            return Err(Error::Table("no header row".into()));
        }
        let rows = r
            .records()
            .map(|rec| Ok(rec?.iter().map(str::to_string).collect()))
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(TextTable {
            comments,
            columns,
            rows,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Table(format!("missing column `{name}`")))
    }

    pub fn float(&self, row: usize, col: usize) -> Result<f64> {
        let s = &self.rows[row][col];
        s.parse().map_err(|_| {
            Error::Table(format!(
                "row {}: column `{}` is not a number: `{s}`",
                row + 1,
                self.columns[col]
            ))
        })
    }

    pub fn float_column(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column_index(name)?;
        (0..self.rows.len()).map(|r| self.float(r, c)).collect()
    }
}
