//! Machine-readable tables with lossless CSV and JSON round trips.
//!
//! Reals are rendered in scientific notation with 17 significant digits so
//! every `f64` survives a render-parse cycle bit-exactly; integers render
//! plain, which keeps the two distinguishable when parsing back.

use serde_json::{json, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        match v {
            Some(v) => Cell::Float(v),
            None => Cell::Empty,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_row(row: &[Cell]) -> String {
    row.iter()
        .map(|cell| match cell {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(v) => v.clone(),
            Cell::Empty => String::new(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&csv_row(row));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|cell| match cell {
                            Cell::Int(v) => json!(v),
                            Cell::Float(v) => json!(v),
                            Cell::Text(v) => json!(v),
                            Cell::Empty => Value::Null,
                        })
                        .collect(),
                )
            })
            .collect();
        let mut text =
            serde_json::to_string(&json!({ "columns": self.columns, "rows": rows }))
                .expect("table serializes");
        text.push('\n');
        text
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Parse CSV produced by [`Table::to_csv`]. Cell types are recovered
    /// from the lexical form: plain digits are integers, anything that
    /// parses as a float is a float, empty is empty, the rest is text.
    pub fn parse_csv(text: &str) -> Result<ParsedTable, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("empty table")?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for line in lines {
            let row: Vec<Cell> = line
                .split(',')
                .map(|field| {
                    if field.is_empty() {
                        Cell::Empty
                    } else if field.bytes().all(|b| b.is_ascii_digit()) {
                        field
                            .parse::<u64>()
                            .map(Cell::Int)
                            .unwrap_or_else(|_| Cell::Text(field.to_string()))
                    } else if let Ok(v) = field.parse::<f64>() {
                        Cell::Float(v)
                    } else {
                        Cell::Text(field.to_string())
                    }
                })
                .collect();
            if row.len() != columns.len() {
                return Err(format!(
                    "row has {} fields, header has {}",
                    row.len(),
                    columns.len()
                ));
            }
            rows.push(row);
        }
        Ok(ParsedTable { columns, rows })
    }

    pub fn parse_json(text: &str) -> Result<ParsedTable, String> {
        let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let columns = value["columns"]
            .as_array()
            .ok_or("missing columns")?
            .iter()
            .map(|c| c.as_str().map(str::to_string).ok_or("non-string column"))
            .collect::<Result<Vec<_>, _>>()?;
        let rows = value["rows"]
            .as_array()
            .ok_or("missing rows")?
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or("non-array row")?
                    .iter()
                    .map(|cell| match cell {
                        Value::Null => Ok(Cell::Empty),
                        Value::String(s) => Ok(Cell::Text(s.clone())),
                        Value::Number(n) => {
                            if let Some(v) = n.as_u64() {
                                Ok(Cell::Int(v))
                            } else {
                                n.as_f64().map(Cell::Float).ok_or("bad number")
                            }
                        }
                        _ => Err("unsupported cell"),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ParsedTable { columns, rows })
    }
}

/// A table read back from its serialized form; column names are owned.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ParsedTable {
    /// Re-render with the same conventions as [`Table`]; used to confirm
    /// that parse∘render is the identity on bytes.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&csv_row(row));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(vec!["name", "count", "value", "note"]);
        t.push_row(vec![
            "alpha".into(),
            3u64.into(),
            0.1f64.into(),
            Cell::Empty,
        ]);
        t.push_row(vec![
            "beta".into(),
            0u64.into(),
            Cell::Float(-1.25e-8),
            "flag".into(),
        ]);
        t
    }

    #[test]
    fn csv_round_trip_is_byte_exact() {
        let table = sample();
        let text = table.to_csv();
        let parsed = Table::parse_csv(&text).unwrap();
        assert_eq!(parsed.to_csv(), text);
        assert_eq!(parsed.rows, table.rows);
    }

    #[test]
    fn json_round_trip_preserves_cells() {
        let table = sample();
        let text = table.to_json();
        let parsed = Table::parse_json(&text).unwrap();
        assert_eq!(parsed.rows, table.rows);
        // Rendering the parsed rows again yields the same bytes.
        let again = Table {
            columns: table.columns.clone(),
            rows: parsed.rows,
        }
        .to_json();
        assert_eq!(again, text);
    }

    #[test]
    fn floats_render_with_17_significant_digits() {
        assert_eq!(format_float(0.02), "2.0000000000000000e-2");
        let tricky = 0.1 + 0.2;
        assert_eq!(format_float(tricky).parse::<f64>().unwrap(), tricky);
    }
}
