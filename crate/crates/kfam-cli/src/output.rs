//! Row rendering for table, CSV and JSON-lines output.
//!
//! Decimals carry 12 significant digits. A log-space column `x` expands to
//! `x` (decimal, `-` when |ln| > 700) followed by `x_ln` (`ln=<value>`).

use kfam::numerics::{LogNumber, LOG_RANGE};
use serde_json::{Map, Value};

#[derive(Clone, Debug)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
    Log(LogNumber),
    Missing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Jsonl,
}

/// Fixed columns; every row has one cell per column.
pub struct Rows {
    columns: Vec<(&'static str, bool)>,
    rows: Vec<Vec<Cell>>,
}

impl Rows {
    /// `columns` pairs a name with whether the column is log-space.
    pub fn new(columns: &[(&'static str, bool)]) -> Self {
        Rows { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    fn header(&self) -> Vec<String> {
        let mut h = Vec::new();
        for (name, log) in &self.columns {
            h.push((*name).to_string());
            if *log {
                h.push(format!("{name}_ln"));
            }
        }
        h
    }

    fn text_row(&self, row: &[Cell]) -> Vec<String> {
        let mut out = Vec::new();
        for (cell, (_, log)) in row.iter().zip(&self.columns) {
            match (cell, log) {
                (Cell::Log(l), _) => {
                    out.push(if l.ln_abs().abs() <= LOG_RANGE || l.is_zero() { fmt_num(l.to_f64()) } else { "-".into() });
                    out.push(format!("ln={}", fmt_num(l.ln_abs())));
                }
                (Cell::Missing, true) => {
                    out.push("-".into());
                    out.push("-".into());
                }
                (c, _) => out.push(fmt_cell(c)),
            }
        }
        out
    }

    fn json_row(&self, row: &[Cell]) -> Value {
        let mut m = Map::new();
        for (cell, (name, log)) in row.iter().zip(&self.columns) {
            let v = match cell {
                Cell::Text(s) => Value::String(s.clone()),
                Cell::Int(i) => Value::from(*i),
                Cell::Num(x) => json_num(*x),
                Cell::Log(l) => {
                    let dec = if l.ln_abs().abs() <= LOG_RANGE || l.is_zero() { json_num(l.to_f64()) } else { Value::Null };
                    m.insert((*name).to_string(), dec);
                    m.insert(format!("{name}_ln"), json_num(l.ln_abs()));
                    continue;
                }
                Cell::Missing => Value::Null,
            };
            m.insert((*name).to_string(), v);
            if *log {
                m.insert(format!("{name}_ln"), Value::Null);
            }
        }
        Value::Object(m)
    }

    pub fn render(&self, format: Format) -> String {
        let mut s = String::new();
        match format {
            Format::Csv => {
                s.push_str(&self.header().join(","));
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&self.text_row(r).iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(","));
                    s.push('\n');
                }
            }
            Format::Jsonl => {
                for r in &self.rows {
                    s.push_str(&self.json_row(r).to_string());
                    s.push('\n');
                }
            }
            Format::Table => {
                let mut lines = vec![self.header()];
                lines.extend(self.rows.iter().map(|r| self.text_row(r)));
                let widths: Vec<usize> =
                    (0..lines[0].len()).map(|i| lines.iter().map(|l| l[i].chars().count()).max().unwrap_or(0)).collect();
                for l in &lines {
                    let cells: Vec<String> = l.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                    s.push_str(cells.join("  ").trim_end());
                    s.push('\n');
                }
            }
        }
        s
    }
}

fn json_num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt_cell(c: &Cell) -> String {
    match c {
        Cell::Text(s) => s.clone(),
        Cell::Int(i) => i.to_string(),
        Cell::Num(x) => fmt_num(*x),
        Cell::Log(l) => fmt_num(l.to_f64()),
        Cell::Missing => "-".into(),
    }
}

/// 12 significant digits, trailing zeros trimmed; scientific outside [1e-4, 1e15).
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..15).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.11e}");
        let (mant, exp) = s.split_once('e').expect("scientific format has an exponent");
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(190569292.0), "190569292");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.5e-9), "2.5e-9");
        assert_eq!(fmt_num(-14.7781121978613), "-14.7781121979");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn empty_rows_give_header_only() {
        let r = Rows::new(&[("t", false), ("S_t", false)]);
        assert_eq!(r.render(Format::Csv), "t,S_t\n");
        assert_eq!(r.render(Format::Jsonl), "");
    }

    #[test]
    fn log_columns_expand() {
        let mut r = Rows::new(&[("method", false), ("value", true)]);
        r.push(vec![Cell::Text("x".into()), Cell::Log(LogNumber::from_ln(2f64.ln()))]);
        r.push(vec![Cell::Text("huge".into()), Cell::Log(LogNumber::from_ln(1000.0))]);
        assert_eq!(r.render(Format::Csv), "method,value,value_ln\nx,2,ln=0.69314718056\nhuge,-,ln=1000\n");
        let j = r.render(Format::Jsonl);
        assert!(j.starts_with(r#"{"method":"x","value":2.0"#), "{j}");
    }
}
