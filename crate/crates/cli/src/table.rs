//! Tabular results and their CSV encoding.

use std::io::Write;

/// Version of the column layout, bumped whenever a table changes shape.
pub const SCHEMA_VERSION: u32 = 1;

/// Significant digits written for floating point cells.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

/// Rounds to [`SIGNIFICANT_DIGITS`] and prints the shortest decimal that
/// reads back to the rounded value.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("float formatting round-trips");
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}

impl Cell {
    fn render(&self) -> String {
        match *self {
            Cell::Num(x) => format_number(x),
            Cell::Int(n) => n.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Writes the schema comment line followed by RFC 4180 records.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "# gkp-osc {} schema v{SCHEMA_VERSION}\r\n", self.name)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_number(0.1 / std::f64::consts::SQRT_2), "0.0707106781187");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-2.5e-20), "-0.000000000000000000025");
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["n", "x", "y"]);
        t.push(vec![3usize.into(), 0.25.into(), None.into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# gkp-osc demo schema v1\r\nn,x,y\r\n3,0.25,\r\n");
    }
}
