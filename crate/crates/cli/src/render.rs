//! CSV and JSON rendering.
//!
//! Numbers use Rust's shortest round-trip formatting in both formats, so
//! parsing the output reproduces every binary64 value exactly.

use serde::Serialize;

use crate::error::Result;

/// A numeric cell; `None` renders as an empty field. Very small or large
/// magnitudes use exponent notation.
pub fn number(value: Option<f64>) -> String {
    match value {
        None => String::new(),
        Some(v) if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&v.abs()) => v.to_string(),
        Some(v) => format!("{v:e}"),
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// A CSV table with a header row, quoted per RFC 4180 where needed.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
    header: Result<()>,
}

impl Table {
    pub fn new<'a>(header: impl IntoIterator<Item = &'a str>) -> Self {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        let header = writer.write_record(header).map_err(csv_error);
        Table { writer, header }
    }

    pub fn push(&mut self, cells: Vec<String>) {
        if self.header.is_ok() {
            self.header = self.writer.write_record(&cells).map_err(csv_error);
        }
    }

    pub fn finish(self) -> Result<String> {
        self.header?;
        let bytes = self.writer.into_inner().map_err(|e| csv_error(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("CSV cells are UTF-8"))
    }
}

fn csv_error(e: csv::Error) -> crate::error::CliError {
    crate::error::CliError::Output(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_round_trips() {
        let mut table = Table::new(["name", "value"]);
        table.push(vec!["a, \"b\"".into(), number(Some(0.1 + 0.2))]);
        table.push(vec!["none".into(), number(None)]);
        let text = table.finish().unwrap();
        assert_eq!(text, "name,value\r\n\"a, \"\"b\"\"\",0.30000000000000004\r\nnone,\r\n");
        let value: f64 = "0.30000000000000004".parse().unwrap();
        assert_eq!(value, 0.1 + 0.2);
    }

    #[test]
    fn json_round_trips_bits() {
        assert_eq!(number(Some(1.1136924715771102e-14)), "1.1136924715771102e-14");
        assert_eq!(number(Some(-2.5e20)), "-2.5e20");
        assert_eq!(number(Some(6.0)), "6");
        let xs = [2.31, 0.1 + 0.2, 1e-300, 17.5311670611, f64::MAX];
        let text = json(&xs).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        for (a, b) in xs.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
