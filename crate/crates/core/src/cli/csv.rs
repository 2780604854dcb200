use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsvError {
    #[error("NaN in column `{column}` of row {row}")]
    NaN { column: String, row: usize },
    #[error("row {row} has {found} cells, header has {expected}")]
    Width {
        row: usize,
        found: usize,
        expected: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// A named curve written to `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }
}

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e17)`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn emit_csv(table: &Table) -> Result<String, CsvError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.header).expect("writing to memory");
    for (r, row) in table.rows.iter().enumerate() {
        if row.len() != table.header.len() {
            return Err(CsvError::Width {
                row: r + 1,
                found: row.len(),
                expected: table.header.len(),
            });
        }
        let mut cells = Vec::with_capacity(row.len());
        for (c, cell) in row.iter().enumerate() {
            cells.push(match cell {
                Cell::Int(x) => x.to_string(),
                Cell::Real(x) if x.is_nan() => {
                    return Err(CsvError::NaN {
                        column: table.header[c].clone(),
                        row: r + 1,
                    })
                }
                Cell::Real(x) => format_real(*x),
                Cell::Text(s) => s.clone(),
                Cell::Bool(b) => b.to_string(),
            });
        }
        w.write_record(&cells).expect("writing to memory");
    }
    let bytes = w.into_inner().expect("flushing to memory");
    Ok(String::from_utf8(bytes).expect("cells are UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn line_counts() {
        let mut t = Table::new("mixing", &["K", "tv", "log_tv"]);
        assert_eq!(emit_csv(&t).unwrap(), "K,tv,log_tv\n");
        for k in 1..=3 {
            t.push(vec![Cell::Int(k), Cell::Real(0.5), Cell::Real(0.5f64.ln())]);
        }
        let s = emit_csv(&t).unwrap();
        assert_eq!(s.lines().count(), 4);
        assert!(!s.contains('\r'));
    }

    #[test]
    fn nan_is_rejected() {
        let mut t = Table::new("x", &["a"]);
        t.push(vec![Cell::Real(f64::NAN)]);
        assert!(matches!(emit_csv(&t), Err(CsvError::NaN { .. })));
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.5), "0.5");
        assert_eq!(format_real(0.1), "0.10000000000000001");
        assert_eq!(format_real(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_real(-3.0), "-3");
        assert_eq!(format_real(1e20), "1e+20");
    }

    #[test]
    fn quoting() {
        let mut t = Table::new("q", &["name"]);
        t.push(vec![Cell::Text("a,\"b\"".into())]);
        assert_eq!(emit_csv(&t).unwrap(), "name\n\"a,\"\"b\"\"\"\n");
    }

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(x in proptest::num::f64::NORMAL) {
            let s = format_real(x);
            prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
