//! Utility matrix CSV files and number formatting.
//!
//! A matrix file has a header `user_id,<item_1>,...,<item_n>` followed by one
//! line per user: an identifier and `n` strictly positive decimals.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::UtilityMatrix;

/// Significant digits used for every serialized number.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `x` with [`SIGNIFICANT_DIGITS`] significant digits, trimming
/// trailing zeros and switching to exponent notation for very large or small
/// magnitudes.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent notation");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent < -5 || exponent >= SIGNIFICANT_DIGITS as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exponent}");
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exponent).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Parses a utility matrix from CSV text.
pub fn parse_utility_csv<R: Read>(reader: R) -> Result<UtilityMatrix> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = csv.records();
    let header = match records.next() {
        Some(record) => record.map_err(|e| csv_error(1, e))?,
        None => {
            return Err(Error::Csv {
                line: 1,
                message: "empty file; expected a `user_id,<items>` header".into(),
            })
        }
    };
    if header.get(0).map(str::trim) != Some("user_id") || header.len() < 2 {
        return Err(Error::Csv {
            line: 1,
            message: "header must be `user_id` followed by at least one item id".into(),
        });
    }
    let items: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    let n = items.len();

    let mut users = Vec::new();
    let mut values = Vec::new();
    for (idx, record) in records.enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| csv_error(line, e))?;
        if record.len() == 1 && record.get(0).map_or(true, |s| s.trim().is_empty()) {
            continue;
        }
        if record.len() != n + 1 {
            return Err(Error::Csv {
                line,
                message: format!("expected {} fields, found {}", n + 1, record.len()),
            });
        }
        let user = record[0].trim().to_string();
        for (col, field) in record.iter().skip(1).enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| Error::Csv {
                line,
                message: format!("item '{}' has non-numeric utility '{field}'", items[col]),
            })?;
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Csv {
                    line,
                    message: format!(
                        "user '{user}', item '{}' (row {}, column {}) has utility {value}; utilities must be strictly positive",
                        items[col],
                        users.len() + 1,
                        col + 1
                    ),
                });
            }
            values.push(value);
        }
        users.push(user);
    }
    if users.is_empty() {
        return Err(Error::Csv {
            line: 2,
            message: "no user rows".into(),
        });
    }
    UtilityMatrix::new(users.len(), n, values)?.with_labels(users, items)
}

fn csv_error(line: usize, err: csv::Error) -> Error {
    Error::Csv {
        line,
        message: err.to_string(),
    }
}

pub fn load_utility_csv(path: impl AsRef<Path>) -> Result<UtilityMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_utility_csv(file)
}

/// Writes `w` in the matrix CSV format. Unlabeled users and items get
/// generated identifiers.
pub fn write_utility_csv<W: Write>(writer: W, w: &UtilityMatrix) -> Result<()> {
    let mut csv = csv::WriterBuilder::new().from_writer(writer);
    let map = |e: csv::Error| Error::Io(e.to_string());
    let mut header = vec!["user_id".to_string()];
    header.extend((0..w.num_items()).map(|j| w.item_label(j)));
    csv.write_record(&header).map_err(map)?;
    for i in 0..w.num_users() {
        let mut record = vec![w.user_label(i)];
        record.extend(w.row(i).iter().map(|&v| format_sig(v)));
        csv.write_record(&record).map_err(map)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn save_utility_csv(path: impl AsRef<Path>, w: &UtilityMatrix) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_utility_csv(file, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_significant_digits() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(-2.5), "-2.5");
        assert_eq!(format_sig(3.0 / 7.0), "0.428571428571");
        assert_eq!(format_sig(6.0 / 7.0), "0.857142857143");
        assert_eq!(format_sig(123456.789), "123456.789");
        assert_eq!(format_sig(1e-7), "1e-7");
        assert_eq!(format_sig(2.5e15), "2.5e15");
        assert_eq!(format_sig(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_sig(f64::NAN), "nan");
    }

    #[test]
    fn parses_a_diverse_matrix() {
        let text = "user_id,a,b\nu1,0.9,0.1\nu2,0.1,0.9\n";
        let w = parse_utility_csv(text.as_bytes()).unwrap();
        assert_eq!(w.num_users(), 2);
        assert_eq!(w.row(1), &[0.1, 0.9]);
        assert_eq!(w.item_labels().unwrap(), &["a", "b"]);
        assert_eq!(w.user_label(0), "u1");
    }

    #[test]
    fn rejects_malformed_input() {
        let zero = "user_id,a,b\nu1,0.9,0.1\nu2,0,0.9\n";
        match parse_utility_csv(zero.as_bytes()) {
            Err(Error::Csv { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("row 2, column 1"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let ragged = "user_id,a,b\nu1,0.9\n";
        assert!(matches!(
            parse_utility_csv(ragged.as_bytes()),
            Err(Error::Csv { line: 2, .. })
        ));
        let header = "id,a\nu1,1\n";
        assert!(matches!(
            parse_utility_csv(header.as_bytes()),
            Err(Error::Csv { line: 1, .. })
        ));
        let text = "user_id,a\nu1,abc\n";
        assert!(parse_utility_csv(text.as_bytes()).is_err());
        assert!(parse_utility_csv("".as_bytes()).is_err());
    }

    #[test]
    fn round_trip_preserves_twelve_digits() {
        let w = UtilityMatrix::from_rows(&[
            vec![std::f64::consts::PI, 1.0 / 3.0],
            vec![2e-9, 12345.6789012345],
        ])
        .unwrap();
        let mut buffer = Vec::new();
        write_utility_csv(&mut buffer, &w).unwrap();
        let back = parse_utility_csv(buffer.as_slice()).unwrap();
        for (a, b) in w.values().iter().zip(back.values()) {
            assert!(((a - b) / a).abs() < 1e-11, "{a} vs {b}");
        }
        let mut again = Vec::new();
        write_utility_csv(&mut again, &back).unwrap();
        assert_eq!(buffer, again);
    }
}
