use std::io::Read;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Reads a one-column CSV of values. A non-numeric first row is treated as a header.
pub fn load_values<S: Scalar, R: Read>(input: R) -> Result<Vec<S>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        if rec.len() != 1 {
            return Err(Error::Parse { line: i + 1, msg: format!("expected one column, got {}", rec.len()) });
        }
        match rec[0].parse::<f64>() {
            Ok(v) => {
                let v = S::of(v);
                if !v.in_unit() {
                    return Err(Error::OutOfRange { what: "value", value: v.as_f64() });
                }
                values.push(v);
            }
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Parse { line: i + 1, msg: e.to_string() }),
        }
    }
    Ok(values)
}

pub fn load_values_file<S: Scalar>(path: &std::path::Path) -> Result<Vec<S>> {
    load_values(std::fs::File::open(path)?)
}
