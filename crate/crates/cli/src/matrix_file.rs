//! Plain-text complex matrix files.
//!
//! ```text
//! # optional comment lines
//! 2
//! 1,0 0,0
//! 0,0 1,0
//! ```
//!
//! The first non-comment line is the dimension d, followed by d rows of d
//! whitespace-separated `re,im` entries.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use snapvar_core::{Complex, ComplexMatrix};

#[derive(Debug, thiserror::Error)]
pub enum MatrixFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Shape(String),
}

fn parse_entry(tok: &str, line: usize) -> Result<Complex, MatrixFileError> {
    let err = |msg: String| MatrixFileError::Parse { line, msg };
    let (re, im) = tok
        .split_once(',')
        .ok_or_else(|| err(format!("entry '{tok}' is not of the form re,im")))?;
    let re: f64 = re.parse().map_err(|_| err(format!("bad real part '{re}'")))?;
    let im: f64 = im.parse().map_err(|_| err(format!("bad imaginary part '{im}'")))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(err(format!("non-finite entry '{tok}'")));
    }
    Ok(Complex::new(re, im))
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix, MatrixFileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines
        .next()
        .ok_or_else(|| MatrixFileError::Shape("empty matrix file".into()))?;
    let d: usize = header.parse().map_err(|_| MatrixFileError::Parse {
        line,
        msg: format!("expected the dimension, found '{header}'"),
    })?;
    if d == 0 {
        return Err(MatrixFileError::Parse {
            line,
            msg: "dimension must be positive".into(),
        });
    }

    let mut data = Vec::with_capacity(d * d);
    let mut rows = 0;
    for (line, text) in lines {
        if rows == d {
            return Err(MatrixFileError::Parse {
                line,
                msg: format!("unexpected extra row; header declares d={d}"),
            });
        }
        let entries: Vec<&str> = text.split_whitespace().collect();
        if entries.len() != d {
            return Err(MatrixFileError::Parse {
                line,
                msg: format!("expected {d} entries, found {}", entries.len()),
            });
        }
        for tok in entries {
            data.push(parse_entry(tok, line)?);
        }
        rows += 1;
    }
    if rows < d {
        return Err(MatrixFileError::Shape(format!(
            "header declares d={d} but only {rows} rows follow ({} missing)",
            d - rows
        )));
    }
    ComplexMatrix::from_row_major(d, data).map_err(|e| MatrixFileError::Shape(e.to_string()))
}

pub fn read_matrix_file(path: &Path) -> Result<ComplexMatrix, MatrixFileError> {
    let text = fs::read_to_string(path).map_err(|source| MatrixFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix(&text)
}

/// 17 significant digits, enough to round-trip every f64.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let d = m.dim();
    let mut out = format!("{d}\n");
    for r in 0..d {
        let row: Vec<String> = m.row(r).iter().map(|z| format!("{:.16e},{:.16e}", z.re, z.im)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn write_matrix_file(path: &Path, m: &ComplexMatrix) -> std::io::Result<()> {
    fs::write(path, format_matrix(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_identity_with_comments() {
        let m = parse_matrix("# identity\n2\n\n1,0 0,0\n# middle\n0,0   1,0\n").unwrap();
        assert_eq!(m, ComplexMatrix::identity(2));
    }

    #[test]
    fn missing_rows_are_named() {
        let err = parse_matrix("3\n1,0 0,0 0,0\n0,0 1,0 0,0\n").unwrap_err();
        assert!(err.to_string().contains("only 2 rows"), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_matrix("2\n1,0 0,0\n0,0 oops\n").unwrap_err();
        assert!(matches!(err, MatrixFileError::Parse { line: 3, .. }), "{err}");
        let err = parse_matrix("# c\nx\n").unwrap_err();
        assert!(matches!(err, MatrixFileError::Parse { line: 2, .. }));
        let err = parse_matrix("1\n1,0\n2,0\n").unwrap_err();
        assert!(matches!(err, MatrixFileError::Parse { line: 3, .. }));
        let err = parse_matrix("2\n1,0\n").unwrap_err();
        assert!(matches!(err, MatrixFileError::Parse { line: 2, .. }));
        assert!(parse_matrix("1\nNaN,0\n").is_err());
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("0\n").is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let m = ComplexMatrix::from_fn(3, |r, c| {
            Complex::new((r as f64 + 0.1).sqrt() / 7.0, -(c as f64 + 1.0).ln() * 1e-300)
        });
        let back = parse_matrix(&format_matrix(&m)).unwrap();
        for (a, b) in m.as_slice().iter().zip(back.as_slice()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}
