//! Dense matrix files: Matrix Market `array real general` and plain CSV.
//!
//! Values are written with 17 significant digits so a save/load round trip
//! reproduces every `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;

const MM_BANNER: &str = "%%MatrixMarket matrix array real general";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    MatrixMarket,
    Csv,
}

impl MatrixFormat {
    /// Guesses the format from a file extension (`.mtx`/`.mm` or `.csv`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "mtx" | "mm" => Some(MatrixFormat::MatrixMarket),
            "csv" => Some(MatrixFormat::Csv),
            _ => None,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mm" | "mtx" | "matrix-market" => Ok(MatrixFormat::MatrixMarket),
            "csv" => Ok(MatrixFormat::Csv),
            other => invalid(format!("unknown matrix format {other:?}")),
        }
    }
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        msg: msg.into(),
    })
}

fn number(tok: &str, line: usize) -> Result<f64> {
    match tok.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => parse_err(line, format!("not a finite number: {:?}", tok.trim())),
    }
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_csv(text: &str) -> Result<Matrix> {
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for tok in raw.split(',') {
            data.push(number(tok, line)?);
        }
        let width = data.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return parse_err(line, format!("expected {c} fields, found {width}"));
            }
            _ => {}
        }
        rows += 1;
    }
    match cols {
        Some(c) => Matrix::from_vec(rows, c, data),
        None => parse_err(1, "no data rows"),
    }
}

pub fn format_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt17(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_matrix_market(text: &str) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, banner)) => {
            let words: Vec<String> = banner
                .split_whitespace()
                .map(str::to_ascii_lowercase)
                .collect();
            if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
                return parse_err(1, "missing %%MatrixMarket matrix banner");
            }
            if words[2..] != ["array", "real", "general"] {
                return parse_err(
                    1,
                    format!(
                        "unsupported layout {}, need array real general",
                        words[2..].join(" ")
                    ),
                );
            }
        }
        None => return parse_err(1, "empty file"),
    }
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = match body.next() {
        Some(x) => x,
        None => return parse_err(1, "missing size line"),
    };
    let dims: Vec<&str> = size.split_whitespace().collect();
    let (rows, cols) = match dims[..] {
        [r, c] => match (r.parse::<usize>(), c.parse::<usize>()) {
            (Ok(r), Ok(c)) if r > 0 && c > 0 => (r, c),
            _ => return parse_err(size_line, format!("bad dimensions {size:?}")),
        },
        _ => {
            return parse_err(
                size_line,
                format!("size line needs 2 integers, got {size:?}"),
            )
        }
    };
    let expected = rows * cols;
    let mut col_major = Vec::with_capacity(expected);
    let mut last_line = size_line;
    for (line, l) in body {
        for tok in l.split_whitespace() {
            if col_major.len() == expected {
                return parse_err(
                    line,
                    format!("more than the {expected} entries declared on line {size_line}"),
                );
            }
            col_major.push(number(tok, line)?);
        }
        last_line = line;
    }
    if col_major.len() != expected {
        return parse_err(
            last_line,
            format!(
                "found {} entries, header on line {size_line} declares {expected}",
                col_major.len()
            ),
        );
    }
    let mut data = vec![0.0; expected];
    for (k, v) in col_major.into_iter().enumerate() {
        data[(k % rows) * cols + k / rows] = v;
    }
    Matrix::from_vec(rows, cols, data)
}

pub fn format_matrix_market(m: &Matrix) -> String {
    let mut out = format!("{MM_BANNER}\n{} {}\n", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let _ = writeln!(out, "{}", fmt17(m[(i, j)]));
        }
    }
    out
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<Matrix> {
    let text = std::fs::read_to_string(path)?;
    match format {
        MatrixFormat::MatrixMarket => parse_matrix_market(&text),
        MatrixFormat::Csv => parse_csv(&text),
    }
}

pub fn save_matrix(m: &Matrix, path: &Path, format: MatrixFormat) -> Result<()> {
    let text = match format {
        MatrixFormat::MatrixMarket => format_matrix_market(m),
        MatrixFormat::Csv => format_csv(m),
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::gen_synthetic;

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn csv_identity() {
        assert_eq!(parse_csv("1,0\n0,1").unwrap(), Matrix::identity(2));
    }

    #[test]
    fn csv_errors_name_line() {
        assert_eq!(line_of(parse_csv("1,2\n3,x\n").unwrap_err()), 2);
        assert_eq!(line_of(parse_csv("1,2\n3,4\n5\n").unwrap_err()), 3);
        assert!(parse_csv("\n").is_err());
    }

    #[test]
    fn mm_column_major() {
        let m = parse_matrix_market(
            "%%MatrixMarket matrix array real general\n% c\n2 3\n1\n4\n2\n5\n3\n6\n",
        )
        .unwrap();
        assert_eq!(
            m,
            Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap()
        );
    }

    #[test]
    fn mm_wrong_entry_count() {
        let short = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n";
        assert_eq!(line_of(parse_matrix_market(short).unwrap_err()), 5);
        let long = "%%MatrixMarket matrix array real general\n1 2\n1\n2\n3\n";
        assert_eq!(line_of(parse_matrix_market(long).unwrap_err()), 5);
    }

    #[test]
    fn mm_header_errors() {
        assert_eq!(
            line_of(parse_matrix_market("hello\n1 1\n1\n").unwrap_err()),
            1
        );
        let coo = "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n";
        assert_eq!(line_of(parse_matrix_market(coo).unwrap_err()), 1);
        let dims = "%%MatrixMarket matrix array real general\n2 two\n";
        assert_eq!(line_of(parse_matrix_market(dims).unwrap_err()), 2);
        let tok = "%%MatrixMarket matrix array real general\n1 2\n1\nnan\n";
        assert_eq!(line_of(parse_matrix_market(tok).unwrap_err()), 4);
    }

    #[test]
    fn round_trips_are_exact() {
        let m = gen_synthetic(5, 4, 4, 0.7, 21).unwrap();
        let via_mm = parse_matrix_market(&format_matrix_market(&m)).unwrap();
        let via_csv = parse_csv(&format_csv(&m)).unwrap();
        assert!(via_mm.sub(&m).max_abs() < 1e-15);
        assert_eq!(via_mm, m);
        assert_eq!(via_csv, m);
    }

    #[test]
    fn files_round_trip() {
        let dir = std::env::temp_dir().join(format!("pca-costlab-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let m = gen_synthetic(6, 3, 2, 0.1, 3).unwrap();
        for (name, fmt) in [
            ("m.mtx", MatrixFormat::MatrixMarket),
            ("m.csv", MatrixFormat::Csv),
        ] {
            let path = dir.join(name);
            save_matrix(&m, &path, fmt).unwrap();
            assert_eq!(MatrixFormat::from_path(&path), Some(fmt));
            assert_eq!(load_matrix(&path, fmt).unwrap(), m);
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
