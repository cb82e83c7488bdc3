//! Plain-text matrix format.
//!
//! ```text
//! # optional comment lines
//! 3
//! 1 2 3
//! 2 5 6
//! 3 6 9
//! ```
//!
//! Blank lines are ignored. Complex entries are written `a+bi` / `a-bi`
//! without spaces; `bi`, `i` and `-i` are accepted as purely imaginary.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use super::{ComplexMatrix, RealMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing dimension line")]
    MissingHeader,
    #[error("expected {expected} matrix rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("invalid number `{0}`")]
    InvalidNumber(String),
}

fn malformed(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_finite(token: &str) -> Option<f64> {
    // Rust's float parser also accepts `inf`/`nan`; only digits are allowed here.
    if token
        .bytes()
        .any(|b| !(b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-')))
    {
        return None;
    }
    token.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Parses a single complex entry such as `1.5`, `-2e-3+4i`, `3-i` or `-i`.
pub fn parse_complex(token: &str) -> Option<Complex64> {
    let Some(body) = token.strip_suffix('i') else {
        return parse_finite(token).map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_finite(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => parse_finite(s)?,
    };
    Some(Complex64::new(re, im))
}

fn parse_grid<T>(
    text: &str,
    parse_entry: impl Fn(&str) -> Option<T>,
) -> Result<(usize, Vec<T>), FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (header_line, header) = lines.next().ok_or(FormatError::MissingHeader)?;
    let n: usize = header
        .parse()
        .map_err(|_| malformed(header_line, format!("expected dimension, found `{header}`")))?;
    if n == 0 {
        return Err(malformed(header_line, "dimension must be positive"));
    }
    let mut entries = Vec::new();
    let mut rows = 0;
    for (line_no, line) in lines {
        if rows == n {
            return Err(FormatError::RowCount {
                expected: n,
                found: n + 1,
            });
        }
        let before = entries.len();
        for token in line.split_whitespace() {
            let value = parse_entry(token).ok_or_else(|| {
                malformed(line_no, format!("invalid number `{token}`"))
            })?;
            entries.push(value);
        }
        let found = entries.len() - before;
        if found != n {
            return Err(malformed(
                line_no,
                format!("expected {n} entries, found {found}"),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(FormatError::RowCount {
            expected: n,
            found: rows,
        });
    }
    Ok((n, entries))
}

pub fn parse_real_matrix(text: &str) -> Result<RealMatrix, FormatError> {
    let (n, entries) = parse_grid(text, parse_finite)?;
    Ok(RealMatrix::from_row_major(n, entries).expect("grid is square and finite"))
}

pub fn parse_complex_matrix(text: &str) -> Result<ComplexMatrix, FormatError> {
    let (n, entries) = parse_grid(text, parse_complex)?;
    Ok(ComplexMatrix::from_row_major(n, entries).expect("grid is square and finite"))
}

/// Writes `a` with full round-trip precision.
pub fn write_real_matrix(a: &RealMatrix) -> String {
    let mut out = format!("{}\n", a.dim());
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_complex(z: Complex64) -> String {
    let mut s = format!("{:e}", z.re);
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    let _ = write!(s, "{sign}{:e}i", z.im.abs());
    s
}

pub fn write_complex_matrix(a: &ComplexMatrix) -> String {
    let mut out = format!("{}\n", a.dim());
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|&z| format_complex(z)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a comma-separated list of numbers with no spaces, e.g. `0.2,0.05,0.1`.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, FormatError> {
    if text.is_empty() {
        return Err(FormatError::InvalidNumber(String::new()));
    }
    text.split(',')
        .map(|tok| parse_finite(tok).ok_or_else(|| FormatError::InvalidNumber(tok.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_scientific_notation() {
        let text = "# worked Hessian\n\n3\n1 2e0 -3\n2 5 6.5E-1\n-3 0.65 9\n";
        let a = parse_real_matrix(text).unwrap();
        assert_eq!(a.dim(), 3);
        assert_eq!(a.get(1, 2), 0.65);
        assert_eq!(a.get(2, 0), -3.0);
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            parse_real_matrix("2\n1 2 3\n4 5 6\n"),
            Err(FormatError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            parse_real_matrix("2\n1 2\n"),
            Err(FormatError::RowCount { expected: 2, found: 1 })
        ));
        assert!(matches!(
            parse_real_matrix("1\n1\n2\n"),
            Err(FormatError::RowCount { .. })
        ));
    }

    #[test]
    fn rejects_bad_headers_and_entries() {
        assert_eq!(parse_real_matrix("# only\n").unwrap_err(), FormatError::MissingHeader);
        assert!(parse_real_matrix("0\n").is_err());
        assert!(parse_real_matrix("-1\n").is_err());
        assert!(parse_real_matrix("1\ninf\n").is_err());
        assert!(parse_real_matrix("1\nNaN\n").is_err());
        assert!(parse_real_matrix("1\n1e999\n").is_err());
        assert!(parse_real_matrix("1\n0x10\n").is_err());
    }

    #[test]
    fn complex_tokens() {
        let c = Complex64::new;
        assert_eq!(parse_complex("1.5"), Some(c(1.5, 0.0)));
        assert_eq!(parse_complex("2-3i"), Some(c(2.0, -3.0)));
        assert_eq!(parse_complex("-2e-3+4i"), Some(c(-2e-3, 4.0)));
        assert_eq!(parse_complex("1e+2-1e-1i"), Some(c(100.0, -0.1)));
        assert_eq!(parse_complex("i"), Some(c(0.0, 1.0)));
        assert_eq!(parse_complex("-i"), Some(c(0.0, -1.0)));
        assert_eq!(parse_complex("3+i"), Some(c(3.0, 1.0)));
        assert_eq!(parse_complex("-4.5i"), Some(c(0.0, -4.5)));
        assert_eq!(parse_complex("1+2j"), None);
        assert_eq!(parse_complex("1 + 2i"), None);
        assert_eq!(parse_complex("ii"), None);
    }

    #[test]
    fn complex_matrix_file() {
        let a = parse_complex_matrix("2\n0 -i\ni 0\n").unwrap();
        assert_eq!(a.get(0, 1), Complex64::new(0.0, -1.0));
        assert_eq!(a.get(1, 0), Complex64::new(0.0, 1.0));
    }

    #[test]
    fn vectors() {
        assert_eq!(parse_vector("0.2,0.05,0.1").unwrap(), vec![0.2, 0.05, 0.1]);
        assert_eq!(parse_vector("-1,2e-3").unwrap(), vec![-1.0, 2e-3]);
        assert!(parse_vector("").is_err());
        assert!(parse_vector("1, 2").is_err());
        assert!(parse_vector("1,,2").is_err());
    }

    proptest! {
        #[test]
        fn real_matrix_text_round_trips(
            n in 1usize..6,
            seed in proptest::collection::vec(-1e6f64..1e6, 36),
        ) {
            let a = RealMatrix::from_fn(n, |i, j| seed[i * 6 + j]);
            prop_assert_eq!(parse_real_matrix(&write_real_matrix(&a)).unwrap(), a);
        }

        #[test]
        fn complex_matrix_text_round_trips(
            n in 1usize..5,
            re in proptest::collection::vec(-1e3f64..1e3, 16),
            im in proptest::collection::vec(-1e3f64..1e3, 16),
        ) {
            let a = ComplexMatrix::from_fn(n, |i, j| Complex64::new(re[i * 4 + j], im[i * 4 + j]));
            prop_assert_eq!(parse_complex_matrix(&write_complex_matrix(&a)).unwrap(), a);
        }
    }
}
