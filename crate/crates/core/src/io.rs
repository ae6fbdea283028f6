//! Plain-text tables: comma-separated, one header line, numbers in C's
//! `%.17g` format so that every `f64` round-trips exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats `x` exactly like C's `printf("%.17g", x)`.
pub fn fmt_g17(x: f64) -> String {
    const P: i32 = 17;
    if x.is_nan() {
        return if x.is_sign_negative() { "-nan" } else { "nan" }.to_string();
    }
    if x.is_infinite() {
        return if x < 0.0 { "-inf" } else { "inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A header and rows of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[i])
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", fmt_g17(*v));
            }
            out.push('\n');
        }
        out
    }

    /// Parses CSV text; when `expect` is given the header must match it.
    pub fn parse(text: &str, expect: Option<&[&str]>) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Table {
            line: 1,
            msg: "missing header".into(),
        })?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        if let Some(cols) = expect {
            if columns.iter().map(String::as_str).ne(cols.iter().copied()) {
                return Err(Error::Table {
                    line: hline,
                    msg: format!("expected header `{}`, found `{header}`", cols.join(",")),
                });
            }
        }
        let mut table = Table {
            columns,
            rows: Vec::new(),
        };
        for (line, l) in lines {
            let row: Vec<f64> = l
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|e| Error::Table {
                        line,
                        msg: format!("bad number `{}`: {e}", v.trim()),
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != table.columns.len() {
                return Err(Error::Table {
                    line,
                    msg: format!(
                        "expected {} fields, found {}",
                        table.columns.len(),
                        row.len()
                    ),
                });
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn read(path: &Path, expect: Option<&[&str]>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text, expect)
    }
}

/// Reads a two-column table whose first column is strictly ascending.
pub fn read_two_column(text: &str, header: [&str; 2]) -> Result<(Vec<f64>, Vec<f64>)> {
    let table = Table::parse(text, Some(&header))?;
    let x: Vec<f64> = table.column(0).collect();
    let y: Vec<f64> = table.column(1).collect();
    if let Some(i) = x.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::Table {
            line: i + 3,
            msg: format!("`{}` column must be strictly ascending", header[0]),
        });
    }
    Ok((x, y))
}

pub fn write_two_column(header: [&str; 2], x: &[f64], y: &[f64]) -> String {
    let mut t = Table::new(&header);
    for (a, b) in x.iter().zip(y) {
        t.push(vec![*a, *b]);
    }
    t.to_csv()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_c_printf() {
        // reference strings from printf("%.17g")
        let cases = [
            (0.1, "0.10000000000000001"),
            (-0.5, "-0.5"),
            (1.0, "1"),
            (1e-5, "1.0000000000000001e-05"),
            (1e20, "1e+20"),
            (123456789012345678.0, "1.2345678901234568e+17"),
            (12345678901234567.0, "12345678901234568"),
            (0.0001, "0.0001"),
            (-0.17677669529663687, "-0.17677669529663687"),
            (2.5e-300, "2.5e-300"),
        ];
        for (x, s) in cases {
            assert_eq!(fmt_g17(x), s, "{x:e}");
        }
    }

    #[test]
    fn rejects_unsorted_and_bad_header() {
        assert!(read_two_column("u,gamma\n0,1\n0,2\n", ["u", "gamma"]).is_err());
        assert!(read_two_column("omega,f2\n0,1\n", ["u", "gamma"]).is_err());
        let err = read_two_column("u,gamma\n0,1\n1,x\n", ["u", "gamma"]).unwrap_err();
        assert_eq!(
            err,
            Error::Table {
                line: 3,
                msg: "bad number `x`: invalid float literal".into()
            }
        );
    }

    proptest! {
        #[test]
        fn g17_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let back: f64 = fmt_g17(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
