//! Matrix and stream files.
//!
//! A matrix file starts with `# rows=<n> cols=<d>` followed by one
//! comma-separated row per line. Stream files use the same row lines; the
//! header is optional there.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let body = line.trim().strip_prefix('#')?;
    let mut rows = None;
    let mut cols = None;
    for tok in body.split_whitespace() {
        if let Some(v) = tok.strip_prefix("rows=") {
            rows = v.parse().ok();
        } else if let Some(v) = tok.strip_prefix("cols=") {
            cols = v.parse().ok();
        }
    }
    Some((rows?, cols?))
}

fn parse_rows(text: &str) -> Result<(Option<(usize, usize)>, Vec<Vec<f64>>)> {
    let header = text.lines().find(|l| !l.trim().is_empty()).and_then(parse_header);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec =
            rec.map_err(|e| Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), msg: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| {
                let v: f64 = f.parse().map_err(|_| Error::Parse { line, msg: format!("bad number `{f}`") })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse { line, msg: "non-finite value".into() })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first().map(|r: &Vec<f64>| r.len()) {
            if first != row.len() {
                return Err(Error::Parse { line, msg: format!("expected {first} fields, got {}", row.len()) });
            }
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let (header, rows) = parse_rows(text)?;
    let (n, d) = header.ok_or(Error::Parse { line: 1, msg: "missing `# rows=<n> cols=<d>` header".into() })?;
    if rows.len() != n || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header says {n}x{d}, body is {}x{}", rows.len(), rows.first().map_or(0, Vec::len)),
        });
    }
    DenseMatrix::new(n, d, rows.concat())
}

pub fn parse_stream(text: &str) -> Result<DenseMatrix> {
    let (_, rows) = parse_rows(text)?;
    if rows.is_empty() {
        return Err(Error::InvalidInput("empty stream".into()));
    }
    DenseMatrix::from_rows(&rows)
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn read_stream(path: &Path) -> Result<DenseMatrix> {
    parse_stream(&fs::read_to_string(path)?)
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut s = format!("# rows={} cols={}\n", m.rows(), m.cols());
    for r in m.row_iter() {
        let line: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

pub fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(format_matrix(m).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let m = DenseMatrix::from_rows(&[vec![1.5, -2.0], vec![0.1, 3e-9]]).unwrap();
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn bad_inputs() {
        assert!(parse_matrix("1,2\n").is_err());
        assert!(parse_matrix("# rows=2 cols=2\n1,2\n3\n").is_err());
        assert!(parse_matrix("# rows=1 cols=2\n1,x\n").is_err());
        assert!(parse_matrix("# rows=1 cols=2\n1,NaN\n").is_err());
        assert_eq!(parse_stream("1,2\n3,4\n").unwrap().shape(), (2, 2));
    }
}
