//! Text file formats.
//!
//! * codebook: header `N K`, then `K` lines of `N` phases in radians
//! * training set: header `N L`, then `L` lines of `2N` reals (re, im interleaved)
//! * CDF: `value,prob` CSV
//! * objective history: `iter,objective` CSV

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::array::{Codebook, Codeword};
use crate::error::{Error, Result};

/// 17 significant digits: every f64 survives a write/read cycle bit for bit.
fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// 12 significant digits for report tables.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_header(
    path: &Path,
    lines: &mut impl Iterator<Item = (usize, impl AsRef<str>)>,
) -> Result<(usize, usize)> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing header"))?;
    let nums: Vec<usize> = line
        .as_ref()
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(path, no, format!("bad header: {e}")))?;
    match nums[..] {
        [a, b] if a > 0 && b > 0 => Ok((a, b)),
        _ => Err(parse_err(path, no, "header must be two positive integers")),
    }
}

fn parse_reals(path: &Path, no: usize, line: &str, expect: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(path, no, format!("bad number: {e}")))?;
    if vals.len() != expect {
        return Err(parse_err(
            path,
            no,
            format!("expected {expect} values, found {}", vals.len()),
        ));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(parse_err(path, no, "non-finite value"));
    }
    Ok(vals)
}

pub fn codebook_to_string(cb: &Codebook) -> String {
    let mut s = format!("{} {}\n", cb.dim(), cb.len());
    for w in cb.codewords() {
        let row: Vec<String> = w.phases().iter().map(|&p| full(p)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn write_codebook(cb: &Codebook, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &codebook_to_string(cb))
}

pub fn parse_codebook(text: &str, path: &Path) -> Result<Codebook> {
    let mut lines = content_lines(text);
    let (n, k) = parse_header(path, &mut lines)?;
    let mut cws = Vec::with_capacity(k);
    for _ in 0..k {
        let (no, line) = lines.next().ok_or_else(|| {
            parse_err(
                path,
                0,
                format!("expected {k} codewords, found {}", cws.len()),
            )
        })?;
        cws.push(Codeword::from_phases(parse_reals(path, no, line, n)?)?);
    }
    if let Some((no, _)) = lines.next() {
        return Err(parse_err(path, no, "trailing data after last codeword"));
    }
    Codebook::new(cws)
}

pub fn read_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    let path = path.as_ref();
    parse_codebook(&read_file(path)?, path)
}

pub fn write_training_set(samples: &[Vec<Complex64>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let n = samples.first().map_or(0, Vec::len);
    if samples.is_empty() || n == 0 || samples.iter().any(|h| h.len() != n) {
        return Err(Error::domain(
            "training set must be nonempty with equal-length vectors",
        ));
    }
    let mut s = format!("{n} {}\n", samples.len());
    for h in samples {
        let row: Vec<String> = h.iter().flat_map(|z| [full(z.re), full(z.im)]).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    write_file(path, &s)
}

pub fn read_training_set(path: impl AsRef<Path>) -> Result<Vec<Vec<Complex64>>> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut lines = content_lines(&text);
    let (n, l) = parse_header(path, &mut lines)?;
    let mut out = Vec::with_capacity(l);
    for _ in 0..l {
        let (no, line) = lines.next().ok_or_else(|| {
            parse_err(
                path,
                0,
                format!("expected {l} vectors, found {}", out.len()),
            )
        })?;
        let vals = parse_reals(path, no, line, 2 * n)?;
        out.push(vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect());
    }
    if let Some((no, _)) = lines.next() {
        return Err(parse_err(path, no, "trailing data after last vector"));
    }
    Ok(out)
}

pub fn cdf_to_csv(cdf: &[(f64, f64)]) -> String {
    let mut s = String::from("value,prob\n");
    for &(v, p) in cdf {
        let _ = writeln!(s, "{},{}", sig12(v), sig12(p));
    }
    s
}

pub fn read_cdf_csv(path: impl AsRef<Path>) -> Result<Vec<(f64, f64)>> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut lines = content_lines(&text);
    match lines.next() {
        Some((_, "value,prob")) => {}
        _ => return Err(parse_err(path, 1, "expected header `value,prob`")),
    }
    lines
        .map(|(no, line)| {
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| parse_err(path, no, "expected two columns"))?;
            let v = a.parse().map_err(|e| parse_err(path, no, format!("{e}")))?;
            let p = b.parse().map_err(|e| parse_err(path, no, format!("{e}")))?;
            Ok((v, p))
        })
        .collect()
}

pub fn objective_to_csv(history: &[f64]) -> String {
    let mut s = String::from("iter,objective\n");
    for (i, v) in history.iter().enumerate() {
        let _ = writeln!(s, "{i},{}", sig12(*v));
    }
    s
}

pub fn write_text(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    write_file(path.as_ref(), contents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_training_set, seeded_rng, ChannelParams};
    use crate::lloyd::init_codebook;
    use crate::ArrayGeometry;

    #[test]
    fn codebook_round_trip_is_bit_exact() {
        let cb = init_codebook(7, 3, &mut seeded_rng(1)).unwrap();
        let text = codebook_to_string(&cb);
        assert!(text.starts_with("7 3\n"));
        let back = parse_codebook(&text, Path::new("mem")).unwrap();
        assert_eq!(back, cb);
    }

    #[test]
    fn codebook_parse_errors() {
        let p = Path::new("cb.txt");
        assert!(matches!(parse_codebook("", p), Err(Error::Parse { .. })));
        assert!(parse_codebook("2 1\n0.0\n", p).is_err());
        assert!(parse_codebook("2 2\n0.0 1.0\n", p).is_err());
        assert!(parse_codebook("2 1\n0.0 x\n", p).is_err());
        assert!(parse_codebook("2 1\n0 1\n3 4\n", p).is_err());
        assert!(parse_codebook("0 1\n", p).is_err());
        assert!(parse_codebook("2 1\n0 1\n\n", p).is_ok());
    }

    #[test]
    fn training_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.txt");
        let train = generate_training_set(
            &ChannelParams::nlos(),
            &ArrayGeometry::upa(2, 2),
            5,
            &mut seeded_rng(2),
        );
        write_training_set(&train, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("4 5\n"));
        assert_eq!(text.lines().nth(1).unwrap().split_whitespace().count(), 8);
        assert_eq!(read_training_set(&path).unwrap(), train);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_codebook("/nonexistent/cb.txt").unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("/nonexistent/cb.txt"));
    }

    #[test]
    fn objective_csv_format() {
        let s = objective_to_csv(&[1.0, 2.5]);
        assert_eq!(s, "iter,objective\n0,1.00000000000e0\n1,2.50000000000e0\n");
    }
}
