//! Dense row-major matrices and the plain-text matrix file format.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

/// Dense `rows x cols` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_dims(rows, cols)?;
        Ok(Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        check_dims(rows, cols)?;
        if data.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDimension("ragged rows".into()));
        }
        Self::from_vec(m, n, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        check_dims(rows, cols)?;
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn field(&self) -> Field {
        T::FIELD
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn check_row(&self, i: usize) -> Result<()> {
        if i < self.rows {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                axis: "rows",
                index: i,
                len: self.rows,
            })
        }
    }

    pub fn check_col(&self, j: usize) -> Result<()> {
        if j < self.cols {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                axis: "columns",
                index: j,
                len: self.cols,
            })
        }
    }

    /// Row index of the largest-modulus entry of column `j`; smallest index on ties.
    pub fn column_argmax(&self, j: usize) -> usize {
        let mut best = 0;
        let mut best_abs = self.get(0, j).modulus();
        for i in 1..self.rows {
            let a = self.get(i, j).modulus();
            if a > best_abs {
                best = i;
                best_abs = a;
            }
        }
        best
    }

    /// Column index of the largest-modulus entry of row `i`; smallest index on ties.
    pub fn row_argmax(&self, i: usize) -> usize {
        let row = self.row(i);
        let mut best = 0;
        let mut best_abs = row[0].modulus();
        for (j, x) in row.iter().enumerate().skip(1) {
            let a = x.modulus();
            if a > best_abs {
                best = j;
                best_abs = a;
            }
        }
        best
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Elementwise `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).conj());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::InvalidDimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols)?;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                for (o, &b) in out_row.iter_mut().zip(other.row(l)) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::InvalidDimension(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidDimension(format!(
            "matrix must be at least 1x1, got {rows}x{cols}"
        )));
    }
    Ok(())
}

/// Chebyshev norm: the largest entry modulus.
pub fn cnorm<T: Scalar>(m: &DenseMatrix<T>) -> f64 {
    max_modulus(m.as_slice())
}

/// Largest modulus of a vector (`||v||_inf`).
pub fn max_modulus<T: Scalar>(v: &[T]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.modulus()))
}

/// Euclidean norm of a vector.
pub fn norm2<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// A matrix whose field is only known at run time (e.g. read from a file).
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Real(DenseMatrix<f64>),
    Complex(DenseMatrix<Complex64>),
}

impl AnyMatrix {
    pub fn field(&self) -> Field {
        match self {
            AnyMatrix::Real(_) => Field::Real,
            AnyMatrix::Complex(_) => Field::Complex,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        match self {
            AnyMatrix::Real(a) => (a.rows(), a.cols()),
            AnyMatrix::Complex(a) => (a.rows(), a.cols()),
        }
    }
}

impl From<DenseMatrix<f64>> for AnyMatrix {
    fn from(m: DenseMatrix<f64>) -> Self {
        AnyMatrix::Real(m)
    }
}

impl From<DenseMatrix<Complex64>> for AnyMatrix {
    fn from(m: DenseMatrix<Complex64>) -> Self {
        AnyMatrix::Complex(m)
    }
}

/// Writes a matrix in the text format: a `m n field` header line, then one
/// line of `n` whitespace-separated tokens per row.
pub fn write_matrix<T: Scalar, W: Write>(m: &DenseMatrix<T>, mut out: W) -> Result<()> {
    let mut buf = format!("{} {} {}\n", m.rows(), m.cols(), m.field());
    for i in 0..m.rows() {
        for (j, x) in m.row(i).iter().enumerate() {
            if j > 0 {
                buf.push(' ');
            }
            buf.push_str(&x.format_token());
        }
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

pub fn write_any_matrix<W: Write>(m: &AnyMatrix, out: W) -> Result<()> {
    match m {
        AnyMatrix::Real(a) => write_matrix(a, out),
        AnyMatrix::Complex(a) => write_matrix(a, out),
    }
}

/// Reads the text matrix format. Line and column numbers in errors are 1-based.
pub fn read_matrix<R: BufRead>(input: R) -> Result<AnyMatrix> {
    let mut lines = input.lines().enumerate();
    let (rows, cols, field) = loop {
        let Some((idx, line)) = lines.next() else {
            return Err(parse_err(1, 1, "empty input: expected header `m n field`"));
        };
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        break parse_header(idx + 1, &line)?;
    };
    match field {
        Field::Real => read_body::<f64>(rows, cols, lines).map(AnyMatrix::Real),
        Field::Complex => read_body::<Complex64>(rows, cols, lines).map(AnyMatrix::Complex),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<(usize, usize, Field)> {
    let toks = tokens(line);
    if toks.len() != 3 {
        return Err(parse_err(
            line_no,
            1,
            format!("header must be `m n field`, found {} tokens", toks.len()),
        ));
    }
    let dim = |(col, tok): (usize, &str), what: &str| -> Result<usize> {
        match tok.parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(parse_err(
                line_no,
                col,
                format!("{what} must be a positive integer, got `{tok}`"),
            )),
        }
    };
    let rows = dim(toks[0], "m")?;
    let cols = dim(toks[1], "n")?;
    let field = toks[2]
        .1
        .parse::<Field>()
        .map_err(|e| parse_err(line_no, toks[2].0, e.to_string()))?;
    Ok((rows, cols, field))
}

fn read_body<T: Scalar>(
    rows: usize,
    cols: usize,
    lines: impl Iterator<Item = (usize, std::io::Result<String>)>,
) -> Result<DenseMatrix<T>> {
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    let mut last_line = 1;
    for (idx, line) in lines {
        let line = line?;
        last_line = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if seen_rows == rows {
            return Err(parse_err(idx + 1, 1, format!("more than {rows} rows")));
        }
        let toks = tokens(&line);
        if toks.len() != cols {
            return Err(parse_err(
                idx + 1,
                toks.get(cols).map_or(line.len() + 1, |t| t.0),
                format!("expected {cols} entries, found {}", toks.len()),
            ));
        }
        for (col, tok) in toks {
            let x = T::parse_token(tok).map_err(|msg| parse_err(idx + 1, col, msg))?;
            data.push(x);
        }
        seen_rows += 1;
    }
    if seen_rows != rows {
        return Err(parse_err(
            last_line + 1,
            1,
            format!("expected {rows} rows, found {seen_rows}"),
        ));
    }
    DenseMatrix::from_vec(rows, cols, data)
}

/// Whitespace-separated tokens with their 1-based starting column.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (pos, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(pos),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..pos]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

impl<T: Scalar> std::fmt::Display for DenseMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = String::new();
        for i in 0..self.rows {
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{}", x.format_token());
            }
            s.push('\n');
        }
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_dimensions() {
        assert!(matches!(
            DenseMatrix::<f64>::zeros(0, 3),
            Err(Error::InvalidDimension(_))
        ));
        assert!(DenseMatrix::<f64>::from_vec(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn cnorm_examples() {
        let z = DenseMatrix::<f64>::zeros(3, 4).unwrap();
        assert_eq!(cnorm(&z), 0.0);
        let m = DenseMatrix::from_rows(&[vec![1.0, -3.0], vec![2.0, 0.0]]).unwrap();
        assert_eq!(cnorm(&m), 3.0);
    }

    #[test]
    fn argmax_ties_prefer_smallest_index() {
        let m = DenseMatrix::from_rows(&[vec![2.0, -2.0], vec![-2.0, 1.0]]).unwrap();
        assert_eq!(m.column_argmax(0), 0);
        assert_eq!(m.row_argmax(0), 0);
        assert_eq!(m.row_argmax(1), 0);
    }

    #[test]
    fn matmul_and_adjoint() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = a.matmul(&a.adjoint()).unwrap();
        assert_eq!(b.as_slice(), &[5.0, 11.0, 11.0, 25.0]);
    }

    #[test]
    fn parse_reports_line_and_column() {
        let text = "2 2 real\n1 2\n3 x\n";
        match read_matrix(text.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("unexpected {other:?}"),
        }
        let short = "2 2 real\n1 2\n";
        assert!(matches!(
            read_matrix(short.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let bad_header = "2 real\n";
        assert!(matches!(
            read_matrix(bad_header.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn complex_file_round_trip() {
        let m = DenseMatrix::from_rows(&[
            vec![Complex64::new(1.0, -0.5), Complex64::new(0.0, 2.0)],
            vec![Complex64::new(-1.0 / 3.0, 1e-300), Complex64::new(7.0, 0.0)],
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        assert_eq!(read_matrix(buf.as_slice()).unwrap(), AnyMatrix::Complex(m));
    }
}
