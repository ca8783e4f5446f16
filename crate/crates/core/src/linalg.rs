//! Exact rational linear algebra.
//!
//! Every scalar is an arbitrary-precision [`Rational`] kept in lowest terms,
//! so equality is structural and no operation can overflow. Matrices store
//! the images of the standard basis as columns: for a map `L: R^k -> R^m`
//! the matrix is `m x k` and column `i` is `L e_i`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, ParseError, Result};

pub type Rational = BigRational;
pub type RatVector = Vec<Rational>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p`, `-p` or `p/q`. The denominator must be nonzero.
pub fn parse_rational(token: &str) -> std::result::Result<Rational, String> {
    let parse_int =
        |s: &str| BigInt::from_str(s).map_err(|_| format!("`{token}` is not a rational number"));
    match token.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(token)?)),
        Some((n, d)) => {
            let n = parse_int(n)?;
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(format!("`{token}` has a zero denominator"));
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// `p` for integers, `p/q` otherwise.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod rational_string {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use super::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.serialize_some(&format_rational(r)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| parse_rational(&t).map_err(D::Error::custom))
                .transpose()
        }
    }

    pub mod vec {
        use serde::ser::SerializeSeq;

        use super::*;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&format_rational(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| parse_rational(t).map_err(D::Error::custom))
                .collect()
        }
    }
}

/// Serde adapter embedding a matrix as its text format.
pub mod matrix_text {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    use super::RatMatrix;

    pub fn serialize<S: Serializer>(m: &RatMatrix, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&m.to_text())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<RatMatrix, D::Error> {
        let text = String::deserialize(d)?;
        RatMatrix::parse(&text).map_err(D::Error::custom)
    }
}

/// Dense `rows x cols` matrix of rationals, row-major.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Rational>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_columns(columns: &[RatVector]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch("columns of unequal length".into()));
        }
        let mut data = Vec::with_capacity(rows * columns.len());
        for r in 0..rows {
            for c in columns {
                data.push(c[r].clone());
            }
        }
        Self::new(rows, columns.len(), data)
    }

    /// Convenience constructor from small integer entries, row-major.
    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        Self::new(rows, cols, entries.iter().map(|&x| rat(x)).collect())
            .expect("entry count must match dimensions")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rational) {
        self.data[r * self.cols + c] = value;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> RatVector {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn columns(&self) -> Vec<RatVector> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn row_vectors(&self) -> Vec<RatVector> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Indices of the nonzero coordinates of `L e_c`.
    pub fn column_support(&self, c: usize) -> Vec<usize> {
        (0..self.rows)
            .filter(|&r| !self.get(r, c).is_zero())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = Rational::zero();
                for i in 0..self.cols {
                    let a = self.get(r, i);
                    if !a.is_zero() {
                        acc += a * other.get(i, c);
                    }
                }
                out.set(r, c, acc);
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Rational]) -> Result<RatVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} applied to {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&rat(-1))
    }

    /// Squared Frobenius norm, an upper bound for the squared operator norm.
    pub fn frobenius_sq(&self) -> Rational {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Least common multiple of all entry denominators.
    pub fn denominator_lcm(&self) -> BigInt {
        self.data
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    /// The column permutation `perm[new] = old`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let cols: Vec<RatVector> = perm.iter().map(|&c| self.column(c)).collect();
        Self::from_columns(&cols).expect("permutation of a valid matrix")
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let rows: Vec<RatVector> = perm.iter().map(|&r| self.row(r).to_vec()).collect();
        Self::from_rows(&rows).expect("permutation of a valid matrix")
    }

    /// Matrix with the rows of `other` appended below.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(
                "stacking needs equal column counts".into(),
            ));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Self::new(self.rows + other.rows, self.cols, data)
    }

    /// Parses the shared text format: `m k` on the first line, then `m` lines
    /// of `k` rationals. `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let mut lines = content_lines(text);
        let (hline, header) = lines
            .next()
            .ok_or_else(|| ParseError::new(1, 1, "missing `m k` header"))?;
        if header.len() != 2 {
            let col = header.get(2).map_or(1, |t| t.0);
            return Err(ParseError::new(hline, col, "header must be exactly `m k`"));
        }
        let dim = |(col, tok): &(usize, &str)| -> std::result::Result<usize, ParseError> {
            match tok.parse::<usize>() {
                Ok(d) if d > 0 => Ok(d),
                _ => Err(ParseError::new(
                    hline,
                    *col,
                    format!("`{tok}` is not a positive dimension"),
                )),
            }
        };
        let rows = dim(&header[0])?;
        let cols = dim(&header[1])?;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (line, tokens) = lines.next().ok_or_else(|| {
                ParseError::new(hline + r + 1, 1, format!("expected {rows} rows, found {r}"))
            })?;
            data.extend(parse_row(line, &tokens, cols)?);
        }
        if let Some((line, tokens)) = lines.next() {
            return Err(ParseError::new(
                line,
                tokens[0].0,
                format!("unexpected content after {rows} rows"),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    /// Renders the text format accepted by [`RatMatrix::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(format_rational).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

type Tokens<'a> = Vec<(usize, &'a str)>;

/// Non-empty lines with comments stripped, as (1-based line, [(1-based column, token)]).
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Tokens<'_>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start = None;
        for (pos, ch) in body
            .char_indices()
            .chain(std::iter::once((body.len(), ' ')))
        {
            match (ch.is_whitespace(), start) {
                (false, None) => start = Some(pos),
                (true, Some(s)) => {
                    tokens.push((body[..s].chars().count() + 1, &body[s..pos]));
                    start = None;
                }
                _ => {}
            }
        }
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_row(
    line: usize,
    tokens: &[(usize, &str)],
    expected: usize,
) -> std::result::Result<Vec<Rational>, ParseError> {
    if tokens.len() != expected {
        let col = tokens.get(expected).map_or(1, |t| t.0);
        return Err(ParseError::new(
            line,
            col,
            format!("expected {expected} entries, found {}", tokens.len()),
        ));
    }
    tokens
        .iter()
        .map(|&(col, tok)| parse_rational(tok).map_err(|m| ParseError::new(line, col, m)))
        .collect()
}

/// Parses a vector file: one line of `dim` rationals (comments allowed).
pub fn parse_vector(text: &str, dim: usize) -> std::result::Result<RatVector, ParseError> {
    let mut lines = content_lines(text);
    let (line, tokens) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, 1, "missing vector line"))?;
    let v = parse_row(line, &tokens, dim)?;
    if let Some((line, tokens)) = lines.next() {
        return Err(ParseError::new(line, tokens[0].0, "expected a single line"));
    }
    Ok(v)
}

/// Rows of `m` scaled to a common integer denominator; rank and sign
/// structure are unchanged by the positive row scaling.
fn integer_rows(m: &RatMatrix) -> Vec<Vec<BigInt>> {
    (0..m.rows())
        .map(|r| {
            let row = m.row(r);
            let d = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&d / x.denom())).collect()
        })
        .collect()
}

/// Exact rank by fraction-free (Bareiss) elimination.
pub fn rank(m: &RatMatrix) -> usize {
    let mut a = integer_rows(m);
    let (rows, cols) = (m.rows(), m.cols());
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&a[r][c] * &a[i][j] - &a[i][c] * &a[r][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Exact determinant of a square matrix (Bareiss on cleared rows).
pub fn determinant(m: &RatMatrix) -> Result<Rational> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "determinant of a non-square matrix".into(),
        ));
    }
    let n = m.rows();
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|r| {
            let row = m.row(r);
            let d = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            scale *= &d;
            row.iter().map(|x| x.numer() * (&d / x.denom())).collect()
        })
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Ok(Rational::zero());
        };
        if p != c {
            a.swap(c, p);
            sign = -sign;
        }
        for i in c + 1..n {
            for j in c + 1..n {
                let v = (&a[c][c] * &a[i][j] - &a[i][c] * &a[c][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[c][c].clone();
    }
    Ok(Rational::new(sign * &a[n - 1][n - 1], scale))
}

/// Solves for the coefficients of `v` in the independent family `basis`.
/// Returns `None` when `v` lies outside the span.
pub fn coords_in_basis(basis: &[RatVector], v: &[Rational]) -> Result<Option<RatVector>> {
    let dim = v.len();
    if let Some(bad) = basis.iter().find(|b| b.len() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "basis vector of length {} against a vector of length {dim}",
            bad.len()
        )));
    }
    let r = basis.len();
    // augmented dim x (r + 1) system, Gauss-Jordan over Q
    let mut a: Vec<Vec<Rational>> = (0..dim)
        .map(|i| {
            let mut row: Vec<Rational> = basis.iter().map(|b| b[i].clone()).collect();
            row.push(v[i].clone());
            row
        })
        .collect();
    for c in 0..r {
        let Some(p) = (c..dim).find(|&i| !a[i][c].is_zero()) else {
            return Err(Error::Precondition(
                "basis vectors are linearly dependent".into(),
            ));
        };
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        let pivot = a[c].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != c && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
    }
    if a[r..].iter().any(|row| !row[r].is_zero()) {
        return Ok(None);
    }
    Ok(Some(a[..r].iter().map(|row| row[r].clone()).collect()))
}

/// Exact inverse, or `None` if singular.
pub fn inverse(m: &RatMatrix) -> Result<Option<RatMatrix>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "inverse of a non-square matrix".into(),
        ));
    }
    let n = m.rows();
    let mut a: Vec<Vec<Rational>> = (0..n)
        .map(|r| {
            let mut row = m.row(r).to_vec();
            row.extend((0..n).map(|c| {
                if c == r {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            row
        })
        .collect();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Ok(None);
        };
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        let pivot = a[c].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != c && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
    }
    let data = a
        .into_iter()
        .flat_map(|row| row.into_iter().skip(n))
        .collect();
    Ok(Some(RatMatrix::new(n, n, data)?))
}

/// `L^T L`.
pub fn gram(l: &RatMatrix) -> RatMatrix {
    l.transpose().mul(l).expect("L^T L is always defined")
}

pub fn is_isometry(l: &RatMatrix) -> bool {
    l.rows() >= l.cols() && gram(l) == RatMatrix::identity(l.cols())
}

/// Coefficients of `det(xI - A)`, highest degree first (so `c[0] = 1`),
/// by Berkowitz's division-free algorithm.
pub fn characteristic_polynomial(a: &RatMatrix) -> Result<Vec<Rational>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(
            "characteristic polynomial of a non-square matrix".into(),
        ));
    }
    let n = a.rows();
    let mut poly = vec![Rational::one()];
    for r in 0..n {
        // leading r x r block A_r, row R = a[r][..r], column C = a[..r][r]
        let row: Vec<Rational> = (0..r).map(|j| a.get(r, j).clone()).collect();
        let mut col: Vec<Rational> = (0..r).map(|i| a.get(i, r).clone()).collect();
        let mut toeplitz = Vec::with_capacity(r + 2);
        toeplitz.push(Rational::one());
        toeplitz.push(-a.get(r, r).clone());
        for _ in 0..r {
            let dot: Rational = row.iter().zip(&col).map(|(x, y)| x * y).sum();
            toeplitz.push(-dot);
            col = (0..r)
                .map(|i| (0..r).map(|j| a.get(i, j) * &col[j]).sum())
                .collect();
        }
        // new poly = T * poly, T lower-triangular Toeplitz of shape (r+2) x (r+1)
        poly = (0..r + 2)
            .map(|i| {
                (0..=r.min(i))
                    .filter(|&j| i - j < toeplitz.len())
                    .map(|j| &toeplitz[i - j] * &poly[j])
                    .sum()
            })
            .collect();
    }
    Ok(poly)
}

/// Sums of principal minors of each order `0..=n` of a square matrix
/// (the elementary symmetric functions of its eigenvalues).
pub fn principal_minor_sums(a: &RatMatrix) -> Result<Vec<Rational>> {
    let poly = characteristic_polynomial(a)?;
    Ok(poly
        .into_iter()
        .enumerate()
        .map(|(j, c)| if j % 2 == 0 { c } else { -c })
        .collect())
}

/// A symmetric matrix is positive semidefinite iff every elementary
/// symmetric function of its (real) eigenvalues is nonnegative.
pub fn is_psd_symmetric(a: &RatMatrix) -> Result<bool> {
    Ok(principal_minor_sums(a)?.iter().all(|e| !e.is_negative()))
}

/// `I - L^T L` positive semidefinite, decided exactly.
pub fn is_contraction(l: &RatMatrix) -> bool {
    let k = l.cols();
    let g = gram(l);
    let mut d = RatMatrix::identity(k);
    for r in 0..k {
        for c in 0..k {
            let v = d.get(r, c) - g.get(r, c);
            d.set(r, c, v);
        }
    }
    is_psd_symmetric(&d).expect("square by construction")
}
