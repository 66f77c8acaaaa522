//! Characteristic-2 finite fields GF(2^m) and dense linear algebra over them.
//!
//! Elements are plain `u16` values in polynomial basis: bit `i` is the
//! coefficient of `x^i`. Addition is XOR, so the XOR-combined broadcast
//! messages of the delivery phase and the MDS encodings of the placement
//! phase live in the same arithmetic.
//!
//! Multiplication goes through log/antilog tables built once per field. Each
//! degree uses a fixed primitive reduction polynomial (the smallest one, by
//! integer value, for which `x` generates the multiplicative group), so the
//! same degree always yields the same field on every platform.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A field element. Always `< 2^m` for the field it belongs to.
pub type Elem = u16;

/// Largest supported extension degree.
pub const MAX_DEGREE: u32 = 16;

/// Reduction polynomials indexed by degree, including the leading term.
///
/// Degree 1 uses `x + 1`, so `x` reduces to `1`, the generator of GF(2)*.
const REDUCTION_POLYS: [u32; 17] = [
    0, 0x3, 0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11d, 0x211, 0x409, 0x805, 0x1053, 0x201b, 0x402b, 0x8003,
    0x1002d,
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("field degree {0} outside supported range 1..=16")]
    DegreeOutOfRange(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("linear system is underdetermined (rank {rank} < {cols} unknowns)")]
    Underdetermined { rank: usize, cols: usize },
}

struct Tables {
    degree: u32,
    poly: u32,
    /// `exp[i] = x^i`, stored twice over so `exp[log a + log b]` needs no reduction.
    exp: Vec<Elem>,
    log: Vec<u32>,
}

/// GF(2^m) with precomputed log/antilog tables. Cheap to clone.
#[derive(Clone)]
pub struct Field {
    tables: Arc<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("degree", &self.tables.degree)
            .field("poly", &format_args!("{:#x}", self.tables.poly))
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.tables.poly == other.tables.poly
    }
}

impl Eq for Field {}

impl Field {
    /// Builds GF(2^m) for `1 <= m <= 16`.
    pub fn new(degree: u32) -> Result<Self, GfError> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(GfError::DegreeOutOfRange(degree));
        }
        let poly = REDUCTION_POLYS[degree as usize];
        let order = 1usize << degree;
        let group = order - 1;
        let mut exp = vec![0; 2 * group];
        let mut log = vec![0; order];
        let mut a: u32 = 1;
        for i in 0..group {
            exp[i] = a as Elem;
            exp[i + group] = a as Elem;
            log[a as usize] = i as u32;
            a <<= 1;
            if a & (1 << degree) != 0 {
                a ^= poly;
            }
        }
        Ok(Self {
            tables: Arc::new(Tables {
                degree,
                poly,
                exp,
                log,
            }),
        })
    }

    /// Smallest degree whose field has at least `n` elements (never below 1).
    pub fn degree_for_len(n: usize) -> u32 {
        let mut m = 1;
        while (1usize << m) < n {
            m += 1;
        }
        m
    }

    pub fn degree(&self) -> u32 {
        self.tables.degree
    }

    /// Reduction polynomial as a bitmask including the `x^m` term.
    pub fn polynomial(&self) -> u32 {
        self.tables.poly
    }

    /// Number of field elements, `2^m`.
    pub fn order(&self) -> usize {
        1 << self.tables.degree
    }

    pub fn contains(&self, a: Elem) -> bool {
        (a as usize) < self.order()
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let t = &self.tables;
        t.exp[(t.log[a as usize] + t.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, GfError> {
        if a == 0 {
            return Err(GfError::ZeroInverse);
        }
        let t = &self.tables;
        let group = (self.order() - 1) as u32;
        Ok(t.exp[((group - t.log[a as usize]) % group) as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let t = &self.tables;
        let group = (self.order() - 1) as u64;
        t.exp[((t.log[a as usize] as u64 * (e % group)) % group) as usize]
    }

    /// `dst[i] += c * src[i]` for every `i`.
    pub fn mul_add_slice(&self, dst: &mut [Elem], src: &[Elem], c: Elem) {
        debug_assert_eq!(dst.len(), src.len());
        if c == 0 {
            return;
        }
        if c == 1 {
            for (d, s) in dst.iter_mut().zip(src) {
                *d ^= *s;
            }
            return;
        }
        let t = &self.tables;
        let lc = t.log[c as usize];
        for (d, &s) in dst.iter_mut().zip(src) {
            if s != 0 {
                *d ^= t.exp[(lc + t.log[s as usize]) as usize];
            }
        }
    }

    pub fn scale_slice(&self, v: &mut [Elem], c: Elem) {
        for x in v.iter_mut() {
            *x = self.mul(*x, c);
        }
    }

    /// Linear combination `sum_i coeffs[i] * vectors[i]`, all vectors of length `len`.
    pub fn combine<'a, I>(&self, len: usize, terms: I) -> Vec<Elem>
    where
        I: IntoIterator<Item = (Elem, &'a [Elem])>,
    {
        let mut out = vec![0; len];
        for (c, v) in terms {
            self.mul_add_slice(&mut out, v, c);
        }
        out
    }
}

/// Dense row-major matrix over a characteristic-2 field.
///
/// The matrix does not own its field; every arithmetic method takes one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self, GfError> {
        if data.len() != rows * cols {
            return Err(GfError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Elem>]) -> Result<Self, GfError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(GfError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Elem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Submatrix made of the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &j) in cols.iter().enumerate() {
                out.set(i, k, self.get(i, j));
            }
        }
        out
    }

    /// Columns `start..end` as a new matrix.
    pub fn column_block(&self, start: usize, end: usize) -> Self {
        self.select_columns(&(start..end).collect::<Vec<_>>())
    }

    pub fn mul(&self, other: &Matrix, gf: &Field) -> Result<Matrix, GfError> {
        if self.cols != other.rows {
            return Err(GfError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                gf.mul_add_slice(dst, other.row(k), self.get(i, k));
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v * self`.
    pub fn left_mul_vec(&self, v: &[Elem], gf: &Field) -> Result<Vec<Elem>, GfError> {
        if v.len() != self.rows {
            return Err(GfError::DimensionMismatch(format!(
                "vector of length {} times {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![0; self.cols];
        for (i, &c) in v.iter().enumerate() {
            gf.mul_add_slice(&mut out, self.row(i), c);
        }
        Ok(out)
    }

    /// Reduces `self` in place to reduced row echelon form, applying the same
    /// row operations to `rhs` (which must have as many rows). Returns the
    /// pivot column of each leading row.
    fn row_reduce(&mut self, rhs: &mut Matrix, gf: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, p);
            rhs.swap_rows(r, p);
            let inv = gf.inv(self.get(r, c)).expect("pivot is nonzero");
            gf.scale_slice(&mut self.data[r * self.cols..(r + 1) * self.cols], inv);
            gf.scale_slice(&mut rhs.data[r * rhs.cols..(r + 1) * rhs.cols], inv);
            let pivot_row = self.row(r).to_vec();
            let pivot_rhs = rhs.row(r).to_vec();
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f != 0 {
                    gf.mul_add_slice(&mut self.data[i * self.cols..(i + 1) * self.cols], &pivot_row, f);
                    gf.mul_add_slice(&mut rhs.data[i * rhs.cols..(i + 1) * rhs.cols], &pivot_rhs, f);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, gf: &Field) -> usize {
        let mut a = self.clone();
        let mut dummy = Matrix::zeros(self.rows, 0);
        a.row_reduce(&mut dummy, gf).len()
    }

    /// Solves `self * X = rhs` for a matrix of right-hand sides.
    ///
    /// Inconsistency is reported before rank deficiency.
    pub fn solve_multi(&self, rhs: &Matrix, gf: &Field) -> Result<Matrix, GfError> {
        if rhs.rows != self.rows {
            return Err(GfError::DimensionMismatch(format!(
                "{} right-hand rows for {} equations",
                rhs.rows, self.rows
            )));
        }
        let mut a = self.clone();
        let mut b = rhs.clone();
        let pivots = a.row_reduce(&mut b, gf);
        let rank = pivots.len();
        if (rank..self.rows).any(|i| b.row(i).iter().any(|&v| v != 0)) {
            return Err(GfError::Inconsistent);
        }
        if rank < self.cols {
            return Err(GfError::Underdetermined {
                rank,
                cols: self.cols,
            });
        }
        let mut x = Matrix::zeros(self.cols, rhs.cols);
        for (i, &c) in pivots.iter().enumerate() {
            x.data[c * rhs.cols..(c + 1) * rhs.cols].copy_from_slice(b.row(i));
        }
        Ok(x)
    }

    /// Solves `self * x = y` for a single column vector.
    pub fn solve(&self, y: &[Elem], gf: &Field) -> Result<Vec<Elem>, GfError> {
        let rhs = Matrix::from_vec(y.len(), 1, y.to_vec())?;
        Ok(self.solve_multi(&rhs, gf)?.data)
    }

    pub fn inverse(&self, gf: &Field) -> Result<Matrix, GfError> {
        if self.rows != self.cols {
            return Err(GfError::DimensionMismatch(
                "inverse of a non-square matrix".into(),
            ));
        }
        self.solve_multi(&Matrix::identity(self.rows), gf)
    }
}

/// Outcome of feeding one equation to a [`RowReducer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    /// The row was independent and now leads at this column.
    Pivot(usize),
    /// The row was a combination of earlier rows with a matching payload.
    Redundant,
    /// The row was a combination of earlier rows but its payload disagrees.
    Conflict,
}

#[derive(Clone, Debug)]
struct ReducedRow {
    coeffs: Vec<Elem>,
    payload: Vec<Elem>,
}

/// Incremental Gaussian elimination kept in fully reduced row echelon form.
///
/// Each equation is a coefficient row over `width` unknowns plus a payload
/// vector (the equation's right-hand side, one entry per symbol position).
/// Unknown `j` is determined exactly when `e_j` lies in the row space.
#[derive(Clone, Debug)]
pub struct RowReducer {
    width: usize,
    payload_width: usize,
    pivot_row: Vec<Option<usize>>,
    rows: Vec<ReducedRow>,
}

impl RowReducer {
    pub fn new(width: usize, payload_width: usize) -> Self {
        Self {
            width,
            payload_width,
            pivot_row: vec![None; width],
            rows: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn insert(
        &mut self,
        mut coeffs: Vec<Elem>,
        mut payload: Vec<Elem>,
        gf: &Field,
    ) -> Result<Insertion, GfError> {
        if coeffs.len() != self.width || payload.len() != self.payload_width {
            return Err(GfError::DimensionMismatch(format!(
                "equation of width {}/{} for reducer of width {}/{}",
                coeffs.len(),
                payload.len(),
                self.width,
                self.payload_width
            )));
        }
        // Existing rows are zero on every other pivot column, so one sweep suffices.
        for col in 0..self.width {
            let c = coeffs[col];
            if c == 0 {
                continue;
            }
            if let Some(idx) = self.pivot_row[col] {
                let row = &self.rows[idx];
                gf.mul_add_slice(&mut coeffs[col..], &row.coeffs[col..], c);
                gf.mul_add_slice(&mut payload, &row.payload, c);
            }
        }
        let Some(lead) = coeffs.iter().position(|&c| c != 0) else {
            return Ok(if payload.iter().all(|&v| v == 0) {
                Insertion::Redundant
            } else {
                Insertion::Conflict
            });
        };
        let inv = gf.inv(coeffs[lead])?;
        gf.scale_slice(&mut coeffs[lead..], inv);
        gf.scale_slice(&mut payload, inv);
        for row in &mut self.rows {
            let f = row.coeffs[lead];
            if f != 0 {
                gf.mul_add_slice(&mut row.coeffs[lead..], &coeffs[lead..], f);
                gf.mul_add_slice(&mut row.payload, &payload, f);
            }
        }
        self.pivot_row[lead] = Some(self.rows.len());
        self.rows.push(ReducedRow { coeffs, payload });
        Ok(Insertion::Pivot(lead))
    }

    /// Value of unknown `col` if the equations pin it down uniquely.
    pub fn determined(&self, col: usize) -> Option<&[Elem]> {
        let row = &self.rows[self.pivot_row[col]?];
        let isolated = row
            .coeffs
            .iter()
            .enumerate()
            .all(|(j, &c)| (j == col) == (c != 0));
        isolated.then_some(row.payload.as_slice())
    }
}
