//! Dense matrices over a prime field.

use std::fmt;

use thiserror::Error;

use crate::gf::{GfError, PrimeField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is singular")]
    Singular,
    #[error("index {index} out of range (bound {bound})")]
    Index { index: usize, bound: usize },
    #[error("operands live in different fields: GF({0}) vs GF({1})")]
    FieldMismatch(u32, u32),
    #[error("not a permutation: {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error(transparent)]
    Gf(#[from] GfError),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense row-major matrix over GF(q). Entries are residues in `[0, q)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    field: PrimeField,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(field: PrimeField, rows: usize, cols: usize) -> Self {
        Self {
            field,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: PrimeField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_fn(
        field: PrimeField,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> u32,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = f(r, c);
                debug_assert!(field.contains(v));
                data.push(v);
            }
        }
        Self {
            field,
            rows,
            cols,
            data,
        }
    }

    /// Build from row-major data, rejecting values outside `[0, q)`.
    pub fn from_vec(field: PrimeField, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape {
                op: "from_vec",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        if let Some(&v) = data.iter().find(|&&v| !field.contains(v)) {
            return Err(GfError::OutOfRange {
                value: v as u64,
                q: field.modulus(),
            }
            .into());
        }
        Ok(Self {
            field,
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[u32]>>(field: PrimeField, rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(LinalgError::Shape {
                    op: "from_rows",
                    left: (rows.len(), cols),
                    right: (1, r.len()),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(field, rows.len(), cols, data)
    }

    /// Column vector.
    pub fn column(field: PrimeField, v: &[u32]) -> Result<Self> {
        Self::from_vec(field, v.len(), 1, v.to_vec())
    }

    /// Square diagonal matrix.
    pub fn diagonal(field: PrimeField, diag: &[u32]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(field, n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        debug_assert!(self.field.contains(v));
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| (0..self.cols).all(|c| self.get(r, c) == u32::from(r == c)))
    }

    fn check_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(LinalgError::FieldMismatch(
                self.field.modulus(),
                other.field.modulus(),
            ));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_field(other)?;
        if self.cols != other.rows {
            return Err(LinalgError::Shape {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let f = self.field;
        let q = f.modulus() as u64;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        let mut acc = vec![0u64; other.cols];
        for r in 0..self.rows {
            acc.iter_mut().for_each(|a| *a = 0);
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (slot, &b) in acc.iter_mut().zip(other.row(k)) {
                    *slot = (*slot + a as u64 * b as u64) % q;
                }
            }
            for (c, &v) in acc.iter().enumerate() {
                out.data[r * other.cols + c] = v as u32;
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `vᵗ · self`.
    pub fn left_mul_vec(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.rows {
            return Err(LinalgError::Shape {
                op: "left_mul_vec",
                left: (1, v.len()),
                right: self.shape(),
            });
        }
        let f = self.field;
        let q = f.modulus() as u64;
        let mut acc = vec![0u64; self.cols];
        for (r, &a) in v.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (slot, &b) in acc.iter_mut().zip(self.row(r)) {
                *slot = (*slot + a as u64 * b as u64) % q;
            }
        }
        Ok(acc.into_iter().map(|x| x as u32).collect())
    }

    /// Matrix times column vector: `self · v`.
    pub fn mul_vec(&self, v: &[u32]) -> Result<Vec<u32>> {
        if v.len() != self.cols {
            return Err(LinalgError::Shape {
                op: "mul_vec",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.field.dot(self.row(r), v))
            .collect())
    }

    pub fn scale(&self, s: u32) -> Matrix {
        let f = self.field;
        Matrix {
            field: f,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f.mul(v, s)).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "add", |f, a, b| f.add(a, b))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, "sub", |f, a, b| f.sub(a, b))
    }

    fn zip_with(
        &self,
        other: &Matrix,
        op: &'static str,
        g: impl Fn(&PrimeField, u32, u32) -> u32,
    ) -> Result<Matrix> {
        self.check_field(other)?;
        if self.shape() != other.shape() {
            return Err(LinalgError::Shape {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        let f = self.field;
        Ok(Matrix {
            field: f,
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| g(&f, a, b))
                .collect(),
        })
    }

    /// Entries at the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Matrix> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.rows) {
            return Err(LinalgError::Index {
                index: r,
                bound: self.rows,
            });
        }
        if let Some(&c) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(LinalgError::Index {
                index: c,
                bound: self.cols,
            });
        }
        Ok(Matrix::from_fn(
            self.field,
            rows.len(),
            cols.len(),
            |i, j| self.get(rows[i], cols[j]),
        ))
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Matrix> {
        let rows: Vec<usize> = (0..self.rows).collect();
        self.submatrix(&rows, cols)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Matrix> {
        let cols: Vec<usize> = (0..self.cols).collect();
        self.submatrix(rows, &cols)
    }

    /// Column-wise concatenation `[A | B | ...]`.
    pub fn hstack(parts: &[&Matrix]) -> Result<Matrix> {
        let first = parts.first().ok_or(LinalgError::Shape {
            op: "hstack",
            left: (0, 0),
            right: (0, 0),
        })?;
        let rows = first.rows;
        let mut cols = 0;
        for p in parts {
            first.check_field(p)?;
            if p.rows != rows {
                return Err(LinalgError::Shape {
                    op: "hstack",
                    left: first.shape(),
                    right: p.shape(),
                });
            }
            cols += p.cols;
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for p in parts {
                data.extend_from_slice(p.row(r));
            }
        }
        Ok(Matrix {
            field: first.field,
            rows,
            cols,
            data,
        })
    }

    /// Row-wise concatenation.
    pub fn vstack(parts: &[&Matrix]) -> Result<Matrix> {
        let first = parts.first().ok_or(LinalgError::Shape {
            op: "vstack",
            left: (0, 0),
            right: (0, 0),
        })?;
        let cols = first.cols;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            first.check_field(p)?;
            if p.cols != cols {
                return Err(LinalgError::Shape {
                    op: "vstack",
                    left: first.shape(),
                    right: p.shape(),
                });
            }
            data.extend_from_slice(&p.data);
            rows += p.rows;
        }
        Ok(Matrix {
            field: first.field,
            rows,
            cols,
            data,
        })
    }

    pub fn permute_columns(&self, perm: &Permutation) -> Result<Matrix> {
        if perm.len() != self.cols {
            return Err(LinalgError::Shape {
                op: "permute_columns",
                left: self.shape(),
                right: (perm.len(), perm.len()),
            });
        }
        self.select_columns(perm.as_slice())
    }

    pub fn permute_rows(&self, perm: &Permutation) -> Result<Matrix> {
        if perm.len() != self.rows {
            return Err(LinalgError::Shape {
                op: "permute_rows",
                left: self.shape(),
                right: (perm.len(), perm.len()),
            });
        }
        self.select_rows(perm.as_slice())
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    /// Pivot choice: first nonzero entry in the column.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let f = self.field;
        let (rows, cols) = self.shape();
        let mut pivots = Vec::new();
        let mut pr = 0;
        for c in 0..cols {
            if pr == rows {
                break;
            }
            let Some(p) = (pr..rows).find(|&r| self.get(r, c) != 0) else {
                continue;
            };
            if p != pr {
                for j in 0..cols {
                    self.data.swap(p * cols + j, pr * cols + j);
                }
            }
            let inv = f.inv(self.get(pr, c)).expect("pivot is nonzero");
            for j in 0..cols {
                let v = self.get(pr, j);
                self.set(pr, j, f.mul(v, inv));
            }
            for r in 0..rows {
                if r == pr {
                    continue;
                }
                let factor = self.get(r, c);
                if factor == 0 {
                    continue;
                }
                let neg = f.neg(factor);
                for j in 0..cols {
                    let v = f.mul_add(self.get(r, j), neg, self.get(pr, j));
                    self.set(r, j, v);
                }
            }
            pivots.push(c);
            pr += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref_in_place().len()
    }

    /// Gauss-Jordan inversion.
    pub fn invert(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut aug = Matrix::hstack(&[self, &Matrix::identity(self.field, n)])?;
        let pivots = aug.rref_in_place();
        if pivots.len() < n || (n > 0 && pivots[n - 1] != n - 1) {
            return Err(LinalgError::Singular);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        aug.submatrix(&rows, &cols)
    }

    /// Basis of the right nullspace `{v : A v = 0}`, one vector per column.
    /// The result has `cols` rows and `cols - rank` columns.
    pub fn nullspace(&self) -> Matrix {
        let f = self.field;
        let mut r = self.clone();
        let pivots = r.rref_in_place();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(f, self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            basis.set(fc, j, 1);
            for (pi, &pc) in pivots.iter().enumerate() {
                basis.set(pc, j, f.neg(r.get(pi, fc)));
            }
        }
        basis
    }

    /// Solve `uᵗ · self = y` for square invertible `self`.
    pub fn solve_left(&self, y: &[u32]) -> Result<Vec<u32>> {
        self.invert()?.left_mul_vec(y)
    }
}

/// A reordering of indices. Applying it to a sequence `s` yields
/// `[s[map[0]], s[map[1]], ...]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &i in &map {
            if i >= map.len() || seen[i] {
                return Err(LinalgError::InvalidPermutation(map));
            }
            seen[i] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// Position `i` of the output takes element `self[i]` of the input.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.map.iter().map(|&i| items[i].clone()).collect()
    }

    /// The permutation equivalent to applying `self` and then `next`.
    pub fn then(&self, next: &Permutation) -> Result<Permutation> {
        if next.len() != self.len() {
            return Err(LinalgError::Shape {
                op: "permutation compose",
                left: (self.len(), 1),
                right: (next.len(), 1),
            });
        }
        Ok(Permutation {
            map: next.map.iter().map(|&i| self.map[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.map.len()];
        for (pos, &src) in self.map.iter().enumerate() {
            inv[src] = pos;
        }
        Permutation { map: inv }
    }
}
