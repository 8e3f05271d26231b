//! Dense matrices over a tagged ground field.
//!
//! An [`FMatrix`] acts on column vectors from the left; over `H` the column
//! space is a right module, scalars multiplying coordinates on the right.
//! With that convention left multiplication by a matrix is `H`-linear and
//! matrix multiplication composes actions.

use crate::error::{Error, Result};
use crate::scalar::{Field, Quat};
use nalgebra::{Complex, DMatrix};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct FMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Quat>, // row major
}

impl FMatrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        FMatrix { field, rows, cols, data: vec![Quat::ZERO; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Quat::ONE);
        }
        m
    }

    pub fn from_fn(field: Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quat) -> Self {
        let mut m = Self::zeros(field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn from_real_rows(field: Field, rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Self::from_fn(field, r, c, |i, j| Quat::real(rows[i][j]))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Quat {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Quat) {
        debug_assert!(v.lies_in(self.field, 1e-12), "entry outside field {}", self.field);
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<Quat> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[Quat]) {
        for (i, &v) in col.iter().enumerate() {
            self.set(i, j, v);
        }
    }

    pub fn from_columns(field: Field, rows: usize, cols: &[Vec<Quat>]) -> Self {
        let mut m = Self::zeros(field, rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            m.set_column(j, col);
        }
        m
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.field, other.field);
        FMatrix::from_fn(self.field, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j)
            } else {
                other.get(i, j - self.cols)
            }
        })
    }

    pub fn add(&self, other: &FMatrix) -> FMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &FMatrix) -> FMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= *b;
        }
        out
    }

    pub fn neg(&self) -> FMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = -*a;
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> FMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.scale(s);
        }
        out
    }

    /// Entrywise right multiplication by a scalar. Over `H` this is the
    /// correct notion only for scalars commuting with the entries; all
    /// callers pass real or (for `C` matrices) complex scalars.
    pub fn scale_right(&self, s: Quat) -> FMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = *a * s;
        }
        out
    }

    pub fn mul(&self, other: &FMatrix) -> FMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        assert_eq!(self.field, other.field);
        let mut out = FMatrix::zeros(self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Quat::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.data[i * out.cols + j] = v;
                }
            }
        }
        out
    }

    /// Matrix-vector action `M v` on a column given as a slice.
    pub fn mul_vec(&self, v: &[Quat]) -> Vec<Quat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Quat::ZERO;
                for j in 0..self.cols {
                    acc += self.get(i, j) * v[j];
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> FMatrix {
        FMatrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conj_entrywise(&self) -> FMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.conj();
        }
        out
    }

    /// Conjugate transpose `M^H`.
    pub fn adjoint(&self) -> FMatrix {
        FMatrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Quat {
        assert!(self.is_square());
        let mut t = Quat::ZERO;
        for i in 0..self.rows {
            t += self.get(i, i);
        }
        t
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sq()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &FMatrix, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.sub(other).max_abs() <= tol
    }

    /// Standard Hermitian pairing of columns, `<u, v> = sum conj(u_i) v_i`.
    pub fn col_inner(u: &[Quat], v: &[Quat]) -> Quat {
        u.iter().zip(v).fold(Quat::ZERO, |acc, (a, b)| acc + a.conj() * *b)
    }

    /// Flattens to real coordinates, `field.real_dim()` numbers per entry.
    pub fn flatten_real(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len() * self.field.real_dim());
        for q in &self.data {
            out.extend_from_slice(&q.components(self.field));
        }
        out
    }

    pub fn from_flat_real(field: Field, rows: usize, cols: usize, flat: &[f64]) -> Self {
        let d = field.real_dim();
        assert_eq!(flat.len(), rows * cols * d);
        let mut m = Self::zeros(field, rows, cols);
        for idx in 0..rows * cols {
            let q = Quat::from_components(field, &flat[idx * d..(idx + 1) * d]).unwrap();
            m.data[idx] = q;
        }
        m
    }

    /// Adjoint embedding of a quaternionic matrix as a complex one.
    ///
    /// Each entry `q = a + b j` (`a`, `b` complex) becomes the 2x2 block
    /// `[[a, -b], [conj(b), conj(a)]]`; the result represents the same left
    /// action on `C^{2c} ~ H^c` and the map is an injective real-algebra
    /// homomorphism.
    pub fn quaternion_complex_embed(&self) -> Result<FMatrix> {
        if self.field != Field::H {
            return Err(Error::domain(format!(
                "quaternion_complex_embed requires an H matrix, got {}",
                self.field
            )));
        }
        let mut out = FMatrix::zeros(Field::C, 2 * self.rows, 2 * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let (a, b) = self.get(i, j).complex_pair();
                out.set(2 * i, 2 * j, Quat::from_c64(a));
                out.set(2 * i, 2 * j + 1, Quat::from_c64(-b));
                out.set(2 * i + 1, 2 * j, Quat::from_c64(b.conj()));
                out.set(2 * i + 1, 2 * j + 1, Quat::from_c64(a.conj()));
            }
        }
        Ok(out)
    }

    /// The complex vector of length `2n` identified with a quaternionic one.
    pub fn embed_column(col: &[Quat]) -> Vec<C64> {
        let mut out = Vec::with_capacity(2 * col.len());
        for q in col {
            let (a, b) = q.complex_pair();
            out.push(a);
            out.push(b.conj());
        }
        out
    }

    pub fn unembed_column(col: &[C64]) -> Vec<Quat> {
        assert!(col.len() % 2 == 0);
        col.chunks(2)
            .map(|p| Quat::from_complex_pair(p[0], p[1].conj()))
            .collect()
    }

    pub fn to_na_real(&self) -> DMatrix<f64> {
        assert_eq!(self.field, Field::R);
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).w)
    }

    /// Complex view; valid for `R` and `C` matrices.
    pub fn to_na_complex(&self) -> DMatrix<C64> {
        assert_ne!(self.field, Field::H, "embed H matrices first");
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_c64())
    }

    pub fn from_na_complex(m: &DMatrix<C64>) -> FMatrix {
        FMatrix::from_fn(Field::C, m.nrows(), m.ncols(), |i, j| Quat::from_c64(m[(i, j)]))
    }

    pub fn from_na_real(m: &DMatrix<f64>) -> FMatrix {
        FMatrix::from_fn(Field::R, m.nrows(), m.ncols(), |i, j| Quat::real(m[(i, j)]))
    }

    /// Gauss-Jordan inverse; works over all three fields since the entries
    /// form a division ring. Pivots by largest norm.
    pub fn inverse(&self, tol_rel: f64) -> Result<FMatrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = FMatrix::identity(self.field, n);
        let scale = self.max_abs().max(1e-300);
        for col in 0..n {
            let (mut piv, mut best) = (col, a.get(col, col).norm());
            for r in col + 1..n {
                let v = a.get(r, col).norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= tol_rel * scale {
                return Err(Error::domain("singular matrix in inverse"));
            }
            if piv != col {
                for j in 0..n {
                    let (u, v) = (a.get(col, j), a.get(piv, j));
                    a.set(col, j, v);
                    a.set(piv, j, u);
                    let (u, v) = (inv.get(col, j), inv.get(piv, j));
                    inv.set(col, j, v);
                    inv.set(piv, j, u);
                }
            }
            let d = a.get(col, col).inv();
            for j in 0..n {
                a.set(col, j, d * a.get(col, j));
                inv.set(col, j, d * inv.get(col, j));
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col);
                if f == Quat::ZERO {
                    continue;
                }
                for j in 0..n {
                    let v = a.get(r, j) - f * a.get(col, j);
                    a.set(r, j, v);
                    let v = inv.get(r, j) - f * inv.get(col, j);
                    inv.set(r, j, v);
                }
            }
        }
        Ok(inv)
    }

    /// Solves `A X = B`.
    pub fn solve_left(&self, rhs: &FMatrix, tol_rel: f64) -> Result<FMatrix> {
        Ok(self.inverse(tol_rel)?.mul(rhs))
    }

    /// Matrix exponential by scaling and squaring with a Taylor tail.
    ///
    /// Matrices in this crate are small and well scaled, so a plain series
    /// after halving the norm below 1/2 is accurate to machine precision.
    pub fn exp_series(&self) -> FMatrix {
        assert!(self.is_square());
        let n = self.rows;
        let norm = self.norm_fro();
        let mut squarings = 0u32;
        let mut scaled = self.clone();
        if norm > 0.5 {
            squarings = (norm / 0.5).log2().ceil() as u32;
            scaled = self.scale_real(0.5f64.powi(squarings as i32));
        }
        let mut term = FMatrix::identity(self.field, n);
        let mut sum = FMatrix::identity(self.field, n);
        for k in 1..=30 {
            term = term.mul(&scaled).scale_real(1.0 / k as f64);
            sum = sum.add(&term);
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }

    /// Gram-Schmidt orthonormalization of the columns with respect to the
    /// standard Hermitian pairing. Columns with residual norm below
    /// `tol_rel * max_column_norm` are dropped. Coefficients multiply from
    /// the right, so the span is preserved over `H` as a right module.
    pub fn orthonormalize_columns(&self, tol_rel: f64) -> FMatrix {
        let mut kept: Vec<Vec<Quat>> = Vec::new();
        let scale = (0..self.cols)
            .map(|j| Self::col_norm(&self.column(j)))
            .fold(0.0, f64::max)
            .max(1e-300);
        for j in 0..self.cols {
            let mut v = self.column(j);
            for _pass in 0..2 {
                for u in &kept {
                    let c = Self::col_inner(u, &v);
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= *ui * c;
                    }
                }
            }
            let n = Self::col_norm(&v);
            if n > tol_rel * scale {
                let inv = 1.0 / n;
                for vi in v.iter_mut() {
                    *vi = vi.scale(inv);
                }
                kept.push(v);
            }
        }
        FMatrix::from_columns(self.field, self.rows, &kept)
    }

    pub fn col_norm(v: &[Quat]) -> f64 {
        v.iter().map(|q| q.norm_sq()).sum::<f64>().sqrt()
    }
}
