//! Rank/kernel computations, the oriented 2x2 SVD and a small calculus of
//! real spans. Everything downstream that asks "is this a linear
//! isomorphism" or "do these spans intersect trivially" bottoms out here.

use crate::error::{Error, Result};
use crate::matrix::{C64, FMatrix};
use crate::scalar::Field;
use nalgebra::{DMatrix, DVector, Matrix2};

/// Numerical tolerances shared by every operation.
///
/// `rank_rel` is the relative singular-value cutoff for rank decisions;
/// `eq_abs` the absolute threshold for equality and residual checks.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rank_rel: f64,
    pub eq_abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rank_rel: 1e-10, eq_abs: 1e-8 }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, eq_abs: f64) -> Result<Self> {
        if rank_rel <= 0.0 || eq_abs <= 0.0 {
            return Err(Error::domain("tolerances must be strictly positive"));
        }
        Ok(Tolerance { rank_rel, eq_abs })
    }
}

/// Rank and an orthonormal kernel basis of `m`.
///
/// `R` and `C` matrices go straight to an SVD; `H` matrices are routed
/// through the complex adjoint embedding, whose singular values come in
/// pairs, and the rank and pulled-back kernel dimension are halved
/// consistently.
pub fn rank_kernel(m: &FMatrix, tol: &Tolerance) -> (usize, FMatrix) {
    if m.rows() == 0 || m.cols() == 0 {
        return (0, FMatrix::identity(m.field(), m.cols()));
    }
    match m.field() {
        Field::R => {
            let (rank, ker) = real_rank_kernel(&m.to_na_real(), tol.rank_rel);
            (rank, FMatrix::from_na_real(&ker))
        }
        Field::C => {
            let (rank, ker) = complex_rank_kernel(&m.to_na_complex(), tol.rank_rel);
            (rank, FMatrix::from_na_complex(&ker))
        }
        Field::H => {
            let embedded = m.quaternion_complex_embed().expect("field checked");
            let (rank_c, ker_c) = complex_rank_kernel(&embedded.to_na_complex(), tol.rank_rel);
            let rank = rank_c / 2;
            let expected = m.cols() - rank;
            let cols: Vec<Vec<_>> = (0..ker_c.ncols())
                .map(|j| FMatrix::unembed_column(ker_c.column(j).as_slice()))
                .collect();
            let pulled = FMatrix::from_columns(Field::H, m.cols(), &cols);
            let mut ker = pulled.orthonormalize_columns(tol.rank_rel);
            // The complex kernel doubles the quaternionic one; Gram-Schmidt
            // collapses it back to `cols - rank` columns.
            while ker.cols() > expected {
                ker = FMatrix::from_columns(
                    Field::H,
                    m.cols(),
                    &(0..expected).map(|j| ker.column(j)).collect::<Vec<_>>(),
                );
            }
            (rank, ker)
        }
    }
}

pub fn rank_of(m: &FMatrix, tol: &Tolerance) -> usize {
    rank_kernel(m, tol).0
}

fn real_rank_kernel(m: &DMatrix<f64>, rank_rel: f64) -> (usize, DMatrix<f64>) {
    // Pad wide matrices to square: the thin SVD otherwise truncates V and
    // loses part of the null space.
    let padded = if m.nrows() < m.ncols() {
        let mut p = DMatrix::zeros(m.ncols(), m.ncols());
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let rank = svd.singular_values.iter().filter(|&&s| s > rank_rel * smax).count();
    let v_t = svd.v_t.unwrap();
    let ker_dim = m.ncols() - rank;
    let mut ker = DMatrix::zeros(m.ncols(), ker_dim);
    for k in 0..ker_dim {
        ker.set_column(k, &v_t.row(rank + k).transpose());
    }
    (rank, ker)
}

fn complex_rank_kernel(m: &DMatrix<C64>, rank_rel: f64) -> (usize, DMatrix<C64>) {
    let padded = if m.nrows() < m.ncols() {
        let mut p = DMatrix::zeros(m.ncols(), m.ncols());
        p.rows_mut(0, m.nrows()).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let rank = svd.singular_values.iter().filter(|&&s| s > rank_rel * smax).count();
    let v_t = svd.v_t.unwrap();
    let ker_dim = m.ncols() - rank;
    let mut ker = DMatrix::zeros(m.ncols(), ker_dim);
    for k in 0..ker_dim {
        ker.set_column(k, &v_t.row(rank + k).adjoint());
    }
    (rank, ker)
}

/// Singular values of an `FMatrix`, descending. For `H` the paired values of
/// the embedding are deduplicated.
pub fn singular_values(m: &FMatrix) -> Vec<f64> {
    match m.field() {
        Field::R => m.to_na_real().svd(false, false).singular_values.iter().copied().collect(),
        Field::C => m.to_na_complex().svd(false, false).singular_values.iter().copied().collect(),
        Field::H => {
            let e = m.quaternion_complex_embed().expect("field checked");
            let sv = e.to_na_complex().svd(false, false).singular_values;
            sv.iter().copied().step_by(2).collect()
        }
    }
}

/// Rotation-valued SVD of a real 2x2 matrix: `m = U diag(s1, s2) V^T` with
/// `U, V` in SO(2), `s1 >= |s2|` and `sign(s2) = sign(det m)`.
#[derive(Debug, Clone, Copy)]
pub struct OrientedSvd2 {
    pub u_angle: f64,
    pub v_angle: f64,
    pub s1: f64,
    pub s2: f64,
}

pub fn rotation2(angle: f64) -> Matrix2<f64> {
    let (s, c) = angle.sin_cos();
    Matrix2::new(c, -s, s, c)
}

impl OrientedSvd2 {
    pub fn u(&self) -> Matrix2<f64> {
        rotation2(self.u_angle)
    }
    pub fn v(&self) -> Matrix2<f64> {
        rotation2(self.v_angle)
    }
    pub fn reconstruct(&self) -> Matrix2<f64> {
        self.u() * Matrix2::new(self.s1, 0.0, 0.0, self.s2) * self.v().transpose()
    }
}

pub fn oriented_svd_2x2(m: &Matrix2<f64>) -> OrientedSvd2 {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let e = (a + d) / 2.0;
    let f = (a - d) / 2.0;
    let g = (c + b) / 2.0;
    let h = (c - b) / 2.0;
    let q = e.hypot(h);
    let r = f.hypot(g);
    let a1 = if f == 0.0 && g == 0.0 { 0.0 } else { g.atan2(f) };
    let a2 = if e == 0.0 && h == 0.0 { 0.0 } else { h.atan2(e) };
    OrientedSvd2 {
        u_angle: (a1 + a2) / 2.0,
        v_angle: (a1 - a2) / 2.0,
        s1: q + r,
        s2: q - r,
    }
}

// ---------------------------------------------------------------------------
// Real span calculus on column matrices.
// ---------------------------------------------------------------------------

pub fn real_col_rank(m: &DMatrix<f64>, rank_rel: f64) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    sv.iter().filter(|&&s| s > rank_rel * smax).count()
}

/// Orthonormal basis of the column span (left singular vectors).
pub fn orthonormal_cols(m: &DMatrix<f64>, rank_rel: f64) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, false);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let rank = svd.singular_values.iter().filter(|&&s| s > rank_rel * smax).count();
    let u = svd.u.unwrap();
    u.columns(0, rank).into_owned()
}

/// Orthonormal basis of the null space of `m`.
pub fn real_nullspace(m: &DMatrix<f64>, rank_rel: f64) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return DMatrix::identity(m.ncols(), m.ncols());
    }
    real_rank_kernel(m, rank_rel).1
}

/// Orthonormal basis of the null space of a complex matrix.
pub fn complex_nullspace(m: &DMatrix<C64>, rank_rel: f64) -> DMatrix<C64> {
    if m.nrows() == 0 {
        return DMatrix::identity(m.ncols(), m.ncols());
    }
    complex_rank_kernel(m, rank_rel).1
}

/// Minimum-norm least-squares solution of `a x = b` plus its residual.
pub fn lsq_solve(a: &DMatrix<f64>, b: &DVector<f64>, rank_rel: f64) -> (DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |acc, &s| acc.max(s));
    let x = svd.solve(b, rank_rel * smax.max(1e-300)).expect("svd solve");
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// An orthonormalized real span supporting membership queries.
#[derive(Debug, Clone)]
pub struct RealSpan {
    q: DMatrix<f64>,
}

impl RealSpan {
    pub fn from_cols(m: &DMatrix<f64>, rank_rel: f64) -> Self {
        RealSpan { q: orthonormal_cols(m, rank_rel) }
    }

    pub fn dim(&self) -> usize {
        self.q.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Distance from `v` to the span.
    pub fn residual(&self, v: &DVector<f64>) -> f64 {
        let proj = &self.q * (self.q.transpose() * v);
        (v - proj).norm()
    }

    pub fn contains(&self, v: &DVector<f64>, eq_abs: f64) -> bool {
        self.residual(v) <= eq_abs * v.norm().max(1.0)
    }

    /// Coordinates of `v` in the orthonormal basis (valid when contained).
    pub fn coords(&self, v: &DVector<f64>) -> DVector<f64> {
        self.q.transpose() * v
    }
}

/// Basis of the intersection of two column spans.
pub fn intersect_spans(a: &DMatrix<f64>, b: &DMatrix<f64>, rank_rel: f64) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut stacked = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    stacked.columns_mut(0, a.ncols()).copy_from(a);
    stacked
        .columns_mut(a.ncols(), b.ncols())
        .copy_from(&b.scale(-1.0));
    let null = real_nullspace(&stacked, rank_rel);
    let mut vecs = DMatrix::zeros(a.nrows(), null.ncols());
    for j in 0..null.ncols() {
        let coeff = null.column(j).rows(0, a.ncols()).into_owned();
        vecs.set_column(j, &(a * coeff));
    }
    orthonormal_cols(&vecs, rank_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Quat;
    use proptest::prelude::*;

    #[test]
    fn rank_of_identity() {
        let m = FMatrix::identity(Field::R, 3);
        let (rank, ker) = rank_kernel(&m, &Tolerance::default());
        assert_eq!(rank, 3);
        assert_eq!(ker.cols(), 0);
    }

    #[test]
    fn rank_one_symmetric() {
        let m = FMatrix::from_real_rows(Field::R, &[&[1.0, 1.0], &[1.0, 1.0]]);
        let (rank, ker) = rank_kernel(&m, &Tolerance::default());
        assert_eq!(rank, 1);
        assert_eq!(ker.cols(), 1);
        let k = ker.column(0);
        // kernel spanned by (1, -1)/sqrt(2), up to sign
        let s = 1.0 / 2.0f64.sqrt();
        let same = (k[0].w - s).abs() < 1e-12 && (k[1].w + s).abs() < 1e-12;
        let flipped = (k[0].w + s).abs() < 1e-12 && (k[1].w - s).abs() < 1e-12;
        assert!(same || flipped);
        assert!(FMatrix::col_norm(&m.mul_vec(&k)) < 1e-12);
    }

    #[test]
    fn forced_rank_product() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(42);
        let a = FMatrix::from_fn(Field::R, 5, 3, |_, _| Quat::real(rng.gen_range(-1.0..1.0)));
        let b = FMatrix::from_fn(Field::R, 3, 5, |_, _| Quat::real(rng.gen_range(-1.0..1.0)));
        let (rank, ker) = rank_kernel(&a.mul(&b), &Tolerance::default());
        assert_eq!(rank, 3);
        assert_eq!(ker.cols(), 2);
    }

    #[test]
    fn quaternion_rank_is_halved() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(9);
        let mut rq = || {
            Quat::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        };
        let a = FMatrix::from_fn(Field::H, 4, 2, |_, _| rq());
        let b = FMatrix::from_fn(Field::H, 2, 4, |_, _| rq());
        let m = a.mul(&b);
        let tol = Tolerance::default();
        let (rank, ker) = rank_kernel(&m, &tol);
        assert_eq!(rank, 2);
        assert_eq!(ker.cols(), 2);
        for j in 0..ker.cols() {
            assert!(FMatrix::col_norm(&m.mul_vec(&ker.column(j))) < 1e-8);
        }
    }

    #[test]
    fn empty_matrix_rank_zero() {
        let m = FMatrix::zeros(Field::R, 0, 3);
        let (rank, ker) = rank_kernel(&m, &Tolerance::default());
        assert_eq!(rank, 0);
        assert_eq!(ker.cols(), 3);
    }

    #[test]
    fn svd2_identity_and_reflection() {
        let id = oriented_svd_2x2(&Matrix2::identity());
        assert!((id.s1 - 1.0).abs() < 1e-15 && (id.s2 - 1.0).abs() < 1e-15);
        let m = Matrix2::new(1.0, 0.0, 0.0, -1.0);
        let s = oriented_svd_2x2(&m);
        assert!((s.s1 - 1.0).abs() < 1e-15);
        assert!((s.s2 + 1.0).abs() < 1e-15);
        assert!(s.reconstruct().relative_eq(&m, 1e-12, 1e-12));
    }

    proptest! {
        #[test]
        fn svd2_reconstructs(a in -3.0..3.0f64, b in -3.0..3.0f64, c in -3.0..3.0f64, d in -3.0..3.0f64) {
            let m = Matrix2::new(a, b, c, d);
            let s = oriented_svd_2x2(&m);
            prop_assert!(s.s1 >= s.s2.abs() - 1e-12);
            prop_assert!((s.s1 * s.s2 - m.determinant()).abs() < 1e-9);
            let r = s.reconstruct();
            prop_assert!((r - m).norm() < 1e-9);
            prop_assert!((s.u().determinant() - 1.0).abs() < 1e-12);
            prop_assert!((s.v().determinant() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn rank_scale_invariant(scale in 0.01..100.0f64, seed in 0u64..30) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let a = FMatrix::from_fn(Field::R, 4, 2, |_, _| Quat::real(rng.gen_range(-1.0..1.0)));
            let b = FMatrix::from_fn(Field::R, 2, 4, |_, _| Quat::real(rng.gen_range(-1.0..1.0)));
            let m = a.mul(&b);
            let tol = Tolerance::default();
            prop_assert_eq!(rank_of(&m, &tol), rank_of(&m.scale_real(scale), &tol));
        }
    }

    #[test]
    fn intersection_of_planes() {
        // span{e1, e2} and span{e2, e3} meet in span{e2}
        let a = DMatrix::from_columns(&[
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 0.0]),
        ]);
        let b = DMatrix::from_columns(&[
            DVector::from_vec(vec![0.0, 1.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, 1.0]),
        ]);
        let i = intersect_spans(&a, &b, 1e-10);
        assert_eq!(i.ncols(), 1);
        assert!(i.column(0)[0].abs() < 1e-12 && i.column(0)[2].abs() < 1e-12);
    }
}
