//! The Grassmannian of oriented 2-planes in `R^N` as a complex quadric:
//! the identification `psi(u ^ v) = C(u + iv)`, characteristic angles,
//! opposition tests, explicit circles and geodesics, and the conjugating
//! element moving the simple circle onto a general one.

use crate::algebra::{AlgebraBasis, SubalgebraRep};
use crate::curve::ProjParam;
use crate::error::{Error, Result};
use crate::linalg::{self, oriented_svd_2x2, rotation2, Tolerance};
use crate::matrix::{C64, FMatrix};
use nalgebra::{DMatrix, DVector, Matrix2};

/// An oriented 2-plane in `R^N` (`N >= 4`), stored as an ordered
/// orthonormal frame; equality is same span with a positive-determinant
/// frame change.
#[derive(Debug, Clone)]
pub struct OrientedPlane {
    u: DVector<f64>,
    v: DVector<f64>,
}

impl OrientedPlane {
    pub fn new(u: DVector<f64>, v: DVector<f64>, tol: &Tolerance) -> Result<OrientedPlane> {
        if u.len() != v.len() || u.len() < 4 {
            return Err(Error::domain("oriented planes need ambient dimension N >= 4"));
        }
        if (u.norm() - 1.0).abs() > tol.eq_abs
            || (v.norm() - 1.0).abs() > tol.eq_abs
            || u.dot(&v).abs() > tol.eq_abs
        {
            return Err(Error::domain("frame is not orthonormal"));
        }
        Ok(OrientedPlane { u, v })
    }

    /// Orthonormalizes a spanning pair, keeping its orientation.
    pub fn from_span(u: DVector<f64>, v: DVector<f64>, tol: &Tolerance) -> Result<OrientedPlane> {
        let nu = u.norm();
        if nu < tol.eq_abs {
            return Err(Error::domain("degenerate frame"));
        }
        let u1 = u / nu;
        let w = &v - &u1 * u1.dot(&v);
        let nw = w.norm();
        if nw < tol.eq_abs {
            return Err(Error::domain("frame vectors are collinear"));
        }
        OrientedPlane::new(u1, w / nw, tol)
    }

    pub fn coordinate(ambient: usize, i: usize, j: usize) -> OrientedPlane {
        let mut u = DVector::zeros(ambient);
        let mut v = DVector::zeros(ambient);
        u[i] = 1.0;
        v[j] = 1.0;
        OrientedPlane { u, v }
    }

    pub fn ambient(&self) -> usize {
        self.u.len()
    }

    pub fn first(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn second(&self) -> &DVector<f64> {
        &self.v
    }

    /// The same plane with reversed orientation.
    pub fn reversed(&self) -> OrientedPlane {
        OrientedPlane { u: self.v.clone(), v: self.u.clone() }
    }

    /// Distance minimized over the SO(2) frame ambiguity: the Frobenius
    /// distance of the frames after the optimal rotation, evaluated
    /// directly so nearly equal planes resolve to machine precision.
    pub fn distance_to(&self, other: &OrientedPlane) -> f64 {
        let m = Matrix2::new(
            self.u.dot(&other.u),
            self.u.dot(&other.v),
            self.v.dot(&other.u),
            self.v.dot(&other.v),
        );
        let svd = oriented_svd_2x2(&m);
        let rot = rotation2(svd.u_angle - svd.v_angle);
        // frame (u, v) rotated by rot, compared to the other frame
        let ru = &self.u * rot[(0, 0)] + &self.v * rot[(1, 0)];
        let rv = &self.u * rot[(0, 1)] + &self.v * rot[(1, 1)];
        ((ru - &other.u).norm_squared() + (rv - &other.v).norm_squared()).sqrt()
    }

    pub fn equal_to(&self, other: &OrientedPlane, tol: &Tolerance) -> bool {
        self.ambient() == other.ambient() && self.distance_to(other) <= tol.eq_abs
    }
}

/// A complex null line: a projective point of the quadric
/// `<X, X> = 0` for the standard bilinear form.
#[derive(Debug, Clone)]
pub struct NullLine {
    rep: DVector<C64>,
}

/// Standard bilinear (not Hermitian) pairing `sum_a x_a y_a`.
pub fn bilinear(x: &DVector<C64>, y: &DVector<C64>) -> C64 {
    x.dot(y)
}

impl NullLine {
    /// Canonicalizes a representative: the largest-modulus component is
    /// scaled to one with zero phase.
    pub fn new(x: DVector<C64>, tol: &Tolerance) -> Result<NullLine> {
        let norm_sq: f64 = x.iter().map(|c| c.norm_sqr()).sum();
        if norm_sq == 0.0 {
            return Err(Error::domain("null line representative must be nonzero"));
        }
        let null_residual = bilinear(&x, &x).norm();
        if null_residual > tol.eq_abs * norm_sq {
            return Err(Error::domain(format!(
                "vector is not null (residual {null_residual:.3e})"
            )));
        }
        let mut k = 0;
        let mut best = 0.0;
        for (i, c) in x.iter().enumerate() {
            if c.norm() > best {
                best = c.norm();
                k = i;
            }
        }
        let rep = &x / x[k];
        Ok(NullLine { rep })
    }

    pub fn representative(&self) -> &DVector<C64> {
        &self.rep
    }

    pub fn ambient(&self) -> usize {
        self.rep.len()
    }

    /// Projective equality through the rank of the paired representatives.
    pub fn projectively_equal(&self, other: &NullLine, tol: &Tolerance) -> bool {
        if self.ambient() != other.ambient() {
            return false;
        }
        let mut m = DMatrix::zeros(self.ambient(), 2);
        m.set_column(0, &self.rep.unscale(self.rep.norm()));
        m.set_column(1, &other.rep.unscale(other.rep.norm()));
        let sv = m.svd(false, false).singular_values;
        sv[sv.len() - 1] <= tol.eq_abs * sv[0].max(1.0)
    }
}

/// `psi(u ^ v) = C(u + i v)`.
pub fn psi(p: &OrientedPlane) -> NullLine {
    let rep = DVector::from_fn(p.ambient(), |a, _| C64::new(p.u[a], p.v[a]));
    NullLine::new(rep, &Tolerance::default()).expect("orthonormal frames give null vectors")
}

/// Frame representative `u + iv` of a plane, without canonicalization;
/// the pairing identities of the opposition test assume this scaling.
pub fn psi_rep(p: &OrientedPlane) -> DVector<C64> {
    DVector::from_fn(p.ambient(), |a, _| C64::new(p.u[a], p.v[a]))
}

/// Inverse of the identification: any null representative `p + i q` has
/// `|p| = |q|`, `p . q = 0`, and normalizes to an orthonormal frame.
pub fn psi_inv(l: &NullLine, tol: &Tolerance) -> Result<OrientedPlane> {
    psi_inv_rep(l.representative(), tol)
}

pub fn psi_inv_rep(x: &DVector<C64>, tol: &Tolerance) -> Result<OrientedPlane> {
    let re = DVector::from_fn(x.len(), |a, _| x[a].re);
    let im = DVector::from_fn(x.len(), |a, _| x[a].im);
    let nr = re.norm();
    let ni = im.norm();
    if nr == 0.0 || ni == 0.0 {
        return Err(Error::domain("null representative degenerates"));
    }
    let scale = x.iter().map(|c| c.norm_sqr()).sum::<f64>();
    if bilinear(x, x).norm() > tol.eq_abs * scale * 100.0 {
        return Err(Error::domain("vector is not null"));
    }
    OrientedPlane::new(re / nr, im / ni, &Tolerance { eq_abs: tol.eq_abs * 100.0, ..*tol })
}

/// Image of a plane under a complex orthogonal matrix, through the
/// identification.
pub fn plane_act(g: &DMatrix<C64>, p: &OrientedPlane, tol: &Tolerance) -> Result<OrientedPlane> {
    let moved = g * psi_rep(p);
    psi_inv_rep(&moved, tol)
}

/// The pair of characteristic angles of two oriented planes:
/// `0 <= alpha <= beta`, `alpha + beta <= pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicAngles {
    pub alpha: f64,
    pub beta: f64,
}

/// Characteristic angles through the rotation-valued SVD of the frame
/// overlap matrix: the ordering `s1 >= |s2|` is exactly the angle
/// constraint of the normal form.
pub fn characteristic_angles(p: &OrientedPlane, q: &OrientedPlane) -> Result<CharacteristicAngles> {
    if p.ambient() != q.ambient() {
        return Err(Error::domain("planes live in different ambient spaces"));
    }
    let m = Matrix2::new(
        p.u.dot(&q.u),
        p.u.dot(&q.v),
        p.v.dot(&q.u),
        p.v.dot(&q.v),
    );
    let svd = oriented_svd_2x2(&m);
    let alpha = svd.s1.clamp(-1.0, 1.0).acos();
    let beta = svd.s2.clamp(-1.0, 1.0).acos();
    Ok(CharacteristicAngles { alpha, beta })
}

/// Builds the normal-form witness of the angle decomposition: rotated
/// frames of `p` and `q` with diagonal overlap, plus the orthonormal
/// completion directions where they exist.
pub fn angle_frames(
    p: &OrientedPlane,
    q: &OrientedPlane,
    tol: &Tolerance,
) -> Result<(CharacteristicAngles, OrientedPlane, [Option<DVector<f64>>; 2])> {
    let m = Matrix2::new(
        p.u.dot(&q.u),
        p.u.dot(&q.v),
        p.v.dot(&q.u),
        p.v.dot(&q.v),
    );
    let svd = oriented_svd_2x2(&m);
    let ru = svd.u();
    let rv = svd.v();
    let pu = &p.u * ru[(0, 0)] + &p.v * ru[(1, 0)];
    let pv = &p.u * ru[(0, 1)] + &p.v * ru[(1, 1)];
    let qu = &q.u * rv[(0, 0)] + &q.v * rv[(1, 0)];
    let qv = &q.u * rv[(0, 1)] + &q.v * rv[(1, 1)];
    let alpha = svd.s1.clamp(-1.0, 1.0).acos();
    let beta = svd.s2.clamp(-1.0, 1.0).acos();
    let dir = |qx: &DVector<f64>, px: &DVector<f64>, cos: f64, sin: f64| {
        if sin.abs() < tol.eq_abs {
            None
        } else {
            Some((qx - px * cos) / sin)
        }
    };
    let w1 = dir(&qu, &pu, svd.s1, alpha.sin());
    let w2 = dir(&qv, &pv, svd.s2, beta.sin());
    Ok((
        CharacteristicAngles { alpha, beta },
        OrientedPlane { u: pu, v: pv },
        [w1, w2],
    ))
}

/// Opposition of oriented planes: `<X, Y> != 0` for the frame
/// representatives, cross-checked against distinctness of the
/// characteristic angles. The two criteria are tied by
/// `|<X, Y>| = |cos a - cos b|`; a contradiction outside the tolerance
/// bands is an inconsistency.
pub fn is_opposite_quadric(p: &OrientedPlane, q: &OrientedPlane, tol: &Tolerance) -> Result<bool> {
    let pairing = bilinear(&psi_rep(p), &psi_rep(q)).norm();
    let angles = characteristic_angles(p, q)?;
    let gap = angles.beta - angles.alpha;
    let by_pairing = pairing > tol.eq_abs;
    // |cos a - cos b| <= b - a always; and m >= (b - a)^2 / pi
    if pairing > 10.0 * tol.eq_abs && gap <= tol.eq_abs {
        return Err(Error::inconsistency(
            "pairing and angle-gap opposition tests disagree",
        ));
    }
    if pairing <= tol.eq_abs && gap > 10.0 * (std::f64::consts::PI * tol.eq_abs).sqrt() {
        return Err(Error::inconsistency(
            "angle gap is large while the pairing vanishes",
        ));
    }
    Ok(by_pairing)
}

/// Completes two orthogonal null lines to a basis `(X, X', Y, Y')` whose
/// Gram matrix is `diag(R, R)` with `R = [[0, 1], [1, 0]]`.
pub fn adapted_null_basis(
    x: &DVector<C64>,
    y: &DVector<C64>,
    tol: &Tolerance,
) -> Result<[DVector<C64>; 4]> {
    let nx = x.norm();
    let ny = y.norm();
    if bilinear(x, x).norm() > tol.eq_abs * nx * nx || bilinear(y, y).norm() > tol.eq_abs * ny * ny
    {
        return Err(Error::precondition("inputs must be null"));
    }
    if bilinear(x, y).norm() > tol.eq_abs * nx * ny {
        return Err(Error::precondition("inputs must pair to zero"));
    }
    // linear independence
    let mut m = DMatrix::zeros(x.len(), 2);
    m.set_column(0, &x.unscale(nx));
    m.set_column(1, &y.unscale(ny));
    let sv = m.svd(false, false).singular_values;
    if sv[1] <= tol.rank_rel * sv[0] {
        return Err(Error::precondition("null lines coincide"));
    }
    // u in x-perp with <u, y> = 1, v in y-perp with <v, x> = 1
    let find = |perp_of: &DVector<C64>, pair_with: &DVector<C64>| -> Result<DVector<C64>> {
        let z = perp_of.map(|c| c.conj());
        let z = &z / bilinear(perp_of, &z);
        let mut best: Option<(f64, DVector<C64>)> = None;
        for k in 0..perp_of.len() {
            let mut cand = DVector::zeros(perp_of.len());
            cand[k] = C64::new(1.0, 0.0);
            let u = &cand - &z * bilinear(perp_of, &cand);
            let score = bilinear(&u, pair_with).norm();
            if best.as_ref().map_or(true, |(s, _)| score > *s) {
                best = Some((score, u));
            }
        }
        let (score, u) = best.expect("nonempty ambient");
        if score <= tol.eq_abs {
            return Err(Error::inconsistency(
                "perpendicular hyperplanes coincide; the form would be degenerate",
            ));
        }
        Ok(&u / bilinear(&u, pair_with))
    };
    let u = find(x, y)?;
    let v = find(y, x)?;
    let b = -bilinear(&u, &u) / C64::new(2.0, 0.0);
    let c = -bilinear(&v, &v) / C64::new(2.0, 0.0);
    let a = -bilinear(&u, &v) / C64::new(2.0, 0.0);
    let x_prime = &v + x * c + y * a;
    let y_prime = &u + x * a + y * b;
    let basis = [x.clone(), x_prime, y.clone(), y_prime];
    // verify the Gram matrix
    let expected = [
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ];
    let scale = basis.iter().map(|w| w.norm()).fold(1.0f64, f64::max);
    for i in 0..4 {
        for j in 0..4 {
            let g = bilinear(&basis[i], &basis[j]);
            if (g - C64::new(expected[i][j], 0.0)).norm() > tol.eq_abs * scale * scale * 100.0 {
                return Err(Error::inconsistency("adapted basis Gram matrix is off"));
            }
        }
    }
    Ok(basis)
}


/// Largest modulus of the entries of a complex matrix or vector.
fn cmax<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::storage::Storage<C64, R, C>>(
    m: &nalgebra::Matrix<C64, R, C, S>,
) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn fmatrix_to_complex(m: &FMatrix) -> DMatrix<C64> {
    m.to_na_complex()
}

fn complex_to_fmatrix(m: &DMatrix<C64>) -> FMatrix {
    FMatrix::from_na_complex(m)
}

/// Infinitesimal stabilizer of a null line inside `so(N, C)`: elements with
/// `T X` proportional to `X`.
pub fn stabilizer_quadric(
    x: &NullLine,
    g: &AlgebraBasis,
    tol: &Tolerance,
) -> Result<SubalgebraRep> {
    let rep = x.representative();
    let n = rep.len();
    let z = rep.map(|c| c.conj());
    let z = &z / bilinear(rep, &z);
    let mut cond = DMatrix::zeros(2 * n, g.dim());
    for (k, e) in g.basis().iter().enumerate() {
        let em = fmatrix_to_complex(e);
        let img = &em * rep;
        let defect = &img - &(rep * bilinear(&z, &img));
        let mut col = DVector::zeros(2 * n);
        for a in 0..n {
            col[2 * a] = defect[a].re;
            col[2 * a + 1] = defect[a].im;
        }
        cond.set_column(k, &col);
    }
    let null = linalg::real_nullspace(&cond, tol.rank_rel);
    let gens: Vec<FMatrix> = (0..null.ncols())
        .map(|c| {
            let coeffs: Vec<f64> = (0..g.dim()).map(|a| null[(a, c)]).collect();
            g.combination(&coeffs).matrix().clone()
        })
        .collect();
    SubalgebraRep::new(g.tag().clone(), gens, tol)
}

/// The polar of the stabilizer, described directly: `T X = 0` and
/// `T(X_perp)` inside the line. Abelian of real dimension `2(N - 2)`.
pub fn stabilizer_polar_quadric(
    x: &NullLine,
    g: &AlgebraBasis,
    tol: &Tolerance,
) -> Result<SubalgebraRep> {
    let rep = x.representative();
    let n = rep.len();
    let z = rep.map(|c| c.conj());
    let z = &z / bilinear(rep, &z);
    // basis of X-perp: kernel of the bilinear functional <X, .>
    let mut row = DMatrix::zeros(1, n);
    for a in 0..n {
        row[(0, a)] = rep[a];
    }
    let null = linalg::complex_nullspace(&row, tol.rank_rel);
    let perp_basis: Vec<DVector<C64>> = (0..null.ncols()).map(|k| null.column(k).into_owned()).collect();
    let rows = 2 * n * perp_basis.len() + 2 * n;
    let mut cond = DMatrix::zeros(rows, g.dim());
    for (k, e) in g.basis().iter().enumerate() {
        let em = fmatrix_to_complex(e);
        let mut col = DVector::zeros(rows);
        let img = &em * rep;
        for a in 0..n {
            col[2 * a] = img[a].re;
            col[2 * a + 1] = img[a].im;
        }
        for (w_idx, w) in perp_basis.iter().enumerate() {
            let img = &em * w;
            let defect = &img - &(rep * bilinear(&z, &img));
            let base = 2 * n * (w_idx + 1);
            for a in 0..n {
                col[base + 2 * a] = defect[a].re;
                col[base + 2 * a + 1] = defect[a].im;
            }
        }
        cond.set_column(k, &col);
    }
    let null = linalg::real_nullspace(&cond, tol.rank_rel);
    let gens: Vec<FMatrix> = (0..null.ncols())
        .map(|c| {
            let coeffs: Vec<f64> = (0..g.dim()).map(|a| null[(a, c)]).collect();
            g.combination(&coeffs).matrix().clone()
        })
        .collect();
    SubalgebraRep::new(g.tag().clone(), gens, tol)
}

/// Defining data of a standard-position circle: a frame
/// `(eps1, eps2, u, v)` and angles `0 <= alpha < beta`, `alpha + beta < pi`,
/// with the derived constants of the closed form.
#[derive(Debug, Clone)]
pub struct QuadricCircleData {
    frame: [DVector<f64>; 4],
    pub alpha: f64,
    pub beta: f64,
    a: f64,
    b: f64,
    c_const: f64,
}

impl QuadricCircleData {
    pub fn new(frame: [DVector<f64>; 4], alpha: f64, beta: f64, tol: &Tolerance) -> Result<QuadricCircleData> {
        let n = frame[0].len();
        if n < 4 {
            return Err(Error::domain("quadric circles need N >= 4"));
        }
        for w in &frame {
            if w.len() != n || (w.norm() - 1.0).abs() > tol.eq_abs * 10.0 {
                return Err(Error::domain("frame vectors must be unit"));
            }
        }
        for i in 0..4 {
            for j in i + 1..4 {
                if frame[i].dot(&frame[j]).abs() > tol.eq_abs * 10.0 {
                    return Err(Error::domain("frame vectors must be orthonormal"));
                }
            }
        }
        if !(0.0..std::f64::consts::PI).contains(&alpha)
            || alpha + tol.eq_abs >= beta
            || alpha + beta + tol.eq_abs >= std::f64::consts::PI
        {
            return Err(Error::precondition(
                "angles must satisfy 0 <= alpha < beta with alpha + beta < pi",
            ));
        }
        let denom = alpha.cos() + beta.cos();
        let a = alpha.sin() / denom;
        let b = beta.sin() / denom;
        let c_const = (alpha.cos() - beta.cos()) / denom;
        Ok(QuadricCircleData { frame, alpha, beta, a, b, c_const })
    }

    /// Standard frame `(e1, e2, u, v)` with `u`, `v` coordinate directions.
    pub fn standard(ambient: usize, alpha: f64, beta: f64, u_axis: usize, v_axis: usize, tol: &Tolerance) -> Result<QuadricCircleData> {
        let e = |k: usize| {
            let mut w = DVector::zeros(ambient);
            w[k] = 1.0;
            w
        };
        QuadricCircleData::new([e(0), e(1), e(u_axis), e(v_axis)], alpha, beta, tol)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c_const(&self) -> f64 {
        self.c_const
    }

    pub fn frame(&self) -> &[DVector<f64>; 4] {
        &self.frame
    }

    pub fn base_plane(&self) -> OrientedPlane {
        OrientedPlane { u: self.frame[0].clone(), v: self.frame[1].clone() }
    }

    /// The plane the circle passes at `t = 1`.
    pub fn unit_plane(&self) -> OrientedPlane {
        let u1 = &self.frame[0] * self.alpha.cos() + &self.frame[2] * self.alpha.sin();
        let v1 = &self.frame[1] * self.beta.cos() + &self.frame[3] * self.beta.sin();
        OrientedPlane { u: u1, v: v1 }
    }
}

/// The closed-form circle of standard-position data.
#[derive(Debug, Clone)]
pub struct StandardQuadricCircle {
    data: QuadricCircleData,
}

pub fn circle_standard(data: QuadricCircleData) -> StandardQuadricCircle {
    StandardQuadricCircle { data }
}

impl StandardQuadricCircle {
    pub fn eval(&self, t: ProjParam) -> OrientedPlane {
        let d = &self.data;
        match t {
            ProjParam::Infinity => OrientedPlane {
                u: d.frame[1].clone(),
                v: d.frame[0].clone(),
            },
            ProjParam::Finite(t) => {
                let ut = &d.frame[0] * (1.0 + t * t * d.c_const) + &d.frame[2] * (2.0 * t * d.a);
                let vt = &d.frame[1] * (1.0 - t * t * d.c_const) + &d.frame[3] * (2.0 * t * d.b);
                let n = ut.norm();
                OrientedPlane { u: ut / n, v: vt / n }
            }
        }
    }

    pub fn data(&self) -> &QuadricCircleData {
        &self.data
    }
}

/// A general-position circle, evaluated through the reduced generator: the
/// stored basis maps the normal-form curve
/// `(1, -t^2 z^t z, 2 t z)` back to the ambient quadric.
#[derive(Debug, Clone)]
pub struct QuadricCircle {
    basis_cols: DMatrix<C64>,
    z: DVector<C64>,
    ztz: C64,
    tol: Tolerance,
}

impl QuadricCircle {
    pub fn eval(&self, t: ProjParam) -> OrientedPlane {
        let n = self.basis_cols.nrows();
        let mut coords = DVector::zeros(n);
        match t {
            ProjParam::Infinity => {
                coords[1] = C64::new(1.0, 0.0);
            }
            ProjParam::Finite(t) => {
                coords[0] = C64::new(1.0, 0.0);
                coords[1] = -self.ztz * C64::new(t * t, 0.0);
                for k in 0..self.z.len() {
                    coords[2 + k] = self.z[k] * C64::new(2.0 * t, 0.0);
                }
            }
        }
        let vec = &self.basis_cols * coords;
        psi_inv_rep(&vec, &self.tol).expect("curve stays on the quadric")
    }

    /// The reduced velocity vector `z`.
    pub fn reduced_z(&self) -> &DVector<C64> {
        &self.z
    }
}

/// Bilinear Gram-Schmidt for the complex symmetric form on the complement
/// of the (X, Y) pair; pivots are kept away from the isotropic cone by
/// mixing.
fn bilinear_orthonormalize(vecs: Vec<DVector<C64>>, tol: &Tolerance) -> Result<Vec<DVector<C64>>> {
    let mut work = vecs;
    let mut out: Vec<DVector<C64>> = Vec::new();
    let scale = work.iter().map(|w| w.norm()).fold(1.0f64, f64::max);
    let pivot_tol = tol.rank_rel.sqrt() * scale * scale;
    while !work.is_empty() {
        let (mut best_idx, mut best_val) = (0usize, 0.0f64);
        for (i, w) in work.iter().enumerate() {
            let v = bilinear(w, w).norm();
            if v > best_val {
                best_val = v;
                best_idx = i;
            }
        }
        if best_val <= pivot_tol {
            let mut best_pair = (0usize, 0usize, 0.0f64);
            for a in 0..work.len() {
                for b in a + 1..work.len() {
                    let v = bilinear(&work[a], &work[b]).norm();
                    if v > best_pair.2 {
                        best_pair = (a, b, v);
                    }
                }
            }
            let (a, b, v) = best_pair;
            if v <= pivot_tol {
                return Err(Error::inconsistency("degenerate complement pairing"));
            }
            let w = work[b].clone();
            work[a] += w;
            continue;
        }
        let mut c = work.remove(best_idx);
        let val = bilinear(&c, &c);
        c /= val.sqrt();
        for w in work.iter_mut() {
            let coeff = bilinear(&c, &*w);
            *w -= &c * coeff;
        }
        out.push(c);
    }
    Ok(out)
}

/// Circle through three pairwise opposite oriented planes.
///
/// Reduction: a form-preserving basis sends `psi(P0)` to the slot of
/// `e1 + i e2` and `psi(Q)` to `e1 - i e2`; the middle point then reads off
/// the reduced velocity `z`, and the curve is the nilpotent orbit
/// `(1, -t^2 z^t z, 2 t z)` mapped back.
pub fn circle_through_quadric(
    p0: &OrientedPlane,
    p1: &OrientedPlane,
    q: &OrientedPlane,
    tol: &Tolerance,
) -> Result<QuadricCircle> {
    for (a, b, name) in [(p0, p1, "p0,p1"), (p0, q, "p0,q"), (p1, q, "p1,q")] {
        if !is_opposite_quadric(a, b, tol)? {
            return Err(Error::precondition(format!("planes {name} are not opposite")));
        }
    }
    let n = p0.ambient();
    let x = psi_rep(p0);
    let yq = psi_rep(q);
    let scale = C64::new(2.0, 0.0) / bilinear(&x, &yq);
    let y = yq * scale;
    // basis of the bilinear complement of the pair
    let mut rows = DMatrix::zeros(2, n);
    for a in 0..n {
        rows[(0, a)] = x[a];
        rows[(1, a)] = y[a];
    }
    let null = linalg::complex_nullspace(&rows, tol.rank_rel);
    let raw: Vec<DVector<C64>> = (0..null.ncols()).map(|k| null.column(k).into_owned()).collect();
    let comp = bilinear_orthonormalize(raw, tol)?;
    let mut basis_cols = DMatrix::zeros(n, n);
    basis_cols.set_column(0, &x);
    basis_cols.set_column(1, &y);
    for (k, w) in comp.iter().enumerate() {
        basis_cols.set_column(2 + k, w);
    }
    // coordinates of psi(P1): c1 <X..>, c2, and the z-slots
    let w_rep = psi_rep(p1);
    let c1 = bilinear(&y, &w_rep) / C64::new(2.0, 0.0);
    if c1.norm() <= tol.eq_abs {
        return Err(Error::inconsistency("middle point pairs to zero with q"));
    }
    let w_scaled = &w_rep / c1;
    let c2 = bilinear(&x, &w_scaled) / C64::new(2.0, 0.0);
    let z = DVector::from_fn(n - 2, |k, _| bilinear(&comp[k], &w_scaled) / C64::new(2.0, 0.0));
    let ztz = bilinear(&z, &z);
    if (c2 + ztz).norm() > tol.eq_abs * w_scaled.norm().powi(2) * 100.0 {
        return Err(Error::inconsistency(
            "nullity bookkeeping failed: c2 differs from -z^t z",
        ));
    }
    if ztz.norm() < tol.eq_abs {
        return Err(Error::inconsistency(
            "reduced velocity is not prevalent (z^t z = 0)",
        ));
    }
    Ok(QuadricCircle { basis_cols, z, ztz, tol: *tol })
}

/// The matrix of the nilpotent circle generator in a null-adapted basis:
/// first basis vector maps to `2z` in the completion slots, completion
/// vectors map to `-z_k` times the second basis vector.
pub fn zb_generator(basis_cols: &DMatrix<C64>, z: &DVector<C64>, tol: &Tolerance) -> Result<FMatrix> {
    let n = basis_cols.nrows();
    if z.len() + 2 != n {
        return Err(Error::domain("reduced velocity has the wrong length"));
    }
    let mut zb = DMatrix::zeros(n, n);
    for k in 0..z.len() {
        zb[(2 + k, 0)] = z[k] * C64::new(2.0, 0.0);
        zb[(1, 2 + k)] = -z[k];
    }
    let inv = basis_cols
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::domain("adapted basis is singular"))?;
    let std = basis_cols * zb * inv;
    let f = complex_to_fmatrix(&std);
    // the generator is complex-skew
    if f.add(&f.transpose()).max_abs() > tol.eq_abs * f.max_abs().max(1.0) * 100.0 {
        return Err(Error::inconsistency("generator is not in so(N, C)"));
    }
    Ok(f)
}

/// The standard diametrical geodesic
/// `gamma_0(s) = e1 ^ (cos(2 pi s) e2 + sin(2 pi s) e4)`.
#[derive(Debug, Clone)]
pub struct Gamma0 {
    ambient: usize,
}

pub fn geodesic_gamma0(ambient: usize) -> Result<Gamma0> {
    if ambient < 4 {
        return Err(Error::domain("gamma0 needs N >= 4"));
    }
    Ok(Gamma0 { ambient })
}

impl Gamma0 {
    pub fn eval(&self, s: f64) -> OrientedPlane {
        let mut u = DVector::zeros(self.ambient);
        u[0] = 1.0;
        let mut v = DVector::zeros(self.ambient);
        let phase = 2.0 * std::f64::consts::PI * s;
        v[1] = phase.cos();
        v[3] = phase.sin();
        OrientedPlane { u, v }
    }
}

/// The conjugating element carrying the simple circle (velocity `i v`) to
/// the circle of velocity `a u + i b v`: in the null-adapted basis of the
/// frame it is `diag(1/r, r, R_sigma, I)` with `r^2 = b^2 - a^2` and
/// `a + i b = r (sinh s + i cosh s)`.
pub struct ConjugatingElement {
    pub matrix: DMatrix<C64>,
    /// the frame basis columns the block form refers to
    pub basis_cols: DMatrix<C64>,
}

pub fn conjugating_element(
    a: f64,
    b: f64,
    data: &QuadricCircleData,
    tol: &Tolerance,
) -> Result<ConjugatingElement> {
    if !(0.0 <= a && a < b) {
        return Err(Error::domain("conjugating element needs 0 <= a < b"));
    }
    let n = data.frame()[0].len();
    let r = (b * b - a * a).sqrt();
    let sigma = (a / b).atanh();
    // null-adapted basis of the frame: eps1 + i eps2, eps1 - i eps2, u, v,
    // then a real orthonormal completion
    let f = data.frame();
    let mut cols: Vec<DVector<C64>> = Vec::with_capacity(n);
    cols.push(DVector::from_fn(n, |k, _| C64::new(f[0][k], f[1][k])));
    cols.push(DVector::from_fn(n, |k, _| C64::new(f[0][k], -f[1][k])));
    cols.push(f[2].map(|x| C64::new(x, 0.0)));
    cols.push(f[3].map(|x| C64::new(x, 0.0)));
    // completion: orthonormal basis of the real orthogonal complement
    let mut frame_mat = DMatrix::zeros(n, 4);
    for (j, w) in f.iter().enumerate() {
        frame_mat.set_column(j, w);
    }
    let completion = {
        let mut proj = DMatrix::identity(n, n);
        proj -= &frame_mat * frame_mat.transpose();
        linalg::orthonormal_cols(&proj, tol.rank_rel)
    };
    for j in 0..completion.ncols() {
        cols.push(completion.column(j).map(|x| C64::new(x, 0.0)));
    }
    if cols.len() != n {
        return Err(Error::inconsistency("frame completion has the wrong size"));
    }
    let mut basis_cols = DMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        basis_cols.set_column(j, c);
    }
    let mut block = DMatrix::identity(n, n);
    block[(0, 0)] = C64::new(1.0 / r, 0.0);
    block[(1, 1)] = C64::new(r, 0.0);
    block[(2, 2)] = C64::new(sigma.cosh(), 0.0);
    block[(2, 3)] = C64::new(0.0, -sigma.sinh());
    block[(3, 2)] = C64::new(0.0, sigma.sinh());
    block[(3, 3)] = C64::new(sigma.cosh(), 0.0);
    let inv = basis_cols
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::inconsistency("adapted basis is singular"))?;
    let matrix = &basis_cols * block * inv;
    // form preservation in the standard coordinates
    let defect = matrix.transpose() * &matrix - DMatrix::identity(n, n);
    if cmax(&defect) > 1e-10 {
        return Err(Error::inconsistency(format!(
            "conjugating element is not complex-orthogonal ({:.3e})",
            cmax(&defect)
        )));
    }
    Ok(ConjugatingElement { matrix, basis_cols })
}

/// The diametrical geodesic matched to a standard-position circle:
/// `gamma(s) = O . gamma_0(s)` evaluated in the data's frame through the
/// identification.
#[derive(Debug, Clone)]
pub struct QuadricGeodesic {
    base: DVector<C64>,
    cos_dir: DVector<C64>,
    sin_dir: DVector<C64>,
    tol: Tolerance,
}

pub fn geodesic_for_data(data: &QuadricCircleData, tol: &Tolerance) -> Result<QuadricGeodesic> {
    let o = conjugating_element(data.a(), data.b(), data, tol)?;
    let f = data.frame();
    let n = f[0].len();
    let eps1 = f[0].map(|x| C64::new(x, 0.0));
    let eps2 = f[1].map(|x| C64::new(x, 0.0));
    let v = f[3].map(|x| C64::new(x, 0.0));
    let i = C64::new(0.0, 1.0);
    let base = &o.matrix * eps1;
    let cos_dir = &o.matrix * (eps2 * i);
    let sin_dir = &o.matrix * (v * i);
    let _ = n;
    Ok(QuadricGeodesic { base, cos_dir, sin_dir, tol: *tol })
}

impl QuadricGeodesic {
    pub fn eval(&self, s: f64) -> OrientedPlane {
        let phase = 2.0 * std::f64::consts::PI * s;
        let vec = &self.base + self.cos_dir.scale(phase.cos()) + self.sin_dir.scale(phase.sin());
        psi_inv_rep(&vec, &self.tol).expect("geodesic stays on the quadric")
    }
}

/// Recovers the standard-position angles from `(a, b)` by inverting the
/// cotangent system.
pub fn angles_from_ab(a: f64, b: f64) -> CharacteristicAngles {
    let c = b * b - a * a;
    let alpha = if a == 0.0 {
        0.0
    } else {
        // cot alpha = (1 + C) / (2a)
        (2.0 * a).atan2(1.0 + c)
    };
    let beta = (2.0 * b).atan2(1.0 - c);
    CharacteristicAngles { alpha, beta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rand_plane(rng: &mut impl Rng, n: usize) -> OrientedPlane {
        loop {
            let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0f64));
            let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0f64));
            if let Ok(p) = OrientedPlane::from_span(u, v, &tol()) {
                return p;
            }
        }
    }

    #[test]
    fn psi_of_coordinate_plane() {
        let p = OrientedPlane::coordinate(5, 0, 1);
        let l = psi(&p);
        let expected = DVector::from_fn(5, |k, _| {
            if k == 0 {
                C64::new(1.0, 0.0)
            } else if k == 1 {
                C64::new(0.0, 1.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let le = NullLine::new(expected, &tol()).unwrap();
        assert!(l.projectively_equal(&le, &tol()));
        // reversed orientation lands on the conjugate line
        let rev = psi(&p.reversed());
        let conj = DVector::from_fn(5, |k, _| {
            if k == 0 {
                C64::new(1.0, 0.0)
            } else if k == 1 {
                C64::new(0.0, -1.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let lc = NullLine::new(conj, &tol()).unwrap();
        assert!(rev.projectively_equal(&lc, &tol()));
        assert!(!rev.projectively_equal(&le, &tol()));
    }

    #[test]
    fn psi_round_trip() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(61);
        for n in 4..=7 {
            for _ in 0..50 {
                let p = rand_plane(&mut rng, n);
                let back = psi_inv(&psi(&p), &tol()).unwrap();
                assert!(back.equal_to(&p, &tol()), "n={n}");
            }
        }
    }

    #[test]
    fn non_null_input_rejected() {
        let x = DVector::from_fn(4, |k, _| C64::new((k + 1) as f64, 0.0));
        assert!(NullLine::new(x, &tol()).is_err());
    }

    #[test]
    fn characteristic_angle_special_pairs() {
        let p = OrientedPlane::coordinate(5, 0, 1);
        let same = characteristic_angles(&p, &p).unwrap();
        assert!(same.alpha.abs() < 1e-12 && same.beta.abs() < 1e-12);
        let rev = p.reversed();
        let a = characteristic_angles(&p, &rev).unwrap();
        assert!(a.alpha.abs() < 1e-12);
        assert!((a.beta - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn characteristic_angles_recover_construction() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(67);
        for _ in 0..500 {
            let n = rng.gen_range(4..=7);
            let p = rand_plane(&mut rng, n);
            // random completion directions orthogonal to the plane
            let w1 = {
                let raw = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0f64));
                let r = &raw - p.first() * p.first().dot(&raw) - p.second() * p.second().dot(&raw);
                if r.norm() < 1e-3 {
                    continue;
                }
                r.normalize()
            };
            let w2 = {
                let raw = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0f64));
                let r = &raw
                    - p.first() * p.first().dot(&raw)
                    - p.second() * p.second().dot(&raw)
                    - &w1 * w1.dot(&raw);
                if r.norm() < 1e-3 {
                    continue;
                }
                r.normalize()
            };
            let alpha = rng.gen_range(0.05..1.2f64);
            let beta = rng.gen_range(alpha + 0.05..(std::f64::consts::PI - alpha - 0.02).min(2.6));
            let q = OrientedPlane::new(
                p.first() * alpha.cos() + &w1 * alpha.sin(),
                p.second() * beta.cos() + &w2 * beta.sin(),
                &tol(),
            )
            .unwrap();
            let got = characteristic_angles(&p, &q).unwrap();
            assert!((got.alpha - alpha).abs() < 1e-9, "alpha {} vs {}", got.alpha, alpha);
            assert!((got.beta - beta).abs() < 1e-9, "beta {} vs {}", got.beta, beta);
        }
    }

    #[test]
    fn opposite_tests_and_pairing_identity() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(71);
        let p = OrientedPlane::coordinate(5, 0, 1);
        assert!(is_opposite_quadric(&p, &p.reversed(), &tol()).unwrap());
        assert!(!is_opposite_quadric(&p, &p, &tol()).unwrap());
        for _ in 0..500 {
            let n = rng.gen_range(4..=7);
            let a = rand_plane(&mut rng, n);
            let b = rand_plane(&mut rng, n);
            let angles = characteristic_angles(&a, &b).unwrap();
            let pairing = bilinear(&psi_rep(&a), &psi_rep(&b)).norm();
            let expected = (angles.alpha.cos() - angles.beta.cos()).abs();
            assert!((pairing - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn adapted_null_basis_example() {
        let x = DVector::from_fn(5, |k, _| match k {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        });
        let y = DVector::from_fn(5, |k, _| match k {
            2 => C64::new(1.0, 0.0),
            3 => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        });
        let basis = adapted_null_basis(&x, &y, &tol()).unwrap();
        for w in [&basis[1], &basis[3]] {
            assert!(bilinear(w, w).norm() < 1e-10);
        }
        // the pair (X, Y) with nonzero pairing violates the precondition
        let bad = DVector::from_fn(5, |k, _| match k {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, -1.0),
            _ => C64::new(0.0, 0.0),
        });
        assert!(matches!(
            adapted_null_basis(&x, &bad, &tol()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn stabilizer_polar_shape() {
        for n in 4..=6 {
            let g = AlgebraBasis::so_complex(n);
            let p = OrientedPlane::coordinate(n, 0, 1);
            let x = psi(&p);
            let polar = stabilizer_polar_quadric(&x, &g, &tol()).unwrap();
            assert_eq!(polar.dim(), 2 * (n - 2));
            // abelian
            for (i, a) in polar.gens().iter().enumerate() {
                for b in polar.gens().iter().skip(i) {
                    assert!(crate::algebra::bracket_mat(a, b).max_abs() < 1e-8);
                }
            }
            // agreement with the trace-form polar of the stabilizer
            let stab = stabilizer_quadric(&x, &g, &tol()).unwrap();
            let pol = crate::algebra::polar(&stab, &g, &tol());
            assert_eq!(pol.dim(), polar.dim());
            for gen in polar.gens() {
                assert!(pol.contains_mat(gen, 1e-8));
            }
            // height one
            assert!(crate::algebra::is_height_one_parabolic(&stab, &g, &tol()));
        }
    }

    #[test]
    fn zb_form_of_polar_elements() {
        // in the basis (e1 + i e2, e1 - i e2, e3, ..), polar elements of the
        // stabilizer of the line C(e1 - i e2) have the sparse normal form:
        // first column carries 2z in the completion slots and the second
        // row carries -z^t
        let n = 5;
        let g = AlgebraBasis::so_complex(n);
        let p = OrientedPlane::coordinate(n, 0, 1);
        let x = psi(&p.reversed());
        let polar = stabilizer_polar_quadric(&x, &g, &tol()).unwrap();
        // adapted basis columns: X, Y = e1 - i e2 (scaled to pairing 2), e3..
        let mut cols = DMatrix::zeros(n, n);
        cols.set_column(0, &DVector::from_fn(n, |k, _| match k {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            _ => C64::new(0.0, 0.0),
        }));
        cols.set_column(1, &DVector::from_fn(n, |k, _| match k {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, -1.0),
            _ => C64::new(0.0, 0.0),
        }));
        for k in 2..n {
            cols.set_column(k, &DVector::from_fn(n, |a, _| {
                if a == k {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
        }
        let inv = cols.clone().try_inverse().unwrap();
        for gen in polar.gens() {
            let m = &inv * fmatrix_to_complex(gen) * &cols;
            for i in 0..n {
                for j in 0..n {
                    let allowed = (i >= 2 && j == 0) || (i == 1 && j >= 2);
                    if !allowed {
                        assert!(m[(i, j)].norm() < 1e-8, "entry ({i},{j}) = {}", m[(i, j)]);
                    }
                }
            }
            // row and column entries are tied: col = 2z, row = -z^t
            for k in 2..n {
                let col = m[(k, 0)];
                let row = m[(1, k)];
                assert!((col + row * 2.0).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn circle_standard_simple_form() {
        // alpha = 0, beta = pi/2 gives c(t) = e1 ^ ((1-t^2) e2 + 2t e4)/(1+t^2)
        let data = QuadricCircleData::standard(5, 0.0, std::f64::consts::FRAC_PI_2, 2, 3, &tol()).unwrap();
        assert!((data.a() - 0.0).abs() < 1e-15);
        assert!((data.b() - 1.0).abs() < 1e-15);
        assert!((data.c_const() - 1.0).abs() < 1e-15);
        let c = circle_standard(data);
        for t in [-2.0, -0.5, 0.0, 0.3, 1.0, 4.0] {
            let got = c.eval(ProjParam::Finite(t));
            let denom = 1.0 + t * t;
            let mut v = DVector::zeros(5);
            v[1] = (1.0 - t * t) / denom;
            v[3] = 2.0 * t / denom;
            let mut e1 = DVector::zeros(5);
            e1[0] = 1.0;
            let expected = OrientedPlane::new(e1, v.normalize(), &tol()).unwrap();
            assert!(got.equal_to(&expected, &tol()), "t={t}");
        }
    }

    #[test]
    fn circle_standard_consistency() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(73);
        for _ in 0..100 {
            let alpha = rng.gen_range(0.0..1.0f64);
            let beta = rng.gen_range(alpha + 0.1..(std::f64::consts::PI - alpha - 0.05).min(2.8));
            let data = QuadricCircleData::standard(6, alpha, beta, 2, 3, &tol()).unwrap();
            // (ABC) identity C = b^2 - a^2
            assert!((data.c_const() - (data.b().powi(2) - data.a().powi(2))).abs() < 1e-12);
            // cot system at the solution
            if alpha > 1e-6 {
                let cot_alpha = (1.0 + data.c_const()) / (2.0 * data.a());
                assert!((cot_alpha - alpha.cos() / alpha.sin()).abs() < 1e-9);
            }
            let cot_beta = (1.0 - data.c_const()) / (2.0 * data.b());
            assert!((cot_beta - beta.cos() / beta.sin()).abs() < 1e-9);
            let c = circle_standard(data.clone());
            // defining points
            assert!(c.eval(ProjParam::Finite(0.0)).equal_to(&data.base_plane(), &tol()));
            assert!(c
                .eval(ProjParam::Infinity)
                .equal_to(&data.base_plane().reversed(), &tol()));
            let p1 = c.eval(ProjParam::Finite(1.0));
            assert!(p1.equal_to(&data.unit_plane(), &tol()));
            // c(1) has the prescribed angles against the base plane
            let angles = characteristic_angles(&data.base_plane(), &p1).unwrap();
            assert!((angles.alpha - alpha).abs() < 1e-9);
            assert!((angles.beta - beta).abs() < 1e-9);
        }
    }

    #[test]
    fn general_circle_matches_standard_form() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(79);
        for _ in 0..200 {
            let n = rng.gen_range(4..=7);
            let alpha = rng.gen_range(0.02..0.9f64);
            let beta = rng.gen_range(alpha + 0.1..(std::f64::consts::PI - alpha - 0.05).min(2.6));
            let data = QuadricCircleData::standard(n, alpha, beta, 2, 3, &tol()).unwrap();
            let c_std = circle_standard(data.clone());
            let c_gen = circle_through_quadric(
                &data.base_plane(),
                &data.unit_plane(),
                &data.base_plane().reversed(),
                &tol(),
            )
            .unwrap();
            for t in [-3.0, -1.0, -0.4, 0.0, 0.4, 1.0, 3.0] {
                let lhs = c_std.eval(ProjParam::Finite(t));
                let rhs = c_gen.eval(ProjParam::Finite(t));
                assert!(lhs.equal_to(&rhs, &tol()), "t={t} d={}", lhs.distance_to(&rhs));
            }
            assert!(c_gen
                .eval(ProjParam::Infinity)
                .equal_to(&data.base_plane().reversed(), &tol()));
        }
    }

    #[test]
    fn simple_triple_gives_csimple() {
        // circle through e1^e2, e1^e4, e2^e1
        let p0 = OrientedPlane::coordinate(5, 0, 1);
        let p1 = OrientedPlane::coordinate(5, 0, 3);
        let q = p0.reversed();
        let c = circle_through_quadric(&p0, &p1, &q, &tol()).unwrap();
        for t in [-2.0, -1.0, 0.0, 0.5, 1.0, 2.0] {
            let denom = 1.0 + t * t;
            let mut v = DVector::zeros(5);
            v[1] = (1.0 - t * t) / denom;
            v[3] = 2.0 * t / denom;
            let mut e1 = DVector::zeros(5);
            e1[0] = 1.0;
            let expected = OrientedPlane::new(e1, v.normalize(), &tol()).unwrap();
            assert!(c.eval(ProjParam::Finite(t)).equal_to(&expected, &tol()), "t={t}");
        }
        // c(-1) is opposite to all three defining points
        let cm1 = c.eval(ProjParam::Finite(-1.0));
        for other in [&p0, &p1, &q] {
            assert!(is_opposite_quadric(&cm1, other, &tol()).unwrap());
        }
    }

    #[test]
    fn gamma0_matches_csimple() {
        for n in 4..=7 {
            let geo = geodesic_gamma0(n).unwrap();
            let p0 = OrientedPlane::coordinate(n, 0, 1);
            assert!(geo.eval(0.0).equal_to(&p0, &tol()));
            assert!(geo.eval(0.5).equal_to(&p0.reversed(), &tol()));
            // period 1
            assert!(geo.eval(0.37).equal_to(&geo.eval(1.37), &tol()));
            let data = QuadricCircleData::standard(n, 0.0, std::f64::consts::FRAC_PI_2, 2, 3, &tol()).unwrap();
            let c = circle_standard(data);
            for k in 0..50 {
                let s = k as f64 / 50.0;
                let lhs = geo.eval(s);
                let rhs = c.eval(ProjParam::tan_pi(s));
                assert!(lhs.distance_to(&rhs) < 1e-9, "n={n} s={s}");
            }
        }
    }

    #[test]
    fn conjugating_element_properties() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(83);
        // a = 0, b = 1 gives the identity
        let data0 = QuadricCircleData::standard(5, 0.0, std::f64::consts::FRAC_PI_2, 2, 3, &tol()).unwrap();
        let o0 = conjugating_element(0.0, 1.0, &data0, &tol()).unwrap();
        assert!(cmax(&(&o0.matrix - DMatrix::<C64>::identity(5, 5))) < 1e-12);
        for _ in 0..100 {
            let n = rng.gen_range(4..=7);
            let a = rng.gen_range(0.0..0.8f64);
            let b = rng.gen_range(a + 0.15..a + 1.2);
            let angles = angles_from_ab(a, b);
            let data =
                QuadricCircleData::standard(n, angles.alpha, angles.beta, 2, 3, &tol()).unwrap();
            assert!((data.a() - a).abs() < 1e-10, "a {} vs {}", data.a(), a);
            assert!((data.b() - b).abs() < 1e-10);
            let o = conjugating_element(a, b, &data, &tol()).unwrap();
            // form preservation is verified inside; double check the residual
            let defect = o.matrix.transpose() * &o.matrix - DMatrix::<C64>::identity(n, n);
            assert!(cmax(&defect) < 1e-10);
            // c(t) = O . c0(t) for the simple circle in the same frame
            let simple =
                QuadricCircleData::standard(n, 0.0, std::f64::consts::FRAC_PI_2, 2, 3, &tol()).unwrap();
            let c0 = circle_standard(simple);
            let c = circle_standard(data.clone());
            for k in 0..20 {
                let s = -0.45 + 0.9 * k as f64 / 19.0;
                let t = ProjParam::tan_pi(s);
                let lhs = plane_act(&o.matrix, &c0.eval(t), &tol()).unwrap();
                let rhs = c.eval(t);
                assert!(lhs.equal_to(&rhs, &tol()), "a={a} b={b} s={s} d={}",
                    lhs.distance_to(&rhs));
            }
            // Ad(O) carries the simple generator to the (a u + i b v) one
            let z_simple = DVector::from_fn(n - 2, |k, _| {
                if k == 1 {
                    C64::new(0.0, 1.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let z_target = DVector::from_fn(n - 2, |k, _| match k {
                0 => C64::new(a, 0.0),
                1 => C64::new(0.0, b),
                _ => C64::new(0.0, 0.0),
            });
            let z0 = zb_generator(&o.basis_cols, &z_simple, &tol()).unwrap();
            let zt = zb_generator(&o.basis_cols, &z_target, &tol()).unwrap();
            let o_f = complex_to_fmatrix(&o.matrix);
            let conjugated = o_f
                .mul(&z0)
                .mul(&complex_to_fmatrix(&o.matrix.clone().try_inverse().unwrap()));
            assert!(conjugated.approx_eq(&zt, 1e-9));
        }
        // invalid parameter ordering
        let bad = conjugating_element(1.0, 0.5, &data0, &tol());
        assert!(matches!(bad, Err(Error::Domain(_))));
    }

    #[test]
    fn geodesic_for_data_matches_circle() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(89);
        for _ in 0..50 {
            let n = rng.gen_range(4..=7);
            let alpha = rng.gen_range(0.05..0.9f64);
            let beta = rng.gen_range(alpha + 0.1..(std::f64::consts::PI - alpha - 0.05).min(2.5));
            let data = QuadricCircleData::standard(n, alpha, beta, 2, 3, &tol()).unwrap();
            let c = circle_standard(data.clone());
            let geo = geodesic_for_data(&data, &tol()).unwrap();
            for k in 0..50 {
                let s = k as f64 / 50.0;
                let lhs = geo.eval(s);
                let rhs = c.eval(ProjParam::tan_pi(s));
                assert!(lhs.distance_to(&rhs) < 1e-8, "s={s} d={}", lhs.distance_to(&rhs));
            }
        }
    }

    #[test]
    fn nilpotent_generator_closed_form() {
        // exp(tZ) for the normal-form generator has the closed block shape
        let n = 6;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(97);
        let p0 = OrientedPlane::coordinate(n, 0, 1);
        let q = p0.reversed();
        let x = psi_rep(&p0);
        let y = psi_rep(&q);
        let scale = C64::new(2.0, 0.0) / bilinear(&x, &y);
        let y = y * scale;
        let mut cols = DMatrix::zeros(n, n);
        cols.set_column(0, &x);
        cols.set_column(1, &y);
        for k in 2..n {
            cols.set_column(k, &DVector::from_fn(n, |a, _| {
                if a == k {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }));
        }
        let z = DVector::from_fn(n - 2, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let zmat = zb_generator(&cols, &z, &tol()).unwrap();
        for t in [-1.5, 0.3, 2.0] {
            let expt = crate::algebra::exp_nilpotent(&zmat.scale_real(t)).unwrap();
            // compare against the closed form in the adapted basis
            let inv = cols.clone().try_inverse().unwrap();
            let reduced = &inv * fmatrix_to_complex(&expt) * &cols;
            let ztz = bilinear(&z, &z);
            for i in 0..n {
                for j in 0..n {
                    let expected = if i == j {
                        C64::new(1.0, 0.0)
                    } else if i == 1 && j == 0 {
                        -ztz * t * t
                    } else if i >= 2 && j == 0 {
                        z[i - 2] * 2.0 * t
                    } else if i == 1 && j >= 2 {
                        -z[j - 2] * t
                    } else {
                        C64::new(0.0, 0.0)
                    };
                    assert!(
                        (reduced[(i, j)] - expected).norm() < 1e-12,
                        "t={t} entry ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn equivariance_under_complex_rotations() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(101);
        let n = 5;
        let g_alg = AlgebraBasis::so_complex(n);
        for _ in 0..10 {
            let alpha = rng.gen_range(0.05..0.8f64);
            let beta = rng.gen_range(alpha + 0.15..2.2f64.min(std::f64::consts::PI - alpha - 0.1));
            let data = QuadricCircleData::standard(n, alpha, beta, 2, 3, &tol()).unwrap();
            let c = circle_standard(data.clone());
            let coeffs: Vec<f64> = (0..g_alg.dim()).map(|_| rng.gen_range(-0.2..0.2)).collect();
            let g = fmatrix_to_complex(&g_alg.combination(&coeffs).matrix().exp_series());
            let gp0 = plane_act(&g, &data.base_plane(), &tol()).unwrap();
            let gp1 = plane_act(&g, &data.unit_plane(), &tol()).unwrap();
            let gq = plane_act(&g, &data.base_plane().reversed(), &tol()).unwrap();
            let gc = circle_through_quadric(&gp0, &gp1, &gq, &tol()).unwrap();
            for k in 0..20 {
                let s = -0.44 + 0.88 * k as f64 / 19.0;
                let t = ProjParam::tan_pi(s);
                let lhs = plane_act(&g, &c.eval(t), &tol()).unwrap();
                let rhs = gc.eval(t);
                assert!(lhs.equal_to(&rhs, &tol()), "s={s} d={}", lhs.distance_to(&rhs));
            }
        }
    }
}
