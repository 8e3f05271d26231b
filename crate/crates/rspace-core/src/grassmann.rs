//! Split standard Grassmannians `Gr_n(F^{2n})` over `R`, `C` and `H`:
//! opposition tests, circles through a connecting isomorphism `T` and the
//! geodesic of the metric that makes `{u_i, T u_i}` orthonormal.

use crate::algebra::{AlgebraBasis, SubalgebraRep};
use crate::curve::ProjParam;
use crate::error::{Error, Result};
use crate::linalg::{self, Tolerance};
use crate::matrix::FMatrix;
use crate::scalar::{Field, Quat};
use nalgebra::{DMatrix, DVector};

/// A `k`-dimensional subspace of `F^m`, stored through an orthonormalized
/// basis matrix. Two points are equal exactly when their concatenated bases
/// have rank `k`.
#[derive(Debug, Clone)]
pub struct SubspacePoint {
    basis: FMatrix,
}

impl SubspacePoint {
    pub fn new(basis: FMatrix, tol: &Tolerance) -> Result<SubspacePoint> {
        if basis.cols() == 0 || basis.cols() > basis.rows() {
            return Err(Error::domain("subspace basis must have 1..=m columns"));
        }
        let ortho = basis.orthonormalize_columns(tol.rank_rel);
        if ortho.cols() != basis.cols() {
            return Err(Error::domain("subspace basis columns are linearly dependent"));
        }
        Ok(SubspacePoint { basis: ortho })
    }

    /// The span of coordinate vectors `start..start + k`.
    pub fn coordinate(field: Field, ambient: usize, start: usize, k: usize) -> SubspacePoint {
        let mut m = FMatrix::zeros(field, ambient, k);
        for i in 0..k {
            m.set(start + i, i, Quat::ONE);
        }
        SubspacePoint { basis: m }
    }

    pub fn field(&self) -> Field {
        self.basis.field()
    }

    pub fn ambient(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &FMatrix {
        &self.basis
    }

    pub fn equal_to(&self, other: &SubspacePoint, tol: &Tolerance) -> bool {
        self.dim() == other.dim() && self.distance_to(other) <= tol.eq_abs
    }

    /// Largest principal angle to `other`, computed through its sine
    /// (`sigma_max` of `(I - A A^H) B`), which stays accurate for nearly
    /// equal subspaces where the cosine route saturates.
    pub fn distance_to(&self, other: &SubspacePoint) -> f64 {
        let a = &self.basis;
        let b = &other.basis;
        let residual = b.sub(&a.mul(&a.adjoint().mul(b)));
        let sines = linalg::singular_values(&residual);
        sines.first().copied().unwrap_or(0.0).clamp(0.0, 1.0).asin()
    }

    /// Image under an invertible ambient matrix.
    pub fn act(&self, g: &FMatrix, tol: &Tolerance) -> SubspacePoint {
        SubspacePoint { basis: g.mul(&self.basis).orthonormalize_columns(tol.rank_rel) }
    }
}

/// Cosines of the principal angles between the spans of two orthonormal
/// bases, descending. Over `H` the paired singular values of the embedding
/// are deduplicated.
pub fn principal_cosines(a: &FMatrix, b: &FMatrix) -> Vec<f64> {
    let cross = a.adjoint().mul(b);
    linalg::singular_values(&cross)
        .into_iter()
        .map(|s| s.clamp(0.0, 1.0))
        .collect()
}

/// The l2 norm of the principal angle vector: the geodesic distance of the
/// canonical invariant metric when the bases are orthonormal for it.
pub fn principal_angle_distance(a: &FMatrix, b: &FMatrix) -> f64 {
    principal_cosines(a, b)
        .iter()
        .map(|c| c.acos().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Opposition of two subspaces: trivial intersection, tested as full rank
/// of the concatenated bases.
pub fn is_opposite_gr(p: &SubspacePoint, q: &SubspacePoint, tol: &Tolerance) -> Result<bool> {
    if p.field() != q.field() || p.ambient() != q.ambient() {
        return Err(Error::domain("subspaces live in different ambient spaces"));
    }
    let cat = p.basis().hcat(q.basis());
    Ok(linalg::rank_of(&cat, tol) == p.dim() + q.dim())
}

fn require_opposite(
    pairs: &[(&SubspacePoint, &SubspacePoint, &str)],
    tol: &Tolerance,
) -> Result<()> {
    for (a, b, name) in pairs {
        if !is_opposite_gr(a, b, tol)? {
            return Err(Error::precondition(format!("points {name} are not opposite")));
        }
    }
    Ok(())
}

/// The connecting isomorphism `T: P -> Q` of a circle, plus the splitting
/// data it was computed in.
#[derive(Debug, Clone)]
pub struct ConnectingIso {
    p: SubspacePoint,
    q: SubspacePoint,
    /// matrix of `T` from the stored basis of `P` to the stored basis of `Q`
    t_mat: FMatrix,
    /// ambient images `T u_i`, one column per basis vector of `P`
    t_cols: FMatrix,
}

impl ConnectingIso {
    /// Builds the isomorphism sending the stored basis of `P` to the given
    /// ambient image columns, checking the images span `Q`.
    pub fn from_images(
        p: &SubspacePoint,
        q: &SubspacePoint,
        t_cols: FMatrix,
        tol: &Tolerance,
    ) -> Result<ConnectingIso> {
        let t_mat = q.basis().adjoint().mul(&t_cols);
        let residual = q.basis().mul(&t_mat).sub(&t_cols).max_abs();
        if residual > tol.eq_abs * t_cols.max_abs().max(1.0) * 10.0 {
            return Err(Error::domain("images of T do not lie in Q"));
        }
        if linalg::rank_of(&t_mat, tol) != p.dim() {
            return Err(Error::domain("connecting map T is singular"));
        }
        Ok(ConnectingIso { p: p.clone(), q: q.clone(), t_mat, t_cols })
    }

    pub fn domain(&self) -> &SubspacePoint {
        &self.p
    }

    pub fn codomain(&self) -> &SubspacePoint {
        &self.q
    }

    pub fn matrix(&self) -> &FMatrix {
        &self.t_mat
    }

    pub fn image_columns(&self) -> &FMatrix {
        &self.t_cols
    }

    /// The ambient block matrix equal to `T` on `P` and zero on `Q`; it lies
    /// in the polar of the stabilizer of `Q` inside `sl(2n, F)`.
    pub fn ambient_block(&self, tol: &Tolerance) -> Result<FMatrix> {
        let e = self.p.basis().hcat(self.q.basis());
        let e_inv = e.inverse(tol.rank_rel)?;
        // maps P-coordinates to T-images, kills Q-coordinates
        let n = self.p.dim();
        let filter = FMatrix::from_fn(self.p.field(), 2 * n, 2 * n, |i, j| {
            if i == j && i < n {
                Quat::ONE
            } else {
                Quat::ZERO
            }
        });
        let images = self.t_cols.hcat(&FMatrix::zeros(self.p.field(), 2 * n, n));
        Ok(images.mul(&filter).mul(&e_inv))
    }
}

/// A circle in the Grassmannian: `c(t) = {x + t T(x) | x in P}`,
/// `c(inf) = Q`.
#[derive(Debug, Clone)]
pub struct GrassmannCircle {
    base: FMatrix,
    t_cols: FMatrix,
    q: SubspacePoint,
    tol: Tolerance,
}

impl GrassmannCircle {
    pub fn eval(&self, t: ProjParam) -> SubspacePoint {
        match t {
            ProjParam::Infinity => self.q.clone(),
            ProjParam::Finite(t) => {
                let cols = self.base.add(&self.t_cols.scale_real(t));
                SubspacePoint { basis: cols.orthonormalize_columns(self.tol.rank_rel) }
            }
        }
    }
}

/// A geodesic `gamma(s) = span{cos(pi s) u_i + sin(pi s) T(u_i)}`, periodic
/// with period 1 as a curve of unoriented subspaces.
#[derive(Debug, Clone)]
pub struct GrassmannGeodesic {
    base: FMatrix,
    t_cols: FMatrix,
    tol: Tolerance,
}

impl GrassmannGeodesic {
    pub fn eval(&self, s: f64) -> SubspacePoint {
        let (sin, cos) = (std::f64::consts::PI * s).sin_cos();
        let cols = self.base.scale_real(cos).add(&self.t_cols.scale_real(sin));
        SubspacePoint { basis: cols.orthonormalize_columns(self.tol.rank_rel) }
    }
}

/// Circle through three pairwise opposite points of `Gr_n(F^{2n})`.
///
/// `T` is solved from the block decomposition of a basis of `P1` in the
/// splitting `F^{2n} = P + Q`.
pub fn circle_through_gr(
    p: &SubspacePoint,
    p1: &SubspacePoint,
    q: &SubspacePoint,
    tol: &Tolerance,
) -> Result<(ConnectingIso, GrassmannCircle)> {
    if p.ambient() != 2 * p.dim() {
        return Err(Error::domain(
            "circles need the self-dual Grassmannian of half-dimensional subspaces",
        ));
    }
    require_opposite(&[(p, p1, "p0,p1"), (p, q, "p0,q"), (p1, q, "p1,q")], tol)?;
    let splitting = p.basis().hcat(q.basis());
    let coords = splitting.solve_left(p1.basis(), tol.rank_rel)?;
    let n = p.dim();
    let a = FMatrix::from_fn(p.field(), n, n, |i, j| coords.get(i, j));
    let b = FMatrix::from_fn(p.field(), n, n, |i, j| coords.get(n + i, j));
    let t_mat = b.mul(&a.inverse(tol.rank_rel).map_err(|_| {
        Error::inconsistency("P-component of an opposite point is singular")
    })?);
    let t_cols = q.basis().mul(&t_mat);
    let iso = ConnectingIso {
        p: p.clone(),
        q: q.clone(),
        t_mat,
        t_cols: t_cols.clone(),
    };
    let circle = GrassmannCircle {
        base: p.basis().clone(),
        t_cols,
        q: q.clone(),
        tol: *tol,
    };
    Ok((iso, circle))
}

/// The geodesic matched to the circle of `T` under `t = tan(pi s)`.
pub fn geodesic_gr(iso: &ConnectingIso) -> GrassmannGeodesic {
    GrassmannGeodesic {
        base: iso.p.basis().clone(),
        t_cols: iso.t_cols.clone(),
        tol: Tolerance::default(),
    }
}

/// Gram matrix of the inner product on `F^{2n}` making
/// `{u_1..u_n, T u_1..T u_n}` orthonormal: `G = (E sigma(E)^T)^{-1}` for
/// `E = [U | TU]`.
pub fn invariant_metric_gram(iso: &ConnectingIso, tol: &Tolerance) -> Result<FMatrix> {
    let e = iso.p.basis().hcat(&iso.t_cols);
    let g = e.mul(&e.adjoint()).inverse(tol.rank_rel)?;
    Ok(g)
}

/// Principal angles of two subspaces measured in the metric whose
/// orthonormal frame is the column basis `E`; used to probe constant speed
/// and additivity along geodesics by finite differences.
pub fn angles_in_frame(
    e_inv: &FMatrix,
    a: &SubspacePoint,
    b: &SubspacePoint,
    tol: &Tolerance,
) -> f64 {
    let ta = e_inv.mul(a.basis()).orthonormalize_columns(tol.rank_rel);
    let tb = e_inv.mul(b.basis()).orthonormalize_columns(tol.rank_rel);
    principal_angle_distance(&ta, &tb)
}

/// Infinitesimal stabilizer of a subspace inside a matrix algebra: the
/// elements with `X P <= P`, cut out by the projector condition
/// `(I - Pi) X U = 0`.
pub fn stabilizer_subalgebra(
    point_basis: &FMatrix,
    g: &AlgebraBasis,
    tol: &Tolerance,
) -> Result<SubalgebraRep> {
    let u = point_basis;
    let proj = u.mul(&u.adjoint());
    let eye = FMatrix::identity(u.field(), u.rows());
    let co_proj = eye.sub(&proj);
    let cond_rows = u.rows() * u.cols() * u.field().real_dim();
    let mut cond = DMatrix::zeros(cond_rows, g.dim());
    for (k, e) in g.basis().iter().enumerate() {
        let defect = co_proj.mul(&e.mul(u));
        cond.set_column(k, &DVector::from_vec(defect.flatten_real()));
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
