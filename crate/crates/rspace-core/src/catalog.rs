//! Model catalog: identifiers, the canonical JSON point encoding, seeded
//! generators and uniform dispatch into the per-model circle and geodesic
//! constructors.
//!
//! # Invariant trace form vs. Killing form
//!
//! All polar and orthogonality computations use `trace_form`, the invariant
//! real form `Re tr(XY)` (over `H`: the trace of the complex embedding).
//! On each simple algebra in scope it is proportional to the Killing form
//! `B(X, Y) = tr(ad_X ad_Y)`, so polars and orthogonality predicates are
//! unchanged. The constants `B = c * trace_form`:
//!
//! | algebra                  | c              |
//! |--------------------------|----------------|
//! | `sl(m, R)`               | `2m`           |
//! | `sl(m, C)` as real       | `4m`           |
//! | `sl(m, H)` (`su*(2m)`)   | `4m`           |
//! | `so(N, C)` as real       | `2(N - 2)`     |
//! | `o(n, n)`                | `2n - 2`       |
//! | `sp(2n, R)`              | `2n + 2`       |
//! | `sp(2n, C)` as real      | `2(2n + 2)`    |
//! | `u(n, n)`                | `4n` on the traceless part; degenerate on the center |
//! | `sp(n, n)`               | `2n + 1` in embedded-trace units |
//! | `so*(2n)` (`H`-skew)     | `2n - 2` in embedded-trace units |
//!
//! The proportionality (not the constants) is what the predicates rely on;
//! it is asserted by the property tests.

use crate::algebra::{AlgebraBasis, SubalgebraRep};
use crate::classical::{self, ClassicalGroup, ClassicalGroupElement};
use crate::curve::ProjParam;
use crate::error::{Error, Result};
use crate::grassmann::{self, SubspacePoint};
use crate::isotropic::{self, FormFamily, IsotropicSubspace, SplitForm};
use crate::linalg::Tolerance;
use crate::matrix::{C64, FMatrix};
use crate::quadric::{self, OrientedPlane};
use crate::scalar::{Field, Quat};
use crate::sphere::{self, GreatCircle, SphereCircle, SpherePoint};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Identifier of a concrete model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    Sphere,
    Grassmann(Field),
    Isotropic(FormFamily),
    Quadric,
    Classical(ClassicalGroup),
}

impl ModelId {
    pub const ALL: [ModelId; 15] = [
        ModelId::Sphere,
        ModelId::Grassmann(Field::R),
        ModelId::Grassmann(Field::C),
        ModelId::Grassmann(Field::H),
        ModelId::Isotropic(FormFamily::ComplexSymmetric),
        ModelId::Isotropic(FormFamily::RealSymplectic),
        ModelId::Isotropic(FormFamily::ComplexSymplectic),
        ModelId::Isotropic(FormFamily::RealSplitHermitian),
        ModelId::Isotropic(FormFamily::ComplexSplitHermitian),
        ModelId::Isotropic(FormFamily::QuaternionSplitHermitian),
        ModelId::Isotropic(FormFamily::QuaternionSkewHermitian),
        ModelId::Quadric,
        ModelId::Classical(ClassicalGroup::SpecialOrthogonal),
        ModelId::Classical(ClassicalGroup::Unitary),
        ModelId::Classical(ClassicalGroup::CompactSymplectic),
    ];

    pub fn name(&self) -> String {
        match self {
            ModelId::Sphere => "sphere".into(),
            ModelId::Grassmann(f) => format!("grassmann-{}", f.name().to_lowercase()),
            ModelId::Isotropic(fam) => format!("iso-{}", fam.name()),
            ModelId::Quadric => "quadric".into(),
            ModelId::Classical(g) => format!("classical-{}", g.name()),
        }
    }

    pub fn parse(s: &str) -> Result<ModelId> {
        for m in ModelId::ALL {
            if m.name() == s {
                return Ok(m);
            }
        }
        Err(Error::domain(format!(
            "unknown model '{s}'; expected one of {}",
            ModelId::ALL.map(|m| m.name()).join(", ")
        )))
    }
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

/// A point of one of the models.
#[derive(Debug, Clone)]
pub enum ModelPoint {
    Sphere(SpherePoint),
    Subspace(SubspacePoint),
    Isotropic(IsotropicSubspace),
    Plane(OrientedPlane),
    Group(ClassicalGroupElement),
}

impl ModelPoint {
    /// Gauge-invariant distance inside the model.
    pub fn distance_to(&self, other: &ModelPoint) -> Result<f64> {
        match (self, other) {
            (ModelPoint::Sphere(a), ModelPoint::Sphere(b)) => Ok(a.distance_to(b)),
            (ModelPoint::Subspace(a), ModelPoint::Subspace(b)) => Ok(a.distance_to(b)),
            (ModelPoint::Isotropic(a), ModelPoint::Isotropic(b)) => {
                Ok(a.point().distance_to(b.point()))
            }
            (ModelPoint::Plane(a), ModelPoint::Plane(b)) => Ok(a.distance_to(b)),
            (ModelPoint::Group(a), ModelPoint::Group(b)) => Ok(a.distance_to(b)),
            _ => Err(Error::domain("points belong to different models")),
        }
    }
}

// ---------------------------------------------------------------------------
// Canonical JSON encoding.
// ---------------------------------------------------------------------------

/// Serialized form of a model point. Matrices and bases are column-major;
/// each scalar entry is the component list of its field (1, 2 or 4 reals).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PointSpec {
    Sphere {
        vector: Vec<f64>,
    },
    Subspace {
        field: Field,
        ambient: usize,
        columns: Vec<Vec<Vec<f64>>>,
    },
    Plane {
        u: Vec<f64>,
        v: Vec<f64>,
    },
    Group {
        group: ClassicalGroup,
        columns: Vec<Vec<Vec<f64>>>,
    },
}

/// Serialized form of an ambient matrix (circle velocities, group elements).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub field: Field,
    pub rows: usize,
    pub columns: Vec<Vec<Vec<f64>>>,
}

pub fn columns_to_fmatrix(field: Field, rows: usize, columns: &[Vec<Vec<f64>>]) -> Result<FMatrix> {
    let mut m = FMatrix::zeros(field, rows, columns.len());
    for (j, col) in columns.iter().enumerate() {
        if col.len() != rows {
            return Err(Error::domain("column length does not match the ambient dimension"));
        }
        for (i, comps) in col.iter().enumerate() {
            let q = Quat::from_components(field, comps).ok_or_else(|| {
                Error::domain(format!(
                    "entry must have {} components for field {field}",
                    field.real_dim()
                ))
            })?;
            m.set(i, j, q);
        }
    }
    Ok(m)
}

pub fn fmatrix_to_columns(m: &FMatrix) -> Vec<Vec<Vec<f64>>> {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m.get(i, j).components(m.field())).collect())
        .collect()
}

impl MatrixSpec {
    pub fn to_fmatrix(&self) -> Result<FMatrix> {
        columns_to_fmatrix(self.field, self.rows, &self.columns)
    }

    pub fn from_fmatrix(m: &FMatrix) -> MatrixSpec {
        MatrixSpec { field: m.field(), rows: m.rows(), columns: fmatrix_to_columns(m) }
    }
}

/// Decodes a point spec for a model.
pub fn point_from_spec(model: ModelId, spec: &PointSpec, tol: &Tolerance) -> Result<ModelPoint> {
    match (model, spec) {
        (ModelId::Sphere, PointSpec::Sphere { vector }) => {
            let v = DVector::from_vec(vector.clone());
            Ok(ModelPoint::Sphere(SpherePoint::new(v, tol)?))
        }
        (ModelId::Grassmann(field), PointSpec::Subspace { field: f, ambient, columns }) => {
            if *f != field {
                return Err(Error::domain("field tag does not match the model"));
            }
            let basis = columns_to_fmatrix(field, *ambient, columns)?;
            Ok(ModelPoint::Subspace(SubspacePoint::new(basis, tol)?))
        }
        (ModelId::Isotropic(family), PointSpec::Subspace { field: f, ambient, columns }) => {
            if *f != family.field() {
                return Err(Error::domain("field tag does not match the family"));
            }
            if ambient % 2 != 0 {
                return Err(Error::domain("isotropic models need even ambient dimension"));
            }
            let form = SplitForm::standard(family, ambient / 2)?;
            let basis = columns_to_fmatrix(form.field(), *ambient, columns)?;
            Ok(ModelPoint::Isotropic(IsotropicSubspace::new(&form, basis, tol)?))
        }
        (ModelId::Quadric, PointSpec::Plane { u, v }) => {
            let p = OrientedPlane::new(DVector::from_vec(u.clone()), DVector::from_vec(v.clone()), tol)?;
            Ok(ModelPoint::Plane(p))
        }
        (ModelId::Classical(group), PointSpec::Group { group: g, columns }) => {
            if *g != group {
                return Err(Error::domain("group tag does not match the model"));
            }
            let size = columns.len();
            let mat = columns_to_fmatrix(group.field(), size, columns)?;
            Ok(ModelPoint::Group(ClassicalGroupElement::new(group, mat, tol)?))
        }
        _ => Err(Error::domain(format!(
            "point kind does not match model {model}"
        ))),
    }
}

pub fn point_to_spec(point: &ModelPoint) -> PointSpec {
    match point {
        ModelPoint::Sphere(p) => PointSpec::Sphere { vector: p.coords().iter().copied().collect() },
        ModelPoint::Subspace(p) => PointSpec::Subspace {
            field: p.field(),
            ambient: p.ambient(),
            columns: fmatrix_to_columns(p.basis()),
        },
        ModelPoint::Isotropic(p) => PointSpec::Subspace {
            field: p.form().field(),
            ambient: p.form().ambient(),
            columns: fmatrix_to_columns(p.basis()),
        },
        ModelPoint::Plane(p) => PointSpec::Plane {
            u: p.first().iter().copied().collect(),
            v: p.second().iter().copied().collect(),
        },
        ModelPoint::Group(e) => PointSpec::Group {
            group: e.group(),
            columns: fmatrix_to_columns(e.matrix()),
        },
    }
}

// ---------------------------------------------------------------------------
// Circle and geodesic dispatch.
// ---------------------------------------------------------------------------

/// An evaluable circle of any model.
#[derive(Debug, Clone)]
pub enum ModelCircle {
    Sphere(SphereCircle),
    Subspace(grassmann::GrassmannCircle),
    Isotropic { form: SplitForm, circle: grassmann::GrassmannCircle },
    Quadric(quadric::QuadricCircle),
    Classical { group: ClassicalGroup, circle: grassmann::GrassmannCircle },
}

impl ModelCircle {
    pub fn eval(&self, t: ProjParam, tol: &Tolerance) -> Result<ModelPoint> {
        match self {
            ModelCircle::Sphere(c) => Ok(ModelPoint::Sphere(c.eval(t))),
            ModelCircle::Subspace(c) => Ok(ModelPoint::Subspace(c.eval(t))),
            ModelCircle::Isotropic { form, circle } => {
                let pt = circle.eval(t);
                Ok(ModelPoint::Isotropic(IsotropicSubspace::new(
                    form,
                    pt.basis().clone(),
                    &Tolerance { eq_abs: tol.eq_abs * 100.0, ..*tol },
                )?))
            }
            ModelCircle::Quadric(c) => Ok(ModelPoint::Plane(c.eval(t))),
            ModelCircle::Classical { group, circle } => {
                let pt = circle.eval(t);
                let form = classical::graph_form(*group, pt.dim())?;
                let sub = IsotropicSubspace::new(
                    &form,
                    pt.basis().clone(),
                    &Tolerance { eq_abs: tol.eq_abs * 100.0, ..*tol },
                )?;
                Ok(ModelPoint::Group(classical::graph_to_element(*group, &sub, tol)?))
            }
        }
    }
}

/// An evaluable matched geodesic of any model, periodic in `[0, 1)`.
#[derive(Debug, Clone)]
pub enum ModelGeodesic {
    Sphere(GreatCircle),
    Subspace(grassmann::GrassmannGeodesic),
    Isotropic { form: SplitForm, geo: grassmann::GrassmannGeodesic },
    Quadric(quadric::QuadricGeodesic),
    Classical { group: ClassicalGroup, geo: grassmann::GrassmannGeodesic },
}

impl ModelGeodesic {
    pub fn eval(&self, s: f64, tol: &Tolerance) -> Result<ModelPoint> {
        match self {
            ModelGeodesic::Sphere(g) => Ok(ModelPoint::Sphere(g.eval(s))),
            ModelGeodesic::Subspace(g) => Ok(ModelPoint::Subspace(g.eval(s))),
            ModelGeodesic::Isotropic { form, geo } => {
                let pt = geo.eval(s);
                Ok(ModelPoint::Isotropic(IsotropicSubspace::new(
                    form,
                    pt.basis().clone(),
                    &Tolerance { eq_abs: tol.eq_abs * 100.0, ..*tol },
                )?))
            }
            ModelGeodesic::Quadric(g) => Ok(ModelPoint::Plane(g.eval(s))),
            ModelGeodesic::Classical { group, geo } => {
                let pt = geo.eval(s);
                let form = classical::graph_form(*group, pt.dim())?;
                let sub = IsotropicSubspace::new(
                    &form,
                    pt.basis().clone(),
                    &Tolerance { eq_abs: tol.eq_abs * 100.0, ..*tol },
                )?;
                Ok(ModelPoint::Group(classical::graph_to_element(*group, &sub, tol)?))
            }
        }
    }
}

fn expect_three<'a, T>(pts: &'a [T]) -> Result<(&'a T, &'a T, &'a T)> {
    if pts.len() != 3 {
        return Err(Error::domain("exactly three defining points are required"));
    }
    Ok((&pts[0], &pts[1], &pts[2]))
}

/// The circle through three pairwise opposite points.
pub fn circle_from_points(model: ModelId, pts: &[ModelPoint], tol: &Tolerance) -> Result<ModelCircle> {
    let (p0, p1, q) = expect_three(pts)?;
    match (model, p0, p1, q) {
        (ModelId::Sphere, ModelPoint::Sphere(a), ModelPoint::Sphere(b), ModelPoint::Sphere(c)) => {
            Ok(ModelCircle::Sphere(sphere::circle_through_sphere(a, b, c, tol)?))
        }
        (
            ModelId::Grassmann(_),
            ModelPoint::Subspace(a),
            ModelPoint::Subspace(b),
            ModelPoint::Subspace(c),
        ) => {
            let (_, circle) = grassmann::circle_through_gr(a, b, c, tol)?;
            Ok(ModelCircle::Subspace(circle))
        }
        (
            ModelId::Isotropic(_),
            ModelPoint::Isotropic(a),
            ModelPoint::Isotropic(b),
            ModelPoint::Isotropic(c),
        ) => {
            let (_, circle) = isotropic::circle_through_iso(a, b, c, tol)?;
            Ok(ModelCircle::Isotropic { form: a.form().clone(), circle })
        }
        (ModelId::Quadric, ModelPoint::Plane(a), ModelPoint::Plane(b), ModelPoint::Plane(c)) => {
            Ok(ModelCircle::Quadric(quadric::circle_through_quadric(a, b, c, tol)?))
        }
        (
            ModelId::Classical(group),
            ModelPoint::Group(a),
            ModelPoint::Group(b),
            ModelPoint::Group(c),
        ) => {
            let ga = classical::graph_embed(a, tol)?;
            let gb = classical::graph_embed(b, tol)?;
            let gc = classical::graph_embed(c, tol)?;
            let (_, circle) = isotropic::circle_through_iso(&ga, &gb, &gc, tol)?;
            Ok(ModelCircle::Classical { group, circle })
        }
        _ => Err(Error::domain("points do not match the model")),
    }
}

/// The diametrical geodesic matched to the circle through the points, with
/// `gamma(s) = c(tan(pi s))`.
///
/// The sphere and the quadric require their normal configurations: the
/// point at infinity must be the antipode (resp. the orientation reversal)
/// of the base point.
pub fn geodesic_from_points(
    model: ModelId,
    pts: &[ModelPoint],
    tol: &Tolerance,
) -> Result<ModelGeodesic> {
    let (p0, p1, q) = expect_three(pts)?;
    match (model, p0, p1, q) {
        (ModelId::Sphere, ModelPoint::Sphere(a), ModelPoint::Sphere(b), ModelPoint::Sphere(c)) => {
            Ok(ModelGeodesic::Sphere(GreatCircle::from_triple(a, b, c, tol)?))
        }
        (
            ModelId::Grassmann(_),
            ModelPoint::Subspace(a),
            ModelPoint::Subspace(b),
            ModelPoint::Subspace(c),
        ) => {
            let (iso, _) = grassmann::circle_through_gr(a, b, c, tol)?;
            Ok(ModelGeodesic::Subspace(grassmann::geodesic_gr(&iso)))
        }
        (
            ModelId::Isotropic(_),
            ModelPoint::Isotropic(a),
            ModelPoint::Isotropic(b),
            ModelPoint::Isotropic(c),
        ) => {
            let (iso, _) = isotropic::circle_through_iso(a, b, c, tol)?;
            Ok(ModelGeodesic::Isotropic { form: a.form().clone(), geo: isotropic::geodesic_iso(&iso) })
        }
        (ModelId::Quadric, ModelPoint::Plane(a), ModelPoint::Plane(b), ModelPoint::Plane(c)) => {
            if !c.equal_to(&a.reversed(), &Tolerance { eq_abs: tol.eq_abs * 10.0, ..*tol }) {
                return Err(Error::precondition(
                    "matched quadric geodesics need the normal configuration q = reversed p0",
                ));
            }
            let (angles, base, dirs) = quadric::angle_frames(a, b, tol)?;
            let [w1, w2] = dirs;
            let w2 = w2.ok_or_else(|| Error::precondition("degenerate middle plane"))?;
            let w1 = match w1 {
                Some(w) => w,
                None => {
                    // alpha = 0: any unit direction orthogonal to the other
                    // three frame vectors works
                    complete_direction(&[base.first(), base.second(), &w2], tol)?
                }
            };
            let data = quadric::QuadricCircleData::new(
                [base.first().clone(), base.second().clone(), w1, w2],
                angles.alpha,
                angles.beta,
                tol,
            )?;
            Ok(ModelGeodesic::Quadric(quadric::geodesic_for_data(&data, tol)?))
        }
        (
            ModelId::Classical(group),
            ModelPoint::Group(a),
            ModelPoint::Group(b),
            ModelPoint::Group(c),
        ) => {
            let ga = classical::graph_embed(a, tol)?;
            let gb = classical::graph_embed(b, tol)?;
            let gc = classical::graph_embed(c, tol)?;
            let (iso, _) = isotropic::circle_through_iso(&ga, &gb, &gc, tol)?;
            Ok(ModelGeodesic::Classical { group, geo: isotropic::geodesic_iso(&iso) })
        }
        _ => Err(Error::domain("points do not match the model")),
    }
}

fn complete_direction(against: &[&DVector<f64>], tol: &Tolerance) -> Result<DVector<f64>> {
    let n = against[0].len();
    for k in 0..n {
        let mut cand = DVector::zeros(n);
        cand[k] = 1.0;
        for w in against {
            let c = w.dot(&cand);
            cand -= *w * c;
        }
        if cand.norm() > 0.5 {
            return Ok(cand.normalize());
        }
    }
    Err(Error::inconsistency("no orthogonal completion direction found"))
}

// ---------------------------------------------------------------------------
// Seeded generation.
// ---------------------------------------------------------------------------

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-trial stream: every trial derives its own generator
/// from `(seed, config, trial)`, so results are order-independent.
pub fn trial_rng(seed: u64, config: u64, trial: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(splitmix(seed ^ splitmix(config ^ splitmix(trial))))
}

pub fn random_quat_in(field: Field, rng: &mut impl Rng) -> Quat {
    let mut c = [0.0; 4];
    for v in c.iter_mut().take(field.real_dim()) {
        *v = rng.gen_range(-1.0..1.0);
    }
    Quat::new(c[0], c[1], c[2], c[3])
}

pub fn random_fmatrix(field: Field, rows: usize, cols: usize, rng: &mut impl Rng) -> FMatrix {
    FMatrix::from_fn(field, rows, cols, |_, _| random_quat_in(field, rng))
}

pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0f64));
        if v.norm() > 1e-3 {
            return v.normalize();
        }
    }
}

/// A random orthonormal family of `k` vectors in `R^n`.
pub fn random_orthonormal(n: usize, k: usize, rng: &mut impl Rng) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(k);
    while out.len() < k {
        let mut v = random_unit_vector(n, rng);
        for w in &out {
            let c = w.dot(&v);
            v -= w * c;
        }
        if v.norm() > 1e-3 {
            out.push(v.normalize());
        }
    }
    out
}

/// A transformation of the model's acting group.
#[derive(Debug, Clone)]
pub enum Transform {
    Lorentz(DMatrix<f64>),
    ComplexOrthogonal(DMatrix<C64>),
    Linear(FMatrix),
}

impl Transform {
    pub fn apply(&self, pt: &ModelPoint, tol: &Tolerance) -> Result<ModelPoint> {
        match (self, pt) {
            (Transform::Lorentz(g), ModelPoint::Sphere(p)) => {
                Ok(ModelPoint::Sphere(sphere::mobius_act(g, p, tol)?))
            }
            (Transform::ComplexOrthogonal(g), ModelPoint::Plane(p)) => {
                Ok(ModelPoint::Plane(quadric::plane_act(g, p, tol)?))
            }
            (Transform::Linear(g), ModelPoint::Subspace(p)) => {
                Ok(ModelPoint::Subspace(p.act(g, tol)))
            }
            (Transform::Linear(g), ModelPoint::Isotropic(p)) => {
                Ok(ModelPoint::Isotropic(p.act(g, tol)?))
            }
            _ => Err(Error::domain("transform does not act on this model")),
        }
    }
}

/// Context for seeded generation in one model family at a fixed size:
/// caches the ambient algebra where one is needed.
pub struct ModelContext {
    pub model: ModelId,
    /// sphere dimension `n`, Grassmannian/isotropic rank `n`, or quadric
    /// ambient `N`
    pub size: usize,
    algebra: Option<AlgebraBasis>,
    form: Option<SplitForm>,
}

impl ModelContext {
    pub fn new(model: ModelId, size: usize, tol: &Tolerance) -> Result<ModelContext> {
        let (algebra, form) = match model {
            ModelId::Sphere => (None, None),
            ModelId::Grassmann(field) => (
                Some(AlgebraBasis::special_linear(field, 2 * size)),
                None,
            ),
            ModelId::Isotropic(family) => {
                let form = SplitForm::standard(family, size)?;
                (Some(AlgebraBasis::form_preserving(&form, tol)), Some(form))
            }
            ModelId::Quadric => (Some(AlgebraBasis::so_complex(size)), None),
            ModelId::Classical(group) => {
                let form = classical::graph_form(group, size)?;
                (Some(AlgebraBasis::form_preserving(&form, tol)), Some(form))
            }
        };
        Ok(ModelContext { model, size, algebra, form })
    }

    pub fn algebra(&self) -> Option<&AlgebraBasis> {
        self.algebra.as_ref()
    }

    pub fn form(&self) -> Option<&SplitForm> {
        self.form.as_ref()
    }

    /// A random group transformation of moderate size.
    pub fn random_transform(&self, rng: &mut impl Rng, scale: f64) -> Result<Transform> {
        match self.model {
            ModelId::Sphere => {
                let n1 = self.size + 2;
                let mut x = DMatrix::zeros(n1, n1);
                for i in 1..n1 {
                    let b = rng.gen_range(-scale..scale);
                    x[(0, i)] = b;
                    x[(i, 0)] = b;
                    for j in i + 1..n1 {
                        let a = rng.gen_range(-scale..scale);
                        x[(i, j)] = a;
                        x[(j, i)] = -a;
                    }
                }
                Ok(Transform::Lorentz(FMatrix::from_na_real(&x).exp_series().to_na_real()))
            }
            ModelId::Quadric => {
                let g = self.algebra.as_ref().expect("quadric context has so(N, C)");
                let coeffs: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-scale..scale)).collect();
                let m = g.combination(&coeffs).matrix().exp_series();
                Ok(Transform::ComplexOrthogonal(m.to_na_complex()))
            }
            _ => {
                let g = self.algebra.as_ref().expect("matrix models carry their algebra");
                let coeffs: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-scale..scale)).collect();
                Ok(Transform::Linear(g.combination(&coeffs).matrix().exp_series()))
            }
        }
    }

    /// Three pairwise opposite points in general position.
    pub fn random_triple(&self, rng: &mut impl Rng, tol: &Tolerance) -> Result<[ModelPoint; 3]> {
        match self.model {
            ModelId::Sphere => {
                let n1 = self.size + 1;
                loop {
                    let p = SpherePoint::normalized(random_unit_vector(n1, rng)).unwrap();
                    let p1 = SpherePoint::normalized(random_unit_vector(n1, rng)).unwrap();
                    let q = SpherePoint::normalized(random_unit_vector(n1, rng)).unwrap();
                    if p.distance_to(&p1) > 0.1 && p.distance_to(&q) > 0.1 && p1.distance_to(&q) > 0.1
                    {
                        return Ok([
                            ModelPoint::Sphere(p),
                            ModelPoint::Sphere(p1),
                            ModelPoint::Sphere(q),
                        ]);
                    }
                }
            }
            ModelId::Grassmann(field) => {
                let n = self.size;
                loop {
                    let p = SubspacePoint::new(random_fmatrix(field, 2 * n, n, rng), tol)?;
                    let q = SubspacePoint::new(random_fmatrix(field, 2 * n, n, rng), tol)?;
                    let p1 = SubspacePoint::new(random_fmatrix(field, 2 * n, n, rng), tol)?;
                    let well = |a: &SubspacePoint, b: &SubspacePoint| {
                        grassmann::principal_cosines(a.basis(), b.basis())
                            .first()
                            .map_or(false, |c| *c < 1.0 - 1e-3)
                            && grassmann::is_opposite_gr(a, b, tol).unwrap_or(false)
                    };
                    if well(&p, &q) && well(&p, &p1) && well(&p1, &q) {
                        return Ok([
                            ModelPoint::Subspace(p),
                            ModelPoint::Subspace(p1),
                            ModelPoint::Subspace(q),
                        ]);
                    }
                }
            }
            ModelId::Isotropic(_) | ModelId::Classical(_) => {
                let form = self.form.as_ref().expect("isotropic context has its form");
                let p0 = IsotropicSubspace::first_half(form);
                let q0 = IsotropicSubspace::second_half(form);
                let skew = isotropic::tskew_space(&p0, &q0, tol);
                if skew.is_empty() {
                    return Err(Error::domain("family admits no circles at this rank"));
                }
                let g = self.algebra.as_ref().expect("isotropic context has u(f)");
                for _ in 0..60 {
                    // random invertible skew-compatible connecting map
                    let mut t = FMatrix::zeros(form.field(), form.n(), form.n());
                    for b in &skew {
                        t = t.add(&b.scale_real(rng.gen_range(-1.0..1.0)));
                    }
                    if crate::linalg::rank_of(&t, tol) < form.n() {
                        continue;
                    }
                    let p1_cols = p0.basis().add(&q0.basis().mul(&t));
                    let Ok(p1) = IsotropicSubspace::new(form, p1_cols, tol) else {
                        continue;
                    };
                    // move the whole triple to general position
                    let coeffs: Vec<f64> = (0..g.dim()).map(|_| rng.gen_range(-0.3..0.3)).collect();
                    let mover = g.combination(&coeffs).matrix().exp_series();
                    let p = p0.act(&mover, tol)?;
                    let p1 = p1.act(&mover, tol)?;
                    let q = q0.act(&mover, tol)?;
                    return Ok([
                        ModelPoint::Isotropic(p),
                        ModelPoint::Isotropic(p1),
                        ModelPoint::Isotropic(q),
                    ]);
                }
                Err(Error::domain("failed to sample an invertible connecting map"))
            }
            ModelId::Quadric => {
                let n = self.size;
                loop {
                    let frame = random_orthonormal(n, 4, rng);
                    let alpha = rng.gen_range(0.05..1.0f64);
                    let upper = (std::f64::consts::PI - alpha - 0.05).min(2.4);
                    if upper <= alpha + 0.1 {
                        continue;
                    }
                    let beta = rng.gen_range(alpha + 0.1..upper);
                    let data = quadric::QuadricCircleData::new(
                        [frame[0].clone(), frame[1].clone(), frame[2].clone(), frame[3].clone()],
                        alpha,
                        beta,
                        tol,
                    )?;
                    return Ok([
                        ModelPoint::Plane(data.base_plane()),
                        ModelPoint::Plane(data.unit_plane()),
                        ModelPoint::Plane(data.base_plane().reversed()),
                    ]);
                }
            }
        }
    }

    /// A matched circle/geodesic pair for the correspondence suites. For
    /// the sphere and the quadric the triple is put in normal position.
    pub fn random_matched_pair(
        &self,
        rng: &mut impl Rng,
        tol: &Tolerance,
    ) -> Result<(ModelCircle, ModelGeodesic)> {
        let pts = match self.model {
            ModelId::Sphere => {
                let n1 = self.size + 1;
                let frame = random_orthonormal(n1, 2, rng);
                let p = SpherePoint::new(frame[0].clone(), tol)?;
                let p1 = SpherePoint::new(frame[1].clone(), tol)?;
                let q = p.antipode();
                [ModelPoint::Sphere(p), ModelPoint::Sphere(p1), ModelPoint::Sphere(q)]
            }
            _ => self.random_triple(rng, tol)?,
        };
        let circle = circle_from_points(self.model, &pts, tol)?;
        let geo = geodesic_from_points(self.model, &pts, tol)?;
        Ok((circle, geo))
    }

    /// Infinitesimal stabilizer of a point, for the prevalence machinery.
    pub fn stabilizer(&self, pt: &ModelPoint, tol: &Tolerance) -> Result<SubalgebraRep> {
        let g = self
            .algebra
            .as_ref()
            .ok_or_else(|| Error::domain("model has no cached algebra"))?;
        match pt {
            ModelPoint::Subspace(p) => grassmann::stabilizer_subalgebra(p.basis(), g, tol),
            ModelPoint::Isotropic(p) => grassmann::stabilizer_subalgebra(p.basis(), g, tol),
            ModelPoint::Plane(p) => quadric::stabilizer_quadric(&quadric::psi(p), g, tol),
            _ => Err(Error::domain("stabilizers are not defined for this model")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(ModelId::parse(&m.name()).unwrap(), m);
        }
        assert!(ModelId::parse("nonsense").is_err());
    }

    #[test]
    fn point_spec_round_trip() {
        let mut rng = trial_rng(5, 0, 0);
        let configs: Vec<(ModelId, usize)> = vec![
            (ModelId::Sphere, 3),
            (ModelId::Grassmann(Field::H), 2),
            (ModelId::Isotropic(FormFamily::ComplexSplitHermitian), 2),
            (ModelId::Quadric, 5),
        ];
        for (model, size) in configs {
            let ctx = ModelContext::new(model, size, &tol()).unwrap();
            let pts = ctx.random_triple(&mut rng, &tol()).unwrap();
            for pt in &pts {
                let spec = point_to_spec(pt);
                let back = point_from_spec(model, &spec, &tol()).unwrap();
                assert!(pt.distance_to(&back).unwrap() < 1e-9, "{model}");
            }
        }
    }

    #[test]
    fn matched_pairs_correspond() {
        let configs: Vec<(ModelId, usize)> = vec![
            (ModelId::Sphere, 2),
            (ModelId::Grassmann(Field::R), 2),
            (ModelId::Isotropic(FormFamily::RealSymplectic), 2),
            (ModelId::Quadric, 5),
            (ModelId::Classical(ClassicalGroup::Unitary), 2),
        ];
        for (idx, (model, size)) in configs.into_iter().enumerate() {
            let ctx = ModelContext::new(model, size, &tol()).unwrap();
            let mut rng = trial_rng(7, idx as u64, 0);
            let (circle, geo) = match model {
                // classical model: use the diagonal geodesic triple
                ModelId::Classical(group) => {
                    let dg = classical::diagonal_geodesic_classical(group, size).unwrap();
                    let pts = [
                        ModelPoint::Group(dg.element_at(0.0)),
                        ModelPoint::Group(dg.element_at(std::f64::consts::FRAC_PI_2)),
                        ModelPoint::Group(dg.element_at(std::f64::consts::PI)),
                    ];
                    (
                        circle_from_points(model, &pts, &tol()).unwrap(),
                        geodesic_from_points(model, &pts, &tol()).unwrap(),
                    )
                }
                _ => ctx.random_matched_pair(&mut rng, &tol()).unwrap(),
            };
            for k in 0..25 {
                let s = k as f64 / 25.0;
                if (s - 0.5).abs() < 1e-6 {
                    continue;
                }
                let lhs = geo.eval(s, &tol()).unwrap();
                let rhs = circle.eval(ProjParam::tan_pi(s), &tol()).unwrap();
                let d = lhs.distance_to(&rhs).unwrap();
                assert!(d < 1e-8, "{model} s={s} d={d:e}");
            }
        }
    }

    #[test]
    fn trial_rng_is_stable() {
        let mut a = trial_rng(1, 2, 3);
        let mut b = trial_rng(1, 2, 3);
        let va: Vec<u64> = (0..4).map(|_| a.gen()).collect();
        let vb: Vec<u64> = (0..4).map(|_| b.gen()).collect();
        assert_eq!(va, vb);
        let mut c = trial_rng(1, 2, 4);
        let vc: Vec<u64> = (0..4).map(|_| c.gen()).collect();
        assert_ne!(va, vc);
    }
}
