//! Model-independent Lie algebra machinery: enumerated real bases of the
//! ambient algebras, brackets and the invariant trace form, polars,
//! height-one parabolic and prevalence predicates, characteristic elements,
//! nilpotent exponentials and circle transport.
//!
//! Subspaces of an algebra are handled through their real flattening: a
//! matrix over `F` becomes a real vector with `dim_R F` numbers per entry,
//! and every "is this a subalgebra / is this contained / what is the rank"
//! question reduces to the span calculus of [`crate::linalg`].

use crate::error::{Error, Result};
use crate::isotropic::SplitForm;
use crate::linalg::{self, RealSpan, Tolerance};
use crate::matrix::FMatrix;
use crate::scalar::{Field, Quat};
use nalgebra::{DMatrix, DVector};

/// Tag naming the ambient real Lie algebra an element belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraTag {
    /// `sl(m, F)` viewed as a real Lie algebra. Over `H` the defining
    /// condition is `Re tr = 0`.
    SpecialLinear { field: Field, size: usize },
    /// `so(N, C)` viewed as a real Lie algebra of real dimension `N(N-1)`.
    SpecialOrthogonalComplex { size: usize },
    /// `u(f)` for a split form `f`: matrices with `sigma(X)^T G + G X = 0`.
    FormPreserving(Box<SplitForm>),
}

impl AlgebraTag {
    pub fn field(&self) -> Field {
        match self {
            AlgebraTag::SpecialLinear { field, .. } => *field,
            AlgebraTag::SpecialOrthogonalComplex { .. } => Field::C,
            AlgebraTag::FormPreserving(f) => f.field(),
        }
    }

    pub fn ambient_size(&self) -> usize {
        match self {
            AlgebraTag::SpecialLinear { size, .. } => *size,
            AlgebraTag::SpecialOrthogonalComplex { size } => *size,
            AlgebraTag::FormPreserving(f) => f.ambient(),
        }
    }

    /// Residual of the defining linear conditions of the tagged algebra.
    pub fn defining_residual(&self, m: &FMatrix) -> f64 {
        match self {
            AlgebraTag::SpecialLinear { field, .. } => {
                let t = m.trace();
                match field {
                    Field::R | Field::C => t.norm(),
                    // the commutator algebra of gl(m, H) is cut out by the
                    // real part of the trace only
                    Field::H => t.w.abs(),
                }
            }
            AlgebraTag::SpecialOrthogonalComplex { .. } => m.transpose().add(m).max_abs(),
            AlgebraTag::FormPreserving(f) => f.skew_residual(m),
        }
    }
}

impl std::fmt::Display for AlgebraTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlgebraTag::SpecialLinear { field, size } => write!(f, "sl({size},{field})"),
            AlgebraTag::SpecialOrthogonalComplex { size } => write!(f, "so({size},C)"),
            AlgebraTag::FormPreserving(form) => {
                write!(f, "u({}, n={})", form.family().name(), form.n())
            }
        }
    }
}

/// An element of a tagged ambient algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct LieElement {
    tag: AlgebraTag,
    mat: FMatrix,
}

impl LieElement {
    pub fn new(tag: AlgebraTag, mat: FMatrix, tol: &Tolerance) -> Result<LieElement> {
        if mat.field() != tag.field() || mat.rows() != tag.ambient_size() || !mat.is_square() {
            return Err(Error::domain(format!("matrix shape does not fit {tag}")));
        }
        let residual = tag.defining_residual(&mat);
        let scale = mat.max_abs().max(1.0);
        if residual > tol.eq_abs * scale {
            return Err(Error::domain(format!(
                "matrix violates the defining conditions of {tag} (residual {residual:.3e})"
            )));
        }
        Ok(LieElement { tag, mat })
    }

    pub fn zero(tag: AlgebraTag) -> LieElement {
        let mat = FMatrix::zeros(tag.field(), tag.ambient_size(), tag.ambient_size());
        LieElement { tag, mat }
    }

    pub fn tag(&self) -> &AlgebraTag {
        &self.tag
    }

    pub fn matrix(&self) -> &FMatrix {
        &self.mat
    }

    pub fn scale_real(&self, s: f64) -> LieElement {
        LieElement { tag: self.tag.clone(), mat: self.mat.scale_real(s) }
    }

    pub fn add(&self, other: &LieElement) -> LieElement {
        LieElement { tag: self.tag.clone(), mat: self.mat.add(&other.mat) }
    }

    pub fn flatten(&self) -> DVector<f64> {
        DVector::from_vec(self.mat.flatten_real())
    }
}

/// `[X, Y] = XY - YX`.
pub fn bracket(x: &LieElement, y: &LieElement) -> Result<LieElement> {
    if x.tag != y.tag {
        return Err(Error::domain(format!("bracket of mismatched algebras {} and {}", x.tag, y.tag)));
    }
    Ok(LieElement { tag: x.tag.clone(), mat: bracket_mat(&x.mat, &y.mat) })
}

pub fn bracket_mat(x: &FMatrix, y: &FMatrix) -> FMatrix {
    x.mul(y).sub(&y.mul(x))
}

/// The invariant real trace form `Re tr(XY)`, taken over the real ground
/// field: plain trace for `R`, real part for `C`, and the trace of the
/// complex adjoint embedding for `H` (twice the quaternionic real part).
/// Proportional to the Killing form on each simple algebra in scope; the
/// constants are recorded in [`crate::catalog`].
pub fn trace_form(x: &LieElement, y: &LieElement) -> Result<f64> {
    if x.tag != y.tag {
        return Err(Error::domain("trace_form on mismatched algebras"));
    }
    Ok(trace_form_mat(&x.mat, &y.mat))
}

pub fn trace_form_mat(x: &FMatrix, y: &FMatrix) -> f64 {
    debug_assert_eq!(x.field(), y.field());
    let n = x.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            // real part of the (i, i) contribution of X Y
            let a = x.get(i, j);
            let b = y.get(j, i);
            acc += a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z;
        }
    }
    match x.field() {
        Field::R | Field::C => acc,
        Field::H => 2.0 * acc,
    }
}

/// An enumerated real basis of a tagged ambient Lie algebra.
#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    tag: AlgebraTag,
    basis: Vec<FMatrix>,
    span: RealSpan,
}

impl AlgebraBasis {
    pub fn special_linear(field: Field, size: usize) -> AlgebraBasis {
        assert!(size >= 2);
        let mut basis = Vec::new();
        let units: &[Quat] = match field {
            Field::R => &[Quat::ONE],
            Field::C => &[Quat::ONE, Quat::I],
            Field::H => &[Quat::ONE, Quat::I, Quat::J, Quat::K],
        };
        // off-diagonal elementary matrices times each real unit
        for i in 0..size {
            for j in 0..size {
                if i == j {
                    continue;
                }
                for &u in units {
                    let mut m = FMatrix::zeros(field, size, size);
                    m.set(i, j, u);
                    basis.push(m);
                }
            }
        }
        // traceless real diagonals
        for i in 0..size - 1 {
            let mut m = FMatrix::zeros(field, size, size);
            m.set(i, i, Quat::ONE);
            m.set(size - 1, size - 1, -Quat::ONE);
            basis.push(m);
        }
        // imaginary diagonals kill only the real part of the trace
        if field == Field::H {
            for i in 0..size {
                for &u in &[Quat::I, Quat::J, Quat::K] {
                    let mut m = FMatrix::zeros(field, size, size);
                    m.set(i, i, u);
                    basis.push(m);
                }
            }
        }
        if field == Field::C {
            // purely imaginary trace is already excluded over C; add the
            // traceless imaginary diagonals
            for i in 0..size - 1 {
                let mut m = FMatrix::zeros(field, size, size);
                m.set(i, i, Quat::I);
                m.set(size - 1, size - 1, -Quat::I);
                basis.push(m);
            }
        }
        Self::from_matrices(AlgebraTag::SpecialLinear { field, size }, basis)
    }

    pub fn so_complex(size: usize) -> AlgebraBasis {
        assert!(size >= 2);
        let mut basis = Vec::new();
        for a in 0..size {
            for b in a + 1..size {
                for &u in &[Quat::ONE, Quat::I] {
                    let mut m = FMatrix::zeros(Field::C, size, size);
                    m.set(a, b, u);
                    m.set(b, a, -u);
                    basis.push(m);
                }
            }
        }
        Self::from_matrices(AlgebraTag::SpecialOrthogonalComplex { size }, basis)
    }

    /// Basis of `u(f)` obtained as the kernel of the real-linear condition
    /// `sigma(X)^T G + G X = 0` over the coordinate basis of `gl(2n, F)`.
    pub fn form_preserving(form: &SplitForm, tol: &Tolerance) -> AlgebraBasis {
        let field = form.field();
        let size = form.ambient();
        let units: &[Quat] = match field {
            Field::R => &[Quat::ONE],
            Field::C => &[Quat::ONE, Quat::I],
            Field::H => &[Quat::ONE, Quat::I, Quat::J, Quat::K],
        };
        let coord_basis: Vec<FMatrix> = (0..size)
            .flat_map(|i| {
                (0..size).flat_map(move |j| {
                    units.iter().map(move |&u| {
                        let mut m = FMatrix::zeros(field, size, size);
                        m.set(i, j, u);
                        m
                    })
                })
            })
            .collect();
        let flat_dim = size * size * field.real_dim();
        let mut cond = DMatrix::zeros(flat_dim, coord_basis.len());
        for (k, e) in coord_basis.iter().enumerate() {
            let defect = form.skew_defect(e);
            cond.set_column(k, &DVector::from_vec(defect.flatten_real()));
        }
        let null = linalg::real_nullspace(&cond, tol.rank_rel);
        let basis: Vec<FMatrix> = (0..null.ncols())
            .map(|c| {
                let mut m = FMatrix::zeros(field, size, size);
                for (k, e) in coord_basis.iter().enumerate() {
                    let w = null[(k, c)];
                    if w != 0.0 {
                        m = m.add(&e.scale_real(w));
                    }
                }
                m
            })
            .collect();
        Self::from_matrices(AlgebraTag::FormPreserving(Box::new(form.clone())), basis)
    }

    fn from_matrices(tag: AlgebraTag, basis: Vec<FMatrix>) -> AlgebraBasis {
        let span = span_of(&basis, 1e-12);
        assert_eq!(span.dim(), basis.len(), "basis of {tag} is not independent");
        AlgebraBasis { tag, basis, span }
    }

    pub fn tag(&self) -> &AlgebraTag {
        &self.tag
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_size(&self) -> usize {
        self.tag.ambient_size()
    }

    pub fn field(&self) -> Field {
        self.tag.field()
    }

    pub fn basis(&self) -> &[FMatrix] {
        &self.basis
    }

    pub fn span(&self) -> &RealSpan {
        &self.span
    }

    pub fn element(&self, mat: FMatrix, tol: &Tolerance) -> Result<LieElement> {
        LieElement::new(self.tag.clone(), mat, tol)
    }

    /// Element with the given real coefficients against the stored basis.
    pub fn combination(&self, coeffs: &[f64]) -> LieElement {
        assert_eq!(coeffs.len(), self.dim());
        let mut m = FMatrix::zeros(self.field(), self.ambient_size(), self.ambient_size());
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c != 0.0 {
                m = m.add(&b.scale_real(*c));
            }
        }
        LieElement { tag: self.tag.clone(), mat: m }
    }
}

fn span_of(mats: &[FMatrix], rank_rel: f64) -> RealSpan {
    if mats.is_empty() {
        return RealSpan::from_cols(&DMatrix::zeros(0, 0), rank_rel);
    }
    let rows = mats[0].flatten_real().len();
    let mut m = DMatrix::zeros(rows, mats.len());
    for (j, el) in mats.iter().enumerate() {
        m.set_column(j, &DVector::from_vec(el.flatten_real()));
    }
    RealSpan::from_cols(&m, rank_rel)
}

/// A subspace (usually a subalgebra) of a tagged algebra, stored through a
/// linearly independent spanning list.
#[derive(Debug, Clone)]
pub struct SubalgebraRep {
    tag: AlgebraTag,
    gens: Vec<FMatrix>,
    span: RealSpan,
}

impl SubalgebraRep {
    pub fn new(tag: AlgebraTag, gens: Vec<FMatrix>, tol: &Tolerance) -> Result<SubalgebraRep> {
        let span = span_of(&gens, tol.rank_rel);
        if span.dim() != gens.len() {
            return Err(Error::domain("spanning list is linearly dependent"));
        }
        Ok(SubalgebraRep { tag, gens, span })
    }

    pub fn tag(&self) -> &AlgebraTag {
        &self.tag
    }

    pub fn dim(&self) -> usize {
        self.gens.len()
    }

    pub fn gens(&self) -> &[FMatrix] {
        &self.gens
    }

    pub fn span(&self) -> &RealSpan {
        &self.span
    }

    pub fn contains_mat(&self, m: &FMatrix, eq_abs: f64) -> bool {
        self.span.contains(&DVector::from_vec(m.flatten_real()), eq_abs)
    }

    pub fn contains(&self, el: &LieElement, eq_abs: f64) -> bool {
        self.contains_mat(&el.mat, eq_abs)
    }
}

/// Polar of `p` inside `g` with respect to the invariant trace form:
/// all `x` with `trace_form(x, y) = 0` for every `y` in `p`.
pub fn polar(p: &SubalgebraRep, g: &AlgebraBasis, tol: &Tolerance) -> SubalgebraRep {
    let dim_g = g.dim();
    let mut pairing = DMatrix::zeros(p.dim(), dim_g);
    for (i, y) in p.gens().iter().enumerate() {
        for (a, x) in g.basis().iter().enumerate() {
            pairing[(i, a)] = trace_form_mat(x, y);
        }
    }
    let null = linalg::real_nullspace(&pairing, tol.rank_rel);
    let gens: Vec<FMatrix> = (0..null.ncols())
        .map(|c| {
            let coeffs: Vec<f64> = (0..dim_g).map(|a| null[(a, c)]).collect();
            g.combination(&coeffs).mat
        })
        .collect();
    SubalgebraRep::new(g.tag().clone(), gens, tol).expect("polar basis independent")
}

/// True when `p` is a subalgebra whose polar is abelian and contained in it.
pub fn is_height_one_parabolic(p: &SubalgebraRep, g: &AlgebraBasis, tol: &Tolerance) -> bool {
    let scale = p
        .gens()
        .iter()
        .map(|m| m.max_abs())
        .fold(1.0f64, f64::max);
    let closure_tol = tol.eq_abs * scale * scale;
    for (i, x) in p.gens().iter().enumerate() {
        for y in p.gens().iter().skip(i + 1) {
            if !p.contains_mat(&bracket_mat(x, y), closure_tol) {
                return false;
            }
        }
    }
    let pol = polar(p, g, tol);
    for x in pol.gens() {
        if !p.contains_mat(x, tol.eq_abs) {
            return false;
        }
    }
    for (i, x) in pol.gens().iter().enumerate() {
        for y in pol.gens().iter().skip(i) {
            if bracket_mat(x, y).max_abs() > closure_tol {
                return false;
            }
        }
    }
    true
}

/// Opposition test: `p_perp` and `q_perp` intersect trivially, detected as
/// full rank of the concatenated polar bases.
pub fn is_opposite(p: &SubalgebraRep, q: &SubalgebraRep, g: &AlgebraBasis, tol: &Tolerance) -> bool {
    let pp = polar(p, g, tol);
    let qp = polar(q, g, tol);
    let mut all = pp.gens().to_vec();
    all.extend_from_slice(qp.gens());
    let span = span_of(&all, tol.rank_rel);
    span.dim() == pp.dim() + qp.dim()
}

/// Matrix of `(ad_y)^2` as an operator from the span of `from` into the
/// ambient flattened space, one column per generator.
fn ad_sq_images(y: &FMatrix, from: &[FMatrix]) -> DMatrix<f64> {
    let rows = y.flatten_real().len();
    let mut m = DMatrix::zeros(rows, from.len());
    for (j, x) in from.iter().enumerate() {
        let img = bracket_mat(y, &bracket_mat(y, x));
        m.set_column(j, &DVector::from_vec(img.flatten_real()));
    }
    m
}

/// Prevalence of `y` with witness `p`: `y` lies in the polar of `p` and the
/// kernel of `(ad_y)^2` on `g` is exactly `p`.
///
/// The containment `ker (ad_y)^2 >= p` holds identically once `y` is in the
/// polar, so the kernel equality is tested as a dimension match plus the
/// vanishing of `(ad_y)^2` on the generators of `p`.
pub fn is_prevalent(y: &LieElement, p: &SubalgebraRep, g: &AlgebraBasis, tol: &Tolerance) -> bool {
    if y.mat.max_abs() < tol.eq_abs {
        return false;
    }
    let scale = y.mat.max_abs().max(1.0);
    let pol_tol = tol.eq_abs * scale;
    for x in p.gens() {
        let pairing = trace_form_mat(&y.mat, x);
        if pairing.abs() > pol_tol * x.max_abs().max(1.0) {
            return false;
        }
    }
    let sq_tol = tol.eq_abs * scale * scale;
    for x in p.gens() {
        let img = bracket_mat(&y.mat, &bracket_mat(&y.mat, x));
        if img.max_abs() > sq_tol * x.max_abs().max(1.0) {
            return false;
        }
    }
    let images = ad_sq_images(&y.mat, g.basis());
    let rank = linalg::real_col_rank(&images, tol.rank_rel);
    g.dim() - rank == p.dim()
}

/// The isomorphism criterion: `(ad_y)^2` restricted to `p_perp`, expressed
/// in a basis of `q_perp`, is square and invertible.
///
/// Requires `y` in `q_perp` (precondition error otherwise); `p`, `q` are the
/// parabolic points, their polars are computed here.
pub fn prevalent_iso_check(
    y: &LieElement,
    p: &SubalgebraRep,
    q: &SubalgebraRep,
    g: &AlgebraBasis,
    tol: &Tolerance,
) -> Result<bool> {
    let q_perp = polar(q, g, tol);
    if !q_perp.contains(y, tol.eq_abs * 10.0) {
        return Err(Error::precondition("y does not lie in the polar of q"));
    }
    if y.mat.max_abs() < tol.eq_abs {
        return Ok(false);
    }
    let p_perp = polar(p, g, tol);
    if p_perp.dim() != q_perp.dim() {
        return Ok(false);
    }
    let images = ad_sq_images(&y.mat, p_perp.gens());
    // coordinates of the images in the q_perp span; the residual must be
    // small since (ad_y)^2 maps p_perp into q_perp when y is in q_perp
    let mut coords = DMatrix::zeros(q_perp.dim(), p_perp.dim());
    let scale = y.mat.max_abs().powi(2);
    for j in 0..images.ncols() {
        let img = images.column(j).into_owned();
        let c = q_perp.span().coords(&img);
        let residual = q_perp.span().residual(&img);
        if residual > tol.eq_abs * scale.max(1.0) * 100.0 {
            return Err(Error::inconsistency(format!(
                "(ad_y)^2 image leaves the polar of q (residual {residual:.3e})"
            )));
        }
        coords.set_column(j, &c);
    }
    Ok(linalg::real_col_rank(&coords, tol.rank_rel) == p_perp.dim())
}

/// The characteristic element of an opposite pair: the solution `z` of
/// `ad_z = +1` on `p_perp`, `0` on `p /\ q`, `-1` on `q_perp`, found by
/// stacked least squares over the algebra basis and verified post hoc.
pub fn characteristic_element(
    p: &SubalgebraRep,
    q: &SubalgebraRep,
    g: &AlgebraBasis,
    tol: &Tolerance,
) -> Result<LieElement> {
    let p_perp = polar(p, g, tol);
    let q_perp = polar(q, g, tol);
    let meet = intersection(p, q, g, tol)?;
    let flat_dim = g.basis()[0].flatten_real().len();
    let conditions: Vec<(&FMatrix, f64)> = p_perp
        .gens()
        .iter()
        .map(|m| (m, 1.0))
        .chain(meet.gens().iter().map(|m| (m, 0.0)))
        .chain(q_perp.gens().iter().map(|m| (m, -1.0)))
        .collect();
    let mut a = DMatrix::zeros(flat_dim * conditions.len(), g.dim());
    let mut b = DVector::zeros(flat_dim * conditions.len());
    for (row_block, (x, lambda)) in conditions.iter().enumerate() {
        for (col, e) in g.basis().iter().enumerate() {
            let img = bracket_mat(e, x);
            let flat = img.flatten_real();
            for (r, v) in flat.iter().enumerate() {
                a[(row_block * flat_dim + r, col)] = *v;
            }
        }
        let target = x.scale_real(*lambda).flatten_real();
        for (r, v) in target.iter().enumerate() {
            b[row_block * flat_dim + r] = *v;
        }
    }
    let (coeffs, residual) = linalg::lsq_solve(&a, &b, tol.rank_rel);
    let scale = conditions
        .iter()
        .map(|(m, _)| m.max_abs())
        .fold(1.0f64, f64::max);
    if residual > tol.eq_abs * scale * (conditions.len() as f64).sqrt() * 10.0 {
        return Err(Error::inconsistency(format!(
            "characteristic element system inconsistent (residual {residual:.3e})"
        )));
    }
    let z = g.combination(coeffs.as_slice());
    // verify the three eigenspace conditions explicitly
    let checks = [
        (&p_perp, 1.0),
        (&meet, 0.0),
        (&q_perp, -1.0),
    ];
    for (sub, lambda) in checks {
        for x in sub.gens() {
            let defect = bracket_mat(&z.mat, x).sub(&x.scale_real(lambda));
            if defect.max_abs() > tol.eq_abs * x.max_abs().max(1.0) * 100.0 {
                return Err(Error::inconsistency(
                    "characteristic element fails an eigenspace condition",
                ));
            }
        }
    }
    Ok(z)
}

/// Basis of `p /\ q` as a subspace.
pub fn intersection(
    p: &SubalgebraRep,
    q: &SubalgebraRep,
    g: &AlgebraBasis,
    tol: &Tolerance,
) -> Result<SubalgebraRep> {
    let meet = linalg::intersect_spans(p.span().basis(), q.span().basis(), tol.rank_rel);
    let field = g.field();
    let size = g.ambient_size();
    let gens: Vec<FMatrix> = (0..meet.ncols())
        .map(|j| {
            let col = meet.column(j);
            FMatrix::from_flat_real(field, size, size, col.as_slice())
        })
        .collect();
    SubalgebraRep::new(g.tag().clone(), gens, tol)
}

/// Exact polynomial exponential of a nilpotent matrix.
pub fn exp_nilpotent(y: &FMatrix) -> Result<FMatrix> {
    assert!(y.is_square());
    let n = y.rows();
    let scale = y.max_abs();
    let mut term = FMatrix::identity(y.field(), n);
    let mut sum = term.clone();
    let mut power = y.clone();
    let mut k = 1usize;
    loop {
        if power.max_abs() <= 1e-14 * scale.max(1.0).powi(k as i32) {
            break;
        }
        if k > n {
            return Err(Error::domain("matrix is not nilpotent"));
        }
        term = term.mul(y).scale_real(1.0 / k as f64);
        sum = sum.add(&term);
        k += 1;
        power = power.mul(y);
    }
    Ok(sum)
}

/// A validated circle datum: a prevalent `y` in the polar of the stabilizer
/// of the point at infinity. Transport at finite `t` is `exp(t y)`.
#[derive(Debug, Clone)]
pub struct CirclePlan {
    y: LieElement,
}

impl CirclePlan {
    /// `q_stab` is the infinitesimal stabilizer of the point the circle
    /// reaches at `t = inf`; it is also the prevalence witness for `y`.
    pub fn new(
        y: LieElement,
        q_stab: &SubalgebraRep,
        g: &AlgebraBasis,
        tol: &Tolerance,
    ) -> Result<CirclePlan> {
        let q_perp = polar(q_stab, g, tol);
        if !q_perp.contains(&y, tol.eq_abs * 10.0) {
            return Err(Error::precondition("circle velocity must lie in the polar of q"));
        }
        if !is_prevalent(&y, q_stab, g, tol) {
            return Err(Error::domain("velocity is not prevalent; the curve is not a circle"));
        }
        Ok(CirclePlan { y })
    }

    pub fn velocity(&self) -> &LieElement {
        &self.y
    }

    /// Group element `exp(t y)` moving the base point to the parameter-`t`
    /// point of the circle.
    pub fn transport(&self, t: f64) -> Result<FMatrix> {
        exp_nilpotent(&self.y.matrix().scale_real(t))
    }
}

/// Evaluates a circle through a model-supplied group action: `exp(t y)`
/// applied to `p` for finite `t`, the stored `q` at infinity.
pub fn circle_eval<P: Clone>(
    plan: &CirclePlan,
    p: &P,
    q: &P,
    t: crate::curve::ProjParam,
    act: impl Fn(&FMatrix, &P) -> P,
) -> Result<P> {
    match t {
        crate::curve::ProjParam::Infinity => Ok(q.clone()),
        crate::curve::ProjParam::Finite(t) => {
            let g = plan.transport(t)?;
            Ok(act(&g, p))
        }
    }
}
