//! The seven families of split sesquilinear forms and their isotropic
//! Grassmannians: dual bases, compactly adapted structures `J`, circles cut
//! out by form-skew connecting maps and the matching geodesics.

use crate::algebra::{AlgebraTag, LieElement};
use crate::curve::ProjParam;
use crate::error::{Error, Result};
use crate::grassmann::{circle_through_gr, ConnectingIso, GrassmannCircle, GrassmannGeodesic, SubspacePoint};
use crate::linalg::{self, Tolerance};
use crate::matrix::FMatrix;
use crate::scalar::{Field, Quat};
use nalgebra::{DMatrix, DVector};

/// The semilinearity type of a form: identity or componentwise conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sigma {
    Id,
    Conj,
}

impl Sigma {
    pub fn apply(self, q: Quat) -> Quat {
        match self {
            Sigma::Id => q,
            Sigma::Conj => q.conj(),
        }
    }

    /// The opposite semilinearity (`sigma-bar`).
    pub fn bar(self) -> Sigma {
        match self {
            Sigma::Id => Sigma::Conj,
            Sigma::Conj => Sigma::Id,
        }
    }
}

/// One of the seven families of split `(sigma, epsilon)`-forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FormFamily {
    /// (id, +1) over C; automorphisms O(2n, C).
    ComplexSymmetric,
    /// (id, -1) over R; automorphisms Sp(2n, R).
    RealSymplectic,
    /// (id, -1) over C; automorphisms Sp(2n, C).
    ComplexSymplectic,
    /// (conj, +1) over R; automorphisms O(n, n).
    RealSplitHermitian,
    /// (conj, +1) over C; automorphisms U(n, n).
    ComplexSplitHermitian,
    /// (conj, +1) over H; automorphisms Sp(n, n).
    QuaternionSplitHermitian,
    /// (conj, -1) over H; automorphisms SO*(2n).
    QuaternionSkewHermitian,
}

impl FormFamily {
    pub const ALL: [FormFamily; 7] = [
        FormFamily::ComplexSymmetric,
        FormFamily::RealSymplectic,
        FormFamily::ComplexSymplectic,
        FormFamily::RealSplitHermitian,
        FormFamily::ComplexSplitHermitian,
        FormFamily::QuaternionSplitHermitian,
        FormFamily::QuaternionSkewHermitian,
    ];

    pub fn field(self) -> Field {
        match self {
            FormFamily::ComplexSymmetric
            | FormFamily::ComplexSymplectic
            | FormFamily::ComplexSplitHermitian => Field::C,
            FormFamily::RealSymplectic | FormFamily::RealSplitHermitian => Field::R,
            FormFamily::QuaternionSplitHermitian | FormFamily::QuaternionSkewHermitian => Field::H,
        }
    }

    pub fn sigma(self) -> Sigma {
        match self {
            FormFamily::ComplexSymmetric
            | FormFamily::RealSymplectic
            | FormFamily::ComplexSymplectic => Sigma::Id,
            _ => Sigma::Conj,
        }
    }

    pub fn epsilon(self) -> f64 {
        match self {
            FormFamily::ComplexSymmetric
            | FormFamily::RealSplitHermitian
            | FormFamily::ComplexSplitHermitian
            | FormFamily::QuaternionSplitHermitian => 1.0,
            _ => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FormFamily::ComplexSymmetric => "c-symmetric",
            FormFamily::RealSymplectic => "r-symplectic",
            FormFamily::ComplexSymplectic => "c-symplectic",
            FormFamily::RealSplitHermitian => "r-hermitian",
            FormFamily::ComplexSplitHermitian => "c-hermitian",
            FormFamily::QuaternionSplitHermitian => "h-hermitian",
            FormFamily::QuaternionSkewHermitian => "h-skew-hermitian",
        }
    }
}

/// A split `(sigma, epsilon)`-form on `F^{2n}`, stored through its Gram
/// matrix: `f(x, y) = sum_ij sigma(x_i) G_ij y_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitForm {
    family: FormFamily,
    n: usize,
    gram: FMatrix,
}

impl SplitForm {
    /// The table model of the family on `F^{2n}`: both coordinate
    /// half-spaces are maximal isotropic.
    pub fn standard(family: FormFamily, n: usize) -> Result<SplitForm> {
        if n == 0 {
            return Err(Error::domain("split form needs n >= 1"));
        }
        let field = family.field();
        let lower_sign = match family {
            FormFamily::RealSymplectic
            | FormFamily::ComplexSymplectic
            | FormFamily::QuaternionSkewHermitian => -1.0,
            _ => 1.0,
        };
        let mut gram = FMatrix::zeros(field, 2 * n, 2 * n);
        for i in 0..n {
            gram.set(i, n + i, Quat::ONE);
            gram.set(n + i, i, Quat::real(lower_sign));
        }
        Ok(SplitForm { family, n, gram })
    }

    /// The diagonal realization `diag(I, -I)` of the split Hermitian form of
    /// the matching field; graphs of compact classical group elements are
    /// maximal isotropic subspaces of this form.
    pub fn graph_hermitian(field: Field, n: usize) -> Result<SplitForm> {
        if n == 0 {
            return Err(Error::domain("split form needs n >= 1"));
        }
        let family = match field {
            Field::R => FormFamily::RealSplitHermitian,
            Field::C => FormFamily::ComplexSplitHermitian,
            Field::H => FormFamily::QuaternionSplitHermitian,
        };
        let mut gram = FMatrix::zeros(field, 2 * n, 2 * n);
        for i in 0..n {
            gram.set(i, i, Quat::ONE);
            gram.set(n + i, n + i, Quat::real(-1.0));
        }
        Ok(SplitForm { family, n, gram })
    }

    /// Builds a form from an explicit Gram matrix, validating the
    /// `(sigma, epsilon)` symmetry and nondegeneracy.
    pub fn from_gram(
        family: FormFamily,
        gram: FMatrix,
        tol: &crate::linalg::Tolerance,
    ) -> Result<SplitForm> {
        let field = family.field();
        if gram.field() != field || !gram.is_square() || gram.rows() % 2 != 0 {
            return Err(Error::domain("Gram matrix incompatible with family"));
        }
        let n = gram.rows() / 2;
        if n == 0 {
            return Err(Error::domain("split form needs n >= 1"));
        }
        let sym = match family.sigma() {
            Sigma::Conj => gram.adjoint(),
            Sigma::Id => gram.transpose(),
        };
        if !gram.approx_eq(&sym.scale_real(family.epsilon()), tol.eq_abs) {
            return Err(Error::domain("Gram matrix violates the epsilon-symmetry"));
        }
        if crate::linalg::rank_of(&gram, tol) != 2 * n {
            return Err(Error::domain("degenerate Gram matrix"));
        }
        Ok(SplitForm { family, n, gram })
    }

    pub fn family(&self) -> FormFamily {
        self.family
    }

    pub fn field(&self) -> Field {
        self.family.field()
    }

    pub fn sigma(&self) -> Sigma {
        self.family.sigma()
    }

    pub fn epsilon(&self) -> f64 {
        self.family.epsilon()
    }

    /// Half dimension; maximal isotropic subspaces have this dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient(&self) -> usize {
        2 * self.n
    }

    pub fn gram(&self) -> &FMatrix {
        &self.gram
    }

    /// Self-duality of the isotropic Grassmannian. The split real Hermitian
    /// family fails it in odd rank.
    pub fn is_self_dual(&self) -> bool {
        !(self.family == FormFamily::RealSplitHermitian && self.n % 2 == 1)
    }

    pub fn eval(&self, x: &[Quat], y: &[Quat]) -> Quat {
        let sigma = self.sigma();
        let mut acc = Quat::ZERO;
        for i in 0..x.len() {
            let xi = sigma.apply(x[i]);
            if xi == Quat::ZERO {
                continue;
            }
            for j in 0..y.len() {
                let g = self.gram.get(i, j);
                if g == Quat::ZERO {
                    continue;
                }
                acc += xi * g * y[j];
            }
        }
        acc
    }

    /// Pairing matrix of the form on two column families: entry `(i, j)` is
    /// `f(a_i, b_j)`.
    pub fn pairing(&self, a: &FMatrix, b: &FMatrix) -> FMatrix {
        let sa = match self.sigma() {
            Sigma::Conj => a.adjoint(),
            Sigma::Id => a.transpose(),
        };
        sa.mul(&self.gram).mul(b)
    }

    /// Residual of the infinitesimal invariance condition
    /// `sigma(X)^T G + G X = 0` cutting out `u(f)`.
    pub fn skew_residual(&self, x: &FMatrix) -> f64 {
        self.skew_defect(x).max_abs()
    }

    pub fn skew_defect(&self, x: &FMatrix) -> FMatrix {
        let sx = match self.sigma() {
            Sigma::Conj => x.adjoint(),
            Sigma::Id => x.transpose(),
        };
        sx.mul(&self.gram).add(&self.gram.mul(x))
    }

    /// Largest `|f(b_i, b_j)|` over the columns of `b`.
    pub fn isotropy_residual(&self, b: &FMatrix) -> f64 {
        self.pairing(b, b).max_abs()
    }
}

/// A maximal isotropic subspace of a split form.
#[derive(Debug, Clone)]
pub struct IsotropicSubspace {
    form: SplitForm,
    point: SubspacePoint,
}

impl IsotropicSubspace {
    pub fn new(form: &SplitForm, basis: FMatrix, tol: &Tolerance) -> Result<IsotropicSubspace> {
        if basis.rows() != form.ambient() || basis.field() != form.field() {
            return Err(Error::domain("basis does not match the form's ambient space"));
        }
        if basis.cols() != form.n() {
            return Err(Error::domain("maximal isotropic subspaces have half dimension"));
        }
        let point = SubspacePoint::new(basis, tol)?;
        let residual = form.isotropy_residual(point.basis());
        if residual > tol.eq_abs {
            return Err(Error::domain(format!(
                "subspace is not isotropic (residual {residual:.3e})"
            )));
        }
        Ok(IsotropicSubspace { form: form.clone(), point })
    }

    pub fn first_half(form: &SplitForm) -> IsotropicSubspace {
        let point = SubspacePoint::coordinate(form.field(), form.ambient(), 0, form.n());
        IsotropicSubspace { form: form.clone(), point }
    }

    pub fn second_half(form: &SplitForm) -> IsotropicSubspace {
        let point = SubspacePoint::coordinate(form.field(), form.ambient(), form.n(), form.n());
        IsotropicSubspace { form: form.clone(), point }
    }

    pub fn form(&self) -> &SplitForm {
        &self.form
    }

    pub fn point(&self) -> &SubspacePoint {
        &self.point
    }

    pub fn basis(&self) -> &FMatrix {
        self.point.basis()
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    /// Image under a form-preserving matrix.
    pub fn act(&self, g: &FMatrix, tol: &Tolerance) -> Result<IsotropicSubspace> {
        let moved = self.point.act(g, tol);
        IsotropicSubspace::new(&self.form, moved.basis().clone(), tol)
    }
}

/// Basis of `Q` dual to the columns of `b` (a basis of `P`): `f(u_i, v_j) =
/// delta_ij`, solved from the pairing system against any starting basis of
/// `Q`.
pub fn dual_basis(
    b: &FMatrix,
    q: &IsotropicSubspace,
    form: &SplitForm,
    tol: &Tolerance,
) -> Result<FMatrix> {
    let pairing = form.pairing(b, q.basis());
    let coeff = pairing.inverse(tol.rank_rel).map_err(|_| {
        Error::precondition("singular pairing matrix: subspaces are not complementary")
    })?;
    let dual = q.basis().mul(&coeff);
    let check = form.pairing(b, &dual);
    let residual = check.sub(&FMatrix::identity(form.field(), b.cols())).max_abs();
    if residual > tol.eq_abs * 100.0 {
        return Err(Error::inconsistency(format!(
            "dual basis residual {residual:.3e}"
        )));
    }
    Ok(dual)
}

/// A `sigma-bar`-linear map compactly adapted to a split form: `J^2 =
/// epsilon id`, `f(Jx, Jy) = sigma-bar f(x, y)`, and `D(x, y) = f(Jx, y)`
/// definite.
#[derive(Debug, Clone)]
pub struct CompatibleJ {
    mat: FMatrix,
    conjugating: bool,
    /// sign of the definite form `D`
    definite_sign: f64,
}

impl CompatibleJ {
    pub fn matrix(&self) -> &FMatrix {
        &self.mat
    }

    /// Whether the map conjugates coordinates before applying the matrix.
    pub fn is_conjugating(&self) -> bool {
        self.conjugating
    }

    pub fn definite_sign(&self) -> f64 {
        self.definite_sign
    }

    pub fn apply(&self, x: &[Quat]) -> Vec<Quat> {
        if self.conjugating {
            let conj: Vec<Quat> = x.iter().map(|q| q.conj()).collect();
            self.mat.mul_vec(&conj)
        } else {
            self.mat.mul_vec(x)
        }
    }

    pub fn apply_columns(&self, m: &FMatrix) -> FMatrix {
        if self.conjugating {
            self.mat.mul(&m.conj_entrywise())
        } else {
            self.mat.mul(m)
        }
    }

    /// Commutation with an `F`-linear map given by a matrix.
    pub fn commutes_with(&self, s: &FMatrix, tol: &Tolerance) -> bool {
        let lhs = if self.conjugating {
            self.mat.mul(&s.conj_entrywise())
        } else {
            self.mat.mul(s)
        };
        let rhs = s.mul(&self.mat);
        lhs.approx_eq(&rhs, tol.eq_abs * s.max_abs().max(1.0) * 10.0)
    }
}

/// Builds the compactly adapted map with `J u_i = v_i`, `J v_i = eps u_i`
/// from a basis of `P` and a dual basis of `Q`, verifying all invariants.
pub fn build_j(
    b: &FMatrix,
    b_dual: &FMatrix,
    form: &SplitForm,
    tol: &Tolerance,
) -> Result<CompatibleJ> {
    let eps = form.epsilon();
    let frame = b.hcat(b_dual);
    let images = b_dual.hcat(&b.scale_real(eps));
    let conjugating = form.sigma().bar() == Sigma::Conj && form.field() != Field::R;
    let mat = if conjugating {
        images.mul(&frame.conj_entrywise().inverse(tol.rank_rel)?)
    } else {
        images.mul(&frame.inverse(tol.rank_rel)?)
    };
    // J^2 = eps id
    let j_sq = if conjugating {
        mat.mul(&mat.conj_entrywise())
    } else {
        mat.mul(&mat)
    };
    let eye = FMatrix::identity(form.field(), form.ambient());
    if !j_sq.approx_eq(&eye.scale_real(eps), tol.eq_abs * 100.0) {
        return Err(Error::inconsistency("J^2 differs from epsilon id"));
    }
    // f(J e_i, J e_j) = sigma-bar f(e_i, e_j) on the coordinate basis
    let transformed = form.pairing(&mat, &mat);
    let expected = match form.sigma().bar() {
        Sigma::Id => form.gram().clone(),
        Sigma::Conj => form.gram().conj_entrywise(),
    };
    if !transformed.approx_eq(&expected, tol.eq_abs * 100.0) {
        return Err(Error::inconsistency("J does not scale the form by sigma-bar"));
    }
    // D(x, y) = f(Jx, y) must be conjugate-Hermitian and definite
    let d_gram = form.pairing(&mat, &eye);
    if !d_gram.approx_eq(&d_gram.adjoint(), tol.eq_abs * 100.0) {
        return Err(Error::inconsistency("D form is not Hermitian"));
    }
    let definite_sign = match definite_sign(&d_gram) {
        Some(s) => s,
        None => return Err(Error::inconsistency("D form is not definite")),
    };
    Ok(CompatibleJ { mat, conjugating, definite_sign })
}

/// Sign of a definite Hermitian matrix, or None when indefinite; probed by
/// the eigenvalues of the real or complex realization.
fn definite_sign(d: &FMatrix) -> Option<f64> {
    let eigen: Vec<f64> = match d.field() {
        Field::R => nalgebra::SymmetricEigen::new(d.to_na_real())
            .eigenvalues
            .iter()
            .copied()
            .collect(),
        Field::C => nalgebra::SymmetricEigen::new(d.to_na_complex())
            .eigenvalues
            .iter()
            .copied()
            .collect(),
        Field::H => nalgebra::SymmetricEigen::new(
            d.quaternion_complex_embed().expect("field checked").to_na_complex(),
        )
        .eigenvalues
        .iter()
        .copied()
        .collect(),
    };
    let max = eigen.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let cut = 1e-10 * max;
    if eigen.iter().all(|&l| l > cut) {
        Some(1.0)
    } else if eigen.iter().all(|&l| l < -cut) {
        Some(-1.0)
    } else {
        None
    }
}

/// Basis of the real-linear space of connecting maps `T: P -> Q` (as
/// matrices from the stored basis of `P` to the stored basis of `Q`)
/// satisfying the skew condition `f(Tx, y) + f(x, Ty) = 0`.
pub fn tskew_space(
    p: &IsotropicSubspace,
    q: &IsotropicSubspace,
    tol: &Tolerance,
) -> Vec<FMatrix> {
    let form = p.form();
    let field = form.field();
    let n = p.dim();
    let units: &[Quat] = match field {
        Field::R => &[Quat::ONE],
        Field::C => &[Quat::ONE, Quat::I],
        Field::H => &[Quat::ONE, Quat::I, Quat::J, Quat::K],
    };
    let mut coord = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for &u in units {
                let mut m = FMatrix::zeros(field, n, n);
                m.set(i, j, u);
                coord.push(m);
            }
        }
    }
    let mut cond = DMatrix::zeros(n * n * field.real_dim(), coord.len());
    for (k, t_mat) in coord.iter().enumerate() {
        let t_cols = q.basis().mul(t_mat);
        // f(T u_i, u_j) + f(u_i, T u_j)
        let defect = form
            .pairing(&t_cols, p.basis())
            .add(&form.pairing(p.basis(), &t_cols));
        cond.set_column(k, &DVector::from_vec(defect.flatten_real()));
    }
    let null = linalg::real_nullspace(&cond, tol.rank_rel);
    (0..null.ncols())
        .map(|c| {
            let mut m = FMatrix::zeros(field, n, n);
            for (k, e) in coord.iter().enumerate() {
                let w = null[(k, c)];
                if w != 0.0 {
                    m = m.add(&e.scale_real(w));
                }
            }
            m
        })
        .collect()
}

/// Circle through three pairwise complementary maximal isotropic subspaces.
///
/// The connecting map is solved exactly as in the standard Grassmannian and
/// the skew condition is then verified; failure signals corrupted inputs.
pub fn circle_through_iso(
    p: &IsotropicSubspace,
    p1: &IsotropicSubspace,
    q: &IsotropicSubspace,
    tol: &Tolerance,
) -> Result<(ConnectingIso, GrassmannCircle)> {
    let form = p.form();
    if p1.form() != form || q.form() != form {
        return Err(Error::domain("subspaces belong to different forms"));
    }
    if !form.is_self_dual() {
        return Err(Error::domain(
            "the split real Hermitian family with odd n is not self dual; no circles",
        ));
    }
    let (iso, circle) = circle_through_gr(p.point(), p1.point(), q.point(), tol)?;
    let t_cols = iso.image_columns();
    let defect = form
        .pairing(t_cols, p.basis())
        .add(&form.pairing(p.basis(), t_cols));
    let residual = defect.max_abs();
    if residual > tol.eq_abs * t_cols.max_abs().max(1.0) * 100.0 {
        return Err(Error::inconsistency(format!(
            "connecting map violates the form-skew condition (residual {residual:.3e})"
        )));
    }
    Ok((iso, circle))
}

/// The adapted data of a circle: a basis of `P` normalizing the pairing
/// `h(x, y) = f(x, Ty)`, the induced dual basis of `Q` inside `T(P)`, the
/// compactly adapted `J` they generate, and the geodesic generator `S`
/// (equal to `T` on `P` and `-T^{-1}` on `Q`).
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    pub basis: FMatrix,
    pub dual: FMatrix,
    pub j: CompatibleJ,
    pub s: LieElement,
    /// number of `+1` (or `+i`) entries of the normalized pairing
    pub positive_count: usize,
}

/// How the pairing `h` of a family is normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
enum PairingKind {
    /// sigma-symmetric with a real diagonal normal form `diag(I_k, -I_{n-k})`
    SignDiagonal,
    /// complex symmetric bilinear, congruent to the identity
    UnitDiagonal,
    /// skew-Hermitian, diagonal with entries `+-i`
    ImaginaryDiagonal { fixed_sign: bool },
    /// alternating, symplectic pairs (forces even rank)
    Alternating,
}

fn pairing_kind(family: FormFamily) -> PairingKind {
    match family {
        FormFamily::RealSymplectic => PairingKind::SignDiagonal,
        FormFamily::QuaternionSkewHermitian => PairingKind::SignDiagonal,
        FormFamily::ComplexSymplectic => PairingKind::UnitDiagonal,
        FormFamily::ComplexSplitHermitian => PairingKind::ImaginaryDiagonal { fixed_sign: false },
        FormFamily::QuaternionSplitHermitian => PairingKind::ImaginaryDiagonal { fixed_sign: true },
        FormFamily::ComplexSymmetric | FormFamily::RealSplitHermitian => PairingKind::Alternating,
    }
}

/// Builds the adapted frame of a connecting isomorphism.
pub fn adapted_basis_and_s(
    p: &IsotropicSubspace,
    iso: &ConnectingIso,
    tol: &Tolerance,
) -> Result<AdaptedFrame> {
    let form = p.form();
    let n = p.dim();
    let h = form.pairing(p.basis(), iso.image_columns());
    let kind = pairing_kind(form.family());
    // columns of `change`: coordinates of the adapted basis of P in the
    // stored basis; lambda: right scalars with v_i = T(u'_i) lambda_i
    let (change, lambdas, positive_count) = match kind {
        PairingKind::Alternating => {
            if n % 2 != 0 {
                return Err(Error::domain(
                    "alternating pairing needs even rank: n is even, say n = 2k",
                ));
            }
            let change = symplectic_normal_basis(&h, form.sigma(), tol)?;
            (change, vec![Quat::ONE; n], n / 2)
        }
        _ => {
            let (change, diag) = congruence_diagonalize(&h, form, kind, tol)?;
            let lambdas: Vec<Quat> = diag.iter().map(|d| d.inv()).collect();
            let positive = diag
                .iter()
                .filter(|d| if matches!(kind, PairingKind::ImaginaryDiagonal { .. }) {
                    d.x > 0.0
                } else {
                    d.w > 0.0
                })
                .count();
            (change, lambdas, positive)
        }
    };
    let basis = p.basis().mul(&change);
    let t_images = iso.image_columns().mul(&change);
    // dual basis of Q inside T(P)
    let dual = match kind {
        PairingKind::Alternating => {
            let k = n / 2;
            let mut cols: Vec<Vec<Quat>> = Vec::with_capacity(n);
            for i in 0..k {
                cols.push(t_images.column(k + i));
            }
            for i in 0..k {
                cols.push(t_images.column(i).iter().map(|q| -*q).collect());
            }
            FMatrix::from_columns(form.field(), form.ambient(), &cols)
        }
        _ => {
            let cols: Vec<Vec<Quat>> = (0..n)
                .map(|i| {
                    t_images
                        .column(i)
                        .iter()
                        .map(|q| *q * lambdas[i])
                        .collect()
                })
                .collect();
            FMatrix::from_columns(form.field(), form.ambient(), &cols)
        }
    };
    // duality against the adapted basis
    let duality = form.pairing(&basis, &dual);
    let residual = duality.sub(&FMatrix::identity(form.field(), n)).max_abs();
    if residual > tol.eq_abs * 1e3 {
        return Err(Error::inconsistency(format!(
            "adapted dual basis residual {residual:.3e}"
        )));
    }
    let j = build_j(&basis, &dual, form, tol)?;
    // S: u'_i -> T u'_i, v_i -> -T^{-1} v_i, assembled as an ambient matrix
    let s_on_dual = match kind {
        PairingKind::Alternating => {
            let k = n / 2;
            let mut cols: Vec<Vec<Quat>> = Vec::with_capacity(n);
            for i in 0..k {
                // S v_i = -u'_{k+i}
                cols.push(basis.column(k + i).iter().map(|q| -*q).collect());
            }
            for i in 0..k {
                // S v_{k+i} = u'_i
                cols.push(basis.column(i));
            }
            FMatrix::from_columns(form.field(), form.ambient(), &cols)
        }
        _ => {
            let cols: Vec<Vec<Quat>> = (0..n)
                .map(|i| {
                    basis
                        .column(i)
                        .iter()
                        .map(|q| -(*q * lambdas[i]))
                        .collect()
                })
                .collect();
            FMatrix::from_columns(form.field(), form.ambient(), &cols)
        }
    };
    let frame = basis.hcat(&dual);
    let images = t_images.hcat(&s_on_dual);
    let s_mat = images.mul(&frame.inverse(tol.rank_rel)?);
    let tag = AlgebraTag::FormPreserving(Box::new(form.clone()));
    let s = LieElement::new(tag, s_mat, tol)
        .map_err(|e| Error::inconsistency(format!("S is not form-skew: {e}")))?;
    if !j.commutes_with(s.matrix(), tol) {
        return Err(Error::inconsistency("S does not commute with J"));
    }
    Ok(AdaptedFrame { basis, dual, j, s, positive_count })
}

/// Congruence diagonalization of the pairing to the family's normal form;
/// returns the basis change and the achieved diagonal values.
fn congruence_diagonalize(
    h: &FMatrix,
    form: &SplitForm,
    kind: PairingKind,
    tol: &Tolerance,
) -> Result<(FMatrix, Vec<Quat>)> {
    let field = form.field();
    let sigma = form.sigma();
    let n = h.rows();
    let hv = |x: &[Quat], y: &[Quat]| -> Quat {
        let mut acc = Quat::ZERO;
        for i in 0..n {
            let xi = sigma.apply(x[i]);
            for j in 0..n {
                acc += xi * h.get(i, j) * y[j];
            }
        }
        acc
    };
    let scale = h.max_abs();
    let pivot_tol = tol.rank_rel.sqrt() * scale;
    let mut work: Vec<Vec<Quat>> = (0..n)
        .map(|j| {
            let mut e = vec![Quat::ZERO; n];
            e[j] = Quat::ONE;
            e
        })
        .collect();
    let mut done: Vec<(Vec<Quat>, Quat)> = Vec::new();
    while let Some(()) = (!work.is_empty()).then_some(()) {
        // pick the best self-pairing pivot, mixing two vectors when the
        // diagonal degenerates
        let (mut best_idx, mut best_val) = (0, 0.0f64);
        for (idx, w) in work.iter().enumerate() {
            let v = hv(w, w).norm();
            if v > best_val {
                best_val = v;
                best_idx = idx;
            }
        }
        if best_val <= pivot_tol {
            let mut best_pair = (0, 0, 0.0f64);
            for a in 0..work.len() {
                for b in 0..work.len() {
                    if a == b {
                        continue;
                    }
                    let v = hv(&work[a], &work[b]).norm();
                    if v > best_pair.2 {
                        best_pair = (a, b, v);
                    }
                }
            }
            let (a, b, v) = best_pair;
            if v <= pivot_tol {
                return Err(Error::inconsistency("degenerate pairing during diagonalization"));
            }
            let hab = hv(&work[a], &work[b]);
            // choose the mixing scalar per symmetry class so the new
            // self-pairing cannot cancel
            let lambda = match kind {
                PairingKind::ImaginaryDiagonal { .. } => hab.inv() * Quat::I.scale(hab.norm()),
                _ => hab.inv().scale(hab.norm()),
            };
            let mixed: Vec<Quat> = work[a]
                .iter()
                .zip(&work[b])
                .map(|(x, y)| *x + *y * lambda)
                .collect();
            work[a] = mixed;
            continue;
        }
        let mut c = work.remove(best_idx);
        let val = hv(&c, &c);
        // normalize the self-pairing to the family target
        let alpha = match kind {
            PairingKind::SignDiagonal => Quat::real(1.0 / val.w.abs().sqrt()),
            PairingKind::UnitDiagonal => {
                // complex square root of the inverse
                let z = val.to_c64();
                let root = z.sqrt();
                Quat::from_c64(1.0 / root)
            }
            PairingKind::ImaginaryDiagonal { fixed_sign } => {
                if field == Field::C && !fixed_sign {
                    Quat::real(1.0 / val.x.abs().sqrt())
                } else {
                    // rotate the unit imaginary direction onto i
                    let rho = val.norm();
                    let unit = val.scale(1.0 / rho);
                    let q = rotate_imaginary_to_i(unit);
                    q.scale(1.0 / rho.sqrt())
                }
            }
            PairingKind::Alternating => unreachable!(),
        };
        for entry in c.iter_mut() {
            *entry = *entry * alpha;
        }
        let pivot_val = hv(&c, &c);
        let inv = pivot_val.inv();
        for w in work.iter_mut() {
            let coeff = inv * hv(&c, w);
            for (wi, ci) in w.iter_mut().zip(&c) {
                *wi -= *ci * coeff;
            }
        }
        done.push((c, pivot_val));
    }
    // order: positive entries first, then negative, descending magnitude is
    // already implied by pivot selection
    let positive = |d: &Quat| match kind {
        PairingKind::ImaginaryDiagonal { .. } => d.x > 0.0,
        _ => d.w > 0.0,
    };
    done.sort_by_key(|(_, d)| if positive(d) { 0 } else { 1 });
    let cols: Vec<Vec<Quat>> = done.iter().map(|(c, _)| c.clone()).collect();
    let diag: Vec<Quat> = done.iter().map(|(_, d)| *d).collect();
    Ok((FMatrix::from_columns(field, n, &cols), diag))
}

/// Unit quaternion `q` with `conj(q) u q = i` for a unit imaginary `u`.
fn rotate_imaginary_to_i(u: Quat) -> Quat {
    let cand = Quat::ONE - u * Quat::I;
    if cand.norm() > 1e-6 {
        cand.scale(1.0 / cand.norm())
    } else {
        // u = -i: any unit quaternion anticommuting with i works
        Quat::J
    }
}

/// Basis with `h(u_i, u_{k+i}) = 1 = -h(u_{k+i}, u_i)` and all other
/// pairings zero, for an alternating pairing.
fn symplectic_normal_basis(h: &FMatrix, sigma: Sigma, tol: &Tolerance) -> Result<FMatrix> {
    let n = h.rows();
    let k = n / 2;
    let field = h.field();
    let hv = |x: &[Quat], y: &[Quat]| -> Quat {
        let mut acc = Quat::ZERO;
        for i in 0..n {
            let xi = sigma.apply(x[i]);
            for j in 0..n {
                acc += xi * h.get(i, j) * y[j];
            }
        }
        acc
    };
    let scale = h.max_abs();
    let pair_tol = tol.rank_rel.sqrt() * scale;
    let mut work: Vec<Vec<Quat>> = (0..n)
        .map(|j| {
            let mut e = vec![Quat::ZERO; n];
            e[j] = Quat::ONE;
            e
        })
        .collect();
    let mut firsts: Vec<Vec<Quat>> = Vec::new();
    let mut seconds: Vec<Vec<Quat>> = Vec::new();
    while work.len() >= 2 {
        // largest available pairing
        let mut best = (0usize, 1usize, 0.0f64);
        for a in 0..work.len() {
            for b in a + 1..work.len() {
                let v = hv(&work[a], &work[b]).norm();
                if v > best.2 {
                    best = (a, b, v);
                }
            }
        }
        let (a_idx, b_idx, v) = best;
        if v <= pair_tol {
            return Err(Error::inconsistency("degenerate alternating pairing"));
        }
        let a = work.remove(a_idx);
        let mut b = work.remove(if b_idx > a_idx { b_idx - 1 } else { b_idx });
        let lam = hv(&a, &b).inv();
        for entry in b.iter_mut() {
            *entry = *entry * lam;
        }
        for w in work.iter_mut() {
            let ca = hv(&b, w);
            let cb = hv(&a, w);
            for i in 0..n {
                // w + a h(b, w) - b h(a, w)
                let adj = a[i] * ca - b[i] * cb;
                w[i] += adj;
            }
        }
        firsts.push(a);
        seconds.push(b);
    }
    if firsts.len() != k {
        return Err(Error::inconsistency("symplectic reduction lost rank"));
    }
    let mut cols = firsts;
    cols.extend(seconds);
    Ok(FMatrix::from_columns(field, n, &cols))
}

/// The geodesic matched to an isotropic circle: `gamma(s) = exp(pi s S) P =
/// span{cos(pi s) u_i + sin(pi s) T u_i}`, with `gamma(s) = c(tan(pi s))`.
pub fn geodesic_iso(iso: &ConnectingIso) -> GrassmannGeodesic {
    crate::grassmann::geodesic_gr(iso)
}
