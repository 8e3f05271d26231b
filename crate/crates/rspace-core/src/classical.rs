//! The compact classical groups `SO(2m)`, `U(n)` and `Sp(n)` realized as
//! components of isotropic Grassmannians through the graph embedding
//! `A -> graph(A)`, with the birational action of the split Hermitian
//! automorphism groups and the diagonal geodesics.

use crate::curve::ProjParam;
use crate::error::{Error, Result};
use crate::isotropic::{IsotropicSubspace, SplitForm};
use crate::linalg::{self, Tolerance};
use crate::matrix::FMatrix;
use crate::scalar::{Field, Quat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ClassicalGroup {
    /// `SO(2m)` over `R`; sizes are forced even.
    SpecialOrthogonal,
    /// `U(n)` over `C`.
    Unitary,
    /// `Sp(n)`, the quaternionic unitary group.
    CompactSymplectic,
}

impl ClassicalGroup {
    pub fn field(self) -> Field {
        match self {
            ClassicalGroup::SpecialOrthogonal => Field::R,
            ClassicalGroup::Unitary => Field::C,
            ClassicalGroup::CompactSymplectic => Field::H,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassicalGroup::SpecialOrthogonal => "so",
            ClassicalGroup::Unitary => "u",
            ClassicalGroup::CompactSymplectic => "sp",
        }
    }
}

/// An element of a compact classical group: `A^H A = I`, plus `det A = 1`
/// for the special orthogonal family.
#[derive(Debug, Clone)]
pub struct ClassicalGroupElement {
    group: ClassicalGroup,
    mat: FMatrix,
}

impl ClassicalGroupElement {
    pub fn new(group: ClassicalGroup, mat: FMatrix, tol: &Tolerance) -> Result<ClassicalGroupElement> {
        if mat.field() != group.field() || !mat.is_square() {
            return Err(Error::domain("matrix does not match the group's field"));
        }
        if group == ClassicalGroup::SpecialOrthogonal && mat.rows() % 2 != 0 {
            return Err(Error::domain("special orthogonal elements here have even size"));
        }
        let n = mat.rows();
        let gram = mat.adjoint().mul(&mat);
        if !gram.approx_eq(&FMatrix::identity(group.field(), n), tol.eq_abs * 10.0) {
            return Err(Error::domain("matrix does not preserve the definite form"));
        }
        if group == ClassicalGroup::SpecialOrthogonal {
            let det = mat.to_na_real().determinant();
            if (det - 1.0).abs() > tol.eq_abs * 100.0 {
                return Err(Error::domain("orientation-reversing orthogonal matrix"));
            }
        }
        Ok(ClassicalGroupElement { group, mat })
    }

    pub fn identity(group: ClassicalGroup, size: usize) -> ClassicalGroupElement {
        ClassicalGroupElement { group, mat: FMatrix::identity(group.field(), size) }
    }

    pub fn group(&self) -> ClassicalGroup {
        self.group
    }

    pub fn size(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &FMatrix {
        &self.mat
    }

    pub fn distance_to(&self, other: &ClassicalGroupElement) -> f64 {
        self.mat.sub(&other.mat).max_abs()
    }
}

/// The split Hermitian form whose isotropic Grassmannian hosts the graphs
/// of the group: `diag(I, -I)` over the group's field.
pub fn graph_form(group: ClassicalGroup, size: usize) -> Result<SplitForm> {
    SplitForm::graph_hermitian(group.field(), size)
}

/// Graph embedding `phi(A) = {(x, Ax)}` of a group element as a maximal
/// isotropic subspace of the graph form.
pub fn graph_embed(a: &ClassicalGroupElement, tol: &Tolerance) -> Result<IsotropicSubspace> {
    let n = a.size();
    let field = a.group.field();
    let form = graph_form(a.group, n)?;
    let mut cols = FMatrix::zeros(field, 2 * n, n);
    for j in 0..n {
        cols.set(j, j, Quat::ONE);
        for i in 0..n {
            cols.set(n + i, j, a.mat.get(i, j));
        }
    }
    IsotropicSubspace::new(&form, cols, tol)
        .map_err(|_| Error::domain("graph is not isotropic: matrix is not in the group"))
}

/// Recovers a group element from a subspace lying in the graph chart.
pub fn graph_to_element(
    group: ClassicalGroup,
    sub: &IsotropicSubspace,
    tol: &Tolerance,
) -> Result<ClassicalGroupElement> {
    let n = sub.dim();
    let field = group.field();
    let basis = sub.basis();
    let top = FMatrix::from_fn(field, n, n, |i, j| basis.get(i, j));
    let bottom = FMatrix::from_fn(field, n, n, |i, j| basis.get(n + i, j));
    let top_inv = top
        .inverse(tol.rank_rel)
        .map_err(|_| Error::inconsistency("subspace left the graph chart"))?;
    ClassicalGroupElement::new(group, bottom.mul(&top_inv), tol)
        .map_err(|_| Error::inconsistency("graph chart produced a non-group matrix"))
}

/// Opposition of two group elements: their graphs are complementary, i.e.
/// `S - T` is invertible (no unit vector is fixed by `T^{-1} S`).
pub fn is_opposite_classical(
    a: &ClassicalGroupElement,
    b: &ClassicalGroupElement,
    tol: &Tolerance,
) -> Result<bool> {
    if a.group != b.group || a.size() != b.size() {
        return Err(Error::domain("group elements are not comparable"));
    }
    let diff = a.mat.sub(&b.mat);
    Ok(linalg::rank_of(&diff, tol) == a.size())
}

/// The birational action of the split Hermitian automorphism group on the
/// compact group: for a block matrix `[[a, c], [b, d]]` preserving the
/// graph form, `A` maps to `B = (b + d A)(a + c A)^{-1}`.
pub fn birational_act(
    cal: &FMatrix,
    a: &ClassicalGroupElement,
    tol: &Tolerance,
) -> Result<ClassicalGroupElement> {
    let n = a.size();
    let field = a.group.field();
    if cal.rows() != 2 * n || cal.field() != field {
        return Err(Error::domain("block matrix has the wrong shape"));
    }
    let form = graph_form(a.group, n)?;
    let defect = form
        .pairing(cal, cal)
        .sub(form.gram());
    if defect.max_abs() > tol.eq_abs * cal.max_abs().powi(2).max(1.0) * 10.0 {
        return Err(Error::domain("block matrix does not preserve the graph form"));
    }
    let block = |r0: usize, c0: usize| FMatrix::from_fn(field, n, n, |i, j| cal.get(r0 + i, c0 + j));
    let a_blk = block(0, 0);
    let c_blk = block(0, n);
    let b_blk = block(n, 0);
    let d_blk = block(n, n);
    let denom = a_blk.add(&c_blk.mul(&a.mat));
    let denom_inv = denom.inverse(tol.rank_rel).map_err(|_| {
        Error::precondition("image leaves the graph chart (point at infinity)")
    })?;
    let b = b_blk.add(&d_blk.mul(&a.mat)).mul(&denom_inv);
    ClassicalGroupElement::new(a.group, b, tol)
        .map_err(|e| Error::inconsistency(format!("birational image left the group: {e}")))
}

/// The diagonal geodesic through the identity in standard position:
/// block rotations `(R_t, ..., R_t)` for `SO(2m)` and the scalar curves
/// `(e^{it}, ..., e^{it})` for `U(n)` and `Sp(n)`.
#[derive(Debug, Clone)]
pub struct DiagonalGeodesic {
    group: ClassicalGroup,
    size: usize,
}

pub fn diagonal_geodesic_classical(group: ClassicalGroup, size: usize) -> Result<DiagonalGeodesic> {
    if size == 0 || (group == ClassicalGroup::SpecialOrthogonal && size % 2 != 0) {
        return Err(Error::domain("invalid size for the diagonal geodesic"));
    }
    Ok(DiagonalGeodesic { group, size })
}

impl DiagonalGeodesic {
    /// Group element at angle `t`.
    pub fn element_at(&self, t: f64) -> ClassicalGroupElement {
        let field = self.group.field();
        let mat = match self.group {
            ClassicalGroup::SpecialOrthogonal => {
                let mut m = FMatrix::zeros(field, self.size, self.size);
                let (s, c) = t.sin_cos();
                for b in 0..self.size / 2 {
                    m.set(2 * b, 2 * b, Quat::real(c));
                    m.set(2 * b, 2 * b + 1, Quat::real(-s));
                    m.set(2 * b + 1, 2 * b, Quat::real(s));
                    m.set(2 * b + 1, 2 * b + 1, Quat::real(c));
                }
                m
            }
            ClassicalGroup::Unitary | ClassicalGroup::CompactSymplectic => {
                let (s, c) = t.sin_cos();
                let scalar = Quat::complex(c, s);
                let mut m = FMatrix::zeros(field, self.size, self.size);
                for i in 0..self.size {
                    m.set(i, i, scalar);
                }
                m
            }
        };
        ClassicalGroupElement { group: self.group, mat }
    }

    /// The graph curve as a geodesic of the isotropic Grassmannian with
    /// period 1: `s` maps to the graph of the element at angle `2 pi s`.
    pub fn graph_at(&self, s: f64, tol: &Tolerance) -> IsotropicSubspace {
        let el = self.element_at(2.0 * std::f64::consts::PI * s);
        graph_embed(&el, tol).expect("diagonal elements stay in the group")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraBasis;
    use crate::grassmann::is_opposite_gr;
    use crate::isotropic::circle_through_iso;
    use rand::{Rng, SeedableRng};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn random_group_element(
        group: ClassicalGroup,
        size: usize,
        rng: &mut impl Rng,
        scale: f64,
    ) -> ClassicalGroupElement {
        // exponential of a random anti-Hermitian (and traceless for SO) matrix
        let field = group.field();
        let dim = field.real_dim();
        let mut x = FMatrix::zeros(field, size, size);
        for i in 0..size {
            for j in i..size {
                let mut c = [0.0; 4];
                for v in c.iter_mut().take(dim) {
                    *v = rng.gen_range(-scale..scale);
                }
                let q = Quat::new(c[0], c[1], c[2], c[3]);
                if i == j {
                    let imag = Quat::new(0.0, q.x, q.y, q.z);
                    if !(group == ClassicalGroup::SpecialOrthogonal) {
                        x.set(i, i, imag);
                    }
                } else {
                    x.set(i, j, q);
                    x.set(j, i, -q.conj());
                }
            }
        }
        ClassicalGroupElement::new(group, x.exp_series(), &tol()).unwrap()
    }

    #[test]
    fn graph_of_identity_is_isotropic() {
        for group in [
            ClassicalGroup::SpecialOrthogonal,
            ClassicalGroup::Unitary,
            ClassicalGroup::CompactSymplectic,
        ] {
            let size = if group == ClassicalGroup::SpecialOrthogonal { 4 } else { 3 };
            let id = ClassicalGroupElement::identity(group, size);
            let sub = graph_embed(&id, &tol()).unwrap();
            assert_eq!(sub.dim(), size);
            let back = graph_to_element(group, &sub, &tol()).unwrap();
            assert!(back.distance_to(&id) < 1e-12);
        }
    }

    #[test]
    fn graph_embedding_is_injective() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(41);
        for group in [
            ClassicalGroup::SpecialOrthogonal,
            ClassicalGroup::Unitary,
            ClassicalGroup::CompactSymplectic,
        ] {
            let size = if group == ClassicalGroup::SpecialOrthogonal { 4 } else { 2 };
            for _ in 0..30 {
                let a = random_group_element(group, size, &mut rng, 0.8);
                let b = random_group_element(group, size, &mut rng, 0.8);
                let ga = graph_embed(&a, &tol()).unwrap();
                let gb = graph_embed(&b, &tol()).unwrap();
                let subspace_equal = ga.point().equal_to(gb.point(), &tol());
                let matrices_equal = a.distance_to(&b) < 1e-8;
                assert_eq!(subspace_equal, matrices_equal, "{group:?}");
            }
        }
    }

    #[test]
    fn opposite_iff_difference_invertible() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(43);
        for group in [
            ClassicalGroup::SpecialOrthogonal,
            ClassicalGroup::Unitary,
            ClassicalGroup::CompactSymplectic,
        ] {
            let size = if group == ClassicalGroup::SpecialOrthogonal { 4 } else { 2 };
            for _ in 0..50 {
                let a = random_group_element(group, size, &mut rng, 0.8);
                let b = random_group_element(group, size, &mut rng, 0.8);
                let by_rank = is_opposite_classical(&a, &b, &tol()).unwrap();
                let by_graphs = is_opposite_gr(
                    graph_embed(&a, &tol()).unwrap().point(),
                    graph_embed(&b, &tol()).unwrap().point(),
                    &tol(),
                )
                .unwrap();
                assert_eq!(by_rank, by_graphs, "{group:?}");
            }
        }
    }

    #[test]
    fn birational_action_matches_subspace_action() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(47);
        for group in [
            ClassicalGroup::SpecialOrthogonal,
            ClassicalGroup::Unitary,
            ClassicalGroup::CompactSymplectic,
        ] {
            let size = if group == ClassicalGroup::SpecialOrthogonal { 4 } else { 2 };
            let form = graph_form(group, size).unwrap();
            let g_alg = AlgebraBasis::form_preserving(&form, &tol());
            for _ in 0..20 {
                let a = random_group_element(group, size, &mut rng, 0.6);
                // identity block matrix acts trivially
                let id = FMatrix::identity(group.field(), 2 * size);
                let same = birational_act(&id, &a, &tol()).unwrap();
                assert!(same.distance_to(&a) < 1e-12);
                // random form-preserving block matrix
                let coeffs: Vec<f64> =
                    (0..g_alg.dim()).map(|_| rng.gen_range(-0.25..0.25)).collect();
                let cal = g_alg.combination(&coeffs).matrix().exp_series();
                match birational_act(&cal, &a, &tol()) {
                    Ok(b) => {
                        let lhs = graph_embed(&a, &tol()).unwrap().point().act(&cal, &tol());
                        let rhs = graph_embed(&b, &tol()).unwrap();
                        assert!(lhs.equal_to(rhs.point(), &tol()), "{group:?}");
                    }
                    Err(Error::Precondition(_)) => {} // left the chart
                    Err(e) => panic!("unexpected error {e}"),
                }
            }
        }
    }

    #[test]
    fn block_diagonal_action_is_conjugation_like() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(53);
        let group = ClassicalGroup::Unitary;
        let size = 3;
        let a = random_group_element(group, size, &mut rng, 0.7);
        let u1 = random_group_element(group, size, &mut rng, 0.7);
        let u2 = random_group_element(group, size, &mut rng, 0.7);
        // diag(a, d) with a, d unitary preserves diag(I, -I); B = d A a^{-1}
        let mut cal = FMatrix::zeros(Field::C, 2 * size, 2 * size);
        for i in 0..size {
            for j in 0..size {
                cal.set(i, j, u1.matrix().get(i, j));
                cal.set(size + i, size + j, u2.matrix().get(i, j));
            }
        }
        let b = birational_act(&cal, &a, &tol()).unwrap();
        let expected = u2
            .matrix()
            .mul(a.matrix())
            .mul(&u1.matrix().inverse(tol().rank_rel).unwrap());
        assert!(b.matrix().approx_eq(&expected, 1e-9));
    }

    #[test]
    fn diagonal_geodesic_values() {
        let geo = diagonal_geodesic_classical(ClassicalGroup::SpecialOrthogonal, 4).unwrap();
        assert!(geo
            .element_at(0.0)
            .distance_to(&ClassicalGroupElement::identity(ClassicalGroup::SpecialOrthogonal, 4))
            < 1e-15);
        // quarter rotations in both blocks at t = pi/2
        let q = geo.element_at(std::f64::consts::FRAC_PI_2);
        let expected = FMatrix::from_real_rows(
            Field::R,
            &[
                &[0.0, -1.0, 0.0, 0.0],
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, -1.0],
                &[0.0, 0.0, 1.0, 0.0],
            ],
        );
        assert!(q.matrix().approx_eq(&expected, 1e-12));
    }

    #[test]
    fn diagonal_geodesic_is_circle_under_tan() {
        for group in [
            ClassicalGroup::SpecialOrthogonal,
            ClassicalGroup::Unitary,
            ClassicalGroup::CompactSymplectic,
        ] {
            let size = if group == ClassicalGroup::SpecialOrthogonal { 4 } else { 2 };
            let geo = diagonal_geodesic_classical(group, size).unwrap();
            let p = geo.graph_at(0.0, &tol());
            let p1 = geo.graph_at(0.25, &tol());
            let q = geo.graph_at(0.5, &tol());
            // q is the antigraph: graph of -I
            let minus = geo.element_at(std::f64::consts::PI);
            let anti = graph_embed(&minus, &tol()).unwrap();
            assert!(q.point().equal_to(anti.point(), &tol()), "{group:?}");
            let (_, circle) = circle_through_iso(&p, &p1, &q, &tol()).unwrap();
            for k in 0..40 {
                let s = k as f64 / 40.0;
                let lhs = geo.graph_at(s, &tol());
                let rhs = circle.eval(ProjParam::tan_pi(s));
                assert!(
                    lhs.point().distance_to(&rhs) < 1e-8,
                    "{group:?} s={s}"
                );
            }
        }
    }
}
