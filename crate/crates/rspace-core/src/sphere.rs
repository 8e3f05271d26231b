//! The conformal n-sphere: stereographic charts, the Moebius action of the
//! Lorentz group, and circles as affine lines in a chart.

use crate::curve::ProjParam;
use crate::error::{Error, Result};
use crate::linalg::Tolerance;
use nalgebra::{DMatrix, DVector};

/// A point of `S^n` as a unit vector in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    v: DVector<f64>,
}

impl SpherePoint {
    pub fn new(v: DVector<f64>, tol: &Tolerance) -> Result<SpherePoint> {
        if (v.norm() - 1.0).abs() > tol.eq_abs {
            return Err(Error::domain("sphere point is not a unit vector"));
        }
        Ok(SpherePoint { v })
    }

    pub fn normalized(v: DVector<f64>) -> Result<SpherePoint> {
        let n = v.norm();
        if n == 0.0 {
            return Err(Error::domain("cannot normalize the zero vector"));
        }
        Ok(SpherePoint { v: v / n })
    }

    pub fn standard_axis(ambient: usize, axis: usize) -> SpherePoint {
        let mut v = DVector::zeros(ambient);
        v[axis] = 1.0;
        SpherePoint { v }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.v
    }

    /// Dimension of the sphere the point lives on (`len - 1`).
    pub fn sphere_dim(&self) -> usize {
        self.v.len() - 1
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint { v: -self.v.clone() }
    }

    pub fn distance_to(&self, other: &SpherePoint) -> f64 {
        (&self.v - &other.v).norm()
    }
}

/// Image of a stereographic chart: a vector of the hyperplane `q_perp`
/// through the origin, or the point at infinity.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartPoint {
    Finite(DVector<f64>),
    Infinity,
}

/// Stereographic projection from the pole `q` onto the linear hyperplane
/// `q_perp`, with `stereo(q, q) = inf` and the antipode mapping to the
/// origin.
pub fn stereo(q: &SpherePoint, p: &SpherePoint) -> ChartPoint {
    let c = q.coords().dot(p.coords());
    if 1.0 - c < 1e-15 {
        return ChartPoint::Infinity;
    }
    let w = p.coords() - q.coords() * c;
    ChartPoint::Finite(w / (1.0 - c))
}

/// Inverse of [`stereo`]: `x` with `|x|^2 = s` maps to
/// `((s - 1) q + 2 x) / (s + 1)`.
pub fn stereo_inv(q: &SpherePoint, x: &ChartPoint) -> SpherePoint {
    match x {
        ChartPoint::Infinity => q.clone(),
        ChartPoint::Finite(x) => {
            let s = x.norm_squared();
            let v = (q.coords() * (s - 1.0) + x * 2.0) / (s + 1.0);
            SpherePoint { v }
        }
    }
}

/// A circle through three distinct points, affine in the chart at `q`:
/// `F_q(c(t)) = (1 - t) F_q(p) + t F_q(p1)`, `c(inf) = q`.
#[derive(Debug, Clone)]
pub struct SphereCircle {
    q: SpherePoint,
    chart_p: DVector<f64>,
    chart_p1: DVector<f64>,
}

pub fn circle_through_sphere(
    p: &SpherePoint,
    p1: &SpherePoint,
    q: &SpherePoint,
    tol: &Tolerance,
) -> Result<SphereCircle> {
    let pairs = [(p, p1, "p0,p1"), (p, q, "p0,q"), (p1, q, "p1,q")];
    for (a, b, name) in pairs {
        if a.distance_to(b) <= tol.eq_abs {
            return Err(Error::precondition(format!("sphere points {name} coincide")));
        }
    }
    let chart_p = match stereo(q, p) {
        ChartPoint::Finite(x) => x,
        ChartPoint::Infinity => return Err(Error::precondition("p0 coincides with the pole q")),
    };
    let chart_p1 = match stereo(q, p1) {
        ChartPoint::Finite(x) => x,
        ChartPoint::Infinity => return Err(Error::precondition("p1 coincides with the pole q")),
    };
    Ok(SphereCircle { q: q.clone(), chart_p, chart_p1 })
}

impl SphereCircle {
    pub fn eval(&self, t: ProjParam) -> SpherePoint {
        match t {
            ProjParam::Infinity => self.q.clone(),
            ProjParam::Finite(t) => {
                let x = &self.chart_p * (1.0 - t) + &self.chart_p1 * t;
                stereo_inv(&self.q, &ChartPoint::Finite(x))
            }
        }
    }
}

/// The unit-period great circle `s -> cos(2 pi s) p + sin(2 pi s) p1`
/// through an orthonormal pair; it is the diametrical geodesic of the round
/// metric matching the circle through `(p, p1, -p)` under `t = tan(pi s)`.
#[derive(Debug, Clone)]
pub struct GreatCircle {
    p: SpherePoint,
    p1: SpherePoint,
}

impl GreatCircle {
    pub fn new(p: &SpherePoint, p1: &SpherePoint, tol: &Tolerance) -> Result<GreatCircle> {
        if p.coords().dot(p1.coords()).abs() > tol.eq_abs * 10.0 {
            return Err(Error::precondition("great circle frame must be orthonormal"));
        }
        Ok(GreatCircle { p: p.clone(), p1: p1.clone() })
    }

    /// The matched geodesic of a circle triple, which must be in the
    /// antipodal normal form `q = -p`, `p1` orthogonal to `p`.
    pub fn from_triple(
        p: &SpherePoint,
        p1: &SpherePoint,
        q: &SpherePoint,
        tol: &Tolerance,
    ) -> Result<GreatCircle> {
        if p.antipode().distance_to(q) > tol.eq_abs * 10.0 {
            return Err(Error::precondition(
                "matched sphere geodesics need the antipodal configuration q = -p0",
            ));
        }
        GreatCircle::new(p, p1, tol)
    }

    pub fn eval(&self, s: f64) -> SpherePoint {
        let (sin, cos) = (2.0 * std::f64::consts::PI * s).sin_cos();
        SpherePoint { v: self.p.coords() * cos + self.p1.coords() * sin }
    }
}

/// Action of the Lorentz group `O_0(1, n+1)` on the sphere through the
/// projectivized light cone: lift `p` to `(1, p)`, apply `g`, rescale the
/// image to first coordinate one.
///
/// `g` must preserve `diag(-1, I)` and lie in the identity component
/// (positive determinant and time orientation).
pub fn mobius_act(g: &DMatrix<f64>, p: &SpherePoint, tol: &Tolerance) -> Result<SpherePoint> {
    let n1 = p.coords().len() + 1;
    if g.nrows() != n1 || g.ncols() != n1 {
        return Err(Error::domain("Lorentz matrix has the wrong size"));
    }
    let mut eta = DMatrix::identity(n1, n1);
    eta[(0, 0)] = -1.0;
    let defect = g.transpose() * &eta * g - &eta;
    if defect.amax() > tol.eq_abs * g.amax().powi(2).max(1.0) {
        return Err(Error::domain("matrix does not preserve the Lorentz form"));
    }
    if g[(0, 0)] <= 0.0 || g.determinant() <= 0.0 {
        return Err(Error::domain("matrix is not in the identity component"));
    }
    let mut lift = DVector::zeros(n1);
    lift[0] = 1.0;
    for i in 0..p.coords().len() {
        lift[i + 1] = p.coords()[i];
    }
    let image = g * lift;
    let x0 = image[0];
    let v = DVector::from_fn(p.coords().len(), |i, _| image[i + 1] / x0);
    // renormalize; the light cone image is unit up to rounding
    SpherePoint::normalized(v)
}

/// Best-fit affine 2-plane through a family of points: returns the largest
/// distance of a point from the plane and the distance of the plane from
/// the origin. Circle trajectories satisfy residual ~ 0 and origin distance
/// below one.
pub fn best_fit_plane(points: &[SpherePoint]) -> (f64, f64) {
    let n = points[0].coords().len();
    let count = points.len();
    let mut centroid = DVector::zeros(n);
    for p in points {
        centroid += p.coords();
    }
    centroid /= count as f64;
    let mut centered = DMatrix::zeros(n, count);
    for (j, p) in points.iter().enumerate() {
        centered.set_column(j, &(p.coords() - &centroid));
    }
    let svd = centered.clone().svd(true, false);
    let u = svd.u.unwrap();
    let v1 = u.column(0).into_owned();
    let v2 = u.column(1).into_owned();
    let mut residual = 0.0f64;
    for j in 0..count {
        let c = centered.column(j);
        let proj = &v1 * v1.dot(&c.into_owned()) + &v2 * v2.dot(&c.into_owned());
        residual = residual.max((c - proj).norm());
    }
    let orig = -&centroid;
    let proj = &v1 * v1.dot(&orig) + &v2 * v2.dot(&orig);
    let origin_distance = (orig - proj).norm();
    (residual, origin_distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rand_point(rng: &mut impl Rng, ambient: usize) -> SpherePoint {
        let v = DVector::from_fn(ambient, |_, _| rng.gen_range(-1.0..1.0f64));
        SpherePoint::normalized(v).unwrap()
    }

    #[test]
    fn stereo_special_values() {
        let q = SpherePoint::standard_axis(4, 0);
        assert_eq!(stereo(&q, &q), ChartPoint::Infinity);
        match stereo(&q, &q.antipode()) {
            ChartPoint::Finite(x) => assert!(x.norm() < 1e-15),
            _ => panic!("antipode must map to the chart origin"),
        }
    }

    #[test]
    fn stereo_round_trip() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        for _ in 0..100 {
            let q = rand_point(&mut rng, 4);
            let p = rand_point(&mut rng, 4);
            let back = stereo_inv(&q, &stereo(&q, &p));
            assert!(back.distance_to(&p) < 1e-10);
        }
    }

    #[test]
    fn circle_through_defining_points() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2);
        let p = rand_point(&mut rng, 4);
        let p1 = rand_point(&mut rng, 4);
        let q = rand_point(&mut rng, 4);
        let c = circle_through_sphere(&p, &p1, &q, &tol()).unwrap();
        assert!(c.eval(ProjParam::Finite(0.0)).distance_to(&p) < 1e-12);
        assert!(c.eval(ProjParam::Finite(1.0)).distance_to(&p1) < 1e-12);
        assert!(c.eval(ProjParam::Infinity).distance_to(&q) < 1e-15);
        assert!(matches!(
            circle_through_sphere(&p, &p, &q, &tol()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn trajectory_is_planar_circle() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = rand_point(&mut rng, 5);
            let p1 = rand_point(&mut rng, 5);
            let q = rand_point(&mut rng, 5);
            let c = circle_through_sphere(&p, &p1, &q, &tol()).unwrap();
            let mut samples = Vec::new();
            for k in 0..50 {
                let s = -0.49 + 0.98 * k as f64 / 49.0;
                samples.push(c.eval(ProjParam::tan_pi(s)));
            }
            samples.push(c.eval(ProjParam::Infinity));
            let (residual, origin_dist) = best_fit_plane(&samples);
            assert!(residual < 1e-8, "residual {residual:e}");
            assert!(origin_dist < 1.0 - 1e-8);
        }
    }

    #[test]
    fn great_circle_points_stay_on_it() {
        // three equally spaced points on a known great circle
        let p = SpherePoint::standard_axis(4, 0);
        let p1 = SpherePoint::standard_axis(4, 1);
        let third = SpherePoint::normalized(DVector::from_vec(vec![-1.0, 1.0, 0.0, 0.0])).unwrap();
        let c = circle_through_sphere(&p, &p1, &third, &tol()).unwrap();
        for k in 0..50 {
            let s = -0.49 + 0.98 * k as f64 / 49.0;
            let pt = c.eval(ProjParam::tan_pi(s));
            // stays in the coordinate 2-plane spanned by e1, e2
            assert!(pt.coords()[2].abs() < 1e-12 && pt.coords()[3].abs() < 1e-12);
        }
    }

    #[test]
    fn tan_reparametrization_is_great_circle() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(4);
        for _ in 0..20 {
            let p = rand_point(&mut rng, 4);
            // orthonormalize a second direction against p
            let raw = rand_point(&mut rng, 4);
            let w = raw.coords() - p.coords() * p.coords().dot(raw.coords());
            let p1 = SpherePoint::normalized(w).unwrap();
            let q = p.antipode();
            let c = circle_through_sphere(&p, &p1, &q, &tol()).unwrap();
            let geo = GreatCircle::from_triple(&p, &p1, &q, &tol()).unwrap();
            for k in 0..50 {
                let s = k as f64 / 50.0;
                let lhs = geo.eval(s);
                let rhs = c.eval(ProjParam::tan_pi(s));
                assert!(lhs.distance_to(&rhs) < 1e-9, "s={s}");
            }
        }
    }

    fn random_lorentz(rng: &mut impl Rng, n1: usize, scale: f64) -> DMatrix<f64> {
        // exp of a Lorentz algebra element [[0, v^T], [v, S]] with S skew
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
        let f = crate::matrix::FMatrix::from_na_real(&x);
        f.exp_series().to_na_real()
    }

    #[test]
    fn mobius_identity_and_rotation() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let p = rand_point(&mut rng, 3);
        let id = DMatrix::identity(4, 4);
        assert!(mobius_act(&id, &p, &tol()).unwrap().distance_to(&p) < 1e-14);
        // a block rotation acts as the Euclidean rotation
        let mut rot = DMatrix::identity(4, 4);
        let a = 0.7f64;
        rot[(1, 1)] = a.cos();
        rot[(1, 2)] = -a.sin();
        rot[(2, 1)] = a.sin();
        rot[(2, 2)] = a.cos();
        let moved = mobius_act(&rot, &p, &tol()).unwrap();
        let expected = DVector::from_vec(vec![
            a.cos() * p.coords()[0] - a.sin() * p.coords()[1],
            a.sin() * p.coords()[0] + a.cos() * p.coords()[1],
            p.coords()[2],
        ]);
        assert!((moved.coords() - expected).norm() < 1e-12);
        // non-Lorentz input is rejected
        let mut bad = DMatrix::identity(4, 4);
        bad[(0, 1)] = 0.3;
        assert!(mobius_act(&bad, &p, &tol()).is_err());
    }

    #[test]
    fn mobius_maps_circles_to_circles() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(6);
        for _ in 0..10 {
            let p = rand_point(&mut rng, 4);
            let p1 = rand_point(&mut rng, 4);
            let q = rand_point(&mut rng, 4);
            let c = circle_through_sphere(&p, &p1, &q, &tol()).unwrap();
            let g = random_lorentz(&mut rng, 5, 0.4);
            let gp = mobius_act(&g, &p, &tol()).unwrap();
            let gp1 = mobius_act(&g, &p1, &tol()).unwrap();
            let gq = mobius_act(&g, &q, &tol()).unwrap();
            let gc = circle_through_sphere(&gp, &gp1, &gq, &tol()).unwrap();
            for k in 0..20 {
                let s = -0.45 + 0.9 * k as f64 / 19.0;
                let t = ProjParam::tan_pi(s);
                let lhs = mobius_act(&g, &c.eval(t), &tol()).unwrap();
                let rhs = gc.eval(t);
                assert!(lhs.distance_to(&rhs) < 1e-8);
            }
        }
    }
}
