//! Division-algebra scalars.
//!
//! All three ground fields share one representation: a quaternion with the
//! components outside the tagged field held at zero. Real and complex
//! arithmetic are then literal restrictions of quaternion arithmetic, so a
//! single code path serves `R`, `C` and `H`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Ground (skew) field tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    R,
    C,
    H,
}

impl Field {
    /// Real dimension of the field: 1, 2 or 4.
    pub fn real_dim(self) -> usize {
        match self {
            Field::R => 1,
            Field::C => 2,
            Field::H => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::R => "R",
            Field::C => "C",
            Field::H => "H",
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Quaternion `w + x i + y j + z k` with `i^2 = j^2 = k^2 = ijk = -1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const ZERO: Quat = Quat { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const ONE: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const I: Quat = Quat { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
    pub const J: Quat = Quat { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
    pub const K: Quat = Quat { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    pub fn real(w: f64) -> Self {
        Quat { w, ..Quat::ZERO }
    }

    pub fn complex(w: f64, x: f64) -> Self {
        Quat { w, x, ..Quat::ZERO }
    }

    pub fn from_c64(c: Complex64) -> Self {
        Quat::complex(c.re, c.im)
    }

    /// The complex part `w + x i`, ignoring `j`/`k` components.
    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.w, self.x)
    }

    pub fn conj(self) -> Self {
        Quat { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inv(self) -> Self {
        let n = self.norm_sq();
        let c = self.conj();
        Quat { w: c.w / n, x: c.x / n, y: c.y / n, z: c.z / n }
    }

    pub fn scale(self, s: f64) -> Self {
        Quat { w: self.w * s, x: self.x * s, y: self.y * s, z: self.z * s }
    }

    /// Splits `q = a + b j` with `a`, `b` complex; the pair used by the
    /// adjoint embedding `H -> C^{2x2}`.
    pub fn complex_pair(self) -> (Complex64, Complex64) {
        (Complex64::new(self.w, self.x), Complex64::new(self.y, self.z))
    }

    pub fn from_complex_pair(a: Complex64, b: Complex64) -> Self {
        Quat { w: a.re, x: a.im, y: b.re, z: b.im }
    }

    /// True when all components outside `field` vanish (up to `tol`).
    pub fn lies_in(self, field: Field, tol: f64) -> bool {
        match field {
            Field::R => self.x.abs() <= tol && self.y.abs() <= tol && self.z.abs() <= tol,
            Field::C => self.y.abs() <= tol && self.z.abs() <= tol,
            Field::H => true,
        }
    }

    pub fn approx_eq(self, other: Quat, tol: f64) -> bool {
        (self - other).norm() <= tol
    }

    /// Component list of the length `field.real_dim()` used by serialization.
    pub fn components(self, field: Field) -> Vec<f64> {
        match field {
            Field::R => vec![self.w],
            Field::C => vec![self.w, self.x],
            Field::H => vec![self.w, self.x, self.y, self.z],
        }
    }

    pub fn from_components(field: Field, comps: &[f64]) -> Option<Self> {
        if comps.len() != field.real_dim() {
            return None;
        }
        let mut q = Quat::ZERO;
        q.w = comps[0];
        if comps.len() > 1 {
            q.x = comps[1];
        }
        if comps.len() > 3 {
            q.y = comps[2];
            q.z = comps[3];
        }
        Some(q)
    }
}

impl Add for Quat {
    type Output = Quat;
    fn add(self, r: Quat) -> Quat {
        Quat { w: self.w + r.w, x: self.x + r.x, y: self.y + r.y, z: self.z + r.z }
    }
}

impl AddAssign for Quat {
    fn add_assign(&mut self, r: Quat) {
        *self = *self + r;
    }
}

impl Sub for Quat {
    type Output = Quat;
    fn sub(self, r: Quat) -> Quat {
        Quat { w: self.w - r.w, x: self.x - r.x, y: self.y - r.y, z: self.z - r.z }
    }
}

impl SubAssign for Quat {
    fn sub_assign(&mut self, r: Quat) {
        *self = *self - r;
    }
}

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }
}

impl Mul for Quat {
    type Output = Quat;
    fn mul(self, r: Quat) -> Quat {
        Quat {
            w: self.w * r.w - self.x * r.x - self.y * r.y - self.z * r.z,
            x: self.w * r.x + self.x * r.w + self.y * r.z - self.z * r.y,
            y: self.w * r.y - self.x * r.z + self.y * r.w + self.z * r.x,
            z: self.w * r.z + self.x * r.y - self.y * r.x + self.z * r.w,
        }
    }
}

/// A scalar tagged with the field it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar {
    pub field: Field,
    pub value: Quat,
}

impl Scalar {
    pub fn new(field: Field, value: Quat) -> Option<Self> {
        value.lies_in(field, 0.0).then_some(Scalar { field, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quat_strategy() -> impl Strategy<Value = Quat> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64)
            .prop_map(|(w, x, y, z)| Quat::new(w, x, y, z))
    }

    #[test]
    fn unit_table() {
        assert_eq!(Quat::I * Quat::J, Quat::K);
        assert_eq!(Quat::J * Quat::K, Quat::I);
        assert_eq!(Quat::K * Quat::I, Quat::J);
        assert_eq!(Quat::I * Quat::I, -Quat::ONE);
        assert_eq!(Quat::J * Quat::J, -Quat::ONE);
        assert_eq!(Quat::K * Quat::K, -Quat::ONE);
    }

    #[test]
    fn inverse() {
        let q = Quat::new(1.0, -2.0, 0.5, 3.0);
        assert!((q * q.inv() - Quat::ONE).norm() < 1e-14);
        assert!((q.inv() * q - Quat::ONE).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn conj_is_involution(q in quat_strategy()) {
            prop_assert_eq!(q.conj().conj(), q);
        }

        #[test]
        fn conj_antihomomorphism(s in quat_strategy(), t in quat_strategy()) {
            let lhs = (s * t).conj();
            let rhs = t.conj() * s.conj();
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }

        #[test]
        fn multiplication_associative(a in quat_strategy(), b in quat_strategy(), c in quat_strategy()) {
            let lhs = (a * b) * c;
            let rhs = a * (b * c);
            prop_assert!((lhs - rhs).norm() < 1e-8);
        }

        #[test]
        fn norm_multiplicative(a in quat_strategy(), b in quat_strategy()) {
            prop_assert!(((a * b).norm() - a.norm() * b.norm()).abs() < 1e-7);
        }
    }
}
