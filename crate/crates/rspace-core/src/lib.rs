//! Circles in self-dual symmetric R-spaces, realized in concrete matrix
//! models.
//!
//! The crate builds and verifies the circle machinery of symmetric R-spaces:
//! height-one parabolic subalgebras and their polars, prevalent vectors,
//! circles through three pairwise-opposite points, and the matching
//! diametrical geodesics under the reparametrization `t = tan(pi s)`. Four
//! model families are implemented concretely: the conformal sphere, split
//! standard Grassmannians over `R`, `C` and `H`, the isotropic Grassmannians
//! of the seven split sesquilinear form families (including the compact
//! classical groups through the graph embedding), and the Grassmannian of
//! oriented 2-planes seen as a complex quadric.

pub mod algebra;
pub mod catalog;
pub mod classical;
pub mod curve;
pub mod error;
pub mod grassmann;
pub mod isotropic;
pub mod linalg;
pub mod matrix;
pub mod quadric;
pub mod scalar;
pub mod sphere;
pub mod suites;

pub use error::{Error, Result};
pub use linalg::{oriented_svd_2x2, rank_kernel, Tolerance};
pub use matrix::FMatrix;
pub use scalar::{Field, Quat, Scalar};
