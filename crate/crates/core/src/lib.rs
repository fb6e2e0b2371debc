//! Numerical pseudohermitian geometry of real hypersurfaces.
//!
//! Starting from a real defining function rho on C^{n+1} (with a flat Kähler
//! metric), the crate computes Wirtinger jets, the adapted frame and Levi
//! form, the second fundamental form and pseudohermitian torsion, the
//! holomorphic sectional curvature through the Gauss identity, and, for
//! three-dimensional hypersurfaces, the Tanaka-Webster curvature directly
//! from the structure equations. Brieskorn-Pham links are handled by a
//! dedicated module.

pub mod brieskorn;
pub mod defn;
pub mod error;
pub mod gausscurv;
pub mod linalg;
pub mod report;
pub mod sampling;
pub mod secondform;
pub mod series;
pub mod surface;
pub mod webster3;
pub mod wirtinger;

pub use defn::{builtin_family, AmbientMetric, DefiningFunction, Family};
pub use error::{Error, Result};
