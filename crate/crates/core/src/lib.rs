//! Framed minimal surfaces in Euclidean space and their CMC-1 (Bryant)
//! counterparts in hyperbolic space: holomorphic data, the Schwarzian
//! correspondence, divisor index bounds and numerical Morse index estimates.

pub mod catalog;
pub mod error;
pub mod export;
pub mod expr;
pub mod jet;
pub mod laurent;
pub mod moebius;
pub mod point;
pub mod quadrature;
pub mod schwarzian;
pub mod spectral;
pub mod repr;
pub mod report;
pub mod scene;
pub mod surface;
pub(crate) mod series;

pub use error::{Error, Result};
pub use expr::Expr;
pub use jet::{eval_jet, Jet};
pub use laurent::{laurent, LaurentSeries};
pub use moebius::{Mat2, MoebiusMap};
pub use num_complex::Complex64;
pub use point::Point;
pub use scene::Scene;
