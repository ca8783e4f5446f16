//! Exact computation of the possible intersection sizes of linear subspaces
//! with the hypercube `{0,1}^n`.

pub mod constructions;
pub mod cube;
pub mod error;
pub mod knapsack;
pub mod linalg;
pub mod patterns;
pub mod sampling;
pub mod store;

pub use cube::{count_intersection, AffineMap, CubePoint, GapClass, IntersectionReport};
pub use error::{Error, ParseError, Result};
pub use linalg::{RatMatrix, RatVector, Rational};
