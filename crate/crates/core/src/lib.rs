//! Power indices of linear threshold functions and reconstruction of
//! weighted voting games from partial index vectors.
//!
//! The numeric core is generic over the scalar type through [`Real`]
//! (`f32`/`f64`) and, for pure counting, [`Field`] (which also admits exact
//! rationals). The aliases below fix `f64`, which is what the reconstruction
//! solvers and the CLI use.

pub mod chow_inverse;
pub mod counting;
pub mod cube;
pub mod dshap;
pub mod error;
pub mod gaussian;
pub mod indices;
pub mod io;
pub mod ltf;
pub mod quadrature;
pub mod shapley_inverse;
pub mod suite;
pub mod real;
pub mod selftest;

pub use cube::{BooleanFunction, SliceProfile, TruthTable, DEFAULT_ENUMERATION_CAP};
pub use error::{Error, Result};
pub use indices::{IndexKind, IndexVector, PartialIndexVector};
pub use ltf::{CriticalIndex, CriticalIndexReport, GameSpec, WeightedLtf};
pub use real::{Field, Real};

pub type Ltf = WeightedLtf<f64>;
pub type Ltf32 = WeightedLtf<f32>;
pub type Game = GameSpec<f64>;
pub type Indices = IndexVector<f64>;
pub type PartialIndices = PartialIndexVector<f64>;
