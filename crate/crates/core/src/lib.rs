//! Majorization uncertainty relations: bound construction, Schur-concave
//! measures, and the numerical experiments built on them.

pub use num_complex;

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod majorization;
pub mod measures;
pub mod numkernel;
pub mod output;
pub mod quantum;

pub use bounds::{dp_bound, ds_bound, BoundKind, BoundPair, CumulativeBoundProfile, SelectionFamily};
pub use error::{Error, Result};
pub use majorization::{direct_product, direct_sum, dominated_by_profile, majorized_by};
pub use measures::Measure;
pub use quantum::{
    born_probabilities, builtin_basis, BuiltinBasis, DensityMatrix, OrthonormalBasis, ProbabilityVector, PureState,
};
