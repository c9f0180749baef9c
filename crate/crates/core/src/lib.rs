//! Class groups, ray class groups and `p`-adic torsion groups of quadratic and
//! cyclic cubic fields, with the statistics built on top of them.

pub mod arith;
pub mod cubic;
pub mod epsanalysis;
pub mod error;
pub mod filtration;
pub mod group;
pub mod linalg;
pub mod pram;
pub mod quadclass;

pub use error::{Error, Result};
