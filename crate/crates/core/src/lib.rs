//! Exact computations on rational polyhedral fans: primitive collections,
//! wall and primitive relations, nef and Mori cones, quasi-projectivity
//! certificates and generic simplicial refinements.
//!
//! Linear algebra and cone primitives in [`exactla`] are generic over an
//! exact ordered field; everything above them works with [`Rational`].

pub mod corpus;
pub mod exactla;
pub mod fan;
pub mod io;
pub mod mori;
pub mod plfun;
pub mod primcoll;
pub mod refine;
pub mod theorems;

pub use exactla::{QVector, Rational};
pub use fan::{ConeData, Fan, FanError, RaySet, Wall};
