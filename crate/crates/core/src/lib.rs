//! Klein-Gordon Coulomb problem in momentum space, with and without a
//! minimal-length deformation: ODE construction, singular-point analysis,
//! special-function solutions, bound-state spectra and large-momentum
//! asymptotics.

// `!(x > 0.0)` style guards reject NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod fuchsian;
pub mod kgmodels;
pub mod physcore;
pub mod poly;
pub mod specialfn;
pub mod spectra;

pub use error::{Error, Result};
pub use fuchsian::{FrobeniusSolution, Point, RationalCoeffODE, SingularKind, SingularPoint};
pub use physcore::{CoulombSystem, DeformationParams, FINE_STRUCTURE};
