//! Numerical laboratory for the conjugation operator on finite maximal
//! subdiagonal algebras, modelled as block upper-triangular matrices in
//! `M_n(C)` with the normalized trace.

pub mod algebra;
pub mod ensemble;
pub mod error;
pub mod hardy;
pub mod inequality;
pub mod io;
pub mod norm;
pub mod spectral;

pub use algebra::{Operator, SubspaceTag, TracedAlgebra};
pub use ensemble::{EnsembleConfig, EnsembleKind, Tolerances};
pub use error::{Error, Result};
