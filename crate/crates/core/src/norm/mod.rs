//! Operator norms of the conjugation operator and the Riesz projection.
//!
//! * `roots`: the even-exponent constants `K_2k` as certified polynomial roots.
//! * `estimate`: exact `L^2` norms via the superoperator, and lower bounds on
//!   `L^p` norms by projected ascent.
//! * `classical`: the commutative reference on trigonometric polynomials.

pub mod classical;
pub mod estimate;
pub mod roots;

pub use classical::{classical_conjugate, truncation_growth_witness, GrowthRow, GrowthTable};
pub use estimate::{
    cp_growth_scan, estimate_lp_norm, exact_l2_norm, AscentParams, GrowthScan, NormEstimate,
    NormMethod, ScanRow, TransformMap,
};
pub use roots::{k2k_constant, RootConstant};
