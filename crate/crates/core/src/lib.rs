//! Verification engine for central extensions of classical and quantum
//! q-deformed Virasoro algebras.

pub mod classical;
pub mod error;
pub mod linalg;
pub mod modes;
pub mod quantum;
pub mod rational;
pub mod report;
pub mod scalar;
pub mod series;
pub mod structfun;
pub mod suite;

pub use error::{Error, Result};
pub use rational::{double_pole_data, residue_at, Factor, RationalFunctionSpec};
pub use scalar::{Mode, Scalar};
pub use series::{product_expansion, series_inv, series_mul, Domain, SeriesWindow};
pub use structfun::{build_structure_constants, c_hat, ParamSet, StructureConstants};
pub use quantum::{cocycle_residual_q, residue_breakdown, s1, s2_closed, ResidueBreakdown, Triplet};
pub use report::{CheckRow, VerificationReport};
