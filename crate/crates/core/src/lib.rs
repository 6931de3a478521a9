//! Noncommutative coherent states, reproducing kernels, Toeplitz operators
//! and Berezin-Toeplitz star products on truncated Fock spaces.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock;
pub mod io;
pub mod kernels;
pub mod params;
pub mod quadrature;
pub mod star;
pub mod symbols;
pub mod toeplitz_nc;

pub use error::{Error, Result};
pub use fock::{CMatrix, FockBasis, TruncatedOperator};
pub use kernels::{KernelSpec, KernelVariant};
pub use params::{
    ComplexPoint, DeformationParams, DegenerateParams, GroupParams, Kind, Measure, NcCoords,
    ParamSet, PhasePoint,
};
pub use star::{ExpansionReport, StarCoeffs};
pub use symbols::{parse_symbol, Chart, LinearChart, PolySymbol};
pub use toeplitz_nc::{CommutatorReport, NCToeplitzBuild, NcSymbol};
