//! Mermin–Klyshko Bell operators for `n` qubits, partial transposes over site
//! subsets, and the violation bound `2^{(n-p)/2}` for states whose partial
//! transposes are positive across a `p`-block partition.

pub mod bell;
pub mod error;
pub mod exec;
pub mod matrix;
pub mod optimize;
pub mod partition;
pub mod scan;
pub mod states;
pub mod verify;

pub use bell::{
    bell_pair, bell_square_expansion, chsh_value, contract_settings, in_square,
    observable_from_bloch, product_operator, BellPair, MeasurementConfig, QubitObservable,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use matrix::{
    expectation, hermitian_spectrum, is_psd, partial_transpose, tensor, ComplexMatrix, SiteSubset,
    C64,
};
pub use optimize::{maximize_violation, OptimizeResult, SeesawOptions};
pub use partition::{certify, BoundReport, Partition};
pub use states::StateSpec;

/// Crate version embedded in reports.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
