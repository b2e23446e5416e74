//! Quantum rate-distortion toolkit for i.i.d. qubit sources.
//!
//! Distortion is measured by entanglement fidelity and the encoder is
//! allowed unlimited classical side information. The crate computes the
//! single-qubit entropy-distortion curve `S1(d)`, the rate-distortion curve
//! `R1(d)` realized by diagonal two-element operations, the accompanying
//! classical rate, and runs randomized verification suites for the
//! supporting lemmas and theorems at small block lengths.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod quantum;
pub mod ratedistortion;
pub mod realization;
pub mod record;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use quantum::{ChoiMatrix, DensityMatrix, KrausChannel};
pub use ratedistortion::{CurvePoint, KrausPair, SourceSpec};
pub use realization::{RealizationCircuit, StreamResult};
pub use verify::VerificationReport;
