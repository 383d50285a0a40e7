//! Gaussian continuous-variable simulation of telecloning with
//! phase-conjugate inputs.
//!
//! States are tracked by their first and second quadrature moments with
//! `X = a + a†`, `P = -i(a - a†)`, so the vacuum has unit variance. Networks
//! are built as Heisenberg-picture maps on the input quadratures
//! ([`QuadratureTransform`]), measurement outcomes stay symbolic as rows of
//! that map, and the output moments follow exactly from the input Gaussian.
//! [`oracle`] re-derives the same moments by classical Monte Carlo.
//!
//! Everything is generic over the float type; `f64` aliases are exported at
//! the crate root and `f32` ones with a `32` suffix.

pub mod error;
pub mod fidelity;
pub mod gaussian;
pub mod measure;
pub mod network;
pub mod oracle;
pub mod protocols;
pub mod scalar;
pub mod transform;

pub use error::{Error, Result};
pub use fidelity::{
    baseline_standard_fidelity, closed_form, closed_form_variance, fidelity_unity_gain, fidelity_vs_coherent,
    FidelityResult, FormulaParams, Output,
};
pub use gaussian::{joint_covariance, omega_product, output_state, symplectic_form, ModeDescriptor, ModeKind};
pub use measure::combine_records;
pub use network::{SplitterConvention, SplitterSpec};
pub use oracle::{compare, run_oracle, DiscrepancyReport, SampleRun};
pub use protocols::{build, Build, CloneReport, InvariantSummary, ProtocolSpec, Variant};
pub use scalar::{Multiplicity, Scalar, Squeezing, INFINITE_SQUEEZING_PROXY};

pub type InputRegistry = gaussian::InputRegistry<f64>;
pub type ModeState = gaussian::ModeState<f64>;
pub type QuadratureTransform = transform::QuadratureTransform<f64>;
pub type Network = network::Network<f64>;
pub type MeasurementRecord = measure::MeasurementRecord<f64>;
pub type Spec = protocols::ProtocolSpec<f64>;

pub type InputRegistry32 = gaussian::InputRegistry<f32>;
pub type ModeState32 = gaussian::ModeState<f32>;
pub type QuadratureTransform32 = transform::QuadratureTransform<f32>;
pub type Network32 = network::Network<f32>;
pub type MeasurementRecord32 = measure::MeasurementRecord<f32>;
pub type Spec32 = protocols::ProtocolSpec<f32>;
