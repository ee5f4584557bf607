//! Simulation and estimation toolkit for distributed similarity estimation of
//! unitary channels.
//!
//! Two simulated devices each hold a secret unitary (`U` on device A, `V` on
//! device B). Using only local state preparation, channel queries and
//! measurements plus classical communication, they estimate
//! `|tr[U^dag V]|^2 / d^2`. Three protocols are provided:
//!
//! * incoherent: shared random input state and shared random measurement
//!   basis, collision statistics of single-copy outcomes;
//! * coherent: shared random input state, symmetric collective measurement on
//!   `T` copies, overlap of the two outcome states;
//! * shadow: no shared randomness, independent classical snapshots of each
//!   channel's Choi operator.
//!
//! The [`oracle`] module carries the closed-form expectations used to check
//! every stochastic component.

pub mod error;
pub mod estimators;
pub mod oracle;
pub mod protocols;
pub mod qcore;
pub mod stats;
pub mod symmetric;
pub mod unitary_io;

pub use error::{Error, Result};
pub use qcore::{PureState, SeedStream, UnitaryMatrix};
