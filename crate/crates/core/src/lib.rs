//! Pseudospectral workbench for the viscous shallow-water system on periodic
//! boxes: Littlewood-Paley analysis, Bony paraproducts, exact linear
//! propagators, a Friedrichs-truncated solver and estimate diagnostics.

#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments,
    clippy::redundant_guards
)]

pub mod checkpoint;
pub mod diagnostics;
pub mod error;
pub mod friedrichs;
pub mod initial_data;
pub mod littlewood_paley;
pub mod paraproduct;
pub mod semigroup;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{DiffOp, Exponent, PeriodicGrid, SpectralField};
