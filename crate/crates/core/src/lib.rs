//! Delayed self-heterodyne (DSHI) laser-linewidth toolkit: beat-note models,
//! linewidth estimators, a trapped-ion spectroscopy simulator for
//! cross-checks, and the file formats tying them together.

// Negated comparisons such as `!(x > 0.0)` also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dshi;
pub mod error;
pub mod estimate;
pub mod grid;
pub mod io;
pub mod ionsim;
pub mod lineshape;
pub mod trace;

pub use error::{Error, Result};
pub use grid::FrequencyGrid;
pub use trace::{PowerUnit, SpectrumTrace};
