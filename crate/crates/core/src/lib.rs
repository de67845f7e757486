//! Removal of line jitter, line pixel jitter and pixel jitter with bounded
//! integer displacements.
//!
//! Each corruption model has a discrete energy over the unknown displacement
//! field: a quadratic penalty on the displacements plus p-th powers of finite
//! differences of the reconstructed image. Line jitter is one chain over the
//! image rows and is solved exactly ([`line`]); line pixel jitter splits into
//! independent column chains ([`line_pixel`]); pixel jitter is minimized by
//! block coordinate descent over alternating sets of rows and columns, each
//! step an exact chain problem ([`pixel`]). All of them run on the dynamic
//! program in [`chain`].
//!
//! [`synthesis`] produces seeded corrupted images with known displacements,
//! and [`oracle`] holds exhaustive minimizers used to check the solvers.

pub mod chain;
pub mod error;
pub mod field;
pub mod image;
pub mod line;
pub mod line_pixel;
pub mod oracle;
pub mod params;
pub mod pixel;
pub mod synthesis;

pub use crate::chain::{
    evaluate, solve_chain, solve_chain_ternary, ChainCosts, ChainSolution, ChainTable,
};
pub use crate::error::{Error, Result};
pub use crate::field::{
    displacement_accuracy, Displacement, LineDisplacement, ScalarField, VectorField,
};
pub use crate::image::{mse, pnorm_pow, psnr, Image};
pub use crate::line::{dejitter_line, line_energy, reconstruct_line, LineResult};
pub use crate::line_pixel::{
    dejitter_line_pixel, line_pixel_energy, reconstruct_line_pixel, LinePixelResult,
};
pub use crate::params::{EnergyParams, Order};
pub use crate::pixel::{
    bcd_sweep, dejitter_pixel, pixel_energy, reconstruct_pixel, BcdTrace, PixelResult, SweepKind,
};
pub use crate::synthesis::{JitterKind, SynthesisSpec};
