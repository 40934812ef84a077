//! Fast discrete Radon transform over digital lines, its least-squares
//! inverse, and a Radon-based splitting solver for linear hyperbolic
//! problems with large time steps, with displacement interpolation between
//! snapshots.

pub mod adrt2;
pub mod adrt3;
pub mod dispinterp;
pub mod error;
pub mod grid;
pub mod hypersolve;
pub mod invert;
pub mod io;
pub mod sinogram;
mod sweep;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Location, Result};
pub use grid::{prolong, restrict, Grid2D, Grid3D};
pub use sinogram::{Hexadecant, Hexadecant3D, Quadrant, Quadrant2D, Sinogram2D, Sinogram3D};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/transforms.md")]
    mod transforms {}
    #[doc = include_str!("../../../book/src/transform3d.md")]
    mod transform3d {}
    #[doc = include_str!("../../../book/src/inversion.md")]
    mod inversion {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/interpolation.md")]
    mod interpolation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
