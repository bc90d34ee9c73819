//! Fast rigid rotational alignment of 2-D images and 3-D volumes in Fourier
//! polar/spherical coordinates.
//!
//! Images are resampled onto a polar quadrature grid and expanded per ring in
//! a Fourier (angular) series; volumes are expanded per spherical shell in
//! spherical harmonics. In-plane rotation acts on the ring coefficients as a
//! diagonal phase, and SO(3) rotation acts on the shell coefficients through
//! Wigner-d matrices, so the full inner-product landscape over a rotation
//! grid costs one radial accumulation plus FFTs.
//!
//! On top of the exact landscape machinery, the `compress2d` / `compress3d`
//! modules build alignment-quality kernels over radii (and, for volumes,
//! spherical-harmonic degrees), extract their dominant eigenvectors, and
//! evaluate landscapes in the compressed coordinates. Retaining `H` of `R`
//! principal vectors cuts the per-pair accumulation cost by roughly `R / H`
//! while preserving the location of the optimal rotation.

pub mod align2d;
pub mod align3d;
pub mod compress2d;
pub mod compress3d;
pub mod container;
pub mod error;
pub mod grids;
pub mod metrics;
pub mod opcount;
pub mod polarfft;
pub mod spharm;
pub mod synth;

pub use error::{Error, Result};
