//! Band-limited signals on the Poincaré upper half-plane.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: points, `SL(2,R)` elements, distances and ball volumes.
//! * [`quadrature`]: Gauss-Legendre rules shared by the grids and kernels.
//! * [`discretization`]: geodesic-polar spatial grids, spectral grids, fields and spectra.
//! * [`transform`]: the discretized Helgason-Fourier transform, spherical functions,
//!   the sinch kernel, band-limiting projection and Bernstein checks.
//! * [`sampling`]: metric lattices, partitions of unity and quasi-interpolation.
//! * [`reconstruction`]: the frame operator `A = P_ω V`, Neumann iteration,
//!   contraction estimates and a dense direct-solve oracle.

pub mod discretization;
pub mod error;
pub mod geometry;
pub mod io;
pub mod probe;
pub mod quadrature;
pub mod reconstruction;
pub mod sampling;
pub mod transform;

pub use discretization::{Field, SpatialGrid, Spectrum, SpectralGrid};
pub use error::{Error, Result};
pub use geometry::{GroupElement, Point, Rotation};
pub use num_complex::Complex64;


pub use reconstruction::{FrameOperator, ReconstructionReport};
pub use sampling::{Lattice, PartitionOfUnity, SampleVector};
pub use transform::{BandLimit, BandSpace, HftPlan, SinchKernel};
