//! Metric lattices, partitions of unity and the quasi-interpolation operator.

mod index;
mod interpolate;
mod lattice;
mod partition;

pub use index::PolarIndex;
pub use interpolate::{quasi_interpolate, sample_field, sample_points, RingInterpolator, SampleVector};
pub use lattice::{generate_lattice, generate_lattice_with, multiplicity_bound, probe_set, Lattice, LatticeOptions};
pub use partition::{build_partial_partition, build_partition, bump, PartitionOfUnity};

use std::f64::consts::PI;

/// `sinh²(d/2)` for two points given in geodesic polar coordinates about `i`.
#[inline]
pub fn polar_sinh2_half(r1: f64, t1: f64, r2: f64, t2: f64) -> f64 {
    let a = (0.5 * (r1 - r2)).sinh();
    let b = (0.5 * (t1 - t2)).sin();
    a * a + r1.sinh() * r2.sinh() * b * b
}

/// Geodesic distance from polar coordinates.
#[inline]
pub fn polar_distance(r1: f64, t1: f64, r2: f64, t2: f64) -> f64 {
    2.0 * polar_sinh2_half(r1, t1, r2, t2).sqrt().asinh()
}

pub(crate) fn wrap_angle(theta: f64) -> f64 {
    theta.rem_euclid(2.0 * PI)
}
