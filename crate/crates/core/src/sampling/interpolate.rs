use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{Lattice, PartitionOfUnity};
use crate::discretization::{Field, SpatialGrid};
use crate::error::{Error, Result};

/// Values attached to the centers of a lattice.
#[derive(Debug, Clone)]
pub struct SampleVector {
    lattice: Arc<Lattice>,
    values: Vec<Complex64>,
}

impl SampleVector {
    pub fn new(lattice: Arc<Lattice>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::Shape(format!("{} samples for a lattice of {} centers", values.len(), lattice.len())));
        }
        Ok(Self { lattice, values })
    }
    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
}

/// Evaluates a grid field between nodes: trigonometric interpolation along each ring
/// and four-point Lagrange interpolation across rings.
///
/// Near the origin the radial stencil continues through `i` onto the opposite ray,
/// using `f(−ρ, θ) = f(ρ, θ + π)`. The interpolant reproduces node values exactly.
#[derive(Debug, Clone)]
pub struct RingInterpolator {
    grid: Arc<SpatialGrid>,
    harmonics: Vec<Complex64>,
}

impl RingInterpolator {
    pub fn new(f: &Field) -> Self {
        Self { grid: f.grid().clone(), harmonics: f.ring_harmonics() }
    }

    /// Builds directly from ring harmonics in FFT bin order.
    pub fn from_harmonics(grid: Arc<SpatialGrid>, harmonics: Vec<Complex64>) -> Self {
        Self { grid, harmonics }
    }

    /// Value at geodesic polar coordinates `(ρ, θ)`.
    pub fn eval(&self, rho: f64, theta: f64) -> Result<Complex64> {
        let g = &self.grid;
        let radii = g.rho();
        let n = radii.len();
        let outer = radii[n - 1];
        if rho > outer * (1.0 + 1e-12) || rho < 0.0 {
            let z = crate::geometry::Point::from_polar(rho, theta);
            return Err(Error::Extrapolation { x: z.x(), y: z.y() });
        }
        // Extended ring list: index e ↦ ring e − 2 for e ≥ 2, reflected rings 1, 0 for e = 0, 1.
        let ext = |e: usize| -> (f64, usize, bool) {
            if e >= 2 {
                (radii[e - 2], e - 2, false)
            } else {
                (-radii[1 - e], 1 - e, true)
            }
        };
        let pos = radii.partition_point(|&r| r <= rho) + 2;
        let start = pos.saturating_sub(2).min(n + 2 - 4);
        if let Some(a) = radii.iter().position(|&r| r == rho) {
            return Ok(self.ring_value(a, theta));
        }
        let xs: [(f64, usize, bool); 4] = [ext(start), ext(start + 1), ext(start + 2), ext(start + 3)];
        let mut acc = Complex64::default();
        for (i, &(xi, ring, flipped)) in xs.iter().enumerate() {
            let mut w = 1.0;
            for (j, &(xj, _, _)) in xs.iter().enumerate() {
                if i != j {
                    w *= (rho - xj) / (xi - xj);
                }
            }
            let angle = if flipped { theta + std::f64::consts::PI } else { theta };
            acc += self.ring_value(ring, angle) * w;
        }
        Ok(acc)
    }

    /// Trigonometric interpolant of ring `a` at angle `theta`.
    fn ring_value(&self, a: usize, theta: f64) -> Complex64 {
        let n = self.grid.n_theta();
        let row = &self.harmonics[a * n..(a + 1) * n];
        let step = Complex64::from_polar(1.0, theta);
        let mut pos = Complex64::new(1.0, 0.0);
        let mut acc = row[0];
        let half = n / 2;
        for q in 1..=half {
            pos *= step;
            if n % 2 == 0 && q == half {
                // Split the Nyquist term symmetrically so real data interpolate to real values.
                acc += row[half] * pos.re;
            } else {
                acc += row[q] * pos + row[n - q] * pos.conj();
            }
        }
        acc
    }
}

/// Interpolated values of `f` at arbitrary polar positions.
pub fn sample_points(f: &Field, points: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    let interp = RingInterpolator::new(f);
    points.par_iter().map(|&(rho, theta)| interp.eval(rho, theta)).collect()
}

/// Point samples `f(x_j)` at every lattice center.
pub fn sample_field(f: &Field, lattice: &Arc<Lattice>) -> Result<SampleVector> {
    let values = sample_points(f, lattice.polar())?;
    SampleVector::new(lattice.clone(), values)
}

/// `V s = Σ_j s_j θ_j` evaluated on the partition's grid.
pub fn quasi_interpolate(s: &SampleVector, p: &PartitionOfUnity) -> Result<Field> {
    if !Arc::ptr_eq(s.lattice(), p.lattice()) {
        return Err(Error::Shape("samples and partition belong to different lattices".into()));
    }
    let grid = p.grid().clone();
    let values =
        (0..grid.len()).into_par_iter().map(|i| p.row(i).iter().map(|&(j, w)| s.values()[j as usize] * w).sum()).collect();
    Field::new(grid, values)
}
