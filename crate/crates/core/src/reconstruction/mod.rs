//! The frame operator `A = P_ω V S`, Neumann iteration and its diagnostics.
//!
//! Everything here lives on the band space `E_ω` of [`BandSpace`]: iterates are
//! stored as coordinates in its orthonormal basis, so norms of coordinate vectors are
//! grid `L²` norms.

mod contraction;
mod iterate;
mod oracle;

pub use contraction::{auto_epsilon, estimate_contraction, AutoEpsilon, EpsilonTrial, AUTO_EPS_RANGE, AUTO_EPS_STEPS};
pub use iterate::{reconstruct, ReconstructionReport};
pub use oracle::{contraction_norm, direct_solve_oracle, neumann_partial_sums, neumann_recursion, CONDITION_LIMIT, MAX_DENSE_DIM};

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::discretization::{Field, Spectrum};
use crate::error::{Error, Result};
use crate::sampling::{sample_field, PartitionOfUnity, RingInterpolator, SampleVector};
use crate::transform::BandSpace;

pub(crate) fn coord_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `A f = P_ω V(f(x_j))`, restricted to the band space.
///
/// Only centers whose bump reaches a grid node influence `V`; the operator samples at
/// those "active" centers alone.
#[derive(Debug, Clone)]
pub struct FrameOperator {
    space: Arc<BandSpace>,
    partition: Arc<PartitionOfUnity>,
    active: Vec<usize>,
    active_polar: Vec<(f64, f64)>,
    /// Position of each center among the active ones.
    slot: Vec<Option<u32>>,
}

impl FrameOperator {
    pub fn new(space: Arc<BandSpace>, partition: Arc<PartitionOfUnity>) -> Result<Self> {
        if **partition.grid() != **space.plan().spatial() {
            return Err(Error::Shape("partition and band space use different grids".into()));
        }
        let active = partition.active_centers();
        let polar = partition.lattice().polar();
        let active_polar = active.iter().map(|&j| polar[j]).collect();
        let mut slot = vec![None; partition.lattice().len()];
        for (k, &j) in active.iter().enumerate() {
            slot[j] = Some(k as u32);
        }
        Ok(Self { space, partition, active, active_polar, slot })
    }

    pub fn space(&self) -> &Arc<BandSpace> {
        &self.space
    }
    pub fn partition(&self) -> &Arc<PartitionOfUnity> {
        &self.partition
    }
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
    /// Centers that carry weight on the grid.
    pub fn active_centers(&self) -> &[usize] {
        &self.active
    }

    /// Samples at the active centers of the field with the given ring harmonics.
    fn sample_harmonics(&self, harmonics: Vec<Complex64>) -> Result<Vec<Complex64>> {
        let interp = RingInterpolator::from_harmonics(self.space.plan().spatial().clone(), harmonics);
        self.active_polar.par_iter().map(|&(r, t)| interp.eval(r, t)).collect()
    }

    /// Active-center values extracted from a full sample vector.
    pub fn restrict(&self, samples: &SampleVector) -> Result<Vec<Complex64>> {
        if !Arc::ptr_eq(samples.lattice(), self.partition.lattice()) {
            return Err(Error::Shape("samples were not taken on the operator's lattice".into()));
        }
        Ok(self.active.iter().map(|&j| samples.values()[j]).collect())
    }

    /// Band-space coordinates of `P_ω V s` for active-center values `s`.
    pub fn spread(&self, active_values: &[Complex64]) -> Result<Vec<Complex64>> {
        let grid = self.partition.grid().clone();
        let values: Vec<Complex64> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                self.partition
                    .row(i)
                    .iter()
                    .map(|&(j, w)| active_values[self.slot[j as usize].expect("active") as usize] * w)
                    .sum()
            })
            .collect();
        self.space.coordinates(&Field::new(grid, values)?)
    }

    /// `A` on coordinates.
    pub fn apply_coordinates(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let s = self.sample_harmonics(self.space.harmonics_from_coordinates(x))?;
        self.spread(&s)
    }

    /// Samples of the band-space element with coordinates `x` at the active centers.
    pub fn sample_coordinates(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.sample_harmonics(self.space.harmonics_from_coordinates(x))
    }

    /// `A f` for an arbitrary grid field: sample, quasi-interpolate, project.
    pub fn apply(&self, f: &Field) -> Result<Field> {
        Ok(self.apply_with_spectrum(f)?.0)
    }

    /// `A f` together with the in-band spectrum that synthesizes it.
    pub fn apply_with_spectrum(&self, f: &Field) -> Result<(Field, Spectrum)> {
        let s = self.sample_harmonics(f.ring_harmonics())?;
        let x = self.spread(&s)?;
        Ok((self.space.synthesize(&x)?, self.space.synthesis_spectrum(&x)?))
    }

    /// Full sample vector `f(x_j)` over the lattice.
    pub fn sample(&self, f: &Field) -> Result<SampleVector> {
        sample_field(f, self.partition.lattice())
    }

    /// Dense matrix of `A` in the band-space basis.
    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        let n = self.dim();
        let cols: Vec<Vec<Complex64>> = (0..n)
            .map(|k| {
                let mut e = vec![Complex64::default(); n];
                e[k] = Complex64::new(1.0, 0.0);
                self.apply_coordinates(&e)
            })
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_fn(n, n, |i, j| cols[j][i]))
    }
}

impl FrameOperator {
    /// Lattice with spacing `ε`, partition with supports `B(x_j, ε/2)`, and the operator.
    pub fn for_epsilon(space: Arc<BandSpace>, eps: f64, seed: u64) -> Result<Self> {
        let grid = space.plan().spatial().clone();
        let lattice = Arc::new(crate::sampling::generate_lattice(&grid, eps, seed)?);
        let partition = Arc::new(crate::sampling::build_partition(lattice, eps, grid)?);
        Self::new(space, partition)
    }
}
