use std::sync::Arc;

use rayon::prelude::*;

use super::Lattice;
use crate::discretization::SpatialGrid;
use crate::error::{Error, Result};

/// The bump `exp(−1/(1 − u²))` for `|u| < 1`, zero otherwise.
pub fn bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// Shepard-normalized bumps `θ_j(z) = b(u_j)/Σ_k b(u_k)`, `u_j = d(z, x_j)/(ε/2)`,
/// stored per grid node as a sparse row.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    lattice: Arc<Lattice>,
    grid: Arc<SpatialGrid>,
    eps: f64,
    offsets: Vec<usize>,
    entries: Vec<(u32, f64)>,
    interior: Vec<bool>,
}

/// Builds the partition on the grid nodes.
///
/// Weights are normalized in log space: near the edge of a support `b(u)` underflows
/// long before `u` reaches 1 (already `b(1 − 10⁻⁶) = e^{−500000}`), while the ratios
/// stay well defined. Only nodes with no center at `u < 1` have an undefined partition;
/// on interior nodes (at least `ε` from the truncation boundary) that is a covering
/// violation.
pub fn build_partition(lattice: Arc<Lattice>, eps: f64, grid: Arc<SpatialGrid>) -> Result<PartitionOfUnity> {
    let p = build_partial_partition(lattice, eps, grid)?;
    if let Some(node) = (0..p.grid.len()).find(|&i| p.interior[i] && p.row(i).is_empty()) {
        return Err(Error::CoveringViolation { node });
    }
    Ok(p)
}

/// Like [`build_partition`] but leaves uncovered nodes with an empty row, so that
/// quasi-interpolation vanishes there. Useful for diagnosing degenerate lattices.
pub fn build_partial_partition(lattice: Arc<Lattice>, eps: f64, grid: Arc<SpatialGrid>) -> Result<PartitionOfUnity> {
    if !(eps > 0.0) {
        return Err(Error::Config(format!("partition scale ε = {eps} must be positive")));
    }
    let support = 0.5 * eps;
    let index = lattice.index(support);
    let interior = grid.interior_mask(eps);
    let rows: Vec<Vec<(u32, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (rho, theta) = grid.polar(i);
            let mut logs: Vec<(u32, f64)> = Vec::new();
            index.for_each_within(rho, theta, support, |j, v| {
                let d = 2.0 * v.sqrt().asinh();
                let u = d / support;
                if u < 1.0 {
                    logs.push((j as u32, -1.0 / (1.0 - u * u)));
                }
            });
            if logs.is_empty() {
                return logs;
            }
            let max = logs.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = logs.iter().map(|e| (e.1 - max).exp()).sum();
            let log_total = max + total.ln();
            let mut row: Vec<(u32, f64)> = logs.into_iter().map(|(j, l)| (j, (l - log_total).exp())).collect();
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    let mut offsets = Vec::with_capacity(rows.len() + 1);
    offsets.push(0);
    let mut entries = Vec::new();
    for row in rows {
        entries.extend(row);
        offsets.push(entries.len());
    }
    Ok(PartitionOfUnity { lattice, grid, eps, offsets, entries, interior })
}

impl PartitionOfUnity {
    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }
    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    /// Nonzero `(center, θ_j(node))` pairs at a node.
    pub fn row(&self, node: usize) -> &[(u32, f64)] {
        &self.entries[self.offsets[node]..self.offsets[node + 1]]
    }
    /// Nodes at least `ε` from the truncation boundary.
    pub fn interior(&self) -> &[bool] {
        &self.interior
    }
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }
    /// Sorted indices of centers whose bump touches at least one grid node.
    pub fn active_centers(&self) -> Vec<usize> {
        let mut seen = vec![false; self.lattice.len()];
        for &(j, _) in &self.entries {
            seen[j as usize] = true;
        }
        seen.iter().enumerate().filter(|(_, &s)| s).map(|(j, _)| j).collect()
    }
}
