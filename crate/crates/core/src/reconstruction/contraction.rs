use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{coord_norm, FrameOperator};
use crate::error::{Error, Result};
use crate::probe::masked_probe;
use crate::transform::BandSpace;

/// Power-iteration steps used by [`estimate_contraction`].
pub const POWER_STEPS: usize = 30;
/// Search interval for [`auto_epsilon`].
pub const AUTO_EPS_RANGE: (f64, f64) = (0.02, 0.8);
/// Maximum number of lattice spacings tried by [`auto_epsilon`].
pub const AUTO_EPS_STEPS: usize = 8;

fn residual_ratio(op: &FrameOperator, x: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    let ax = op.apply_coordinates(x)?;
    let y: Vec<Complex64> = x.iter().zip(&ax).map(|(a, b)| a - b).collect();
    let ratio = coord_norm(&y) / coord_norm(x);
    Ok((y, ratio))
}

/// Estimate of `‖I − A‖` on the band space: the larger of the worst probe ratio
/// `‖f − Af‖/‖f‖` and the norm of `I − A` restricted to a Krylov subspace of
/// dimension at most [`POWER_STEPS`] grown from a random start.
///
/// Both parts are attained by actual vectors, so the estimate never exceeds the true norm.
pub fn estimate_contraction(op: &FrameOperator, n_probes: usize, seed: u64) -> Result<f64> {
    let space = op.space();
    let mut worst: f64 = 0.0;
    for p in 0..n_probes {
        let (raw, _) = masked_probe(space.plan(), space.band(), seed.wrapping_add(1000 + p as u64))?;
        let x = space.coordinates(&raw)?;
        if coord_norm(&x) > 0.0 {
            worst = worst.max(residual_ratio(op, &x)?.1);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Vec<Complex64> = (0..op.dim())
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    Ok(worst.max(krylov_norm(op, start)?))
}

/// Largest singular value of `(I − A) Q`, where `Q` is an Arnoldi basis of the
/// Krylov subspace generated from `start`.
fn krylov_norm(op: &FrameOperator, start: Vec<Complex64>) -> Result<f64> {
    let n0 = coord_norm(&start);
    if n0 == 0.0 {
        return Ok(0.0);
    }
    let mut basis: Vec<Vec<Complex64>> = vec![start.into_iter().map(|v| v / n0).collect()];
    let mut images: Vec<Vec<Complex64>> = Vec::new();
    for k in 0..POWER_STEPS.min(op.dim()) {
        let (mut w, _) = residual_ratio(op, &basis[k])?;
        images.push(w.clone());
        let scale = coord_norm(&w);
        // Two passes of Gram-Schmidt keep the basis orthonormal to rounding.
        for _ in 0..2 {
            for q in &basis {
                let c: Complex64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let nw = coord_norm(&w);
        if nw <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        basis.push(w.into_iter().map(|v| v / nw).collect());
    }
    let m = images.len();
    let gram = DMatrix::<Complex64>::from_fn(m, m, |i, j| images[i].iter().zip(&images[j]).map(|(a, b)| a.conj() * b).sum());
    let top = gram.symmetric_eigenvalues().max();
    Ok(top.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonTrial {
    pub eps: f64,
    pub estimate: f64,
}

#[derive(Debug, Clone)]
pub struct AutoEpsilon {
    pub eps: f64,
    pub estimate: f64,
    pub trials: Vec<EpsilonTrial>,
    pub operator: FrameOperator,
}

/// Chooses the lattice spacing: the coarsest `ε` in [`AUTO_EPS_RANGE`] found by
/// bisection (on a log scale) whose contraction estimate is at most `target`.
///
/// The upper end is tried first; at most [`AUTO_EPS_STEPS`] spacings are evaluated.
pub fn auto_epsilon(space: Arc<BandSpace>, target: f64, n_probes: usize, seed: u64) -> Result<AutoEpsilon> {
    let (lo, hi) = AUTO_EPS_RANGE;
    let mut trials = Vec::new();
    let mut best: Option<(f64, f64, FrameOperator)> = None;
    let evaluate = |eps: f64, trials: &mut Vec<EpsilonTrial>| -> Result<(f64, FrameOperator)> {
        let op = FrameOperator::for_epsilon(space.clone(), eps, seed)?;
        let estimate = estimate_contraction(&op, n_probes, seed)?;
        trials.push(EpsilonTrial { eps, estimate });
        Ok((estimate, op))
    };
    let (est, op) = evaluate(hi, &mut trials)?;
    if est <= target {
        return Ok(AutoEpsilon { eps: hi, estimate: est, trials, operator: op });
    }
    let (mut good, mut bad) = (lo, hi);
    for _ in 1..AUTO_EPS_STEPS {
        let mid = (good * bad).sqrt();
        let (est, op) = evaluate(mid, &mut trials)?;
        if est <= target {
            good = mid;
            best = Some((mid, est, op));
        } else {
            bad = mid;
        }
    }
    match best {
        Some((eps, estimate, operator)) => Ok(AutoEpsilon { eps, estimate, trials, operator }),
        None => Err(Error::NonContraction { ratio: trials.iter().map(|t| t.estimate).fold(f64::INFINITY, f64::min), steps: trials.len() }),
    }
}
