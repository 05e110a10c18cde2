use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::FrameOperator;
use crate::discretization::Field;
use crate::error::{Error, Result};
use crate::sampling::SampleVector;

/// Largest acceptable 2-norm condition number of the band-space matrix of `A`.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Largest band-space dimension the dense oracle accepts.
pub const MAX_DENSE_DIM: usize = 5000;

/// Solves `A f = P_ω V s` by LU factorization of `A` in the band-space basis.
///
/// Returns the solution's coordinates and its synthesized field.
pub fn direct_solve_oracle(samples: &SampleVector, op: &FrameOperator) -> Result<(Vec<Complex64>, Field)> {
    if op.dim() > MAX_DENSE_DIM {
        return Err(Error::Config(format!("band space dimension {} too large for a dense solve", op.dim())));
    }
    let b = op.spread(&op.restrict(samples)?)?;
    let m = op.matrix()?;
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > CONDITION_LIMIT {
        return Err(Error::IllPosed { condition, limit: CONDITION_LIMIT });
    }
    let x = m
        .lu()
        .solve(&DVector::from_vec(b))
        .ok_or(Error::IllPosed { condition: f64::INFINITY, limit: CONDITION_LIMIT })?;
    let x: Vec<Complex64> = x.iter().copied().collect();
    let field = op.space().synthesize(&x)?;
    Ok((x, field))
}

/// `‖I − A‖₂` on the band space, from the singular values of the dense matrix.
pub fn contraction_norm(op: &FrameOperator) -> Result<f64> {
    if op.dim() > MAX_DENSE_DIM {
        return Err(Error::Config(format!("band space dimension {} too large for a dense norm", op.dim())));
    }
    let n = op.dim();
    let defect = DMatrix::<Complex64>::identity(n, n) - op.matrix()?;
    Ok(defect.singular_values().max())
}

/// Partial sums `Σ_{k≤n} (I − M)^k b` for `n = 0..=steps`, from explicit matrix powers.
pub fn neumann_partial_sums(m: &DMatrix<Complex64>, b: &[Complex64], steps: usize) -> Vec<Vec<Complex64>> {
    let n = m.nrows();
    let i_minus_m = DMatrix::<Complex64>::identity(n, n) - m;
    let b = DVector::from_column_slice(b);
    let mut power = DMatrix::<Complex64>::identity(n, n);
    let mut sum = DVector::<Complex64>::zeros(n);
    let mut out = Vec::with_capacity(steps + 1);
    for _ in 0..=steps {
        sum += &power * &b;
        out.push(sum.iter().copied().collect());
        power = &i_minus_m * &power;
    }
    out
}

/// Iterates `x_{n+1} = x_n + (b − A x_n)` from `x_0 = b` with operator applications.
pub fn neumann_recursion(op: &FrameOperator, b: &[Complex64], steps: usize) -> Result<Vec<Vec<Complex64>>> {
    let mut x = b.to_vec();
    let mut out = vec![x.clone()];
    for _ in 0..steps {
        let ax = op.apply_coordinates(&x)?;
        x = x.iter().zip(b).zip(&ax).map(|((xi, bi), ai)| xi + bi - ai).collect();
        out.push(x.clone());
    }
    Ok(out)
}
