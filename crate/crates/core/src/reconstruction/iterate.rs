use num_complex::Complex64;

use super::{coord_norm, FrameOperator};
use crate::discretization::Field;
use crate::error::{Error, Result};
use crate::sampling::SampleVector;

/// Consecutive non-decreasing steps that count as divergence.
const DIVERGENCE_STEPS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    /// `‖Δ_n‖ = ‖f_{n+1} − f_n‖` for each step.
    pub delta_norms: Vec<f64>,
    /// Interior `‖f − f_n‖` for `n = 0, 1, …` when ground truth was supplied.
    pub errors: Option<Vec<f64>>,
    /// Interior norm of the ground truth, when supplied.
    pub truth_norm: Option<f64>,
    /// Median of `‖Δ_{n+1}‖/‖Δ_n‖`.
    pub gamma_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Coefficient of determination of the least-squares line through `ln ‖Δ_n‖`.
    pub fit_r2: f64,
}

impl ReconstructionReport {
    /// Final interior error relative to the truth, if known.
    pub fn final_relative_error(&self) -> Option<f64> {
        match (&self.errors, self.truth_norm) {
            (Some(e), Some(n)) if n > 0.0 => e.last().map(|v| v / n),
            _ => None,
        }
    }
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// `R²` of the least-squares line through `(n, ln y_n)`.
pub(crate) fn log_linear_r2(y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = y.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(i, &v)| (i as f64, v.ln())).collect();
    if pts.len() < 3 {
        return 1.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

/// Neumann iteration from samples alone:
/// `f₀ = P_ω V s`, `f_{n+1} = f_n + P_ω V(s − S f_n)`.
///
/// Stops once `‖Δ_n‖/‖f₀‖ < tol` or after `max_iter` steps; reports non-contraction
/// when `‖Δ_{n+1}‖/‖Δ_n‖ ≥ 1` three times in a row. With `truth`, the interior error
/// is tracked on nodes at least `ε` from the truncation boundary.
pub fn reconstruct(
    samples: &SampleVector,
    op: &FrameOperator,
    max_iter: usize,
    tol: f64,
    truth: Option<&Field>,
) -> Result<(Field, ReconstructionReport)> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance {tol} must be positive")));
    }
    let s = op.restrict(samples)?;
    let space = op.space();
    let interior = op.partition().interior().to_vec();
    let truth_norm = truth.map(|t| t.masked_norm(&interior));
    let error_of = |x: &[Complex64]| -> Result<f64> {
        let f = space.synthesize(x)?;
        Ok(f.sub(truth.expect("truth"))?.masked_norm(&interior))
    };

    let mut x = op.spread(&s)?;
    let norm0 = coord_norm(&x);
    let mut errors = truth.map(|_| Vec::new());
    if let Some(e) = errors.as_mut() {
        e.push(error_of(&x)?);
    }
    let mut report = ReconstructionReport {
        delta_norms: Vec::new(),
        errors: None,
        truth_norm,
        gamma_estimate: 0.0,
        iterations: 1,
        converged: true,
        fit_r2: 1.0,
    };
    if norm0 == 0.0 {
        report.errors = errors;
        return Ok((space.synthesize(&x)?, report));
    }

    let mut ratios = Vec::new();
    let mut rising = 0usize;
    report.converged = false;
    for n in 0..max_iter {
        let fs = op.sample_coordinates(&x)?;
        let residual: Vec<Complex64> = s.iter().zip(&fs).map(|(a, b)| a - b).collect();
        let delta = op.spread(&residual)?;
        let dn = coord_norm(&delta);
        x.iter_mut().zip(&delta).for_each(|(a, d)| *a += d);
        if let Some(prev) = report.delta_norms.last() {
            let ratio = if *prev > 0.0 { dn / prev } else { 0.0 };
            ratios.push(ratio);
            rising = if ratio >= 1.0 { rising + 1 } else { 0 };
        }
        report.delta_norms.push(dn);
        if let Some(e) = errors.as_mut() {
            e.push(error_of(&x)?);
        }
        report.iterations = n + 1;
        if rising >= DIVERGENCE_STEPS {
            return Err(Error::NonContraction { ratio: *ratios.last().unwrap(), steps: rising });
        }
        if dn / norm0 < tol {
            report.converged = true;
            break;
        }
    }
    report.gamma_estimate = median(&ratios);
    report.fit_r2 = log_linear_r2(&report.delta_norms);
    report.errors = errors;
    Ok((space.synthesize(&x)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_fit() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let geometric: Vec<f64> = (0..10).map(|n| 0.3f64.powi(n)).collect();
        assert!((log_linear_r2(&geometric) - 1.0).abs() < 1e-12);
        let noisy = [1.0, 0.1, 0.5, 0.01, 0.3];
        assert!(log_linear_r2(&noisy) < 0.9);
    }
}
