use std::fmt;
use std::path::Path;
use std::sync::Arc;

use anyhow::Result;
use hyperband_core::discretization::{build_spatial_grid, build_spectral_grid_split, Field};
use hyperband_core::geometry::{hyperbolic_distance, mobius_apply, random_group_element, Point};
use hyperband_core::io::{fmt_f64, read_samples, write_field, write_lattice, write_report, write_samples, write_spectrum};
use hyperband_core::probe::{band_probe, masked_probe, shifted_probe};
use hyperband_core::reconstruction::{
    auto_epsilon, direct_solve_oracle, estimate_contraction, reconstruct, FrameOperator, ReconstructionReport,
    AUTO_EPS_RANGE, MAX_DENSE_DIM,
};
use hyperband_core::sampling::{build_partition, multiplicity_bound, probe_set, Lattice, SampleVector};
use hyperband_core::transform::{bernstein_check, BandLimit, BandSpace, HftPlan, DEFAULT_CONCENTRATION};
use hyperband_core::Error as CoreError;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, Epsilon, ExperimentConfig};
use crate::manifest::{content_hash, Outputs, Timings};
use crate::svg::{Plot, Scale};

/// Target for the automatic choice of `ε`.
pub const AUTO_TARGET: f64 = 0.5;
/// Probes used by the contraction estimate.
const ESTIMATE_PROBES: usize = 3;

/// A failure that is not a core library error.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Failure {}

/// 0 success, 1 validation, 2 numerical failure, 3 I/O.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return match f {
                Failure::Validation(_) => 1,
                Failure::Numerical(_) => 2,
            };
        }
        if cause.downcast_ref::<ConfigError>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::NonContraction { .. }
                | CoreError::IllPosed { .. }
                | CoreError::NumericRange(_)
                | CoreError::Internal(_) => 2,
                CoreError::Io(_) => 3,
                _ => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 3;
        }
    }
    1
}

fn smaller_eps(eps: f64) -> String {
    format!("{}", (eps / 2.0).max(AUTO_EPS_RANGE.0))
}

pub struct Run {
    pub cfg: ExperimentConfig,
    pub timings: Timings,
    pub outputs: Outputs,
    inputs: Vec<Vec<u8>>,
}

impl Run {
    pub fn new(cfg: ExperimentConfig, cfg_text: String) -> Self {
        let inputs = vec![cfg_text.into_bytes()];
        Self { cfg, timings: Timings::default(), outputs: Outputs::default(), inputs }
    }

    pub fn commit(self, command: &str) -> Result<()> {
        let hash = content_hash(&self.inputs.iter().map(Vec::as_slice).collect::<Vec<_>>());
        let dir = self.cfg.output_dir.clone();
        let written = self.outputs.commit(&dir, command, self.cfg.echo(), hash, self.timings)?;
        for p in written {
            println!("wrote {}", p.display());
        }
        Ok(())
    }

    fn plan(&mut self) -> Result<(Arc<HftPlan>, BandLimit)> {
        let cfg = &self.cfg;
        let band = BandLimit::new(cfg.omega, cfg.cap)?;
        band.check_headroom(cfg.cap)?;
        let plan = self.timings.stage("plan", || -> Result<_> {
            let sp = build_spatial_grid(cfg.radius, cfg.n_rho, cfg.n_theta)?;
            let sg = build_spectral_grid_split(cfg.cap, cfg.n_t, cfg.n_phi, Some(cfg.omega))?;
            Ok(Arc::new(HftPlan::new(sp, sg)?))
        })?;
        Ok((plan, band))
    }

    fn space(&mut self) -> Result<Arc<BandSpace>> {
        let (plan, band) = self.plan()?;
        let space = self.timings.stage("band_space", || BandSpace::new(plan, band, DEFAULT_CONCENTRATION))?;
        Ok(Arc::new(space))
    }

    /// The operator for the configured `ε` and its contraction estimate.
    fn operator(&mut self, space: &Arc<BandSpace>) -> Result<(f64, f64, FrameOperator)> {
        let seed = self.cfg.seed;
        match self.cfg.epsilon {
            Epsilon::Fixed(eps) => {
                let op = self.timings.stage("lattice_and_partition", || FrameOperator::for_epsilon(space.clone(), eps, seed))?;
                let est = self.timings.stage("contraction_estimate", || estimate_contraction(&op, ESTIMATE_PROBES, seed))?;
                Ok((eps, est, op))
            }
            Epsilon::Auto => {
                let auto = self.timings.stage("auto_epsilon", || auto_epsilon(space.clone(), AUTO_TARGET, ESTIMATE_PROBES, seed));
                let auto = auto.map_err(|e| match e {
                    CoreError::NonContraction { ratio, steps } => anyhow::Error::new(Failure::Numerical(format!(
                        "automatic epsilon found no spacing in [{}, {}] with contraction estimate <= {AUTO_TARGET} \
                         after {steps} trials (best {ratio:.4}); increase the resolution or lower omega",
                        AUTO_EPS_RANGE.0, AUTO_EPS_RANGE.1
                    ))),
                    other => other.into(),
                })?;
                for t in &auto.trials {
                    println!("auto epsilon trial: eps {:.6} estimate {:.6e}", t.eps, t.estimate);
                }
                Ok((auto.eps, auto.estimate, auto.operator))
            }
        }
    }

    fn add_csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> hyperband_core::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.outputs.add(name, buf);
        Ok(())
    }
}

pub fn synth(mut run: Run) -> Result<()> {
    let (plan, band) = run.plan()?;
    let seed = run.cfg.seed;
    let (field, spectrum) = run.timings.stage("synthesize", || masked_probe(&plan, band, seed))?;
    let b1 = bernstein_check(&spectrum, band, 1.0);
    let b2 = bernstein_check(&spectrum, band, 2.0);
    let leak = spectrum.out_of_band_norm(band.omega()).powi(2) / spectrum.norm().powi(2);
    println!("probe: ||f|| {} ; out-of-band energy fraction {:.3e}", fmt_f64(field.norm()), leak);
    println!("bernstein sigma=1: {} ; sigma=2: {}", b1.pass, b2.pass);
    if !(b1.pass && b2.pass) {
        return Err(Failure::Numerical("synthesized probe fails the Bernstein check".into()).into());
    }
    run.add_csv("field.csv", |b| write_field(b, &field))?;
    run.add_csv("spectrum.csv", |b| write_spectrum(b, &spectrum))?;
    run.commit("synth")
}

pub fn lattice(mut run: Run) -> Result<()> {
    let space = run.space()?;
    let (eps, est, op) = run.operator(&space)?;
    let lat = op.partition().lattice().clone();
    let (truth, _) = band_probe(&space, run.cfg.seed)?;
    let samples = op.sample(&truth)?;
    println!(
        "lattice: eps {eps} ; {} centers ; separation {:.6} ; covering {:.6} ; multiplicity {} (bound {:.1}) ; contraction estimate {est:.6e}",
        lat.len(),
        lat.separation(),
        lat.covering(),
        lat.multiplicity(),
        multiplicity_bound()
    );
    run.add_csv("lattice.csv", |b| write_lattice(b, &lat))?;
    run.add_csv("samples.csv", |b| write_samples(b, &samples))?;
    run.commit("lattice")
}

fn read_sample_file(path: &Path) -> Result<(Vec<u8>, Vec<(Point, Complex64)>)> {
    let bytes = std::fs::read(path)?;
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(Failure::Validation(format!("sample file {} is empty", path.display())).into());
    }
    let rows = read_samples(bytes.as_slice())?;
    if rows.is_empty() {
        return Err(Failure::Validation(format!("sample file {} contains no samples", path.display())).into());
    }
    Ok((bytes, rows))
}

fn non_contraction(err: CoreError, eps: f64) -> anyhow::Error {
    match err {
        CoreError::NonContraction { ratio, steps } => anyhow::Error::new(Failure::Numerical(format!(
            "iteration diverges: step ratio {ratio:.4} >= 1 for {steps} consecutive steps at epsilon {eps}; \
             try a smaller epsilon such as {}",
            smaller_eps(eps)
        ))),
        other => other.into(),
    }
}

pub fn reconstruct_cmd(mut run: Run, samples_path: Option<&Path>) -> Result<()> {
    let file = match samples_path {
        Some(p) => {
            let file = read_sample_file(p)?;
            if run.cfg.epsilon == Epsilon::Auto {
                return Err(Failure::Validation("epsilon = auto cannot be used with --samples; set the spacing of the sample lattice".into()).into());
            }
            Some(file)
        }
        None => None,
    };
    let space = run.space()?;
    let (eps, est, op, samples, truth) = match file {
        Some((bytes, rows)) => {
            run.inputs.push(bytes);
            let Epsilon::Fixed(eps) = run.cfg.epsilon else { unreachable!() };
            let grid = space.plan().spatial().clone();
            let (points, values): (Vec<Point>, Vec<Complex64>) = rows.into_iter().unzip();
            let probes = probe_set(&grid, 2)?;
            let lat = Arc::new(Lattice::from_centers(eps, run.cfg.radius, points, &probes)?);
            let partition = run.timings.stage("partition", || build_partition(lat.clone(), eps, grid))?;
            let op = FrameOperator::new(space.clone(), Arc::new(partition))?;
            let seed = run.cfg.seed;
            let est = run.timings.stage("contraction_estimate", || estimate_contraction(&op, ESTIMATE_PROBES, seed))?;
            let samples = SampleVector::new(lat, values)?;
            (eps, est, op, samples, None)
        }
        None => {
            let (eps, est, op) = run.operator(&space)?;
            let (truth, _) = band_probe(&space, run.cfg.seed)?;
            let samples = op.sample(&truth)?;
            (eps, est, op, samples, Some(truth))
        }
    };
    println!("epsilon {eps} ; contraction estimate {est:.6e} ; band dimension {}", op.dim());
    if est >= 1.0 {
        return Err(Failure::Numerical(format!(
            "no contraction: estimated ratio {est:.4} >= 1 at epsilon {eps}; try a smaller epsilon such as {}",
            smaller_eps(eps)
        ))
        .into());
    }
    let (max_iter, tol) = (run.cfg.max_iter, run.cfg.tol);
    let (field, report) = run
        .timings
        .stage("iterate", || reconstruct(&samples, &op, max_iter, tol, truth.as_ref()))
        .map_err(|e| non_contraction(e, eps))?;
    if !report.converged {
        return Err(Failure::Numerical(format!(
            "no convergence after {} iterations: measured step ratio {:.4}, last update {:.3e}; try a smaller epsilon such as {}",
            report.iterations,
            report.gamma_estimate,
            report.delta_norms.last().copied().unwrap_or(f64::NAN),
            smaller_eps(eps)
        ))
        .into());
    }
    print_report(&report);
    let svg = error_plot(&report);
    run.add_csv("report.csv", |b| write_report(b, &report))?;
    run.add_csv("reconstruction.csv", |b| write_field(b, &field))?;
    run.outputs.add("error.svg", svg.into_bytes());
    run.commit("reconstruct")
}

fn print_report(report: &ReconstructionReport) {
    println!(
        "converged in {} iterations ; gamma estimate {:.6e} ; log-linear R2 {:.6}",
        report.iterations, report.gamma_estimate, report.fit_r2
    );
    if let Some(err) = report.final_relative_error() {
        println!("final interior relative error {err:.6e}");
    }
}

fn error_plot(report: &ReconstructionReport) -> String {
    let (points, y_label): (Vec<(f64, f64)>, &str) = match (&report.errors, report.truth_norm) {
        (Some(errors), Some(norm)) if norm > 0.0 => {
            (errors.iter().enumerate().map(|(n, e)| (n as f64, e / norm)).collect(), "relative interior error")
        }
        _ => (report.delta_norms.iter().enumerate().map(|(n, d)| (n as f64, *d)).collect(), "update norm"),
    };
    Plot { title: "Error vs iteration", x_label: "iteration", y_label, x_scale: Scale::Linear, y_scale: Scale::Log }
        .render(&points)
}

struct SweepRow {
    eps: f64,
    gamma: Option<f64>,
    iterations: Option<usize>,
    final_error: Option<f64>,
    status: String,
}

pub fn sweep(mut run: Run) -> Result<()> {
    let list = run.cfg.sweep_eps.clone();
    if list.len() < 2 {
        return Err(ConfigError { line: None, message: format!("sweep needs at least 2 values in sweep_eps, found {}", list.len()) }.into());
    }
    let space = run.space()?;
    let seed = run.cfg.seed;
    let (max_iter, tol) = (run.cfg.max_iter, run.cfg.tol);
    let (truth, _) = band_probe(&space, seed)?;
    let mut rows = Vec::new();
    for &eps in &list {
        let mut row = SweepRow { eps, gamma: None, iterations: None, final_error: None, status: String::new() };
        let result = run.timings.stage(&format!("eps_{eps}"), || -> hyperband_core::Result<()> {
            let op = FrameOperator::for_epsilon(space.clone(), eps, seed)?;
            let est = estimate_contraction(&op, ESTIMATE_PROBES, seed)?;
            row.gamma = Some(est);
            let (_, report) = reconstruct(&op.sample(&truth)?, &op, max_iter, tol, Some(&truth))?;
            row.iterations = Some(report.iterations);
            row.final_error = report.final_relative_error();
            row.status = if report.converged { "ok".into() } else { "not converged".into() };
            Ok(())
        });
        if let Err(e) = result {
            row.status = format!("failed: {e}");
        }
        println!(
            "eps {:<8} gamma {:<24} iterations {:<4} final error {:<24} {}",
            eps,
            row.gamma.map(fmt_f64).unwrap_or_default(),
            row.iterations.map(|n| n.to_string()).unwrap_or_default(),
            row.final_error.map(fmt_f64).unwrap_or_default(),
            row.status
        );
        rows.push(row);
    }
    let mut table = csv::Writer::from_writer(Vec::new());
    table.write_record(["epsilon", "gamma_hat", "iterations", "final_error", "status"])?;
    for r in &rows {
        table.write_record([
            fmt_f64(r.eps),
            r.gamma.map(fmt_f64).unwrap_or_default(),
            r.iterations.map(|n| n.to_string()).unwrap_or_default(),
            r.final_error.map(fmt_f64).unwrap_or_default(),
            r.status.clone(),
        ])?;
    }
    run.outputs.add("sweep.csv", table.into_inner().map_err(|e| e.into_error())?);
    let points: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.gamma.map(|g| (r.eps, g))).collect();
    let plot = Plot {
        title: "Contraction estimate vs lattice spacing",
        x_label: "epsilon",
        y_label: "gamma estimate",
        x_scale: Scale::Log,
        y_scale: Scale::Log,
    };
    run.outputs.add("gamma.svg", plot.render(&points).into_bytes());
    run.commit("sweep")
}

struct Check {
    name: &'static str,
    measured: f64,
    threshold: String,
    pass: bool,
}

fn check_at_most(name: &'static str, measured: f64, limit: f64) -> Check {
    Check { name, measured, threshold: format!("<= {limit:e}"), pass: measured <= limit }
}

fn rel(a: &Field, b: &Field, mask: &[bool]) -> hyperband_core::Result<f64> {
    Ok(a.sub(b)?.masked_norm(mask) / b.masked_norm(mask))
}

fn run_checks(run: &mut Run, checks: &mut Vec<Check>) -> Result<()> {
    let seed = run.cfg.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let g = random_group_element(seed.wrapping_add(i));
        let mut point = || Point::new(rng.random_range(-3.0..3.0), rng.random_range(-2.0f64..2.0).exp());
        let (z, w) = (point()?, point()?);
        let dg = hyperbolic_distance(&mobius_apply(&g, &z)?, &mobius_apply(&g, &w)?);
        worst = worst.max((hyperbolic_distance(&z, &w) - dg).abs());
    }
    checks.push(check_at_most("geometry_invariance", worst, 1e-10));

    let space = run.space()?;
    let plan = space.plan().clone();
    let band = space.band();
    let mut plancherel: f64 = 0.0;
    let mut bernstein: f64 = 0.0;
    for p in 0..3 {
        let (f, _) = band_probe(&space, seed.wrapping_add(p))?;
        let lhs = f.norm().powi(2);
        plancherel = plancherel.max((lhs - plan.forward(&f)?.norm().powi(2)).abs() / lhs);
        let (_, spectrum) = masked_probe(&plan, band, seed.wrapping_add(100 + p))?;
        for sigma in [1.0, 0.5 * run.cfg.k] {
            let r = bernstein_check(&spectrum, band, sigma);
            bernstein = bernstein.max(r.lhs / r.rhs);
        }
    }
    checks.push(check_at_most("plancherel_rel_discrepancy", plancherel, 1e-2));
    checks.push(check_at_most("bernstein_ratio", bernstein, 1.0 + 1e-6));
    let omega = band.omega();
    let (_, high) = shifted_probe(&plan, 1.5 * omega, 0.2 * omega, seed)?;
    let converse = bernstein_check(&high, band, 8.0);
    let ratio = converse.lhs / converse.rhs;
    checks.push(Check { name: "bernstein_converse_ratio", measured: ratio, threshold: "> 1".into(), pass: ratio > 1.0 });

    let noise = {
        let values = (0..plan.spatial().len())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        Field::new(plan.spatial().clone(), values)?
    };
    let once = space.project(&noise)?;
    let all = vec![true; once.grid().len()];
    checks.push(check_at_most("projector_idempotence", rel(&space.project(&once)?, &once, &all)?, 1e-12));

    let (eps, est, op) = run.operator(&space)?;
    let lat = op.partition().lattice().clone();
    checks.push(Check {
        name: "lattice_separation",
        measured: lat.separation(),
        threshold: format!(">= {}", eps / 2.0),
        pass: lat.separation() >= eps / 2.0,
    });
    checks.push(check_at_most("lattice_covering", lat.covering(), eps / 2.0));
    checks.push(check_at_most("lattice_multiplicity", lat.multiplicity() as f64, multiplicity_bound()));
    let partition = op.partition();
    let mut sum_err: f64 = 0.0;
    for i in 0..partition.grid().len() {
        if partition.interior()[i] {
            sum_err = sum_err.max((partition.row(i).iter().map(|e| e.1).sum::<f64>() - 1.0).abs());
        }
    }
    checks.push(check_at_most("partition_sum", sum_err, 1e-12));
    checks.push(Check { name: "contraction_estimate", measured: est, threshold: "< 1".into(), pass: est < 1.0 });

    let (truth, _) = band_probe(&space, seed.wrapping_add(7))?;
    let (af, _) = op.apply_with_spectrum(&truth)?;
    checks.push(check_at_most("range_confinement", rel(&space.project(&af)?, &af, &all)?, 1e-10));
    if est < 1.0 {
        let samples = op.sample(&truth)?;
        let interior = partition.interior();
        let (max_iter, tol) = (run.cfg.max_iter, run.cfg.tol);
        match reconstruct(&samples, &op, max_iter, tol, Some(&truth)) {
            Ok((rec, report)) => {
                let err = rel(&rec, &truth, interior)?;
                checks.push(Check {
                    name: "reconstruction_error",
                    measured: err,
                    threshold: "< 1e-6".into(),
                    pass: report.converged && err < 1e-6,
                });
                checks.push(Check { name: "log_fit_r2", measured: report.fit_r2, threshold: "> 0.99".into(), pass: report.fit_r2 > 0.99 });
            }
            Err(e) => {
                println!("reconstruction failed: {e}");
                checks.push(Check { name: "reconstruction_error", measured: f64::NAN, threshold: "< 1e-6".into(), pass: false });
            }
        }
        if op.dim() <= MAX_DENSE_DIM {
            let (iterate, _) = reconstruct(&samples, &op, 4 * max_iter.max(15), 1e-15, None).map_err(|e| non_contraction(e, eps))?;
            let (_, direct) = direct_solve_oracle(&samples, &op)?;
            checks.push(check_at_most("oracle_agreement", rel(&iterate, &direct, interior)?, 1e-8));
        }
    }
    Ok(())
}

pub fn verify(mut run: Run) -> Result<()> {
    let mut checks = Vec::new();
    run_checks(&mut run, &mut checks)?;
    println!("{:<28} {:>24}  {:<24} result", "check", "measured", "threshold");
    for c in &checks {
        println!("{:<28} {:>24}  {:<24} {}", c.name, fmt_f64(c.measured), c.threshold, if c.pass { "PASS" } else { "FAIL" });
    }
    let mut table = csv::Writer::from_writer(Vec::new());
    table.write_record(["check", "measured", "threshold", "pass"])?;
    for c in &checks {
        table.write_record([c.name.to_string(), fmt_f64(c.measured), c.threshold.clone(), c.pass.to_string()])?;
    }
    run.outputs.add("verify.csv", table.into_inner().map_err(|e| e.into_error())?);
    let failed = checks.iter().filter(|c| !c.pass).count();
    let total = checks.len();
    run.commit("verify")?;
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} of {total} checks failed")).into());
    }
    println!("all {total} checks pass");
    Ok(())
}
