use std::sync::{Arc, OnceLock};

use hyperband_core::discretization::{build_spatial_grid, build_spectral_grid_split, Field};
use hyperband_core::geometry::Point;
use hyperband_core::io::write_report;
use hyperband_core::probe::band_probe;
use hyperband_core::reconstruction::{
    contraction_norm, direct_solve_oracle, estimate_contraction, neumann_partial_sums, neumann_recursion, reconstruct,
    FrameOperator,
};
use hyperband_core::sampling::{build_partial_partition, generate_lattice, probe_set, sample_field, Lattice, SampleVector};
use hyperband_core::transform::{BandLimit, BandSpace, HftPlan, DEFAULT_CONCENTRATION};
use hyperband_core::Error;
use num_complex::Complex64;

fn space() -> Arc<BandSpace> {
    static SPACE: OnceLock<Arc<BandSpace>> = OnceLock::new();
    SPACE
        .get_or_init(|| {
            let sp = build_spatial_grid(6.0, 200, 256).unwrap();
            let sg = build_spectral_grid_split(4.0, 128, 256, Some(1.0)).unwrap();
            let plan = Arc::new(HftPlan::new(sp, sg).unwrap());
            Arc::new(BandSpace::new(plan, BandLimit::new(1.0, 4.0).unwrap(), DEFAULT_CONCENTRATION).unwrap())
        })
        .clone()
}

fn operator() -> FrameOperator {
    static OP: OnceLock<FrameOperator> = OnceLock::new();
    OP.get_or_init(|| FrameOperator::for_epsilon(space(), 0.5, 42).unwrap()).clone()
}

fn rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn zero_samples_reconstruct_to_zero() {
    let op = operator();
    let lattice = op.partition().lattice().clone();
    let zeros = SampleVector::new(lattice.clone(), vec![Complex64::default(); lattice.len()]).unwrap();
    let (f, report) = reconstruct(&zeros, &op, 10, 1e-10, None).unwrap();
    assert_eq!(f.norm(), 0.0);
    assert!(report.converged);
    assert_eq!(report.iterations, 1);
}

#[test]
fn frame_operator_is_linear_and_lands_in_the_band() {
    let op = operator();
    let s = space();
    let (f, _) = band_probe(&s, 1).unwrap();
    let (g, _) = band_probe(&s, 2).unwrap();
    let (alpha, beta) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
    let combo = f.scale(alpha).add(&g.scale(beta)).unwrap();
    let lhs = op.apply(&combo).unwrap();
    let rhs = op.apply(&f).unwrap().scale(alpha).add(&op.apply(&g).unwrap().scale(beta)).unwrap();
    assert!(rel(lhs.values(), rhs.values()) < 1e-10);

    let (af, spectrum) = op.apply_with_spectrum(&f).unwrap();
    let again = s.project(&af).unwrap();
    assert!(rel(again.values(), af.values()) < 1e-10);
    assert!(spectrum.out_of_band_norm(1.0) <= 1e-10 * spectrum.norm());
}

#[test]
fn neumann_iteration_recovers_band_probes() {
    let op = operator();
    let s = space();
    for seed in [10, 11] {
        let (f, _) = band_probe(&s, seed).unwrap();
        let samples = op.sample(&f).unwrap();
        let (rec, report) = reconstruct(&samples, &op, 25, 1e-10, Some(&f)).unwrap();
        assert!(report.converged);
        let interior = op.partition().interior();
        let err = rec.sub(&f).unwrap().masked_norm(interior) / f.masked_norm(interior);
        assert!(err < 1e-6, "seed {seed}: {err}");
        assert!((report.final_relative_error().unwrap() - err).abs() < 1e-12);
        assert!(report.gamma_estimate < 1.0);
        assert!(report.fit_r2 > 0.99);
        assert!(report.delta_norms.windows(2).all(|w| w[1] < w[0]));
        let norm = report.truth_norm.unwrap();
        for (n, e) in report.errors.as_ref().unwrap().iter().enumerate() {
            assert!(*e <= report.gamma_estimate.powi(n as i32 + 1) * norm * 1.2, "step {n}");
        }
    }
}

#[test]
fn dense_oracle_agrees_with_the_iteration() {
    let op = operator();
    let s = space();
    let (f, _) = band_probe(&s, 20).unwrap();
    let samples = op.sample(&f).unwrap();
    let (iterate, _) = reconstruct(&samples, &op, 60, 1e-15, None).unwrap();
    let (x, oracle) = direct_solve_oracle(&samples, &op).unwrap();
    let interior = op.partition().interior();
    let diff = iterate.sub(&oracle).unwrap().masked_norm(interior) / oracle.masked_norm(interior);
    assert!(diff < 1e-8, "{diff}");
    // Residual of the solve itself.
    let b = op.spread(&op.restrict(&samples).unwrap()).unwrap();
    let ax = op.apply_coordinates(&x).unwrap();
    assert!(rel(&ax, &b) < 1e-10);
}

#[test]
fn recursion_matches_matrix_partial_sums() {
    let op = operator();
    let s = space();
    let (f, _) = band_probe(&s, 30).unwrap();
    let b = op.spread(&op.restrict(&op.sample(&f).unwrap()).unwrap()).unwrap();
    let m = op.matrix().unwrap();
    let sums = neumann_partial_sums(&m, &b, 6);
    let recursion = neumann_recursion(&op, &b, 6).unwrap();
    for (a, r) in sums.iter().zip(&recursion) {
        assert!(rel(r, a) < 1e-10);
    }
}

#[test]
fn contraction_estimates_are_small_and_bounded_by_the_norm() {
    let op = operator();
    let est = estimate_contraction(&op, 3, 5).unwrap();
    let norm = contraction_norm(&op).unwrap();
    assert!(est > 0.0 && est < 0.5);
    assert!(est <= norm * (1.0 + 1e-9), "{est} > {norm}");
}

#[test]
fn single_center_lattice_cannot_contract() {
    let s = space();
    let grid = s.plan().spatial().clone();
    let probes = probe_set(&grid, 1).unwrap();
    let lattice = Arc::new(Lattice::from_centers(0.5, grid.radius(), vec![Point::I], &probes).unwrap());
    let partition = Arc::new(build_partial_partition(lattice, 0.5, grid).unwrap());
    let op = FrameOperator::new(s, partition).unwrap();
    let est = estimate_contraction(&op, 3, 1).unwrap();
    assert!(est >= 1.0, "{est}");
}

#[test]
fn mismatched_inputs_are_rejected() {
    let op = operator();
    let grid = space().plan().spatial().clone();
    let other = Arc::new(generate_lattice(&grid, 0.5, 43).unwrap());
    let f = Field::zeros(grid);
    let samples = sample_field(&f, &other).unwrap();
    assert!(matches!(reconstruct(&samples, &op, 5, 1e-8, None), Err(Error::Shape(_))));
    let own = op.sample(&f).unwrap();
    assert!(matches!(reconstruct(&own, &op, 5, 0.0, None), Err(Error::Config(_))));
}

#[test]
fn report_serializes_one_row_per_step() {
    let op = operator();
    let (f, _) = band_probe(&space(), 40).unwrap();
    let (_, report) = reconstruct(&op.sample(&f).unwrap(), &op, 25, 1e-10, Some(&f)).unwrap();
    let mut buf = Vec::new();
    write_report(&mut buf, &report).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, report.delta_norms.len() + 1);
    assert!(text.contains("gamma_estimate="));
}
