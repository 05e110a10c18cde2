use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "R = 4\nn_rho = 64\nn_theta = 64\nT = 4\nn_t = 48\nn_phi = 64\nomega = 1\n";

fn hyperband(args: &[&str], config: &str, dir: &Path) -> Output {
    let path = dir.join("run.conf");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hyperband"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .env_remove("HYPERBAND_THREADS")
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn synth_is_byte_identical_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = hyperband(&["synth", "--out", out.to_str().unwrap()], SMALL, dir.path());
        assert!(o.status.success(), "{}", text(&o.stderr));
    }
    for name in ["field.csv", "spectrum.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    for f in manifest["files"].as_array().unwrap() {
        assert!(a.join(f.as_str().unwrap()).exists());
    }
    assert_eq!(manifest["input_hash"].as_str().unwrap().len(), 64);
    let field = std::fs::read_to_string(a.join("field.csv")).unwrap();
    let first = field.lines().nth(1).unwrap();
    // Every float carries 17 significant digits.
    let mantissa = first.split(',').next().unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
}

#[test]
fn default_reconstruction_converges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hyperband(&["reconstruct", "--out", out.to_str().unwrap()], "epsilon = auto\n", dir.path());
    assert!(o.status.success(), "{}", text(&o.stderr));
    let stdout = text(&o.stdout);
    let err: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("final interior relative error "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(err < 1e-6);
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(report.contains("converged=true"));
    let svg = std::fs::read_to_string(out.join("error.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("polyline"));
}

#[test]
fn coarse_lattice_reports_non_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hyperband(&["reconstruct", "--out", out.to_str().unwrap()], "omega = 8\nT = 16\nepsilon = 1\n", dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", text(&o.stderr));
    let stderr = text(&o.stderr);
    assert!(stderr.contains("smaller epsilon"), "{stderr}");
    assert!(stderr.contains("ratio"), "{stderr}");
    assert!(!out.exists());
}

#[test]
fn empty_sample_file_is_an_input_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let samples = dir.path().join("samples.csv");
    std::fs::write(&samples, "").unwrap();
    let args = ["reconstruct", "--samples", samples.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let o = hyperband(&args, &format!("{SMALL}epsilon = 0.5\n"), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("empty"));
    std::fs::write(&samples, "x,y,re,im\n").unwrap();
    let o = hyperband(&args, &format!("{SMALL}epsilon = 0.5\n"), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("no samples"));
    assert!(!out.exists());
}

#[test]
fn lattice_samples_feed_reconstruction() {
    let dir = tempfile::tempdir().unwrap();
    let lat = dir.path().join("lat");
    let config = format!("{SMALL}epsilon = 0.5\n");
    let o = hyperband(&["lattice", "--out", lat.to_str().unwrap()], &config, dir.path());
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(std::fs::read_to_string(lat.join("lattice.csv")).unwrap().starts_with("# r="));
    let out = dir.path().join("rec");
    let samples = lat.join("samples.csv");
    let args = ["reconstruct", "--samples", samples.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let o = hyperband(&args, &config, dir.path());
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(out.join("reconstruction.csv").exists());
}

#[test]
fn sweep_needs_two_spacings_and_records_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hyperband(&["sweep", "--out", out.to_str().unwrap()], &format!("{SMALL}sweep_eps = 0.5\n"), dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("at least 2"));

    // One iteration is not enough to converge, which each row records.
    let config = format!("{SMALL}sweep_eps = 0.8, 0.4\nmax_iter = 1\n");
    let o = hyperband(&["sweep", "--out", out.to_str().unwrap()], &config, dir.path());
    assert!(o.status.success(), "{}", text(&o.stderr));
    let table = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "epsilon,gamma_hat,iterations,final_error,status");
    assert_eq!(rows.len(), 3);
    assert!(rows[1..].iter().all(|r| r.ends_with("not converged")));
    let gammas: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(gammas[1] < gammas[0]);
    assert!(std::fs::read_to_string(out.join("gamma.svg")).unwrap().contains("<circle"));
}

#[test]
fn verify_prints_a_passing_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hyperband(&["verify", "--out", out.to_str().unwrap()], "", dir.path());
    let stdout = text(&o.stdout);
    assert!(o.status.success(), "{stdout}\n{}", text(&o.stderr));
    assert!(stdout.contains("plancherel_rel_discrepancy"));
    assert!(!stdout.contains("FAIL"));
    assert!(out.join("verify.csv").exists());
}

#[test]
fn broken_configs_fail_validation_before_compute() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = hyperband(&["verify", "--out", out.to_str().unwrap()], "omega = 2\nT = 1\n", dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("line 2"));
    assert!(!out.exists());

    let o = hyperband(&["synth"], "bogus = 3\n", dir.path());
    assert_eq!(o.status.code(), Some(1));

    let o = Command::new(env!("CARGO_BIN_EXE_hyperband"))
        .args(["synth", "--config", dir.path().join("missing.conf").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));

    let o = Command::new(env!("CARGO_BIN_EXE_hyperband")).args(["frobnicate", "--config", "x"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));

    let path = dir.path().join("ok.conf");
    std::fs::write(&path, SMALL).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_hyperband"))
        .args(["synth", "--config", path.to_str().unwrap()])
        .env("HYPERBAND_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
