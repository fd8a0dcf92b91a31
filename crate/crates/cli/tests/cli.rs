use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nalgebra::SymmetricEigen;

use drg_cli::output::RunFlags;
use drg_cli::{
    cmd_brockett, cmd_insar, cmd_rayleigh, cmd_verify, BrockettArgs, CliError, InsarArgs, RayleighArgs, VerifyArgs,
};
use drg_core::imaging::{
    load_phase, load_spd, save_phase, save_spd, synth_phase, synth_spd, NoiseSpec, PhasePattern, SpdPattern,
};
use drg_core::linalg::{random_symmetric, seeded_rng};
use drg_core::manifolds::SoRetraction;
use drg_core::verify::Suite;

fn drg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drg")).args(args).output().unwrap()
}

fn manifest(dir: &Path) -> toml::Table {
    fs::read_to_string(dir.join("manifest.txt")).unwrap().parse().unwrap()
}

fn flags(dir: &Path) -> RunFlags {
    RunFlags {
        out: dir.to_path_buf(),
        no_timing: true,
        parallel: false,
        audit_stride: 0,
    }
}

fn rayleigh_args(dir: &Path) -> RayleighArgs {
    RayleighArgs {
        m: 3,
        matrix: None,
        seed: 1,
        tau: 1.0,
        tol: 1e-12,
        max_iters: 20_000,
        theta0: None,
        flags: flags(dir),
    }
}

#[test]
fn rayleigh_matches_dense_eigensolver() {
    let tmp = tempfile::tempdir().unwrap();
    let rep = cmd_rayleigh(&rayleigh_args(tmp.path())).unwrap();
    let a = random_symmetric(3, &mut seeded_rng(1));
    let min = SymmetricEigen::new(a).eigenvalues.min();
    assert!((rep.final_energy - min).abs() < 1e-8, "{} vs {min}", rep.final_energy);
    assert!(rep.alignment > 1.0 - 1e-6);
}

#[test]
fn rayleigh_starting_at_eigenvector_is_stationary() {
    let tmp = tempfile::tempdir().unwrap();
    let matrix = tmp.path().join("a.txt");
    fs::write(&matrix, "1 0 0\n0 2 0\n0 0 3\n").unwrap();
    let out = tmp.path().join("run");
    let o = drg(&[
        "rayleigh",
        "--matrix",
        matrix.to_str().unwrap(),
        "--theta0",
        "0,0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["result"]["stop_reason"].as_str(), Some("stationary"));
    assert_eq!(m["result"]["iterations"].as_integer(), Some(0));
    assert_eq!(m["result"]["final_energy"].as_float(), Some(1.0));
}

#[test]
fn rayleigh_binary_stops_on_relative_tolerance() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = drg(&[
        "rayleigh",
        "--m",
        "5",
        "--seed",
        "3",
        "--tol",
        "1e-12",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("gap"));
    let m = manifest(&out);
    assert_eq!(m["result"]["stop_reason"].as_str(), Some("rel_tol"));
    assert_eq!(m["command"].as_str(), Some("rayleigh"));
    for f in ["log.csv", "report.txt"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn brockett_two_by_two_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let matrix = tmp.path().join("a.txt");
    fs::write(&matrix, "1.5 0.7\n0.7 -0.4\n").unwrap();
    let (a, b, c) = (1.5f64, 0.7f64, -0.4f64);
    let r = (((a - c) / 2.0).powi(2) + b * b).sqrt();
    let (hi, lo) = ((a + c) / 2.0 + r, (a + c) / 2.0 - r);
    for retraction in [SoRetraction::Cayley, SoRetraction::Exp] {
        let rep = cmd_brockett(&BrockettArgs {
            m: 2,
            matrix: Some(matrix.clone()),
            seed: 1,
            tau: 0.1,
            retraction,
            iters: 2000,
            identity_start: true,
            flags: flags(&tmp.path().join(format!("{retraction:?}"))),
        })
        .unwrap();
        assert!((rep.final_diagonal[0] - hi).abs() < 1e-10, "{:?}", rep.final_diagonal);
        assert!((rep.final_diagonal[1] - lo).abs() < 1e-10, "{:?}", rep.final_diagonal);
        assert!((rep.final_energy - (hi + 2.0 * lo)).abs() < 1e-10);
    }
}

#[test]
fn brockett_writes_diagonal_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("b");
    let o = drg(&[
        "brockett",
        "--m",
        "5",
        "--iters",
        "50",
        "--no-timing",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let diag = fs::read_to_string(out.join("diag.csv")).unwrap();
    let header = diag.lines().next().unwrap();
    assert!(header.starts_with("k,opt_error,diag_error,d0"));
    assert!(diag.lines().nth(1).unwrap().starts_with("0,"));
}

#[test]
fn insar_without_regularization_returns_the_data() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, noisy) = synth_phase(12, 10, PhasePattern::Steps, NoiseSpec::new(0.3, 2));
    let input = tmp.path().join("in.pphase");
    save_phase(&input, &noisy).unwrap();
    let out = tmp.path().join("run");
    let o = drg(&[
        "insar",
        "--input",
        input.to_str().unwrap(),
        "--lambda",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let result = load_phase(out.join("result.pphase")).unwrap();
    assert_eq!(result.atoms, noisy.atoms);
}

#[test]
fn dti_without_regularization_returns_the_data() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, noisy) = synth_spd(5, 6, SpdPattern::Smooth, NoiseSpec::new(0.05, 2));
    let input = tmp.path().join("in.pspd3");
    save_spd(&input, &noisy).unwrap();
    let out = tmp.path().join("run");
    let o = drg(&[
        "dti",
        "--input",
        input.to_str().unwrap(),
        "--lambda",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let result = load_spd(out.join("result.pspd3")).unwrap();
    assert_eq!(result.atoms, noisy.atoms);
}

#[test]
fn small_insar_run_decreases_monotonically() {
    let tmp = tempfile::tempdir().unwrap();
    let rep = cmd_insar(&InsarArgs {
        input: None,
        synthetic: "16x16".into(),
        sigma: 0.4,
        seed: 3,
        pattern: PhasePattern::Zones,
        lambda: 0.3,
        beta: 2,
        gamma: 1,
        schedule: "constant:0.01".into(),
        horizon: 300,
        ref_tol: 1e-12,
        max_iters: 300,
        threshold: 1e-2,
        flags: flags(tmp.path()),
    })
    .unwrap();
    assert_eq!(rep.non_decreasing_steps, 0);
    assert!(rep.reference_energy < rep.initial_energy);
    let opt = fs::read_to_string(tmp.path().join("optimality.csv")).unwrap();
    assert_eq!(opt.lines().count(), rep.iterations + 1);
}

#[test]
fn dti_preserves_the_region_boundary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = drg(&["dti", "--synthetic", "10x10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    let ratio = m["result"]["edges_denoised"]["ratio"].as_float().unwrap();
    assert!(ratio >= 5.0, "{ratio}");
    assert_eq!(m["result"]["all_spd"].as_bool(), Some(true));
}

#[test]
fn verify_exit_codes() {
    assert!(drg(&["verify", "--trials", "0"]).status.success());
    let o = drg(&["verify", "--suite", "geometry", "--trials", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let rep = cmd_verify(&VerifyArgs {
        suite: Suite::Drg,
        seed: 4,
        trials: 3,
        parallel: true,
        out: None,
    })
    .unwrap();
    assert_eq!(rep.failures(), 0, "{}", rep.summary());
    assert!(!rep.results.is_empty());
}

#[test]
fn bad_inputs_are_configuration_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let out = out.to_str().unwrap();
    let cases: [&[&str]; 5] = [
        &["insar", "--synthetic", "8x8", "--schedule", "wobbly:1", "--out", out],
        &["insar", "--input", "/nonexistent/file.pphase", "--out", out],
        &["rayleigh", "--frobnicate"],
        &["rayleigh", "--theta0", "1,2,3,4", "--out", out],
        &["dti", "--synthetic", "0x4", "--out", out],
    ];
    for args in cases {
        let o = drg(args);
        assert_eq!(
            o.status.code(),
            Some(1),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn exit_code_mapping() {
    assert_eq!(CliError::Config("x".into()).exit_code(), 1);
    assert_eq!(CliError::Runtime("x".into()).exit_code(), 2);
    assert_eq!(CliError::Verify(3).exit_code(), 5);
    assert_eq!(CliError::Verify(1000).exit_code(), 125);
}

#[test]
fn replay_reproduces_the_log() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let o = drg(&[
        "brockett",
        "--m",
        "6",
        "--iters",
        "120",
        "--no-timing",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let manifest_path = first.join("manifest.txt");
    let o = drg(&[
        "replay",
        manifest_path.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(first.join("log.csv")).unwrap(),
        fs::read(second.join("log.csv")).unwrap()
    );
    assert_eq!(manifest(&first)["config"], manifest(&second)["config"]);
}

#[test]
fn matrix_file_must_be_square() {
    let tmp = tempfile::tempdir().unwrap();
    let matrix = tmp.path().join("a.txt");
    fs::write(&matrix, "# comment\n1 2\n3\n").unwrap();
    let err = cmd_rayleigh(&RayleighArgs {
        matrix: Some(matrix),
        ..rayleigh_args(tmp.path())
    })
    .unwrap_err();
    assert!(matches!(err, CliError::Config(_)));
}
