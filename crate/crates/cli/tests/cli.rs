use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_leaky-lamb"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn sweep(config: &Path, out: &Path) -> Output {
    run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "-q",
    ])
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p
}

#[test]
fn tiny_sweep_matches_golden_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = sweep(&data("tiny.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let got = std::fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
    let want = std::fs::read_to_string(data("tiny_dispersion.csv")).unwrap();
    let got: Vec<&str> = got.lines().collect();
    let want: Vec<&str> = want.lines().collect();
    assert_eq!(got[0], want[0]);
    assert_eq!(got.len(), want.len(), "mode count changed:\n{}", got.join("\n"));
    for (g, w) in got[1..].iter().zip(&want[1..]) {
        let g: Vec<&str> = g.split(',').collect();
        let w: Vec<&str> = w.split(',').collect();
        // frequency, omega and case label are exact
        assert_eq!((g[0], g[1], g[5]), (w[0], w[1], w[5]));
        for col in [2, 3, 4] {
            let (a, b): (f64, f64) = (g[col].parse().unwrap(), w[col].parse().unwrap());
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "column {col}: {a} vs {b}");
        }
        // residual and backward error depend on rounding; only sanity-check them
        let res: f64 = g[6].parse().unwrap();
        let be: f64 = g[7].parse().unwrap();
        assert!(res < 1e-3 && be < 1e-10, "{g:?}");
    }
    for f in ["modes.json", "plot_dispersion.gp", "plot_attenuation.gp"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn sweep_is_deterministic_across_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&sweep(&data("tiny.json"), a.path())), 0);
    let o = run(&[
        "sweep",
        "--config",
        data("tiny.json").to_str().unwrap(),
        "--out",
        b.path().to_str().unwrap(),
        "--jobs",
        "3",
        "-q",
    ]);
    assert_eq!(code(&o), 0);
    let read = |d: &Path| std::fs::read(d.join("dispersion.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn config_errors_exit_3_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"frequency": {"max_mhz": 1.0, "steps": 0}}"#);
    let out = dir.path().join("out");
    let o = sweep(&cfg, &out);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());

    let cfg = write_config(dir.path(), r#"{"n_point": 20}"#);
    assert_eq!(code(&sweep(&cfg, &out)), 3);
    assert_eq!(code(&sweep(&dir.path().join("missing.json"), &out)), 3);
}

#[test]
fn material_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        r#"{"system": {"side_a": "unobtainium", "guide": "epoxy", "side_b": "aluminium", "half_thickness_mm": 0.5}}"#,
    );
    let o = sweep(&cfg, &out);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unobtainium"));

    // shear speed above the longitudinal speed
    let cfg = write_config(
        dir.path(),
        r#"{"materials": {"odd": {"rho": 1.0, "c_l": 2.0, "c_t": 3.0}},
            "system": {"side_a": "aluminium", "guide": "odd", "side_b": "aluminium", "half_thickness_mm": 0.5}}"#,
    );
    assert_eq!(code(&sweep(&cfg, &out)), 4);
}

#[test]
fn modeshape_and_validate_on_tiny_dataset() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&sweep(&data("tiny.json"), dir.path())), 0);
    let d = dir.path().to_str().unwrap();

    let o = run(&[
        "modeshape",
        "--data",
        d,
        "--freq",
        "1.5",
        "--mode",
        "shear-leaky",
        "--samples",
        "21",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("shear-leaky") && stdout.contains("growing"), "{stdout}");
    let shapes: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("modeshape_"))
        .collect();
    assert_eq!(shapes.len(), 1);

    let o = run(&["modeshape", "--data", d, "--freq", "9.0"]);
    assert_eq!(code(&o), 6);
    let o = run(&["modeshape", "--data", d, "--freq", "1.0", "--mode", "9999"]);
    assert_eq!(code(&o), 6);
    assert!(String::from_utf8_lossy(&o.stderr).contains("candidates"));

    let o = run(&["validate", "--data", d]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(dir.path().join("validation.txt").exists());
}

#[test]
fn missing_dataset_exits_6() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--data", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 6);
}

#[test]
fn validate_accepts_an_empty_dataset() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&sweep(&data("tiny.json"), dir.path())), 0);
    let path = dir.path().join("modes.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["modes"] = serde_json::json!([]);
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&["validate", "--data", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("0 of 0"));
}

#[test]
fn materials_list_and_usage() {
    let o = run(&["materials", "list"]);
    assert_eq!(code(&o), 0);
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("aluminium") && s.contains("epoxy"));
    assert_eq!(code(&run(&["sweep"])), 2);
}
