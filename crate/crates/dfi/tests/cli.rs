use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dfi::output::{read_samples_csv, SAMPLE_COLUMNS};

fn dfi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfi")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sweep_csv_round_trips() {
    let o = dfi(&["sweep", "--points", "9", "--fmin", "0.1", "--fmax", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), SAMPLE_COLUMNS.join(","));
    let rows = read_samples_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0].f_hz, 0.1);
    assert_eq!(rows[8].f_hz, 1000.0);
    assert!(rows.iter().all(|r| r.is_ok() && r.eta_gain.is_none()));

    let mut again = Vec::new();
    dfi::output::write_samples_csv(&mut again, &rows).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), text);
}

#[test]
fn json_output_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = dfi(&["sweep", "--points", "3", "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0]["sigma"].as_f64().unwrap() > 0.0);
    assert!(rows[0]["eta_gain"].is_null());
    assert_eq!(rows[0]["status"], "ok");
}

#[test]
fn invalid_scenarios_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.toml", "[sweep]\nf_mni = 1.0\n");
    let even = write(dir.path(), "b.toml", "[geometry]\npreset = \"ngon:4\"\n");
    let mass = write(dir.path(), "c.toml", "[optics]\nmirror_mass = -1.0\n");
    for path in [&unknown, &even, &mass] {
        let o = dfi(&["sweep", "--scenario", path]);
        assert_eq!(o.status.code(), Some(2), "{path}");
    }
    assert_eq!(dfi(&["sweep", "--fmin", "0"]).status.code(), Some(2));
    assert_eq!(dfi(&["sweep", "--points", "1"]).status.code(), Some(2));
    assert_eq!(dfi(&["sweep", "--scenario", "/nonexistent/x.toml"]).status.code(), Some(2));
}

#[test]
fn closed_cavity_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.toml", "[geometry]\ntransmissivities = [0.0, 0.0, 0.0]\n");
    let o = dfi(&["sweep", "--scenario", &p, "--points", "4"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn correlated_noise_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    // Diagonal thermal-like spectrum with some common-mode correlation.
    let mut csv = String::from("f,s00,s01,s02,s10,s11,s12,s20,s21,s22\n");
    for f in [1e-3, 1.0, 1e3, 1e6] {
        let d: f64 = 2.7e-30 / f64::powi(f, 5).max(1e-300);
        let c = 0.3 * d;
        csv.push_str(&format!("{f},{d},{c},{c},{c},{d},{c},{c},{c},{d}\n"));
    }
    write(dir.path(), "spectrum.csv", &csv);
    let p = write(
        dir.path(),
        "s.toml",
        "[[noise]]\nkind = \"correlated\"\npath = \"spectrum.csv\"\n\n[sweep]\nf_min = 0.1\nf_max = 100.0\npoints = 5\n",
    );
    let o = dfi(&["sweep", "--scenario", &p]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_samples_csv(stdout(&o).as_bytes()).unwrap();
    assert!(rows.iter().all(|r| r.is_ok()));

    let bad = write(dir.path(), "bad.toml", "[[noise]]\nkind = \"correlated\"\npath = \"missing.csv\"\n");
    assert_eq!(dfi(&["sweep", "--scenario", &bad]).status.code(), Some(2));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let run = |threads: &str| stdout(&dfi(&["sweep", "--points", "40", "--threads", threads]));
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("8"));
}

#[test]
fn budget_columns() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "s.toml",
        "[[noise]]\nkind = \"thermal\"\n\n[[noise]]\nkind = \"white\"\ndelta = 1e-18\n",
    );
    let o = dfi(&["budget", "--scenario", &p, "--points", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(
        text.lines().next().unwrap(),
        "f_hz,sigma_quantum,sigma_thermal,sigma_white,sigma_combined"
    );
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn optimize_ngons_and_sagnac_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "s.toml", "[optimize]\ngrid = 2\nfrequencies = [0.1, 1.0]\n");
    let o = dfi(&["optimize-t", "--scenario", &p]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "t_0,t_1,t_2,objective");
    assert_eq!(text.lines().count(), 9);

    let o = dfi(&["ngons", "--points", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("n,f_hz,sigma"));
    assert_eq!(text.lines().count(), 10);

    let o = dfi(&["sagnac", "--points", "3", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["sagnac"].as_array().unwrap().len(), 3);
}

#[test]
fn presets_from_scenario() {
    let dir = tempfile::tempdir().unwrap();
    for preset in ["standard-sagnac", "ngon:5"] {
        let p = write(dir.path(), "s.toml", &format!("[geometry]\npreset = \"{preset}\"\n"));
        let o = dfi(&["sweep", "--scenario", &p, "--points", "3"]);
        assert_eq!(o.status.code(), Some(0), "{preset}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn shipped_scenarios_run() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        let o = dfi(&["sweep", "--scenario", p.to_str().unwrap(), "--points", "4"]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", p.display(), String::from_utf8_lossy(&o.stderr));
    }
}
