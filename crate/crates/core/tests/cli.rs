use std::fs;
use std::path::Path;

use cutflow::cli::run;
use tempfile::TempDir;

fn cutflow(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cutflow").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn field(row: &[String], header: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn bleher_eynard_trace_reports_both_transitions() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("be.csv");
    let (code, _, err) = cutflow(&[
        "trace",
        "--preset",
        "bleher_eynard",
        "--c",
        "0.5",
        "--tmin",
        "0.05",
        "--tmax",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = read_table(&dir.path().join("be_events.csv"));
    assert_eq!(rows.len(), 2);
    let merge = rows.iter().find(|r| r[0] == "merge").unwrap();
    let birth = rows.iter().find(|r| r[0] == "birth").unwrap();
    assert!((field(merge, &header, "T_c") - 2.0).abs() < 1e-6);
    assert!((field(birth, &header, "T_c") - 1.8451).abs() < 2e-4);

    let (header, rows) = read_table(&out);
    assert_eq!(header, ["T", "s", "beta_1", "beta_2", "beta_3", "beta_4"]);
    for r in &rows {
        assert_eq!(r.len(), 6);
        let s: usize = r[1].parse().unwrap();
        assert_eq!(r.iter().filter(|f| f.is_empty()).count(), 4 - 2 * s);
    }
}

#[test]
fn quartic_trace_matches_closed_forms() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("q.csv");
    let (code, _, _) = cutflow(&[
        "trace",
        "--preset",
        "quartic_even",
        "--tmin",
        "0.1",
        "--tmax",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (header, rows) = read_table(&out);
    for r in &rows {
        let t = field(r, &header, "T");
        let b2 = field(r, &header, "beta_2");
        match r[1].as_str() {
            "1" => {
                let exact = 2.0 / 3f64.sqrt() * (1.0 + (1.0 + 3.0 * t).sqrt()).sqrt();
                assert!((b2 - exact).abs() < 1e-6, "T = {t}");
            }
            _ => assert!(
                (b2 + (1.0 - t.sqrt()).sqrt() * 2f64.sqrt()).abs() < 1e-6,
                "T = {t}"
            ),
        }
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let mut texts = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let (code, _, _) = cutflow(&[
            "thermo",
            "--preset",
            "bleher_eynard",
            "--c",
            "0.25",
            "--points",
            "40",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        texts.push(fs::read(&out).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn density_at_two_cut_temperature() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("rho.csv");
    let (code, _, _) = cutflow(&[
        "density",
        "--preset",
        "bleher_eynard",
        "--c",
        "0.5",
        "--temp",
        "1.9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (_, rows) = read_table(&dir.path().join("rho_summary.csv"));
    let value = |k: &str| {
        rows.iter().find(|r| r[0] == k).unwrap()[1]
            .parse::<f64>()
            .unwrap()
    };
    assert_eq!(value("s"), 2.0);
    assert!((value("norm") - 1.0).abs() < 1e-6);
    for (k, want) in [
        ("beta_1", -1.989),
        ("beta_2", 0.646),
        ("beta_3", 1.431),
        ("beta_4", 1.870),
    ] {
        assert!((value(k) - want).abs() < 1e-3, "{k}");
    }
    let (header, rows) = read_table(&out);
    assert_eq!(header, ["cut", "x", "rho"]);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn quartic_density_vanishes_at_origin_when_critical() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("q1.csv");
    let (code, _, _) = cutflow(&[
        "density",
        "--preset",
        "quartic_even",
        "--temp",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (_, rows) = read_table(&out);
    let at_zero = rows
        .iter()
        .map(|r| (r[1].parse::<f64>().unwrap(), r[2].parse::<f64>().unwrap()))
        .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
        .unwrap();
    assert!(at_zero.0.abs() < 1e-12 && at_zero.1.abs() < 1e-12);
}

#[test]
fn thermo_transitions_summary() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("th.csv");
    let (code, _, _) = cutflow(&[
        "thermo",
        "--preset",
        "quartic_even",
        "--tmin",
        "0.2",
        "--tmax",
        "2",
        "--points",
        "30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (header, rows) = read_table(&dir.path().join("th_transitions.csv"));
    assert_eq!(rows.len(), 1);
    assert!(field(&rows[0], &header, "d2F_one_cut").abs() < 1e-9);
    assert!((field(&rows[0], &header, "jump_d3F") - 0.25).abs() < 0.0125);
    for k in ["delta_F", "delta_dF", "delta_d2F"] {
        assert!(field(&rows[0], &header, k) < 1e-4);
    }
    let (header, rows) = read_table(&out);
    assert_eq!(header, ["T", "s", "F", "v1", "d2F", "d3F"]);
    assert_eq!(rows.len(), 30);
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("t.csv");
    fs::write(
        &cfg,
        format!(
            "preset = bleher_eynard\nc = 0.25\ntmin = 1.0\ntmax = 1.5\nout = {}\n",
            out.display()
        ),
    )
    .unwrap();
    let (code, _, _) = cutflow(&["trace", "--config", cfg.to_str().unwrap(), "--tmax", "2.5"]);
    assert_eq!(code, 0);
    let (header, rows) = read_table(&out);
    assert_eq!(field(&rows[0], &header, "T"), 2.5);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["trace", "--tmin", "2", "--tmax", "1"][..],
        &["trace", "--tmin", "1", "--tmax", "1"],
        &["frobnicate"],
        &["trace", "--preset", "cubic"],
        &["density", "--preset", "quartic_even"],
        &["trace", "--coeffs", "0,-1,0,-0.25"],
        &["trace", "--config", "/nonexistent/run.cfg"],
    ] {
        let (code, _, err) = cutflow(args);
        assert_eq!(code, 1, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn seeding_failures_exit_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.csv");
    for guess in ["-0.001,0.001", "0.5,0.6"] {
        let (code, _, err) = cutflow(&[
            "trace",
            "--coeffs",
            "0,-1,0,0.25",
            "--tmax",
            "0.5",
            "--tmin",
            "0.1",
            &format!("--seed-guess={guess}"),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 2, "{guess}: {err}");
        assert!(err.contains("seeding failed"));
    }
}

#[test]
fn user_potential_from_high_temperature_start() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("u.csv");
    let (code, _, err) = cutflow(&[
        "trace",
        "--coeffs",
        "0,-3,0,0,0,0.1",
        "--tmin",
        "1",
        "--tmax",
        "30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = read_table(&dir.path().join("u_events.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "merge");
    assert!(field(&rows[0], &header, "beta").abs() < 1e-8);
}

#[test]
fn selftest_fault_injection_fails() {
    let (code, out, _) = cutflow(&["selftest", "--tol", "1e-6"]);
    assert_eq!(code, 1);
    assert_eq!(out.lines().filter(|l| l.starts_with("AC")).count(), 10);
    assert!(out
        .lines()
        .any(|l| l.starts_with("AC1 ") && l.contains("FAIL")));
}
