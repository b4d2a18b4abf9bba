use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use evh_core::optimizer::thresholds_from_cycles;
use tempfile::TempDir;

fn evh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> String {
    let out = evh(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn pump_csv_matches_independent_recurrence() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["pump", "--out", out]);
    let text = fs::read_to_string(dir.path().join("pump.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "n,v_store_corrected,v_store_as_printed,w_cum,w_cycle"
    );

    // charge balance at C_min with the store, fresh v0 on C_max each cycle
    let (c_store, c_max, v0) = (3.3e-9, 200e-12, 5.0);
    let c_min = c_max / 3.5;
    let series = 1e-6 * c_store / (1e-6 + c_store);
    let mut v = v0;
    let body = rows(&dir.path().join("pump.csv"));
    assert_eq!(body.len(), 201);
    for (n, r) in body.iter().enumerate() {
        assert_eq!(r[0], n.to_string());
        let w_cum = 0.5 * series * (v - v0) * (v - v0);
        assert!((num(&r[1]) - v).abs() <= 1e-8 * v, "n = {n}");
        assert!(
            (num(&r[3]) - w_cum).abs() <= 1e-7 * w_cum.max(1e-30),
            "n = {n}"
        );
        v = (c_max * v0 + c_store * v) / (c_min + c_store);
    }
    // the two closed forms only agree at n = 0
    assert_eq!(body[0][1], body[0][2]);
    assert_ne!(body[1][1], body[1][2]);

    let golden = include_str!("golden/pump_head.csv");
    let head: Vec<&str> = text.lines().take(golden.lines().count()).collect();
    assert_eq!(head.join("\n"), golden.trim_end());
}

#[test]
fn pump_accepts_zero_c_min() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&[
        "pump", "--set", "c_min=0", "--set", "n_max=10", "--out", out,
    ]);
    let body = rows(&dir.path().join("pump.csv"));
    let v10 = num(&body[10][1]);
    let linear = 5.0 * (1.0 + 10.0 * 200e-12 / 3.3e-9);
    assert!((v10 - linear).abs() < 1e-8 * linear);
    assert_eq!(body[10][2], "nan");
}

#[test]
fn validation_errors_name_the_field_and_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = evh(&["pump", "--set", "c_store=-1", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("c_store"));

    let o = evh(&["simulate", "--set", "nonsense=1", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonsense"));

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "# comment\nv0 = 5\nt_end 0.1\n").unwrap();
    let o = evh(&["pump", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let o = evh(&["qv", "--cycles", "0", "--out", out]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    // a step cap far below the minimum step forces an underflow
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = evh(&[
        "simulate",
        "--set",
        "max_step=1e-19",
        "--set",
        "t_end=1e-3",
        "--out",
        out,
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("t ="));
}

#[test]
fn file_then_overrides_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "v0 = 4.0\nn_max = 20\n").unwrap();
    let out = dir.path().join("o");
    run_ok(&[
        "pump",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "v0=3.0",
        "--out",
        out.to_str().unwrap(),
    ]);
    let eff = fs::read_to_string(out.join("effective_config.txt")).unwrap();
    assert!(eff.contains("v0 = 3e0"), "{eff}");
    assert!(eff.contains("n_max = 20"));
    assert_eq!(rows(&out.join("pump.csv")).len(), 21);
}

#[test]
fn optimize_surface_and_report() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let report = run_ok(&["optimize", "--set", "n_max=60", "--out", out]);
    let body = rows(&dir.path().join("optimize.csv"));
    assert_eq!(body.len(), 60 * 61 / 2);
    let get = |k: &str| {
        report
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{k} = ")))
            .unwrap()
            .to_string()
    };
    let (n1, n2): (usize, usize) = (get("n1").parse().unwrap(), get("n2").parse().unwrap());
    assert_eq!(n2 - n1, 1);
    let (v1, v2) = thresholds_from_cycles(&Default::default(), n1, n2).unwrap();
    assert!((num(&get("v1")) - v1).abs() < 1e-8 * v1);
    assert!((num(&get("v2")) - v2).abs() < 1e-8 * v2);
    let best = body.iter().map(|r| num(&r[2])).fold(f64::MIN, f64::max);
    assert_eq!(best, num(&get("power")));
    assert!(dir.path().join("optimum.txt").exists());
}

#[test]
fn qv_polygons_and_overlay() {
    let dir = TempDir::new().unwrap();
    let sim = dir.path().join("sim");
    run_ok(&[
        "simulate",
        "--set",
        "t_end=0.01",
        "--out",
        sim.to_str().unwrap(),
    ]);
    let out = dir.path().join("qv");
    run_ok(&[
        "qv",
        "--cycles",
        "1,2,300",
        "--trace",
        sim.join("simulate.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let body = rows(&out.join("qv.csv"));
    let corners = |c: &str| -> Vec<String> {
        body.iter()
            .filter(|r| r[0] == c && r[1] != "close")
            .map(|r| r[1].clone())
            .collect()
    };
    assert_eq!(corners("1").len(), 3);
    assert_eq!(
        corners("2"),
        ["start", "store_reached", "transfer_end", "recharge_start"]
    );
    let v1: f64 = body
        .iter()
        .find(|r| r[0] == "1" && r[1] == "transfer_end")
        .map(|r| num(&r[2]))
        .unwrap();
    let bis: f64 = body
        .iter()
        .find(|r| r[0] == "2" && r[1] == "store_reached")
        .map(|r| num(&r[2]))
        .unwrap();
    assert_eq!(v1, bis);
    let lines = fs::read_to_string(out.join("qv_bounds.csv")).unwrap();
    for l in ["c_min", "c_max", "q_top"] {
        assert!(lines.contains(l));
    }
    assert!(out.join("qv_trace.csv").exists());
    assert!(fs::read_to_string(out.join("qv.plot"))
        .unwrap()
        .contains("qv_trace.csv"));
}

#[test]
fn simulate_outputs_and_zero_duration() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&["simulate", "--set", "t_end=0", "--out", out]);
    assert_eq!(rows(&dir.path().join("simulate.csv")).len(), 1);
    for f in [
        "simulate.plot",
        "audit.txt",
        "coupling.txt",
        "effective_config.txt",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let audit = fs::read_to_string(dir.path().join("audit.txt")).unwrap();
    assert!(audit.contains("residual = ") && audit.contains("valid = true"));
}

#[test]
fn prescribed_mode_via_cli() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    run_ok(&[
        "simulate",
        "--set",
        "mode=prescribed",
        "--set",
        "v2=inf",
        "--set",
        "t_end=0.05",
        "--out",
        out,
    ]);
    let coupling = fs::read_to_string(dir.path().join("coupling.txt")).unwrap();
    assert!(coupling.starts_with("flybacks = 0"));
}
