mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{negate_cell, write_config, CONFIG};

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shocknozzle"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn background_writes_tables_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("bg");
    let o = run(&["background", "--config", s(&cfg), "--out", s(&out)], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("RH residual"));
    for f in ["supersonic.csv", "supersonic.json", "subsonic.csv", "summary.json", "config.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let o = run(&["verify", s(&out)], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn window_errors_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let flat = CONFIG.replace("coeffs = [0.1]", "coeffs = [0.0]").replace("ls = 0.5", "pe = 3.0");
    let cfg = write_config(dir.path(), &flat);
    let o = run(&["background", "--config", s(&cfg), "--out", s(&dir.path().join("a"))], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("degenerate window: exit pressure independent of shock position"));

    let outside = CONFIG.replace("ls = 0.5", "pe = 100.0");
    let cfg = write_config(dir.path(), &outside);
    let o = run(&["background", "--config", s(&cfg), "--out", s(&dir.path().join("b"))], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("outside window"));
}

#[test]
fn window_command_reports_degenerate_map() {
    let dir = tempfile::tempdir().unwrap();
    let flat = CONFIG.replace("coeffs = [0.1]", "coeffs = [0.0]");
    let cfg = write_config(dir.path(), &flat);
    let o = run(&["window", "--config", s(&cfg), "--out", s(&dir.path().join("w"))], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("degenerate window"));
}

#[test]
fn perturb_then_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("p");
    let o = run(&["perturb", "--config", s(&cfg), "--out", s(&out), "--grid", "17x17"], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("|V|/eps"));
    let o = run(&["verify", s(&out)], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    negate_cell(&out.join("physical.csv"), "rho", 20);
    let o = run(&["verify", s(&out)], &[]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("physical.rho") && err.contains("i = 1, j = 3") && err.contains("x1 = "), "{err}");
}

#[test]
fn zero_epsilon_verifies_to_machine_precision() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("z");
    let o = run(&["perturb", "--config", s(&cfg), "--out", s(&out), "--epsilon", "0", "--quiet"], &[]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).is_empty(), "quiet run printed {}", stderr(&o));
    let o = run(&["verify", s(&out)], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    for c in report["checks"].as_array().unwrap() {
        assert!(c["value"].as_f64().unwrap() <= 1e-10, "{c}");
    }
}

#[test]
fn bad_exit_profile_names_compatibility() {
    let dir = tempfile::tempdir().unwrap();
    let values: Vec<String> = (0..33).map(|j| format!("{}", j as f64 / 32.0)).collect();
    let text = format!("{CONFIG}\n[exit.profile]\nkind = \"samples\"\nvalues = [{}]\n", values.join(", "));
    let text = text.replace("[exit]\nls = 0.5\nepsilon = 1e-3\n", "");
    let text = text.replace("[exit.profile]", "[exit]\nls = 0.5\nepsilon = 1e-3\n\n[exit.profile]");
    let cfg = write_config(dir.path(), &text);
    let o = run(&["perturb", "--config", s(&cfg), "--out", s(&dir.path().join("p"))], &[]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("compatibility"));
}

#[test]
fn divergence_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{CONFIG}\n[iteration]\nmax_iter = 1\n");
    let cfg = write_config(dir.path(), &text);
    let o = run(&["perturb", "--config", s(&cfg), "--out", s(&dir.path().join("p"))], &[]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("diverged"));
}

#[test]
fn io_and_parse_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["background", "--config", s(&dir.path().join("missing.toml"))], &[]);
    assert_eq!(code(&o), 4);
    let cfg = write_config(dir.path(), &CONFIG.replace("gamma = 1.4", "gamma = \"x\""));
    let o = run(&["background", "--config", s(&cfg)], &[]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("config.toml:3:"), "{}", stderr(&o));
    let o = run(&["verify", s(&dir.path().join("nothing"))], &[]);
    assert_eq!(code(&o), 4);
}

#[test]
fn corrupted_result_reports_byte_offset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("bg");
    assert_eq!(code(&run(&["background", "--config", s(&cfg), "--out", s(&out), "--quiet"], &[])), 0);
    let path = out.join("subsonic.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let at = text.len() - 10;
    let mut bytes = text.into_bytes();
    bytes[at] = b'?';
    std::fs::write(&path, bytes).unwrap();
    let o = run(&["verify", s(&out)], &[]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("byte offset"), "{}", stderr(&o));
}

#[test]
fn sweep_with_thread_cap_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{CONFIG}\n[sweep]\nls = [0.2, 0.5, 1.5, 0.8]\nepsilon = [1e-3, 5e-4, 2.5e-4]\n");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("s");
    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out)], &[("SHOCKNOZZLE_THREADS", "2")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = shocknozzle::io::Table::read(&out, "sweep_ls").unwrap();
    assert_eq!(t.column("status").unwrap(), vec![0.0, 0.0, 2.0, 0.0]);
    let pe = t.column("pe").unwrap();
    assert!(pe[0] > pe[1] && pe[1] > pe[3] && pe[2].is_nan());
    let e = shocknozzle::io::Table::read(&out, "sweep_epsilon").unwrap();
    let r = e.column("norm_v_over_eps").unwrap();
    assert!(r.iter().all(|v| (v / r[0] - 1.0).abs() < 0.01), "{r:?}");
    let o = run(&["verify", s(&out)], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out)], &[("SHOCKNOZZLE_THREADS", "zero")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn empty_sweep_is_success() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{CONFIG}\n[sweep]\nls = []\n");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("s");
    let o = run(&["sweep", "--config", s(&cfg), "--out", s(&out)], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(shocknozzle::io::Table::read(&out, "sweep_ls").unwrap().rows.is_empty());
}

#[test]
fn coeffs_dump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("c");
    let o = run(&["coeffs", "--config", s(&cfg), "--out", s(&out), "--grid", "9x9"], &[]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = shocknozzle::io::Table::read(&out, "coeffs").unwrap();
    assert_eq!(t.rows.len(), 9);
    assert!(t.meta.contains_key("b0"));
}
