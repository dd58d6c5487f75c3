use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcat")).args(args).output().expect("spawn qcat")
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = qcat(&["run", "--t-end", "2", "--beta", "2", "--tau", "0.004", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ts = read(&out.join("timeseries.csv"));
    let mut lines = ts.lines();
    assert_eq!(lines.next().unwrap(), "t_plot,P_g,P_e,I,re_C,im_C,P_g1,P_e1,P_g2,P_e2,S_P");
    assert_eq!(lines.count(), 11);
    assert!(read(&out.join("peaks.csv")).starts_with("t_plot,s_p,kind,envelope_amplitude\n0,0.693147,initial,"));
    let meta: serde_json::Value = serde_json::from_str(&read(&out.join("run_meta.json"))).unwrap();
    assert_eq!(meta["config"]["params"]["tau"], 0.004);
    assert_eq!(meta["config"]["t_end_plot"], 2.0);
    assert!(meta["diagnostics"]["cat"]["max_norm_drift"].as_f64().unwrap() < 1e-8);
}

#[test]
fn run_meta_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let o = qcat(&["run", "--t-end", "1.5", "--beta", "1+0.5i", "--out-dir", first.to_str().unwrap()]);
    assert!(o.status.success());
    let meta: serde_json::Value = serde_json::from_str(&read(&first.join("run_meta.json"))).unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, meta["config"].to_string()).unwrap();
    let second = dir.path().join("b");
    let o = qcat(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&first.join("timeseries.csv")), read(&second.join("timeseries.csv")));
    assert_eq!(read(&first.join("run_meta.json")), read(&second.join("run_meta.json")));
}

#[test]
fn errors_are_json_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcat(&["run", "--dt", "0.01", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "invalid_parameter");
    assert!(err["message"].as_str().unwrap().contains("dt"));

    let o = qcat(&["run", "--beta", "four"]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "parse");

    let o = qcat(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn peaks_reprocesses_a_timeseries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let ts = (0..=400)
        .map(|k| {
            let t = k as f64 * 0.2;
            let s = 0.4 * (-((t - 40.0) / 3.0f64).powi(2)).exp();
            format!("{t},0.5,0.5,{},0,0,1,0,0,1,{s}", 0.2 * (3.0 * t).sin())
        })
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(out.join("timeseries.csv"), format!("t_plot,P_g,P_e,I,re_C,im_C,P_g1,P_e1,P_g2,P_e2,S_P\n{ts}\n"))
        .unwrap();
    let o = qcat(&["peaks", "--out-dir", out.to_str().unwrap(), "--threshold", "0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let peaks = read(&out.join("peaks.csv"));
    let rows: Vec<&str> = peaks.lines().collect();
    assert_eq!(rows.len(), 3, "{peaks}");
    assert!(rows[2].starts_with("40,0.4,revival,"));
}

#[test]
fn qfunc_writes_grids() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcat(&["qfunc", "--times", "0,0.4", "--beta", "2", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = read(&dir.path().join("qfunc_t0.csv"));
    assert_eq!(grid.lines().next().unwrap(), "alpha_re,alpha_im,q");
    assert_eq!(grid.lines().count(), 1 + 121 * 121);
    assert!(dir.path().join("qfunc_t0.4.csv").exists());
    assert!(!dir.path().join("timeseries.csv").exists());
}

#[test]
fn sweep_isolates_failing_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, r#"{"t_end_plot": 1.0, "tail_error_threshold": 1e-3}"#).unwrap();
    let out = dir.path().join("sweep");
    let o = qcat(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--taus",
        "0,0.004",
        "--betas",
        "1,5.5",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read(&out.join("summary.csv"));
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().filter(|r| r.contains(",ok,")).count(), 2);
    assert!(rows.iter().filter(|r| r.contains(",error,")).all(|r| r.contains("truncation leak")));
    assert!(out.join("tau_0_beta_1/timeseries.csv").exists());
    assert!(out.join("tau_0.004_beta_1/run_meta.json").exists());
}
