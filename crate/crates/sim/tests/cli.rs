use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ia-arrival"))
}

#[test]
fn sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let status = bin()
        .args([
            "sweep",
            "--preset",
            "fig2",
            "--trials",
            "2",
            "--snr",
            "0,30",
            "--strategy",
            "optimal_single,selfish",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "strategy,snr_db,trial,r_au,r_su,r_total,ia_iters,refine_iters"
    );
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
    let summary = std::fs::read_to_string(dir.path().join("run.summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(v["seed"], 2);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "seed = 9\ntrials = 50\nsnr_db = [10]\nstrategies = [\"no_secondary\"]\n",
    )
    .unwrap();
    let out = bin()
        .args(["sweep", "--trials", "3", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("\"seed\": 9"));
}

#[test]
fn refusals_exit_nonzero_with_a_json_line() {
    let out = bin()
        .args([
            "sweep",
            "--strategy",
            "optimal_single",
            "--preset",
            "fig5",
            "--trials",
            "1",
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(v["error"], "refused");
    assert!(v["message"].as_str().unwrap().contains("M_s >= 4"));

    let out = bin()
        .args(["sweep", "--strategy", "bogus"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value =
        serde_json::from_str(String::from_utf8(out.stderr).unwrap().trim()).unwrap();
    assert_eq!(v["error"], "config");
}

#[test]
fn feasibility_prints_counts() {
    let out = bin()
        .args(["feasibility", "--user", "4*2x2:1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("N_v = 8, N_e = 12: improper"));
    // defaults to the configured network
    let out = bin()
        .args(["feasibility", "--preset", "fig4"])
        .output()
        .unwrap();
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("N_v = 30, N_e = 30: proper"));
}

#[test]
fn dof_and_converge_emit_json() {
    let out = bin()
        .args([
            "dof",
            "--trials",
            "20",
            "--strategy",
            "no_secondary,optimal_single",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["strategy"], "no_secondary");
    assert!((v[0]["dof"].as_f64().unwrap() - 3.0).abs() < 0.5);

    let out = bin()
        .args([
            "converge",
            "--preset",
            "fig6",
            "--trials",
            "5",
            "--strategy",
            "alt_min,mgm_am_init",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // alt_min once, the Grassmann search at both preset SNRs
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert_eq!(v[0]["algorithm"], "alt_min");
}

#[test]
fn check_passes() {
    let out = bin().args(["check", "--trials", "5"]).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 7);
    assert!(text.lines().all(|l| l.contains("\"passed\":true")));
}
