use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_metaphase"))
}

#[test]
fn maxwell_prints_saturation_data() {
    let out = bin()
        .args(["maxwell", "--temperature", "0.85"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<&str> = text.lines().map(|l| l.split('=').next().unwrap()).collect();
    assert_eq!(
        keys,
        [
            "rho1_star",
            "rho2_star",
            "p_star",
            "mu_star",
            "rho_minus",
            "rho_plus"
        ]
    );
    assert!(text.contains("rho1_star=0.319729965\n"));
    assert!(text.contains("rho_plus=1.48880471\n"));
}

#[test]
fn supercritical_temperature_fails_with_category() {
    let out = bin()
        .args(["maxwell", "--temperature", "1.2"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(
        err.starts_with("error category=no_spinodal message="),
        "{err}"
    );
}

#[test]
fn relax_writes_a_trajectory() {
    let out = bin()
        .args([
            "relax",
            "--temperature",
            "0.85",
            "--rho",
            "1.0",
            "--rho1",
            "0.4",
            "--rho2",
            "1.7",
            "--epsilon",
            "1e-3",
            "--t-end",
            "0.01",
            "--samples",
            "10",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,rho1,rho2,alpha1,F,p1,p2,mu1,mu2"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.windows(2).all(|w| w[1][4] <= w[0][4] + 1e-12));
    assert_eq!(rows[10][0], 0.01);
}

#[test]
fn run_writes_snapshots_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("case.cfg");
    std::fs::write(
        &cfg,
        "temperature = 0.85\nx_min = -1\nx_max = 1\nn_cells = 100\nepsilon = 1e-3\nt_end = 0.2\n\
         rho_L = @spinodal_minus\nrho1_L = @spinodal_minus\nrho2_L = 1.6\nu_L = 0\n\
         rho_R = 1.83784\nrho1_R = 0.2\nrho2_R = 1.83784\nu_R = 0\n\
         snapshot_times = 0.01\noutput_prefix = out/case\n",
    )
    .unwrap();
    let out = bin()
        .current_dir(dir.path())
        .args(["run", "case.cfg", "--cells", "50", "--t-end", "0.02"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("final_time=0.02\n"));
    let last = dir.path().join("out/case_t0.020000.csv");
    assert_eq!(std::fs::read_to_string(last).unwrap().lines().count(), 51);
    assert!(dir.path().join("out/case_plot").exists());
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "temperature = 0.85\nbogus = 1\n").unwrap();
    let out = bin().arg("run").arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("error category=parse message="), "{err}");
}
