use std::path::Path;
use std::process::{Command, Output};

fn wakeform(args: &[&str], dir: &Path, seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wakeform"));
    cmd.args(args).current_dir(dir).env_remove("WAKEFORM_SEED");
    if let Some(s) = seed {
        cmd.env("WAKEFORM_SEED", s);
    }
    cmd.output().unwrap()
}

#[test]
fn optimize_writes_artifacts_and_reports_convergence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("capped.cfg"), "L = 15\nmax_iters = 1\n").unwrap();
    let out = wakeform(&["optimize", "--config", "capped.cfg"], dir.path(), None);
    assert!(!out.status.success());
    let trace = std::fs::read_to_string(dir.path().join("capped_trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 2);
    assert!(trace.starts_with("iter,cost_mod,cost_rmse,linf"));
    assert!(dir.path().join("capped.seq").exists());

    std::fs::write(
        dir.path().join("full.cfg"),
        "L = 15\nN = 64\nlambda = 0\nu_first = 1e-3\nu_leak = 1e-3\nt_active_us = 1.2\nsolver_debug_csv = solver.csv\n",
    )
    .unwrap();
    let out = wakeform(&["optimize", "--config", "full.cfg", "--out", "best.seq"], dir.path(), None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let seq = std::fs::read_to_string(dir.path().join("best.seq")).unwrap();
    assert!(seq.starts_with("# wakeform-seq v1 L=15"));
    assert!(dir.path().join("best_trace.csv").exists());
    assert!(std::fs::read_to_string(dir.path().join("solver.csv")).unwrap().starts_with("scan_iter,"));

    let metrics = wakeform(&["metrics", "--seq", "best.seq"], dir.path(), None);
    assert!(metrics.status.success());
    let text = String::from_utf8(metrics.stdout).unwrap();
    let ratio: f64 = text
        .lines()
        .find(|l| l.starts_with("onoff_ratio_db,1.2,64,"))
        .and_then(|l| l.rsplit(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(ratio >= 40.0, "{ratio}");
}

#[test]
fn metrics_accepts_table_ids_and_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = wakeform(&["metrics", "--seq", "table:2"], dir.path(), None);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("metric,t_active_us,n,value\n"));

    // zero padding to an even length is not a valid sequence
    let mut text = String::from("# wakeform-seq v1 L=16\n");
    for k in 0..16 {
        text.push_str(&format!("{k} 0 0\n"));
    }
    std::fs::write(dir.path().join("bad.seq"), text).unwrap();
    let out = wakeform(&["metrics", "--seq", "bad.seq"], dir.path(), None);
    assert!(!out.status.success());
    assert!(!wakeform(&["metrics", "--seq", "table:7"], dir.path(), None).status.success());
}

#[test]
fn ber_is_reproducible_and_seed_overridable() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("fade.cfg"),
        "scenario = standalone_fading\nwaveform = seq3\nsnr_db = 0, 4\ntrials = 2000\ntiming = false\n",
    )
    .unwrap();
    let run = |out: &str, seed| {
        let o = wakeform(&["ber", "--config", "fade.cfg", "--out", out], dir.path(), seed);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let a = run("a.csv", None);
    let b = run("b.csv", None);
    let c = run("c.csv", Some("12345"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().next().unwrap(), "snr_db,trials,bit_errors,ber,ci_halfwidth,wall_seconds");
    assert_eq!(a.lines().count(), 3);
    assert!(!wakeform(&["ber", "--config", "fade.cfg", "--out", "d.csv"], dir.path(), Some("x")).status.success());
}

#[test]
fn mux_ber_writes_both_curves() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("mux.cfg"),
        "scenario = mux\nwaveform = seq2\nbaseline = mask\nsnr_db = 10\ntrials = 200\n",
    )
    .unwrap();
    let o = wakeform(&["mux-ber", "--config", "mux.cfg", "--out", "ofdm.csv"], dir.path(), None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("ofdm.csv").exists());
    assert!(dir.path().join("ofdm_wur.csv").exists());

    // standalone command refuses the mux scenario and vice versa
    assert!(!wakeform(&["ber", "--config", "mux.cfg", "--out", "x.csv"], dir.path(), None).status.success());
    std::fs::write(dir.path().join("awgn.cfg"), "waveform = seq1\nsnr_db = 0\ntrials = 10\n").unwrap();
    assert!(!wakeform(&["mux-ber", "--config", "awgn.cfg", "--out", "y.csv"], dir.path(), None).status.success());
}
