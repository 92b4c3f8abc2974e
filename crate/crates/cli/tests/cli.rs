use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gbcd_core::mimo::dump::read_matrix;
use tempfile::TempDir;

const SWEEP: &str = r#"
seed = 5
b = 8
u = 4
order = 4
snr_db = [0.0, 8.0]
code_rate = "1/2"
n_d = 24
coherence_group = 8
detectors = ["gbcd-box", "lmmse"]
trials = 8
round = 4
"#;

fn gbcd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbcd")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_writes_header_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "sweep.toml", SWEEP);
    let out = dir.path().join("a.csv");
    let run = gbcd(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let first = fs::read_to_string(&out).unwrap();
    let mut lines = first.lines();
    assert_eq!(lines.next(), Some("snr_db,detector,bler,ser,trials,block_errors"));
    assert_eq!(lines.count(), 4);

    let stdout = gbcd(&["--threads", "3", "simulate", "--config", s(&cfg)]);
    assert!(stdout.status.success());
    assert_eq!(String::from_utf8(stdout.stdout).unwrap(), first);

    let reseeded = gbcd(&["simulate", "--config", s(&cfg), "--seed", "6"]);
    assert_ne!(String::from_utf8(reseeded.stdout).unwrap(), first);
}

#[test]
fn ablate_header() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "sweep.toml", SWEEP);
    let run = gbcd(&["ablate", "--config", s(&cfg)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let text = String::from_utf8(run.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "snr_db,trials,cd-box_bler,cd-box_ser,cd-box+sort_bler,cd-box+sort_ser,gbcd-box_bler,gbcd-box_ser,\
         gbcd-box+sort_bler,gbcd-box+sort_ser,gbcd-pme-empirical_bler,gbcd-pme-empirical_ser,\
         gbcd-pme-trained_bler,gbcd-pme-trained_ser"
    );
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn hwmodel_header_and_rows() {
    let run = gbcd(&["hwmodel", "--t", "1,10,100"]);
    assert!(run.status.success());
    let text = String::from_utf8(run.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("algorithm,B,U,K,T,pre_mults,eq_mults,total,theta_bps,eta,p_watts_fit")
    );
    assert!(lines.clone().any(|l| l.starts_with("gbcd,128,16,3,10,66128,116480,182608,")));
    assert!(lines.all(|l| l.split(',').count() == 11));
}

#[test]
fn diagnostics_files() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "sweep.toml", SWEEP);
    let trace = dir.path().join("trace.csv");
    let chan = dir.path().join("h.txt");
    let run = gbcd(&[
        "simulate", "--config", s(&cfg), "--trace", s(&trace), "--dump-channel", s(&chan), "--out",
        s(&dir.path().join("o.csv")),
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(fs::read_to_string(&trace).unwrap().lines().count() > 1);
    let h = read_matrix(&mut fs::File::open(&chan).unwrap()).unwrap();
    assert_eq!((h.nrows(), h.ncols()), (8, 4));
}

#[test]
fn bad_config_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.toml", &SWEEP.replace("order = 4", "order = 5"));
    assert_eq!(gbcd(&["simulate", "--config", s(&bad)]).status.code(), Some(2));
    let unknown = write(dir.path(), "unknown.toml", &format!("{SWEEP}\nbogus = 1\n"));
    assert_eq!(gbcd(&["simulate", "--config", s(&unknown)]).status.code(), Some(2));
    assert_eq!(gbcd(&["simulate", "--config", s(&dir.path().join("absent.toml"))]).status.code(), Some(2));
    assert_eq!(gbcd(&["simulate"]).status.code(), Some(2));
}

#[test]
fn missing_params_without_fallback_exits_3() {
    let dir = TempDir::new().unwrap();
    let text = SWEEP.replace(r#"detectors = ["gbcd-box", "lmmse"]"#, r#"detectors = ["gbcd-pme"]"#)
        + "allow_box_fallback = false\npme = { store = \"none.toml\" }\n";
    let cfg = write(dir.path(), "pme.toml", &text);
    let run = gbcd(&["simulate", "--config", s(&cfg)]);
    assert_eq!(run.status.code(), Some(3), "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn trained_store_feeds_simulation() {
    let dir = TempDir::new().unwrap();
    let store = dir.path().join("params.toml");
    let train_cfg = write(
        dir.path(),
        "train.toml",
        "seed = 2\nb = 8\nu = 4\norder = 4\nsnr_db = [8.0]\ntrain_samples = 100\nval_samples = 50\nmax_epochs = 3\n",
    );
    let run = gbcd(&["train", "--config", s(&train_cfg), "--out", s(&store)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stored = fs::read_to_string(&store).unwrap();
    assert!(stored.contains("[[scenario]]"));

    let text = SWEEP.replace(r#"detectors = ["gbcd-box", "lmmse"]"#, r#"detectors = ["gbcd-pme"]"#)
        + &format!("allow_box_fallback = false\npme = {{ store = {:?} }}\n", s(&store));
    let cfg = write(dir.path(), "pme.toml", &text);
    let run = gbcd(&["simulate", "--config", s(&cfg)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8(run.stdout).unwrap().contains(",gbcd-pme,"));
}
