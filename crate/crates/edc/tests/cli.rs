use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn edc(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_edc"));
    c.args(args).env_remove(edc::BUDGET_ENV);
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("cfg.json");
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_decode_dist_dim() {
    let dir = tempfile::tempdir().unwrap();
    let desc = dir.path().join("mt.edc");
    let mt = configs().join("middle-third.json");
    let o = edc(&["encode", "--codec", "poly", "--input", s(&mt), "--eps-exp", "10", "--out", s(&desc)], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("ell=10"));
    assert_eq!(&std::fs::read(&desc).unwrap()[..4], b"EDC1");

    let pts = dir.path().join("pts.csv");
    let o = edc(&["decode", s(&desc), "--out", s(&pts)], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&pts).unwrap();
    assert!(text.starts_with("x\n0\n"));

    let o = edc(&["dist", s(&pts), s(&pts)], &[]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("0 "));

    let o = edc(&["dim", "--in", s(&pts)], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let slope: f64 = stdout(&o).lines().find_map(|l| l.strip_prefix("slope,")).unwrap().parse().unwrap();
    assert!((slope - 2f64.ln() / 3f64.ln()).abs() < 0.05, "{slope}");
}

#[test]
fn corrupted_description_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let desc = dir.path().join("mt.edc");
    let mt = configs().join("middle-third.json");
    assert!(edc(&["encode", "--codec", "poly", "--input", s(&mt), "--eps-exp", "8", "--out", s(&desc)], &[]).status.success());
    let mut bytes = std::fs::read(&desc).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x10;
    std::fs::write(&desc, bytes).unwrap();
    let o = edc(&["decode", s(&desc)], &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("edc: "));
}

#[test]
fn sweep_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(r#"{{"codec":"poly","input":{:?},"ell_min":8,"ell_max":13,"csv":"out.csv","svg":"out.svg"}}"#, s(&configs().join("middle-third.json"))),
    );
    let o = edc(&["sweep", "--config", s(&cfg)], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(csv.starts_with("ell,bits,dh_num,dh_den,codec,seed\n"));
    assert_eq!(csv.lines().count(), 7);
    assert!(std::fs::read_to_string(dir.path().join("out.svg")).unwrap().contains("data-model=\"linear\""));

    let plot = dir.path().join("fit.svg");
    let o = edc(&["fit", "--in", s(&dir.path().join("out.csv")), "--model", "linear", "--model", "power", "--svg", s(&plot)], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fits: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(fits.as_array().unwrap().len(), 2);
    assert!(fits[0]["r2"].as_f64().unwrap() > 0.99);
    assert_eq!(std::fs::read_to_string(&plot).unwrap().matches("<polyline").count(), 2);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mt = s(&configs().join("middle-third.json")).to_string();
    let empty = write_config(dir.path(), &format!(r#"{{"codec":"poly","input":{mt:?},"ell_min":12,"ell_max":8}}"#));
    let o = edc(&["sweep", "--config", s(&empty)], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("empty ℓ range"));

    let mismatch = write_config(dir.path(), &format!(r#"{{"codec":"analytic","input":{mt:?},"ell_min":8,"ell_max":9}}"#));
    assert_eq!(edc(&["sweep", "--config", s(&mismatch)], &[]).status.code(), Some(2));

    let unknown = write_config(dir.path(), &format!(r#"{{"codec":"poly","input":{mt:?},"ell_min":8,"ell_max":9,"bogus":1}}"#));
    assert_eq!(edc(&["sweep", "--config", s(&unknown)], &[]).status.code(), Some(2));

    let o = edc(&["dist", s(&dir.path().join("missing.csv")), s(&dir.path().join("missing.csv"))], &[]);
    assert_eq!(o.status.code(), Some(1));

    let o = edc(&["sweep", "--config", s(&empty)], &[("EDC_BUDGET_POINTS", "lots")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("EDC_BUDGET_POINTS"));
}

#[test]
fn budget_error_names_ell() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(r#"{{"codec":"ck","input":{:?},"ell_min":8,"ell_max":10}}"#, s(&configs().join("ck.json"))),
    );
    let o = edc(&["sweep", "--config", s(&cfg)], &[("EDC_BUDGET_POINTS", "1000")]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("ℓ = 10"), "{}", stderr(&o));
}

#[test]
fn level_dumps() {
    let o = edc(&["rand", "--seed", "3", "--dist", "uniform:3/10,1/2", "--depth", "3"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("level,index,left,right\n0,0,0,1\n"));
    assert_eq!(out.lines().count(), 1 + 1 + 2 + 4 + 8);

    let o = edc(&["ck", "--rho", "1/4", "--theta", "1/2", "--zeta", "1/20", "--seed", "1", "--depth", "4"], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1 + 31);

    let o = edc(&["ck", "--rho", "1/4", "--theta", "3/2", "--zeta", "1/20", "--seed", "1", "--depth", "4"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn small_packing_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pack.csv");
    let input = configs().join("pack-central.json");
    let o = edc(&["pack", "--input", s(&input), "--ell-min", "4", "--ell-max", "7", "--trials", "16", "--out", s(&out)], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("ell,log2_packing"));
    assert_eq!(csv.lines().count(), 5);
    for row in csv.lines().skip(1) {
        assert!(row.ends_with(",0"), "unconfirmed certificates: {row}");
    }
    let mt = configs().join("middle-third.json");
    assert_eq!(edc(&["pack", "--input", s(&mt)], &[]).status.code(), Some(2));
}
