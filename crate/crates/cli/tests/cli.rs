use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schwarzlab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn transform_atom_and_density() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("atom.txt"), "[atoms]\n0 1\n").unwrap();
    fs::write(dir.path().join("dens.txt"), "[density]\n1 + cos(theta)\n").unwrap();
    let o = run(dir.path(), &["transform", "--measure", "atom.txt", "--n", "1024", "-o", "a"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for r in rows(&dir.path().join("a/boundary.csv")) {
        let theta: f64 = r[0].parse().unwrap();
        if theta > 0.1 && theta < 6.18 {
            assert!(r[1].parse::<f64>().unwrap().abs() < 1e-3, "{r:?}");
        }
    }
    assert_eq!(rows(&dir.path().join("a/disc.csv")).len(), 4 * 64);
    let o = run(dir.path(), &["transform", "--measure", "dens.txt", "--n", "1024", "-o", "d"]);
    assert_eq!(code(&o), 0);
    for r in rows(&dir.path().join("d/boundary.csv")) {
        let theta: f64 = r[0].parse().unwrap();
        assert!((r[1].parse::<f64>().unwrap() - 1.0 - theta.cos()).abs() < 1e-3);
    }
}

#[test]
fn malformed_measure_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.txt"), "[atoms]\n0 1\n0.5 heavy\n").unwrap();
    let o = run(dir.path(), &["transform", "--measure", "bad.txt"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(code(&run(dir.path(), &["transform", "--measure", "missing.txt"])), 2);
    assert_eq!(code(&run(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn verify_catalog() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["verify", "--catalog", "atom"])), 0);
    assert_eq!(json(&dir.path().join("report-atom.json"))["overall"], "pass");
    assert_eq!(code(&run(dir.path(), &["verify", "--catalog", "exp-inner-inverse"])), 1);
    let r = json(&dir.path().join("report-exp-inner-inverse.json"));
    assert_eq!(r["verdicts"]["smirnov"], "fail");
    assert_eq!(r["verdicts"]["real_part"], "pass");
    assert_eq!(code(&run(dir.path(), &["verify", "--catalog", "const-i"])), 1);
    let r = json(&dir.path().join("report-const-i.json"));
    assert_eq!(r["verdicts"]["real_part"], "fail");
    assert_eq!(r["verdicts"]["smirnov"], "pass");
    assert!(fs::read_to_string(dir.path().join("summary.csv"))
        .unwrap()
        .starts_with("function,condition,verdict,value\n"));
    assert_eq!(code(&run(dir.path(), &["verify", "--catalog", "nope"])), 2);
}

#[test]
fn wos_outputs_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("slit.txt"), "slit 1 2\n").unwrap();
    let args = ["wos", "--domain", "slit.txt", "--t", "0.5,1.5", "--segment", "1.2,1.7", "--walks", "20000"];
    assert_eq!(code(&run(dir.path(), &args)), 2);
    let mut seeded = args.to_vec();
    seeded.extend(["--seed", "11", "-o", "a"]);
    assert_eq!(code(&run(dir.path(), &seeded)), 0);
    let meta = json(&dir.path().join("a/omega.json"));
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["points"][0]["estimate"], 1.0);
    for key in ["estimate", "stderr", "n", "timeouts", "config"] {
        assert!(!meta[key].is_null(), "{key}");
    }
    let seg = &meta["segment"];
    let (e, s, o) =
        (seg["estimate"].as_f64().unwrap(), seg["stderr"].as_f64().unwrap(), seg["oracle"].as_f64().unwrap());
    assert!((e - o).abs() <= 3.0 * s, "{e} {o} {s}");
    *seeded.last_mut().unwrap() = "b";
    assert_eq!(code(&run(dir.path(), &seeded)), 0);
    for f in ["omega.csv", "omega.json"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap());
    }
}

#[test]
fn construct_paths() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["construct", "--generations", "2", "--walks", "2000", "--seed", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cert = json(&dir.path().join("radii.json"));
    assert_eq!(cert["radii"].as_array().unwrap().len(), 2);
    assert_eq!(rows(&dir.path().join("probe.csv")).len(), 2);
    let o = run(dir.path(), &["construct", "--generations", "3", "--walks", "100", "--seed", "4"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("history"));
    assert_eq!(code(&run(dir.path(), &["construct", "--generations", "2"])), 2);
}

#[test]
fn identities_sweep() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["identities"])), 0);
    let table = rows(&dir.path().join("identities.csv"));
    assert_eq!(table.len(), 400 + 12 + 1);
    let stress = table.last().unwrap();
    assert_eq!((stress[3].as_str(), stress[7].as_str(), stress[8].as_str()), ("0.999", "1e-2", "true"));
    assert!(!stress[9].is_empty());
    assert_eq!(code(&run(dir.path(), &["identities", "--r-grid", "1,10,0"])), 2);
    assert_eq!(code(&run(dir.path(), &["identities", "--pairs", ""])), 2);
}

#[test]
fn config_precedence_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "[sampling]\nn = 2048\n[grid]\nper_decade = 4\n[output]\ndir = out\nformat = json\n",
    )
    .unwrap();
    assert_eq!(code(&run(dir.path(), &["distribution", "--catalog", "atom", "--config", "run.cfg"])), 0);
    let s = json(&dir.path().join("out/distribution-summary.json"));
    assert_eq!(s["n"], 2048);
    let table = json(&dir.path().join("out/distribution.json"));
    assert_eq!(table.as_array().unwrap().len(), 10 * 4 + 1);
    assert_eq!(
        code(&run(
            dir.path(),
            &["distribution", "--catalog", "atom", "--config", "run.cfg", "--n", "1024", "--format", "csv"]
        )),
        0
    );
    assert_eq!(json(&dir.path().join("out/distribution-summary.json"))["n"], 1024);
    assert!(dir.path().join("out/distribution.csv").exists());
    fs::write(dir.path().join("bad.cfg"), "[sampling]\nn = many\n").unwrap();
    assert_eq!(code(&run(dir.path(), &["distribution", "--catalog", "atom", "--config", "bad.cfg"])), 2);
}

#[test]
fn logdet_and_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["logdet", "--catalog", "atom", "--n", "4096"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let chain = json(&dir.path().join("chain.json"));
    assert!(chain["u_min"].as_f64().unwrap() >= -1e-6);
    assert_eq!(code(&run(dir.path(), &["counterexample", "--depth", "8"])), 0);
    let c = json(&dir.path().join("counterexample.json"));
    assert_eq!(c["gaps"].as_array().unwrap().len(), 7);
    assert_eq!(rows(&dir.path().join("counterexample.csv")).len(), 8);
}
