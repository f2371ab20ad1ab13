use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mcoupler(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcoupler"))
        .args(args)
        .current_dir(dir)
        .env_remove("MCOUPLER_OUT")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn toy(dir: &Path) -> PathBuf {
    let o = mcoupler(dir, &["gen-synthetic", "--name", "toy", "--out", "sc"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    dir.join("sc/toy.json")
}

fn files(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

#[test]
fn run_validate_report() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    toy(d);
    let o = mcoupler(d, &["run", "--scenario", "sc/toy.json", "--max-iters", "30", "--out", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.join("out/iter_1/signal.json").exists());
    assert!(d.join("out/iter_1/convergence.json").exists());

    let o = mcoupler(d, &["validate", "--run-dir", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.join("out/zpr_report.json").exists());
    assert!(d.join("out/convergence.json").exists());

    let o = mcoupler(d, &["report", "--run-dir", "out"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["rldc_2030.csv", "rldc_2030.svg", "pdc_2030.csv", "mix.csv", "lcoe.csv"] {
        assert!(d.join("out/report").join(f).exists(), "{f}");
    }
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    toy(d);
    for out in ["a", "b"] {
        let o = mcoupler(d, &["--jobs", "2", "run", "--scenario", "sc/toy.json", "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert_eq!(mcoupler(d, &["validate", "--run-dir", out]).status.code(), Some(0));
        assert_eq!(mcoupler(d, &["report", "--run-dir", out]).status.code(), Some(0));
    }
    let (a, b) = (d.join("a"), d.join("b"));
    let fa = files(&a);
    assert_eq!(fa, files(&b));
    for f in &fa {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{}", f.display());
    }
}

#[test]
fn synthetic_generation_is_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for (out, seed) in [("x", "7"), ("y", "7"), ("z", "8")] {
        let o = mcoupler(d, &["gen-synthetic", "--seed", seed, "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let read = |p: &str| fs::read(d.join(p)).unwrap();
    assert_eq!(read("x/profiles.csv"), read("y/profiles.csv"));
    assert_ne!(read("x/profiles.csv"), read("z/profiles.csv"));
    assert!(d.join("x/baseline.json").exists());
}

#[test]
fn non_convergence_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    toy(d);
    let o = mcoupler(d, &["run", "--scenario", "sc/toy.json", "--max-iters", "1", "--out", "out"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(d.join("out/final_state.json").exists());
}

#[test]
fn hourly_solve_needs_a_signal() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    toy(d);
    let o = mcoupler(d, &["solve-hourly", "--scenario", "sc/toy.json", "--year", "2030"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("requires signal or --uncoupled"), "{}", stderr(&o));

    let o = mcoupler(d, &["solve-hourly", "--scenario", "sc/toy.json", "--year", "2030", "--uncoupled", "--out", "h"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.join("h/hourly_2030.csv").exists());
}

#[test]
fn annual_solve_from_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    toy(d);
    let o = mcoupler(d, &["solve-annual", "--scenario", "sc/toy.json", "--out", "a"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.join("a/annual.csv").exists());
    assert_eq!(mcoupler(d, &["run", "--scenario", "sc/toy.json", "--max-iters", "2", "--out", "r"]).status.code(), Some(2));
    let o = mcoupler(d, &["solve-annual", "--scenario", "sc/toy.json", "--run-dir", "r", "--out", "b"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = mcoupler(d, &["solve-hourly", "--scenario", "sc/toy.json", "--year", "2020", "--signal", "r/iter_2/signal.json", "--out", "h"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mcoupler(tmp.path(), &["run", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    assert_eq!(mcoupler(tmp.path(), &["frobnicate"]).status.code(), Some(64));
    assert_eq!(mcoupler(tmp.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let o = Command::new(env!("CARGO_BIN_EXE_mcoupler"))
        .args(["gen-synthetic", "--name", "toy"])
        .current_dir(d)
        .env("MCOUPLER_OUT", "elsewhere")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(d.join("elsewhere/toy.json").exists());
}

#[test]
fn bad_scenario_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("bad.json"), "{\"name\": 3}").unwrap();
    let o = mcoupler(d, &["run", "--scenario", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("name"), "{}", stderr(&o));
}
