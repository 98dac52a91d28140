use std::path::Path;
use std::process::Command;

use gamescope::checkpoint;
use gamescope::formats::{KvFile, Table};
use gamescope_core::autograd::ParamVector;

fn gamescope(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gamescope")).args(args).output().expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn kv(path: &Path) -> KvFile {
    KvFile::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_GAN: &[&str] = &["--set", "samples=64", "--set", "hidden_dim=6", "--set", "latent_dim=2", "--set", "iters=60", "--set", "cadence=10"];

#[test]
fn demo_example_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, lssp, dne) in [("example1", "yes", "no"), ("example2", "no", "yes")] {
        let out = dir.path().join(kind);
        assert_eq!(gamescope(&["demo", kind, "--out", p(&out)]).0, 0);
        let r = kv(&out.join("report.kv"));
        assert_eq!((r.get("lssp"), r.get("dne")), (Some(lssp), Some(dne)), "{kind}");
        for f in ["config.resolved", "report.txt", "spectrum.csv", "spectrum.svg", "path_angle.csv", "path_angle.svg", "quiver.csv", "quiver.svg"] {
            assert!(out.join(f).exists(), "{kind}: {f}");
        }
    }
    let out = dir.path().join("ex2neg");
    assert_eq!(gamescope(&["demo", "example2", "--set", "point=0,-1", "--out", p(&out)]).0, 0);
    let r = kv(&out.join("report.kv"));
    assert_eq!((r.get("lssp"), r.get("dne")), (Some("yes"), Some("no")));
}

#[test]
fn demo_rotation_has_bump_and_attraction_switches_sign() {
    let dir = tempfile::tempdir().unwrap();
    let cos = |kind: &str| -> Vec<f64> {
        let out = dir.path().join(kind.replace(':', "_"));
        assert_eq!(gamescope(&["demo", kind, "--out", p(&out)]).0, 0);
        let t = Table::read(&out.join("path_angle.csv")).unwrap();
        t.column("median_cos").unwrap().iter().map(|s| s.parse().unwrap()).collect()
    };
    let att = cos("linear:attraction");
    assert_eq!(att.windows(2).filter(|w| w[0].signum() != w[1].signum()).count(), 1);
    let rot = cos("linear:rotation");
    let peak = rot.iter().map(|c| c.abs()).fold(0.0, f64::max);
    assert!(peak > 0.9 && rot[0].abs() < 0.06, "{peak}");
}

#[test]
fn quiver_csv_is_descent_field() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(gamescope(&["demo", "linear:attraction", "--out", p(dir.path())]).0, 0);
    let t = Table::read(&dir.path().join("quiver.csv")).unwrap();
    assert_eq!(t.header, ["x", "y", "u", "v"]);
    assert_eq!(t.rows.len(), 225);
    for r in &t.rows {
        let x: f64 = r[0].parse().unwrap();
        let u: f64 = r[2].parse().unwrap();
        assert_eq!(u, -x);
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(gamescope(&["demo", "nope"]).0, 2);
    assert_eq!(gamescope(&["frobnicate"]).0, 2);
    assert_eq!(gamescope(&["demo", "example1", "--set", "typo=1"]).0, 2);
    assert_eq!(gamescope(&["train", "example1"]).0, 2);
    assert_eq!(gamescope(&["train", "nsgan", "sgd"]).0, 2);
    assert_eq!(gamescope(&["diagnose", "classify", "--set", "game=nsgan"]).0, 2);
    assert_eq!(gamescope(&["--help"]).0, 0);
}

#[test]
fn format_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "seed = 1\nseed = 2\n").unwrap();
    assert_eq!(gamescope(&["demo", "example1", "--config", p(&cfg)]).0, 3);
    assert_eq!(gamescope(&["demo", "example1", "--set", "point=1,1", "--out", p(&dir.path().join("o"))]).0, 3);
    assert_eq!(gamescope(&["demo", "example1", "--set", "grid_b=x", "--out", p(&dir.path().join("g"))]).0, 3);
}

#[test]
fn numeric_errors_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    // A Jordan-like nonsymmetric block gives a complex "Hessian" spectrum.
    let cfg = dir.path().join("asym.cfg");
    std::fs::write(&cfg, "game = linear\ns1 = 0, 1; -1, 0\ns2 = 1\na = 0, 0\nb = 0; 0\n").unwrap();
    let (code, err) = gamescope(&["diagnose", "hessians", "--config", p(&cfg), "--out", p(&dir.path().join("o"))]);
    assert_eq!(code, 4, "{err}");
}

#[test]
fn divergence_exits_6_with_partial_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut args = vec!["train", "nsgan", "gd", "--out", p(&out)];
    args.extend_from_slice(SMALL_GAN);
    args.extend_from_slice(&["--set", "lr_g=1e9", "--set", "lr_d=1e9"]);
    let (code, err) = gamescope(&args);
    assert_eq!(code, 6, "{err}");
    let s = kv(&out.join("summary.kv"));
    assert_eq!(s.get("diverged"), Some("true"));
    assert!(out.join("trajectory.csv").exists() && out.join("norm_trace.svg").exists());
}

#[test]
fn train_then_diagnose_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let mut args = vec!["train", "nsgan", "eg", "--seed", "4", "--out", p(&run)];
    args.extend_from_slice(SMALL_GAN);
    assert_eq!(gamescope(&args).0, 0);
    let t = Table::read(&run.join("trajectory.csv")).unwrap();
    assert_eq!(t.column("iteration").unwrap(), ["0", "10", "20", "30", "40", "50", "60"]);
    let last = t.column("checkpoint").unwrap()[6].to_string();
    assert_eq!(last, "checkpoints/iter_00000060.ckpt");
    let v: ParamVector = checkpoint::load(&run.join(&last)).unwrap();
    assert_eq!(v.layout().segments()[0].name, "gen.w1");
    let cfg = std::fs::read_to_string(run.join("config.resolved")).unwrap();
    assert!(cfg.contains("seed = 4\n") && cfg.contains("optimizer = eg\n"));

    let diag = dir.path().join("diag");
    let (code, err) = gamescope(&["diagnose", "all", "--run", p(&run), "--out", p(&diag), "--set", "k=4"]);
    assert_eq!(code, 0, "{err}");
    let pa = Table::read(&diag.join("path_angle.csv")).unwrap();
    assert_eq!(pa.rows.len(), 120);
    assert!(pa.header.iter().any(|h| h == "cos_4"));
    assert_eq!(Table::read(&diag.join("spectrum.csv")).unwrap().rows.len(), 4);
    assert!(diag.join("hessian_generator.csv").exists() && diag.join("report.kv").exists());

    // A checkpoint from a differently shaped run is a layout mismatch.
    let other = dir.path().join("other");
    let mut args = vec!["train", "nsgan", "eg", "--out", p(&other), "--set", "hidden_dim=7"];
    args.extend_from_slice(&SMALL_GAN[..2]);
    args.extend_from_slice(&SMALL_GAN[4..]);
    assert_eq!(gamescope(&args).0, 0);
    let foreign = other.join("checkpoints/iter_00000060.ckpt");
    let (code, _) = gamescope(&["diagnose", "spectrum", "--run", p(&run), "--checkpoint", p(&foreign), "--out", p(&diag)]);
    assert_eq!(code, 3);
}

#[test]
fn identical_seeds_give_identical_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let mut seen = Vec::new();
    for rep in 0..2 {
        let run = dir.path().join(format!("run{rep}"));
        let mut args = vec!["train", "nsgan", "eg", "--seed", "9", "--out", p(&run)];
        args.extend_from_slice(SMALL_GAN);
        assert_eq!(gamescope(&args).0, 0);
        let diag = dir.path().join(format!("diag{rep}"));
        assert_eq!(gamescope(&["diagnose", "all", "--run", p(&run), "--out", p(&diag), "--set", "k=4"]).0, 0);
        let demo = dir.path().join(format!("demo{rep}"));
        assert_eq!(gamescope(&["demo", "linear:mixed", "--out", p(&demo)]).0, 0);
        let mut files = Vec::new();
        for d in [&run, &diag, &demo] {
            let mut names: Vec<_> = std::fs::read_dir(d).unwrap().map(|e| e.unwrap().path()).collect();
            names.sort();
            for f in names.into_iter().filter(|f| f.extension().is_some_and(|e| e == "csv" || e == "svg" || e == "kv")) {
                files.push((f.file_name().unwrap().to_owned(), std::fs::read(&f).unwrap()));
            }
        }
        seen.push(files);
    }
    assert!(!seen[0].is_empty());
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_gamescope"))
        .args(["demo", "example1", "--out", "/nonexistent/never"])
        .env("GAMESCOPE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gamescope"))
        .args(["demo", "example2", "--out", p(dir.path())])
        .env("GAMESCOPE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
