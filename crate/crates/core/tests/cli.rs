use std::path::Path;

use abc_core::cli::main_with_args;
use abc_core::cli::manifest::verify_manifest;

const TOY_JSON: &str = r#"{"stages": [{"n": 1, "k": 2, "l": 4, "q": 2, "p": 1, "sigma": "3/8"}], "seed": 42}"#;

fn run(config: &Path, out: &Path, rest: &[&str]) -> i32 {
    let mut args = vec!["abc"];
    args.extend_from_slice(rest);
    args.extend_from_slice(&["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    main_with_args(args)
}

fn toy_config(dir: &Path) -> std::path::PathBuf {
    let p = dir.join("toy.json");
    std::fs::write(&p, TOY_JSON).unwrap();
    p
}

#[test]
fn unknown_config_key_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"stages": [], "bogus": true}"#).unwrap();
    assert_eq!(run(&p, &dir.path().join("out"), &["params"]), 2);
}

#[test]
fn missing_config_exits_with_2() {
    assert_eq!(main_with_args(["abc", "params"]), 2);
}

#[test]
fn mixing_loss_over_cap_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let c = toy_config(dir.path());
    assert_eq!(run(&c, &dir.path().join("out"), &["mixing", "--samples", "4000"]), 3);
}

#[test]
fn params_and_distribute_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let c = toy_config(dir.path());
    let out = dir.path().join("out");
    assert_eq!(run(&c, &out, &["params"]), 0);
    assert_eq!(run(&c, &out, &["distribute", "--samples", "8000"]), 0);
    for f in ["params.json", "params.csv", "distribute.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(verify_manifest(&out).unwrap().is_empty());
}

#[test]
fn orbit_and_render_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let c = toy_config(dir.path());
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        assert_eq!(run(&c, &out, &["orbit", "--samples", "50"]), 0);
        let what = format!("orbit:{}", out.join("orbit.csv").display());
        assert_eq!(run(&c, &out, &["render", "--what", &what]), 0);
        assert_eq!(run(&c, &out, &["render", "--what", "partition:eta"]), 0);
        let files: Vec<Vec<u8>> = ["orbit.csv", "orbit.svg", "partition_eta.svg"].iter().map(|f| std::fs::read(out.join(f)).unwrap()).collect();
        assert!(verify_manifest(&out).unwrap().is_empty());
        outputs.push(files);
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert_eq!(csv.lines().count(), 52, "header, start and 50 iterates");
}

#[test]
fn approx_rejects_unknown_target() {
    let dir = tempfile::tempdir().unwrap();
    let c = toy_config(dir.path());
    assert_eq!(run(&c, &dir.path().join("out"), &["approx", "--what", "nonsense"]), 2);
}
