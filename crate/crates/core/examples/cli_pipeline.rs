// The command line front end driven in process: params, a verify suite,
// an orbit and its rendering, all listed in the manifest.

use abc_core::cli::main_with_args;
use abc_core::cli::manifest::verify_manifest;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("abc-cli-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let config = dir.join("toy.json");
    std::fs::write(&config, r#"{"stages": [{"n": 1, "k": 2, "l": 4, "q": 2, "p": 1, "sigma": "3/8"}], "seed": 42}"#)?;
    let out = dir.join("out");
    let (c, o) = (config.to_str().unwrap(), out.to_str().unwrap());
    let orbit = out.join("orbit.csv");
    let orbit_what = format!("orbit:{}", orbit.display());
    let runs: [&[&str]; 4] = [
        &["abc", "params", "--config", c, "--out", o],
        &["abc", "verify", "--suite", "PARTITION", "--config", c, "--out", o],
        &["abc", "orbit", "--config", c, "--out", o],
        &["abc", "render", "--what", &orbit_what, "--config", c, "--out", o],
    ];
    for args in runs {
        let code = main_with_args(args.iter().copied());
        if code != 0 {
            return Err(format!("{args:?} exited with {code}").into());
        }
    }
    let bad = verify_manifest(&out)?;
    println!("manifest digests mismatched: {bad:?}");
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cli example");
}
