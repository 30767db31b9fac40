use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ext-forge")).args(args).output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn certify_exit_codes() {
    let ok = run(&["certify", "--M", "14"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("P^122 does not immerse in R^226  [certified]"));
    let unmet = run(&["certify", "--M", "15"]);
    assert_eq!(unmet.status.code(), Some(2));
    let statement = run(&["certify", "--M", "190", "--h", "2"]);
    assert_eq!(statement.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&statement.stdout).contains("[statement-only]"));
}

#[test]
fn regenerated_chart_matches_fixture() {
    let out = tmp("bodiag.json");
    let args = ["resolve", "--algebra", "A1", "--module", "S0", "--max-s", "14", "--max-t", "38", "--stems", "0,24"];
    for sequential in [false, true] {
        let mut a: Vec<&str> = args.to_vec();
        if sequential {
            a.push("--sequential");
        }
        let o = out.to_str().unwrap();
        a.extend(["--out", o]);
        assert!(run(&a).status.success());
        let d = run(&["chart", "diff", o, fixture("bodiag").to_str().unwrap()]);
        assert_eq!(d.status.code(), Some(0), "{}", String::from_utf8_lossy(&d.stdout));
    }
}

#[test]
fn refuses_a_narrow_window() {
    let o = run(&["resolve", "--module", "P[..-2]", "--max-s", "3", "--max-t", "-4", "--stems", "-10,-4", "--window", "-20,-3"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("too small"));
}

#[test]
fn axial_theta_json() {
    let o = run(&["axial", "theta", "--gammas", "1,0,3", "--J", "12", "--K", "32"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["residual_zero"], true);
}
