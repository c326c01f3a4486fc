use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn mobius(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mobius"))
        .args(args)
        .env_remove("MOBIUS_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn expect_j_at_pi_is_one_half() {
    let o = mobius(&["cs", "expect-j", "--l", "0", "--phi", "pi", "--r", "0.5", "--s", "half"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(column(&out, "expect_j"), vec!["5.0000000000000000e-1"]);
    assert!(!out.contains('\r'));
}

#[test]
fn spectrum_table() {
    let o = mobius(&["spectrum", "--r", "0.5", "--s", "half", "--j-max", "3", "--L0", "0"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let j = column(&out, "j");
    let e = column(&out, "energy");
    assert_eq!(j.len(), 6);
    let k = j.iter().position(|x| x == "5.0000000000000000e-1").unwrap();
    let v: f64 = e[k].parse().unwrap();
    assert!((v - 0.117_647).abs() < 1e-6);
}

#[test]
fn theta_suite_passes() {
    let o = mobius(&["verify", "--suite", "theta"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), "check,anchor,max_error,tolerance,pass,grid");
    assert!(column(&out, "pass").iter().all(|p| p == "true"));
}

#[test]
fn failed_verification_exits_nonzero() {
    let o = mobius(&["verify", "--suite", "theta", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(column(&stdout(&o), "pass").iter().any(|p| p == "false"));
}

#[test]
fn sweep_is_deterministic_across_workers() {
    let args = ["cs", "expect-j", "--grid", "phi=0:4pi:16", "--grid", "r=0:0.9:3", "--s", "half"];
    let one = mobius(&[&args[..], &["--workers", "1"]].concat());
    let four = mobius(&[&args[..], &["--workers", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let out = stdout(&one);
    assert_eq!(out.lines().count(), 1 + 48);
    // first grid outermost
    let phi = column(&out, "phi");
    assert_eq!(phi[0], phi[1]);
    assert_eq!(phi[1], phi[2]);
    assert_ne!(phi[2], phi[3]);
}

#[test]
fn workers_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_mobius"))
        .args(["cs", "norm", "--grid", "l=-1:1:5"])
        .env("MOBIUS_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(o.stdout, mobius(&["cs", "norm", "--grid", "l=-1:1:5"]).stdout);
}

#[test]
fn expect_j_at_pi_tracks_l_plus_r() {
    let out = stdout(&mobius(&["cs", "expect-j", "--phi", "pi", "--l", "0", "--grid", "r=0:1:10"]));
    let r = column(&out, "r");
    let j = column(&out, "lprime");
    for (r, j) in r.iter().zip(&j) {
        let (r, j): (f64, f64) = (r.parse().unwrap(), j.parse().unwrap());
        assert!((j - r).abs() < 1e-15);
    }
}

#[test]
fn distribution_sweep_over_angle() {
    let out = stdout(&mobius(&["cs", "distribution", "--l", "0", "--r", "0.5", "--grid", "phi=0:4pi:64"]));
    let gaps = column(&out, "sup_gap");
    assert_eq!(gaps.len(), 64);
    assert!(gaps.iter().all(|g| g.parse::<f64>().unwrap() < 1.1e-4));
}

#[test]
fn empty_grid_gives_empty_table() {
    let o = mobius(&["cs", "norm", "--grid", "r=0:1:0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "l,phi,r,s,lprime,norm2,norm2_direct,norm2_modular,status\n");
}

#[test]
fn failing_rows_are_recorded() {
    let o = mobius(&["cs", "norm", "--grid", "r=0.5:1.5:2"]);
    assert_eq!(o.status.code(), Some(1));
    let status = column(&stdout(&o), "status");
    assert_eq!(status[0], "ok");
    assert!(status[1].contains("strip half-width"));
}

#[test]
fn domain_errors_are_usage_errors() {
    let o = mobius(&["cs", "norm", "--r", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 <= r < 1"));
    assert_eq!(mobius(&["cs", "norm", "--grid", "bogus=0:1:2"]).status.code(), Some(2));
    assert_eq!(mobius(&["cs", "norm", "--phi", "tau"]).status.code(), Some(2));
}

#[test]
fn json_output_round_trips() {
    let first = scratch("round_trip_first.json");
    let second = scratch("round_trip_second.json");
    let o = mobius(&[
        "project", "overlap", "--l", "0.3", "--phi", "1", "--l2", "-0.2", "--phi2", "2.2", "--r", "0.5",
        "--grid", "r=0:0.5:2", "--format", "json", "--out", first.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let o = mobius(&["run", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&first).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn toml_config_and_unknown_keys() {
    let good = scratch("good.toml");
    fs::write(&good, "command = \"cs\"\nquantity = \"expect-j\"\n[params]\nl = 0\nphi = \"pi\"\nr = 0.5\ns = \"half\"\n").unwrap();
    let o = mobius(&["run", good.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(column(&stdout(&o), "expect_j"), vec!["5.0000000000000000e-1"]);

    let bad = scratch("bad.toml");
    fs::write(&bad, "command = \"cs\"\nquantity = \"norm\"\n[params]\nradius = 0.5\n").unwrap();
    let o = mobius(&["run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("radius"));
}

#[test]
fn trajectory_schema() {
    let o = mobius(&["dynamics", "--r", "0.5", "--phi-dot", "1", "--z0-dot", "0.2", "--t-end", "1", "--dt", "0.01"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(out.lines().next().unwrap(), "t,phi,phi_dot,z0,z0_dot,E,J,L0");
    assert_eq!(out.lines().count(), 1 + 101);
    let e: Vec<f64> = column(&out, "E").iter().map(|x| x.parse().unwrap()).collect();
    assert!(e.iter().all(|x| (x - e[0]).abs() < 1e-12));
}

#[test]
fn projection_commands() {
    let o = mobius(&["project", "projector", "--delta", "0.1", "--phi", "0.8"]);
    assert!(o.status.success());
    let q: f64 = column(&stdout(&o), "quadrature")[0].parse().unwrap();
    assert!((q - 1.0).abs() < 1e-3);

    let o = mobius(&["project", "chain", "--l", "0.1", "--phi", "1.3", "--r", "0.4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for c in ["sv_ratio", "marginal_gap", "chain_gap"] {
        assert!(column(&out, c)[0].parse::<f64>().unwrap() < 1e-10);
    }
}

#[test]
fn theta_values() {
    let o = mobius(&["theta", "--nu", "0", "--tau-im", "1/pi"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mobius(&["theta", "--nu", "0", "--tau-im", "0.3183098861837907"]);
    assert!(o.status.success());
    let t3: f64 = column(&stdout(&o), "theta3_re")[0].parse().unwrap();
    assert!((t3 - 1.772_638).abs() < 1e-6);
}
