use std::process::{Command, Output};

use serde_json::Value;

fn sae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sae"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = sae(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

#[test]
fn tt_modes_of_quartic() {
    let doc = json(&["tt-modes", "--potential", "power", "--a", "1", "--p", "2", "--count", "3"]);
    let e: Vec<f64> = doc["results"]["energies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    for (got, want) in e.iter().zip([1.3765, 5.9558, 11.769]) {
        assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    }
    assert_eq!(e.len(), 3);
}

#[test]
fn top_level_keys_in_order() {
    let out = sae(&["flight-time", "--energy", "0", "--from", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let keys: Vec<usize> = ["\"potential\"", "\"config\"", "\"results\""]
        .iter()
        .map(|k| text.find(k).expect(k))
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]), "{text}");
}

#[test]
fn flight_time_from_one() {
    let doc = json(&["flight-time", "--potential", "power", "--a", "1", "--p", "2", "--energy", "0", "--from", "1"]);
    let t = doc["results"].as_f64().unwrap();
    assert!((t - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8, "{t}");
}

#[test]
fn qes_wronskian_table() {
    let doc = json(&["wronskian", "--potential", "qes", "--b", "2"]);
    let rows = doc["results"].as_array().unwrap();
    let row = rows
        .iter()
        .find(|r| r["pair"][0] == "psi+1" && r["pair"][1] == "psi-2")
        .expect("pair present");
    assert!((row["limit_plus"].as_f64().unwrap() - 1.0).abs() < 1e-7);
    assert_eq!(row["equal"], true);
    assert!(rows.iter().all(|r| r["equal"] == true));
}

#[test]
fn phases_csv_header_and_rows() {
    let out = sae(&["phases", "--emin", "0.5", "--emax", "3", "--samples", "6", "--method", "wkb"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("energy,phi,alpha,theta,method"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.ends_with(",wkb") && r.split(',').count() == 5));
}

#[test]
fn sweeps_are_deterministic() {
    let args = ["phases", "--emin", "0.5", "--emax", "4", "--samples", "8", "--method", "numeric"];
    let first = sae(&args);
    let second = sae(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("s{i}.json"))).collect();
    for p in &paths {
        let out = sae(&["scatter", "--emin", "-1", "--emax", "2", "--samples", "5", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
}

#[test]
fn spectrum_one_parameter_levels() {
    let doc = json(&["spectrum", "--scheme", "one", "--eref-plus", "1.3765", "--n-max", "2", "--method", "wkb"]);
    let levels = doc["results"]["levels"].as_array().unwrap();
    assert!(!levels.is_empty());
    assert!(levels.iter().all(|l| l["parity"] == "+" || l["parity"] == "-"));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["flight-time", "--potential", "power", "--a", "-1", "--energy", "0"][..],
        &["flight-time", "--potential", "qes", "--a", "1", "--energy", "0"][..],
        &["phases", "--emin", "3", "--emax", "1"][..],
        &["spectrum", "--scheme", "two", "--eref-plus", "1"][..],
        &["tt-modes", "--potential", "qes"][..],
        &["tt-modes", "--no-such-flag"][..],
    ] {
        assert_eq!(sae(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numerical_errors_exit_three() {
    let out = sae(&["phases", "--energy", "1", "--method", "numeric", "--tol-unitarity", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("extract_alpha_theta"), "{msg}");
}
