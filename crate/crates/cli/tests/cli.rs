use std::fs;
use std::process::{Command, Output};

fn xchg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xchg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV output, split on commas (no quoted cells expected).
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(text: &str, name: &str) -> usize {
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    header.split(',').position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn simulate_writes_a_replayable_event_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let o = xchg(&["simulate", "--gamma", "0.5", "--n", "6", "--t-end", "1000", "--seed", "7", "--out", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(header["params"]["rng_seed"], 7);
    assert_eq!(lines.next().unwrap(), "time,i,j,alpha");
    let events = lines.count();
    assert!(events > 1000);
    assert_eq!(header["events"], events);
    let summary = stdout(&o);
    assert!(summary.starts_with("# xchg "));
    assert!(summary.contains("seed=7"));
}

#[test]
fn simulate_event_count_matches_the_poisson_rate() {
    let o = xchg(&["simulate", "--gamma", "0", "--n", "4", "--t-end", "100", "--replicas", "20", "--seed", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let col = column(&text, "events");
    let counts: Vec<f64> = rows(&text).iter().map(|r| r[col].parse().unwrap()).collect();
    assert_eq!(counts.len(), 20);
    let mean = counts.iter().sum::<f64>() / 20.0;
    // Poisson(400): standard error of the mean of 20 counts is sqrt(400/20)
    assert!((mean - 400.0).abs() < 3.0 * (400.0f64 / 20.0).sqrt(), "mean {mean}");
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let args = ["simulate", "--gamma", "0.3", "--n", "5", "--t-end", "50", "--replicas", "3", "--seed", "11"];
    let a = xchg(&args);
    let b = xchg(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = xchg(&["simulate", "--gamma", "0.3", "--n", "5", "--t-end", "50", "--replicas", "3", "--seed", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn usage_errors_exit_with_two() {
    let o = xchg(&["simulate", "--gamma", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(xchg(&["gap", "--n", "5..3"]).status.code(), Some(2));
    assert_eq!(xchg(&["gap", "--n", "3", "--gamma", "1.5"]).status.code(), Some(2));
    assert_eq!(xchg(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_one() {
    let o = xchg(&["bounds", "--gamma", "0", "--n", "4", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gap_reproduces_the_flat_gap() {
    let o = xchg(&["gap", "--gamma", "0", "--n", "3..8", "--degree", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let (vc, ec, bc) = (column(&text, "value"), column(&text, "exact"), column(&text, "bracket_ok"));
    let r = rows(&text);
    assert_eq!(r.len(), 6);
    for (k, row) in r.iter().enumerate() {
        let n = (k + 3) as f64;
        let v: f64 = row[vc].parse().unwrap();
        assert!((v - 2.0 * (n + 1.0) / (3.0 * (n - 1.0))).abs() < 1e-10);
        assert!(!row[ec].is_empty());
        assert_eq!(row[bc], "true");
    }
}

#[test]
fn gap_two_particles_in_json() {
    let o = xchg(&["gap", "--gamma", "0.5", "--n", "2", "--degree", "1", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["meta"]["command"], "gap");
    let v = doc["rows"][0]["value"].as_f64().unwrap();
    assert!((v - 2f64.powf(1.5)).abs() < 1e-10);
}

#[test]
fn gap_minorant_form_has_a_c_fit_column() {
    let o = xchg(&["gap", "--form", "gamma-tilde", "--gamma", "0.5", "--n", "3..8"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let c = column(&text, "c_fit");
    let fits: Vec<f64> = rows(&text).iter().map(|r| r[c].parse().unwrap()).collect();
    assert!(fits.iter().all(|&x| x > 0.0));
    assert!(fits.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn verify_k_spectrum_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let o = xchg(&["verify", "--suite", "k-spectrum", "--n", "12", "--degree", "8", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("k-spectrum,,12,PASS"));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["findings"][0]["data"]["matches_closed_form"], true);
}

#[test]
fn verify_weights_at_gamma_one() {
    let o = xchg(&["verify", "--suite", "weights", "--gamma", "1.0", "--n", "5", "--samples", "2000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("W = 1 identically"));
}

#[test]
fn verify_small_lemma_grid() {
    let o = xchg(&["verify", "--suite", "lemmas,minorant,bracket", "--gamma", "0.5", "--n", "3..4", "--trials", "8", "--samples", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches(",PASS,").count(), 5);
}

#[test]
fn bounds_exact_flat_chain() {
    let o = xchg(&["bounds", "--gamma", "0", "--n", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("delta-chain,0.0,20,")).unwrap();
    assert!(line.contains("exact 14/19"));
    assert!(text.lines().any(|l| l == "name,gamma,N,value,anchor,notes"));
}

#[test]
fn bounds_gamma_one_limit() {
    let o = xchg(&["bounds", "--gamma", "1", "--n", "10", "--limit", "--format", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    let lim = rows.iter().find(|r| r["name"] == "delta-limit").unwrap();
    let v = lim["value"].as_f64().unwrap();
    assert!((v - 0.274).abs() < 1e-3);
    assert!(lim["notes"].as_str().unwrap().contains("enclosure"));
}

#[test]
fn bounds_galerkin_chain_is_labelled_empirical() {
    let o = xchg(&["bounds", "--gamma", "0.5", "--n", "5", "--chain", "galerkin"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().filter(|l| l.starts_with("delta-chain")).all(|l| l.contains("not a proven bound")));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empirical"));
}
