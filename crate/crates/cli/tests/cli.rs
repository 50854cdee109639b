use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hetring(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetring"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) -> String {
    let o = hetring(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn cycle_index(dir: &Path, labels: &[&str]) -> usize {
    let cycles = json(&dir.join("cycles.json"));
    cycles
        .as_array()
        .unwrap()
        .iter()
        .find(|c| {
            let l: Vec<&str> = c["labels"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
            l == labels
        })
        .map(|c| c["index"].as_u64().unwrap() as usize)
        .unwrap_or_else(|| panic!("no cycle {labels:?}"))
}

#[test]
fn network_censuses_and_sinks() {
    let t = tempfile::tempdir().unwrap();
    ok(&["network", "--n", "7", "--m", "1"], t.path());
    let net = json(&t.path().join("network.json"));
    assert_eq!(net["census"], serde_json::json!([0, 7, 14, 7]));
    assert!(t.path().join("network.dot").exists());

    ok(&["network", "--n", "6"], t.path());
    let net = json(&t.path().join("network.json"));
    assert_eq!(net["sinks"], serde_json::json!(["xi_{1,3,5}", "xi_{2,4,6}"]));

    ok(&["network", "--n", "5", "--m", "2", "--format", "json"], t.path());
    let net = json(&t.path().join("network.json"));
    assert_eq!(net["fixed_points"].as_array().unwrap().len(), 5);
    let conns = net["connections"].as_array().unwrap();
    assert_eq!(conns.len(), 10);
    for fp in 0..5 {
        assert_eq!(conns.iter().filter(|c| c["source"] == fp).count(), 2);
    }
}

#[test]
fn stability_of_five_ring_cycles() {
    let t = tempfile::tempdir().unwrap();
    ok(&["cycles", "--n", "5"], t.path());
    let pair = cycle_index(t.path(), &["xi_{1,3}", "xi_{3,5}", "xi_{2,5}", "xi_{2,4}", "xi_{1,4}"]);
    let single = cycle_index(t.path(), &["xi_{1}", "xi_{5}", "xi_{4}", "xi_{3}", "xi_{2}"]);
    ok(&["stability", "--n", "5", "--gamma", "3.04"], t.path());
    let rep = json(&t.path().join("stability.json"));
    assert_eq!(rep[pair]["report"]["fas"], true);
    assert_eq!(rep[pair]["report"]["agreement"], true);
    assert!((rep[pair]["gamma_star"].as_f64().unwrap() - 2.0794415416798357).abs() < 1e-12);
    for gamma in ["2.5", "6.24", "12"] {
        ok(&["stability", "--n", "5", "--gamma", gamma, "--cycle", &single.to_string()], t.path());
        let rep = json(&t.path().join("stability.json"));
        assert_eq!(rep[0]["report"]["fas"], false, "gamma {gamma}");
    }
}

#[test]
fn seven_ring_triple_cycle_threshold() {
    let t = tempfile::tempdir().unwrap();
    ok(&["cycles", "--n", "7", "--max-cycle-len", "7"], t.path());
    let cycles = json(&t.path().join("cycles.json"));
    let triple = cycles
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["j"] == 3)
        .map(|c| c["index"].as_u64().unwrap())
        .expect("a triple cycle");
    // delta = gamma / (2 ln 2) - 1 at r = 2, threshold delta* = 1/3
    for (delta, stable) in [(0.3, false), (0.37, true)] {
        let gamma = (delta + 1.0) * 2.0 * 2f64.ln();
        ok(
            &["stability", "--n", "7", "--max-cycle-len", "7", "--gamma", &gamma.to_string(), "--cycle", &triple.to_string()],
            t.path(),
        );
        let rep = json(&t.path().join("stability.json"));
        assert_eq!(rep[0]["report"]["fas"], stable, "delta {delta}");
        assert_eq!(rep[0]["report"]["agreement"], true);
    }
}

#[test]
fn sweep_grids() {
    let t = tempfile::tempdir().unwrap();
    ok(&["sweep", "--jobs", "2"], t.path());
    let csv = fs::read_to_string(t.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let near = header.iter().position(|h| *h == "near_threshold").unwrap();
    let agree = header.iter().position(|h| *h == "agreement").unwrap();
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f[near] == "false" {
            assert_eq!(f[agree], "true", "{line}");
        }
        rows += 1;
    }
    assert_eq!(rows, 660);

    let cfg = t.path().join("single.toml");
    fs::write(&cfg, "[grid]\nj = [1]\np = [2]\ndelta_start = 2.0\ndelta_count = 1\n").unwrap();
    ok(&["sweep", "--config", cfg.to_str().unwrap(), "--format", "json"], t.path());
    let rows = json(&t.path().join("sweep.json"));
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["numeric_fas"], true);

    fs::write(&cfg, "[grid]\nj = []\n").unwrap();
    ok(&["sweep", "--config", cfg.to_str().unwrap()], t.path());
    let csv = fs::read_to_string(t.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("j,p,q,delta"));
}

#[test]
fn simulate_then_fit_unstable_cycle() {
    let t = tempfile::tempdir().unwrap();
    let sim = t.path().join("sim");
    ok(
        &[
            "simulate", "--n", "5", "--gamma", "6.24", "--ic", "eigen", "--representation", "log",
            "--steps", "10000000", "--max-epochs", "17", "--record-every", "100000",
        ],
        &sim,
    );
    let epochs = sim.join("epochs.csv");
    let text = fs::read_to_string(&epochs).unwrap();
    assert!(text.starts_with("k,boundary_i,T_k,X_k,shadowed_fixed_point\n"));
    assert!(sim.join("trajectory.csv").exists());

    let fit_dir = t.path().join("fit");
    ok(
        &["fit", "--n", "5", "--gamma", "6.24", "--epochs", epochs.to_str().unwrap(), "--count", "15"],
        &fit_dir,
    );
    let fit = json(&fit_dir.join("fit.json"));
    let valleys: Vec<f64> = fit["valleys"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let range = valleys.iter().cloned().fold(f64::MIN, f64::max) - valleys.iter().cloned().fold(f64::MAX, f64::min);
    let rms = fit["fit"]["rms_residual"].as_f64().unwrap();
    assert!(rms < 0.1 * range);
    assert!(rms < fit["pure"]["rms_residual"].as_f64().unwrap());
    assert!(fit_dir.join("fit_curve.csv").exists());

    let short = hetring(
        &["fit", "--n", "5", "--gamma", "6.24", "--epochs", epochs.to_str().unwrap(), "--count", "3"],
        &t.path().join("short"),
    );
    assert!(!short.status.success());
    assert!(String::from_utf8_lossy(&short.stderr).contains("insufficient"));
}

#[test]
fn pair_cycle_recipe_shadows_pairs() {
    let t = tempfile::tempdir().unwrap();
    let out = ok(
        &[
            "simulate", "--n", "5", "--ic", "1,3", "--representation", "log", "--steps", "10000000",
            "--max-epochs", "12", "--record-every", "1000", "--seed", "3",
        ],
        t.path(),
    );
    assert!(out.contains("12 epochs"));
    let summary = json(&t.path().join("summary.json"));
    assert_eq!(summary["off_network_epochs"], 0);
    let seq = summary["active_sequence"].as_array().unwrap();
    assert!(seq.iter().all(|s| s.as_str().unwrap().contains(',')));
    assert!((summary["growth_rate"].as_f64().unwrap() - 1.8409).abs() < 0.05 * 1.8409);
}

#[test]
fn reruns_are_byte_identical_except_metadata() {
    let t = tempfile::tempdir().unwrap();
    let (a, b) = (t.path().join("a"), t.path().join("b"));
    let args = ["simulate", "--n", "5", "--steps", "3000", "--seed", "7", "--epsilon", "1e-3"];
    ok(&args, &a);
    ok(&args, &b);
    for name in ["trajectory.csv", "epochs.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    // only the out path differs in the echoed config
    let (ca, cb) = (json(&a.join("config.json")), json(&b.join("config.json")));
    assert_eq!(ca["seed"], cb["seed"]);
    assert!(a.join("meta.json").exists());
}

#[test]
fn config_file_precedence_and_echo() {
    let t = tempfile::tempdir().unwrap();
    let cfg = t.path().join("run.toml");
    fs::write(&cfg, "n = 7\nm = 2\ngamma = 4.0\nr = 2.5\n").unwrap();
    ok(&["network", "--config", cfg.to_str().unwrap(), "--gamma", "5.0"], t.path());
    let echo = json(&t.path().join("config.json"));
    assert_eq!(echo["gamma"], 5.0);
    assert_eq!(echo["r"], 2.5);
    assert_eq!(echo["graph"], serde_json::json!({"n": 7, "m": 2}));
    let net = json(&t.path().join("network.json"));
    assert_eq!(net["census"], serde_json::json!([0, 7, 7]));
}

#[test]
fn graph_file_input() {
    let t = tempfile::tempdir().unwrap();
    let g = t.path().join("g.json");
    fs::write(&g, r#"{"n": 3, "edges": [[1, 2], [2, 3], [3, 1]]}"#).unwrap();
    ok(&["network", "--graph", g.to_str().unwrap()], t.path());
    let net = json(&t.path().join("network.json"));
    assert_eq!(net["fixed_points"].as_array().unwrap().len(), 3);
}

#[test]
fn invalid_input_exits_nonzero() {
    let t = tempfile::tempdir().unwrap();
    for args in [
        vec!["network", "--n", "4", "--m", "2"],
        vec!["sweep", "--jobs", "0"],
        vec!["network", "--format", "csv"],
        vec!["simulate", "--ic", "1,2"],
        vec!["fit"],
    ] {
        let o = hetring(&args, t.path());
        assert!(!o.status.success(), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    let bad = t.path().join("bad.toml");
    fs::write(&bad, "gama = 3.0\n").unwrap();
    assert!(!hetring(&["network", "--config", bad.to_str().unwrap()], t.path()).status.success());
}

#[test]
fn verify_subset() {
    let t = tempfile::tempdir().unwrap();
    let out = ok(&["verify", "--criteria", "1,2,3"], t.path());
    assert_eq!(out.lines().filter(|l| l.contains("[PASS]")).count(), 3);
    let rep = json(&t.path().join("verify.json"));
    assert_eq!(rep.as_array().unwrap().len(), 3);
}
