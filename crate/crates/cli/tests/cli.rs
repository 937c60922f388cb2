use std::path::Path;
use std::process::{Command, Output};

use jnsc_core::netgen::{fig1_network, save_network};

fn run(bin: &str, args: &[&str], dir: &Path) -> Output {
    Command::new(bin)
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn crnf_solves_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    save_network(&fig1_network(1.0), dir.path().join("net.json")).unwrap();
    let out = run(
        env!("CARGO_BIN_EXE_crnf"),
        &["solve", "--network", "net.json", "--descriptions", "2", "--out", "flow.json"],
        dir.path(),
    );
    let v = stdout_json(&out);
    assert_eq!(v["objective"], 6.0);
    assert_eq!(v["q"]["4"], 2);
    assert_eq!(v["q"]["2"], 1);

    let eval = run(
        env!("CARGO_BIN_EXE_jnsc"),
        &["evaluate", "--network", "net.json", "--flow", "flow.json", "--descriptions", "2"],
        dir.path(),
    );
    let v = stdout_json(&eval);
    assert_eq!(v["admissible"], true);
    assert!((v["average_distortion"].as_f64().unwrap() - 0.25).abs() < 1e-12);

    let brute = run(
        env!("CARGO_BIN_EXE_crnf"),
        &["brute", "--network", "net.json", "--descriptions", "2"],
        dir.path(),
    );
    assert_eq!(String::from_utf8_lossy(&brute.stdout).trim(), "6");
}

#[test]
fn mdc_optimize_reports_profile_and_table() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("q.json"), "[1,1,1,2,2,2,2,3]").unwrap();
    let out = run(
        env!("CARGO_BIN_EXE_mdc"),
        &["optimize", "--rfv", "q.json", "--descriptions", "3"],
        dir.path(),
    );
    let v = stdout_json(&out);
    let y: Vec<f64> = serde_json::from_value(v["y"].clone()).unwrap();
    assert!((y[0] - 0.82).abs() <= 0.01 && (y[1] - 0.18).abs() <= 0.01 && y[2] <= 0.01);
    assert_eq!(v["pet_distortion"].as_array().unwrap().len(), 4);
    assert_eq!(v["certified"], true);
}

#[test]
fn mdc_ozarow_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        env!("CARGO_BIN_EXE_mdc"),
        &["ozarow", "--cmin", "0.1", "--cmax", "3", "--step", "0.1"],
        dir.path(),
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("C,D_star,avg_mdc,avg_sep,ratio"));
    let ratios: Vec<f64> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 30);
    assert!(ratios.iter().all(|r| *r > 0.0 && *r < 1.0));
}

#[test]
fn pet_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("y.json"), r#"{"levels": [0.25, 0.5, 0.25], "rate": 1.0}"#).unwrap();
    let source: Vec<u8> = (0..64u32).map(|i| (i * 37 + 11) as u8).collect();
    std::fs::write(d.join("bits.raw"), &source).unwrap();
    let enc = run(
        env!("CARGO_BIN_EXE_pet"),
        &["encode", "--profile", "y.json", "--block", "64", "--in", "bits.raw", "--out", "enc"],
        d,
    );
    assert!(enc.status.success(), "{}", String::from_utf8_lossy(&enc.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("enc/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["segment_widths"], serde_json::json!([16, 32, 16]));
    assert_eq!(manifest["source_prefix_lengths"], serde_json::json!([0, 16, 80, 128]));

    let dec = run(
        env!("CARGO_BIN_EXE_pet"),
        &["decode", "--manifest", "enc/manifest.json", "--shares", "enc/desc_3.bin,enc/desc_2.bin", "--out", "p.bin"],
        d,
    );
    assert!(dec.status.success(), "{}", String::from_utf8_lossy(&dec.stderr));
    assert_eq!(std::fs::read(d.join("p.bin")).unwrap(), source[..10]);

    std::fs::write(d.join("junk.bin"), [0u8; 8]).unwrap();
    let bad = run(
        env!("CARGO_BIN_EXE_pet"),
        &["decode", "--manifest", "enc/manifest.json", "--shares", "junk.bin", "--out", "q.bin"],
        d,
    );
    assert!(!bad.status.success());
}

#[test]
fn jnsc_run_writes_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("cfg.toml"),
        "seeds = [0, 1]\nk_max = 4\noutput_dir = \"out\"\n[network]\nn_nodes = 20\n",
    )
    .unwrap();
    let out = run(env!("CARGO_BIN_EXE_jnsc"), &["run", "--config", "cfg.toml", "--all-k"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(d.join("out/distortion_vs_k.csv")).unwrap();
    assert!(csv.starts_with("seed,K,objective,dbar"));
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("out/run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "run");
    assert_eq!(manifest["outputs"][0]["name"], "distortion_vs_k.csv");
    assert_eq!(manifest["outputs"][0]["sha256"].as_str().unwrap().len(), 64);

    let sweep = run(
        env!("CARGO_BIN_EXE_jnsc"),
        &["size-sweep", "--config", "cfg.toml", "--sizes", "10,20", "--descriptions", "2"],
        d,
    );
    assert!(sweep.status.success());
    let cdf = std::fs::read_to_string(d.join("out/rfv_cdf.csv")).unwrap();
    assert_eq!(cdf.lines().count(), 1 + 2 * 3);
    assert!(cdf.lines().any(|l| l == "10,2,1.0"));
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), "seeds = []\n[network]\nn_nodes = 20\n").unwrap();
    let out = run(env!("CARGO_BIN_EXE_jnsc"), &["run", "--config", "cfg.toml"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seeds"));
}
