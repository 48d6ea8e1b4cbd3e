use std::path::Path;
use std::process::Command;
use std::time::Instant;

fn hypercell(dir: &Path, args: &[&str], config: &str) -> std::process::Output {
    let cfg = dir.join("config-in.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_hypercell"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .current_dir(dir)
        .output()
        .unwrap()
}

#[test]
fn empty_sample_gives_header_only_archive() {
    let dir = tempfile::tempdir().unwrap();
    let out = hypercell(dir.path(), &["sample-cells", "--out", "run"], r#"{"n_samples": 0}"#);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("run/cells.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    let header: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(header["d"], 2);
    assert!(dir.path().join("run/config.json").exists());
    assert!(dir.path().join("run/summary.txt").exists());
}

#[test]
fn schema_errors_exit_2_with_the_field_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = hypercell(dir.path(), &["facet-hist"], r#"{"gamma": -1}"#);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma"));
    let out = hypercell(dir.path(), &["facet-hist"], r#"{"windw_side": 3}"#);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("windw_side"));
}

#[test]
fn too_few_cells_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = hypercell(dir.path(), &["complementary-test", "--out", "ct"], r#"{"n_samples": 20}"#);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn seed_flag_overrides_and_worker_count_does_not_matter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"n_samples": 1500, "seed": 1}"#;
    for (name, workers) in [("a", "1"), ("b", "4")] {
        let out = hypercell(dir.path(), &["sample-cells", "--seed", "9", "--workers", workers, "--out", name], cfg);
        assert!(out.status.success());
    }
    for file in ["cells.jsonl", "config.json", "summary.txt"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }
    let resolved = std::fs::read_to_string(dir.path().join("a/config.json")).unwrap();
    assert!(resolved.contains("\"seed\": 9"));
}

#[test]
fn workers_fall_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"n_samples": 50}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_hypercell"))
        .args(["sample-cells", "--config", "c.json", "--out", "r"])
        .env("HYPERCELL_WORKERS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn facet_hist_on_ten_thousand_cells_is_fast() {
    let dir = tempfile::tempdir().unwrap();
    let out = hypercell(dir.path(), &["sample-cells", "--out", "cells"], r#"{"n_samples": 10000}"#);
    assert!(out.status.success());
    let t = Instant::now();
    let out = hypercell(dir.path(), &["facet-hist", "--out", "hist"], r#"{"input": "cells/cells.jsonl"}"#);
    assert!(out.status.success());
    assert!(t.elapsed().as_secs_f64() < 10.0);
    let csv = std::fs::read_to_string(dir.path().join("hist/facets.csv")).unwrap();
    assert!(csv.lines().count() > 4);
}

#[test]
fn every_command_runs_on_a_small_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let s = hypercell(dir.path(), &["sample-cells", "--out", "cells"], r#"{"n_samples": 3000}"#);
    assert!(s.status.success());
    let runs: [(&str, &str, &str); 9] = [
        ("complementary-test", r#"{"input": "cells/cells.jsonl", "n_values": [3, 4], "permutations": 99}"#, "gamma_fit.csv"),
        ("phi-tail", r#"{"input": "cells/cells.jsonl", "bootstrap": 50}"#, "phi_tail.csv"),
        ("envelope", r#"{"input": "cells/cells.jsonl", "bootstrap": 50}"#, "envelope.csv"),
        ("shape-direct", r#"{"n": 3, "n_samples": 3}"#, "direct.csv"),
        ("witness", r#"{"n_values": [16, 32], "draws": 20}"#, "witness.csv"),
        ("approx-bench", r#"{"directions": 2000, "train": 20, "holdout": 20}"#, "removable.csv"),
        (
            "limit-shape",
            r#"{"phi": {"variant": "discrete", "directions": [[1, 0], [0, 1], [-1, 0], [0, -1]]}, "n_samples": 2000, "bootstrap": 50}"#,
            "limit_shape.csv",
        ),
        ("elongation", r#"{"d": 4, "sampler": "zero-cell", "n_samples": 100, "a_grid": [0, 5]}"#, "elongation.csv"),
        ("facet-hist", r#"{"input": "cells/cells.jsonl"}"#, "facets.csv"),
    ];
    for (cmd, cfg, file) in runs {
        let out = hypercell(dir.path(), &[cmd, "--out", cmd], cfg);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(cmd).join(file).exists(), "{cmd} wrote no {file}");
    }
}
