use std::path::Path;

use twocons_cli::dispatch;
use twocons_cli::manifest::{sha256_file, MANIFEST_FILE};

fn run(args: &[&str]) -> i32 {
    dispatch(std::iter::once("twocons").chain(args.iter().copied()))
}

fn out_arg(dir: &Path) -> String {
    dir.to_string_lossy().into_owned()
}

fn manifest(dir: &Path) -> toml::Table {
    toml::from_str(&std::fs::read_to_string(dir.join(MANIFEST_FILE)).unwrap()).unwrap()
}

#[test]
fn validate_prints_report_and_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path());
    assert_eq!(run(&["validate", "--model", "pm1", "--block-len", "4", "--out", &out]), 0);
    let text = std::fs::read_to_string(tmp.path().join("conditions.txt")).unwrap();
    assert!(text.contains("(D) asym_stationarity  PASS"));
    let m = manifest(tmp.path());
    assert_eq!(m["manifest"]["command"].as_str(), Some("validate"));
    assert_eq!(m["validate"]["block_len"].as_integer(), Some(4));
    assert_eq!(m["seed"].as_integer(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path());
    assert_eq!(run(&["no-such-command"]), 2);
    assert_eq!(run(&["validate", "--block-length", "4", "--out", &out]), 2);
    assert_eq!(run(&["validate", "--model", "three-lane", "--out", &out]), 2);
    assert_eq!(run(&["solve-pde", "--out", &out]), 2, "neither gamma nor model");
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[solve-pde]\ngamma = 1.0\ncfl = 0.3\n").unwrap();
    assert_eq!(run(&["solve-pde", "--config", cfg.to_str().unwrap(), "--out", &out]), 2);
    std::fs::write(&cfg, "[solve_pde]\ngamma = 1.0\n").unwrap();
    assert_eq!(run(&["solve-pde", "--config", cfg.to_str().unwrap(), "--out", &out]), 2);
}

#[test]
fn config_values_apply_and_flags_override_them() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "seed = 9\n[validate]\nmodel = \"two-lane:0.5\"\nblock_len = 3\n").unwrap();
    let out = out_arg(&tmp.path().join("o"));
    assert_eq!(run(&["validate", "--config", cfg.to_str().unwrap(), "--block-len", "5", "--out", &out]), 0);
    let m = manifest(&tmp.path().join("o"));
    assert_eq!(m["validate"]["model"].as_str(), Some("two-lane:0.5"));
    assert_eq!(m["validate"]["block_len"].as_integer(), Some(5));
    assert_eq!(m["seed"].as_integer(), Some(9));
}

#[test]
fn solve_pde_writes_snapshots_and_replays_from_its_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&["solve-pde", "--gamma", "1", "--m", "128", "--t-end", "0.2", "--out", &out_arg(&a)]), 0);
    let csv = std::fs::read_to_string(a.join("pde.csv")).unwrap();
    assert!(csv.starts_with("t,x,rho,u\n"));
    // Initial state plus four snapshots of 128 cells.
    assert_eq!(csv.lines().count(), 1 + 5 * 128);
    let cfg = a.join(MANIFEST_FILE);
    assert_eq!(run(&["solve-pde", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&b)]), 0);
    assert_eq!(sha256_file(&a.join("pde.csv")).unwrap(), sha256_file(&b.join("pde.csv")).unwrap());
    let digest = manifest(&a)["manifest"]["outputs"][0]["sha256"].as_str().unwrap().to_string();
    assert_eq!(digest, sha256_file(&b.join("pde.csv")).unwrap());
}

#[test]
fn simulate_replays_bit_for_bit_and_depends_on_the_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    let base = ["simulate", "--n", "128", "--t-end", "0.05", "--snapshots", "2"];
    let with = |seed: &str, dir: &Path| {
        let out = out_arg(dir);
        let args: Vec<&str> = base.iter().copied().chain(["--seed", seed, "--out", &out]).collect();
        run(&args)
    };
    assert_eq!(with("5", &dirs[0]), 0);
    let cfg = dirs[0].join(MANIFEST_FILE);
    assert_eq!(run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", &out_arg(&dirs[1])]), 0);
    assert_eq!(with("6", &dirs[2]), 0);
    let digest = |d: &Path| sha256_file(&d.join("fields.csv")).unwrap();
    assert_eq!(digest(&dirs[0]), digest(&dirs[1]));
    assert_ne!(digest(&dirs[0]), digest(&dirs[2]));
}

#[test]
fn failed_assertion_exits_with_one_and_still_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path());
    // Large data steepen into a shock well before t_end.
    let cfg = tmp.path().join("blowup.toml");
    let text = "[solve-pde]\ngamma = 2.0\nm = 1024\nt_end = 5.0\nrho_mean = 1.0\nrho_sin = 0.2\nu_sin = 1.0\nu_cos = 0.0\n";
    std::fs::write(&cfg, text).unwrap();
    assert_eq!(run(&["solve-pde", "--config", cfg.to_str().unwrap(), "--out", &out]), 1);
    assert!(tmp.path().join("pde.csv").exists());
    assert_eq!(manifest(tmp.path())["manifest"]["status"].as_str(), Some("fail"));
}

#[test]
fn tails_and_enumerate_write_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path());
    let code = run(&["tails", "--training", "5000", "--test", "5000", "--levels", "8", "--out", &out]);
    assert!(code == 0 || code == 1);
    let csv = std::fs::read_to_string(tmp.path().join("tails.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 8);
    assert_eq!(run(&["enumerate", "--block-lens", "4,5", "--out", &out]), 0);
    let csv = std::fs::read_to_string(tmp.path().join("moments.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
    assert_eq!(run(&["enumerate", "--block-lens", "22", "--out", &out]), 2, "too large to enumerate");
}

#[test]
fn small_convergence_run_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path());
    let code = run(&["converge", "--ns", "64,128", "--replicas", "3", "--checkpoints", "0,0.05", "--threads", "2", "--out", &out]);
    assert!(code == 0 || code == 1);
    for f in ["distances.csv", "weak.csv", "summary.txt", MANIFEST_FILE] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }
    let m = manifest(tmp.path());
    assert_eq!(m["converge"]["replicas"].as_integer(), Some(3));
    assert_eq!(m["threads"].as_integer(), Some(2));
}

#[test]
fn simulate_averages_replicas_and_accepts_l() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path());
    let args = ["simulate", "--n", "64", "--l", "5", "--replicas", "3", "--t-end", "0.02", "--snapshots", "1", "--out", &out];
    assert_eq!(run(&args), 0);
    for r in 0..3 {
        assert!(tmp.path().join(format!("final-{r}.dump")).exists());
    }
    let m = manifest(tmp.path());
    assert_eq!(m["simulate"]["block_len"].as_integer(), Some(5));
    assert_eq!(m["manifest"]["outputs"].as_array().unwrap().len(), 4);
    let csv = std::fs::read_to_string(tmp.path().join("fields.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 128);
}

#[test]
fn model_files_are_accepted() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(tmp.path());
    let file = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/pm1.toml");
    assert_eq!(run(&["fluxes", "--model", file, "--grid", "6", "--out", &out]), 0);
    assert_eq!(run(&["validate", "--model", "missing.toml", "--out", &out]), 2);
}
