//! End-to-end tests of the command-line surface: file layout, exit codes,
//! overrides and manifest round-trips.

use svnet::cli::main_with_args;
use svnet::config::{parse_config, resolve, spec_from_manifest};
use svnet::topology::{CombinationMatrix, NetworkTopology};

const SMALL_CONFIG: &str = r#"
    iterations = 60
    runs = 2
    master_seed = 5

    [topology]
    nodes = 6
    target_degree = 2

    [plant]
    memory_length = 3
    active_count = 2

    [[algorithms]]
    family = "dlms"
    mu = 0.02

    [[algorithms]]
    family = "dlmls"
    mu = 0.02
    delta = 2.0
    l0 = true
    rho = 1e-4
"#;

fn write_config(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("exp.toml");
    std::fs::write(&path, SMALL_CONFIG).unwrap();
    path
}

#[test]
fn run_writes_csv_manifest_and_network_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("results");
    let code = main_with_args([
        "svnet",
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    for name in ["dlms", "dlmls-l0"] {
        let csv = std::fs::read_to_string(out.join(format!("{name}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "iteration,nmsd_linear,nmsd_db");
        assert_eq!(lines.count(), 60);
        assert!(out.join(format!("{name}.manifest")).exists());
    }

    let topo =
        NetworkTopology::from_text(&std::fs::read_to_string(out.join("topology.txt")).unwrap())
            .unwrap();
    assert_eq!(topo.node_count(), 6);
    let weights =
        CombinationMatrix::from_text(&std::fs::read_to_string(out.join("weights.txt")).unwrap())
            .unwrap();
    weights.validate_for(&topo).unwrap();
}

#[test]
fn missing_config_exits_2_and_names_the_path() {
    let code = main_with_args(["svnet", "run", "--config", "/nonexistent/exp.toml"]);
    assert_eq!(code, 2);
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "unknown_key = 1\n[[algorithms]]\nfamily = \"dlms\"\nmu = 0.1",
    )
    .unwrap();
    let code = main_with_args(["svnet", "run", "--config", path.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn numeric_blowup_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("boom");
    let code = main_with_args([
        "svnet",
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "algorithms.0.mu=1e150",
    ]);
    assert_eq!(code, 3);
}

#[test]
fn set_override_is_recorded_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("results");
    let code = main_with_args([
        "svnet",
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "runs=1",
        "--seed",
        "77",
    ]);
    assert_eq!(code, 0);
    let manifest = std::fs::read_to_string(out.join("dlms.manifest")).unwrap();
    let spec = spec_from_manifest(&manifest).unwrap();
    assert_eq!(spec.runs, 1);
    assert_eq!(spec.master_seed, 77);
}

#[test]
fn manifest_matches_resolved_spec_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("results");
    assert_eq!(
        main_with_args([
            "svnet",
            "run",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]),
        0
    );
    let resolved = resolve(&parse_config(SMALL_CONFIG).unwrap()).unwrap();
    for (name, spec) in &resolved.variants {
        let manifest = std::fs::read_to_string(out.join(format!("{name}.manifest"))).unwrap();
        assert_eq!(&spec_from_manifest(&manifest).unwrap(), spec);
    }
}

#[test]
fn verify_exits_0() {
    assert_eq!(main_with_args(["svnet", "verify"]), 0);
}

#[test]
fn figures_with_custom_config_writes_combined_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("figs");
    let code = main_with_args([
        "svnet",
        "figures",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(out.join("exp.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "iteration,dlms,dlmls-l0");
    assert_eq!(lines.count(), 60);
    assert!(out.join("exp.dlms.manifest").exists());
}
