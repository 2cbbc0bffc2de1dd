use std::path::Path;
use std::process::{Command, Output};

fn affdim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_affdim"))
        .args(args)
        .current_dir(dir)
        .env_remove("AFFDIM_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn report(path: &Path) -> toml::Table {
    std::fs::read_to_string(path).unwrap().parse().unwrap()
}

fn float(t: &toml::Table, section: &str, key: &str) -> f64 {
    let v = if section.is_empty() { &t[key] } else { &t[section][key] };
    v.as_float().unwrap_or_else(|| panic!("{section}.{key} = {v}"))
}

#[test]
fn sval_closed_forms_from_matrix_files() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("e1.txt"), "1\n1\n").unwrap();
    std::fs::write(tmp.path().join("d05.txt"), "# D\n1\n0.5\n").unwrap();
    let out = affdim(tmp.path(), &["sval", "--E", "e1.txt", "--D", "d05.txt"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("sval.toml"));
    assert_eq!(float(&r, "graph", "s"), 1.5);
    assert_eq!(float(&r, "range", "s"), 1.0);
    assert_eq!(float(&r, "c_invariance", "closed_graph_spread"), 0.0);
}

#[test]
fn sval_direct_saturated() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("w.txt"), "2\n0.6 0\n0 0.6\n").unwrap();
    let out = affdim(tmp.path(), &["sval", "--W", "w.txt", "--x", "0.36"]);
    assert_eq!(code(&out), 0);
    let r = report(&tmp.path().join("sval.toml"));
    assert_eq!(float(&r, "numeric", "s"), 2.0);
    assert_eq!(r["numeric"]["case"].as_str(), Some("saturated"));
}

#[test]
fn sval_rotation_numeric_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = affdim(tmp.path(), &["sval", "--E", "1", "--D", "0.6,-0.3;0.3,0.6", "--numeric"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("sval.toml"));
    assert!((float(&r, "graph", "s") - 5.0 / 3.0).abs() < 1e-12);
    assert!((float(&r, "graph_numeric", "s") - 5.0 / 3.0).abs() < 1e-4);
    assert_eq!(r["consistent"].as_bool(), Some(true));
}

#[test]
fn dim_family_examples() {
    let tmp = tempfile::tempdir().unwrap();
    for (args, graph, range) in [
        (vec!["dim", "--family", "levy", "--lambda", "0.5"], 1.5, 1.0),
        (vec!["dim", "--family", "oss-stable", "--a", "1.5,2", "--lambda", "0.5,0.7"], 3.4, 2.0),
        (vec!["dim", "--family", "levy", "--lambda", "0.5", "--mult", "2"], 2.0, 2.0),
    ] {
        let out = affdim(tmp.path(), &args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let r = report(&tmp.path().join("dim.toml"));
        assert!((float(&r, "graph", "value") - graph).abs() < 1e-12, "{args:?}");
        assert!((float(&r, "range", "value") - range).abs() < 1e-12, "{args:?}");
        assert!(r["identities"].as_table().unwrap().values().all(|v| v.as_str() != Some("fail")));
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    // Domain: D not contracting.
    assert_eq!(code(&affdim(tmp.path(), &["sval", "--E", "1", "--D", "-0.5"])), 2);
    // Input: missing file and not an inline matrix.
    assert_eq!(code(&affdim(tmp.path(), &["sval", "--E", "nope.txt", "--D", "0.5"])), 2);
    // Usage error from the parser.
    assert_eq!(code(&affdim(tmp.path(), &["sval", "--x", "0.5"])), 2);
    // Numeric: a residual tolerance no floating-point root can meet.
    let out = affdim(tmp.path(), &["sval", "--W", "0.5,0.3;0,0.7", "--x", "0.5", "--tol", "1e-300"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_then_boxcount_graph_of_brownian_motion() {
    let tmp = tempfile::tempdir().unwrap();
    let out = affdim(tmp.path(), &["simulate", "--model", "ofbm", "--H", "0.5", "--n", "65536", "--seed", "7"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("paths/path_00000.csv").is_file());
    assert!(tmp.path().join("paths/path_00000.csv.meta.toml").is_file());
    let out = affdim(tmp.path(), &["estimate", "boxcount", "--kind", "graph"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("paths/boxcount.toml"));
    let slope = float(&r, "", "mean_slope");
    assert!((slope - 1.5).abs() <= 0.15, "{slope}");
    let csv = std::fs::read_to_string(tmp.path().join("paths/boxcount.csv")).unwrap();
    assert!(csv.starts_with("replica,level,scale,count\n"));
}

#[test]
fn energy_at_gamma_zero_is_one() {
    let tmp = tempfile::tempdir().unwrap();
    affdim(tmp.path(), &["simulate", "--model", "levy", "--alpha", "1.5,1.8", "--n", "512", "--replicas", "2"]);
    for kind in ["graph", "range"] {
        let out = affdim(tmp.path(), &["estimate", "energy", "--gamma", "0", "--kind", kind, "--budget", "1000"]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let r = report(&tmp.path().join("paths/energy.toml"));
        assert_eq!(float(&r, "gamma_0", "mean"), 1.0);
    }
}

#[test]
fn energy_scan_and_histogram_reports() {
    let tmp = tempfile::tempdir().unwrap();
    affdim(tmp.path(), &["simulate", "--model", "ofbm", "--H", "0.5", "--n", "1024", "--replicas", "2", "--seed", "1"]);
    let out = affdim(tmp.path(), &["estimate", "energy", "--gamma", "0,0.5,1.9", "--refinements", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("paths/energy.toml"));
    assert_eq!(r["gamma_0"]["divergent"].as_bool(), Some(false));
    assert_eq!(r["gamma_1_9"]["divergent"].as_bool(), Some(true));

    let out = affdim(tmp.path(), &["estimate", "histogram", "--kind", "range", "--bounds=-1:1", "--cells", "10"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("paths/histogram.toml"));
    assert_eq!(r["mass_conserved"].as_bool(), Some(true));
    assert_eq!(r["points"].as_integer(), Some(2048));
    let csv = std::fs::read_to_string(tmp.path().join("paths/histogram.csv")).unwrap();
    let mass: f64 = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((mass + float(&r, "", "overflow_mass") - 1.0).abs() < 1e-12);
}

#[test]
fn verify_scaling_passes_for_true_exponent_and_breaches_for_wrong_one() {
    let tmp = tempfile::tempdir().unwrap();
    let sim = ["simulate", "--model", "ofbm", "--H", "0.5", "--n", "256", "--replicas", "1000", "--seed", "11"];
    assert_eq!(code(&affdim(tmp.path(), &sim)), 0);
    let out = affdim(tmp.path(), &["verify", "scaling", "--c", "0.5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let out = affdim(tmp.path(), &["verify", "scaling", "--c", "0.015625", "--D", "0.7"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&tmp.path().join("paths/verify_scaling.toml"));
    assert_eq!(r["pass"].as_bool(), Some(false));
}

#[test]
fn density_probe_reports_brownian_peak() {
    let tmp = tempfile::tempdir().unwrap();
    let out = affdim(tmp.path(), &["estimate", "density", "--model", "ofbm", "--H", "0.5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("density.toml"));
    assert!((float(&r, "", "max_density") - std::f64::consts::PI.powf(-0.5)).abs() < 0.05);
    assert_eq!(r["heuristic"].as_bool(), Some(true));
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    affdim(tmp.path(), &["simulate", "--model", "ofbm", "--H", "0.5", "--n", "256"]);
    std::fs::write(
        tmp.path().join("run.toml"),
        "threads = 2\n[estimate.energy]\ngamma = [0.5, 1.0]\nbudget = 5000\nseed = 3\n",
    )
    .unwrap();
    let out = affdim(tmp.path(), &["--config", "run.toml", "estimate", "energy", "--budget", "4000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&tmp.path().join("paths/energy.toml"));
    assert_eq!(r["budget"].as_integer(), Some(4000));
    assert_eq!(r["seed"].as_str(), Some("3"));
    assert_eq!(r["gamma"].as_array().unwrap().len(), 2);
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let run = |threads: &str| {
        let tmp = tempfile::tempdir().unwrap();
        let sim = [
            "--threads",
            threads,
            "simulate",
            "--model",
            "ofbm",
            "--H",
            "0.7",
            "--n",
            "1024",
            "--replicas",
            "4",
            "--seed",
            "5",
        ];
        assert_eq!(code(&affdim(tmp.path(), &sim)), 0);
        let est =
            ["--threads", threads, "estimate", "energy", "--gamma", "0.5,1.2", "--budget", "200000", "--seed", "9"];
        assert_eq!(code(&affdim(tmp.path(), &est)), 0);
        let bc = ["--threads", threads, "estimate", "boxcount"];
        assert_eq!(code(&affdim(tmp.path(), &bc)), 0);
        ["path_00003.csv", "energy.toml", "boxcount.toml", "simulate.toml"]
            .map(|f| std::fs::read(tmp.path().join("paths").join(f)).unwrap())
    };
    assert_eq!(run("1"), run("4"));
}
