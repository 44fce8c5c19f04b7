//! End-to-end runs of the `stpat` binary: files in, files out, pinned exit
//! codes and console blocks. Every test works in its own directory under
//! the cargo tmpdir and passes relative paths, the way a user would.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dir(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stpat"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary spawns")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run_in(dir, args);
    assert!(
        out.status.success(),
        "stpat {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn repeated_sim_runs_are_byte_identical() {
    let a = dir("sim-repeat-a");
    let b = dir("sim-repeat-b");
    for d in [&a, &b] {
        ok(d, &["sim", "--model", "poisson", "--lambda", "200", "--seed", "7", "--out", "a.csv"]);
    }
    assert_eq!(read(&a, "a.csv"), read(&b, "a.csv"));
    assert_eq!(read(&a, "a.runconfig.txt"), read(&b, "a.runconfig.txt"));
}

#[test]
fn sidecar_reruns_reproduce_the_artifact() {
    let d = dir("sidecar-rerun");
    ok(&d, &["sim", "--lambda", "150", "--seed", "3", "--out", "a.csv"]);
    let original = read(&d, "a.csv");
    fs::remove_file(d.join("a.csv")).unwrap();
    ok(&d, &["sim", "--config", "a.runconfig.txt"]);
    assert_eq!(read(&d, "a.csv"), original);
}

#[test]
fn explicit_flags_override_config_entries() {
    let d = dir("config-precedence");
    fs::write(d.join("cfg.txt"), "lambda=80\nseed=5\nout=from_config.csv\n").unwrap();
    ok(&d, &["sim", "--config", "cfg.txt"]);
    ok(&d, &["sim", "--lambda", "80", "--seed", "5", "--out", "direct.csv"]);
    assert_eq!(read(&d, "from_config.csv"), read(&d, "direct.csv"));

    ok(&d, &["sim", "--config", "cfg.txt", "--seed", "6", "--out", "overridden.csv"]);
    assert_ne!(read(&d, "overridden.csv"), read(&d, "direct.csv"));
}

#[test]
fn summary_prints_the_enclosing_block() {
    let d = dir("summary-block");
    fs::write(d.join("p.csv"), "x,y,t\n0.25,0.1,0.2\n0.75,0.9,0.4\n0.5,0.5,0.3\n").unwrap();
    let out = ok(&d, &["summary", "--pattern", "p.csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "Spatio-temporal point pattern\n\
         3 points\n\
         Enclosing window: rectangle = [0.25, 0.75] x [0.1, 0.9] units\n\
         Time period: [0.2, 0.4]\n"
    );
}

#[test]
fn usage_errors_exit_with_code_2() {
    let d = dir("usage-error");
    let out = run_in(&d, &["k", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run_in(&d, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computational_errors_exit_1_with_machine_readable_stderr() {
    let d = dir("comp-error");
    fs::write(d.join("one.csv"), "x,y,t\n0.5,0.5,0.5\n").unwrap();
    let out = run_in(
        &d,
        &["k", "--pattern", "one.csv", "--window", "0,1,0,1", "--time", "0,1", "--out", "k.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr is one JSON object");
    assert_eq!(err["error"], "TooFewPoints");
    assert!(err["message"].as_str().unwrap().contains("at least 2"));
}

#[test]
fn thread_count_never_changes_the_outputs() {
    let one = dir("threads-one");
    let four = dir("threads-four");
    for (d, n) in [(&one, "1"), (&four, "4")] {
        ok(d, &["sim", "--lambda", "180", "--seed", "13", "--out", "p.csv"]);
        ok(
            d,
            &[
                "--threads", n, "diag", "--pattern", "p.csv", "--mode", "local", "--grid",
                "0.25,0.25,10", "--out", "d.json",
            ],
        );
        ok(d, &["--threads", n, "k", "--pattern", "p.csv", "--lambda", "auto", "--out", "k.csv"]);
    }
    assert_eq!(read(&one, "d.json"), read(&four, "d.json"));
    assert_eq!(read(&one, "d_infl.csv"), read(&four, "d_infl.csv"));
    assert_eq!(read(&one, "k.csv"), read(&four, "k.csv"));
}

#[test]
fn k_writes_the_surface_table_and_a_three_panel_figure() {
    let d = dir("k-outputs");
    ok(&d, &["sim", "--lambda", "120", "--seed", "2", "--out", "p.csv"]);
    ok(&d, &["k", "--pattern", "p.csv", "--scaled", "--out", "k.csv", "--plot", "k.svg"]);
    let table = String::from_utf8(read(&d, "k.csv")).unwrap();
    assert!(table.starts_with("r,h,value,theo\n"));
    assert_eq!(table.lines().count(), 1 + 20 * 20);
    let svg = String::from_utf8(read(&d, "k.svg")).unwrap();
    for title in ["estimated", "theoretical", "difference"] {
        assert!(svg.contains(title), "panel `{title}` missing");
    }
}

#[test]
fn empty_pattern_summary_still_plots_a_placeholder() {
    let d = dir("empty-placeholder");
    fs::write(d.join("none.csv"), "x,y,t\n").unwrap();
    ok(
        &d,
        &[
            "summary", "--pattern", "none.csv", "--window", "0,1,0,1", "--time", "0,1", "--plot",
            "none.svg",
        ],
    );
    let svg = String::from_utf8(read(&d, "none.svg")).unwrap();
    assert!(svg.contains("no points"));
    assert!(!svg.contains("<circle"));
}

#[test]
fn network_pipeline_runs_end_to_end() {
    let d = dir("network-pipeline");
    fs::write(d.join("net.csv"), "0,0,1,0\n1,0,1,1\n1,1,0,1\n").unwrap();
    ok(
        &d,
        &["sim", "--lambda", "60", "--network", "net.csv", "--seed", "5", "--out", "n.csv"],
    );
    let out = ok(&d, &["summary", "--pattern", "n.csv", "--network", "net.csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("on a linear network"));
    assert!(text.contains("Linear network: 4 vertices, 3 segments"));

    ok(
        &d,
        &[
            "lista", "--pattern", "n.csv", "--network", "net.csv", "--normalize", "--grid",
            "0.5,0.25,8", "--out", "l.csv",
        ],
    );
    let table = String::from_utf8(read(&d, "l.csv")).unwrap();
    assert!(table.starts_with("point,r,h,value\n"));

    let out = ok(
        &d,
        &[
            "diag", "--pattern", "n.csv", "--network", "net.csv", "--grid", "0.4,0.25,8",
            "--out", "g.json",
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("[1] \"Sum of squared differences =  "));
}

#[test]
fn localtest_prints_its_block_and_flags_points() {
    let d = dir("localtest-outputs");
    ok(&d, &["sim", "--lambda", "70", "--seed", "11", "--out", "x.csv"]);
    ok(&d, &["sim", "--lambda", "70", "--seed", "12", "--out", "z.csv"]);
    let out = ok(
        &d,
        &[
            "localtest", "--background", "x.csv", "--alternative", "z.csv", "--window",
            "0,1,0,1", "--time", "0,1", "--k", "9", "--seed", "3", "--out", "t.json", "--plot",
            "t.svg",
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Test for local differences between two\nspatio-temporal point patterns"));
    assert!(text.contains("significant points at alpha = 0.05"));

    let json: serde_json::Value = serde_json::from_slice(&read(&d, "t.json")).unwrap();
    let n = json["p_values"].as_array().unwrap().len();
    assert!(n > 0);
    assert!(d.join("t.svg").exists());
}

#[test]
fn fit_blocks_follow_the_model_kind() {
    let d = dir("fit-blocks");
    ok(&d, &["sim", "--lambda", "130", "--seed", "21", "--out", "p.csv"]);

    let out = ok(&d, &["fit", "--pattern", "p.csv", "--model", "poisson"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Homogeneous Poisson process\nwith Intensity: "));

    let out = ok(&d, &["fit", "--pattern", "p.csv", "--model", "poisson", "--formula", "~x"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Inhomogeneous Poisson process\nwith Trend: ~x"));
    assert!(text.contains("(Intercept)"));

    let out = ok(
        &d,
        &[
            "fit", "--pattern", "p.csv", "--model", "sep", "--formula", "~x", "--time-formula",
            "~t", "--out", "s.json",
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Separable Poisson process"));
    assert!(text.contains("space:(Intercept)"));
    let json: serde_json::Value = serde_json::from_slice(&read(&d, "s.json")).unwrap();
    assert_eq!(json["kind"], "Separable");
    assert!(d.join("s_points.csv").exists());
}

#[test]
fn local_fit_writes_per_point_tables() {
    let d = dir("fit-local-tables");
    ok(&d, &["sim", "--lambda", "90", "--seed", "31", "--out", "p.csv"]);
    ok(
        &d,
        &[
            "fit", "--pattern", "p.csv", "--model", "locpoisson", "--formula", "~x", "--out",
            "f.json",
        ],
    );
    let table = String::from_utf8(read(&d, "f_points.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("x,y,t,fitted,converged,(Intercept),x"));
    let rows = lines.count();
    let json: serde_json::Value = serde_json::from_slice(&read(&d, "f.json")).unwrap();
    assert_eq!(rows, json["n_data"].as_u64().unwrap() as usize);
}
