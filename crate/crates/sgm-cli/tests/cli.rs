//! Black-box tests of the `sgm` binary: exit codes, CSV output, and the
//! emitted-trial round trip.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sgm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Parse CSV produced by the binary. No label in these tests needs quoting,
/// so a comma split is faithful.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|line| line.split(',').map(str::to_owned).collect())
        .collect()
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

#[test]
fn match_pins_seeds_and_recovers_the_rest_of_a_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let cycle = "\
v0 v1\nv1 v0\nv1 v2\nv2 v1\nv2 v3\nv3 v2\n\
v3 v4\nv4 v3\nv4 v5\nv5 v4\nv5 v0\nv0 v5\n";
    let g1 = dir.path().join("g1.edges");
    let g2 = dir.path().join("g2.edges");
    let seeds = dir.path().join("pairs");
    write(&g1, cycle);
    write(&g2, cycle);
    write(&seeds, "v0 v0\nv1 v1\nv2 v2\nv3 v3\n");
    let out = sgm(&[
        "match",
        "--g1",
        g1.to_str().unwrap(),
        "--g2",
        g2.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let table = rows(&stdout(&out));
    assert_eq!(table[0][0], "kind");
    let mapping: Vec<&Vec<String>> = table.iter().filter(|r| r[0] == "mapping").collect();
    assert_eq!(mapping.len(), 6);
    for row in &mapping {
        assert_eq!(row[1], row[2], "vertex {} mapped to {}", row[1], row[2]);
    }
    let seeded: Vec<&str> = mapping
        .iter()
        .filter(|r| r[3] == "true")
        .map(|r| r[1].as_str())
        .collect();
    assert_eq!(seeded, ["v0", "v1", "v2", "v3"]);
    let summary = table.iter().find(|r| r[0] == "summary").unwrap();
    assert_eq!(summary[5], "0", "disagreements");
    assert_eq!(summary[7], "true", "converged");
}

#[test]
fn match_rejects_graphs_of_different_order() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = dir.path().join("g1.edges");
    let g2 = dir.path().join("g2.edges");
    write(&g1, "a b\nb c\n");
    write(&g2, "a b\nb c\nc d\n");
    let out = sgm(&[
        "match",
        "--g1",
        g1.to_str().unwrap(),
        "--g2",
        g2.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let msg = stderr(&out);
    assert!(msg.contains("3") && msg.contains("4"), "stderr: {msg}");
}

#[test]
fn match_reports_the_offending_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = dir.path().join("broken.edges");
    let g2 = dir.path().join("g2.edges");
    write(&g1, "a b\na b notanumber\n");
    write(&g2, "a b\n");
    let out = sgm(&[
        "match",
        "--g1",
        g1.to_str().unwrap(),
        "--g2",
        g2.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let msg = stderr(&out);
    assert!(msg.contains("broken.edges"), "stderr: {msg}");
    assert!(msg.contains("line 2"), "stderr: {msg}");
}

#[test]
fn match_rejects_seed_labels_missing_from_a_graph() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.edges");
    let seeds = dir.path().join("pairs");
    write(&g, "a b\nb c\n");
    write(&seeds, "zz a\n");
    let out = sgm(&[
        "match",
        "--g1",
        g.to_str().unwrap(),
        "--g2",
        g.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("zz"), "stderr: {}", stderr(&out));
}

#[test]
fn match_requires_both_graph_flags() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.edges");
    write(&g, "a b\n");
    let out = sgm(&["match", "--g1", g.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn preprocessing_flags_let_nonisomorphic_digraphs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = dir.path().join("g1.edges");
    let g2 = dir.path().join("g2.edges");
    // An out-star and an in-star: no digraph isomorphism exists, but the
    // underlying undirected graphs coincide.
    write(&g1, "a b 5\na c 2\n");
    write(&g2, "b a 7\nc a 1\n");
    let base = [
        "match",
        "--g1",
        g1.to_str().unwrap(),
        "--g2",
        g2.to_str().unwrap(),
    ];
    let raw = sgm(&base);
    assert_eq!(code(&raw), 0, "stderr: {}", stderr(&raw));
    let raw_summary = rows(&stdout(&raw))
        .into_iter()
        .find(|r| r[0] == "summary")
        .unwrap();
    let raw_disagreements: usize = raw_summary[5].parse().unwrap();
    assert!(raw_disagreements > 0, "directed stars cannot fully agree");

    let mut flagged_args = base.to_vec();
    flagged_args.extend(["--binarize", "--symmetrize"]);
    let flagged = sgm(&flagged_args);
    assert_eq!(code(&flagged), 0, "stderr: {}", stderr(&flagged));
    let summary = rows(&stdout(&flagged))
        .into_iter()
        .find(|r| r[0] == "summary")
        .unwrap();
    assert_eq!(summary[5], "0", "disagreements after preprocessing");
}

#[test]
fn simulate_zero_noise_hits_ratio_one_on_every_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = sgm(&[
        "simulate",
        "--c",
        "50",
        "--rho",
        "0",
        "--m-values",
        "0",
        "--trials",
        "3",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let table = rows(&fs::read_to_string(&csv).unwrap());
    assert_eq!(
        table[0],
        [
            "rho",
            "m",
            "trial",
            "match_ratio",
            "chance",
            "disagreements",
            "iterations",
            "runtime_millis"
        ]
    );
    assert_eq!(table.len(), 4);
    for row in &table[1..] {
        assert_eq!(row[0].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[3].parse::<f64>().unwrap(), 1.0);
        assert_eq!(row[4].parse::<f64>().unwrap(), 0.02);
        assert_eq!(row[5], "0");
    }
}

#[test]
fn simulate_rejects_zero_trials() {
    let out = sgm(&["simulate", "--c", "10", "--m-values", "0", "--trials", "0"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("trials"), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_rejects_zero_jobs() {
    let out = sgm(&["simulate", "--c", "10", "--trials", "1", "--jobs", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulate_replays_identically_except_runtime() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| -> Vec<Vec<String>> {
        let csv = dir.path().join(name);
        let out = sgm(&[
            "simulate",
            "--c",
            "30",
            "--rho",
            "0.2",
            "--m-values",
            "0,5",
            "--trials",
            "2",
            "--rng-seed",
            "7",
            "--out",
            csv.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        rows(&fs::read_to_string(&csv).unwrap())
    };
    let first = run("a.csv");
    let second = run("b.csv");
    assert_eq!(first.len(), second.len());
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a[..7], b[..7], "columns before runtime_millis");
    }
}

#[test]
fn simulate_orders_rows_by_rho_then_seed_count() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("grid.csv");
    let out = sgm(&[
        "simulate",
        "--c",
        "15",
        "--rho",
        "0.3",
        "--rho",
        "0.1",
        "--m-values",
        "0:4:2",
        "--trials",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let table = rows(&fs::read_to_string(&csv).unwrap());
    let cells: Vec<(String, String)> = table[1..]
        .iter()
        .map(|r| (r[0].clone(), r[1].clone()))
        .collect();
    let want = [
        ("0.1", "0"),
        ("0.1", "2"),
        ("0.1", "4"),
        ("0.3", "0"),
        ("0.3", "2"),
        ("0.3", "4"),
    ];
    let want: Vec<(String, String)> = want
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(cells, want);
}

#[test]
fn emitted_trials_rematch_to_the_logged_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let emit = dir.path().join("artifacts");
    let csv = dir.path().join("sweep.csv");
    let out = sgm(&[
        "simulate",
        "--c",
        "20",
        "--rho",
        "0.2",
        "--m-values",
        "5",
        "--trials",
        "1",
        "--emit-graphs",
        emit.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let stem = "rho0.2_m005_t000";
    let g1 = emit.join(format!("{stem}.g1.edges"));
    let g2 = emit.join(format!("{stem}.g2.edges"));
    let seeds = emit.join(format!("{stem}.seeds"));
    let truth_path = emit.join(format!("{stem}.truth"));
    for path in [&g1, &g2, &seeds, &truth_path] {
        assert!(path.exists(), "{} missing", path.display());
    }

    let parse_pairs = |path: &Path| -> Vec<(String, String)> {
        fs::read_to_string(path)
            .unwrap()
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .map(|l| {
                let mut it = l.split_whitespace();
                (it.next().unwrap().into(), it.next().unwrap().into())
            })
            .collect()
    };
    let truth: HashMap<String, String> = parse_pairs(&truth_path).into_iter().collect();
    let seed_pairs = parse_pairs(&seeds);
    assert_eq!(truth.len(), 20);
    assert_eq!(seed_pairs.len(), 5);
    let seeded: HashSet<&String> = seed_pairs.iter().map(|(u, _)| u).collect();

    let rematch = sgm(&[
        "match",
        "--g1",
        g1.to_str().unwrap(),
        "--g2",
        g2.to_str().unwrap(),
        "--seeds",
        seeds.to_str().unwrap(),
    ]);
    assert_eq!(code(&rematch), 0, "stderr: {}", stderr(&rematch));
    let table = rows(&stdout(&rematch));
    let mut correct = 0usize;
    let mut nonseeds = 0usize;
    for row in table.iter().filter(|r| r[0] == "mapping") {
        assert_eq!(row[3] == "true", seeded.contains(&row[1]));
        if !seeded.contains(&row[1]) {
            nonseeds += 1;
            if truth[&row[1]] == row[2] {
                correct += 1;
            }
        }
    }
    assert_eq!(nonseeds, 15);
    let recomputed = correct as f64 / nonseeds as f64;

    let sweep = rows(&fs::read_to_string(&csv).unwrap());
    assert_eq!(sweep.len(), 2);
    let logged: f64 = sweep[1][3].parse().unwrap();
    assert_eq!(recomputed, logged, "rematch of emitted files disagrees");

    let match_summary = table.iter().find(|r| r[0] == "summary").unwrap();
    assert_eq!(match_summary[5], sweep[1][5], "disagreements");
}

#[test]
fn both_subcommands_default_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.edges");
    write(&g, "a b\nb a\n");
    let matched = sgm(&[
        "match",
        "--g1",
        g.to_str().unwrap(),
        "--g2",
        g.to_str().unwrap(),
    ]);
    assert_eq!(code(&matched), 0);
    assert!(stdout(&matched).starts_with("kind,label1,label2"));

    let sim = sgm(&[
        "simulate",
        "--c",
        "10",
        "--rho",
        "0",
        "--m-values",
        "0",
        "--trials",
        "1",
    ]);
    assert_eq!(code(&sim), 0);
    assert!(stdout(&sim).starts_with("rho,m,trial"));
}
