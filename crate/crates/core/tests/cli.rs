//! The `wa-distill` binary: exit codes, reproducibility and command
//! composition.

mod common;

use std::fs;
use std::path::Path;

use common::{cli, stdout, write_two_state, write_wa};
use nalgebra::{DMatrix, DVector};
use wa_distill::data::load_wa;
use wa_distill::{Alphabet, WeightedAutomaton};

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = cli(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    stdout(&out)
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    cli(dir, args).status.code().unwrap()
}

fn field<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("{key} missing from\n{report}"))
}

#[test]
fn extract_recovers_the_two_state_automaton() {
    let dir = tempfile::tempdir().unwrap();
    write_two_state(dir.path());
    let report = ok(
        dir.path(),
        &[
            "extract",
            "--oracle",
            "wa:two_state.wa",
            "--p",
            "50",
            "--s",
            "50",
            "--rank",
            "2",
            "--max-len",
            "6",
            "--seed",
            "7",
            "--out",
            "out.wa",
        ],
    );
    assert_eq!(field(&report, "effective_rank"), "2");
    assert_eq!(field(&report, "seed"), "7");
    let wa = load_wa(&fs::read_to_string(dir.path().join("out.wa")).unwrap()).unwrap();
    assert!((wa.evaluate(&[0]).unwrap() - 1.0 / 24.0).abs() <= 1e-8);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_two_state(d);
    fs::write(d.join("broken.wa"), "{\"alphabet_size\": 2}").unwrap();
    assert_eq!(
        code(
            d,
            &["extract", "--oracle", "wa:missing.wa", "--rank", "2", "--out", "x.wa"]
        ),
        2
    );
    assert_eq!(
        code(
            d,
            &["extract", "--oracle", "wa:broken.wa", "--rank", "2", "--out", "x.wa"]
        ),
        2
    );
    assert_eq!(
        code(
            d,
            &["extract", "--oracle", "wa:two_state.wa", "--rank", "0", "--out", "x.wa"]
        ),
        64
    );
    assert_eq!(
        code(d, &["extract", "--oracle", "nonsense", "--rank", "2", "--out", "x.wa"]),
        64
    );
    assert_eq!(
        code(d, &["extract", "--oracle", "wa:two_state.wa", "--out", "x.wa"]),
        64
    );
    assert_eq!(code(d, &["frobnicate"]), 64);
    assert_eq!(code(d, &["dot", "--wa", "missing.wa"]), 2);
    assert_eq!(
        code(
            d,
            &["sample", "--oracle", "wa:two_state.wa", "--out", "no/such/dir/s.txt"]
        ),
        2
    );
    assert_eq!(code(d, &["--help"]), 0);
    assert_eq!(code(d, &["--version"]), 0);
    // p = s = 1 on this target leaves H = [[0]]
    let degenerate = [
        "extract",
        "--oracle",
        "wa:two_state.wa",
        "--p",
        "1",
        "--s",
        "1",
        "--rank",
        "1",
        "--out",
        "x.wa",
    ];
    assert_eq!(code(d, &degenerate), 70);
}

#[test]
fn seeded_commands_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "random-wa",
            "--states",
            "4",
            "--alphabet",
            "3",
            "--seed",
            "9",
            "--out",
            "t.wa",
        ],
    );
    ok(
        d,
        &[
            "random-wa",
            "--states",
            "4",
            "--alphabet",
            "3",
            "--seed",
            "9",
            "--out",
            "t2.wa",
        ],
    );
    assert_eq!(fs::read(d.join("t.wa")).unwrap(), fs::read(d.join("t2.wa")).unwrap());
    for run in ["a", "b"] {
        let out = format!("{run}.wa");
        let report = format!("{run}.txt");
        let samples = format!("{run}.strings");
        let args = [
            "extract", "--oracle", "wa:t.wa", "--p", "40", "--s", "40", "--rank", "3", "--seed", "2",
        ];
        ok(d, &[&args[..], &["--out", &out, "--report", &report]].concat());
        ok(
            d,
            &[
                "sample", "--oracle", "wa:t.wa", "--n", "50", "--seed", "4", "--out", &samples,
            ],
        );
    }
    for ext in ["wa", "txt", "strings"] {
        assert_eq!(
            fs::read(d.join(format!("a.{ext}"))).unwrap(),
            fs::read(d.join(format!("b.{ext}"))).unwrap()
        );
    }
}

#[test]
fn seed_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_two_state(d);
    let bin = env!("CARGO_BIN_EXE_wa-distill");
    let status = std::process::Command::new(bin)
        .current_dir(d)
        .args(["sample", "--oracle", "wa:two_state.wa", "--n", "30", "--out", "env.txt"])
        .env("WA_DISTILL_SEED", "31")
        .status()
        .unwrap();
    assert!(status.success());
    ok(
        d,
        &[
            "sample",
            "--oracle",
            "wa:two_state.wa",
            "--n",
            "30",
            "--seed",
            "31",
            "--out",
            "flag.txt",
        ],
    );
    ok(
        d,
        &[
            "sample",
            "--oracle",
            "wa:two_state.wa",
            "--n",
            "30",
            "--seed",
            "32",
            "--out",
            "other.txt",
        ],
    );
    let read = |f: &str| fs::read_to_string(d.join(f)).unwrap();
    assert_eq!(read("env.txt"), read("flag.txt"));
    assert_ne!(read("env.txt"), read("other.txt"));
}

#[test]
fn sample_with_zero_strings_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    write_two_state(dir.path());
    ok(
        dir.path(),
        &["sample", "--oracle", "wa:two_state.wa", "--n", "0", "--out", "s.txt"],
    );
    assert_eq!(fs::read_to_string(dir.path().join("s.txt")).unwrap(), "0 2\n");
}

#[test]
fn evaluating_the_reference_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_two_state(d);
    ok(
        d,
        &[
            "sample",
            "--oracle",
            "wa:two_state.wa",
            "--n",
            "300",
            "--seed",
            "1",
            "--out",
            "test.txt",
        ],
    );
    let report = ok(
        d,
        &[
            "evaluate",
            "--reference",
            "wa:two_state.wa",
            "--candidate",
            "wa:two_state.wa",
            "--eval",
            "test.txt",
            "--eval-sample",
            "200",
            "--audit-zeros",
        ],
    );
    let sections: Vec<&str> = report.split("\n\n").collect();
    assert_eq!(sections.len(), 2);
    for (section, set) in sections.iter().zip(["test", "sampled"]) {
        assert_eq!(field(section, "eval_set"), set);
        assert_eq!(field(section, "perplexity_ratio"), "1");
        assert!(field(section, "kld_bits").parse::<f64>().unwrap().abs() <= 1e-12);
        assert_eq!(field(section, "ndcg5"), "1");
        assert_eq!(field(section, "ndcg1"), "1");
        assert_eq!(field(section, "wer"), "0");
        assert_eq!(field(section, "zeros_pct"), "0");
    }
}

#[test]
fn zeros_audit_agrees_with_clamping() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let one = Alphabet::new(1).unwrap();
    let geometric = WeightedAutomaton::new(
        one.clone(),
        DVector::from_element(1, 1.0),
        vec![DMatrix::from_element(1, 1, 0.5)],
        DVector::from_element(1, 0.5),
    )
    .unwrap();
    let alternating = WeightedAutomaton::new(
        one,
        DVector::from_element(1, 1.0),
        vec![DMatrix::from_element(1, 1, -0.5)],
        DVector::from_element(1, 0.5),
    )
    .unwrap();
    write_wa(d, "ref.wa", &geometric);
    write_wa(d, "cand.wa", &alternating);
    fs::write(d.join("eval.txt"), "4 1\n0\n1 0\n2 0 0\n3 0 0 0\n").unwrap();
    let report = ok(
        d,
        &[
            "evaluate",
            "--reference",
            "wa:ref.wa",
            "--candidate",
            "wa:cand.wa",
            "--eval",
            "eval.txt",
            "--audit-zeros",
        ],
    );
    assert_eq!(field(&report, "zeros_pct"), "50");
    assert_eq!(field(&report, "clamped"), "2");
    assert_eq!(field(&report, "audit_zeros"), "2/4 = 50");
}

#[test]
fn evaluation_echoes_extraction_provenance_and_appends_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_two_state(d);
    ok(
        d,
        &[
            "extract",
            "--oracle",
            "wa:two_state.wa",
            "--p",
            "30",
            "--s",
            "30",
            "--rank",
            "5",
            "--seed",
            "11",
            "--out",
            "c.wa",
            "--report",
            "r.txt",
        ],
    );
    let extraction = fs::read_to_string(d.join("r.txt")).unwrap();
    let args = [
        "evaluate",
        "--reference",
        "wa:two_state.wa",
        "--candidate",
        "wa:c.wa",
        "--provenance",
        "r.txt",
        "--problem",
        "demo",
        "--eval-sample",
        "50",
        "--csv",
        "m.csv",
    ];
    let report = ok(d, &args);
    assert_eq!(field(&report, "seed"), "11");
    assert_eq!(field(&report, "rank"), "5");
    assert_eq!(field(&report, "eff_rank"), "2");
    let basis = format!("{} {}", field(&extraction, "prefixes"), field(&extraction, "suffixes"));
    assert_eq!(field(&report, "basis"), basis);
    ok(d, &args);
    let csv = fs::read_to_string(d.join("m.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3, "header once, then one row per run");
    assert!(lines[0].starts_with("problem,p,s,rank,eff_rank,perplexity,ratio,kld,wer,ndcg1,ndcg5,zeros_pct,seed"));
    assert_eq!(lines[1], lines[2]);
    assert!(lines[1].starts_with("demo,"));
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

#[test]
fn sweep_rows_cover_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "random-wa",
            "--states",
            "5",
            "--alphabet",
            "3",
            "--seed",
            "1",
            "--out",
            "t.wa",
        ],
    );
    ok(
        d,
        &[
            "sample", "--oracle", "wa:t.wa", "--n", "100", "--seed", "6", "--out", "test.txt",
        ],
    );
    let args = [
        "sweep",
        "--oracle",
        "wa:t.wa",
        "--basis-sizes",
        "30x30,40x40",
        "--ranks",
        "1-8",
        "--seeds",
        "1,2",
        "--max-len",
        "6",
        "--eval",
        "test.txt",
        "--eval-sample",
        "100",
        "--workers",
        "2",
    ];
    let summary = ok(d, &[&args[..], &["--out", "a.csv", "--summary", "best.csv"]].concat());
    ok(d, &[&args[..], &["--out", "b.csv"]].concat());
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
    assert_eq!(fs::read_to_string(d.join("best.csv")).unwrap(), summary);

    let (header, rows) = read_csv(&d.join("a.csv"));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    assert_eq!(rows.len(), 2 * 8 * 2 * 2);
    let ranks: std::collections::BTreeSet<usize> = rows.iter().map(|r| r[col("rank")].parse().unwrap()).collect();
    assert_eq!(ranks.into_iter().collect::<Vec<_>>(), (1..=8).collect::<Vec<_>>());
    assert!(rows.iter().all(|r| r[col("status")] == "ok"));

    let best: Vec<Vec<String>> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(best.len(), 4);
    for b in best.iter().filter(|b| b[1] == "ndcg5") {
        let best_ndcg: f64 = b[8].parse().unwrap();
        for r in rows.iter().filter(|r| r[col("eval_set")] == b[0]) {
            assert!(best_ndcg >= r[col("ndcg5")].parse::<f64>().unwrap());
        }
    }
}

#[test]
fn failing_cells_become_error_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_two_state(d);
    // a 1x1 basis gives H = [[0]], so every rank in that group fails
    let out = cli(
        d,
        &[
            "sweep",
            "--oracle",
            "wa:two_state.wa",
            "--basis-sizes",
            "1x1,30x30",
            "--ranks",
            "1-3",
            "--eval-sample",
            "50",
            "--out",
            "s.csv",
        ],
    );
    assert!(out.status.success());
    let (header, rows) = read_csv(&d.join("s.csv"));
    let status = header.iter().position(|h| h == "status").unwrap();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows.iter().filter(|r| r[status].starts_with("error")).count(), 3);
}

#[test]
fn one_cell_sweep_equals_extract_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "random-wa",
            "--states",
            "4",
            "--alphabet",
            "2",
            "--seed",
            "3",
            "--out",
            "t.wa",
        ],
    );
    ok(
        d,
        &[
            "sweep",
            "--oracle",
            "wa:t.wa",
            "--basis-sizes",
            "40x40",
            "--ranks",
            "3",
            "--seeds",
            "8",
            "--problem",
            "p",
            "--eval-sample",
            "150",
            "--seed",
            "5",
            "--out",
            "sweep.csv",
        ],
    );
    ok(
        d,
        &[
            "extract", "--oracle", "wa:t.wa", "--p", "40", "--s", "40", "--rank", "3", "--seed", "8", "--out", "c.wa",
            "--report", "r.txt",
        ],
    );
    ok(
        d,
        &[
            "evaluate",
            "--reference",
            "wa:t.wa",
            "--candidate",
            "wa:c.wa",
            "--provenance",
            "r.txt",
            "--problem",
            "p",
            "--eval-sample",
            "150",
            "--seed",
            "5",
            "--csv",
            "eval.csv",
        ],
    );
    assert_eq!(read_csv(&d.join("sweep.csv")), read_csv(&d.join("eval.csv")));
}

#[test]
fn dot_threshold_filters_small_weights() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let wa = WeightedAutomaton::new(
        Alphabet::new(1).unwrap(),
        DVector::from_vec(vec![1.0, 0.0]),
        vec![DMatrix::from_row_slice(2, 2, &[0.5, 0.01, 0.0, 0.3])],
        DVector::from_vec(vec![0.2, 0.7]),
    )
    .unwrap();
    write_wa(d, "small.wa", &wa);
    let default = ok(d, &["dot", "--wa", "small.wa"]);
    assert_eq!(default.matches("->").count(), 2);
    assert!(!default.contains("0:0.01"));
    ok(d, &["dot", "--wa", "small.wa", "--threshold", "0", "--out", "all.dot"]);
    let all = fs::read_to_string(d.join("all.dot")).unwrap();
    assert_eq!(all.matches("->").count(), 3);
    assert!(all.contains("q0 -> q1 [label=\"0:0.01\"]"), "{all}");
}
