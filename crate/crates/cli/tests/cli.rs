use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn seqrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqrank")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = seqrank(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn values(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("depth"))
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sra_on_worked_example() {
    let out = ok(&["sra", path(&data("example.csv")), "--seed", "1"]);
    let v = values(&out);
    assert_eq!(v.len(), 5);
    assert!((v[4][0] - 1.0954451).abs() < 1e-7);
    assert!(out.contains("# seed: 1\n") && out.contains("# B: 1000\n"));
}

#[test]
fn sra_mad_metric() {
    let v = values(&ok(&["sra", path(&data("example.csv")), "--metric", "mad", "--seed", "1"]));
    let want = [0.5f64.sqrt(), (2.0f64 / 3.0).sqrt(), 0.6f64.sqrt(), 0.6f64.sqrt(), 0.6f64.sqrt()];
    assert_eq!(v.len(), 5);
    for (row, w) in v.iter().zip(want) {
        assert!((row[0] - w).abs() < 1e-12);
    }
}

#[test]
fn seed_is_echoed_when_drawn_from_entropy() {
    let out = ok(&["sra", path(&data("example.csv"))]);
    assert!(out.lines().any(|l| l.starts_with("# seed: ")));
}

#[test]
fn censored_input_needs_universe_size() {
    let out = seqrank(&["sra", path(&data("example_top2.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let fixed = ok(&["sra", path(&data("example_top2.csv")), "--universe-size", "5", "--B", "50", "--seed", "4"]);
    assert!(fixed.contains("# flagged_depths: 3-5\n"));
}

#[test]
fn json_output_carries_metadata() {
    let out = ok(&["sra", path(&data("example.csv")), "--seed", "9", "--format", "json-like-record"]);
    assert!(out.trim_start().starts_with('{'));
    for key in ["\"seed\": 9", "\"B\": 1000", "\"metric\": \"sd\"", "\"flagged_depths\": []"] {
        assert!(out.contains(key), "{key} missing");
    }
}

#[test]
fn overlap_examples() {
    let ao = values(&ok(&["overlap", path(&data("example.csv"))]));
    assert!((ao[4][0] - 0.5166667).abs() < 1e-7);
    let ident = values(&ok(&["overlap", path(&data("identical.csv"))]));
    assert!(ident.iter().all(|r| r[0] == 1.0));
    let pair = values(&ok(&["overlap", path(&data("example_pair.csv"))]));
    // pairwise overlaps of lists 1 and 2: 1, 1/2, 2/3, 1, 1
    let pointwise = [1.0, 0.5, 2.0 / 3.0, 1.0, 1.0];
    let mut running = 0.0;
    for (d, (row, o)) in pair.iter().zip(pointwise).enumerate() {
        running += o;
        let w = running / (d + 1) as f64;
        assert!((row[0] - w).abs() < 1e-12, "{} vs {w}", row[0]);
    }
}

#[test]
fn overlap_rejects_censored_lists() {
    let out = seqrank(&["overlap", path(&data("example_top2.csv")), "--universe-size", "5"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(out.stdout.is_empty());
}

#[test]
fn nullband_matches_golden_file() {
    let out = ok(&["nullband", path(&data("example.csv")), "--B", "400", "--seed", "1"]);
    assert_eq!(out, golden("example_nullband_B400_seed1.csv"));
    assert_eq!(values(&out)[0].len(), 3);
}

#[test]
fn nullband_rejects_zero_permutations() {
    let out = seqrank(&["nullband", path(&data("example.csv")), "--B", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_replicate_band_equals_its_curve() {
    let hyp = format!("replicates={}", path(&data("replicates_one")));
    let band = values(&ok(&["nullband", "--hypothesis", &hyp, "--seed", "1"]));
    let curve = values(&ok(&["sra", path(&data("example.csv")), "--seed", "1"]));
    for (b, c) in band.iter().zip(&curve) {
        assert!(b.iter().all(|v| v == &c[0]));
    }
}

#[test]
fn lower_sided_band_uses_two_levels() {
    let out = ok(&["nullband", path(&data("example.csv")), "--B", "50", "--seed", "1", "--sided", "lower"]);
    assert!(out.contains("depth,q0.05,q0.5\n"));
}

#[test]
fn pvalues_are_valid_probabilities() {
    let v = values(&ok(&["pvalues", path(&data("example.csv")), "--B", "99", "--seed", "2"]));
    assert_eq!(v.len(), 5);
    assert!(v.iter().all(|r| r[0] >= 0.01 && r[0] <= 1.0));
}

#[test]
fn plot_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("plot.svg");
    let curve = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/example_sra_seed1.csv");
    let band = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/example_nullband_B400_seed1.csv");
    ok(&["plot", path(&curve), "--band", path(&band), "-o", path(&svg)]);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text, golden("example_plot.svg"));
    assert_eq!(text.matches("<polyline").count(), 1);
    assert_eq!(text.matches("<path class=\"band\"").count(), 2);
}

#[test]
fn plot_of_single_curve_has_one_five_point_line() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("plot.svg");
    let curve = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/example_sra_seed1.csv");
    ok(&["plot", path(&curve), "-o", path(&svg)]);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 1);
    let points = text.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
    assert_eq!(points.split_whitespace().count(), 5);
}

#[test]
fn plot_rejects_mismatched_depths_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let seven = dir.path().join("seven.csv");
    std::fs::write(&seven, ok(&["sra", path(&data("seven.csv")), "--seed", "1"])).unwrap();
    let svg = dir.path().join("plot.svg");
    let curve = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/example_sra_seed1.csv");
    let out = seqrank(&["plot", path(&curve), path(&seven), "-o", path(&svg)]);
    assert!(!out.status.success());
    assert!(!svg.exists());
}

#[test]
fn failed_runs_leave_no_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.csv");
    let out = seqrank(&["sra", path(&data("example_top2.csv")), "-o", path(&target)]);
    assert!(!out.status.success());
    assert!(!target.exists());
}

#[test]
fn missing_and_malformed_files_have_distinct_codes() {
    assert_eq!(seqrank(&["sra", "/nonexistent/lists.csv"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "R1,R2\nA,A\nA,B\n").unwrap();
    assert_eq!(seqrank(&["sra", path(&bad)]).status.code(), Some(4));
}

#[test]
fn thread_count_does_not_change_output() {
    let input = data("example_top2.csv");
    let args = ["sra", path(&input), "--universe-size", "5", "--B", "500", "--seed", "8"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_seqrank")).env("SEQRANK_THREADS", threads).args(args).output().unwrap().stdout
    };
    assert_eq!(run("1"), run("4"));
}
