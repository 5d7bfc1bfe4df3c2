use std::path::PathBuf;
use std::process::{Command, Output};

use ecoenum::bench::CSV_HEADER;

fn grammars() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../grammars")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecoenum")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn enumerate_fig1_prints_the_oracle_prefix() {
    let g = grammars().join("fig1.gram");
    let o = run(&["enumerate", "--grammar", g.to_str().unwrap(), "--algo", "eco", "--count", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        stdout(&o),
        "11\t\"Hello\"\n20\t\"World\"\n62\tcast(var)\n75\tconcat(\"Hello\", \"Hello\")\n77\tcast(1)\n"
    );
    let err = stderr(&o);
    for key in ["# grammar:", "# cost_mode:", "# algorithm: eco", "# count: 5", "# bucket_size:"] {
        assert!(err.contains(key), "missing {key} in {err}");
    }
}

#[test]
fn canonical_output_is_identical_across_algorithms() {
    let g = grammars().join("fig1-real.gram");
    let outs: Vec<String> = ["heap", "bee", "eco", "eco-nobucket"]
        .iter()
        .map(|a| {
            let o = run(&[
                "enumerate",
                "--grammar",
                g.to_str().unwrap(),
                "--cost-mode",
                "real",
                "--algo",
                a,
                "--count",
                "40",
                "--canonical",
            ]);
            assert_eq!(o.status.code(), Some(0));
            stdout(&o)
        })
        .collect();
    assert!(outs.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(outs[0].lines().count(), 40);
    assert!(outs[0].starts_with("1.10\t\"Hello\"\n"));
}

#[test]
fn validate_rejects_nondeterministic_grammar() {
    let o = run(&["validate", "--grammar", grammars().join("dup.gram").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.lines().any(|l| l.starts_with("error:") && l.contains("determinism")), "{err}");
}

#[test]
fn validate_accepts_fig1() {
    let o = run(&["validate", "--grammar", grammars().join("fig1.gram").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ok: 2 non-terminals, 7 rules"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["enumerate", "--family", "Q", "--k", "2"][..],
        &["enumerate", "--grammar", "/nonexistent.gram"],
        &["bench-scaling", "--family", "N", "--k", "4", "--seeds", "0"],
        &["enumerate", "--family", "R", "--k", "1"],
        &["no-such-command"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).lines().any(|l| l.starts_with("error:")), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn bench_scaling_emits_schema_conformant_csv() {
    let o = run(&[
        "bench-scaling",
        "--family",
        "N",
        "--k",
        "4..16:12",
        "--target",
        "20000",
        "--algos",
        "heap,bee,eco",
        "--seeds",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    // 2 values of k, 2 seeds, 3 algorithms, 3 metrics
    assert_eq!(rows.len(), 2 * 2 * 3 * 3);
    for r in &rows {
        assert_eq!(r.len(), 9);
        assert_eq!(r[0], "N");
        assert!(r[1] == "4" || r[1] == "16");
        assert!(r[2] == "0" || r[2] == "1");
        assert!(["heap", "bee", "eco"].contains(&r[3].as_str()));
        assert_eq!(r[5], "int:0.00001");
        if r[6] == "seconds_to_target" {
            assert!(r[8].parse::<f64>().is_ok());
        }
    }
    assert!(stderr(&o).contains("# target: 20000"));
}

#[test]
fn bench_csv_file_feeds_plot_data() {
    let dir = std::env::temp_dir().join(format!("ecoenum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("delay.csv");
    let o = run(&[
        "bench-delay",
        "--family",
        "D",
        "--k",
        "3",
        "--algos",
        "eco,heap",
        "--seeds",
        "1",
        "--count",
        "20000",
        "--block",
        "10000",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let o = run(&["plot-data", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let plot = stdout(&o);
    assert!(plot.contains("# D_3 eco block_queue_ops"));
    assert!(plot.contains("# D_3 heap block_seconds"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn throughput_with_zero_duration_counts_nothing() {
    let o = run(&["bench-throughput", "--family", "D", "--k", "4", "--duration", "0", "--seeds", "2"]);
    assert_eq!(o.status.code(), Some(0));
    for l in stdout(&o).lines().skip(1).filter(|l| l.contains(",programs,")) {
        assert!(l.ends_with(",0"), "{l}");
    }
}

#[test]
fn solve_exit_codes() {
    let o = run(&["solve", "--only", "list-sum"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("list-sum\tsolved\t35\tsum(x0)"));
    let o = run(&["solve", "--only", "str-email-user", "--count", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("unsolved"));
    let o = run(&["solve", "--only", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn gen_grammar_output_validates() {
    let dir = std::env::temp_dir().join(format!("ecoenum-gen-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for args in [&["--family", "R", "--k", "3", "--seed", "4"][..], &["--random", "--seed", "9"]] {
        let mut full = vec!["gen-grammar"];
        full.extend_from_slice(args);
        let o = run(&full);
        assert_eq!(o.status.code(), Some(0));
        let path = dir.join("g.gram");
        std::fs::write(&path, stdout(&o)).unwrap();
        let v = run(&["validate", "--grammar", path.to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(0), "{}", stderr(&v));
    }
    std::fs::remove_dir_all(&dir).unwrap();
}
