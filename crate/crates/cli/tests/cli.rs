use std::path::Path;
use std::process::{Command, Output};

fn psimetric(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psimetric"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = psimetric(dir, args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn last_row(stdout: &str) -> Vec<f64> {
    let line = stdout.lines().last().unwrap();
    line.split(',').map(|f| f.parse().unwrap()).collect()
}

fn fixtures(dir: &Path) {
    ok(
        dir,
        &["gen", "circle", "--radius", "1", "--samples", "512", "-o", "c.mfd"],
    );
    ok(
        dir,
        &[
            "gen",
            "parallel-copies",
            "--base",
            "c.mfd",
            "--delta",
            "0.1",
            "-o",
            "c2.mfd",
        ],
    );
    ok(
        dir,
        &[
            "gen",
            "perturb",
            "--base",
            "c.mfd",
            "--delta",
            "0.1",
            "-o",
            "shifted.mfd",
        ],
    );
    ok(dir, &["gen", "empty", "--ambient", "2", "--dim", "1", "-o", "e.mfd"]);
    ok(
        dir,
        &[
            "gen",
            "affine-plane",
            "--extent",
            "3",
            "--samples",
            "601",
            "-o",
            "x.mfd",
        ],
    );
}

#[test]
fn gen_reports_sample_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(ok(
        d,
        &["gen", "circle", "--radius", "1", "--samples", "512", "-o", "c.mfd"]
    )
    .starts_with("samples 512 "));
    assert!(ok(d, &["gen", "empty", "--ambient", "2", "--dim", "1", "-o", "e.mfd"]).starts_with("samples 0 "));
    assert!(ok(
        d,
        &[
            "gen",
            "parallel-copies",
            "--base",
            "c.mfd",
            "--delta",
            "0.1",
            "-o",
            "c2.mfd"
        ]
    )
    .starts_with("samples 1024 "));
    assert_eq!(
        psimetric(d, &["gen", "circle", "--radius", "-1", "-o", "bad.mfd"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        psimetric(d, &["gen", "nonsense", "-o", "bad.mfd"]).status.code(),
        Some(2)
    );
}

#[test]
fn dist_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    let same = ok(d, &["dist", "c.mfd", "c.mfd"]);
    assert!(same.lines().last().unwrap().starts_with("0,0,0,"));

    ok(
        d,
        &[
            "gen",
            "sphere",
            "--ambient",
            "3",
            "--radius",
            "2",
            "--samples",
            "400",
            "-o",
            "s.mfd",
        ],
    );
    ok(d, &["gen", "empty", "--ambient", "3", "--dim", "2", "-o", "e3.mfd"]);
    let row = last_row(&ok(d, &["dist", "e3.mfd", "s.mfd"]));
    assert!((row[0] - 1.0 / 3.0).abs() < 1e-3);

    let row = last_row(&ok(d, &["dist", "c.mfd", "c2.mfd"]));
    assert!(row[1] >= 0.3);
    assert_eq!(row[2], row[0] + row[1]);

    let scan = last_row(&ok(d, &["dist", "c.mfd", "shifted.mfd", "--metric", "scan"]));
    assert!(scan[0] > 0.0 && scan[0] <= 0.1 + 1e-12);

    let out = psimetric(d, &["dist", "c.mfd", "s.mfd"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension mismatch"));
    assert_eq!(psimetric(d, &["dist", "c.mfd", "missing.mfd"]).status.code(), Some(2));
}

#[test]
fn member_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    let gs_shift = psimetric(d, &["member", "--kind", "gs", "--eps", "0.5", "c.mfd", "shifted.mfd"]);
    assert_eq!(gs_shift.status.code(), Some(0));

    let gs_copies = psimetric(d, &["member", "--kind", "gs", "--eps", "0.5", "c.mfd", "c2.mfd"]);
    assert_eq!(gs_copies.status.code(), Some(1));
    let report = String::from_utf8(gs_copies.stdout).unwrap();
    assert!(report.lines().any(|l| l.starts_with("single sheet: FAIL")));

    let ls_copies = psimetric(d, &["member", "--kind", "ls", "--eps", "0.5", "c.mfd", "c2.mfd"]);
    assert_eq!(ls_copies.status.code(), Some(0));

    let bad = psimetric(
        d,
        &[
            "member",
            "--kind",
            "gs",
            "--eps",
            "0.5",
            "--kradius",
            "-1",
            "c.mfd",
            "c2.mfd",
        ],
    );
    assert_eq!(bad.status.code(), Some(2));
    let boxed = psimetric(
        d,
        &[
            "member", "--kind", "ls", "--eps", "0.5", "--box", "-1:1", "c.mfd", "c2.mfd",
        ],
    );
    assert_eq!(boxed.status.code(), Some(0));
}

#[test]
fn labelled_membership() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    ok(d, &["gen", "label", "--base", "c.mfd", "--value", "1", "-o", "lc.mfd"]);
    ok(
        d,
        &["gen", "label", "--base", "c2.mfd", "--value", "0.5", "-o", "half.mfd"],
    );
    ok(
        d,
        &["gen", "label", "--base", "c2.mfd", "--value", "1", "-o", "full.mfd"],
    );
    let ms = |w: &str| {
        psimetric(
            d,
            &[
                "member",
                "--kind",
                "ms",
                "--eps",
                "0.5",
                "--label-eps",
                "0.1",
                "lc.mfd",
                w,
            ],
        )
    };
    assert_eq!(ms("half.mfd").status.code(), Some(0));
    assert_eq!(ms("full.mfd").status.code(), Some(1));
    let no_labels = psimetric(
        d,
        &[
            "member",
            "--kind",
            "ms",
            "--eps",
            "0.5",
            "--label-eps",
            "0.1",
            "c.mfd",
            "half.mfd",
        ],
    );
    assert_eq!(no_labels.status.code(), Some(2));
}

#[test]
fn converge_families() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    let rows = |family: &str, base: &str, deltas: &str| -> Vec<Vec<String>> {
        ok(d, &["converge", "--family", family, "--base", base, "--deltas", deltas])
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(String::from).collect())
            .collect()
    };
    let num = |r: &Vec<String>, i: usize| r[i].parse::<f64>().unwrap();

    let normal = rows("normal", "c.mfd", "0.1,0.01,0.001");
    for col in 1..=4 {
        assert!(
            normal.windows(2).all(|w| num(&w[1], col) < num(&w[0], col)),
            "column {col}"
        );
    }

    let copies = rows("parallel-copies", "c.mfd", "0.1,0.05,0.01");
    assert!(copies.windows(2).all(|w| num(&w[1], 1) < num(&w[0], 1)));
    assert!(copies.iter().all(|r| num(r, 2) > 0.3 && r[5] == "false"));

    let tilt = rows("tilt", "x.mfd", "0.1,0.2,0.24,0.26,0.3");
    for r in &tilt {
        assert_eq!(r[5] == "true", 2.0 * num(r, 0) < 0.5, "{r:?}");
    }

    let svg = d.join("plot.svg");
    ok(
        d,
        &[
            "converge",
            "--family",
            "normal",
            "--base",
            "c.mfd",
            "--deltas",
            "0.1,0.01",
            "--svg",
            svg.to_str().unwrap(),
        ],
    );
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));

    let bad = psimetric(
        d,
        &["converge", "--family", "bogus", "--base", "c.mfd", "--deltas", "0.1"],
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn scan_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    let read = |name: &str| std::fs::read_to_string(d.join(name)).unwrap();

    ok(d, &["scan", "e.mfd", "--grid", "-1:1:0.5", "-o", "e.csv"]);
    assert!(read("e.csv")
        .lines()
        .skip(1)
        .all(|l| l.split(',').nth(2) == Some("inf")));

    ok(d, &["scan", "x.mfd", "--grid", "-1:1:0.5", "-o", "x.csv"]);
    let x = read("x.csv");
    assert_eq!(x.lines().count(), 26);
    assert!(x.lines().skip(1).all(|l| l.split(',').nth(2) == Some("finite")));

    ok(d, &["scan", "c.mfd", "--grid", "-1:1:0.5", "-o", "c.csv"]);
    assert!(read("c.csv").lines().any(|l| l.starts_with("0,0,inf")));

    let big = psimetric(d, &["scan", "c.mfd", "--grid", "-1:1:0.0001", "-o", "big.csv"]);
    assert_eq!(big.status.code(), Some(2));
}

#[test]
fn unknown_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(psimetric(dir.path(), &["--bogus"]).status.code(), Some(2));
    assert_eq!(
        psimetric(dir.path(), &["dist", "--nope", "a", "b"]).status.code(),
        Some(2)
    );
    assert_eq!(
        psimetric(
            dir.path(),
            &[
                "--threads",
                "0",
                "gen",
                "empty",
                "--ambient",
                "2",
                "--dim",
                "1",
                "-o",
                "e.mfd"
            ]
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fixtures(d);
    let run = |threads: &str| {
        let csv = ok(
            d,
            &[
                "--threads",
                threads,
                "converge",
                "--family",
                "parallel-copies",
                "--base",
                "c.mfd",
                "--deltas",
                "0.1,0.01",
            ],
        );
        ok(d, &["--threads", threads, "scan", "c2.mfd", "-o", "s.csv"]);
        ok(
            d,
            &[
                "--threads",
                threads,
                "gen",
                "sphere",
                "--samples",
                "300",
                "--ambient",
                "4",
                "--seed",
                "9",
                "-o",
                "s4.mfd",
            ],
        );
        (
            csv,
            std::fs::read(d.join("s.csv")).unwrap(),
            std::fs::read(d.join("s4.mfd")).unwrap(),
        )
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("8"));
}

#[test]
fn gen_reads_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("sq.txt"),
        "PTS 4\n0 0 0\n1 0 0\n0 1 0\n1 1 0\nTRI 2\n0 1 2\n1 3 2\n",
    )
    .unwrap();
    let out = ok(d, &["gen", "mesh", "--input", "sq.txt", "--dim", "2", "-o", "sq.mfd"]);
    let weight: f64 = out.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(out.starts_with("samples 4 ") && (weight - 1.0).abs() < 1e-12);
    let bad = psimetric(d, &["gen", "mesh", "--input", "sq.txt", "--dim", "1", "-o", "x.mfd"]);
    assert_eq!(bad.status.code(), Some(2));
}
