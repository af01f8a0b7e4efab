use std::path::Path;
use std::process::{Command, Output};

fn nsfd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsfd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Rows of a CSV file after the header, as floats (empty cells become NaN).
fn rows(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

#[test]
fn echoed_config_matches_golden_cases() {
    for case in ["i", "ii", "iii", "iv", "v", "vi"] {
        let out = nsfd(&["simulate", "--case", case, "--echo-config"]);
        assert!(out.status.success());
        let golden = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(format!("case_{case}.cfg"));
        assert_eq!(stdout(&out), std::fs::read_to_string(golden).unwrap(), "case {case}");
    }
}

#[test]
fn echoed_config_can_be_fed_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("v.cfg");
    let first = nsfd(&["order", "--case", "v", "--h", "0.5", "--t-end", "10", "--echo-config"]);
    std::fs::write(&cfg, stdout(&first)).unwrap();
    let second = nsfd(&["order", "--config", path_str(&cfg), "--echo-config"]);
    assert_eq!(stdout(&first), stdout(&second));
}

#[test]
fn simulate_case_i_decays_to_origin() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("i.csv");
    let out = nsfd(&["simulate", "--case", "i", "--h", "1", "--n", "10000", "--csv", path_str(&csv)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = rows(&csv);
    assert_eq!(header, "k,t,x,y");
    assert_eq!(rows.len(), 10_001);
    let last = rows.last().unwrap();
    assert!(last[2].max(last[3]) < 1e-6);
    let text = stdout(&out);
    assert!(text.contains("regime = row 1"));
    assert!(text.contains("dynamically_consistent = true"));
}

#[test]
fn simulate_case_vi_reaches_carrying_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("vi.csv");
    let out = nsfd(&["simulate", "--case", "vi", "--h", "1", "--n", "100000", "--csv", path_str(&csv)]);
    assert!(out.status.success());
    let (_, rows) = rows(&csv);
    let last = rows.last().unwrap();
    // K solves 15 / (K + 10) = 1.38
    let k = 15.0 / 1.38 - 10.0;
    assert!((last[2] - k).abs() < 1e-6 && last[3].abs() < 1e-6);
}

#[test]
fn large_step_comparison_shows_euler_failure() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("run.csv");
    let svg = dir.path().join("run.svg");
    let out = nsfd(&[
        "simulate", "--case", "i", "--h", "50", "--n", "200", "--methods", "nsfd,euler,rk4",
        "--csv", path_str(&csv), "--svg", path_str(&svg),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let (header, rows) = rows(&dir.path().join("run_comparison.csv"));
    assert_eq!(header, "k,t,x_nsfd,y_nsfd,x_euler,y_euler,x_rk4,y_rk4");
    assert_eq!(rows.len(), 201);
    assert!(rows.iter().all(|r| r[2] >= 0.0 && r[3] >= 0.0));
    assert!(rows.iter().any(|r| r[4] < 0.0 || r[5] < 0.0));
    let picture = std::fs::read_to_string(&svg).unwrap();
    assert!(picture.starts_with("<svg") && picture.contains(">P0<"));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = nsfd(&["simulate", "--case", "v", "--h", "0.5", "--n", "500", "--csv", path_str(p)]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn analyze_case_i() {
    let out = nsfd(&["analyze", "--case", "i", "--h-list", "0.1,1,10,100"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("P0 = (0.0, 0.0): continuous globally_stable"));
    assert!(!text.contains("P1 ="));
    assert_eq!(text.matches("discrete stable").count(), 4);
    assert!(text.contains("lyapunov: V ="));
    assert!(text.contains("certificate inequalities hold: true"));
}

#[test]
fn analyze_case_iv() {
    let text = stdout(&nsfd(&["analyze", "--case", "iv"]));
    for kind in ["P0 =", "P1 =", "P2 =", "P3 ="] {
        assert!(text.contains(kind), "{kind}");
    }
    assert!(text.contains("continuous locally_stable"));
    for t in ["T5 = ", "T6 = ", "T7 = "] {
        assert!(text.contains(t));
    }
    assert!(text.contains("lyapunov: not applicable"));
}

#[test]
fn analyze_case_iii() {
    let text = stdout(&nsfd(&["analyze", "--case", "iii"]));
    assert!(text.contains("P0 ="));
    assert!(text.contains("P2 = (0.0, 0.44059"));
    assert!(!text.contains("P3 ="));
    let p2 = text.split("P2 =").nth(1).unwrap();
    assert_eq!(p2.matches("discrete stable").count(), 4);
}

#[test]
fn equilibria_and_check_scheme() {
    let out = nsfd(&["equilibria", "--case", "v"]);
    let text = stdout(&out);
    assert!(text.starts_with("kind,x,y,verdict\n"));
    assert!(text.contains("P3,"));

    let text = stdout(&nsfd(&["check-scheme", "--case", "vi"]));
    assert!(text.contains("T1 = ") && text.contains("T2 = "));
    assert!(text.contains("dynamically_consistent = true"));
}

#[test]
fn compare_reports_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cmp.csv");
    let out = nsfd(&["compare", "--case", "i", "--h", "50", "--n", "200", "--csv", path_str(&csv)]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("nsfd: none"));
    assert!(text.contains("euler: first failing h = "));
    assert!(rows(&csv).0.starts_with("k,t,x_nsfd"));
}

#[test]
fn order_command() {
    let out = nsfd(&["order", "--case", "v", "--x0", "5", "--y0", "5", "--t-end", "10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let order = |name: &str| -> f64 {
        let line = text.lines().find(|l| l.trim_start().starts_with(&format!("{name}: p = "))).unwrap();
        line.rsplit(' ').next().unwrap().parse().unwrap()
    };
    assert!((0.7..=1.3).contains(&order("nsfd")));
    assert!((0.7..=1.3).contains(&order("euler")));
    assert!((3.5..=4.5).contains(&order("rk4")));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "m1 = 1.5\nm2 = 0.5\nspeed = 3\n").unwrap();
    for args in [
        vec!["simulate", "--config", path_str(&bad)],
        vec!["simulate", "--case", "vii"],
        vec!["simulate"],
        vec!["simulate", "--case", "i", "--h", "-1"],
        vec!["simulate", "--case", "i", "--n", "3", "--t-end", "3"],
        vec!["simulate", "--case", "i", "--x0", "-2"],
        vec!["simulate", "--case", "i", "--config", "/nonexistent/file.cfg"],
    ] {
        let out = nsfd(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn numerical_failure_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.cfg");
    // a sign-violating prey weight pair that drives the denominator negative
    std::fs::write(&cfg, "m1 = 1.53\nm2 = 0.622\nalpha1 = -2\nalpha2 = 3\nh = 100\n").unwrap();
    let out = nsfd(&["simulate", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("nonpositive prey denominator"));
}

#[test]
fn sweep_with_jobs_writes_distinct_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate".to_string(), "--jobs".into(), "2".into()];
    for (i, (m1, m2)) in [(1.53, 0.622), (0.3, 0.501), (1.38, 0.622)].iter().enumerate() {
        let cfg = dir.path().join(format!("s{i}.cfg"));
        let csv = dir.path().join(format!("s{i}.csv"));
        std::fs::write(
            &cfg,
            format!("# sweep member\nm1 = {m1}\nm2 = {m2}\nn = 100\ncsv = {}\n", csv.display()),
        )
        .unwrap();
        args.push("--config".into());
        args.push(cfg.display().to_string());
    }
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = nsfd(&argv);
    assert!(out.status.success(), "{}", stderr(&out));
    for i in 0..3 {
        assert_eq!(rows(&dir.path().join(format!("s{i}.csv"))).1.len(), 101);
    }
    assert_eq!(stdout(&out).matches("scenario: ").count(), 3);

    // shared output path is refused
    let mut clash = argv.clone();
    clash.extend(["--csv", "same.csv"]);
    assert_eq!(nsfd(&clash).status.code(), Some(2));
}

#[test]
fn mickens_denominator() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.cfg");
    std::fs::write(&cfg, "m1 = 1.38\nm2 = 0.622\ndenominator = mickens\nq = 1.38\nh = 10\nn = 20000\n")
        .unwrap();
    let out = nsfd(&["simulate", "--config", path_str(&cfg)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("final state")).unwrap();
    assert!(line.contains("x = 0.86956"), "{line}");
}
