use std::path::PathBuf;
use std::process::{Command, Output};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentpde"))
        .args(args)
        .env_remove("MOMENTPDE_NCAP")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn polygon_reports_k1_inverse() {
    let heat = run(&["polygon", path_str(&problem("heat"))]);
    assert_eq!(heat.status.code(), Some(0));
    assert!(stdout(&heat).lines().any(|l| l == "k1_inv,1"));

    let wave = run(&["polygon", path_str(&problem("wave"))]);
    assert!(stdout(&wave).lines().any(|l| l == "k1_inv,0"));

    let q = run(&["polygon", path_str(&problem("variable"))]);
    assert!(stdout(&q).lines().any(|l| l == "k1_inv,1/2"));
}

#[test]
fn polygon_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("heat.svg");
    let o = run(&["polygon", path_str(&problem("heat")), "--svg", path_str(&svg)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn condition_a_violation_exits_two() {
    let o = run(&["polygon", path_str(&problem("violates_a"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("j=1, alpha=[1]"), "{}", stderr(&o));
    let s = run(&["solve", path_str(&problem("violates_a"))]);
    assert_eq!(s.status.code(), Some(2));
}

#[test]
fn solve_heat_rows() {
    let o = run(&["solve", path_str(&problem("heat"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("n,alpha_1,value\n"));
    assert!(text.lines().any(|l| l == "2,0,12"));
    let last = text.lines().last().unwrap();
    let r: f64 = last.strip_prefix("residual,").unwrap().parse().unwrap();
    assert!(r <= 1e-12);
}

#[test]
fn solve_zero_problem() {
    let o = run(&["solve", path_str(&problem("zero"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).filter(|l| !l.starts_with("residual")).collect();
    assert_eq!(rows.len(), 7 * 13 - (2 + 4 + 6 + 8 + 10 + 12));
    assert!(rows.iter().all(|l| l.ends_with(",0")));
    assert!(text.ends_with("residual,0\n"));
}

#[test]
fn constant_method_needs_zero_data() {
    let o = run(&["solve", path_str(&problem("heat")), "--method", "constant"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("zero initial data"));
    let ok = run(&["solve", path_str(&problem("heat_forced")), "--method", "constant"]);
    assert_eq!(ok.status.code(), Some(0));
}

fn solve_to(dir: &tempfile::TempDir, name: &str) -> PathBuf {
    let out = dir.path().join(format!("{name}.csv"));
    let o = run(&["solve", path_str(&problem(name)), "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    out
}

#[test]
fn estimate_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let heat = solve_to(&dir, "heat");
    let args = |k1: &str, sharp: bool| {
        let mut a = vec!["estimate", path_str(&heat), "--radius", "0", "--window", "10:40", "--k1inv", k1];
        if sharp {
            a.push("--sharp");
        }
        run(&a)
    };
    let pass = args("1", true);
    assert_eq!(pass.status.code(), Some(0));
    let text = stdout(&pass);
    assert!(text.starts_with("sigma_hat,logH,logC,rms,k1_inv,verdict\n"));
    assert!(text.trim_end().ends_with(",1,PASS"));
    let sigma: f64 = text.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((0.95..=1.05).contains(&sigma));

    let fail = args("0.5", true);
    assert_eq!(fail.status.code(), Some(1));
    assert!(stdout(&fail).trim_end().ends_with("FAIL"));

    let geo = dir.path().join("geo.csv");
    let mut body = String::from("n,alpha_1,value\n");
    for n in 0..=30 {
        body.push_str(&format!("{n},0,{}\n", 3f64.powi(n)));
    }
    std::fs::write(&geo, body).unwrap();
    let g = run(&["estimate", path_str(&geo), "--k1inv", "0"]);
    assert_eq!(g.status.code(), Some(0), "{}", stdout(&g));
}

#[test]
fn estimate_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let heat = solve_to(&dir, "heat");
    let w = run(&["estimate", path_str(&heat), "--k1inv", "1", "--window", "10"]);
    assert_eq!(w.status.code(), Some(2));
    let short = run(&["estimate", path_str(&heat), "--k1inv", "1", "--window", "10:12"]);
    assert_eq!(short.status.code(), Some(2));
    let missing = run(&["estimate", "/nonexistent.csv", "--k1inv", "1"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn estimate_reproduces_pipeline_verdict() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["heat", "wave", "q_heat", "variable"] {
        let csv = solve_to(&dir, name);
        let pipeline = run(&["verify", "--suite", "order", "--problem", path_str(&problem(name))]);
        // estimator settings of the gallery files
        let k1 = match name {
            "heat" => "1",
            "wave" => "0",
            "q_heat" => "2",
            _ => "1/2",
        };
        let tol = if name == "q_heat" { "0.1" } else { "0.05" };
        let mut args = vec![
            "estimate",
            path_str(&csv),
            "--radius",
            "0",
            "--window",
            "10:40",
            "--k1inv",
            k1,
            "--tol",
            tol,
        ];
        if name != "variable" {
            args.push("--sharp");
        }
        let est = run(&args);
        assert_eq!(stdout(&est), stdout(&pipeline), "{name}");
        assert_eq!(est.status.code(), pipeline.status.code());
        assert_eq!(est.status.code(), Some(0), "{name}");
    }
}

#[test]
fn check_seq_factorial() {
    let o = run(&["check-seq", "--family", "factorial", "--nmax", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "lc,true"));
    assert!(text.lines().any(|l| l == "star_b,1"));
    let b: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mg_B,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((b - 252f64.powf(0.1)).abs() <= 1e-12);

    let parity = run(&["check-seq", "--family", "parity_factorial"]);
    assert!(stdout(&parity).lines().any(|l| l == "lc,false"));
    let bad = run(&["check-seq", "--family", "gevrey"]);
    assert_eq!(bad.status.code(), Some(2));
    let q = run(&["check-seq", "--family", "q_factorial", "--params", "1.5"]);
    assert_eq!(q.status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let parity = run(&["verify", "--suite", "lemmas", "--family", "parity_factorial", "--nmax", "40"]);
    assert_eq!(parity.status.code(), Some(0));
    let text = stdout(&parity);
    assert_eq!(text.lines().filter(|l| l.contains(",SKIPPED,")).count(), 4);
    assert_eq!(text.lines().filter(|l| l.contains(",PASS,")).count(), 3);

    let gl = run(&["verify", "--suite", "lemmas", "--family", "gevrey_log", "--params", "1,1"]);
    assert_eq!(gl.status.code(), Some(0));
    assert_eq!(stdout(&gl).lines().filter(|l| l.contains(",PASS,")).count(), 7);

    let norms = run(&["verify", "--suite", "norms", "--caps", "30"]);
    assert_eq!(norms.status.code(), Some(0));
    assert!(stdout(&norms).lines().skip(1).all(|l| l.contains(",PASS,")));

    let none = run(&["verify", "--suite", "order"]);
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    for name in ["heat", "plane_q", "wave_forced"] {
        let a = run(&["solve", path_str(&problem(name))]);
        let b = run(&["solve", path_str(&problem(name))]);
        assert_eq!(a.stdout, b.stdout);
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn n_cap_override() {
    let bad = Command::new(env!("CARGO_BIN_EXE_momentpde"))
        .args(["solve", path_str(&problem("heat"))])
        .env("MOMENTPDE_NCAP", "lots")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("MOMENTPDE_NCAP"));

    let big = Command::new(env!("CARGO_BIN_EXE_momentpde"))
        .args(["check-seq", "--nmax", "150"])
        .env("MOMENTPDE_NCAP", "200")
        .output()
        .unwrap();
    assert_eq!(big.status.code(), Some(0), "{}", stderr(&big));
}

#[test]
fn schema_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(problem("heat")).unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text.replace("\"terms\"", "\"extra\": 1, \"terms\"")).unwrap();
    let o = run(&["solve", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("extra"));
}
