use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dsharp::commands::{self, Common, DiagnoseArgs, FitArgs};
use dsharp::curves::trapezoid;
use dsharp::io;
use dsharp_core::{BaseModel, DEFAULT_SEED};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dsharp"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn ok_json(dir: &Path, args: &[&str]) -> Value {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn read_curves(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    let mut cols = vec![Vec::new(); header.len()];
    for rec in r.records() {
        for (c, v) in cols.iter_mut().zip(rec.unwrap().iter()) {
            c.push(v.parse::<f64>().unwrap());
        }
    }
    (header, cols)
}

fn col<'a>(t: &'a (Vec<String>, Vec<Vec<f64>>), name: &str) -> &'a [f64] {
    &t.1[t.0.iter().position(|h| h == name).unwrap()]
}

fn simulate(dir: &Path, name: &str, model: &str, coeffs: Option<&str>, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let n = n.to_string();
    let seed = seed.to_string();
    let mut args = vec!["simulate", "--true-model", model, "--n", &n, "--seed", &seed, "--out"];
    args.push(path.to_str().unwrap());
    if let Some(c) = coeffs {
        args.extend(["--coeffs", c]);
    }
    let out = run(dir, &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

const BUMP: &str = "mix:0.9*exp:mean=25|0.1*normal:mean=25,sd=2.5";

#[test]
fn fit_flags_the_hidden_bump() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "d.csv", BUMP, None, 10_000, DEFAULT_SEED);
    let r = ok_json(dir.path(), &["fit", "--data", "d.csv", "--f0", "exp:mean=25", "--m", "10", "--curves", "c.csv"]);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["config"]["f0"], "exp:mean=25");
    assert_eq!(r["seed"], DEFAULT_SEED);
    assert!(r["result"]["p_value"].as_f64().unwrap() < 1e-10);
    let t = read_curves(&dir.path().join("c.csv"));
    let (u, d) = (col(&t, "u"), col(&t, "d_hat"));
    assert_eq!(u.len(), 512);
    let best = (0..d.len()).fold(0, |b, i| if d[i] > d[b] { i } else { b });
    assert!((0.55..=0.70).contains(&u[best]), "{}", u[best]);
    let x = col(&t, "x");
    for name in ["f0", "f_hat"] {
        let mass = trapezoid(x, col(&t, name));
        assert!((mass - 1.0).abs() < 1e-4, "{name}: {mass}");
    }
    assert!((trapezoid(u, d) - 1.0).abs() < 1e-4);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "d.csv", "lognormal:mu=4,sigma=0.24", Some("4:0.18"), 800, 5);
    std::fs::write(
        dir.path().join("l.json"),
        r#"[{"action": "low", "expr": "max(60 - x, 0)"}, {"action": "high", "table": [[0, 0], [50, 5], [80, 30]]}]"#,
    )
    .unwrap();
    let args = ["decide", "--data", "d.csv", "--f0", "lognormal:mu=4,sigma=0.24", "--losses", "l.json", "--B", "40"];
    let a = run(dir.path(), &args);
    let b = run(dir.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let fit = ["fit", "--data", "d.csv", "--f0", "lognormal:mu=4,sigma=0.24"];
    assert_eq!(run(dir.path(), &fit).stdout, run(dir.path(), &fit).stdout);
    let other = run(dir.path(), &[&args[..], &["--seed", "7"]].concat());
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn bad_data_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.csv"), "x\n1.5\n2.0\noops\n").unwrap();
    let out = run(dir.path(), &["fit", "--data", "d.csv", "--f0", "normal:mean=0,sd=1"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).expect("structured error");
    assert!(err["error"].as_str().unwrap().contains("d.csv:4"), "{err}");

    let out = run(dir.path(), &["fit", "--data", "d.csv", "--f0", "normal:mean=0"]);
    assert!(!out.status.success());

    let out = run(dir.path(), &["fit", "--data", "d.csv", "--f0", "normal:mean=0,sd=1", "--out", "r.json"]);
    assert!(!out.status.success());
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn headerless_data_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let values: String = (0..50).map(|i| format!("{}\n", (i as f64 * 0.37).sin())).collect();
    std::fs::write(dir.path().join("d.csv"), values).unwrap();
    let r = ok_json(dir.path(), &["diagnose", "--data", "d.csv", "--f0", "normal:mean=0,sd=1", "--m", "4"]);
    assert_eq!(r["result"]["n"], 50);
    assert_eq!(r["result"]["raw_coeffs"].as_array().unwrap().len(), 4);
}

fn write_losses(dir: &Path, text: &str) {
    std::fs::write(dir.join("l.json"), text).unwrap();
}

#[test]
fn decide_dominance() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "d.csv", "normal:mean=5,sd=1", None, 300, 1);
    write_losses(dir.path(), r#"[{"action": "a1", "expr": "(x-5)^2"}, {"action": "a2", "expr": "(x-5)^2 + 1"}]"#);
    let r = ok_json(
        dir.path(),
        &["decide", "--data", "d.csv", "--f0", "normal:mean=5,sd=1", "--losses", "l.json", "--B", "30", "--curves", "c.csv"],
    );
    let res = &r["result"];
    assert_eq!(res["profile"][0]["probability"], 1.0);
    assert_eq!(res["profile"][1]["count"], 0);
    assert_eq!(res["entropy"], 0.0);
    assert_eq!(res["robust_action"], "a1");
    assert_eq!(res["minimax"]["action"], "a1");
    assert_eq!(r["config"]["B"], 30);
    let t = read_curves(&dir.path().join("c.csv"));
    let mass = trapezoid(col(&t, "x"), col(&t, "f_bar"));
    assert!((mass - 1.0).abs() < 1e-4, "{mass}");
    let (lo, mid, hi) = (col(&t, "band_min"), col(&t, "band_median"), col(&t, "band_max"));
    assert!((0..lo.len()).all(|i| lo[i] <= mid[i] && mid[i] <= hi[i]));
}

#[test]
fn decide_crossed_losses() {
    // losses x and 25 - x: the averaged model picks `x` iff its mean is below
    // 12.5; data centred at 10 (standard error 0.06) leaves no doubt
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "d.csv", "normal:mean=10,sd=2", None, 1000, 2);
    write_losses(dir.path(), r#"[{"action": "up", "expr": "25 - x"}, {"action": "down", "expr": "x"}]"#);
    let r = ok_json(dir.path(), &["decide", "--data", "d.csv", "--f0", "normal:mean=9,sd=2", "--losses", "l.json", "--B", "40"]);
    assert_eq!(r["result"]["robust_action"], "down");
    let avg = r["result"]["averaged_expected_loss"].as_array().unwrap();
    let (up, down) = (avg[0]["value"].as_f64().unwrap(), avg[1]["value"].as_f64().unwrap());
    assert!((up + down - 25.0).abs() < 1e-9);
    assert!((down - 10.0).abs() < 0.3, "{down}");
    assert_eq!(r["result"]["model0_action"], "down");
}

#[test]
fn bad_loss_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "d.csv", "normal:mean=0,sd=1", None, 100, 3);
    for bad in [
        r#"[{"action": "a", "expr": "x +"}, {"action": "b", "expr": "x"}]"#,
        r#"[{"action": "a", "expr": "x"}]"#,
        r#"[{"action": "a", "expr": "x"}, {"action": "a", "expr": "1"}]"#,
        r#"[{"action": "a", "expr": "x", "table": [[0, 1]]}, {"action": "b", "expr": "x"}]"#,
        r#"[{"action": "a", "table": [[1, 0], [0, 1]]}, {"action": "b", "expr": "x"}]"#,
        r#"{"action": "a"}"#,
    ] {
        write_losses(dir.path(), bad);
        let out = run(dir.path(), &["decide", "--data", "d.csv", "--f0", "normal:mean=0,sd=1", "--losses", "l.json", "--B", "5"]);
        assert!(!out.status.success(), "{bad}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert!(err["error"].as_str().unwrap().contains("l.json"), "{err}");
    }
}

fn write_qp(dir: &Path, rows: &[(f64, f64)]) {
    let text: String = std::iter::once("x,p\n".to_string()).chain(rows.iter().map(|(x, p)| format!("{x},{p}\n"))).collect();
    std::fs::write(dir.join("qp.csv"), text).unwrap();
}

#[test]
fn q2d_two_modes_and_unit_mass() {
    let dir = tempfile::tempdir().unwrap();
    write_qp(dir.path(), &[(-3.40, 0.04), (-2.53, 0.15), (-1.20, 0.39), (0.0, 0.50), (2.0, 0.75), (2.83, 0.90), (3.60, 0.97)]);
    let r = ok_json(dir.path(), &["q2d", "--qp", "qp.csv", "--family", "normal", "--curves", "c.csv"]);
    assert_eq!(r["result"]["method"], "lasso");
    let t = read_curves(&dir.path().join("c.csv"));
    let (x, pdf) = (col(&t, "x"), col(&t, "pdf"));
    let peaks = dsharp::curves::local_maxima(pdf);
    assert_eq!(peaks.len(), 2);
    assert!((trapezoid(x, pdf) - 1.0).abs() < 1e-4);
    assert!((trapezoid(x, col(&t, "f0")) - 1.0).abs() < 1e-4);
}

#[test]
fn q2d_exact_quantiles_give_zero_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let base = BaseModel::normal(1.0, 2.0).unwrap();
    let rows: Vec<(f64, f64)> = [0.1, 0.3, 0.6, 0.9].iter().map(|&p| (base.eval_quantile(p).unwrap(), p)).collect();
    write_qp(dir.path(), &rows);
    let r = ok_json(dir.path(), &["q2d", "--qp", "qp.csv", "--family", "normal", "--m", "3", "--solver", "ols"]);
    assert_eq!(r["result"]["method"], "ols");
    let beta: Vec<f64> = r["result"]["beta"].as_array().unwrap().iter().map(|b| b.as_f64().unwrap()).collect();
    assert!(beta.iter().all(|b| b.abs() < 1e-6), "{beta:?}");
    assert!((r["result"]["base_params"]["mean"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn q2d_rejects_non_monotone_rows() {
    let dir = tempfile::tempdir().unwrap();
    write_qp(dir.path(), &[(0.0, 0.2), (1.0, 0.5), (0.5, 0.7)]);
    let out = run(dir.path(), &["q2d", "--qp", "qp.csv", "--family", "normal"]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("row 3"), "{err}");
}

#[test]
fn q2d_fixed_lambda_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    write_qp(dir.path(), &[(0.12, 0.01), (1.30, 0.20), (3.00, 0.50), (7.00, 0.80), (26.17, 0.99)]);
    let r = ok_json(dir.path(), &["q2d", "--qp", "qp.csv", "--family", "exp", "--lambda", "1e-6"]);
    assert_eq!(r["result"]["lambda"], 1e-6);
    assert_eq!(r["config"]["lambda"], "1e-6");
    for f in r["result"]["fitted"].as_array().unwrap() {
        let (p, c) = (f["p"].as_f64().unwrap(), f["fitted_cdf"].as_f64().unwrap());
        assert!((p - c).abs() < 0.02, "{f}");
    }
}

#[test]
fn combine_identical_experts() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "d.csv", "normal:mean=0,sd=1", None, 400, 4);
    std::fs::write(dir.path().join("e.json"), r#"["logistic:loc=0,scale=0.6", "logistic:loc=0,scale=0.6"]"#).unwrap();
    let r = ok_json(dir.path(), &["combine", "--data", "d.csv", "--experts", "e.json", "--curves", "c.csv"]);
    let experts = r["result"]["experts"].as_array().unwrap();
    assert_eq!(experts[0]["probability"], 0.5);
    assert_eq!(experts[1]["probability"], 0.5);
    let t = read_curves(&dir.path().join("c.csv"));
    assert!((trapezoid(col(&t, "x"), col(&t, "consensus")) - 1.0).abs() < 1e-4);
}

#[test]
fn combine_needs_covering_support() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "d.csv", "normal:mean=0,sd=1", None, 400, 4);
    std::fs::write(dir.path().join("e.json"), r#"["normal:mean=0,sd=1", "exp:mean=1"]"#).unwrap();
    let out = run(dir.path(), &["combine", "--data", "d.csv", "--experts", "e.json"]);
    assert!(!out.status.success());
}

#[test]
fn gbayes_finds_the_truth() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "d.csv", "normal:mean=0.5,sd=1", None, 5000, 6);
    let r = ok_json(
        dir.path(),
        &["gbayes", "--data", "d.csv", "--f0", "normal:mean=0,sd=1", "--grid", "mean=-2:2:0.05", "--curves", "c.csv"],
    );
    let mode = r["result"]["mode"][0].as_f64().unwrap();
    assert!((mode - 0.5).abs() <= 0.1, "{mode}");
    let t = read_curves(&dir.path().join("c.csv"));
    let post = col(&t, "posterior");
    assert_eq!(post.len(), 81);
    assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn gbayes_prior_file_and_two_parameters() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "d.csv", "normal:mean=0,sd=1.5", None, 2000, 8);
    std::fs::write(dir.path().join("p.csv"), "theta,weight\n-0.5,1\n0,1\n0.5,0\n").unwrap();
    let r = ok_json(
        dir.path(),
        &["gbayes", "--data", "d.csv", "--f0", "normal:mean=0,sd=1", "--grid", "mean=-0.5:0.5:0.5", "--prior", "p.csv"],
    );
    assert_eq!(r["result"]["mode"][0], 0.0);
    let r = ok_json(
        dir.path(),
        &[
            "gbayes", "--data", "d.csv", "--f0", "normal:mean=0,sd=1", "--grid", "mean=-0.5:0.5:0.25,sd=1:2:0.25",
            "--divergence", "renyi", "--alpha", "0.3",
        ],
    );
    assert_eq!(r["result"]["grid_points"], 25);
    assert_eq!(r["result"]["divergence"], "renyi:0.3");
    assert!((r["result"]["mode"][1].as_f64().unwrap() - 1.5).abs() <= 0.25);
    // a prior row that is not on the grid
    std::fs::write(dir.path().join("p.csv"), "theta,weight\n-0.5,1\n0.1,1\n0.5,1\n").unwrap();
    let out = run(
        dir.path(),
        &["gbayes", "--data", "d.csv", "--f0", "normal:mean=0,sd=1", "--grid", "mean=-0.5:0.5:0.5", "--prior", "p.csv"],
    );
    assert!(!out.status.success());
}

#[test]
fn simulate_writes_a_readable_sample() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["simulate", "--true-model", "exp:mean=3", "--coeffs", "2:0.2", "--n", "250", "--out", "d.csv", "--report", "r.json"],
    );
    assert!(out.status.success());
    let data = io::read_data(&dir.path().join("d.csv")).unwrap();
    assert_eq!(data.len(), 250);
    assert!(data.min() >= 0.0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["result"]["coeffs"][0]["j"], 2);
    assert!(r["result"]["proposals"].as_u64().unwrap() >= 250);
}

fn args_common() -> Common {
    Common { seed: DEFAULT_SEED, out: None, curves: None }
}

// null data: the chi-square p-value is roughly uniform, so about 99% of runs
// exceed 0.01; 95 of 100 is a loose floor
#[test]
fn diagnose_null_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let base = BaseModel::normal(0.0, 1.0).unwrap();
    let path = dir.path().join("d.csv");
    let mut above = 0;
    for r in 0..100u64 {
        io::write_data(Some(&path), &base.sample(500, DEFAULT_SEED + r)).unwrap();
        let args = DiagnoseArgs { data: path.clone(), f0: "normal:mean=0,sd=1".into(), m: 10, common: args_common() };
        if commands::diagnose(&args).unwrap().result.p_value > 0.01 {
            above += 1;
        }
    }
    assert!(above >= 95, "{above}");
}

// Under the null each of the m raw coefficients satisfies n LP^2 ~ chi2_1
// independently in the limit, and OPEN keeps coefficient j iff n LP_j^2 > 2.
// The chance of an empty selection is P(chi2_1 <= 2)^10 = 0.8427^10 = 0.181.
#[test]
fn null_open_selection_rate_matches_theory() {
    let dir = tempfile::tempdir().unwrap();
    let base = BaseModel::exponential(2.0).unwrap();
    let path = dir.path().join("d.csv");
    let mut empty = 0;
    let runs = 400;
    for r in 0..runs {
        io::write_data(Some(&path), &base.sample(1000, DEFAULT_SEED + r)).unwrap();
        let args = FitArgs { data: path.clone(), f0: "exp:mean=2".into(), m: 10, common: args_common() };
        if commands::fit(&args).unwrap().result.selected.is_empty() {
            empty += 1;
        }
    }
    let rate = empty as f64 / runs as f64;
    let p = 0.8427f64.powi(10);
    let sd = (p * (1.0 - p) / runs as f64).sqrt();
    assert!((rate - p).abs() < 4.0 * sd, "rate {rate}, expected {p:.3}");
}

#[test]
#[ignore = "asks for an empty OPEN selection in 85% of null runs at m = 10; with the gamma = 2 penalty the rate is about 18%"]
fn null_open_selection_is_mostly_empty() {
    let dir = tempfile::tempdir().unwrap();
    let base = BaseModel::exponential(2.0).unwrap();
    let path = dir.path().join("d.csv");
    let mut empty = 0;
    for r in 0..100u64 {
        io::write_data(Some(&path), &base.sample(1000, DEFAULT_SEED + r)).unwrap();
        let args = FitArgs { data: path.clone(), f0: "exp:mean=2".into(), m: 10, common: args_common() };
        if commands::fit(&args).unwrap().result.selected.is_empty() {
            empty += 1;
        }
    }
    assert!(empty >= 85, "{empty}/100");
}
