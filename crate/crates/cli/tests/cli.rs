use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use attractor_core::domain::io::load_field;
use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_attractor-dim");

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("ATTRACTOR_DIM_CONSTANTS")
        .output()
        .unwrap()
}

fn run_cfg(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn record(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const FREE: &str = "[grid]\npoints = 4\n\n[problem]\nbeta = 0\n";

const CUBIC: &str = "\
[grid]
points = 5

[problem]
f.source = gauss 0.5 0.5 0.5 0.5 0.2
f.cubic = -1
dissipation = 1

[time]
dt = 0.004
t_end = 0.2
solver = direct

[dimension]
ensemble = 3
d_max = 3
burn_in = 0.05

[verify]
samples = 4
pairs = 2
pair_horizon = 0.02
";

#[test]
fn bound_on_free_problem_gives_dimension_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "free.ini", FREE);
    let out = tmp.path().join("out");
    let o = run_cfg("bound", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = record(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["outputs"]["bound"]["d_final"], 1);
    assert_eq!(r["outputs"]["bound"]["d_const"], 0.0);
    assert!(r["outputs"]["bound"]["constants"]["entries"]["k_lt.2.5"]["provenance"]
        .as_str()
        .is_some_and(|s| !s.is_empty()));
    assert!(out.join("report.csv").exists());
    assert!(out.join("bound.svg").exists());
}

#[test]
fn strongly_negative_potential_is_a_hypothesis_violation() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "neg.ini", &FREE.replace("beta = 0", "beta = -100"));
    let out = tmp.path().join("out");
    let o = run_cfg("spectrum", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let r = record(&out);
    assert_eq!(r["status"], "hypothesis_violation");
    assert!(r["error"].as_str().unwrap().contains("smallest eigenvalue"));
}

#[test]
fn infinite_margin_is_inconclusive() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{CUBIC}\n[output]\nformats = json\n").replace("burn_in = 0.05", "burn_in = 0.05\nmargin = inf");
    let cfg = write(tmp.path(), "inf.ini", &text);
    let out = tmp.path().join("out");
    let o = run_cfg("dim-estimate", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert_eq!(record(&out)["outputs"]["dimension"]["outcome"]["status"], "inconclusive");
    // json only
    assert!(!out.join("series.csv").exists());
}

#[test]
fn spectrum_on_free_problem_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "free.ini", FREE);
    let out = tmp.path().join("out");
    let o = run_cfg("spectrum", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = record(&out);
    let l1 = r["outputs"]["spectrum"]["eigenvalues"][0].as_f64().unwrap();
    let h: f64 = 0.2;
    let exact = 12.0 / (h * h) * (std::f64::consts::PI * h / 2.0).sin().powi(2);
    assert!((l1 - exact).abs() < 1e-9 * exact, "{l1} vs {exact}");
}

fn strip_timestamps(text: &str) -> String {
    text.lines().filter(|l| !l.contains("_unix_ms")).collect::<Vec<_>>().join("\n")
}

#[test]
fn same_config_twice_gives_identical_records() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "cubic.ini", CUBIC);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let oa = run_cfg("dim-estimate", &cfg, &a, &["--threads", "1"]);
    let ob = run_cfg("dim-estimate", &cfg, &b, &["--threads", "3"]);
    assert_eq!(oa.status.code(), Some(0), "{}", stderr(&oa));
    assert_eq!(ob.status.code(), Some(0), "{}", stderr(&ob));
    let ta = std::fs::read_to_string(a.join("run.json")).unwrap();
    let tb = std::fs::read_to_string(b.join("run.json")).unwrap();
    assert!(ta.contains("started_unix_ms"));
    assert_eq!(strip_timestamps(&ta), strip_timestamps(&tb));
    assert_eq!(
        std::fs::read(a.join("series.csv")).unwrap(),
        std::fs::read(b.join("series.csv")).unwrap()
    );

    // reordered sections and keys hash identically
    let mut sections: Vec<&str> = CUBIC.split("\n\n").collect();
    sections.reverse();
    let reordered = sections.join("\n\n").replace("dt = 0.004\nt_end = 0.2", "t_end = 0.2\ndt   = 0.004");
    let cfg2 = write(tmp.path(), "cubic2.ini", &reordered);
    let c = tmp.path().join("c");
    let oc = run_cfg("dim-estimate", &cfg2, &c, &[]);
    assert_eq!(oc.status.code(), Some(0), "{}", stderr(&oc));
    assert_eq!(record(&a)["config_hash"], record(&c)["config_hash"]);

    let d = tmp.path().join("d");
    run_cfg("dim-estimate", &cfg, &d, &["--seed", "7"]);
    assert_ne!(
        record(&a)["outputs"]["dimension"]["criterion"],
        record(&d)["outputs"]["dimension"]["criterion"]
    );
}

#[test]
fn config_errors_are_all_reported_with_lines() {
    let tmp = TempDir::new().unwrap();
    let text = "[grid]\npoints = 4\npoints = 5\n[problem]\nbeta = 0\nshape = round\n[constants]\ndelta = 1.5 | test\n";
    let cfg = write(tmp.path(), "bad.ini", text);
    let out = tmp.path().join("out");
    let o = run_cfg("bound", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("3 error(s)"), "{err}");
    assert!(err.contains("line 3: duplicate key `points` in [grid] on lines 2 and 3"), "{err}");
    assert!(err.contains("line 6: unknown key `shape` in [problem]"), "{err}");
    assert!(err.contains("line 8: delta must lie in (0,1)"), "{err}");
    assert!(!out.exists());
}

#[test]
fn missing_section_and_usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "nogrid.ini", "[problem]\nbeta = 0\n");
    let o = run_cfg("bound", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing section [grid]"));

    assert_eq!(run(&["bound"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn constant_without_provenance_is_refused_when_used() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "p.ini", &format!("{FREE}[constants]\nk_lt.2.5 = 0.3\n"));
    let out = tmp.path().join("out");
    let o = run_cfg("bound", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(record(&out)["error"].as_str().unwrap().contains("k_lt.2.5"));

    // simulate does not use it
    let o = run_cfg("simulate", &cfg, &tmp.path().join("sim"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn constants_file_from_environment_is_layered() {
    let tmp = TempDir::new().unwrap();
    let consts = write(tmp.path(), "c.ini", "[constants]\ndelta = 0.25 | site policy\nm_b = 6 | site table\n");
    let cfg = write(tmp.path(), "free.ini", &format!("{FREE}[constants]\nm_b = 7 | own value\n"));
    let out = tmp.path().join("out");
    let o = Command::new(BIN)
        .args(["bound", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("ATTRACTOR_DIM_CONSTANTS", &consts)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = record(&out);
    let e = &r["outputs"]["bound"]["constants"]["entries"];
    assert_eq!(e["delta"]["value"], 0.25);
    assert_eq!(e["delta"]["provenance"], "site policy");
    assert_eq!(e["m_b"]["value"], 7.0);
    assert_eq!(r["outputs"]["bound"]["inputs"]["delta"], 0.25);

    let bad = write(tmp.path(), "bad.ini", "[grid]\npoints = 3\n");
    let o = Command::new(BIN)
        .args(["bound", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("ATTRACTOR_DIM_CONSTANTS", &bad)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_writes_series_and_readable_snapshots() {
    let tmp = TempDir::new().unwrap();
    let text = format!("{CUBIC}\n[output]\nsnapshots = 3\n");
    let cfg = write(tmp.path(), "cubic.ini", &text);
    let out = tmp.path().join("out");
    let o = run_cfg("simulate", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = record(&out);
    let snaps: Vec<String> = r["outputs"]["trajectory"]["snapshots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(snaps, ["u_000000.fld", "u_000025.fld", "u_000050.fld"]);
    let last = load_field(out.join(&snaps[2])).unwrap();
    assert_eq!(last.grid().points(), [5, 5, 5]);
    let l2 = (last.dot(&last)).sqrt();
    let reported = r["outputs"]["trajectory"]["final"]["l2"].as_f64().unwrap();
    assert!((l2 - reported).abs() <= 1e-12 * reported.max(1.0));
    let series = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(series.lines().next(), Some("time,l2,h1,lyapunov"));
    assert_eq!(series.lines().count(), 52);
    assert!(out.join("norms.svg").exists());
}

#[test]
fn verify_passes_on_cubic_problem() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "cubic.ini", CUBIC);
    let out = tmp.path().join("out");
    let o = run_cfg("verify", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let checks = record(&out)["outputs"]["verify"]["checks"].as_array().unwrap().clone();
    assert_eq!(checks.len(), 8);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn report_needs_records() {
    let o = run(&["report"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("at least one"));
}

#[test]
fn report_on_one_record_has_one_row_and_flags_grids() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "free.ini", FREE);
    let a = tmp.path().join("a");
    run_cfg("bound", &cfg, &a, &[]);
    let rep = tmp.path().join("rep");
    let o = run(&["report", a.join("run.json").to_str().unwrap(), "--out", rep.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(rep.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("free,"));
    assert!(rep.join("bound_vs_estimate.svg").exists());

    let cfg5 = write(tmp.path(), "five.ini", &FREE.replace("points = 4", "points = 5"));
    let b = tmp.path().join("b");
    run_cfg("bound", &cfg5, &b, &[]);
    let o = run(&[
        "report",
        a.join("run.json").to_str().unwrap(),
        b.join("run.json").to_str().unwrap(),
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(rep.join("report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(!rows[0].contains("incompatible"));
    assert!(rows[1].contains("incompatible grid 5x5x5 (reference 4x4x4)"), "{}", rows[1]);
}

#[test]
fn sweep_over_linear_coefficient_gives_monotone_columns() {
    let tmp = TempDir::new().unwrap();
    let mut records = Vec::new();
    for (i, c) in [0.0, 20.0, 40.0].iter().enumerate() {
        let text = format!(
            "[grid]\npoints = 4\n[problem]\nf.linear = {c}\n[time]\ndt = 0.005\nt_end = 1\nsolver = direct\n\
             [dimension]\nd_max = 4\nburn_in = 0.3\n[output]\nlabel = c{c}\n"
        );
        let cfg = write(tmp.path(), &format!("c{i}.ini"), &text);
        for cmd in ["bound", "dim-estimate"] {
            let out = tmp.path().join(format!("{cmd}-{i}"));
            let o = run_cfg(cmd, &cfg, &out, &[]);
            assert_eq!(o.status.code(), Some(0), "{cmd} c = {c}: {}", stderr(&o));
            records.push(out.join("run.json").to_str().unwrap().to_string());
        }
    }
    let rep = tmp.path().join("rep");
    let mut args = vec!["report".to_string()];
    args.extend(records);
    args.extend(["--out".into(), rep.to_str().unwrap().into()]);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));

    let mut rdr = csv::Reader::from_path(rep.join("report.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let col = |name: &str| -> Vec<u64> {
        let i = headers.iter().position(|h| h == name).unwrap();
        rows.iter().map(|r| r[i].parse().unwrap()).collect()
    };
    let d_final = col("d_final");
    let estimate = col("estimate");
    assert!(d_final.windows(2).all(|w| w[0] <= w[1]), "{d_final:?}");
    assert!(estimate.windows(2).all(|w| w[0] <= w[1]), "{estimate:?}");
    // one eigenvalue of A lies below 40, so two-dimensional volumes are the first to contract
    assert_eq!(estimate, [1, 1, 2]);
    assert!(d_final.iter().zip(&estimate).all(|(b, e)| b >= e));
}
