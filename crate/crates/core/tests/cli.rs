use std::path::PathBuf;
use std::process::{Command, Output};

fn genshare(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genshare"))
        .args(args)
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    root.join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn tune_prints_fixed_share_parameters() {
    let o = genshare(&["tune", "--d", "10", "--m0", "2", "--U0", "100"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(value(&out, "eta"), 1.0736510238978507);
    assert_eq!(value(&out, "alpha"), 0.02);
    assert!((value(&out, "bound") - 26.841275597446267).abs() < 1e-12);

    let o = genshare(&["tune", "--d", "10", "--m0", "2", "--U0", "100", "--L0", "0"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next().unwrap(), "eta = inf");
}

#[test]
fn project_and_bound_subcommands() {
    let o = genshare(&["project", "--alpha", "0.3", "--v", "0.85,0.10,0.05"]);
    let p: Vec<f64> = stdout(&o)
        .trim()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!((p[0] - 0.8).abs() < 1e-15 && (p[1] - 0.1).abs() < 1e-15 && (p[2] - 0.1).abs() < 1e-15);

    let o = genshare(&["bound", "adaptive", "--d", "2", "--tau0", "8"]);
    assert!((value(&stdout(&o), "bound") - 3.850874430885245).abs() < 1e-12);
    assert!((value(&stdout(&o), "relaxed") - 3.884630598777588).abs() < 1e-12);

    let o = genshare(&["bound", "anytime", "--d", "5", "--T", "500"]);
    assert!((value(&stdout(&o), "bound") - 91.3039271997744).abs() < 1e-10);

    let o = genshare(&[
        "bound",
        "bw-decayed",
        "--d",
        "200",
        "--T",
        "100",
        "--eta",
        "1",
        "--alpha",
        "0.1",
        "--m0",
        "9",
        "--n0",
        "2",
    ]);
    assert!(o.status.success());
    let gamma = value(&stdout(&o), "gamma");
    assert!(gamma > 0.0 && gamma.is_finite());

    let o = genshare(&[
        "bound",
        "fixed-share",
        "--d",
        "4",
        "--eta",
        "0.5",
        "--alpha",
        "0.05",
        "--m",
        "1",
        "--u-sum",
        "20",
        "--u1",
        "1",
    ]);
    assert!(o.status.success());
    assert!(value(&stdout(&o), "bound") > 0.0);
}

#[test]
fn invalid_arguments_exit_with_code_two() {
    let o = genshare(&["project", "--alpha", "1.5", "--v", "0.5,0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
    let o = genshare(&["tune", "--d", "0", "--m0", "1", "--U0", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"environment": {"kind": "iid_bernoulli", "means": [0.5, 0.5], "horizon": 10},
            "comparator": {"kind": "segment_best"},
            "forecaster": {"rule": {"kind": "fixed_share", "alpha": 0.1}, "eta": 1.0},
            "repetitions": "many"}"#,
    )
    .unwrap();
    let o = genshare(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`repetitions`"), "{err}");
}

#[test]
fn csv_output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "3", ""].iter().enumerate() {
        let csv = dir.path().join(format!("out{i}.csv"));
        let o = Command::new(env!("CARGO_BIN_EXE_genshare"))
            .args([
                "run",
                &config("fixed_share_segments.json"),
                "--csv",
                csv.to_str().unwrap(),
            ])
            .env("THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
        outputs.push(std::fs::read(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    let text = String::from_utf8(outputs.remove(0)).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "run_id,seed,T,d,regret_kind,regret,m,n,U_sum,L_sum,bound,verdict,wall_ms"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 21);
    for (k, row) in rows[..20].iter().enumerate() {
        assert_eq!(row[0], k.to_string());
        assert_eq!(row[1], (7 + k).to_string());
        assert_eq!(row[11], "pass");
        assert_eq!(row[12].parse::<f64>().unwrap(), 0.0);
    }
    assert_eq!(rows[20][0], "summary");
}

#[test]
fn run_without_csv_writes_to_stdout() {
    let o = genshare(&["run", &config("from_file.json")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3);
    assert!(out
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("0,0,40,3,shifting,"));
}

#[test]
fn certify_passes_on_the_sample_configs() {
    for name in [
        "fixed_share_segments.json",
        "adaptive_flip.json",
        "anytime_intervals.json",
        "discounted_ramp.json",
        "from_file.json",
    ] {
        let o = genshare(&["certify", &config(name)]);
        assert!(o.status.success(), "{name}: {}", stdout(&o));
        let out = stdout(&o);
        assert!(out.lines().last().unwrap().starts_with("summary:"));
        assert!(out
            .lines()
            .filter(|l| l.starts_with("run "))
            .all(|l| l.ends_with("PASS")));
    }
}

#[test]
fn comparators_beyond_the_tuning_caps_get_the_uncapped_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("caps.json");
    std::fs::write(
        &path,
        r#"{"environment": {"kind": "adversarial_flip", "d": 2, "horizon": 400, "noise": 0.0},
            "comparator": {"kind": "worst_window", "tau0": 400},
            "forecaster": {"tune": {"kind": "fixed_share", "m0": 1, "u0": 4}},
            "repetitions": 2}"#,
    )
    .unwrap();
    let o = genshare(&["run", path.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let (regret, bound): (f64, f64) = (row[5].parse().unwrap(), row[10].parse().unwrap());
    let capped = value(
        &stdout(&genshare(&["tune", "--d", "2", "--m0", "1", "--U0", "4"])),
        "bound",
    );
    assert!(
        regret > capped,
        "the window exceeds the caps, so the capped bound need not hold"
    );
    assert!(regret <= bound && bound > capped);
    assert_eq!(row[11], "pass");
}
