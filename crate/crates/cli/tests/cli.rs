use std::process::{Command, Output};

fn steklov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steklov"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn growth_csv_has_documented_columns() {
    let o = steklov(&[
        "steklov",
        "--grid-log2",
        "12",
        "--beta",
        "0.3",
        "--p",
        "6",
        "--nmax",
        "512",
        "--quiet",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("family,beta,p,n,norm,grid_log2,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.starts_with("fisher_hartwig,")));
    assert!(rows[5].contains(",512,"));
}

#[test]
fn growth_json_carries_fit_summary() {
    let o = steklov(&[
        "steklov",
        "--grid-log2",
        "12",
        "--nmax",
        "256",
        "--format",
        "json",
        "--seed",
        "7",
        "--quiet",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["experiment"], "fh_growth");
    assert_eq!(doc["seed"], 7);
    assert!(doc["version"].is_string());
    let fit = &doc["fit"];
    for key in ["exponent", "r2", "predicted_exponent", "pass"] {
        assert!(!fit[key].is_null(), "missing {key}");
    }
    assert!((fit["predicted_exponent"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows[0]["family"], "fisher_hartwig");
    assert_eq!(rows[0]["n"], 16);
}

#[test]
fn writes_to_out_path() {
    let path = std::env::temp_dir().join(format!("steklov-cli-{}.csv", std::process::id()));
    let o = steklov(&[
        "entropy",
        "--family",
        "constant",
        "--grid-log2",
        "10",
        "--n",
        "4,8,16",
        "--quiet",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(text.starts_with("family,param,n,entropy,limit,gap,strong_szego_l2,grid_log2\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn rejected_input_exits_with_code_4() {
    // degree must stay below N/4
    assert_eq!(steklov(&["steklov", "--grid-log2", "10", "--nmax", "256"]).status.code(), Some(4));
    assert_eq!(
        steklov(&["steklov", "--grid-log2", "10", "--nmax", "64", "--p", "1"]).status.code(),
        Some(4)
    );
    assert_eq!(steklov(&["a2", "--grid-log2", "3"]).status.code(), Some(4));
    assert_eq!(steklov(&["a2", "--format", "xml"]).status.code(), Some(4));
    assert_eq!(steklov(&["nonsense"]).status.code(), Some(4));
}

#[test]
fn module_errors_keep_the_record() {
    // β = 0.6 is outside A_2, so the Clark construction refuses it mid-run
    let o = steklov(&["clark", "--grid-log2", "10", "--beta", "0.6", "--format", "json", "--quiet"]);
    assert_eq!(o.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["status"], "error");
    assert!(doc["failure"].is_string());
}

#[test]
fn failing_checks_exit_with_code_3() {
    // tighten the A2 band so that [w](1-2β) = 0.92 at β = 0.48 falls outside
    let frozen = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/thresholds.toml")).unwrap();
    let strict = frozen.replace("band_high = 1.0", "band_high = 0.8");
    assert_ne!(frozen, strict);
    let path = std::env::temp_dir().join(format!("steklov-strict-{}.toml", std::process::id()));
    std::fs::write(&path, strict).unwrap();
    let o = steklov(&[
        "a2",
        "--grid-log2",
        "12",
        "--beta",
        "0.3,0.48",
        "--quiet",
        "--thresholds",
        path.to_str().unwrap(),
    ]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(3));
    let broken = steklov(&["a2", "--thresholds", "/nonexistent/thresholds.toml"]);
    assert_eq!(broken.status.code(), Some(4));
}

fn seed_column(o: &Output) -> Vec<String> {
    stdout(o)
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect()
}

#[test]
fn seeds_are_reproducible_and_per_cell() {
    let args = |seed: &'static str| {
        [
            "projection",
            "--grid-log2",
            "10",
            "--beta",
            "0.2",
            "--p",
            "3",
            "--n",
            "16,32",
            "--trials",
            "2",
            "--seed",
            seed,
            "--quiet",
        ]
    };
    let a = steklov(&args("11"));
    let b = steklov(&args("11"));
    let c = steklov(&args("12"));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let seeds = seed_column(&a);
    assert_eq!(seeds.len(), 2);
    assert_ne!(seeds[0], seeds[1]);
    assert_ne!(seeds, seed_column(&c));
}

#[test]
fn list_names_every_experiment() {
    let o = steklov(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for name in [
        "a2_scaling",
        "fh_growth",
        "entropy_limit",
        "strong_szego",
        "continuity",
        "clark_duality",
        "projection_bound",
        "pcr_upper_trend",
        "opuc_orthonormality",
    ] {
        assert!(text.contains(name), "{name}");
    }
}
