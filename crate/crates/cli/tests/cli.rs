use std::process::{Command, Output};

fn pickands(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pickands")).args(args).output().expect("run pickands")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn estimate_record_has_schema_and_repeats_exactly() {
    let args = ["estimate", "--family", "fbm", "--alpha", "2", "--delta", "1", "--method", "albinA", "--reps", "200000", "--seed", "7"];
    let a = pickands(&args);
    let b = pickands(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["method"], "exceedance");
    assert_eq!(v["seed"], 7);
    assert_eq!(v["reps"], 200_000);
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let (est, se) = (v["estimate"].as_f64().unwrap(), v["stderr"].as_f64().unwrap());
    assert!((est - 0.5205).abs() <= 3.0 * se, "{est} +- {se}");
}

#[test]
fn unsupported_combination_exits_2() {
    let out = pickands(&["estimate", "--method", "kabWang", "--family", "levy", "--brownian", "--delta", "1", "--reps", "100"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("negative times"));
    let out = pickands(&["crosscheck", "--family", "levy", "--brownian", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pickands(&["estimate", "--alpha", "2.5", "--delta", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn levy_bound_value() {
    let out = pickands(&["bound", "--family", "levy", "--brownian", "--delta", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["value"].as_f64().unwrap() - 0.052718).abs() < 5e-7);
    assert_eq!(v["formula"], "levy");
}

#[test]
fn crosscheck_small_reps_is_flagged_underpowered() {
    let out = pickands(&["crosscheck", "--alpha", "1.5", "--delta", "1", "--reps", "10"]);
    let v = json(&out);
    assert_eq!(v["underpowered"], true);
    assert_eq!(v["records"].as_array().unwrap().len(), 6);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 15);
    assert!(String::from_utf8_lossy(&out.stderr).contains("underpowered"));
}

#[test]
fn fdd_check_passes() {
    let out = pickands(&["maxstable", "--family", "fbm", "--alpha", "2", "--delta", "1", "--check", "fdd", "--reps", "50000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn maxstable_csv_export_columns() {
    let out = pickands(&["maxstable", "--alpha", "1", "--delta", "0.5", "--horizon", "4", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,t,zeta"));
    assert_eq!(lines.clone().count(), 5);
    assert!(lines.nth(2).unwrap().starts_with("2,1.0,"));
}

#[test]
fn smallball_row_near_constant() {
    let out = pickands(&["smallball", "--alpha", "2", "--eta", "0.1", "--reps", "200000"]);
    let v = json(&out);
    let row = &v["rows"][0];
    assert_eq!(row["eta"], 0.1);
    assert!((row["scaled"].as_f64().unwrap() - 0.7979).abs() < 0.03, "{row}");
    assert!(v.get("extrapolation").is_none());
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join(format!("pickands-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "family = \"fbm\"\nalpha = 2.0\ndelta = 4.0\nreps = 20000\nseed = 5\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = json(&pickands(&["estimate", "--config", cfg]));
    assert_eq!(from_file["delta"], 4.0);
    assert_eq!(from_file["seed"], 5);
    let overridden = json(&pickands(&["estimate", "--config", cfg, "--delta", "1"]));
    assert_eq!(overridden["delta"], 1.0);
    let flags_only = json(&pickands(&["estimate", "--family", "fbm", "--alpha", "2", "--delta", "4", "--reps", "20000", "--seed", "5"]));
    assert_eq!(from_file, flags_only);
    let out = dir.join("out.csv");
    let status = pickands(&["estimate", "--config", cfg, "--format", "csv", "--out", out.to_str().unwrap()]);
    assert!(status.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("method,delta,estimate,stderr,reps,horizon,seed,config_hash,flags\nexceedance,4.0,"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_pickands"))
            .args(["estimate", "--alpha", "0.8", "--delta", "0.5", "--method", "albinB", "--reps", "30000"])
            .env("PICKANDS_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("5"));
}
