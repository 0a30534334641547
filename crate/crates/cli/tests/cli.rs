use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use spinphonon_cli::{config, parse_config_str, Kind, RunConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spinphonon"));
    c.env_remove("SPINPHONON_OUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

/// Checks `required` keys and the declared JSON types, recursively, which
/// is all the published schema uses.
fn conforms(value: &Value, schema: &Value) -> Result<(), String> {
    if let Some(types) = schema.get("type") {
        let allowed: Vec<&str> = match types {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(|v| v.as_str()).collect(),
            _ => vec![],
        };
        let actual = match value {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) if n.is_u64() || n.is_i64() => "integer",
            Value::Number(_) => "number",
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        let ok = allowed.contains(&actual) || (actual == "integer" && allowed.contains(&"number"));
        if !ok {
            return Err(format!("{value} is not of type {allowed:?}"));
        }
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(value) {
            return Err(format!("{value} not in enum"));
        }
    }
    if let Some(Value::Array(req)) = schema.get("required") {
        for k in req {
            let k = k.as_str().unwrap();
            if value.get(k).is_none() {
                return Err(format!("missing required key {k}"));
            }
        }
    }
    if let Some(Value::Object(props)) = schema.get("properties") {
        for (k, sub) in props {
            if let Some(v) = value.get(k) {
                conforms(v, sub).map_err(|e| format!("{k}: {e}"))?;
            }
        }
    }
    if let (Some(items), Value::Array(vs)) = (schema.get("items"), value) {
        for v in vs {
            conforms(v, items)?;
        }
    }
    Ok(())
}

#[test]
fn pulse_design_reports_hold_durations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "[design]\ndelta_r2 = 0.0003\n").unwrap();
    let out = tmp.path().join("out");
    let o = run(&["pulse-design", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--plot"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    let t0 = s["results"]["t0_ns"].as_f64().unwrap();
    assert!((t0 - 5833.33).abs() < 0.01, "{t0}");
    assert!((s["derived"]["t0_ns"].as_f64().unwrap() - 7.0 / (4.0 * 0.0003)).abs() < 1e-9);
    assert!((s["derived"]["delta_gamma"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-6);
    assert!(out.join("schedule.csv").exists() && out.join("schedule.svg").exists());
    let schema: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.schema.json")).unwrap()).unwrap();
    conforms(&s, &schema).unwrap();
}

#[test]
fn darkstate_with_equal_amplitudes_is_balanced() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["darkstate", "--out", tmp.path().to_str().unwrap()]);
    assert!(o.status.success());
    let s = summary(tmp.path());
    let d1 = s["results"]["d1"].as_array().unwrap();
    assert_eq!(d1.len(), 2);
    for t in d1 {
        assert!((t["re"].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(t["im"].as_f64().unwrap().abs() < 1e-12);
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("D1 |1 g1>: 0.707107"), "{stdout}");
}

#[test]
fn negative_phonon_decay_is_rejected_with_field_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "[decoherence]\ngamma_m1 = -1e-6\n").unwrap();
    let o = run(&["odro", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("decoherence.gamma_m1"));
    assert!(!tmp.path().join("o").exists(), "nothing is written for an invalid config");
}

#[test]
fn schema_errors_carry_field_paths_and_exit_codes_differ() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "[leakage]\nsamples = \"many\"\n").unwrap();
    let o = run(&["leakage", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("leakage.samples"));

    let o = run(&["leakage", "--config", tmp.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(6));

    // Output directory path occupied by a regular file.
    let blocked = tmp.path().join("file");
    fs::write(&blocked, "x").unwrap();
    let o = run(&["darkstate", "--out", blocked.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(5));

    let o = run(&["no-such-experiment"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn effective_config_round_trips() {
    for kind in [Kind::Odro, Kind::Swap, Kind::Cz, Kind::Dicke, Kind::SdBenchmark, Kind::Chevron] {
        let resolved = RunConfig::default().resolve(kind).unwrap();
        let text = config::to_toml(&resolved).unwrap();
        let back = parse_config_str(&text).unwrap();
        assert_eq!(back, resolved, "{}", kind.name());
        assert_eq!(back.clone().resolve(kind).unwrap(), resolved);
    }
}

#[test]
fn validate_only_prints_the_effective_config() {
    let o = run(&["cz", "--validate-only", "--seed", "7"]);
    assert!(o.status.success());
    let cfg = parse_config_str(&String::from_utf8_lossy(&o.stdout)).unwrap();
    assert_eq!(cfg.kind, Some(Kind::Cz));
    assert_eq!(cfg.seed, Some(7));
    assert_eq!(cfg.system.delta, Some(0.0));
    assert_eq!(cfg.decoherence.gamma_e_phi, Some(0.0));
}

#[test]
fn output_dir_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = bin().arg("darkstate").env("SPINPHONON_OUT", tmp.path()).output().unwrap();
    assert!(o.status.success());
    assert!(tmp.path().join("darkstate.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "[sd]\nn_traj = 4\nprep_times = [439.0, 1737.0]\n").unwrap();
    let dirs: Vec<_> = ["a", "b"].iter().map(|d| tmp.path().join(d)).collect();
    for (d, jobs) in dirs.iter().zip(["1", "2"]) {
        let o = run(&["sd-benchmark", "--config", cfg.to_str().unwrap(), "--seed", "11", "--jobs", jobs, "--out", d.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["sd_summary.csv", "sd_trajectories.csv", "config.toml"] {
        assert_eq!(fs::read(dirs[0].join(f)).unwrap(), fs::read(dirs[1].join(f)).unwrap(), "{f}");
    }
    let s = summary(&dirs[0]);
    assert_eq!(s["seed"], 11);
}
