use std::process::Command;

fn koppelman(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_koppelman"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn koppelman_verify_on_cusp() {
    let (code, out, err) = koppelman(&[
        "koppelman",
        "--curve",
        "cusp:2,3",
        "--verify",
        "--targets",
        "6",
    ]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 7);
    assert!(lines.last().unwrap().contains("\"verdict\":\"pass\""));
}

#[test]
fn obstruction_intro_example() {
    let args = [
        "obstruction",
        "--curve",
        "map:t^3,t^7+t^8",
        "--mu",
        "3*(conj(t)^9+conj(t)^10)",
        "--order",
        "12",
    ];
    let (code, out, _) = koppelman(&args);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["verdict"], "Infeasible");
    assert!(!v["params"]["certificate"].as_array().unwrap().is_empty());
    // byte-reproducible
    assert_eq!(koppelman(&args).1, out);
}

#[test]
fn obstruction_order_too_small_is_a_validation_error() {
    let (code, _, err) = koppelman(&[
        "obstruction",
        "--curve",
        "map:t^3,t^7+t^8",
        "--mu",
        "3*(conj(t)^9+conj(t)^10)",
        "--order",
        "2",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("too small"));
}

#[test]
fn malformed_config_exits_with_1() {
    let dir = std::env::temp_dir().join(format!("koppelman-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.toml");
    std::fs::write(&cfg, "[curve]\nkind = \"cusp\"\nr = 2\ns = 4\n").unwrap();
    let (code, _, err) = koppelman(&["residue", "--m", "1", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("gcd"), "{err}");
    let (code, _, _) = koppelman(&[
        "kernel", "eval", "--curve", "cusp:3,6", "--tau", "0.5", "--t", "0.1",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn residue_csv_output() {
    let dir = std::env::temp_dir().join(format!("koppelman-csv-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("residue.csv");
    let (code, _, err) = koppelman(&[
        "residue",
        "--m",
        "2",
        "--psi",
        "t + conj(t)",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let main = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        main.lines().next(),
        Some("t_re,t_im,value_re,value_im,error")
    );
    let trace = std::fs::read_to_string(path.with_extension("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 9);
}

#[test]
fn kernel_eval_reports_factor() {
    let (code, out, _) = koppelman(&[
        "kernel", "eval", "--curve", "cusp:2,3", "--tau", "2", "--t", "1",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert!((v["value_re"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(v["params"]["origin_pole_order"], 2);
}

#[test]
fn membership_flags_planted_pole() {
    let (code, out, _) = koppelman(&[
        "membership",
        "--curve",
        "cusp:2,3",
        "--u",
        "t^2*conj(t)",
        "--planted",
        "0.5,-0.25",
        "--correct",
    ]);
    assert_eq!(code, 0);
    let verdicts: Vec<String> = out
        .lines()
        .filter_map(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .filter_map(|v| v["verdict"].as_str().map(String::from))
        .collect();
    assert_eq!(verdicts.len(), 2);
    assert!(verdicts[0].starts_with("Fail"));
    assert_eq!(verdicts[1], "Pass");
}
