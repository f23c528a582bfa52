//! Exit-code contract and output checks for every subcommand:
//! 0 = success/pass, 1 = checked-condition failure, 2 = usage/I-O/parse
//! error.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermopiezo"))
}

fn reference_material_json() -> serde_json::Value {
    serde_json::json!({
        "kind": "isotropic",
        "rho": 1.0, "T0": 1.0, "beta": 1.0, "alpha4": 0.0, "gamma": 1.0,
        "lambda": 1.0, "mu": 1.0,
        "gamma1": 0.0, "gamma2": 0.0, "gamma3": 1.0, "gamma4": 1.0, "gamma5": 0.0,
        "lambdaStar": 0.1, "muStar": 0.1, "alpha0": 0.1, "beta0": 0.1,
        "lambdaTilde": -1.0, "muTilde": -0.5,
        "alpha14": 0.2, "alpha33": -1.0, "alpha47": 0.1, "alpha66": 1.0, "a44": -2.0
    })
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("process exited")
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_json(dir.path(), "good.json", &reference_material_json());
    let out = bin().arg("check").arg(&good).output().unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["admissible"], true);
    assert_eq!(report["theorem2_hypotheses"], true);

    // flipping mu breaks the shear condition
    let mut bad = reference_material_json();
    bad["mu"] = (-1.0).into();
    let bad = write_json(dir.path(), "bad.json", &bad);
    let out = bin().arg("check").arg(&bad).output().unwrap();
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let w1 = report["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "W1: mu >= 0")
        .expect("W1 condition present");
    assert_eq!(w1["pass"], false);
    assert_eq!(w1["margin"], -1.0);

    let out = bin().arg("check").arg("/nonexistent/m.json").output().unwrap();
    assert_eq!(code(&out), 2);

    // --out writes the report to a file
    let report_path = dir.path().join("report.json");
    let out = bin()
        .arg("check")
        .arg(&good)
        .arg("--out")
        .arg(&report_path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&report_path).unwrap();
    assert!(text.contains("\"admissible\": true"));
}

#[test]
fn check_respects_tol_env() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_json(dir.path(), "good.json", &reference_material_json());
    // an absurd tolerance makes every strict condition fail
    let out = bin()
        .arg("check")
        .arg(&good)
        .env("THERMOPIEZO_TOL", "1e9")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    // malformed env value is a usage error
    let out = bin()
        .arg("check")
        .arg(&good)
        .env("THERMOPIEZO_TOL", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    // explicit flag overrides the env
    let out = bin()
        .arg("check")
        .arg(&good)
        .arg("--tol")
        .arg("1e-10")
        .env("THERMOPIEZO_TOL", "1e9")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}

#[test]
fn eval_outputs_response_and_forms() {
    let dir = tempfile::tempdir().unwrap();
    let material = write_json(dir.path(), "m.json", &reference_material_json());

    let zero_state = write_json(dir.path(), "zero.json", &serde_json::json!({}));
    let out = bin().arg("eval").arg(&material).arg(&zero_state).output().unwrap();
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["response"]["rhoEta"], 0.0);
    assert_eq!(v["forms"]["W"], 0.0);
    assert_eq!(v["forms"]["lyapunovDensity"], 0.0);

    // a pure temperature gradient drives only the heat flux
    let grad_state = write_json(
        dir.path(),
        "grad.json",
        &serde_json::json!({"gradTheta": [1.0, 0.0, 0.0]}),
    );
    let out = bin().arg("eval").arg(&material).arg(&grad_state).output().unwrap();
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let q = v["response"]["q"].as_array().unwrap();
    assert_eq!(q[0].as_f64().unwrap(), -1.0);
    assert_eq!(
        v["response"]["tau"],
        serde_json::json!([0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    );
    assert_eq!(v["response"]["sigma"], serde_json::json!([0.0, 0.0, 0.0]));
    assert_eq!(v["response"]["rhoEta"], 0.0);

    // unknown key is a parse error naming the key
    let bad_state = write_json(
        dir.path(),
        "bad.json",
        &serde_json::json!({"gradTemp": [1.0, 0.0, 0.0]}),
    );
    let out = bin().arg("eval").arg(&material).arg(&bad_state).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("gradTemp"));
}

#[test]
fn simulate_exit_codes_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let material = reference_material_json();

    // zero-data run: trace of zeros, exit 0
    let config = serde_json::json!({
        "material": material,
        "grid": {"length": 1.0, "nodes": 16},
        "dt": 1e-3,
        "steps": 5
    });
    let config_path = write_json(dir.path(), "zero.json", &config);
    let trace_path = dir.path().join("zero.csv");
    let out = bin()
        .arg("simulate")
        .arg(&config_path)
        .arg("--out")
        .arg(&trace_path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&trace_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "step,time,lyapunov,dissipation,max_u,max_theta,max_phi"
    );
    assert_eq!(csv.lines().count(), 7); // header + step 0 + 5 steps
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2].parse::<f64>().unwrap(), 0.0);
    }

    // decay scenario: final < initial, exit 0
    let config = serde_json::json!({
        "material": material,
        "grid": {"length": 1.0, "nodes": 24},
        "dt": 1e-3,
        "steps": 200,
        "initial": {
            "u": {"profile": "randomSmooth", "amplitude": 0.5, "modes": 4},
            "theta": {"profile": "randomSmooth", "amplitude": 0.4, "modes": 3}
        },
        "seed": 11
    });
    let config_path = write_json(dir.path(), "decay.json", &config);
    let trace_path = dir.path().join("decay.csv");
    let out = bin()
        .arg("simulate")
        .arg(&config_path)
        .arg("--out")
        .arg(&trace_path)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["monotone"], true);
    assert!(
        summary["finalLyapunov"].as_f64().unwrap() < summary["initialLyapunov"].as_f64().unwrap()
    );
    assert_eq!(summary["seed"], 11);

    // inadmissible material is rejected without --force
    let mut bad_material = reference_material_json();
    bad_material["muTilde"] = 0.5.into();
    let config = serde_json::json!({
        "material": bad_material,
        "grid": {"length": 1.0, "nodes": 16},
        "dt": 1e-3,
        "steps": 3
    });
    let config_path = write_json(dir.path(), "inadmissible.json", &config);
    let out = bin()
        .arg("simulate")
        .arg(&config_path)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["admissible"], false);

    // --force runs it anyway (zero data: trivially monotone)
    let out = bin()
        .arg("simulate")
        .arg(&config_path)
        .arg("--out")
        .arg(dir.path().join("x.csv"))
        .arg("--force")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // malformed config
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{ not json").unwrap();
    let out = bin()
        .arg("simulate")
        .arg(&broken)
        .arg("--out")
        .arg(dir.path().join("y.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn oracle_exit_codes() {
    let out = bin().arg("oracle").arg("--samples").arg("0").output().unwrap();
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["total_compared"], 0);
    assert_eq!(report["agreement_fraction"], 1.0);

    let out = bin()
        .arg("oracle")
        .arg("--samples")
        .arg("50")
        .arg("--range")
        .arg("2")
        .arg("--seed")
        .arg("1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["total_disagreements"], 0);
    assert_eq!(report["seed"], 1);

    // negative sample count is a usage error (clap exits 2)
    let out = bin().arg("oracle").arg("--samples").arg("-3").output().unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn oracle_reports_are_deterministic() {
    let run = || {
        let out = bin()
            .arg("oracle")
            .arg("--samples")
            .arg("30")
            .arg("--seed")
            .arg("7")
            .output()
            .unwrap();
        assert_eq!(code(&out), 0);
        out.stdout
    };
    assert_eq!(run(), run());
}

fn aniso_file_json() -> serde_json::Value {
    use thermopiezo::material::{expand_isotropic, IsoMaterial};
    let a = expand_isotropic(&IsoMaterial::reference());
    let flat9 = |s: thermopiezo::tensor::Sym2| -> Vec<f64> {
        s.full().iter().flatten().copied().collect()
    };
    serde_json::json!({
        "kind": "anisotropic",
        "rho": a.rho, "T0": a.t0, "beta": a.beta, "alpha4": a.alpha4,
        "gamma": a.gamma, "a44": a.a44,
        "a11": a.a11.to_vec(), "a12": a.a12.to_vec(), "a13": a.a13.to_vec(),
        "a14": flat9(a.a14), "a17": a.a17.to_vec(), "a22": a.a22.to_vec(),
        "a23": a.a23.to_vec(), "a24": a.a24.to_vec(), "a27": a.a27.to_vec(),
        "a33": flat9(a.a33), "a34": a.a34.to_vec(), "a37": a.a37.to_vec(),
        "a47": flat9(a.a47), "a56": a.a56.to_vec(), "a66": flat9(a.a66),
        "a77": a.a77.to_vec(),
    })
}

#[test]
fn anisotropic_material_files_work_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let aniso = write_json(dir.path(), "aniso.json", &aniso_file_json());

    // the numeric eigenvalue route certifies the expanded reference material
    let out = bin().arg("check").arg(&aniso).output().unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["route"], "numeric-eigenvalue");
    assert_eq!(report["admissible"], true);
    assert_eq!(report["theorem2_hypotheses"], serde_json::Value::Null);

    // eval agrees with the isotropic route on the same state
    let state = write_json(
        dir.path(),
        "state.json",
        &serde_json::json!({"gradTheta": [1.0, 0.0, 0.0], "theta": 0.5}),
    );
    let out = bin().arg("eval").arg(&aniso).arg(&state).output().unwrap();
    assert_eq!(code(&out), 0);
    let v_aniso: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();

    let iso = write_json(dir.path(), "iso.json", &reference_material_json());
    let out = bin().arg("eval").arg(&iso).arg(&state).output().unwrap();
    assert_eq!(code(&out), 0);
    let v_iso: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v_aniso["response"], v_iso["response"]);
    assert_eq!(v_aniso["forms"], v_iso["forms"]);

    // a broken symmetry in the file is rejected on load
    let mut broken = aniso_file_json();
    broken["a11"][1] = 9.0.into();
    let broken = write_json(dir.path(), "broken.json", &broken);
    let out = bin().arg("check").arg(&broken).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("symmetry"));
}
