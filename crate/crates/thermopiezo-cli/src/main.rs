//! Command-line front end: admissibility checks, constitutive evaluation,
//! 1D simulation, and the closed-form vs numeric cross-validation oracle.
//!
//! Machine-readable JSON goes to stdout; human summary lines go to stderr.
//! Exit codes: 0 = success / all checks passed, 1 = a checked condition
//! failed, 2 = usage, I/O or parse error.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thermopiezo::admissibility::{
    check_isotropic, check_numeric, cross_validate, AdmissibilityReport, DEFAULT_EIGEN_TOL,
};
use thermopiezo::constitutive::{evaluate, form_f, form_g, form_p, form_w, lyapunov_density, LocalState};
use thermopiezo::material::{load_material, Material};
use thermopiezo::sim1d::{parse_sim_config, run, write_trace_csv};

#[derive(Parser)]
#[command(
    name = "thermopiezo",
    about = "Thermopiezoelectricity of second-gradient solids: constitutive evaluation, admissibility certification, 1D energy-decay simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the uniqueness-theorem hypotheses of a material file
    Check {
        /// Material file (JSON)
        material: PathBuf,
        /// Tolerance override (default 1e-10, or THERMOPIEZO_TOL)
        #[arg(long)]
        tol: Option<f64>,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the constitutive map and quadratic forms on a state file
    Eval {
        /// Material file (JSON)
        material: PathBuf,
        /// State file (JSON; missing fields default to zero)
        state: PathBuf,
    },
    /// Run the 1D simulator and write the per-step trace as CSV
    Simulate {
        /// Simulation configuration file (JSON)
        config: PathBuf,
        /// Trace output path
        #[arg(long, default_value = "trace.csv")]
        out: PathBuf,
        /// Run even if the material fails the admissibility check; the
        /// monotonicity verdict is then informational only
        #[arg(long)]
        force: bool,
    },
    /// Cross-validate the closed-form inequality lists against the
    /// eigenvalue route on random isotropic materials
    Oracle {
        #[arg(long, default_value_t = 10000)]
        samples: usize,
        #[arg(long, default_value_t = 2.0)]
        range: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn tolerance(flag: Option<f64>) -> Result<f64, String> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var("THERMOPIEZO_TOL") {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("THERMOPIEZO_TOL is not a decimal number: {s:?}")),
        Err(_) => Ok(DEFAULT_EIGEN_TOL),
    }
}

fn report_for(material: &Material, tol: f64) -> Result<AdmissibilityReport, thermopiezo::Error> {
    match material {
        Material::Isotropic(m) => Ok(check_isotropic(m, tol)),
        Material::Anisotropic(m) => check_numeric(m, tol),
    }
}

fn cmd_check(path: &Path, tol: Option<f64>, out: Option<&Path>) -> ExitCode {
    let tol = match tolerance(tol) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let material = match load_material(path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match report_for(&material, tol) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(out) = out {
        if let Err(e) = std::fs::write(out, &json) {
            eprintln!("error: {}: {e}", out.display());
            return ExitCode::from(2);
        }
    } else {
        println!("{json}");
    }
    let failed: Vec<&str> = report
        .conditions
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.name.as_str())
        .collect();
    if report.admissible {
        eprintln!("admissible: every uniqueness hypothesis holds");
        ExitCode::SUCCESS
    } else {
        eprintln!("not admissible; failing conditions: {}", failed.join("; "));
        ExitCode::from(1)
    }
}

fn cmd_eval(material_path: &Path, state_path: &Path) -> ExitCode {
    let material = match load_material(material_path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let aniso = material.expanded();
    let text = match std::fs::read_to_string(state_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", state_path.display());
            return ExitCode::from(2);
        }
    };
    let state: LocalState = match serde_json::from_str(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", state_path.display());
            return ExitCode::from(2);
        }
    };
    let response = match evaluate(&aniso, &state) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let z = state.z(aniso.beta);
    let forms = (|| -> thermopiezo::Result<serde_json::Value> {
        Ok(serde_json::json!({
            "W": form_w(&aniso, &state.e, &state.kappa),
            "F": form_f(&aniso, &state.e_field, &state.v_field, z),
            "G": form_g(&aniso, &state.e_field, &state.v_field, z)?,
            "P": form_p(&aniso, state.theta_dot, &state.grad_theta)?,
            "lyapunovDensity": lyapunov_density(&aniso, &state)?,
        }))
    })();
    let forms = match forms {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = serde_json::json!({
        "response": response,
        "forms": forms,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializes"));
    ExitCode::SUCCESS
}

fn cmd_simulate(config_path: &Path, out: &Path, force: bool) -> ExitCode {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", config_path.display());
            return ExitCode::from(2);
        }
    };
    let mut config = match parse_sim_config(&text, &config_path.display().to_string()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    config.force = force;
    let gate = check_isotropic(&config.material, DEFAULT_EIGEN_TOL);
    if !gate.admissible && !force {
        println!(
            "{}",
            serde_json::to_string_pretty(&gate).expect("report serializes")
        );
        eprintln!("error: material fails the admissibility check (run with --force to simulate anyway)");
        return ExitCode::from(2);
    }
    let result = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut csv = Vec::new();
    write_trace_csv(&result.trace, &mut csv).expect("in-memory write");
    if let Err(e) = std::fs::write(out, &csv) {
        eprintln!("error: {}: {e}", out.display());
        return ExitCode::from(2);
    }
    let summary = serde_json::json!({
        "seed": config.seed,
        "steps": config.steps,
        "trace": out.display().to_string(),
        "initialLyapunov": result.initial_lyapunov,
        "finalLyapunov": result.final_lyapunov,
        "maxDissipation": result.max_dissipation,
        "maxRelativeIncrease": result.max_relative_increase,
        "monotone": result.monotone,
        "admissible": gate.admissible,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("serializes"));
    if result.monotone {
        eprintln!(
            "decay functional: {:.6e} -> {:.6e} over {} steps (monotone)",
            result.initial_lyapunov, result.final_lyapunov, config.steps
        );
        ExitCode::SUCCESS
    } else if force {
        eprintln!(
            "decay functional not monotone (max relative increase {:.3e}); informational under --force",
            result.max_relative_increase
        );
        ExitCode::SUCCESS
    } else {
        eprintln!(
            "decay functional not monotone: max relative increase {:.3e}",
            result.max_relative_increase
        );
        ExitCode::from(1)
    }
}

fn cmd_oracle(samples: usize, range: f64, seed: u64) -> ExitCode {
    let report = cross_validate(samples, range, seed);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    eprintln!(
        "{} samples, {} compared, {} disagreements (agreement {:.4})",
        report.samples, report.total_compared, report.total_disagreements, report.agreement_fraction
    );
    if report.all_agree() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Check { material, tol, out } => cmd_check(material, *tol, out.as_deref()),
        Command::Eval { material, state } => cmd_eval(material, state),
        Command::Simulate { config, out, force } => cmd_simulate(config, out, *force),
        Command::Oracle {
            samples,
            range,
            seed,
        } => cmd_oracle(*samples, *range, *seed),
    }
}
