//! Scenario runner for the pellet-injection density controller.
//!
//! Exit codes: 0 = all checks pass, 1 = check failure, 2 = usage/config
//! error.

use clap::{Parser, Subcommand};
use pelletctl::controller::TieBreak;
use pelletctl::io as csvio;
use pelletctl::oracle;
use pelletctl::params::{ParamError, SystemParams, ValidatedParams};
use pelletctl::scenario::{parse_scenario, ScenarioConfig};
use pelletctl::simulator::simulate;
use pelletctl::verifier::{
    check_contraction, check_dwell_and_pellet_gaps, check_envelope, check_ultimate_bound,
    envelope_unchecked, VerificationReport, VerifyError,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pelletctl",
    about = "Simulate and verify a spiking pellet-injection density controller",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario, verify it, and write trajectory.csv, envelope.csv and
    /// report.txt into the output directory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario horizon [s].
        #[arg(long)]
        horizon: Option<f64>,
        /// Override the selection on the xi == delta overlap.
        #[arg(long, value_parser = parse_tie_break)]
        tie_break: Option<TieBreak>,
        /// Reserved; the engines are deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the admissibility bounds for a parameter set.
    Bounds {
        tau: f64,
        r: f64,
        alpha: f64,
        /// Slot period; when given, the admissible threshold range is printed
        /// as well.
        t_c: Option<f64>,
        /// Emit a machine-readable JSON object instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run the analytic and numeric engines side by side and write
    /// compare.csv plus an agreement report.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check an existing trajectory.csv against its scenario.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trajectory: PathBuf,
    },
}

fn parse_tie_break(s: &str) -> Result<TieBreak, String> {
    match s.to_ascii_lowercase().as_str() {
        "pellet" => Ok(TieBreak::Pellet),
        "skip" => Ok(TieBreak::Skip),
        other => Err(format!("expected `pellet` or `skip`, got `{other}`")),
    }
}

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            out,
            horizon,
            tie_break,
            seed: _,
        } => cmd_simulate(&config, &out, horizon, tie_break),
        Command::Bounds {
            tau,
            r,
            alpha,
            t_c,
            json,
        } => cmd_bounds(tau, r, alpha, t_c, json),
        Command::Compare { config, out } => cmd_compare(&config, &out),
        Command::Verify { config, trajectory } => cmd_verify(&config, &trajectory),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load_scenario(path: &Path) -> Result<ScenarioConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_scenario(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn validated(params: SystemParams) -> Result<ValidatedParams, String> {
    params.validate().map_err(|e| e.to_string())
}

fn run_checks(traj: &pelletctl::Trajectory, settle_tol: f64) -> Result<VerificationReport, String> {
    let mut report = check_envelope(traj);
    report.merge(check_dwell_and_pellet_gaps(traj));
    report.merge(check_contraction(traj));
    match check_ultimate_bound(traj, settle_tol) {
        Ok(r) => report.merge(r),
        Err(VerifyError::HorizonTooShort {
            horizon,
            settle_estimate,
        }) => {
            return Err(format!(
                "horizon {horizon} s too short to judge the ultimate bound \
                 (settle estimate {settle_estimate} s)"
            ))
        }
        Err(e) => return Err(e.to_string()),
    }
    Ok(report)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn exit_by_report(report: &VerificationReport) -> ExitCode {
    print!("{report}");
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILURE)
    }
}

fn cmd_simulate(
    config: &Path,
    out: &Path,
    horizon_override: Option<f64>,
    tie_break_override: Option<TieBreak>,
) -> Result<ExitCode, String> {
    let mut cfg = load_scenario(config)?;
    if let Some(h) = horizon_override {
        cfg.horizon = h;
    }
    if let Some(tb) = tie_break_override {
        cfg.tie_break = tb;
    }
    let params = validated(cfg.params)?;
    let traj =
        simulate(&params, cfg.x0, cfg.horizon, &cfg.sim_options()).map_err(|e| e.to_string())?;
    let report = run_checks(&traj, cfg.settle_tol)?;

    write_out(
        out,
        "trajectory.csv",
        &csvio::trajectory_csv(&traj, cfg.dt_sample),
    )?;
    let env = envelope_unchecked(&params, cfg.x0);
    write_out(
        out,
        "envelope.csv",
        &csvio::envelope_csv(&env, cfg.horizon, cfg.dt_sample),
    )?;
    write_out(out, "report.txt", &report.to_string())?;
    Ok(exit_by_report(&report))
}

fn cmd_bounds(
    tau: f64,
    r: f64,
    alpha: f64,
    t_c: Option<f64>,
    json: bool,
) -> Result<ExitCode, String> {
    // validate with a placeholder slot period when none is given
    let params = validated(SystemParams::new(tau, r, alpha, t_c.unwrap_or(1e-9), 0.0))?;
    let gamma = params.gamma();
    let tau_d = params.tau_d();
    let t_c_max = params.tc_upper_bound();

    let delta_max = match t_c {
        None => None,
        Some(_) => match params.delta_upper_bound() {
            Ok(d) => Some(d),
            Err(e @ ParamError::ActuatorTooSlow { .. }) => {
                eprintln!("{e}");
                return Ok(ExitCode::from(EXIT_CHECK_FAILURE));
            }
            Err(e) => return Err(e.to_string()),
        },
    };

    if json {
        let delta_field = delta_max
            .map(|d| format!(",\"delta_max\":{d}"))
            .unwrap_or_default();
        println!("{{\"gamma\":{gamma},\"tau_d\":{tau_d},\"t_c_max\":{t_c_max}{delta_field}}}");
    } else {
        println!("gamma    = {gamma}");
        println!("tau_d    = {tau_d} s");
        println!(
            "t_c_max  = {t_c_max} s  (minimum slot rate {} Hz)",
            1.0 / t_c_max
        );
        if let Some(d) = delta_max {
            println!("delta_max = {d}  (for t_c = {} s)", t_c.unwrap());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(config: &Path, out: &Path) -> Result<ExitCode, String> {
    let cfg = load_scenario(config)?;
    if !cfg.oracle_enabled {
        return Err("compare requires `oracle.enabled = true` in the config".into());
    }
    let params = validated(cfg.params)?;
    let opts = cfg.sim_options();
    let analytic = simulate(&params, cfg.x0, cfg.horizon, &opts).map_err(|e| e.to_string())?;
    let numeric =
        oracle::simulate_numeric(&params, cfg.x0, cfg.horizon, &opts, &cfg.oracle_config())
            .map_err(|e| e.to_string())?;
    let report = oracle::compare(&analytic, &numeric, cfg.oracle_tol).map_err(|e| e.to_string())?;

    write_out(out, "compare.csv", &csvio::compare_csv(&analytic, &numeric))?;
    write_out(out, "agreement.txt", &report.to_string())?;
    Ok(exit_by_report(&report))
}

fn cmd_verify(config: &Path, trajectory: &Path) -> Result<ExitCode, String> {
    let cfg = load_scenario(config)?;
    let params = validated(cfg.params)?;
    let text = std::fs::read_to_string(trajectory)
        .map_err(|e| format!("cannot read {}: {e}", trajectory.display()))?;
    let (traj, samples) = csvio::parse_trajectory_csv(&text, &params)
        .map_err(|e| format!("{}: {e}", trajectory.display()))?;

    let mut report = run_checks(&traj, cfg.settle_tol)?;

    // consistency of the stored samples with the flow closed forms
    let mut worst = (f64::INFINITY, (0.0, 0usize));
    for s in &samples {
        let arc = traj
            .arcs
            .iter()
            .find(|a| a.j == s.j && s.t >= a.t_start && s.t <= a.t_end);
        if let Some(arc) = arc {
            let q = arc.state_at(s.t - arc.t_start, &params);
            let margin = 1e-6 * params.r - (q.x - s.x).abs();
            if margin < worst.0 {
                worst = (margin, (s.t, s.j));
            }
        }
    }
    let (margin, loc) = worst;
    report.push(
        "csv_flow_consistency",
        margin == f64::INFINITY || margin >= 0.0,
        margin,
        loc,
    );
    Ok(exit_by_report(&report))
}
