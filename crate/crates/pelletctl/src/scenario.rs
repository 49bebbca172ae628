//! Scenario configuration files: flat `key = value` text with dotted section
//! keys (`params.tau = 0.1`), `#` comments and scientific notation.
//!
//! Required keys: `params.{tau,r,alpha,t_c,delta}`, `run.horizon` and exactly
//! one of `initial.x0` / `initial.n_e0` (with `x0 = r - n_e0`). Everything
//! else has defaults; see the README for the full grammar.

use crate::controller::TieBreak;
use crate::oracle::{OracleConfig, Scheme};
use crate::params::SystemParams;
use crate::simulator::SimOptions;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("exactly one of `initial.x0` and `initial.n_e0` must be given")]
    InitialConditionConflict,
}

/// Fully resolved scenario: parameters, initial condition, run settings and
/// oracle/variant switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub params: SystemParams,
    pub x0: f64,
    pub xi0: f64,
    pub t0_timer: f64,
    pub horizon: f64,
    pub dt_sample: f64,
    pub settle_tol: f64,
    pub oracle_enabled: bool,
    pub oracle_h: f64,
    pub oracle_scheme: Scheme,
    /// Acceptable absolute `x` deviation between engines in `compare`.
    pub oracle_tol: f64,
    pub tie_break: TieBreak,
}

impl ScenarioConfig {
    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            t0_timer: self.t0_timer,
            xi0: self.xi0,
            tie_break: self.tie_break,
        }
    }

    pub fn oracle_config(&self) -> OracleConfig {
        OracleConfig {
            h: self.oracle_h,
            scheme: self.oracle_scheme,
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "params.tau",
    "params.r",
    "params.alpha",
    "params.t_c",
    "params.delta",
    "params.pellet_particles",
    "params.conversion",
    "initial.x0",
    "initial.n_e0",
    "initial.xi0",
    "initial.t0",
    "run.horizon",
    "run.dt_sample",
    "run.settle_tol",
    "oracle.enabled",
    "oracle.h",
    "oracle.scheme",
    "oracle.tol",
    "variant.tie_break",
];

/// Parse a scenario from config text.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut entries: BTreeMap<&str, (usize, String)> = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let known = KNOWN_KEYS
            .iter()
            .find(|&&k| k == key)
            .ok_or_else(|| ConfigError::Parse {
                line,
                message: format!("unknown key `{key}`"),
            })?;
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("empty value for `{key}`"),
            });
        }
        if entries.insert(known, (line, value.to_string())).is_some() {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }

    let number = |key: &'static str| -> Result<Option<f64>, ConfigError> {
        match entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<f64>().map(Some).map_err(|_| ConfigError::Parse {
                line: *line,
                message: format!("invalid number `{v}` for `{key}`"),
            }),
        }
    };
    let required = |key: &'static str| -> Result<f64, ConfigError> {
        number(key)?.ok_or(ConfigError::MissingKey(key))
    };

    let mut params = SystemParams::new(
        required("params.tau")?,
        required("params.r")?,
        required("params.alpha")?,
        required("params.t_c")?,
        required("params.delta")?,
    );
    params.pellet_particles = number("params.pellet_particles")?;
    params.conversion = number("params.conversion")?;

    let x0 = match (number("initial.x0")?, number("initial.n_e0")?) {
        (Some(x0), None) => x0,
        (None, Some(n_e0)) => params.r - n_e0,
        _ => return Err(ConfigError::InitialConditionConflict),
    };

    let oracle_enabled = match entries.get("oracle.enabled") {
        None => false,
        Some((line, v)) => match v.as_str() {
            "true" | "yes" | "1" => true,
            "false" | "no" | "0" => false,
            other => {
                return Err(ConfigError::Parse {
                    line: *line,
                    message: format!("invalid boolean `{other}` for `oracle.enabled`"),
                })
            }
        },
    };
    let oracle_scheme = match entries.get("oracle.scheme") {
        None => Scheme::Rk4,
        Some((line, v)) => match v.to_ascii_lowercase().as_str() {
            "rk4" => Scheme::Rk4,
            "euler" => Scheme::Euler,
            other => {
                return Err(ConfigError::Parse {
                    line: *line,
                    message: format!("invalid scheme `{other}` (expected rk4 or euler)"),
                })
            }
        },
    };
    let tie_break = match entries.get("variant.tie_break") {
        None => TieBreak::Pellet,
        Some((line, v)) => match v.to_ascii_lowercase().as_str() {
            "pellet" => TieBreak::Pellet,
            "skip" => TieBreak::Skip,
            other => {
                return Err(ConfigError::Parse {
                    line: *line,
                    message: format!("invalid tie_break `{other}` (expected pellet or skip)"),
                })
            }
        },
    };

    Ok(ScenarioConfig {
        params,
        x0,
        xi0: number("initial.xi0")?.unwrap_or(0.0),
        t0_timer: number("initial.t0")?.unwrap_or(0.0),
        horizon: required("run.horizon")?,
        dt_sample: number("run.dt_sample")?.unwrap_or(params.t_c / 10.0),
        settle_tol: number("run.settle_tol")?.unwrap_or(1e-3 * params.alpha),
        oracle_enabled,
        oracle_h: number("oracle.h")?.unwrap_or(1e-5),
        oracle_scheme,
        oracle_tol: number("oracle.tol")?.unwrap_or(1e-8 * params.r),
        tie_break,
    })
}
