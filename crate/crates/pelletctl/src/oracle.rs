//! Independent fixed-step numerical integration of the flow dynamics with
//! slot-aligned jump handling, used to cross-validate the analytic engine.
//!
//! The step must divide the slot period so both engines take their skip or
//! pellet decisions at identical times. The timer is integrated exactly (it
//! runs at unit rate); only `(x, xi)` are stepped numerically.

use crate::controller::{apply_jump, jump_decision, JumpEvent};
use crate::flow::HybridState;
use crate::params::ValidatedParams;
use crate::simulator::{FlowArc, SimError, SimOptions, Trajectory};
use crate::verifier::VerificationReport;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Fixed step [s]; must divide the slot period.
    pub h: f64,
    pub scheme: Scheme,
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("duration {duration} s is not an integer multiple of the step h = {h} s")]
    MisalignedStep { duration: f64, h: f64 },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("trajectories are not comparable: {0}")]
    IncomparableRuns(String),
}

fn x_rate(x: f64, params: &ValidatedParams) -> f64 {
    (params.r - x) / params.tau
}

fn step(x: f64, xi: f64, h: f64, scheme: Scheme, params: &ValidatedParams) -> (f64, f64) {
    match scheme {
        Scheme::Euler => (x + h * x_rate(x, params), xi + h * x.max(0.0)),
        Scheme::Rk4 => {
            let k1x = x_rate(x, params);
            let k1v = x.max(0.0);
            let x2 = x + 0.5 * h * k1x;
            let k2x = x_rate(x2, params);
            let k2v = x2.max(0.0);
            let x3 = x + 0.5 * h * k2x;
            let k3x = x_rate(x3, params);
            let k3v = x3.max(0.0);
            let x4 = x + h * k3x;
            let k4x = x_rate(x4, params);
            let k4v = x4.max(0.0);
            (
                x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
                xi + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
            )
        }
    }
}

fn step_count(duration: f64, h: f64) -> Result<usize, OracleError> {
    if duration == 0.0 {
        return Ok(0);
    }
    let n = (duration / h).round();
    if n < 0.0 || (n * h - duration).abs() > 1e-9 * duration.max(h) {
        return Err(OracleError::MisalignedStep { duration, h });
    }
    Ok(n as usize)
}

/// Integrate the flow map over `duration` with the configured scheme.
pub fn integrate_arc(
    q0: &HybridState,
    duration: f64,
    params: &ValidatedParams,
    cfg: &OracleConfig,
) -> Result<HybridState, OracleError> {
    let n = step_count(duration, cfg.h)?;
    let (mut x, mut xi) = (q0.x, q0.xi);
    for _ in 0..n {
        (x, xi) = step(x, xi, cfg.h, cfg.scheme, params);
    }
    Ok(HybridState {
        x,
        xi,
        t_timer: q0.t_timer + duration,
    })
}

/// Closed-loop run with the same slot/jump logic as the analytic simulator
/// but numerically integrated arcs.
///
/// Note: the returned record stores numerically integrated jump states; its
/// arcs must not be re-sampled through the analytic closed forms. Use
/// [`compare`] (which reads jump endpoints) to relate it to an analytic run.
pub fn simulate_numeric(
    params: &ValidatedParams,
    x0: f64,
    horizon: f64,
    opts: &SimOptions,
    cfg: &OracleConfig,
) -> Result<Trajectory, OracleError> {
    crate::simulator::validate_inputs(params, x0, horizon, opts)?;
    // slot alignment so both engines decide at identical times
    step_count(params.t_c, cfg.h)?;

    let initial = HybridState::new(x0, opts.xi0, opts.t0_timer);
    let mut arcs = Vec::new();
    let mut jumps: Vec<JumpEvent> = Vec::new();
    let mut arc_start_t = 0.0;
    let mut arc_start = initial;

    for i in 0usize.. {
        let t_slot = (i as f64 + 1.0) * params.t_c - opts.t0_timer;
        if t_slot >= horizon {
            if horizon > arc_start_t {
                arcs.push(FlowArc {
                    t_start: arc_start_t,
                    t_end: horizon,
                    j: i,
                    state_start: arc_start,
                });
            }
            break;
        }
        let dur = t_slot - arc_start_t;
        let mut state_before = integrate_arc(&arc_start, dur, params, cfg)?;
        state_before.t_timer = params.t_c;
        if dur > 0.0 {
            arcs.push(FlowArc {
                t_start: arc_start_t,
                t_end: t_slot,
                j: i,
                state_start: arc_start,
            });
        }
        let kind = jump_decision(&state_before, params, opts.tie_break).map_err(SimError::from)?;
        let state_after = apply_jump(&state_before, kind, params).map_err(SimError::from)?;
        jumps.push(JumpEvent {
            time: t_slot,
            jump_index: i,
            kind,
            state_before,
            state_after,
        });
        arc_start_t = t_slot;
        arc_start = state_after;
    }

    Ok(Trajectory {
        params: *params,
        initial_state: initial,
        arcs,
        jumps,
    })
}

/// Maximum deviation of `x` over the jump endpoints shared by two runs.
pub fn max_x_deviation(a: &Trajectory, b: &Trajectory) -> f64 {
    a.jumps
        .iter()
        .zip(&b.jumps)
        .flat_map(|(ea, eb)| {
            [
                (ea.state_before.x - eb.state_before.x).abs(),
                (ea.state_after.x - eb.state_after.x).abs(),
            ]
        })
        .fold(0.0, f64::max)
}

/// Compare two runs at their common jump times: maximum state deviation and
/// pellet-slot agreement (Jaccard index of the pellet jump-index sets).
///
/// Slots whose decisions differ only because the analytic potential sits
/// within round-off of the threshold are reported but not failed.
pub fn compare(
    a: &Trajectory,
    b: &Trajectory,
    tol: f64,
) -> Result<VerificationReport, OracleError> {
    if a.params != b.params {
        return Err(OracleError::IncomparableRuns(
            "parameter sets differ".into(),
        ));
    }
    if a.initial_state != b.initial_state {
        return Err(OracleError::IncomparableRuns(
            "initial states differ".into(),
        ));
    }
    if a.jumps.len() != b.jumps.len() {
        return Err(OracleError::IncomparableRuns(format!(
            "jump counts differ: {} vs {}",
            a.jumps.len(),
            b.jumps.len()
        )));
    }

    let mut report = VerificationReport::default();
    let mut worst = (f64::INFINITY, (0.0, 0usize));
    for (ea, eb) in a.jumps.iter().zip(&b.jumps) {
        for (xa, xb) in [
            (ea.state_before.x, eb.state_before.x),
            (ea.state_after.x, eb.state_after.x),
        ] {
            let margin = tol - (xa - xb).abs();
            if margin < worst.0 {
                worst = (margin, (ea.time, ea.jump_index));
            }
        }
    }
    let (margin, loc) = worst;
    report.push(
        "max_x_deviation",
        margin == f64::INFINITY || margin >= 0.0,
        margin,
        loc,
    );

    let pellets_a: Vec<usize> = a.pellet_times().0.iter().map(|&(_, j)| j).collect();
    let pellets_b: Vec<usize> = b.pellet_times().0.iter().map(|&(_, j)| j).collect();
    let inter = pellets_a.iter().filter(|j| pellets_b.contains(j)).count();
    let union = pellets_a.len() + pellets_b.len() - inter;
    let jaccard = if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    };
    let near_tie_only = a
        .jumps
        .iter()
        .zip(&b.jumps)
        .filter(|(ea, eb)| ea.kind != eb.kind)
        .all(|(ea, _)| {
            (ea.state_before.xi - a.params.delta).abs() <= 1e-9 * (a.params.delta.abs() + 1.0)
        });
    report.push(
        "pellet_schedule_agreement",
        jaccard == 1.0 || near_tie_only,
        jaccard - 1.0,
        (0.0, 0),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{flow_x, flow_xi};
    use crate::params::SystemParams;
    use crate::simulator::simulate;

    fn p(delta: f64) -> ValidatedParams {
        SystemParams::new(0.1, 7e19, 1e19, 0.01, delta)
            .validate()
            .unwrap()
    }

    fn rk4(h: f64) -> OracleConfig {
        OracleConfig {
            h,
            scheme: Scheme::Rk4,
        }
    }

    #[test]
    fn zero_duration_is_identity() {
        let params = p(1.0);
        let q = HybridState::new(3e19, 5.0, 0.0);
        assert_eq!(integrate_arc(&q, 0.0, &params, &rk4(1e-5)).unwrap(), q);
    }

    #[test]
    fn misaligned_duration_rejected() {
        let params = p(1.0);
        let q = HybridState::new(0.0, 0.0, 0.0);
        assert!(matches!(
            integrate_arc(&q, 0.0105, &params, &rk4(1e-3)),
            Err(OracleError::MisalignedStep { .. })
        ));
    }

    #[test]
    fn rk4_matches_closed_form_over_one_slot() {
        let params = p(1.0);
        for x0 in [0.0, 3e19, -1e19, 6.9e19] {
            let q = HybridState::new(x0, 0.0, 0.0);
            let out = integrate_arc(&q, 0.01, &params, &rk4(1e-5)).unwrap();
            let x_exact = flow_x(x0, 0.01, &params).unwrap();
            let xi_exact = flow_xi(x0, 0.0, 0.01, &params).unwrap();
            assert!((out.x - x_exact).abs() <= 1e-9 * params.r, "x0={x0}");
            assert!(
                (out.xi - xi_exact).abs() <= 1e-9 * params.r * 0.01,
                "x0={x0}: {} vs {xi_exact}",
                out.xi
            );
        }
    }

    #[test]
    fn rk4_order_four_convergence() {
        // Magnitudes scaled down and tau shortened so truncation error
        // dominates round-off at the tested step sizes.
        let params = SystemParams::new(1e-3, 7.0, 1.0, 1.2e-4, 0.0)
            .validate()
            .unwrap();
        let q = HybridState::new(0.0, 0.0, 0.0);
        let exact = flow_x(0.0, 1.2e-4, &params).unwrap();
        let err = |h: f64| (integrate_arc(&q, 1.2e-4, &params, &rk4(h)).unwrap().x - exact).abs();
        let (e1, e2, e3) = (err(4e-5), err(2e-5), err(1e-5));
        let r12 = e1 / e2;
        let r23 = e2 / e3;
        assert!(
            (12.0..=20.0).contains(&r12),
            "ratio {r12} (errors {e1}, {e2})"
        );
        assert!(
            (12.0..=20.0).contains(&r23),
            "ratio {r23} (errors {e2}, {e3})"
        );
    }

    #[test]
    fn euler_is_first_order() {
        let params = SystemParams::new(1e-3, 7.0, 1.0, 1.2e-4, 0.0)
            .validate()
            .unwrap();
        let q = HybridState::new(0.0, 0.0, 0.0);
        let exact = flow_x(0.0, 1.2e-4, &params).unwrap();
        let err = |h: f64| {
            (integrate_arc(
                &q,
                1.2e-4,
                &params,
                &OracleConfig {
                    h,
                    scheme: Scheme::Euler,
                },
            )
            .unwrap()
            .x - exact)
                .abs()
        };
        let ratio = err(4e-5) / err(2e-5);
        assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn numeric_run_matches_analytic_fast_scenario() {
        let params = p(1.0);
        let analytic = simulate(&params, 7e19, 2.0, &SimOptions::default()).unwrap();
        let numeric =
            simulate_numeric(&params, 7e19, 2.0, &SimOptions::default(), &rk4(1e-5)).unwrap();
        let report = compare(&analytic, &numeric, 1e-8 * params.r).unwrap();
        assert!(report.all_passed(), "{report}");
        assert_eq!(analytic.pellet_times(), numeric.pellet_times());
    }

    #[test]
    fn euler_deviation_is_larger_but_reported() {
        let params = p(1.0);
        let analytic = simulate(&params, 7e19, 0.5, &SimOptions::default()).unwrap();
        let cfg = OracleConfig {
            h: 1e-3,
            scheme: Scheme::Euler,
        };
        let numeric = simulate_numeric(&params, 7e19, 0.5, &SimOptions::default(), &cfg).unwrap();
        let rk = simulate_numeric(&params, 7e19, 0.5, &SimOptions::default(), &rk4(1e-5)).unwrap();
        assert!(max_x_deviation(&analytic, &numeric) > max_x_deviation(&analytic, &rk));
    }

    #[test]
    fn identical_runs_compare_clean() {
        let params = p(1e16);
        let a = simulate(&params, 7e19, 0.5, &SimOptions::default()).unwrap();
        let report = compare(&a, &a.clone(), 1.0).unwrap();
        assert!(report.all_passed());
        assert_eq!(max_x_deviation(&a, &a), 0.0);
    }

    #[test]
    fn incomparable_runs_rejected() {
        let a = simulate(&p(1.0), 7e19, 0.5, &SimOptions::default()).unwrap();
        let b = simulate(&p(1e16), 7e19, 0.5, &SimOptions::default()).unwrap();
        assert!(matches!(
            compare(&a, &b, 1.0),
            Err(OracleError::IncomparableRuns(_))
        ));
    }

    #[test]
    fn numeric_state_containment() {
        let params = p(1.0);
        let numeric =
            simulate_numeric(&params, 7e19, 1.0, &SimOptions::default(), &rk4(1e-4)).unwrap();
        for e in &numeric.jumps {
            assert!(e.state_before.x <= params.r * (1.0 + 1e-9));
            assert!(e.state_before.xi >= 0.0);
        }
    }
}
