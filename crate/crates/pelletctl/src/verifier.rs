//! Quantified pass/fail checks of the closed-loop guarantees: the two-case
//! transient envelope, slot dwell times, per-cycle contraction and the
//! ultimate bound `limsup |x| <= alpha`.
//!
//! Failures are report entries, not errors; every entry carries the signed
//! worst-case margin (distance to the bound, negative = violated) and the
//! hybrid time `(t, j)` where it occurred.

use crate::controller::JumpKind;
use crate::params::ValidatedParams;
use crate::simulator::Trajectory;
use std::fmt;
use thiserror::Error;

/// Numerical tolerance on bound checks, relative to `r`.
const BOUND_REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("parameters violate the design hypotheses: {0}")]
    TheoremHypothesisViolated(String),
    #[error("horizon {horizon} s is shorter than the settle estimate {settle_estimate} s")]
    HorizonTooShort { horizon: f64, settle_estimate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeCase {
    PositiveStart,
    NonPositiveStart,
}

/// Time-dependent lower/upper bounds on the error for a given start `x0`.
///
/// Positive start: `(-alpha, gamma^{t/tau_d - 1} x0 + alpha]`.
/// Non-positive start: `(min(r - e^{-t/tau}(r - x0), -alpha), alpha]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundEnvelope {
    pub case: EnvelopeCase,
    x0: f64,
    params: ValidatedParams,
}

impl BoundEnvelope {
    pub fn lower(&self, t: f64) -> f64 {
        match self.case {
            EnvelopeCase::PositiveStart => -self.params.alpha,
            EnvelopeCase::NonPositiveStart => {
                let flow = self.params.r - (-t / self.params.tau).exp() * (self.params.r - self.x0);
                flow.min(-self.params.alpha)
            }
        }
    }

    pub fn upper(&self, t: f64) -> f64 {
        match self.case {
            EnvelopeCase::PositiveStart => {
                let gamma = self.params.gamma();
                gamma.powf(t / self.params.tau_d() - 1.0) * self.x0 + self.params.alpha
            }
            EnvelopeCase::NonPositiveStart => self.params.alpha,
        }
    }
}

/// Check the design hypotheses (`t_c` and `delta` within their admissible
/// ranges, `xi0 = 0` left to the trajectory checks).
pub fn hypotheses_hold(params: &ValidatedParams) -> Result<(), VerifyError> {
    let delta_max = params
        .delta_upper_bound()
        .map_err(|e| VerifyError::TheoremHypothesisViolated(e.to_string()))?;
    if params.delta > delta_max * (1.0 + 1e-9) {
        return Err(VerifyError::TheoremHypothesisViolated(format!(
            "delta = {} exceeds delta_max = {delta_max}",
            params.delta
        )));
    }
    Ok(())
}

/// Envelope for a start `x0`, after checking the design hypotheses.
pub fn envelope(params: &ValidatedParams, x0: f64) -> Result<BoundEnvelope, VerifyError> {
    hypotheses_hold(params)?;
    Ok(envelope_unchecked(params, x0))
}

/// Envelope formulas without the hypothesis gate (used to report failures
/// on runs that violate the hypotheses).
pub fn envelope_unchecked(params: &ValidatedParams, x0: f64) -> BoundEnvelope {
    BoundEnvelope {
        case: if x0 > 0.0 {
            EnvelopeCase::PositiveStart
        } else {
            EnvelopeCase::NonPositiveStart
        },
        x0,
        params: *params,
    }
}

/// One verified property with its worst-case margin.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Signed distance to the bound; negative means violated.
    pub margin: f64,
    /// Hybrid time `(t, j)` of the worst case.
    pub location: (f64, usize),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn push(&mut self, name: &str, passed: bool, margin: f64, location: (f64, usize)) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            margin,
            location,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn merge(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {} margin={:.6e} at (t={:.6}, j={})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.margin,
                c.location.0,
                c.location.1
            )?;
        }
        Ok(())
    }
}

fn sampling_dt(traj: &Trajectory) -> f64 {
    traj.params.t_c / 8.0
}

/// Verify `lower(t) < x(t, j) <= upper(t)` at dense samples and all jump
/// endpoints; also reports whether the design hypotheses hold.
pub fn check_envelope(traj: &Trajectory) -> VerificationReport {
    let mut report = VerificationReport::default();
    let params = &traj.params;
    let tol = BOUND_REL_TOL * params.r;

    let hyp = hypotheses_hold(params).and_then(|()| {
        if traj.initial_state.xi != 0.0 {
            Err(VerifyError::TheoremHypothesisViolated(format!(
                "xi(0,0) = {} != 0",
                traj.initial_state.xi
            )))
        } else {
            Ok(())
        }
    });
    report.push("theorem_hypotheses", hyp.is_ok(), 0.0, (0.0, 0));

    let env = envelope_unchecked(params, traj.initial_state.x);
    let mut worst_upper = (f64::INFINITY, (0.0, 0usize));
    let mut worst_lower = (f64::INFINITY, (0.0, 0usize));
    for s in traj.sample(sampling_dt(traj)) {
        let up = env.upper(s.t) - s.x;
        if up < worst_upper.0 {
            worst_upper = (up, (s.t, s.j));
        }
        let lo = s.x - env.lower(s.t);
        if lo < worst_lower.0 {
            worst_lower = (lo, (s.t, s.j));
        }
    }
    report.push(
        "envelope_upper",
        worst_upper.0 >= -tol,
        worst_upper.0,
        worst_upper.1,
    );
    report.push(
        "envelope_lower",
        worst_lower.0 >= -tol,
        worst_lower.0,
        worst_lower.1,
    );
    report
}

/// Pellet-to-pellet cycles with a strictly positive (and hence positive
/// throughout, since `x` only grows during flow) start error. Includes the
/// initial segment when the run starts with `xi = 0` and `x0 > 0`.
fn positive_cycles(traj: &Trajectory) -> Vec<(f64, usize, f64, f64, f64)> {
    // (t_start, j_end, x_start, x_end, gap)
    let mut cycles = Vec::new();
    let mut start: Option<(f64, f64)> = None;
    if traj.initial_state.xi == 0.0 && traj.initial_state.x > 0.0 {
        start = Some((0.0, traj.initial_state.x));
    }
    for e in &traj.jumps {
        if e.kind != JumpKind::Pellet {
            continue;
        }
        if let Some((t0, x0)) = start {
            cycles.push((t0, e.jump_index + 1, x0, e.state_after.x, e.time - t0));
        }
        start = if e.state_after.x > 0.0 {
            Some((e.time, e.state_after.x))
        } else {
            None
        };
    }
    cycles
}

/// Check that (a) consecutive jumps are separated by exactly `t_c`, and
/// (b) pellet gaps on positive-error cycles respect the slot-quantized dwell
/// bound `ceil(tau_d / t_c) * t_c`.
pub fn check_dwell_and_pellet_gaps(traj: &Trajectory) -> VerificationReport {
    let mut report = VerificationReport::default();
    let params = &traj.params;

    let mut worst = (0.0f64, (0.0, 0usize));
    for w in traj.jumps.windows(2) {
        let dev = (w[1].time - w[0].time - params.t_c).abs();
        if dev > worst.0 {
            worst = (dev, (w[1].time, w[1].jump_index));
        }
    }
    report.push(
        "jump_gaps_equal_t_c",
        worst.0 <= 1e-9 * params.t_c,
        1e-9 * params.t_c - worst.0,
        worst.1,
    );

    let bound = (params.tau_d() / params.t_c).ceil() * params.t_c;
    let mut worst = (f64::INFINITY, (0.0, 0usize));
    for (t0, j_end, _x0, _x_end, gap) in positive_cycles(traj) {
        let margin = bound - gap;
        if margin < worst.0 {
            worst = (margin, (t0 + gap, j_end));
        }
    }
    let (margin, loc) = worst;
    report.push(
        "pellet_gap_bound",
        margin == f64::INFINITY || margin >= -1e-9 * params.t_c,
        margin,
        loc,
    );
    report
}

/// Check the per-cycle contraction `x_end <= gamma * x_start` on every
/// positive-error pellet cycle (degenerate starts below `1e-6 r` excluded).
pub fn check_contraction(traj: &Trajectory) -> VerificationReport {
    let mut report = VerificationReport::default();
    let params = &traj.params;
    let gamma = params.gamma();
    let tol = BOUND_REL_TOL * params.r;

    let mut worst = (f64::INFINITY, (0.0, 0usize));
    for (t0, j_end, x_start, x_end, gap) in positive_cycles(traj) {
        if x_start < 1e-6 * params.r {
            continue;
        }
        let margin = gamma * x_start + tol - x_end;
        if margin < worst.0 {
            worst = (margin, (t0 + gap, j_end));
        }
    }
    let (margin, loc) = worst;
    report.push(
        "pellet_cycle_contraction",
        margin == f64::INFINITY || margin >= 0.0,
        margin,
        loc,
    );
    report
}

/// Analytic settle estimate: the time after which the envelope confines
/// `|x|` to `alpha + settle_tol`.
pub fn settle_estimate(params: &ValidatedParams, x0: f64, settle_tol: f64) -> f64 {
    if x0 > 0.0 {
        if x0 <= settle_tol {
            0.0
        } else {
            let gamma = params.gamma();
            params.tau_d() * (1.0 + (settle_tol / x0).ln() / gamma.ln())
        }
    } else if x0 < -params.alpha {
        // time for the open-loop flow branch to rise to -alpha
        params.tau * ((params.r - x0) / (params.r + params.alpha)).ln()
    } else {
        0.0
    }
}

/// Check the ultimate bound: after the analytic settle estimate the error
/// must stay inside `[-alpha - settle_tol, alpha + settle_tol]`, and the
/// observed settle time must not exceed the estimate.
pub fn check_ultimate_bound(
    traj: &Trajectory,
    settle_tol: f64,
) -> Result<VerificationReport, VerifyError> {
    let params = &traj.params;
    let horizon = traj.horizon();
    let t_est = settle_estimate(params, traj.initial_state.x, settle_tol);
    if t_est >= horizon {
        return Err(VerifyError::HorizonTooShort {
            horizon,
            settle_estimate: t_est,
        });
    }

    let band = params.alpha + settle_tol;
    let tol = BOUND_REL_TOL * params.r;
    let mut t_settle_obs = 0.0f64;
    let mut obs_loc = (0.0, 0usize);
    let mut worst = (f64::INFINITY, (t_est, 0usize));
    for s in traj.sample(sampling_dt(traj)) {
        if s.x.abs() > band + tol && s.t > t_settle_obs {
            t_settle_obs = s.t;
            obs_loc = (s.t, s.j);
        }
        if s.t >= t_est {
            let margin = band - s.x.abs();
            if margin < worst.0 {
                worst = (margin, (s.t, s.j));
            }
        }
    }

    let mut report = VerificationReport::default();
    let (margin, loc) = worst;
    report.push("ultimate_band", margin >= -tol, margin, loc);
    report.push(
        "settle_time_within_estimate",
        t_settle_obs <= t_est,
        t_est - t_settle_obs,
        obs_loc,
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::flow_x;
    use crate::params::SystemParams;
    use crate::simulator::{simulate, SimOptions};

    fn p(delta: f64) -> ValidatedParams {
        SystemParams::new(0.1, 7e19, 1e19, 0.01, delta)
            .validate()
            .unwrap()
    }

    #[test]
    fn envelope_upper_at_tau_d_and_zero() {
        let params = p(1.0);
        let env = envelope(&params, 7e19).unwrap();
        // exponent 0 at t = tau_d
        let up = env.upper(params.tau_d());
        assert!((up - (7e19 + 1e19)).abs() <= 1e-9 * 7e19);
        // gamma^{-1} x0 + alpha at t = 0
        let up0 = env.upper(0.0);
        assert!((up0 - 9.166666666666667e19).abs() <= 1e-6 * up0);
        assert_eq!(env.lower(1.0), -params.alpha);
    }

    #[test]
    fn envelope_upper_monotone_to_alpha() {
        let params = p(1.0);
        let env = envelope(&params, 7e19).unwrap();
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let u = env.upper(0.01 * k as f64);
            assert!(u <= prev);
            prev = u;
        }
        assert!((env.upper(1e3) - params.alpha).abs() <= 1e-12 * params.r);
    }

    #[test]
    fn envelope_nonpositive_start_branch_switch() {
        let params = p(1.0);
        let env = envelope(&params, -2e19).unwrap();
        assert_eq!(env.case, EnvelopeCase::NonPositiveStart);
        assert_eq!(env.upper(0.5), params.alpha);
        // branch switch where the flow curve crosses -alpha:
        // r - e^{-t/tau}(r - x0) = -alpha  =>  t = tau ln((r - x0)/(r + alpha))
        let t_switch = params.tau * ((params.r + 2e19) / (params.r + params.alpha)).ln();
        assert!(env.lower(t_switch * 0.99) < -params.alpha);
        assert_eq!(env.lower(t_switch * 1.01), -params.alpha);
        // pre-switch the lower bound is the flow curve itself
        let t = t_switch * 0.5;
        let flow = flow_x(-2e19, t, &params).unwrap();
        assert!((env.lower(t) - flow).abs() <= 1e-9 * params.r);
    }

    #[test]
    fn hypothesis_gate() {
        let mut raw = p(1.0).raw();
        raw.t_c = 0.02;
        let params = raw.validate().unwrap();
        assert!(matches!(
            envelope(&params, 1e19),
            Err(VerifyError::TheoremHypothesisViolated(_))
        ));
        let mut raw = p(1.0).raw();
        raw.delta = 2e16; // above delta_max = 1.008e16
        let params = raw.validate().unwrap();
        assert!(matches!(
            envelope(&params, 1e19),
            Err(VerifyError::TheoremHypothesisViolated(_))
        ));
    }

    #[test]
    fn fast_and_slow_runs_satisfy_envelope() {
        for delta in [1.0, 1e16] {
            let params = p(delta);
            let traj = simulate(&params, 7e19, 2.0, &SimOptions::default()).unwrap();
            let report = check_envelope(&traj);
            assert!(report.all_passed(), "delta={delta}:\n{report}");
        }
    }

    #[test]
    fn hypothesis_violation_is_flagged() {
        let mut raw = p(1.0).raw();
        raw.t_c = 0.02;
        let params = raw.validate().unwrap();
        let traj = simulate(&params, 7e19, 1.0, &SimOptions::default()).unwrap();
        let report = check_envelope(&traj);
        let hyp = report
            .checks
            .iter()
            .find(|c| c.name == "theorem_hypotheses")
            .unwrap();
        assert!(!hyp.passed);
    }

    #[test]
    fn dwell_check_passes_on_simulator_output() {
        let params = p(1e16);
        let traj = simulate(&params, 7e19, 2.0, &SimOptions::default()).unwrap();
        let report = check_dwell_and_pellet_gaps(&traj);
        assert!(report.all_passed(), "{report}");
        // the slot-quantized bound for the reported values is 0.02 s
        let bound = (params.tau_d() / params.t_c).ceil() * params.t_c;
        assert_eq!(bound, 0.02);
    }

    #[test]
    fn contraction_single_synthetic_cycle() {
        // one pellet cycle of exactly one slot starting at x = 3e19:
        // x_end = flow_x(3e19, 0.01) - alpha = 2.380650327856162e19
        //       <= gamma * 3e19 = 2.5714e19
        let params = p(0.0);
        let x_end = flow_x(3e19, 0.01, &params).unwrap() - params.alpha;
        assert!((x_end - 2.380650327856162e19).abs() <= 1e-12 * x_end);
        assert!(x_end <= params.gamma() * 3e19);
    }

    #[test]
    fn contraction_on_fast_transient() {
        let params = p(1.0);
        let traj = simulate(&params, 7e19, 2.0, &SimOptions::default()).unwrap();
        let report = check_contraction(&traj);
        assert!(report.all_passed(), "{report}");
        assert!(report.checks[0].margin > 0.0);
    }

    #[test]
    fn ultimate_bound_fast_run() {
        let params = p(1.0);
        let traj = simulate(&params, 7e19, 2.0, &SimOptions::default()).unwrap();
        let report = check_ultimate_bound(&traj, 1e-3 * params.alpha).unwrap();
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn ultimate_bound_immediate_for_zero_start() {
        let params = p(1.0);
        let traj = simulate(&params, 0.0, 0.5, &SimOptions::default()).unwrap();
        let report = check_ultimate_bound(&traj, 1e-3 * params.alpha).unwrap();
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn open_loop_surrogate_fails_ultimate_bound() {
        // threshold far above anything xi can reach within the horizon
        let params = p(1e30);
        let traj = simulate(&params, 7e19, 2.0, &SimOptions::default()).unwrap();
        assert!(traj.pellet_times().is_empty());
        let report = check_ultimate_bound(&traj, 1e-3 * params.alpha).unwrap();
        assert!(!report.all_passed());
    }

    #[test]
    fn horizon_too_short_detected() {
        let params = p(1.0);
        let traj = simulate(&params, 7e19, 0.02, &SimOptions::default()).unwrap();
        assert!(matches!(
            check_ultimate_bound(&traj, 1e-3 * params.alpha),
            Err(VerifyError::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn report_formatting() {
        let mut report = VerificationReport::default();
        report.push("example", true, 1.25e-3, (0.5, 3));
        let text = report.to_string();
        assert!(text.contains("PASS example"));
        assert!(text.contains("j=3"));
    }
}
