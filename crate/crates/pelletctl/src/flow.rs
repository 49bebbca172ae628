//! Exact closed-form propagation of the state `(x, xi, T)` between jumps.
//!
//! Between launch slots the error obeys `dx/dt = (r - x)/tau`, the neuron
//! potential integrates `max(0, x)` and the timer runs at unit rate. Both the
//! error and the potential have closed-form solutions, so flow is propagated
//! exactly; the `max(0, x)` kink is handled by solving the zero-crossing time
//! in closed form rather than by numerical integration.

use crate::params::ValidatedParams;
use thiserror::Error;

/// The hybrid state `q = (x, xi, T)`.
///
/// Invariants in the state space: `x <= r` (the density is non-negative),
/// `xi >= 0`, `0 <= T <= t_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridState {
    /// Density error `x = r - n_e` [particles/m^3].
    pub x: f64,
    /// Neuron membrane potential [particles*s/m^3].
    pub xi: f64,
    /// Timer since the last launch slot [s].
    pub t_timer: f64,
}

impl HybridState {
    pub fn new(x: f64, xi: f64, t_timer: f64) -> Self {
        Self { x, xi, t_timer }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("flow duration must be non-negative, got {0}")]
    NegativeDuration(f64),
    #[error("flowing {dt} s from timer {t_timer} would exceed the slot period t_c = {t_c}")]
    FlowSetViolation { t_timer: f64, dt: f64, t_c: f64 },
}

/// Error after flowing for `dt` seconds: `r - e^{-dt/tau} (r - x0)`.
pub fn flow_x(x0: f64, dt: f64, params: &ValidatedParams) -> Result<f64, FlowError> {
    if dt < 0.0 {
        return Err(FlowError::NegativeDuration(dt));
    }
    if dt == 0.0 {
        // exact identity; r - (r - x0) would lose low bits of x0
        return Ok(x0);
    }
    Ok(params.r - (-dt / params.tau).exp() * (params.r - x0))
}

/// Time at which a negative error reaches zero under flow:
/// `t* = tau * ln((r - x0)/r)`. Returns `None` when `x0 >= 0`.
pub fn zero_crossing_time(x0: f64, params: &ValidatedParams) -> Option<f64> {
    if x0 >= 0.0 {
        None
    } else {
        Some(params.tau * ((params.r - x0) / params.r).ln())
    }
}

/// Accumulated potential over `dt` starting from a non-negative error:
/// the closed form of `int_0^dt x(s) ds`.
fn xi_increment_nonneg(x0: f64, dt: f64, params: &ValidatedParams) -> f64 {
    let inc = params.tau * (x0 - params.r) * (1.0 - (-dt / params.tau).exp()) + params.r * dt;
    // 1 - e^{-u} <= u guarantees non-negativity; clamp round-off.
    inc.max(0.0)
}

/// Neuron potential after flowing for `dt`:
/// `xi0 + int_0^dt max(0, x(s)) ds`, piecewise exact across the sign change.
pub fn flow_xi(x0: f64, xi0: f64, dt: f64, params: &ValidatedParams) -> Result<f64, FlowError> {
    if dt < 0.0 {
        return Err(FlowError::NegativeDuration(dt));
    }
    let inc = match zero_crossing_time(x0, params) {
        None => xi_increment_nonneg(x0, dt, params),
        Some(t_star) if dt > t_star => xi_increment_nonneg(0.0, dt - t_star, params),
        Some(_) => 0.0,
    };
    Ok(xi0 + inc)
}

/// Component-wise flow of the full state; refuses to flow past the slot
/// period (flow set `T <= t_c`).
pub fn flow_state(
    q: &HybridState,
    dt: f64,
    params: &ValidatedParams,
) -> Result<HybridState, FlowError> {
    if dt < 0.0 {
        return Err(FlowError::NegativeDuration(dt));
    }
    let t_new = q.t_timer + dt;
    if t_new > params.t_c * (1.0 + 1e-12) {
        return Err(FlowError::FlowSetViolation {
            t_timer: q.t_timer,
            dt,
            t_c: params.t_c,
        });
    }
    Ok(HybridState {
        x: flow_x(q.x, dt, params)?,
        xi: flow_xi(q.x, q.xi, dt, params)?,
        t_timer: t_new.min(params.t_c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;

    fn p() -> ValidatedParams {
        SystemParams::new(0.1, 7e19, 1e19, 0.01, 1.0)
            .validate()
            .unwrap()
    }

    #[test]
    fn flow_x_identity_at_zero_duration() {
        for x0 in [-3e19, 0.0, 5e19, 7e19] {
            assert_eq!(flow_x(x0, 0.0, &p()).unwrap(), x0);
        }
    }

    #[test]
    fn flow_x_half_gap() {
        let params = p();
        let dt = params.tau * std::f64::consts::LN_2;
        let x = flow_x(0.0, dt, &params).unwrap();
        assert!((x - 3.5e19).abs() <= 1e-12 * 7e19);
    }

    #[test]
    fn flow_x_equilibrium_at_r() {
        let x = flow_x(7e19, 0.01, &p()).unwrap();
        assert!((x - 7e19).abs() <= 1e-12 * 7e19);
    }

    #[test]
    fn flow_x_negative_duration() {
        assert!(matches!(
            flow_x(0.0, -1e-6, &p()),
            Err(FlowError::NegativeDuration(_))
        ));
    }

    #[test]
    fn zero_crossing_cases() {
        let params = p();
        assert_eq!(zero_crossing_time(0.0, &params), None);
        assert_eq!(zero_crossing_time(1e18, &params), None);
        // r - x0 = r*e  =>  t* = tau
        let x0 = params.r * (1.0 - std::f64::consts::E);
        let t = zero_crossing_time(x0, &params).unwrap();
        assert!((t - params.tau).abs() <= 1e-12);
        // frozen from bisection on flow_x(-1e19, t) = 0
        let t = zero_crossing_time(-1e19, &params).unwrap();
        assert!((t - 0.013353139262452258).abs() <= 1e-15);
        let x_at = flow_x(-1e19, t, &params).unwrap();
        assert!(x_at.abs() <= 1e-10 * params.r);
    }

    #[test]
    fn flow_xi_constant_integrand_at_r() {
        let params = p();
        let xi = flow_xi(params.r, 0.0, 0.02, &params).unwrap();
        assert!((xi - params.r * 0.02).abs() <= 1e-10 * params.r * 0.02);
    }

    #[test]
    fn flow_xi_zero_before_crossing() {
        let params = p();
        let t_star = zero_crossing_time(-1e19, &params).unwrap();
        let xi = flow_xi(-1e19, 5.0, t_star * 0.9, &params).unwrap();
        assert_eq!(xi, 5.0);
    }

    #[test]
    fn flow_xi_frozen_value() {
        // closed form checked against high-resolution trapezoid quadrature
        let xi = flow_xi(3e19, 0.0, 0.01, &p()).unwrap();
        assert!((xi - 3.193496721438385e17).abs() <= 1e-9 * xi);
    }

    #[test]
    fn flow_xi_from_zero_over_one_slot() {
        // int_0^{0.01} r(1 - e^{-s/tau}) ds, cross-checked by quadrature
        let xi = flow_xi(0.0, 0.0, 0.01, &p()).unwrap();
        assert!((xi - 3.386192625171661e16).abs() <= 1e-9 * xi);
    }

    #[test]
    fn flow_state_components_and_violation() {
        let params = p();
        let q = HybridState::new(0.0, 0.0, 0.0);
        let out = flow_state(&q, 0.01, &params).unwrap();
        assert!((out.x - 6.661380737482834e18).abs() <= 1e-9 * params.r);
        assert_eq!(out.t_timer, 0.01);
        assert_eq!(flow_state(&q, 0.0, &params).unwrap(), q);

        let q = HybridState::new(0.0, 0.0, 0.005);
        assert!(matches!(
            flow_state(&q, 0.01, &params),
            Err(FlowError::FlowSetViolation { .. })
        ));
    }

    #[test]
    fn piecewise_consistency_across_crossing() {
        let params = p();
        let x0 = -2.5e19;
        let t_star = zero_crossing_time(x0, &params).unwrap();
        for dt in [t_star + 1e-4, t_star + 5e-3, t_star * 3.0] {
            let a = flow_xi(x0, 0.0, dt, &params).unwrap();
            let b = flow_xi(0.0, 0.0, dt - t_star, &params).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
        }
    }

    #[test]
    fn quadrature_equivalence() {
        // composite trapezoid over max(0, flow_x) at 1e-6 s resolution
        let params = p();
        for (x0, dt) in [
            (3e19, 0.01),
            (-1e19, 0.02),
            (0.0_f64, 0.005_f64),
            (6.9e19, 0.012),
        ] {
            let n = (dt / 1e-6).round() as usize;
            let h = dt / n as f64;
            let mut acc = 0.0;
            let mut prev = flow_x(x0, 0.0, &params).unwrap().max(0.0);
            for k in 1..=n {
                let cur = flow_x(x0, h * k as f64, &params).unwrap().max(0.0);
                acc += 0.5 * h * (prev + cur);
                prev = cur;
            }
            let exact = flow_xi(x0, 0.0, dt, &params).unwrap();
            if exact > 0.0 {
                assert!(
                    (exact - acc).abs() <= 1e-6 * exact,
                    "x0={x0} dt={dt}: exact={exact} quad={acc}"
                );
            } else {
                assert!(acc.abs() <= 1e-6 * params.r * dt);
            }
        }
    }
}
