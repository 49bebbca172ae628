//! System parameters and the admissibility bounds on the actuator period and
//! neuron threshold.
//!
//! All quantities are plain SI-scale `f64` (densities around 1e19, times in
//! seconds); no internal normalisation is applied.

use thiserror::Error;

/// Relative slack used when comparing `t_c` against its admissible maximum.
/// The printed design values are rounded to a handful of digits, so an input
/// equal to the rounded bound must still be accepted.
const T_C_REL_SLACK: f64 = 1e-5;

/// Physical and controller constants.
///
/// `tau` is the plasma density time constant, `r` the reference density
/// (ceiling of the density error `x = r - n_e`), `alpha` the density increase
/// per pellet, `t_c` the time between launch slots and `delta` the neuron
/// firing threshold. When both `pellet_particles` (`m_p`) and `conversion`
/// (`B`) are given, they must satisfy `alpha = B * m_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Plasma time constant [s], > 0.
    pub tau: f64,
    /// Reference density / error ceiling [particles/m^3], > 0.
    pub r: f64,
    /// Density increase per pellet [particles/m^3], > 0.
    pub alpha: f64,
    /// Time between launch slots [s], > 0.
    pub t_c: f64,
    /// Neuron firing threshold [particles*s/m^3], >= 0.
    pub delta: f64,
    /// Optional pellet size m_p [particles].
    pub pellet_particles: Option<f64>,
    /// Optional conversion B [(particles/m^3) per particle].
    pub conversion: Option<f64>,
}

impl SystemParams {
    pub fn new(tau: f64, r: f64, alpha: f64, t_c: f64, delta: f64) -> Self {
        Self {
            tau,
            r,
            alpha,
            t_c,
            delta,
            pellet_particles: None,
            conversion: None,
        }
    }

    /// Check every parameter invariant and wrap the values as validated.
    pub fn validate(self) -> Result<ValidatedParams, ParamError> {
        for (name, value) in [
            ("tau", self.tau),
            ("r", self.r),
            ("alpha", self.alpha),
            ("t_c", self.t_c),
        ] {
            if !value.is_finite() || value <= 0.0 {
                return Err(ParamError::NonPositiveParam { name, value });
            }
        }
        if !self.delta.is_finite() || self.delta < 0.0 {
            return Err(ParamError::NegativeDelta(self.delta));
        }
        if self.r <= self.alpha {
            return Err(ParamError::ReferenceTooSmall {
                r: self.r,
                alpha: self.alpha,
            });
        }
        if let (Some(m_p), Some(b)) = (self.pellet_particles, self.conversion) {
            let product = b * m_p;
            if (self.alpha - product).abs() > 1e-9 * self.alpha {
                return Err(ParamError::InconsistentAlpha {
                    alpha: self.alpha,
                    product,
                });
            }
        }
        Ok(ValidatedParams(self))
    }
}

/// Parameter set that has passed [`SystemParams::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidatedParams(SystemParams);

impl std::ops::Deref for ValidatedParams {
    type Target = SystemParams;

    fn deref(&self) -> &SystemParams {
        &self.0
    }
}

impl ValidatedParams {
    pub fn raw(&self) -> SystemParams {
        self.0
    }

    /// Contraction ratio `gamma = (r - alpha)/r`, in (0, 1).
    pub fn gamma(&self) -> f64 {
        (self.r - self.alpha) / self.r
    }

    /// Maximum inter-pellet dwell time `tau_d = tau * ln(r/(r - alpha))` [s].
    pub fn tau_d(&self) -> f64 {
        self.tau * (self.r / (self.r - self.alpha)).ln()
    }

    /// Supremum of admissible slot periods; equals `tau_d`.
    pub fn tc_upper_bound(&self) -> f64 {
        self.tau_d()
    }

    /// Supremum of admissible neuron thresholds for the configured `t_c`:
    /// `r*tau*ln(r/(r-alpha)) - r*tau*(1 - gamma*e^{t_c/tau}) - r*t_c`.
    ///
    /// Errors with [`ParamError::ActuatorTooSlow`] when `t_c` exceeds
    /// [`tc_upper_bound`](Self::tc_upper_bound). The formula touches zero at
    /// `t_c = tc_upper_bound` with zero slope, so tiny negative round-off is
    /// clamped to 0.
    pub fn delta_upper_bound(&self) -> Result<f64, ParamError> {
        let t_c_max = self.tc_upper_bound();
        if self.t_c > t_c_max * (1.0 + T_C_REL_SLACK) {
            return Err(ParamError::ActuatorTooSlow {
                t_c: self.t_c,
                t_c_max,
                min_rate: 1.0 / t_c_max,
            });
        }
        let r = self.r;
        let tau = self.tau;
        let raw = r * self.tau_d()
            - r * tau * (1.0 - self.gamma() * (self.t_c / tau).exp())
            - r * self.t_c;
        Ok(raw.max(0.0))
    }

    /// All derived constants in one record.
    pub fn derive_constants(&self) -> Result<DerivedConstants, ParamError> {
        Ok(DerivedConstants {
            gamma: self.gamma(),
            tau_d: self.tau_d(),
            t_c_max: self.tc_upper_bound(),
            delta_max: self.delta_upper_bound()?,
        })
    }
}

/// Constants derived from a validated parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub gamma: f64,
    pub tau_d: f64,
    pub t_c_max: f64,
    pub delta_max: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("parameter {name} must be strictly positive and finite, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },
    #[error("reference r = {r} must exceed the pellet jump size alpha = {alpha}")]
    ReferenceTooSmall { r: f64, alpha: f64 },
    #[error("neuron threshold delta must be non-negative, got {0}")]
    NegativeDelta(f64),
    #[error("alpha = {alpha} inconsistent with conversion * pellet_particles = {product}")]
    InconsistentAlpha { alpha: f64, product: f64 },
    #[error(
        "slot period t_c = {t_c} s exceeds the admissible maximum {t_c_max:.6} s \
         (minimum slot rate {min_rate:.1} Hz)"
    )]
    ActuatorTooSlow {
        t_c: f64,
        t_c_max: f64,
        min_rate: f64,
    },
}
