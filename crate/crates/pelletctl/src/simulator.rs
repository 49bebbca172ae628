//! Event-driven closed-loop simulation.
//!
//! The timer runs at unit rate, so slot times are known a priori: the state
//! is flowed exactly (closed forms) to each slot, the skip/pellet decision is
//! taken, the jump applied, and the next arc started. There is no event
//! location error and no drift: slot `i` is at `(t_c - t0_timer) + i * t_c`.

use crate::controller::{apply_jump, jump_decision, JumpError, JumpEvent, JumpKind, TieBreak};
use crate::flow::{flow_x, flow_xi, FlowError, HybridState};
use crate::params::ValidatedParams;
use thiserror::Error;

/// One flow arc of the hybrid time domain: the interval `[t_start, t_end]`
/// at jump counter `j`, with the state at its left endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowArc {
    pub t_start: f64,
    pub t_end: f64,
    pub j: usize,
    pub state_start: HybridState,
}

impl FlowArc {
    /// State at elapsed time `s` into the arc, from the closed forms.
    pub fn state_at(&self, s: f64, params: &ValidatedParams) -> HybridState {
        HybridState {
            x: flow_x(self.state_start.x, s, params).expect("non-negative offset"),
            xi: flow_xi(self.state_start.x, self.state_start.xi, s, params)
                .expect("non-negative offset"),
            t_timer: self.state_start.t_timer + s,
        }
    }
}

/// A dense sample row of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub j: usize,
    pub x: f64,
    pub xi: f64,
    pub t_timer: f64,
    /// Density `n_e = r - x`.
    pub n_e: f64,
}

/// Hybrid-time-indexed record of a closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ValidatedParams,
    pub initial_state: HybridState,
    pub arcs: Vec<FlowArc>,
    pub jumps: Vec<JumpEvent>,
}

/// Pellet launch times with their jump indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PelletSchedule(pub Vec<(f64, usize)>);

impl PelletSchedule {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|&(t, _)| t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Initial conditions and variant switches for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Initial timer value, in `[0, t_c]`.
    pub t0_timer: f64,
    /// Initial neuron potential, >= 0.
    pub xi0: f64,
    pub tie_break: TieBreak,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            t0_timer: 0.0,
            xi0: 0.0,
            tie_break: TieBreak::Pellet,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid initial state: {0}")]
    InvalidInitialState(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Jump(#[from] JumpError),
}

/// Run the closed loop from error `x0` over `[0, horizon]`.
///
/// Arcs of duration `t_c` (the first one `t_c - t0_timer`) alternate with
/// jumps; the final arc is truncated at the horizon without a terminating
/// jump.
pub fn simulate(
    params: &ValidatedParams,
    x0: f64,
    horizon: f64,
    opts: &SimOptions,
) -> Result<Trajectory, SimError> {
    validate_inputs(params, x0, horizon, opts)?;

    let initial = HybridState::new(x0, opts.xi0, opts.t0_timer);
    let mut arcs = Vec::new();
    let mut jumps = Vec::new();
    let mut arc_start_t = 0.0;
    let mut arc_start = initial;

    for i in 0usize.. {
        // slot i sits at (i + 1) * t_c - t0_timer; computed directly so slot
        // times carry no accumulated drift
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
        if t_slot > arc_start_t {
            arcs.push(FlowArc {
                t_start: arc_start_t,
                t_end: t_slot,
                j: i,
                state_start: arc_start,
            });
        }
        let dur = t_slot - arc_start_t;
        let state_before = HybridState {
            x: flow_x(arc_start.x, dur, params)?,
            xi: flow_xi(arc_start.x, arc_start.xi, dur, params)?,
            // the timer hits t_c exactly at a slot
            t_timer: params.t_c,
        };
        let kind = jump_decision(&state_before, params, opts.tie_break)?;
        let state_after = apply_jump(&state_before, kind, params)?;
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

pub(crate) fn validate_inputs(
    params: &ValidatedParams,
    x0: f64,
    horizon: f64,
    opts: &SimOptions,
) -> Result<(), SimError> {
    if !x0.is_finite() || x0 > params.r {
        return Err(SimError::InvalidInitialState(format!(
            "x0 = {x0} must be finite and <= r = {}",
            params.r
        )));
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(SimError::InvalidInitialState(format!(
            "horizon = {horizon} must be finite and > 0"
        )));
    }
    if !opts.xi0.is_finite() || opts.xi0 < 0.0 {
        return Err(SimError::InvalidInitialState(format!(
            "xi0 = {} must be >= 0",
            opts.xi0
        )));
    }
    if !(0.0 <= opts.t0_timer && opts.t0_timer <= params.t_c) {
        return Err(SimError::InvalidInitialState(format!(
            "t0_timer = {} must lie in [0, t_c = {}]",
            opts.t0_timer, params.t_c
        )));
    }
    Ok(())
}

impl Trajectory {
    /// Final continuous time covered by the trajectory.
    pub fn horizon(&self) -> f64 {
        self.arcs
            .last()
            .map(|a| a.t_end)
            .or_else(|| self.jumps.last().map(|e| e.time))
            .unwrap_or(0.0)
    }

    /// Dense samples from the arc closed forms (no re-integration). Each arc
    /// contributes its endpoints plus interior points every `dt_sample`, so a
    /// jump instant yields both a `(t, j)` and a `(t, j + 1)` row.
    pub fn sample(&self, dt_sample: f64) -> Vec<Sample> {
        assert!(dt_sample > 0.0, "dt_sample must be positive");
        let mut rows = Vec::new();
        for arc in &self.arcs {
            let len = arc.t_end - arc.t_start;
            let mut k = 0usize;
            loop {
                let s = dt_sample * k as f64;
                if s >= len - 1e-9 * dt_sample {
                    break;
                }
                rows.push(self.row(arc, s));
                k += 1;
            }
            rows.push(self.row(arc, len));
        }
        rows
    }

    fn row(&self, arc: &FlowArc, s: f64) -> Sample {
        let q = arc.state_at(s, &self.params);
        Sample {
            t: arc.t_start + s,
            j: arc.j,
            x: q.x,
            xi: q.xi,
            t_timer: q.t_timer,
            n_e: self.params.r - q.x,
        }
    }

    /// Times of the pellet-kind jumps, in order.
    pub fn pellet_times(&self) -> PelletSchedule {
        PelletSchedule(
            self.jumps
                .iter()
                .filter(|e| e.kind == JumpKind::Pellet)
                .map(|e| (e.time, e.jump_index))
                .collect(),
        )
    }
}
