//! Jump logic at a launch slot: classify the state (skip vs pellet) and apply
//! the corresponding jump map.
//!
//! A slot is available when the timer has reached `t_c`. The slot is used for
//! a pellet when the neuron potential has reached the threshold (`xi >=
//! delta`), otherwise it is skipped. On the overlap `xi == delta` both jumps
//! are admissible; the selection is controlled by [`TieBreak`] and defaults to
//! firing.

use crate::flow::HybridState;
use crate::params::ValidatedParams;
use thiserror::Error;

/// Outcome of the decision at a launch slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    /// Slot left unused: timer resets, `x` and `xi` unchanged.
    Skip,
    /// Pellet fired: `x -> x - alpha`, `xi -> 0`, timer resets.
    Pellet,
}

/// Deterministic selection on the set-valued overlap `xi == delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    Pellet,
    Skip,
}

/// A recorded jump with its pre and post states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    /// Continuous time of the slot [s].
    pub time: f64,
    /// Jump counter `j` before the jump.
    pub jump_index: usize,
    pub kind: JumpKind,
    pub state_before: HybridState,
    pub state_after: HybridState,
}

#[derive(Debug, Error, PartialEq)]
pub enum JumpError {
    #[error("state with timer {t_timer} is not in the jump set (t_c = {t_c})")]
    NotInJumpSet { t_timer: f64, t_c: f64 },
    #[error("{kind:?} jump inadmissible at xi = {xi}, delta = {delta}")]
    InadmissibleJump { kind: JumpKind, xi: f64, delta: f64 },
}

/// Decide the jump kind at a slot. Requires the timer to have reached `t_c`.
pub fn jump_decision(
    q: &HybridState,
    params: &ValidatedParams,
    tie_break: TieBreak,
) -> Result<JumpKind, JumpError> {
    if q.t_timer < params.t_c * (1.0 - 1e-12) {
        return Err(JumpError::NotInJumpSet {
            t_timer: q.t_timer,
            t_c: params.t_c,
        });
    }
    Ok(if q.xi > params.delta {
        JumpKind::Pellet
    } else if q.xi < params.delta {
        JumpKind::Skip
    } else {
        match tie_break {
            TieBreak::Pellet => JumpKind::Pellet,
            TieBreak::Skip => JumpKind::Skip,
        }
    })
}

/// Apply the jump map for `kind` to a state in the jump set.
pub fn apply_jump(
    q: &HybridState,
    kind: JumpKind,
    params: &ValidatedParams,
) -> Result<HybridState, JumpError> {
    let admissible = match kind {
        JumpKind::Pellet => q.xi >= params.delta,
        JumpKind::Skip => q.xi <= params.delta,
    };
    if !admissible {
        return Err(JumpError::InadmissibleJump {
            kind,
            xi: q.xi,
            delta: params.delta,
        });
    }
    Ok(match kind {
        JumpKind::Skip => HybridState::new(q.x, q.xi, 0.0),
        JumpKind::Pellet => HybridState::new(q.x - params.alpha, 0.0, 0.0),
    })
}
