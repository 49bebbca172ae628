//! CSV serialization of trajectories, envelopes and engine comparisons.
//!
//! `trajectory.csv` columns, in order: `t,j,x,xi,T,n_e,event` with `event` in
//! `{flow, skip, pellet}`; jump instants emit two rows (pre/post) sharing `t`
//! and the post row carries the jump kind. Numbers use the shortest decimal
//! representation that round-trips `f64` exactly.

use crate::controller::{JumpEvent, JumpKind};
use crate::flow::HybridState;
use crate::params::ValidatedParams;
use crate::simulator::{FlowArc, Sample, Trajectory};
use crate::verifier::BoundEnvelope;
use std::fmt::Write as _;
use thiserror::Error;

pub const TRAJECTORY_HEADER: &str = "t,j,x,xi,T,n_e,event";
pub const ENVELOPE_HEADER: &str = "t,lower,upper";
pub const COMPARE_HEADER: &str = "t,j,x_analytic,x_numeric,dx";

#[derive(Debug, Error, PartialEq)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("trajectory file is empty")]
    Empty,
}

/// Render a trajectory as CSV at the given sampling step.
pub fn trajectory_csv(traj: &Trajectory, dt_sample: f64) -> String {
    let mut out = String::new();
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    let mut next_jump = 0usize;
    for s in traj.sample(dt_sample) {
        let event = match traj.jumps.get(next_jump) {
            Some(e) if s.t == e.time && s.j == e.jump_index + 1 => {
                next_jump += 1;
                match e.kind {
                    JumpKind::Skip => "skip",
                    JumpKind::Pellet => "pellet",
                }
            }
            _ => "flow",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{event}",
            s.t, s.j, s.x, s.xi, s.t_timer, s.n_e
        );
    }
    out
}

/// Render the envelope bounds over `[0, horizon]` at step `dt`.
pub fn envelope_csv(env: &BoundEnvelope, horizon: f64, dt: f64) -> String {
    let mut out = String::new();
    out.push_str(ENVELOPE_HEADER);
    out.push('\n');
    let mut t = 0.0_f64;
    loop {
        let clamped = t.min(horizon);
        let _ = writeln!(
            out,
            "{},{},{}",
            clamped,
            env.lower(clamped),
            env.upper(clamped)
        );
        if clamped >= horizon {
            break;
        }
        t += dt;
    }
    out
}

/// Render the jump-endpoint comparison of two runs (same slot grid).
pub fn compare_csv(analytic: &Trajectory, numeric: &Trajectory) -> String {
    let mut out = String::new();
    out.push_str(COMPARE_HEADER);
    out.push('\n');
    for (ea, eb) in analytic.jumps.iter().zip(&numeric.jumps) {
        for (j, xa, xb) in [
            (ea.jump_index, ea.state_before.x, eb.state_before.x),
            (ea.jump_index + 1, ea.state_after.x, eb.state_after.x),
        ] {
            let _ = writeln!(out, "{},{},{},{},{}", ea.time, j, xa, xb, xa - xb);
        }
    }
    out
}

/// Parse a trajectory CSV back into a trajectory record plus the raw sample
/// rows it contained.
pub fn parse_trajectory_csv(
    text: &str,
    params: &ValidatedParams,
) -> Result<(Trajectory, Vec<Sample>), CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == TRAJECTORY_HEADER => {}
        Some((_, header)) => {
            return Err(CsvError::Malformed {
                line: 1,
                message: format!("unexpected header `{header}`"),
            })
        }
        None => return Err(CsvError::Empty),
    }

    let mut samples = Vec::new();
    let mut events: Vec<(usize, JumpKind)> = Vec::new(); // (sample row index, kind)
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 7 {
            return Err(CsvError::Malformed {
                line,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64, CsvError> {
            fields[i].trim().parse().map_err(|_| CsvError::Malformed {
                line,
                message: format!("invalid number `{}`", fields[i]),
            })
        };
        let j: usize = fields[1].trim().parse().map_err(|_| CsvError::Malformed {
            line,
            message: format!("invalid jump counter `{}`", fields[1]),
        })?;
        let sample = Sample {
            t: num(0)?,
            j,
            x: num(2)?,
            xi: num(3)?,
            t_timer: num(4)?,
            n_e: num(5)?,
        };
        match fields[6].trim() {
            "flow" => {}
            "skip" => events.push((samples.len(), JumpKind::Skip)),
            "pellet" => events.push((samples.len(), JumpKind::Pellet)),
            other => {
                return Err(CsvError::Malformed {
                    line,
                    message: format!("unknown event `{other}`"),
                })
            }
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(CsvError::Empty);
    }

    let state_of = |s: &Sample| HybridState::new(s.x, s.xi, s.t_timer);
    let initial = state_of(&samples[0]);
    let mut jumps = Vec::new();
    for &(row, kind) in &events {
        if row == 0 {
            return Err(CsvError::Malformed {
                line: 2,
                message: "jump row without a preceding pre-jump row".into(),
            });
        }
        let post = &samples[row];
        let pre = &samples[row - 1];
        jumps.push(JumpEvent {
            time: post.t,
            jump_index: post.j.saturating_sub(1),
            kind,
            state_before: state_of(pre),
            state_after: state_of(post),
        });
    }

    let mut arcs = Vec::new();
    let mut arc_start_t = 0.0;
    let mut arc_start = initial;
    for (i, e) in jumps.iter().enumerate() {
        if e.time > arc_start_t {
            arcs.push(FlowArc {
                t_start: arc_start_t,
                t_end: e.time,
                j: i,
                state_start: arc_start,
            });
        }
        arc_start_t = e.time;
        arc_start = e.state_after;
    }
    let t_last = samples.last().unwrap().t;
    if t_last > arc_start_t {
        arcs.push(FlowArc {
            t_start: arc_start_t,
            t_end: t_last,
            j: jumps.len(),
            state_start: arc_start,
        });
    }

    Ok((
        Trajectory {
            params: *params,
            initial_state: initial,
            arcs,
            jumps,
        },
        samples,
    ))
}
