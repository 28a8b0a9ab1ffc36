//! Fluid model: the continuous switched ODE with a reflecting lower bound on
//! the pending-invitation coordinate.
//!
//! Away from the boundary
//!
//! ```text
//! y' = beta x + alpha mu (w - |y|) / 2
//! w' = beta x + (alpha - 2) mu (w - |y|) / 2
//! x' = -gamma y' - epsilon y
//! ```
//!
//! and on `x = x_min` the derivative of `x` is clamped to be nonnegative.

use serde::Serialize;
use thiserror::Error;

use crate::model::{FluidState, ModelParams, Trajectory, TrajectoryKind, TrajectoryMeta};

/// Distance to `x_min` within which a state counts as on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FluidError {
    #[error("x = {x} is below the boundary x_min = {x_min}")]
    BelowBoundary { x: f64, x_min: f64 },
    #[error("invalid fluid config: {0}")]
    Config(&'static str),
    #[error("empty trajectory")]
    EmptyTrajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluidConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Convergence threshold on the Euclidean norm; `None` means
    /// `1e-4 * (1 + |init|)`.
    pub conv_tol: Option<f64>,
    /// How long the norm must stay below the threshold.
    pub conv_hold: f64,
}

impl Default for FluidConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_end: 100.0, conv_tol: None, conv_hold: 1.0 }
    }
}

impl FluidConfig {
    pub fn validate(&self) -> Result<(), FluidError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(FluidError::Config("dt must be > 0"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(FluidError::Config("t_end must be > 0"));
        }
        if self.dt > self.t_end {
            return Err(FluidError::Config("dt must not exceed t_end"));
        }
        if let Some(tol) = self.conv_tol {
            if !(tol > 0.0) {
                return Err(FluidError::Config("conv_tol must be > 0"));
            }
        }
        if !(self.conv_hold >= 0.0) {
            return Err(FluidError::Config("conv_hold must be >= 0"));
        }
        Ok(())
    }

    pub fn tolerance_for(&self, init: &FluidState) -> f64 {
        self.conv_tol.unwrap_or(1e-4 * (1.0 + init.norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum VerdictKind {
    ConvergedToOrigin { time: f64 },
    NotConvergedWithinHorizon,
    Diverged { norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluidVerdict {
    #[serde(flatten)]
    pub kind: VerdictKind,
    pub final_state: FluidState,
    pub min_norm: f64,
    pub hit_boundary: bool,
}

impl FluidVerdict {
    pub fn converged(&self) -> bool {
        matches!(self.kind, VerdictKind::ConvergedToOrigin { .. })
    }
}

/// Right-hand side ignoring the boundary. Continuous across `y = 0`.
pub fn rhs_interior(s: &FluidState, p: &ModelParams) -> [f64; 3] {
    let in_service = s.w - s.y.abs();
    let dy = p.beta * s.x + 0.5 * p.alpha * p.mu * in_service;
    let dw = p.beta * s.x + 0.5 * (p.alpha - 2.0) * p.mu * in_service;
    let dx = -p.gamma * dy - p.epsilon * s.y;
    [dx, dy, dw]
}

/// Right-hand side with the reflection rule: on the boundary the `x`
/// derivative is clamped at zero from below.
pub fn rhs_with_boundary(s: &FluidState, p: &ModelParams) -> Result<[f64; 3], FluidError> {
    let x_min = p.x_min();
    if s.x < x_min - BOUNDARY_TOL {
        return Err(FluidError::BelowBoundary { x: s.x, x_min });
    }
    Ok(clamped_rhs(s, p, x_min).0)
}

// Stage states of a step may dip slightly below x_min; treat them as on the
// boundary instead of failing.
fn clamped_rhs(s: &FluidState, p: &ModelParams, x_min: f64) -> ([f64; 3], bool) {
    let mut d = rhs_interior(s, p);
    let mut clamped = false;
    if s.x <= x_min + BOUNDARY_TOL && d[0] < 0.0 {
        d[0] = 0.0;
        clamped = true;
    }
    (d, clamped)
}

fn axpy(s: &FluidState, h: f64, d: &[f64; 3]) -> FluidState {
    FluidState::new(s.x + h * d[0], s.y + h * d[1], s.w + h * d[2])
}

/// Classical RK4 with projection onto `x >= x_min` after every step.
///
/// Every step is recorded. Integration stops early if the state becomes
/// non-finite or leaves the divergence bound of [`detect_convergence`].
pub fn integrate(
    init: &FluidState,
    p: &ModelParams,
    cfg: &FluidConfig,
) -> Result<(Trajectory<FluidState>, FluidVerdict), FluidError> {
    cfg.validate()?;
    let x_min = p.x_min();
    if init.x < x_min - BOUNDARY_TOL {
        return Err(FluidError::BelowBoundary { x: init.x, x_min });
    }

    let steps = (cfg.t_end / cfg.dt).round().max(1.0) as usize;
    let bound = divergence_bound(init);
    let meta = TrajectoryMeta { params: *p, seed: None, kind: TrajectoryKind::Fluid };
    let mut traj = Trajectory::with_capacity(meta, steps + 1);
    let mut s = *init;
    traj.push(0.0, s).expect("first sample");

    let h = cfg.dt;
    let mut reflected = false;
    for k in 1..=steps {
        let (k1, c1) = clamped_rhs(&s, p, x_min);
        let (k2, c2) = clamped_rhs(&axpy(&s, h / 2.0, &k1), p, x_min);
        let (k3, c3) = clamped_rhs(&axpy(&s, h / 2.0, &k2), p, x_min);
        let (k4, c4) = clamped_rhs(&axpy(&s, h, &k3), p, x_min);
        let mut next = FluidState::new(
            s.x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s.y + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            s.w + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        );
        if next.x < x_min {
            next.x = x_min;
            reflected = true;
        }
        reflected |= c1 || c2 || c3 || c4;
        s = next;
        traj.push(k as f64 * h, s).expect("uniform grid is increasing");
        if !s.is_finite() || s.norm() > bound {
            break;
        }
    }

    let mut verdict = detect_convergence(&traj, cfg)?;
    verdict.hit_boundary |= reflected;
    Ok((traj, verdict))
}

fn divergence_bound(init: &FluidState) -> f64 {
    1e6 * (1.0 + init.norm())
}

/// Classifies a fluid trajectory.
///
/// Converged at `t*` when `t*` is the first sample time after which the norm
/// stays at or below the tolerance, and the trajectory continues at least
/// `conv_hold` past it. Diverged when some state is non-finite or its norm
/// exceeds `1e6 (1 + |init|)`. `hit_boundary` is set when a sample after the
/// first sits on `x_min`.
pub fn detect_convergence(traj: &Trajectory<FluidState>, cfg: &FluidConfig) -> Result<FluidVerdict, FluidError> {
    let (&init, &last) = match (traj.states().first(), traj.states().last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(FluidError::EmptyTrajectory),
    };
    let x_min = traj.meta.params.x_min();
    let tol = cfg.tolerance_for(&init);
    let bound = divergence_bound(&init);

    let mut min_norm = f64::INFINITY;
    let mut last_above: Option<usize> = None;
    let mut diverged: Option<f64> = None;
    for (i, s) in traj.states().iter().enumerate() {
        let n = s.norm();
        if !n.is_finite() || n > bound {
            diverged = Some(n);
            break;
        }
        min_norm = min_norm.min(n);
        if n > tol {
            last_above = Some(i);
        }
    }
    let hit_boundary = traj.states().iter().skip(1).any(|s| s.x <= x_min + 1e-9);

    let kind = if let Some(norm) = diverged {
        VerdictKind::Diverged { norm }
    } else {
        let first_below = match last_above {
            None => Some(0),
            Some(i) if i + 1 < traj.len() => Some(i + 1),
            Some(_) => None,
        };
        let t_last = traj.times()[traj.len() - 1];
        match first_below.map(|i| traj.times()[i]) {
            Some(t) if t_last - t >= cfg.conv_hold => VerdictKind::ConvergedToOrigin { time: t },
            _ => VerdictKind::NotConvergedWithinHorizon,
        }
    };

    Ok(FluidVerdict { kind, final_state: last, min_norm, hit_boundary })
}

/// Least-squares slope of `ln |state|` against time over samples in
/// `[t_from, t_to]` whose norm is positive. `None` with fewer than two such
/// samples.
pub fn log_norm_slope(traj: &Trajectory<FluidState>, t_from: f64, t_to: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = traj
        .iter()
        .filter(|(t, s)| *t >= t_from && *t <= t_to && s.norm() > 0.0)
        .map(|(t, s)| (t, s.norm().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Decay-rate fit over the tail of a converging trajectory: from the first
/// time the norm falls to a tenth of its peak until it falls below `1e-12`
/// of the peak.
pub fn tail_decay_slope(traj: &Trajectory<FluidState>) -> Option<f64> {
    let peak = traj.states().iter().map(FluidState::norm).fold(0.0_f64, f64::max);
    if peak == 0.0 {
        return None;
    }
    let peak_at = traj.states().iter().position(|s| s.norm() == peak)?;
    let start = traj.iter().skip(peak_at).find(|(_, s)| s.norm() <= 0.1 * peak)?.0;
    let end = traj
        .iter()
        .find(|(t, s)| *t > start && s.norm() < 1e-12 * peak)
        .map_or(traj.times()[traj.len() - 1], |(t, _)| t);
    log_norm_slope(traj, start, end)
}
