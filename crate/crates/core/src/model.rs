//! Model parameters, state records and the centering/scaling maps shared by
//! the stochastic simulator and the fluid integrator.
//!
//! The stochastic system is indexed by a scale `r`: customers arrive at rate
//! `lambda * r`, every other constant is held fixed. Fluid-scaled states are
//! centered at the operating point
//!
//! ```text
//! X* = lambda r (1 - alpha) / beta,   Y* = 0,   Z* = lambda r / mu,   W* = 2 lambda r / mu
//! ```
//!
//! and divided by `r`. The `(X, Y, W)` coordinates use `W = |Y| + 2Z`, the
//! total number of customers and agents present.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute slack allowed on `w >= |y|` before a fluid state is unphysical.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// The six model constants plus the system scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Customer arrival rate of the scaled system; the raw rate is `lambda * r`.
    pub lambda: f64,
    /// Probability that an agent rejoins the agent queue after a service.
    pub alpha: f64,
    /// Invitation-acceptance rate of a pending agent.
    pub beta: f64,
    /// Service rate.
    pub mu: f64,
    /// Jump of the invitation target per queue-difference change.
    pub gamma: f64,
    /// Feedback gain on the queue difference.
    pub epsilon: f64,
    /// System scale.
    pub r: f64,
}

/// One violated parameter bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamViolation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

/// Every violation found by [`validate_params`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid parameters: {}", list(.0))]
pub struct ParamErrors(pub Vec<ParamViolation>);

fn list(v: &[ParamViolation]) -> String {
    v.iter().map(|e| e.message.as_str()).collect::<Vec<_>>().join("; ")
}

impl ParamErrors {
    pub fn fields(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.0.iter().map(|v| v.field)
    }
}

/// Checks every parameter bound and reports all violations at once.
///
/// With `for_simulation` set, `gamma` must also be a positive integer since
/// the stochastic system moves the pending-invitation count in steps of
/// `gamma`.
pub fn validate_params(p: &ModelParams, for_simulation: bool) -> Result<(), ParamErrors> {
    let mut errs = Vec::new();
    let mut push = |field: &'static str, message: String| errs.push(ParamViolation { field, message });

    for (field, value) in [
        ("lambda", p.lambda),
        ("alpha", p.alpha),
        ("beta", p.beta),
        ("mu", p.mu),
        ("gamma", p.gamma),
        ("epsilon", p.epsilon),
        ("r", p.r),
    ] {
        if !value.is_finite() {
            push(field, format!("{field} must be finite"));
        }
    }
    if !(p.lambda > 0.0) {
        push("lambda", "lambda must be > 0".into());
    }
    if !(p.alpha >= 0.0) {
        push("alpha", "alpha must be >= 0".into());
    }
    if !(p.alpha < 1.0) {
        push("alpha", "alpha must be < 1".into());
    }
    if !(p.beta > 0.0) {
        push("beta", "beta must be > 0".into());
    }
    if !(p.mu > 0.0) {
        push("mu", "mu must be > 0".into());
    }
    if !(p.gamma > 0.0) {
        push("gamma", "gamma must be > 0".into());
    }
    if !(p.epsilon > 0.0) {
        push("epsilon", "epsilon must be > 0".into());
    }
    if !(p.r >= 1.0) {
        push("r", "r must be >= 1".into());
    }
    if for_simulation && p.gamma.is_finite() && p.gamma.fract() != 0.0 {
        push("gamma", "gamma must be integer".into());
    }

    if errs.is_empty() {
        Ok(())
    } else {
        Err(ParamErrors(errs))
    }
}

impl ModelParams {
    pub fn validate(&self, for_simulation: bool) -> Result<(), ParamErrors> {
        validate_params(self, for_simulation)
    }

    /// Raw customer arrival rate `lambda * r`.
    pub fn arrival_rate(&self) -> f64 {
        self.lambda * self.r
    }

    /// Reflecting boundary of the centered fluid coordinate `x`.
    pub fn x_min(&self) -> f64 {
        -self.lambda * (1.0 - self.alpha) / self.beta
    }

    pub fn x_center(&self) -> f64 {
        self.lambda * self.r * (1.0 - self.alpha) / self.beta
    }

    pub fn z_center(&self) -> f64 {
        self.lambda * self.r / self.mu
    }

    pub fn w_center(&self) -> f64 {
        2.0 * self.lambda * self.r / self.mu
    }

    /// Same constants with a different `alpha`.
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Same constants with a different scale; `lambda` is kept, so the raw
    /// arrival rate changes.
    pub fn with_scale(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Integer state of the stochastic system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CtmcState {
    /// Pending invited agents.
    pub x: i64,
    /// Agent queue minus customer queue.
    pub y: i64,
    /// Customers (equivalently agents) in service.
    pub z: i64,
}

impl CtmcState {
    pub const fn new(x: i64, y: i64, z: i64) -> Self {
        Self { x, y, z }
    }

    pub fn is_valid(&self) -> bool {
        self.x >= 0 && self.z >= 0
    }

    /// Total number of customers and agents present.
    pub fn w(&self) -> i64 {
        self.y.abs() + 2 * self.z
    }

    pub fn agent_queue(&self) -> i64 {
        self.y.max(0)
    }

    pub fn customer_queue(&self) -> i64 {
        (-self.y).max(0)
    }
}

/// Centered, scaled state `(x, y, w)` of the fluid model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FluidState {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

impl FluidState {
    pub const ORIGIN: FluidState = FluidState { x: 0.0, y: 0.0, w: 0.0 };

    pub const fn new(x: f64, y: f64, w: f64) -> Self {
        Self { x, y, w }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.w]
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.w * self.w).sqrt()
    }

    pub fn distance(&self, other: &FluidState) -> f64 {
        let (dx, dy, dw) = (self.x - other.x, self.y - other.y, self.w - other.w);
        (dx * dx + dy * dy + dw * dw).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.w.is_finite()
    }

    /// Centered, scaled number in service, `(w - |y|) / 2`.
    pub fn z_centered(&self) -> f64 {
        z_from_yw(self.y, self.w)
    }

    /// Checks `x >= x_min` and that the uncentered number in service is
    /// nonnegative, both up to [`PHYSICALITY_TOL`].
    pub fn is_physical(&self, p: &ModelParams) -> bool {
        let in_service = z_from_yw(self.y, self.w) + p.lambda / p.mu;
        self.x >= p.x_min() - PHYSICALITY_TOL && in_service >= -PHYSICALITY_TOL
    }
}

/// Number in service recovered from `W = |Y| + 2Z`.
pub fn z_from_yw(y: f64, w: f64) -> f64 {
    (w - y.abs()) / 2.0
}

/// Maps a raw stochastic state to centered fluid coordinates.
pub fn scale_center(s: &CtmcState, p: &ModelParams) -> FluidState {
    FluidState {
        x: (s.x as f64 - p.x_center()) / p.r,
        y: s.y as f64 / p.r,
        w: (s.w() as f64 - p.w_center()) / p.r,
    }
}

/// Nearest integer raw state whose scaled image is `f`; the inverse of
/// [`scale_center`] up to rounding. Counts are clamped at zero.
pub fn lift_to_raw(f: &FluidState, p: &ModelParams) -> CtmcState {
    let x = (f.x * p.r + p.x_center()).round().max(0.0) as i64;
    let y = (f.y * p.r).round() as i64;
    let w = f.w * p.r + p.w_center();
    let z = ((w - y.abs() as f64) / 2.0).round().max(0.0) as i64;
    CtmcState { x, y, z }
}

/// What a trajectory records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Raw,
    Scaled,
    Fluid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub params: ModelParams,
    pub seed: Option<u64>,
    pub kind: TrajectoryKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("time {next} does not follow {last}")]
    NotIncreasing { last: f64, next: f64 },
}

/// Time-stamped states on a sampling grid. Times are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    times: Vec<f64>,
    states: Vec<S>,
    pub meta: TrajectoryMeta,
}

impl<S> Trajectory<S> {
    pub fn new(meta: TrajectoryMeta) -> Self {
        Self { times: Vec::new(), states: Vec::new(), meta }
    }

    pub fn with_capacity(meta: TrajectoryMeta, n: usize) -> Self {
        Self { times: Vec::with_capacity(n), states: Vec::with_capacity(n), meta }
    }

    pub fn push(&mut self, t: f64, s: S) -> Result<(), TrajectoryError> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(TrajectoryError::NotIncreasing { last, next: t });
            }
        }
        self.times.push(t);
        self.states.push(s);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.times.iter().copied().zip(self.states.iter())
    }

    pub fn last(&self) -> Option<(f64, &S)> {
        Some((*self.times.last()?, self.states.last()?))
    }

    pub fn map<T>(&self, kind: TrajectoryKind, f: impl Fn(&S) -> T) -> Trajectory<T> {
        Trajectory {
            times: self.times.clone(),
            states: self.states.iter().map(f).collect(),
            meta: TrajectoryMeta { kind, ..self.meta.clone() },
        }
    }
}

impl Trajectory<FluidState> {
    /// Linear interpolation at `t`, clamped to the recorded time span.
    pub fn at(&self, t: f64) -> Option<FluidState> {
        let (first, last) = (*self.times.first()?, *self.times.last()?);
        if t <= first {
            return Some(self.states[0]);
        }
        if t >= last {
            return Some(self.states[self.states.len() - 1]);
        }
        let hi = self.times.partition_point(|&s| s < t);
        let lo = hi - 1;
        let (t0, t1) = (self.times[lo], self.times[hi]);
        let u = (t - t0) / (t1 - t0);
        let (a, b) = (self.states[lo], self.states[hi]);
        Some(FluidState {
            x: a.x + u * (b.x - a.x),
            y: a.y + u * (b.y - a.y),
            w: a.w + u * (b.w - a.w),
        })
    }

    /// CSV with header `t,x,y,w,z`, where `z` is the centered number in service.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,y,w,z\n");
        for (t, s) in self.iter() {
            out.push_str(&format!("{t},{},{},{},{}\n", s.x, s.y, s.w, s.z_centered()));
        }
        out
    }

    /// CSV with header `t,x,y,w`.
    pub fn to_scaled_csv(&self) -> String {
        let mut out = String::from("t,x,y,w\n");
        for (t, s) in self.iter() {
            out.push_str(&format!("{t},{},{},{}\n", s.x, s.y, s.w));
        }
        out
    }
}

impl Trajectory<CtmcState> {
    /// CSV with header `t,X,Y,Z,W`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,X,Y,Z,W\n");
        for (t, s) in self.iter() {
            out.push_str(&format!("{t},{},{},{},{}\n", s.x, s.y, s.z, s.w()));
        }
        out
    }

    pub fn scaled(&self) -> Trajectory<FluidState> {
        let p = self.meta.params;
        self.map(TrajectoryKind::Scaled, |s| scale_center(s, &p))
    }
}
