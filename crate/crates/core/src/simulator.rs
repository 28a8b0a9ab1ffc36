//! Exact simulation of the stochastic invitation system.
//!
//! The pending-invitation count tracks its target exactly, so declined
//! invitations never change the state and are not simulated. Five event
//! streams compete:
//!
//! | event                     | rate                 |
//! |---------------------------|----------------------|
//! | customer arrival          | `lambda r`           |
//! | invitation accepted       | `beta X`             |
//! | feedback tick             | `epsilon abs(Y)`     |
//! | completion, agent returns | `alpha mu Z`         |
//! | completion, agent leaves  | `(1 - alpha) mu Z`   |
//!
//! Holding times are drawn from the total rate and the firing event is
//! chosen proportionally to its rate.
//!
//! # Random streams
//!
//! Replication `k` of a run with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` with its stream set to `k`. Each event
//! consumes exactly two `f64` draws: the holding time first, then the event
//! selector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CtmcState, FluidState, ModelParams, Trajectory, TrajectoryKind, TrajectoryMeta};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("event {event:?} is infeasible in state {state:?}")]
    InfeasibleEvent { event: EventKind, state: CtmcState },
    #[error("gamma must be a positive integer for simulation, got {0}")]
    NonIntegerGamma(f64),
    #[error("invalid initial state {0:?}")]
    InvalidInit(CtmcState),
    #[error("invalid simulation config: {0}")]
    Config(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    CustomerArrival,
    InvitationAccepted,
    FeedbackTick,
    ServiceCompletionReturn,
    ServiceCompletionLeave,
}

impl EventKind {
    pub const ALL: [EventKind; 5] = [
        EventKind::CustomerArrival,
        EventKind::InvitationAccepted,
        EventKind::FeedbackTick,
        EventKind::ServiceCompletionReturn,
        EventKind::ServiceCompletionLeave,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Rate of every event kind, indexed by [`EventKind::index`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRates(pub [f64; 5]);

impl EventRates {
    pub fn get(&self, e: EventKind) -> f64 {
        self.0[e.index()]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Event whose cumulative rate interval contains `u * total`.
    pub fn select(&self, u: f64) -> EventKind {
        let target = u * self.total();
        let mut acc = 0.0;
        let mut last = EventKind::CustomerArrival;
        for e in EventKind::ALL {
            let r = self.get(e);
            if r <= 0.0 {
                continue;
            }
            acc += r;
            last = e;
            if target < acc {
                return e;
            }
        }
        last
    }
}

pub fn event_rates(s: &CtmcState, p: &ModelParams) -> EventRates {
    let z = s.z as f64;
    EventRates([
        p.arrival_rate(),
        p.beta * s.x as f64,
        p.epsilon * s.y.unsigned_abs() as f64,
        p.alpha * p.mu * z,
        (1.0 - p.alpha) * p.mu * z,
    ])
}

/// `gamma` as an integer jump size.
pub fn gamma_step(p: &ModelParams) -> Result<i64, SimError> {
    if p.gamma > 0.0 && p.gamma.fract() == 0.0 && p.gamma < i64::MAX as f64 {
        Ok(p.gamma as i64)
    } else {
        Err(SimError::NonIntegerGamma(p.gamma))
    }
}

/// State after one event.
///
/// Arrivals match with a waiting agent when `Y > 0`; acceptances and
/// returning agents match with a waiting customer when `Y < 0`. Both agent
/// arrivals lower the pending count by `gamma`, floored at zero. A feedback
/// tick moves the pending count against the sign of `Y`, except that an
/// empty pending pool can only grow.
pub fn apply_event(s: &CtmcState, e: EventKind, gamma: i64) -> Result<CtmcState, SimError> {
    let CtmcState { x, y, z } = *s;
    let infeasible = || SimError::InfeasibleEvent { event: e, state: *s };
    let next = match e {
        EventKind::CustomerArrival => CtmcState { x: x + gamma, y: y - 1, z: if y > 0 { z + 1 } else { z } },
        EventKind::InvitationAccepted => {
            if x == 0 {
                return Err(infeasible());
            }
            CtmcState { x: x - gamma.min(x), y: y + 1, z: if y < 0 { z + 1 } else { z } }
        }
        EventKind::FeedbackTick => {
            let x = if x >= 1 {
                x - y.signum()
            } else if y < 0 {
                x + 1
            } else {
                x
            };
            CtmcState { x, y, z }
        }
        EventKind::ServiceCompletionReturn => {
            if z == 0 {
                return Err(infeasible());
            }
            CtmcState { x: x - gamma.min(x), y: y + 1, z: if y < 0 { z } else { z - 1 } }
        }
        EventKind::ServiceCompletionLeave => {
            if z == 0 {
                return Err(infeasible());
            }
            CtmcState { x, y, z: z - 1 }
        }
    };
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub t_end: f64,
    /// Output grid step.
    pub sample_dt: f64,
    pub replications: usize,
    /// Keep every event in [`SimRun::events`].
    #[serde(default)]
    pub record_events: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { seed: 0, t_end: 40.0, sample_dt: 0.01, replications: 1, record_events: false }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(SimError::Config("t_end must be > 0"));
        }
        if !(self.sample_dt > 0.0 && self.sample_dt.is_finite()) {
            return Err(SimError::Config("sample_dt must be > 0"));
        }
        if self.replications == 0 {
            return Err(SimError::Config("replications must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    /// State just before the event.
    pub before: CtmcState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub replication: usize,
    pub trajectory: Trajectory<CtmcState>,
    pub event_counts: [u64; 5],
    pub events: Option<Vec<EventRecord>>,
}

impl SimRun {
    pub fn count(&self, e: EventKind) -> u64 {
        self.event_counts[e.index()]
    }

    pub fn scaled(&self) -> Trajectory<FluidState> {
        self.trajectory.scaled()
    }
}

/// RNG for replication `replication` of a run seeded with `seed`.
pub fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

/// Replication 0 of a run.
pub fn simulate(init: &CtmcState, p: &ModelParams, cfg: &SimConfig) -> Result<SimRun, SimError> {
    simulate_replication(init, p, cfg, 0)
}

/// One replication, sampled on the grid `0, dt, 2 dt, ...` up to `t_end`.
/// Each sample holds the state right after all events at or before its time.
pub fn simulate_replication(
    init: &CtmcState,
    p: &ModelParams,
    cfg: &SimConfig,
    replication: usize,
) -> Result<SimRun, SimError> {
    cfg.validate()?;
    let gamma = gamma_step(p)?;
    if !init.is_valid() {
        return Err(SimError::InvalidInit(*init));
    }

    let mut rng = replication_rng(cfg.seed, replication);
    let n_samples = (cfg.t_end / cfg.sample_dt + 1e-9).floor() as usize;
    let meta = TrajectoryMeta { params: *p, seed: Some(cfg.seed), kind: TrajectoryKind::Raw };
    let mut traj = Trajectory::with_capacity(meta, n_samples + 1);
    let mut events = cfg.record_events.then(Vec::new);
    let mut counts = [0u64; 5];

    let mut state = *init;
    let mut t = 0.0;
    let mut next_sample = 0usize;
    loop {
        let rates = event_rates(&state, p);
        let total = rates.total();
        let hold: f64 = rng.sample(Exp1);
        let u: f64 = rng.gen();
        let t_event = if total > 0.0 { t + hold / total } else { f64::INFINITY };

        while next_sample <= n_samples && (next_sample as f64 * cfg.sample_dt) < t_event {
            traj.push(next_sample as f64 * cfg.sample_dt, state).expect("grid is increasing");
            next_sample += 1;
        }
        if next_sample > n_samples {
            break;
        }

        let kind = rates.select(u);
        if let Some(log) = events.as_mut() {
            log.push(EventRecord { time: t_event, kind, before: state });
        }
        state = apply_event(&state, kind, gamma)?;
        counts[kind.index()] += 1;
        t = t_event;
    }

    Ok(SimRun { replication, trajectory: traj, event_counts: counts, events })
}

/// Simulates and maps every sample through the centering/scaling map.
pub fn simulate_scaled(init: &CtmcState, p: &ModelParams, cfg: &SimConfig) -> Result<Trajectory<FluidState>, SimError> {
    Ok(simulate(init, p, cfg)?.scaled())
}

/// Time averages of `X` and `Z` over samples with `t >= t_from`.
pub fn time_averages(traj: &Trajectory<CtmcState>, t_from: f64) -> Option<(f64, f64)> {
    let (n, sx, sz) = traj
        .iter()
        .filter(|(t, _)| *t >= t_from)
        .fold((0usize, 0.0, 0.0), |(n, sx, sz), (_, s)| (n + 1, sx + s.x as f64, sz + s.z as f64));
    (n > 0).then(|| (sx / n as f64, sz / n as f64))
}
