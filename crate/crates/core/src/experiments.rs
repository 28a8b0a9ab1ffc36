//! Experiment harness: matched fluid-vs-simulation comparisons and
//! stability-region sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fluid::{integrate, FluidConfig, FluidError, FluidVerdict};
use crate::model::{lift_to_raw, scale_center, CtmcState, FluidState, ModelParams, ParamErrors};
use crate::simulator::{simulate_replication, time_averages, EventKind, SimConfig, SimError, SimRun};
use crate::stability::{
    check_condition_thm2, check_condition_thm3, classify, product_char_poly, tau_pencil_positive, DEFAULT_TAU_GRID,
};
use crate::cubic::cubic_discriminant;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Params(#[from] ParamErrors),
    #[error(transparent)]
    Fluid(#[from] FluidError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("bad sweep axis `{0}`: {1}")]
    Axis(String, &'static str),
    #[error("sweep grid is empty")]
    EmptyGrid,
    #[error("experiment needs at least one initial state")]
    NoInit,
}

/// Initial condition in either coordinate system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "coords", rename_all = "snake_case")]
pub enum Init {
    Raw(CtmcState),
    Fluid(FluidState),
}

impl Init {
    /// Matched pair of starting points: raw states are scaled, fluid states
    /// are lifted to the nearest integer raw state.
    pub fn matched(&self, p: &ModelParams) -> (CtmcState, FluidState) {
        match *self {
            Init::Raw(s) => (s, scale_center(&s, p)),
            Init::Fluid(f) => (lift_to_raw(&f, p), f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub params: ModelParams,
    pub inits: Vec<Init>,
    pub fluid_cfg: FluidConfig,
    pub sim_cfg: SimConfig,
    pub outputs: PathBuf,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.inits.is_empty() {
            return Err(ExperimentError::NoInit);
        }
        self.fluid_cfg.validate()?;
        self.sim_cfg.validate()?;
        Ok(())
    }
}

/// Summary of one simulated replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub replication: usize,
    pub event_counts: BTreeMap<String, u64>,
    /// Time averages over the second half of the horizon.
    pub avg_x: f64,
    pub avg_z: f64,
    pub final_state: CtmcState,
}

impl SimSummary {
    pub fn of(run: &SimRun, t_end: f64) -> Self {
        let event_counts = EventKind::ALL.iter().map(|e| (format!("{e:?}"), run.count(*e))).collect();
        let (avg_x, avg_z) = time_averages(&run.trajectory, t_end / 2.0).unwrap_or((f64::NAN, f64::NAN));
        let final_state = run.trajectory.last().map(|(_, s)| *s).unwrap_or_default();
        Self { replication: run.replication, event_counts, avg_x, avg_z, final_state }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonResult {
    /// Largest Euclidean distance in `(x, y, w)` over the sampling grid.
    pub sup_gap: f64,
    #[serde(skip)]
    pub gap_curve: Vec<(f64, f64)>,
    pub fluid: FluidVerdict,
    pub sim: SimSummary,
}

impl ComparisonResult {
    pub fn gap_csv(&self) -> String {
        let mut out = String::from("t,gap\n");
        for (t, g) in &self.gap_curve {
            let _ = writeln!(out, "{t},{g}");
        }
        out
    }
}

/// Runs the fluid model and `sim_cfg.replications` simulations from matched
/// initial states and measures their distance on the simulation grid.
///
/// The fluid horizon is set to the simulation horizon. Replications run in
/// parallel; results are in replication order.
pub fn compare(
    init: &Init,
    p: &ModelParams,
    fluid_cfg: &FluidConfig,
    sim_cfg: &SimConfig,
) -> Result<Vec<ComparisonResult>, ExperimentError> {
    sim_cfg.validate()?;
    let (raw, fluid_init) = init.matched(p);
    let fcfg = FluidConfig { t_end: sim_cfg.t_end, ..*fluid_cfg };
    let (fluid_traj, verdict) = integrate(&fluid_init, p, &fcfg)?;

    (0..sim_cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let run = simulate_replication(&raw, p, sim_cfg, rep)?;
            let gap_curve: Vec<(f64, f64)> = run
                .trajectory
                .iter()
                .map(|(t, s)| {
                    let f = fluid_traj.at(t).expect("fluid trajectory is non-empty");
                    (t, scale_center(s, p).distance(&f))
                })
                .collect();
            let sup_gap = gap_curve.iter().map(|g| g.1).fold(0.0, f64::max);
            Ok(ComparisonResult { sup_gap, gap_curve, fluid: verdict, sim: SimSummary::of(&run, sim_cfg.t_end) })
        })
        .collect()
}

pub fn mean_sup_gap(results: &[ComparisonResult]) -> f64 {
    results.iter().map(|r| r.sup_gap).sum::<f64>() / results.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Alpha,
    Beta,
    Mu,
    Gamma,
    Epsilon,
}

impl SweepParam {
    fn set(self, p: &mut ModelParams, v: f64) {
        match self {
            SweepParam::Alpha => p.alpha = v,
            SweepParam::Beta => p.beta = v,
            SweepParam::Mu => p.mu = v,
            SweepParam::Gamma => p.gamma = v,
            SweepParam::Epsilon => p.epsilon = v,
        }
    }
}

/// `points` equally spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n).map(|i| self.min + (self.max - self.min) * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

/// Parses `name=min:max:points`, e.g. `gamma=0.1:3:100`.
impl FromStr for SweepAxis {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |why| ExperimentError::Axis(s.to_string(), why);
        let (name, range) = s.split_once('=').ok_or_else(|| bad("expected name=min:max:points"))?;
        let param = match name.trim() {
            "alpha" => SweepParam::Alpha,
            "beta" => SweepParam::Beta,
            "mu" => SweepParam::Mu,
            "gamma" => SweepParam::Gamma,
            "epsilon" => SweepParam::Epsilon,
            _ => return Err(bad("parameter must be one of alpha, beta, mu, gamma, epsilon")),
        };
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(bad("expected min:max:points"));
        };
        let min: f64 = lo.trim().parse().map_err(|_| bad("min is not a number"))?;
        let max: f64 = hi.trim().parse().map_err(|_| bad("max is not a number"))?;
        let points: usize = n.trim().parse().map_err(|_| bad("points is not a count"))?;
        if !(min.is_finite() && max.is_finite()) || max < min {
            return Err(bad("need finite min <= max"));
        }
        Ok(SweepAxis { param, min, max, points })
    }
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub params: ModelParams,
    pub cond_thm2: bool,
    pub cond_thm3: bool,
    pub aminus_hurwitz: bool,
    pub cqlf_exists: bool,
    pub tau_pencil_positive: bool,
    /// Coefficients `t^3 + b t^2 + c t + d` of the product characteristic
    /// polynomial and its discriminant.
    pub product_b: f64,
    pub product_c: f64,
    pub product_discriminant: f64,
    /// `(converged, total)` over the fluid initial-state battery.
    pub fluid_converged: Option<(usize, usize)>,
}

/// Raw initial states of the fluid battery, expressed at scale `r`: the
/// empty system and an agent or customer backlog of size `r`.
pub fn fluid_battery(r: f64) -> [CtmcState; 3] {
    let n = r.round() as i64;
    [CtmcState::new(0, 0, 0), CtmcState::new(0, n, 0), CtmcState::new(0, -n, 0)]
}

pub fn sweep_point(p: &ModelParams, fluid: Option<&FluidConfig>) -> Result<SweepRow, ExperimentError> {
    let report = classify(p);
    let prod = product_char_poly(p);
    let fluid_converged = match fluid {
        None => None,
        Some(cfg) => {
            let inits = fluid_battery(p.r);
            let mut ok = 0;
            for s in &inits {
                let (_, v) = integrate(&scale_center(s, p), p, cfg)?;
                ok += usize::from(v.converged());
            }
            Some((ok, inits.len()))
        }
    };
    Ok(SweepRow {
        params: *p,
        cond_thm2: check_condition_thm2(p).holds,
        cond_thm3: check_condition_thm3(p).holds,
        aminus_hurwitz: report.aminus_hurwitz,
        cqlf_exists: report.cqlf_exists,
        tau_pencil_positive: tau_pencil_positive(p, &DEFAULT_TAU_GRID),
        product_b: prod.a1,
        product_c: prod.a2,
        product_discriminant: cubic_discriminant(&prod).unwrap_or(f64::NAN),
        fluid_converged,
    })
}

/// Evaluates every point of the two-axis grid around `base`, row-major in
/// the first axis. Points are validated before any work starts.
pub fn sweep(
    base: &ModelParams,
    axes: &[SweepAxis; 2],
    fluid: Option<&FluidConfig>,
) -> Result<Vec<SweepRow>, ExperimentError> {
    if axes[0].param == axes[1].param {
        return Err(ExperimentError::Axis(format!("{:?}", axes[0].param).to_lowercase(), "axes must differ"));
    }
    if let Some(cfg) = fluid {
        cfg.validate()?;
    }
    let (first, second) = (axes[0].values(), axes[1].values());
    let mut grid = Vec::with_capacity(first.len() * second.len());
    for &u in &first {
        for &v in &second {
            let mut p = *base;
            axes[0].param.set(&mut p, u);
            axes[1].param.set(&mut p, v);
            p.validate(false)?;
            grid.push(p);
        }
    }
    if grid.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    grid.par_iter().map(|p| sweep_point(p, fluid)).collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "alpha,beta,mu,gamma,epsilon,cond_thm2,cond_thm3,aminus_hurwitz,cqlf_exists,tau_pencil_positive,\
         product_b,product_c,product_discriminant,fluid_converged\n",
    );
    for r in rows {
        let p = &r.params;
        let fluid = r.fluid_converged.map(|(k, n)| format!("{k}/{n}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.alpha,
            p.beta,
            p.mu,
            p.gamma,
            p.epsilon,
            r.cond_thm2,
            r.cond_thm3,
            r.aminus_hurwitz,
            r.cqlf_exists,
            r.tau_pencil_positive,
            r.product_b,
            r.product_c,
            r.product_discriminant,
            fluid
        );
    }
    out
}
