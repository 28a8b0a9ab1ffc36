//! `invitation` command-line tool.
//!
//! Exit codes: 0 when the command ran, 2 for bad input (nothing is written),
//! 1 for internal failures.

mod args;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use thiserror::Error;

use invitation_core::experiments::{self, ComparisonResult, ExperimentError, Init, SimSummary, SweepAxis};
use invitation_core::fluid::{integrate, FluidConfig, FluidError};
use invitation_core::model::{CtmcState, FluidState, ModelParams};
use invitation_core::presets;
use invitation_core::simulator::{simulate_replication, SimConfig, SimError};
use invitation_core::stability::classify;

use args::{Cli, Command, FluidFlags, InitArgs, ParamsSource, SimFlags};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<FluidError> for CliError {
    fn from(e: FluidError) -> Self {
        match e {
            FluidError::EmptyTrajectory => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InfeasibleEvent { .. } => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Fluid(e) => e.into(),
            ExperimentError::Sim(e) => e.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn load_params(src: &ParamsSource, for_simulation: bool) -> Result<ModelParams> {
    let p = match (&src.params, &src.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            ModelParams::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        (None, Some(name)) => presets::preset(name)
            .ok_or_else(|| CliError::Input(format!("unknown preset `{name}`")))?
            .params(),
        (None, None) => return Err(CliError::Input("one of --params or --preset is required".into())),
    };
    p.validate(for_simulation).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(p)
}

fn triple(flag: &str, text: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::Input(format!("--{flag} expects three comma-separated numbers, got `{text}`"));
    let [a, b, c] = parts[..] else { return Err(bad()) };
    let parse = |s: &str| s.parse::<f64>().map_err(|_| bad());
    Ok([parse(a)?, parse(b)?, parse(c)?])
}

fn parse_init(args: &InitArgs) -> Result<Init> {
    if let Some(text) = &args.init {
        let v = triple("init", text)?;
        if v.iter().any(|c| c.fract() != 0.0) {
            return Err(CliError::Input("--init takes integer counts X,Y,Z".into()));
        }
        let s = CtmcState::new(v[0] as i64, v[1] as i64, v[2] as i64);
        if !s.is_valid() {
            return Err(CliError::Input("--init needs X >= 0 and Z >= 0".into()));
        }
        return Ok(Init::Raw(s));
    }
    if let Some(text) = &args.finit {
        return Ok(Init::Fluid(FluidState::from_array(triple("finit", text)?)));
    }
    Ok(Init::Raw(CtmcState::default()))
}

fn fluid_config(flags: &FluidFlags, t_end: f64) -> Result<FluidConfig> {
    let cfg = FluidConfig { dt: flags.dt, t_end, conv_tol: flags.conv_tol, conv_hold: flags.conv_hold };
    cfg.validate()?;
    Ok(cfg)
}

fn sim_config(flags: &SimFlags, t_end: f64) -> Result<SimConfig> {
    let cfg = SimConfig {
        seed: flags.seed,
        t_end,
        sample_dt: flags.sample_dt,
        replications: flags.reps,
        record_events: false,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Internal(e.to_string()))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn analyze(a: &args::AnalyzeArgs) -> Result<()> {
    let p = load_params(&a.source, false)?;
    let text = json(&classify(&p))?;
    if let Some(dir) = &a.out {
        write(dir, "analyze.json", &text)?;
    }
    println!("{text}");
    Ok(())
}

fn fluid(a: &args::FluidArgs) -> Result<()> {
    let p = load_params(&a.source, false)?;
    let (_, init) = parse_init(&a.init)?.matched(&p);
    let cfg = fluid_config(&a.fluid, a.t_end)?;
    let (traj, verdict) = integrate(&init, &p, &cfg)?;
    let text = json(&verdict)?;
    write(&a.out, "fluid.csv", &traj.to_csv())?;
    write(&a.out, "fluid_verdict.json", &text)?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct RunMeta<'a> {
    params: &'a ModelParams,
    init: &'a CtmcState,
    seed: u64,
    config: &'a SimConfig,
    build: &'static str,
}

fn simulate(a: &args::SimulateArgs) -> Result<()> {
    let p = load_params(&a.source, true)?;
    let (raw, _) = parse_init(&a.init)?.matched(&p);
    let cfg = sim_config(&a.sim, a.t_end)?;

    let runs = (0..cfg.replications)
        .map(|rep| simulate_replication(&raw, &p, &cfg, rep))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let summaries: Vec<SimSummary> = runs.iter().map(|r| SimSummary::of(r, cfg.t_end)).collect();

    for run in &runs {
        let k = run.replication;
        write(&a.out, &format!("sim_raw_rep{k}.csv"), &run.trajectory.to_csv())?;
        write(&a.out, &format!("sim_scaled_rep{k}.csv"), &run.scaled().to_scaled_csv())?;
    }
    let meta = RunMeta { params: &p, init: &raw, seed: cfg.seed, config: &cfg, build: env!("INVITATION_BUILD") };
    write(&a.out, "sim_meta.json", &json(&meta)?)?;
    let text = json(&summaries)?;
    write(&a.out, "sim_summary.json", &text)?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct CompareReport<'a> {
    init: Init,
    mean_sup_gap: f64,
    results: &'a [ComparisonResult],
}

fn compare(a: &args::CompareArgs) -> Result<()> {
    let p = load_params(&a.source, true)?;
    let init = parse_init(&a.init)?;
    let fcfg = fluid_config(&a.fluid, a.t_end)?;
    let scfg = sim_config(&a.sim, a.t_end)?;
    let results = experiments::compare(&init, &p, &fcfg, &scfg)?;

    for r in &results {
        write(&a.out, &format!("gap_rep{}.csv", r.sim.replication), &r.gap_csv())?;
    }
    let report = CompareReport { init, mean_sup_gap: experiments::mean_sup_gap(&results), results: &results };
    let text = json(&report)?;
    write(&a.out, "compare.json", &text)?;
    println!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    points: usize,
    cond_thm2: usize,
    cond_thm3: usize,
    aminus_hurwitz: usize,
    cqlf_exists: usize,
}

fn sweep(a: &args::SweepArgs) -> Result<()> {
    let p = load_params(&a.source, false)?;
    let axes: Vec<SweepAxis> = a.axes.iter().map(|s| s.parse()).collect::<std::result::Result<_, _>>()?;
    let axes: [SweepAxis; 2] =
        axes.try_into().map_err(|_| CliError::Input("sweep needs exactly two --axis flags".into()))?;
    let fcfg = fluid_config(&a.fluid, a.t_end)?;
    let rows = experiments::sweep(&p, &axes, a.with_fluid.then_some(&fcfg))?;

    write(&a.out, "sweep.csv", &experiments::sweep_csv(&rows))?;
    let count = |f: fn(&experiments::SweepRow) -> bool| rows.iter().filter(|r| f(r)).count();
    let summary = SweepSummary {
        points: rows.len(),
        cond_thm2: count(|r| r.cond_thm2),
        cond_thm3: count(|r| r.cond_thm3),
        aminus_hurwitz: count(|r| r.aminus_hurwitz),
        cqlf_exists: count(|r| r.cqlf_exists),
    };
    println!("{}", json(&summary)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Fluid(a) => fluid(a),
        Command::Simulate(a) => simulate(a),
        Command::Compare(a) => compare(a),
        Command::Sweep(a) => sweep(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
