//! Command-line surface. Precedence: built-in defaults < `--config` file <
//! flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use pursuit_core::config::RunConfig;
use pursuit_core::dynamics::DEFAULT_DT;
use pursuit_core::episode::EpisodeConfig;
use pursuit_core::evader::EvaderPolicySpec;
use pursuit_core::harness::DEFAULT_EPISODES;
use pursuit_core::hji::CAPTURE_RADIUS;
use pursuit_core::pursuer::{PursuerPolicySpec, DEFAULT_LOOKAHEAD_STEPS, DEFAULT_SEARCH_THRESHOLD, DEFAULT_TURN_GAIN};
use pursuit_core::{ControlBounds, Error};
use pursuit_session::manager::{DEFAULT_CAPACITY, DEFAULT_TICK_MS};
use pursuit_session::server::PORT_ENV;
use pursuit_session::DEFAULT_PORT;

const DEFAULT_HORIZON: f64 = 20.0;

fn filter_help() -> String {
    format!(
        "Perception defaults: FOV half-angle 55°, range 10 m; filter Q = 0.01·I, \
         R = diag(0.2, 0.2, 0.1), P₀ = I, dt = {DEFAULT_DT}. Policy defaults: turn gain \
         {DEFAULT_TURN_GAIN}, lookahead {DEFAULT_LOOKAHEAD_STEPS} steps, search threshold \
         {DEFAULT_SEARCH_THRESHOLD}.\nSettings come from built-in defaults, then --config, then flags."
    )
}

#[derive(Debug, Parser)]
#[command(name = "pursuit", version, about = "Pursuit-evasion between planar unicycles", after_help = filter_help())]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the pursuit-evasion game on a grid and write a value file.
    SolveGame(SolveArgs),
    /// Run one episode and write its trajectory as CSV.
    Run(RunArgs),
    /// Sweep one matchup over seeded initial conditions.
    Eval(EvalArgs),
    /// Sweep every pursuer against every evader.
    CrossEval(CrossEvalArgs),
    /// Serve interactive sessions over WebSocket.
    Serve(ServeArgs),
    /// Dump a planar slice of a value file as CSV.
    InspectValue(InspectArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Grid nodes along x, y and heading (x and y must be odd).
    #[arg(long, num_args = 3, value_names = ["NX", "NY", "NT"], default_values_t = [81, 81, 41])]
    pub grid: Vec<usize>,
    /// Half-width of the square position domain, m.
    #[arg(long, default_value_t = 8.0)]
    pub extent: f64,
    /// Longest time-to-go to solve for, s.
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    pub horizon: f64,
    /// Interval between stored slices, s.
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub slice_dt: f64,
    /// Capture radius, m.
    #[arg(long, default_value_t = CAPTURE_RADIUS)]
    pub capture_radius: f64,
    /// Pursuer top speed, m/s.
    #[arg(long, default_value_t = ControlBounds::PURSUER.v_max)]
    pub pursuer_v_max: f64,
    /// Evader top speed, m/s.
    #[arg(long, default_value_t = ControlBounds::EVADER.v_max)]
    pub evader_v_max: f64,
    /// Turn-rate limit of both agents, rad/s (symmetric).
    #[arg(long, default_value_t = ControlBounds::PURSUER.omega_max)]
    pub omega_max: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Episode settings shared by `run`, `eval`, `cross-eval` and `serve`.
/// Unset flags leave the config-file value in place.
#[derive(Debug, Args, Default)]
pub struct EpisodeArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Value file for game policies.
    #[arg(long)]
    pub value: Option<PathBuf>,
    #[arg(long, help = format!("Base seed [default: {}]", EpisodeConfig::default().seed))]
    pub seed: Option<u64>,
    #[arg(long, help = format!("Episode length, s [default: {DEFAULT_HORIZON}]"))]
    pub horizon: Option<f64>,
    #[arg(long, help = format!("Simulation step, s [default: {DEFAULT_DT}]"))]
    pub dt: Option<f64>,
    #[arg(long, help = format!("Capture radius, m [default: {CAPTURE_RADIUS}]"))]
    pub capture_radius: Option<f64>,
    #[arg(long, help = format!("Pursuer top speed, m/s [default: {}]", ControlBounds::PURSUER.v_max))]
    pub pursuer_v_max: Option<f64>,
    #[arg(long, help = format!("Evader top speed, m/s [default: {}]", ControlBounds::EVADER.v_max))]
    pub evader_v_max: Option<f64>,
    #[arg(long, help = format!("Turn-rate limit of both agents, ±rad/s [default: {}]", ControlBounds::PURSUER.omega_max))]
    pub omega_max: Option<f64>,
}

impl EpisodeArgs {
    /// Loads `--config` (or defaults) and applies the flags on top.
    pub fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.value {
            cfg.value_file = Some(v.clone());
        }
        let e = &mut cfg.episode;
        if let Some(seed) = self.seed {
            e.seed = seed;
        }
        if let Some(h) = self.horizon {
            e.horizon = h;
        }
        if let Some(dt) = self.dt {
            e.dt = dt;
            e.filter = pursuit_core::perception::FilterParams {
                dt,
                b: pursuit_core::perception::FilterParams::with_dt(dt).b,
                ..e.filter.clone()
            };
        }
        if let Some(r) = self.capture_radius {
            e.capture_radius = r;
        }
        if let Some(v) = self.pursuer_v_max {
            e.pursuer_bounds.v_max = v;
        }
        if let Some(v) = self.evader_v_max {
            e.evader_bounds.v_max = v;
        }
        if let Some(w) = self.omega_max {
            for b in [&mut e.pursuer_bounds, &mut e.evader_bounds] {
                b.omega_min = -w;
                b.omega_max = w;
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Pursuer policy: reactive | lookahead | game | search-track [default: reactive].
    #[arg(long)]
    pub pursuer: Option<PursuerPolicySpec>,
    /// Evader policy: dubins | random | game | noisy-game | straight [default: random].
    #[arg(long)]
    pub evader: Option<EvaderPolicySpec>,
}

impl PolicyArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = &self.pursuer {
            cfg.pursuer = p.clone();
        }
        if let Some(e) = &self.evader {
            cfg.evader = e.clone();
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub episode: EpisodeArgs,
    #[command(flatten)]
    pub policies: PolicyArgs,
    /// Trajectory CSV; stdout when neither this nor the config names a file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub episode: EpisodeArgs,
    #[command(flatten)]
    pub policies: PolicyArgs,
    #[arg(long, help = format!("Number of episodes [default: {DEFAULT_EPISODES}]"))]
    pub n: Option<usize>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Per-episode table; `.json` for JSON, CSV otherwise.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON file; the summary is also printed to stdout.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossEvalArgs {
    #[command(flatten)]
    pub episode: EpisodeArgs,
    /// Comma-separated pursuer policies.
    #[arg(long, value_delimiter = ',', default_value = "reactive,lookahead,search-track")]
    pub pursuers: Vec<PursuerPolicySpec>,
    /// Comma-separated evader policies.
    #[arg(long, value_delimiter = ',', default_value = "dubins,random,straight")]
    pub evaders: Vec<EvaderPolicySpec>,
    #[arg(long, help = format!("Episodes per matchup [default: {DEFAULT_EPISODES}]"))]
    pub n: Option<usize>,
    /// Worker threads [default: all cores].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory receiving one `<pursuer>_vs_<evader>.csv` table per matchup.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub episode: EpisodeArgs,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, help = format!("TCP port [default: ${PORT_ENV} or {DEFAULT_PORT}]"))]
    pub port: Option<u16>,
    /// Maximum concurrent sessions.
    #[arg(long, default_value_t = DEFAULT_CAPACITY)]
    pub capacity: usize,
    /// Default tick period, ms.
    #[arg(long, default_value_t = DEFAULT_TICK_MS)]
    pub tick_ms: u64,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Value file to read.
    #[arg(long)]
    pub value: PathBuf,
    /// Relative heading of the slice, rad.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Time-to-go of the slice, s (nearest stored slice).
    #[arg(long, default_value_t = 0.0)]
    pub time: f64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
