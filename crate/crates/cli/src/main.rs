//! `pursuit` command-line tool. Usage errors exit 2, runtime errors exit 1.

mod args;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;

use pursuit_core::config::RunConfig;
use pursuit_core::dynamics::RelativeState;
use pursuit_core::episode::{run_episode, write_trajectory_csv};
use pursuit_core::harness::{cross_eval, eval_sweep, export, ExportFormat};
use pursuit_core::hji::{solve_hji, Grid3D, SolverOptions, ValueFunction};
use pursuit_core::ControlBounds;
use pursuit_session::server::{bind_and_serve, port_from_env};
use pursuit_session::{ManagerConfig, SessionManager};

use args::{Cli, Command, CrossEvalArgs, EvalArgs, InspectArgs, RunArgs, ServeArgs, SolveArgs};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::SolveGame(a) => solve_game(a),
        Command::Run(a) => run(a),
        Command::Eval(a) => eval(a),
        Command::CrossEval(a) => cross(a),
        Command::Serve(a) => serve(a),
        Command::InspectValue(a) => inspect(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_value(cfg: &RunConfig) -> Result<Option<Arc<ValueFunction>>> {
    let Some(path) = &cfg.value_file else {
        return Ok(None);
    };
    let v = ValueFunction::load(path)?;
    log::info!("loaded {} ({} slices, {:.1} s)", path.display(), v.slices(), v.horizon());
    Ok(Some(Arc::new(v)))
}

/// Writes to `path`, or to stdout when there is none.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().with_context(|| format!("writing {}", p.display()))?;
        }
        None => {
            let mut w = io::stdout().lock();
            f(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn solve_game(a: SolveArgs) -> Result<()> {
    let [nx, ny, nt] = a.grid[..] else {
        bail!("--grid takes exactly three counts");
    };
    let grid = Grid3D {
        nx,
        ny,
        n_theta: nt,
        ..Grid3D::square(a.extent, nx, nt)
    };
    let pursuer = ControlBounds {
        v_max: a.pursuer_v_max,
        omega_min: -a.omega_max,
        omega_max: a.omega_max,
        ..ControlBounds::PURSUER
    };
    let evader = ControlBounds {
        v_max: a.evader_v_max,
        omega_min: -a.omega_max,
        omega_max: a.omega_max,
        ..ControlBounds::EVADER
    };
    let opts = SolverOptions {
        slice_dt: a.slice_dt,
        capture_radius: a.capture_radius,
        ..SolverOptions::default()
    };
    let started = Instant::now();
    let v = solve_hji(&grid, &pursuer, &evader, a.horizon, &opts)?;
    v.save(&a.out)?;
    log::info!(
        "solved {nx}x{ny}x{nt} to {:.1} s in {:.1} s; wrote {} slices to {}",
        v.horizon(),
        started.elapsed().as_secs_f64(),
        v.slices(),
        a.out.display()
    );
    Ok(())
}

fn run(a: RunArgs) -> Result<()> {
    let mut cfg = a.episode.resolve()?;
    a.policies.apply(&mut cfg);
    cfg.validate()?;
    let value = load_value(&cfg)?;
    let result = run_episode(&cfg.pursuer, &cfg.evader, &cfg.episode, value.as_ref())?;
    let out = a.out.as_deref().or(cfg.output.trajectory.as_deref());
    with_output(out, |w| Ok(write_trajectory_csv(&result.trajectory, w)?))?;
    eprintln!("{}", serde_json::to_string(&result.summary())?);
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let mut cfg = a.episode.resolve()?;
    a.policies.apply(&mut cfg);
    if let Some(n) = a.n {
        cfg.sweep.episodes = n;
    }
    if a.workers.is_some() {
        cfg.sweep.workers = a.workers;
    }
    cfg.validate()?;
    let value = load_value(&cfg)?;
    let table = eval_sweep(
        &cfg.pursuer,
        &cfg.evader,
        &cfg.episode,
        cfg.sweep.episodes,
        value.as_ref(),
        cfg.sweep.workers,
    )?;
    if let Some(path) = a.out.as_deref().or(cfg.output.table.as_deref()) {
        export(&table, path, ExportFormat::from_path(path))?;
    }
    let summary = serde_json::to_string_pretty(&table.summary())?;
    if let Some(path) = a.summary.as_deref().or(cfg.output.summary.as_deref()) {
        std::fs::write(path, &summary).with_context(|| format!("writing {}", path.display()))?;
    }
    println!("{summary}");
    Ok(())
}

fn cross(a: CrossEvalArgs) -> Result<()> {
    let mut cfg = a.episode.resolve()?;
    if let Some(n) = a.n {
        cfg.sweep.episodes = n;
    }
    if a.workers.is_some() {
        cfg.sweep.workers = a.workers;
    }
    cfg.validate()?;
    if (a.pursuers.iter().any(|p| p.needs_value()) || a.evaders.iter().any(|e| e.needs_value()))
        && cfg.value_file.is_none()
    {
        bail!("game policies need --value");
    }
    let value = load_value(&cfg)?;
    let matrix = cross_eval(
        &a.pursuers,
        &a.evaders,
        &cfg.episode,
        cfg.sweep.episodes,
        value.as_ref(),
        cfg.sweep.workers,
    )?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for table in matrix.iter().flatten() {
            let path = dir.join(format!("{}_vs_{}.csv", table.pursuer, table.evader));
            export(table, &path, ExportFormat::Csv)?;
        }
    }
    let summaries: Vec<Vec<_>> = matrix.iter().map(|row| row.iter().map(|t| t.summary()).collect()).collect();
    println!("{}", serde_json::to_string_pretty(&summaries)?);
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let cfg = a.episode.resolve()?;
    cfg.episode.validate()?;
    let value = load_value(&cfg)?;
    let port = a.port.unwrap_or_else(port_from_env);
    let addr: SocketAddr = format!("{}:{port}", a.host)
        .parse()
        .with_context(|| format!("bad listen address {}:{port}", a.host))?;
    let manager = SessionManager::new(ManagerConfig {
        capacity: a.capacity,
        default_tick_ms: a.tick_ms,
        episode: cfg.episode,
        value,
    });
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(bind_and_serve(addr, manager))?;
    Ok(())
}

fn inspect(a: InspectArgs) -> Result<()> {
    let v = ValueFunction::load(&a.value)?;
    let g = v.grid().clone();
    let k = v.slice_index(a.time);
    log::info!("slice {k} (time-to-go {:.2} s), theta {:.3}", k as f64 * v.slice_dt(), a.theta);
    with_output(a.out.as_deref(), |w| {
        writeln!(w, "x,y,value")?;
        for ix in 0..g.nx {
            for iy in 0..g.ny {
                let x = RelativeState::new(g.x(ix), g.y(iy), a.theta);
                writeln!(w, "{},{},{}", x.px_rel, x.py_rel, v.value(&x, a.time)?)?;
            }
        }
        Ok(())
    })
}
