//! Seeded evaluation sweeps, cross-evaluation and table export.
//!
//! Episode `i` of a sweep runs with seed `seed_base + i`, so any row can be
//! reproduced with a standalone [`run_episode`]. Episodes run on a rayon pool
//! and are collected in index order, which makes the output independent of
//! the worker count.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::episode::{run_episode, EpisodeConfig};
use crate::error::{Error, Result};
use crate::evader::EvaderPolicySpec;
use crate::hji::ValueFunction;
use crate::pursuer::PursuerPolicySpec;

pub const DEFAULT_EPISODES: usize = 500;
pub const TABLE_HEADER: [&str; 7] = ["seed", "px0", "py0", "th0", "captured", "t_capture", "t_norm"];

/// Per-episode outcome; `t_capture` and `t_norm = t_capture / T` are empty when
/// the evader survived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    pub px0: f64,
    pub py0: f64,
    pub th0: f64,
    pub captured: bool,
    pub t_capture: Option<f64>,
    pub t_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalTable {
    pub pursuer: String,
    pub evader: String,
    pub horizon: f64,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub pursuer: String,
    pub evader: String,
    pub n_episodes: usize,
    pub horizon: f64,
    pub capture_frequency: f64,
    /// Over captured episodes only; absent when nothing was captured.
    pub median_t_capture: Option<f64>,
    pub mean_t_capture: Option<f64>,
    /// Median with survivals counted as the full horizon.
    pub censored_median_t_capture: f64,
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] } else { 0.5 * (xs[n / 2 - 1] + xs[n / 2]) })
}

impl EvalTable {
    fn capture_times(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.t_capture).collect()
    }

    pub fn capture_frequency(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.captured).count() as f64 / self.rows.len() as f64
    }

    pub fn median_t_capture(&self) -> Option<f64> {
        median(self.capture_times())
    }

    pub fn mean_t_capture(&self) -> Option<f64> {
        let t = self.capture_times();
        (!t.is_empty()).then(|| t.iter().sum::<f64>() / t.len() as f64)
    }

    pub fn censored_median_t_capture(&self) -> f64 {
        median(self.rows.iter().map(|r| r.t_capture.unwrap_or(self.horizon)).collect()).unwrap_or(self.horizon)
    }

    pub fn summary(&self) -> EvalSummary {
        EvalSummary {
            pursuer: self.pursuer.clone(),
            evader: self.evader.clone(),
            n_episodes: self.rows.len(),
            horizon: self.horizon,
            capture_frequency: self.capture_frequency(),
            median_t_capture: self.median_t_capture(),
            mean_t_capture: self.mean_t_capture(),
            censored_median_t_capture: self.censored_median_t_capture(),
        }
    }
}

fn sweep_row(pp: &PursuerPolicySpec, ep: &EvaderPolicySpec, cfg: &EpisodeConfig, seed: u64, value: Option<&Arc<ValueFunction>>) -> Result<SweepRow> {
    let r = run_episode(pp, ep, &cfg.clone().with_seed(seed), value)?;
    Ok(SweepRow {
        seed,
        px0: r.initial_relative.px_rel,
        py0: r.initial_relative.py_rel,
        th0: r.initial_relative.theta_rel,
        captured: r.captured,
        t_capture: r.time_to_capture,
        t_norm: r.time_to_capture.map(|t| t / cfg.horizon),
    })
}

/// Runs `n` episodes with seeds `cfg.seed + i`. `workers = None` uses the
/// global rayon pool.
pub fn eval_sweep(
    pp: &PursuerPolicySpec,
    ep: &EvaderPolicySpec,
    cfg: &EpisodeConfig,
    n: usize,
    value: Option<&Arc<ValueFunction>>,
    workers: Option<usize>,
) -> Result<EvalTable> {
    if n == 0 {
        return Err(Error::ConfigInvalid("a sweep needs at least one episode".into()));
    }
    cfg.validate()?;
    let run = || -> Result<Vec<SweepRow>> {
        (0..n as u64)
            .into_par_iter()
            .map(|i| sweep_row(pp, ep, cfg, cfg.seed.wrapping_add(i), value))
            .collect()
    };
    let rows = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::ConfigInvalid(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(EvalTable {
        pursuer: pp.name().to_string(),
        evader: ep.name().to_string(),
        horizon: cfg.horizon,
        rows,
    })
}

/// One table per (pursuer, evader) pair, rows indexed by pursuer.
pub fn cross_eval(
    pursuers: &[PursuerPolicySpec],
    evaders: &[EvaderPolicySpec],
    cfg: &EpisodeConfig,
    n: usize,
    value: Option<&Arc<ValueFunction>>,
    workers: Option<usize>,
) -> Result<Vec<Vec<EvalTable>>> {
    pursuers
        .iter()
        .map(|pp| evaders.iter().map(|ep| eval_sweep(pp, ep, cfg, n, value, workers)).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::ConfigInvalid(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

impl ExportFormat {
    /// Guesses the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ExportFormat::Json,
            _ => ExportFormat::Csv,
        }
    }
}

/// The JSON export: summary statistics plus every row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonExport {
    #[serde(flatten)]
    pub summary: EvalSummary,
    pub rows: Vec<SweepRow>,
}

pub fn write_rows_csv<W: std::io::Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TABLE_HEADER)?;
    let opt = |v: Option<f64>| v.map(|t| t.to_string()).unwrap_or_default();
    for r in rows {
        out.write_record([
            r.seed.to_string(),
            r.px0.to_string(),
            r.py0.to_string(),
            r.th0.to_string(),
            u8::from(r.captured).to_string(),
            opt(r.t_capture),
            opt(r.t_norm),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<table>", e))?;
    Ok(())
}

pub fn read_rows_csv<R: std::io::Read>(r: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != TABLE_HEADER {
        return Err(Error::ConfigInvalid(format!("unexpected table header {header:?}")));
    }
    let bad = |what: &str, v: &str| Error::ConfigInvalid(format!("bad {what} `{v}` in table"));
    let num = |v: &str, what: &str| v.parse::<f64>().map_err(|_| bad(what, v));
    let opt = |v: &str, what: &str| if v.is_empty() { Ok(None) } else { num(v, what).map(Some) };
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(SweepRow {
                seed: rec[0].parse().map_err(|_| bad("seed", &rec[0]))?,
                px0: num(&rec[1], "px0")?,
                py0: num(&rec[2], "py0")?,
                th0: num(&rec[3], "th0")?,
                captured: match &rec[4] {
                    "1" => true,
                    "0" => false,
                    v => return Err(bad("captured", v)),
                },
                t_capture: opt(&rec[5], "t_capture")?,
                t_norm: opt(&rec[6], "t_norm")?,
            })
        })
        .collect()
}

/// Writes the table to `path`.
pub fn export(table: &EvalTable, path: impl AsRef<Path>, format: ExportFormat) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let w = std::io::BufWriter::new(file);
    match format {
        ExportFormat::Csv => write_rows_csv(&table.rows, w),
        ExportFormat::Json => {
            let doc = JsonExport {
                summary: table.summary(),
                rows: table.rows.clone(),
            };
            serde_json::to_writer_pretty(w, &doc)?;
            Ok(())
        }
    }
}

/// Reads back an exported table. CSV carries only the rows, so the policy
/// names are empty and the horizon must be supplied.
pub fn read_table(path: impl AsRef<Path>, format: ExportFormat, horizon: f64) -> Result<EvalTable> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let r = std::io::BufReader::new(file);
    match format {
        ExportFormat::Csv => Ok(EvalTable {
            pursuer: String::new(),
            evader: String::new(),
            horizon,
            rows: read_rows_csv(r)?,
        }),
        ExportFormat::Json => {
            let doc: JsonExport = serde_json::from_reader(r)?;
            Ok(EvalTable {
                pursuer: doc.summary.pursuer,
                evader: doc.summary.evader,
                horizon: doc.summary.horizon,
                rows: doc.rows,
            })
        }
    }
}
