//! CSV and manifest emission.
//!
//! Floats are written in their shortest round-trip form (exponent notation
//! below 1e-4 and from 1e15), so equal values always produce equal bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::cavity::RateGrid;
use crate::estimators::Rule;
use crate::harness::experiment::{ConvergenceRow, EnsembleReport, EstimateReport, TrajectoryPaths};
use crate::harness::{ExperimentConfig, HarnessError};
use crate::state::QubitState;
use crate::trajectory::Trajectory;

pub const FIELDS_CSV: &str = "fields.csv";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const METRICS_CSV: &str = "metrics.csv";
pub const CONVERGENCE_CSV: &str = "convergence.csv";
pub const ENSEMBLE_CSV: &str = "ensemble.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

/// Run metadata written next to the CSV files.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub trajectories: usize,
    /// How per-trajectory noise streams derive from the master seed.
    pub seed_derivation: String,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
    pub summary: serde_json::Value,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig, wall_time: Duration) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            master_seed: config.seed,
            trajectories: config.trajectories,
            seed_derivation: "ChaCha8Rng::seed_from_u64(master_seed), stream = trajectory index"
                .into(),
            wall_time_seconds: wall_time.as_secs_f64(),
            outputs: Vec::new(),
            summary: serde_json::Value::Null,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn state_cells(s: &QubitState) -> [String; 3] {
    [num(s.rho11), num(s.rho12.re), num(s.rho12.im)]
}

fn write_csv(
    path: &Path,
    header: &[String],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

fn prepare(out: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out).map_err(io_err(out))
}

fn write_manifest(out: &Path, manifest: &Manifest) -> Result<PathBuf, HarnessError> {
    let path = out.join(MANIFEST_JSON);
    let file = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, manifest).map_err(|e| HarnessError::Io {
        path: path.clone(),
        source: e.into(),
    })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    Ok(path)
}

fn finish(
    out: &Path,
    mut manifest: Manifest,
    written: Vec<PathBuf>,
) -> Result<Vec<PathBuf>, HarnessError> {
    manifest.outputs = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    let mut written = written;
    written.push(write_manifest(out, &manifest)?);
    Ok(written)
}

/// Header of `trajectory.csv` for the given rules.
pub fn trajectory_header(rules: &[Rule]) -> Vec<String> {
    let mut h: Vec<String> = [
        "t",
        "I",
        "I_coarse",
        "rho11_qte",
        "re_rho12_qte",
        "im_rho12_qte",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for r in rules {
        h.push(format!("rho11_{r}"));
        h.push(format!("re_rho12_{r}"));
        h.push(format!("im_rho12_{r}"));
    }
    h
}

/// Header of `convergence.csv`. All three rules always appear; cells of
/// disabled rules are left empty.
pub fn convergence_header() -> Vec<String> {
    let mut h = vec!["dt".to_string()];
    for r in Rule::ALL {
        h.push(format!("err_{r}_rho11"));
        h.push(format!("err_{r}_rho12"));
    }
    h
}

/// One row per grid time `t_k`. The current of bin `k` covers
/// `[t_k, t_k + dt)`, so the final row has no current.
fn write_trajectory_csv(path: &Path, dt: f64, paths: &TrajectoryPaths) -> Result<(), HarnessError> {
    let rules: Vec<Rule> = paths.rules.iter().map(|(r, _)| *r).collect();
    let rows = paths.qte.iter().enumerate().map(|(k, qte)| {
        let mut row = Vec::with_capacity(6 + 3 * rules.len());
        row.push(num(k as f64 * dt));
        match (paths.currents.get(k), paths.coarse.get(k)) {
            (Some(&i), Some(&c)) => {
                row.push(num(i));
                row.push(num(c));
            }
            _ => {
                row.push(String::new());
                row.push(String::new());
            }
        }
        row.extend(state_cells(qte));
        for (_, path) in &paths.rules {
            row.extend(state_cells(&path[k]));
        }
        row
    });
    write_csv(path, &trajectory_header(&rules), rows)
}

/// `fields.csv`: fields and rates at each interval midpoint.
pub fn emit_fields(
    config: &ExperimentConfig,
    grid: &RateGrid,
    wall_time: Duration,
) -> Result<Vec<PathBuf>, HarnessError> {
    prepare(&config.out)?;
    let path = config.out.join(FIELDS_CSV);
    let header: Vec<String> = [
        "t",
        "re_alpha1",
        "im_alpha1",
        "re_alpha2",
        "im_alpha2",
        "gamma_ci",
        "gamma_ba",
        "gamma_d",
        "gamma_m",
        "b_shift",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = grid.fields.iter().zip(&grid.samples).map(|(f, r)| {
        vec![
            num(f.t),
            num(f.alpha1.re),
            num(f.alpha1.im),
            num(f.alpha2.re),
            num(f.alpha2.im),
            num(r.gamma_ci),
            num(r.gamma_ba),
            num(r.gamma_d),
            num(r.gamma_m),
            num(r.b_shift),
        ]
    });
    write_csv(&path, &header, rows)?;
    finish(
        &config.out,
        Manifest::new("fields", config, wall_time),
        vec![path],
    )
}

/// `trajectory.csv` for a single trajectory-equation run, without rule
/// columns.
pub fn emit_simulate(
    config: &ExperimentConfig,
    traj: &Trajectory,
    wall_time: Duration,
) -> Result<Vec<PathBuf>, HarnessError> {
    prepare(&config.out)?;
    let record = traj
        .record
        .as_ref()
        .ok_or_else(|| HarnessError::Config("trajectory has no record".into()))?;
    let paths = TrajectoryPaths {
        currents: record.currents.clone(),
        coarse: record.coarse_grained(config.coarse_window),
        qte: traj.states.clone(),
        rules: Vec::new(),
    };
    let path = config.out.join(TRAJECTORY_CSV);
    write_trajectory_csv(&path, traj.dt, &paths)?;
    let mut manifest = Manifest::new("simulate", config, wall_time);
    manifest.summary = serde_json::json!({ "endpoint": traj.endpoint() });
    finish(&config.out, manifest, vec![path])
}

/// `trajectory.csv` for the first trajectory (further retained paths go to
/// `trajectory_<index>.csv`) and `metrics.csv` with one row per trajectory
/// and rule.
pub fn emit_compare(
    report: &EstimateReport,
    wall_time: Duration,
) -> Result<Vec<PathBuf>, HarnessError> {
    let config = &report.config;
    prepare(&config.out)?;
    let mut written = Vec::new();
    for tr in &report.trajectories {
        if let Some(paths) = &tr.paths {
            let name = if tr.index == 0 {
                TRAJECTORY_CSV.to_string()
            } else {
                format!("trajectory_{}.csv", tr.index)
            };
            let path = config.out.join(name);
            write_trajectory_csv(&path, config.dt, paths)?;
            written.push(path);
        }
    }

    let path = config.out.join(METRICS_CSV);
    let header: Vec<String> = [
        "trajectory",
        "stream",
        "rule",
        "max_rho11",
        "max_re_rho12",
        "max_im_rho12",
        "end_rho11",
        "end_re_rho12",
        "end_im_rho12",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let rows = report.trajectories.iter().flat_map(|tr| {
        tr.metrics.iter().map(move |m| {
            let mut row = vec![
                tr.index.to_string(),
                tr.seed.stream.to_string(),
                m.rule.to_string(),
            ];
            row.extend(m.max_abs.iter().map(|&v| num(v)));
            row.extend(m.endpoint_abs.iter().map(|&v| num(v)));
            row
        })
    });
    write_csv(&path, &header, rows)?;
    written.push(path);

    let mut manifest = Manifest::new("compare", config, wall_time);
    let mut summary = serde_json::Map::new();
    for rule in config.ordered_rules() {
        summary.insert(
            format!("worst_max_error_{rule}"),
            serde_json::json!(report.worst_max_error(rule)),
        );
    }
    for (better, worse) in [(Rule::Exact, Rule::Gaussian), (Rule::Exact, Rule::Korotkov)] {
        if let Some(f) = report.endpoint_ordering(better, worse) {
            summary.insert(
                format!("fraction_{worse}_worse_than_{better}"),
                serde_json::json!(f),
            );
        }
    }
    manifest.summary = serde_json::Value::Object(summary);
    finish(&config.out, manifest, written)
}

/// `convergence.csv`: one row per step size, coarsest first.
pub fn emit_convergence(
    config: &ExperimentConfig,
    rows: &[ConvergenceRow],
    wall_time: Duration,
) -> Result<Vec<PathBuf>, HarnessError> {
    prepare(&config.out)?;
    let path = config.out.join(CONVERGENCE_CSV);
    let body = rows.iter().map(|row| {
        let mut cells = vec![num(row.dt)];
        for rule in Rule::ALL {
            match row.error(rule) {
                Some([e11, e12]) => {
                    cells.push(num(e11));
                    cells.push(num(e12));
                }
                None => {
                    cells.push(String::new());
                    cells.push(String::new());
                }
            }
        }
        cells
    });
    write_csv(&path, &convergence_header(), body)?;
    let mut manifest = Manifest::new("convergence", config, wall_time);
    manifest.summary = serde_json::to_value(rows).unwrap_or_default();
    finish(&config.out, manifest, vec![path])
}

/// `ensemble.csv`: ensemble mean, standard error, reference and z-score of
/// each component at every grid time.
pub fn emit_ensemble(
    config: &ExperimentConfig,
    report: &EnsembleReport,
    wall_time: Duration,
) -> Result<Vec<PathBuf>, HarnessError> {
    prepare(&config.out)?;
    let path = config.out.join(ENSEMBLE_CSV);
    let mut header = vec!["t".to_string()];
    for prefix in ["mean", "se", "ref", "z"] {
        for c in ["rho11", "re_rho12", "im_rho12"] {
            header.push(format!("{prefix}_{c}"));
        }
    }
    let rows = report.points.iter().map(|p| {
        let mut row = vec![num(p.t)];
        for values in [&p.mean, &p.standard_error, &p.reference, &p.z] {
            row.extend(values.iter().map(|&v| num(v)));
        }
        row
    });
    write_csv(&path, &header, rows)?;
    let mut manifest = Manifest::new("ensemble", config, wall_time);
    manifest.summary = serde_json::json!({
        "trajectories": report.trajectories,
        "max_z_rho11": report.max_z_rho11,
        "max_z_rho12": report.max_z_rho12,
        "threshold": report.threshold,
        "pass": report.pass,
    });
    finish(&config.out, manifest, vec![path])
}
