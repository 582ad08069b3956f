//! Command dispatch and CSV output.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use llg_core::experiments::{precession_summary, SummaryRow};
use llg_core::field::{energy_surface, AnisotropyKind, AnisotropyModel, SurfaceSample};
use llg_core::{
    analytic_period, run_precession_study, run_stepsize_study, run_trajectory, ExperimentSpec, Horizon, Steps,
    Trajectory,
};

use crate::config::{serialize_config, Command, RunConfig};
use crate::error::{CliError, Result};

/// Environment variable consulted when no output directory is given.
pub const OUTPUT_ENV: &str = "LLG_OUT";

pub const DEFAULT_OUTPUT_DIR: &str = "llg-out";

pub const TRAJECTORY_HEADER: &str = "t,m1,m2,m3,norm,phi,iterations";
pub const SUMMARY_HEADER: &str = "scheme,k,alpha,dt,final_norm,final_phi,deviation,total_iterations";
pub const SURFACE_HEADER: &str = "theta,phi,energy";

/// Files produced by [`run`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutcome {
    pub trajectories: Vec<PathBuf>,
    pub summary: Option<PathBuf>,
    pub surface: Option<PathBuf>,
    pub provenance: PathBuf,
}

/// `--out`, then the config's `[output] dir`, then `$LLG_OUT`, then
/// [`DEFAULT_OUTPUT_DIR`].
pub fn resolve_output_dir(cli: Option<&Path>, cfg: &RunConfig) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

/// Full-precision float: 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// SHA-256 prefix of the serialized config, excluding the output location.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut normalized = cfg.clone();
    normalized.output_dir = None;
    let digest = Sha256::digest(serialize_config(&normalized).as_bytes());
    hex::encode(digest)[..16].to_string()
}

/// Version, config hash and the physical parameters in effect.
pub fn print_version_and_provenance(cfg: &RunConfig) -> String {
    let m = &cfg.material;
    let f = &cfg.field;
    let i = &cfg.integrator;
    let mut out = String::new();
    let _ = writeln!(out, "llg {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "config_hash={}", config_hash(cfg));
    if let Some(command) = cfg.command {
        let _ = writeln!(out, "command={command}");
    }
    let _ = writeln!(
        out,
        "material: K1={:e} K2={:e} K1_iso={:e} K1_ti={:e} Ms={:e} mu0={:e} gamma={:e} Aexc={:e} alpha={:e}",
        m.k1_cub, m.k2_cub, m.k1_iso, m.k1_ti, m.ms, m.mu0, m.gamma, m.a_exc, m.alpha
    );
    let _ = writeln!(
        out,
        "field: H_ext={:e},{:e},{:e} anisotropy={} scaling={}",
        f.h_ext[0],
        f.h_ext[1],
        f.h_ext[2],
        f.anisotropy.kind(),
        f.scaling
    );
    let _ = writeln!(
        out,
        "integrator: scheme={} xi={:e} tol={:e} max_iter={} eps_angle={:e}",
        i.scheme, i.xi, i.tol, i.max_iter, i.eps_angle
    );
    let e = &cfg.experiment;
    let _ = writeln!(out, "experiment: k={} steps_per_period={}", e.k, e.steps_per_period);
    out
}

fn base_spec(cfg: &RunConfig, horizon: Horizon, steps: Steps) -> ExperimentSpec {
    ExperimentSpec {
        m0: cfg.experiment.m0,
        field: cfg.field,
        material: cfg.material,
        integrator: cfg.integrator,
        horizon,
        steps,
    }
}

pub fn trajectory_file_name(traj: &Trajectory) -> String {
    format!("traj_{}_k{}_a{}.csv", traj.scheme, traj.k, traj.alpha)
}

pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> std::io::Result<()> {
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for s in &traj.samples {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            num(s.t),
            num(s.m[0]),
            num(s.m[1]),
            num(s.m[2]),
            num(s.norm),
            num(s.phi),
            s.iterations
        )?;
    }
    w.flush()
}

pub fn write_summary_csv<W: Write>(mut w: W, rows: &[SummaryRow]) -> std::io::Result<()> {
    writeln!(w, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.scheme,
            r.k,
            num(r.alpha),
            num(r.dt),
            num(r.final_norm),
            num(r.final_phi),
            r.deviation.map(num).unwrap_or_default(),
            r.total_iterations
        )?;
    }
    w.flush()
}

pub fn write_surface_csv<W: Write>(mut w: W, samples: &[SurfaceSample]) -> std::io::Result<()> {
    writeln!(w, "{SURFACE_HEADER}")?;
    for s in samples {
        writeln!(w, "{},{},{}", num(s.theta), num(s.phi), num(s.energy))?;
    }
    w.flush()
}

fn write_file<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(BufWriter<File>) -> std::io::Result<()>,
{
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    body(BufWriter::new(file)).map_err(|e| CliError::io(path, e))
}

fn write_trajectories(dir: &Path, trajectories: &[&Trajectory]) -> Result<Vec<PathBuf>> {
    trajectories
        .iter()
        .map(|traj| {
            let path = dir.join(trajectory_file_name(traj));
            write_file(&path, |w| write_trajectory_csv(w, traj))?;
            Ok(path)
        })
        .collect()
}

/// Executes `command` and writes its results into `out_dir`.
pub fn run(command: Command, cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut outcome = RunOutcome {
        provenance: out_dir.join("provenance.txt"),
        ..Default::default()
    };
    let mut stamped = cfg.clone();
    stamped.command = Some(command);
    let provenance = print_version_and_provenance(&stamped);
    write_file(&outcome.provenance, |mut w| w.write_all(provenance.as_bytes()))?;

    let e = &cfg.experiment;
    let summary_path = out_dir.join("summary.csv");
    match command {
        Command::Precession => {
            let horizon = match (e.t_end, e.periods) {
                (Some(t), _) => Horizon::Time(t),
                (None, Some(n)) => Horizon::Periods(n),
                (None, None) => Horizon::Relaxation,
            };
            let base = base_spec(cfg, horizon, Steps::PerPeriod(e.steps_per_period));
            let trajectories = run_precession_study(&e.alphas, &base)?;
            let rows = precession_summary(&trajectories, &cfg.field)?;
            outcome.trajectories = write_trajectories(out_dir, &trajectories.iter().collect::<Vec<_>>())?;
            write_file(&summary_path, |w| write_summary_csv(w, &rows))?;
            outcome.summary = Some(summary_path);
        }
        Command::Stepsize => {
            let horizon = match e.t_end {
                Some(t) => Horizon::Time(t),
                None => Horizon::Periods(e.periods.unwrap_or(1.0)),
            };
            let base = base_spec(cfg, horizon, Steps::Count(1));
            let study = run_stepsize_study(&e.ks, &e.schemes, &base)?;
            let rows = study.summary()?;
            outcome.trajectories = write_trajectories(out_dir, &study.trajectories().collect::<Vec<_>>())?;
            write_file(&summary_path, |w| write_summary_csv(w, &rows))?;
            outcome.summary = Some(summary_path);
        }
        Command::SingleStep => {
            let dt = match e.dt {
                Some(dt) => dt,
                None => analytic_period(&cfg.material, cfg.field.h_ext)? / e.k as f64,
            };
            let traj = run_trajectory(&base_spec(cfg, Horizon::Time(dt), Steps::Count(1)))?;
            let rows = [SummaryRow::new(&traj, None)];
            outcome.trajectories = write_trajectories(out_dir, &[&traj])?;
            write_file(&summary_path, |w| write_summary_csv(w, &rows))?;
            outcome.summary = Some(summary_path);
        }
        Command::EnergySurface => {
            // Without a configured anisotropy the cubic surface is tabulated.
            let model = match cfg.field.anisotropy.kind() {
                AnisotropyKind::None => AnisotropyModel::canonical(AnisotropyKind::Cub),
                _ => cfg.field.anisotropy,
            };
            let samples = energy_surface(&model, &cfg.material, e.n_polar, e.n_azimuth)?;
            let path = out_dir.join("surface.csv");
            write_file(&path, |w| write_surface_csv(w, &samples))?;
            outcome.surface = Some(path);
        }
    }
    Ok(outcome)
}
