//! Run configuration in a flat, sectioned `key = value` format.
//!
//! ```text
//! # comment
//! [material]
//! K1 = 2e4
//! [field]
//! H_ext = 0, 0, 1e6
//! anisotropy = cub
//! [integrator]
//! scheme = exp_update
//! [experiment]
//! ks = 100, 20, 10
//! [output]
//! dir = out
//! ```
//!
//! Sections are `material`, `field`, `integrator`, `experiment` and
//! `output`; nesting is not supported. Omitted keys take their defaults, the
//! material defaults being the Fe81.3Ga18.7 constants.

use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use llg_core::experiments::{PRECESSION_ALPHAS, STEPSIZE_KS};
use llg_core::field::{AnisotropyKind, AnisotropyModel, AnisotropyScaling, GAMMA0_FEGA};
use llg_core::{FieldConfig, IntegratorConfig, MaterialParams, Scheme, Vec3};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Precession,
    Stepsize,
    EnergySurface,
    SingleStep,
}

impl Command {
    pub const ALL: [Command; 4] = [
        Command::Precession,
        Command::Stepsize,
        Command::EnergySurface,
        Command::SingleStep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Precession => "precession",
            Command::Stepsize => "stepsize",
            Command::EnergySurface => "energy-surface",
            Command::SingleStep => "single-step",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command {s:?}"))
    }
}

/// Parameters of the experiment drivers.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentParams {
    pub m0: Vec3,
    /// Damping values of the precession study.
    pub alphas: Vec<f64>,
    /// Step counts of the step-size study.
    pub ks: Vec<usize>,
    /// Schemes of the step-size study.
    pub schemes: Vec<Scheme>,
    /// Horizon in analytic periods; `None` means one period for the
    /// step-size study and the relaxation horizon for the precession study.
    pub periods: Option<f64>,
    /// Explicit horizon in seconds, overriding `periods`.
    pub t_end: Option<f64>,
    pub steps_per_period: usize,
    /// Step size of `single-step`; defaults to `period / k`.
    pub dt: Option<f64>,
    pub k: usize,
    pub n_polar: usize,
    pub n_azimuth: usize,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            m0: Vec3::E1,
            alphas: PRECESSION_ALPHAS.to_vec(),
            ks: STEPSIZE_KS.to_vec(),
            schemes: vec![
                Scheme::ExpUpdate,
                Scheme::BackwardEuler,
                Scheme::RenormBackwardEuler,
                Scheme::MidpointPaper,
            ],
            periods: None,
            t_end: None,
            steps_per_period: 100,
            dt: None,
            k: 100,
            n_polar: 37,
            n_azimuth: 72,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Command named in the document; the command line takes precedence.
    pub command: Option<Command>,
    pub material: MaterialParams,
    pub field: FieldConfig,
    pub integrator: IntegratorConfig,
    pub experiment: ExperimentParams,
    pub output_dir: Option<PathBuf>,
    /// Reserved; always 0.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            material: MaterialParams::fe_ga(),
            field: FieldConfig::applied(Vec3::new(0.0, 0.0, 1e6)),
            integrator: IntegratorConfig::default(),
            experiment: ExperimentParams::default(),
            output_dir: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Material,
    Field,
    Integrator,
    Experiment,
    Output,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "material" => Section::Material,
            "field" => Section::Field,
            "integrator" => Section::Integrator,
            "experiment" => Section::Experiment,
            "output" => Section::Output,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Section::Material => "material",
            Section::Field => "field",
            Section::Integrator => "integrator",
            Section::Experiment => "experiment",
            Section::Output => "output",
        }
    }
}

/// Drops a `#` or `;` comment that follows whitespace.
fn strip_inline_comment(line: &str) -> &str {
    let cut = line
        .char_indices()
        .zip(line.chars().skip(1))
        .find(|((_, c), next)| c.is_whitespace() && (*next == '#' || *next == ';'))
        .map(|((i, _), _)| i);
    cut.map_or(line, |i| &line[..i])
}

fn unquote(value: &str) -> &str {
    value
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(value)
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| CliError::Parse {
        line,
        message: format!("cannot parse {key} = {value:?}"),
    })
}

fn parse_list<T: FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| parse_value(line, key, item.trim()))
        .collect()
}

fn parse_vec3(line: usize, key: &str, value: &str) -> Result<Vec3> {
    let items: Vec<f64> = parse_list(line, key, value)?;
    let arr: [f64; 3] = items.try_into().map_err(|_| CliError::Parse {
        line,
        message: format!("{key} needs three comma-separated components"),
    })?;
    Ok(Vec3(arr))
}

fn parse_enum<T: FromStr<Err = llg_core::Error>>(line: usize, value: &str) -> Result<T> {
    value.parse().map_err(|e: llg_core::Error| CliError::Parse {
        line,
        message: e.to_string(),
    })
}

#[derive(Default)]
struct FieldDraft {
    kind: AnisotropyKind,
    axes: Option<[Option<Vec3>; 3]>,
    gamma0: Option<f64>,
    gamma: Option<f64>,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut draft = FieldDraft::default();
    let mut section: Option<Section> = None;

    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = strip_inline_comment(raw).trim();
        if content.is_empty() || content.starts_with('#') || content.starts_with(';') {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| CliError::Parse {
                line,
                message: format!("malformed section header {content:?}"),
            })?;
            section = Some(Section::parse(name.trim()).ok_or_else(|| CliError::Parse {
                line,
                message: format!("unknown section [{}]", name.trim()),
            })?);
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| CliError::Parse {
            line,
            message: format!("expected key = value, found {content:?}"),
        })?;
        let (key, value) = (key.trim(), unquote(value.trim()));
        let section = section.ok_or_else(|| CliError::Parse {
            line,
            message: format!("key {key:?} appears before any section header"),
        })?;
        apply(&mut cfg, &mut draft, section, line, key, value)?;
    }

    cfg.material.gamma = match (draft.gamma, draft.gamma0) {
        (Some(gamma), _) => gamma,
        (None, Some(gamma0)) => cfg.material.mu0 * gamma0,
        (None, None) => cfg.material.mu0 * GAMMA0_FEGA,
    };
    let axes = draft
        .axes
        .map(|a| [a[0].unwrap_or(Vec3::E1), a[1].unwrap_or(Vec3::E2), a[2].unwrap_or(Vec3::E3)])
        .unwrap_or([Vec3::E1, Vec3::E2, Vec3::E3]);
    cfg.field.anisotropy = AnisotropyModel::new(draft.kind, axes)
        .map_err(|e| CliError::invalid("field.axis", e.to_string()))?;

    validate(&cfg)?;
    Ok(cfg)
}

fn apply(
    cfg: &mut RunConfig,
    draft: &mut FieldDraft,
    section: Section,
    line: usize,
    key: &str,
    value: &str,
) -> Result<()> {
    let m = &mut cfg.material;
    let e = &mut cfg.experiment;
    let i = &mut cfg.integrator;
    match (section, key) {
        (Section::Material, "K1") => m.k1_cub = parse_value(line, key, value)?,
        (Section::Material, "K2") => m.k2_cub = parse_value(line, key, value)?,
        (Section::Material, "K1_iso") => m.k1_iso = parse_value(line, key, value)?,
        (Section::Material, "K1_ti") => m.k1_ti = parse_value(line, key, value)?,
        (Section::Material, "Ms") => m.ms = parse_value(line, key, value)?,
        (Section::Material, "mu0") => m.mu0 = parse_value(line, key, value)?,
        (Section::Material, "gamma0") => draft.gamma0 = Some(parse_value(line, key, value)?),
        (Section::Material, "gamma") => draft.gamma = Some(parse_value(line, key, value)?),
        (Section::Material, "Aexc") => m.a_exc = parse_value(line, key, value)?,
        (Section::Material, "alpha") => m.alpha = parse_value(line, key, value)?,

        (Section::Field, "H_ext") => cfg.field.h_ext = parse_vec3(line, key, value)?,
        (Section::Field, "anisotropy") => draft.kind = parse_enum(line, value)?,
        (Section::Field, "anisotropy_scaling") => cfg.field.scaling = parse_enum::<AnisotropyScaling>(line, value)?,
        (Section::Field, "axis1" | "axis2" | "axis3") => {
            let slot = (key.as_bytes()[4] - b'1') as usize;
            draft.axes.get_or_insert([None; 3])[slot] = Some(parse_vec3(line, key, value)?);
        }

        (Section::Integrator, "scheme") => i.scheme = parse_enum(line, value)?,
        (Section::Integrator, "xi") => i.xi = parse_value(line, key, value)?,
        (Section::Integrator, "tol") => i.tol = parse_value(line, key, value)?,
        (Section::Integrator, "max_iter") => i.max_iter = parse_value(line, key, value)?,
        (Section::Integrator, "eps_angle") => i.eps_angle = parse_value(line, key, value)?,

        (Section::Experiment, "command") => {
            cfg.command = Some(value.parse().map_err(|message| CliError::Parse { line, message })?)
        }
        (Section::Experiment, "m0") => e.m0 = parse_vec3(line, key, value)?,
        (Section::Experiment, "alphas") => e.alphas = parse_list(line, key, value)?,
        (Section::Experiment, "ks") => e.ks = parse_list(line, key, value)?,
        (Section::Experiment, "schemes") => {
            e.schemes = value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse_enum(line, s))
                .collect::<Result<_>>()?
        }
        (Section::Experiment, "periods") => e.periods = Some(parse_value(line, key, value)?),
        (Section::Experiment, "t_end") => e.t_end = Some(parse_value(line, key, value)?),
        (Section::Experiment, "steps_per_period") => e.steps_per_period = parse_value(line, key, value)?,
        (Section::Experiment, "dt") => e.dt = Some(parse_value(line, key, value)?),
        (Section::Experiment, "k") => e.k = parse_value(line, key, value)?,
        (Section::Experiment, "n_polar") => e.n_polar = parse_value(line, key, value)?,
        (Section::Experiment, "n_azimuth") => e.n_azimuth = parse_value(line, key, value)?,

        (Section::Output, "dir") => cfg.output_dir = Some(PathBuf::from(value)),
        (Section::Output, "seed") => cfg.seed = parse_value(line, key, value)?,

        (section, key) => {
            return Err(CliError::Parse {
                line,
                message: format!("unknown key {key:?} in [{}]", section.name()),
            })
        }
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<()> {
    let m = &cfg.material;
    let checks: [(bool, &str, &str); 4] = [
        (m.ms > 0.0, "material.Ms", "must be positive"),
        (m.mu0 > 0.0, "material.mu0", "must be positive"),
        (m.gamma > 0.0, "material.gamma", "must be positive"),
        (m.alpha >= 0.0, "material.alpha", "must be non-negative"),
    ];
    for (ok, field, message) in checks {
        if !ok {
            return Err(CliError::invalid(field, message));
        }
    }

    let i = &cfg.integrator;
    if !(0.0..=1.0).contains(&i.xi) {
        return Err(CliError::invalid("integrator.xi", "xi out of [0,1]"));
    }
    if !(i.tol > 0.0) {
        return Err(CliError::invalid("integrator.tol", "must be positive"));
    }
    if i.max_iter < 1 {
        return Err(CliError::invalid("integrator.max_iter", "must be at least 1"));
    }
    if !(i.eps_angle > 0.0) {
        return Err(CliError::invalid("integrator.eps_angle", "must be positive"));
    }

    let e = &cfg.experiment;
    if (e.m0.norm() - 1.0).abs() > llg_core::experiments::UNIT_TOLERANCE {
        return Err(CliError::invalid("experiment.m0", "must be a unit vector"));
    }
    if e.alphas.iter().any(|a| !(*a >= 0.0)) {
        return Err(CliError::invalid("experiment.alphas", "damping values must be non-negative"));
    }
    if e.ks.contains(&0) {
        return Err(CliError::invalid("experiment.ks", "step counts must be positive"));
    }
    if e.k == 0 {
        return Err(CliError::invalid("experiment.k", "must be positive"));
    }
    if e.steps_per_period == 0 {
        return Err(CliError::invalid("experiment.steps_per_period", "must be positive"));
    }
    for (value, field) in [(e.periods, "experiment.periods"), (e.t_end, "experiment.t_end"), (e.dt, "experiment.dt")] {
        if let Some(v) = value {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::invalid(field, "must be positive"));
            }
        }
    }
    if e.n_polar < 2 {
        return Err(CliError::invalid("experiment.n_polar", "must be at least 2"));
    }
    if e.n_azimuth < 3 {
        return Err(CliError::invalid("experiment.n_azimuth", "must be at least 3"));
    }
    if cfg.seed != 0 {
        return Err(CliError::invalid("output.seed", "reserved, must be 0"));
    }
    Ok(())
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn vec3(v: Vec3) -> String {
    format!("{:e}, {:e}, {:e}", v[0], v[1], v[2])
}

/// Writes `cfg` back in the document format; `parse_config` inverts it.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let m = &cfg.material;
    let _ = writeln!(out, "[material]");
    let _ = writeln!(out, "K1 = {:e}", m.k1_cub);
    let _ = writeln!(out, "K2 = {:e}", m.k2_cub);
    let _ = writeln!(out, "K1_iso = {:e}", m.k1_iso);
    let _ = writeln!(out, "K1_ti = {:e}", m.k1_ti);
    let _ = writeln!(out, "Ms = {:e}", m.ms);
    let _ = writeln!(out, "mu0 = {:e}", m.mu0);
    let _ = writeln!(out, "gamma = {:e}", m.gamma);
    let _ = writeln!(out, "Aexc = {:e}", m.a_exc);
    let _ = writeln!(out, "alpha = {:e}", m.alpha);

    let f = &cfg.field;
    let _ = writeln!(out, "\n[field]");
    let _ = writeln!(out, "H_ext = {}", vec3(f.h_ext));
    let _ = writeln!(out, "anisotropy = {}", f.anisotropy.kind());
    let _ = writeln!(out, "anisotropy_scaling = {}", f.scaling);
    for (n, axis) in f.anisotropy.axes().iter().enumerate() {
        let _ = writeln!(out, "axis{} = {}", n + 1, vec3(*axis));
    }

    let i = &cfg.integrator;
    let _ = writeln!(out, "\n[integrator]");
    let _ = writeln!(out, "scheme = {}", i.scheme);
    let _ = writeln!(out, "xi = {:e}", i.xi);
    let _ = writeln!(out, "tol = {:e}", i.tol);
    let _ = writeln!(out, "max_iter = {}", i.max_iter);
    let _ = writeln!(out, "eps_angle = {:e}", i.eps_angle);

    let e = &cfg.experiment;
    let _ = writeln!(out, "\n[experiment]");
    if let Some(command) = cfg.command {
        let _ = writeln!(out, "command = {command}");
    }
    let _ = writeln!(out, "m0 = {}", vec3(e.m0));
    let _ = writeln!(out, "alphas = {}", join(&e.alphas, |a| format!("{a:e}")));
    let _ = writeln!(out, "ks = {}", join(&e.ks, |k| k.to_string()));
    let _ = writeln!(out, "schemes = {}", join(&e.schemes, |s| s.to_string()));
    if let Some(periods) = e.periods {
        let _ = writeln!(out, "periods = {periods:e}");
    }
    if let Some(t_end) = e.t_end {
        let _ = writeln!(out, "t_end = {t_end:e}");
    }
    let _ = writeln!(out, "steps_per_period = {}", e.steps_per_period);
    if let Some(dt) = e.dt {
        let _ = writeln!(out, "dt = {dt:e}");
    }
    let _ = writeln!(out, "k = {}", e.k);
    let _ = writeln!(out, "n_polar = {}", e.n_polar);
    let _ = writeln!(out, "n_azimuth = {}", e.n_azimuth);

    let _ = writeln!(out, "\n[output]");
    if let Some(dir) = &cfg.output_dir {
        let _ = writeln!(out, "dir = {}", dir.display());
    }
    let _ = writeln!(out, "seed = {}", cfg.seed);
    out
}
