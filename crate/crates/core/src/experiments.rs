//! Single-moment experiments: damped precessional switching and the
//! step-size stability study.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{effective_field, FieldConfig, MaterialParams};
use crate::integrators::{self, IntegratorConfig, Scheme};
use crate::so3::Vec3;

/// Tolerance on `|m0|` accepted as a unit initial condition.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Step count of the reference solution used by the step-size study.
pub const REFERENCE_STEPS: usize = 1000;

/// Default resolution of damped runs.
pub const DEFAULT_STEPS_PER_PERIOD: usize = 100;

/// Step-size study step counts.
pub const STEPSIZE_KS: [usize; 7] = [100, 20, 10, 6, 4, 3, 2];

/// Damping values of the switching study.
pub const PRECESSION_ALPHAS: [f64; 4] = [0.0, 0.01, 0.1, 1.0];

/// Period of the undamped-equivalent precession angle, `2π(1+α²)/(γ|H|)`.
pub fn analytic_period(p: &MaterialParams, h: Vec3) -> Result<f64> {
    let magnitude = h.norm();
    if !(magnitude > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok(2.0 * PI / (p.beta() * magnitude))
}

/// Periods needed to relax to `m·ĥ ≥ 1 - 1e-6`: 20 for `α ≥ 0.1`, growing as
/// `2/α` below that.
pub fn relaxation_periods(alpha: f64) -> f64 {
    if alpha > 0.0 {
        (2.0 / alpha).max(20.0)
    } else {
        20.0
    }
}

/// Representative of `atan2(m₂, m₁)` closest to `target`.
pub fn polar_angle_unwrapped(target: f64, m: Vec3) -> Result<f64> {
    if m[0] * m[0] + m[1] * m[1] < 1e-24 {
        return Err(Error::DegenerateProjection);
    }
    let raw = m[1].atan2(m[0]);
    let turns = ((target - raw) / (2.0 * PI)).round();
    Ok(raw + turns * 2.0 * PI)
}

/// First-order change of the polar angle over one step from `m`.
///
/// Used as the unwrapping target so that half-turn steps keep the sense of
/// rotation.
pub fn predicted_phase_increment(m: Vec3, dt: f64, field: &FieldConfig, p: &MaterialParams) -> f64 {
    let r2 = m[0] * m[0] + m[1] * m[1];
    if r2 < 1e-24 {
        return 0.0;
    }
    let dm = integrators::build_w(effective_field(m, field, p), m, p, dt) * m;
    (m[0] * dm[1] - m[1] * dm[0]) / r2
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    /// Explicit end time in seconds.
    Time(f64),
    /// Multiple of [`analytic_period`].
    Periods(f64),
    /// [`relaxation_periods`] periods for the run's damping.
    Relaxation,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Steps {
    Count(usize),
    /// Target step size; the count is rounded up so that steps are equal.
    Size(f64),
    PerPeriod(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub m0: Vec3,
    pub field: FieldConfig,
    pub material: MaterialParams,
    pub integrator: IntegratorConfig,
    pub horizon: Horizon,
    pub steps: Steps,
}

impl ExperimentSpec {
    /// `m0 = e1`, `H = 10⁶ A/m · e3`, one period in `k` steps.
    pub fn rotation(scheme: Scheme, k: usize) -> Self {
        ExperimentSpec {
            m0: Vec3::E1,
            field: FieldConfig::applied(Vec3::new(0.0, 0.0, 1e6)),
            material: MaterialParams::fe_ga(),
            integrator: IntegratorConfig::default().with_scheme(scheme),
            horizon: Horizon::Periods(1.0),
            steps: Steps::Count(k),
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.material.alpha = alpha;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.integrator.scheme = scheme;
        self
    }

    pub fn with_steps(mut self, steps: Steps) -> Self {
        self.steps = steps;
        self
    }

    pub fn period(&self) -> Result<f64> {
        analytic_period(&self.material, self.field.h_ext)
    }

    pub fn t_end(&self) -> Result<f64> {
        let t_end = match self.horizon {
            Horizon::Time(t) => t,
            Horizon::Periods(n) => n * self.period()?,
            Horizon::Relaxation => relaxation_periods(self.material.alpha) * self.period()?,
        };
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "end time must be positive and finite (got {t_end:e})"
            )));
        }
        Ok(t_end)
    }

    pub fn step_count(&self) -> Result<usize> {
        let k = match self.steps {
            Steps::Count(k) => k,
            Steps::Size(dt) => {
                if !(dt > 0.0) {
                    return Err(Error::InvalidArgument("step size must be positive".into()));
                }
                (self.t_end()? / dt * (1.0 - 1e-12)).ceil() as usize
            }
            Steps::PerPeriod(n) => {
                (self.t_end()? / self.period()? * n as f64 * (1.0 - 1e-12)).ceil() as usize
            }
        };
        if k == 0 {
            return Err(Error::InvalidArgument("step count must be at least 1".into()));
        }
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.integrator.validate()?;
        if (self.m0.norm() - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "initial director must be unit length (|m0| = {})",
                self.m0.norm()
            )));
        }
        self.t_end()?;
        self.step_count()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub m: Vec3,
    pub norm: f64,
    /// Unwrapped polar angle in the x1-x2 plane.
    pub phi: f64,
    /// Solver iterations of the step that produced this sample.
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub scheme: Scheme,
    pub alpha: f64,
    pub k: usize,
    pub dt: f64,
    pub t_end: f64,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn initial(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory holds the initial sample")
    }

    pub fn total_iterations(&self) -> usize {
        self.samples.iter().map(|s| s.iterations).sum()
    }

    pub fn max_norm_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `φ_final - φ_0`.
    pub fn swept_angle(&self) -> f64 {
        self.last().phi - self.initial().phi
    }
}

/// Integrates `k` equal steps from `m0` to the spec's end time.
///
/// On a failing step the error carries the samples recorded so far.
pub fn run_trajectory(spec: &ExperimentSpec) -> Result<Trajectory> {
    spec.validate()?;
    let t_end = spec.t_end()?;
    let k = spec.step_count()?;
    let dt = t_end / k as f64;

    let mut phi = polar_angle_unwrapped(0.0, spec.m0).unwrap_or(0.0);
    let mut traj = Trajectory {
        scheme: spec.integrator.scheme,
        alpha: spec.material.alpha,
        k,
        dt,
        t_end,
        samples: Vec::with_capacity(k + 1),
    };
    traj.samples.push(Sample {
        t: 0.0,
        m: spec.m0,
        norm: spec.m0.norm(),
        phi,
        iterations: 0,
    });

    let mut m = spec.m0;
    for step in 1..=k {
        let target = phi + predicted_phase_increment(m, dt, &spec.field, &spec.material);
        let report = match integrators::step(m, dt, &spec.integrator, &spec.field, &spec.material) {
            Ok(report) => report,
            Err(source) => {
                return Err(Error::StepFailed {
                    step,
                    partial: Box::new(traj),
                    source: Box::new(source),
                })
            }
        };
        m = report.m_next;
        // Directors parked on the x3 axis keep the last defined angle.
        phi = polar_angle_unwrapped(target, m).unwrap_or(phi);
        traj.samples.push(Sample {
            t: t_end * step as f64 / k as f64,
            m,
            norm: m.norm(),
            phi,
            iterations: report.iterations,
        });
    }
    Ok(traj)
}

/// Angle between the final directors of two runs over the same interval.
pub fn deviation_from_reference(traj: &Trajectory, reference: &Trajectory) -> Result<f64> {
    if (traj.t_end - reference.t_end).abs() > 1e-12 * traj.t_end.abs().max(reference.t_end.abs()) {
        return Err(Error::InvalidArgument(format!(
            "trajectories end at different times ({:e} s vs {:e} s)",
            traj.t_end, reference.t_end
        )));
    }
    angle_between(traj.last().m, reference.last().m)
}

/// Angle between two directions, evaluated as `atan2(|a×b|, a·b)`.
pub fn angle_between(a: Vec3, b: Vec3) -> Result<f64> {
    for v in [a, b] {
        let norm = v.norm();
        if norm < 1e-12 {
            return Err(Error::ZeroVector { norm });
        }
    }
    let a = a * (1.0 / a.norm());
    let b = b * (1.0 / b.norm());
    Ok(a.cross(b).norm().atan2(a.dot(b)))
}

/// One trajectory per damping value, with `base`'s damping overridden.
pub fn run_precession_study(alphas: &[f64], base: &ExperimentSpec) -> Result<Vec<Trajectory>> {
    alphas
        .par_iter()
        .map(|&alpha| run_trajectory(&base.with_alpha(alpha)))
        .collect()
}

/// Per-run figures written to the summary table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SummaryRow {
    pub scheme: Scheme,
    pub k: usize,
    pub alpha: f64,
    pub dt: f64,
    pub final_norm: f64,
    pub final_phi: f64,
    pub deviation: Option<f64>,
    pub total_iterations: usize,
}

impl SummaryRow {
    pub fn new(traj: &Trajectory, deviation: Option<f64>) -> Self {
        SummaryRow {
            scheme: traj.scheme,
            k: traj.k,
            alpha: traj.alpha,
            dt: traj.dt,
            final_norm: traj.last().norm,
            final_phi: traj.last().phi,
            deviation,
            total_iterations: traj.total_iterations(),
        }
    }
}

/// Summary of a switching run: deviation is the angle to the applied field.
pub fn precession_summary(trajectories: &[Trajectory], field: &FieldConfig) -> Result<Vec<SummaryRow>> {
    trajectories
        .iter()
        .map(|t| Ok(SummaryRow::new(t, Some(angle_between(t.last().m, field.h_ext)?))))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepsizeStudy {
    pub schemes: Vec<Scheme>,
    pub ks: Vec<usize>,
    /// `cells[s][i]` is scheme `schemes[s]` run with `ks[i]` steps.
    pub cells: Vec<Vec<Trajectory>>,
    /// Exponential update with [`REFERENCE_STEPS`] steps.
    pub reference: Trajectory,
}

impl StepsizeStudy {
    pub fn trajectories(&self) -> impl Iterator<Item = &Trajectory> {
        self.cells.iter().flatten()
    }

    pub fn get(&self, scheme: Scheme, k: usize) -> Option<&Trajectory> {
        let s = self.schemes.iter().position(|&x| x == scheme)?;
        let i = self.ks.iter().position(|&x| x == k)?;
        Some(&self.cells[s][i])
    }

    pub fn summary(&self) -> Result<Vec<SummaryRow>> {
        self.trajectories()
            .map(|t| Ok(SummaryRow::new(t, Some(deviation_from_reference(t, &self.reference)?))))
            .collect()
    }
}

/// Runs every `(scheme, k)` cell over `base`'s horizon.
///
/// Intended for `α = 0`, no anisotropy and a one-period horizon, where the
/// exponential update is exact.
pub fn run_stepsize_study(ks: &[usize], schemes: &[Scheme], base: &ExperimentSpec) -> Result<StepsizeStudy> {
    let jobs: Vec<(Scheme, usize)> = schemes
        .iter()
        .flat_map(|&s| ks.iter().map(move |&k| (s, k)))
        .collect();
    let reference_spec = base
        .with_scheme(Scheme::ExpUpdate)
        .with_steps(Steps::Count(REFERENCE_STEPS));

    let (reference, flat) = rayon::join(
        || run_trajectory(&reference_spec),
        || {
            jobs.par_iter()
                .map(|&(s, k)| run_trajectory(&base.with_scheme(s).with_steps(Steps::Count(k))))
                .collect::<Result<Vec<_>>>()
        },
    );
    let mut flat = flat?.into_iter();
    let cells = schemes
        .iter()
        .map(|_| flat.by_ref().take(ks.len()).collect())
        .collect();
    Ok(StepsizeStudy {
        schemes: schemes.to_vec(),
        ks: ks.to_vec(),
        cells,
        reference: reference?,
    })
}
