//! Time steppers for the canonical form `∂t m = W(m, H^eff)·m`.
//!
//! Every scheme is implicit in general and is solved by Picard iteration
//! ([`fixed_point_solve`]) started from `m_n`. When `W` does not depend on
//! the unknown (no damping, constant field) each scheme converges after a
//! single update.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{effective_field, FieldConfig, MaterialParams};
use crate::so3::{exp_skew, skew_from_axial, skew_of_cross, solve_3x3, Mat3, Vec3, DEFAULT_EPS_ANGLE};

/// Pre-normalization length below which renormalization is refused.
pub const MIN_RENORM_LENGTH: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// `m_{n+1} = exp[W^Δt_{n+ξ}]·m_n`.
    #[default]
    ExpUpdate,
    /// `(I - W^Δt_{n+1})·m_{n+1} = m_n`.
    BackwardEuler,
    /// Backward Euler followed by `m ← m/|m|`.
    RenormBackwardEuler,
    /// `(I - W^Δt_{n+1/2})·m_{n+1} = m_n` with averaged field and director.
    MidpointPaper,
    /// `(I - ½W^Δt_{n+1/2})·m_{n+1} = (I + ½W^Δt_{n+1/2})·m_n`.
    MidpointCayley,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::ExpUpdate,
        Scheme::BackwardEuler,
        Scheme::RenormBackwardEuler,
        Scheme::MidpointPaper,
        Scheme::MidpointCayley,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::ExpUpdate => "exp_update",
            Scheme::BackwardEuler => "backward_euler",
            Scheme::RenormBackwardEuler => "renorm_backward_euler",
            Scheme::MidpointPaper => "midpoint_paper",
            Scheme::MidpointCayley => "midpoint_cayley",
        }
    }

    /// Whether the discrete map keeps `|m|` fixed for any step size.
    pub fn preserves_norm(self) -> bool {
        matches!(
            self,
            Scheme::ExpUpdate | Scheme::RenormBackwardEuler | Scheme::MidpointCayley
        )
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown scheme {s:?} (expected one of {})",
                    Scheme::ALL.map(Scheme::as_str).join(", ")
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Placement of the exponential's argument, 0 explicit, 1 fully implicit.
    pub xi: f64,
    /// Bound on the Euclidean norm of the scheme residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Small-angle threshold forwarded to [`exp_skew`].
    pub eps_angle: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            scheme: Scheme::ExpUpdate,
            xi: 1.0,
            tol: 1e-12,
            max_iter: 100,
            eps_angle: DEFAULT_EPS_ANGLE,
        }
    }
}

impl IntegratorConfig {
    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(Error::InvalidArgument("xi out of [0,1]".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.eps_angle > 0.0) {
            return Err(Error::InvalidArgument("eps_angle must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub m_next: Vec3,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

/// One evaluation of a fixed-point problem at an iterate.
#[derive(Clone, Copy, Debug)]
pub struct FixedPointEval {
    /// Next iterate.
    pub image: Vec3,
    /// Scheme residual at the iterate that was evaluated.
    pub residual: Vec3,
}

/// Picard iteration `m⁽ⁱ⁺¹⁾ = update(m⁽ⁱ⁾)` until the residual at the current
/// iterate drops to `tol`.
///
/// `iterations` counts applied updates, so a map whose image does not depend
/// on its argument converges with `iterations == 1`. A non-converged run is
/// reported through [`StepReport::converged`], not as an error.
pub fn fixed_point_solve<F>(mut map: F, guess: Vec3, tol: f64, max_iter: usize) -> Result<StepReport>
where
    F: FnMut(Vec3) -> Result<FixedPointEval>,
{
    let mut current = map(guess)?.image;
    let mut iterations = 1;
    loop {
        let eval = map(current)?;
        let residual_norm = eval.residual.norm();
        if residual_norm <= tol {
            return Ok(StepReport {
                m_next: current,
                iterations,
                residual_norm,
                converged: true,
            });
        }
        if iterations >= max_iter {
            return Ok(StepReport {
                m_next: current,
                iterations,
                residual_norm,
                converged: false,
            });
        }
        current = eval.image;
        iterations += 1;
    }
}

/// `W^Δt = Δt·β·(Ω_[H] - α Ω_[H×m])`.
pub fn build_w(h_eff: Vec3, m: Vec3, p: &MaterialParams, dt: f64) -> Mat3 {
    (skew_from_axial(h_eff) - skew_of_cross(h_eff, m) * p.alpha) * (dt * p.beta())
}

fn check_step_inputs(dt: f64, cfg: &IntegratorConfig) -> Result<()> {
    cfg.validate()?;
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "time step must be finite and non-negative (got {dt:e})"
        )));
    }
    Ok(())
}

fn require_converged(report: StepReport) -> Result<StepReport> {
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NoConvergence {
            iterations: report.iterations,
            residual: report.residual_norm,
            last_iterate: report.m_next,
        })
    }
}

/// Exponential update with the argument evaluated at
/// `m_{n+ξ} = (1 - ξ)·m_n + ξ·m_{n+1}`.
pub fn step_exponential(
    m_n: Vec3,
    dt: f64,
    cfg: &IntegratorConfig,
    field: &FieldConfig,
    p: &MaterialParams,
) -> Result<StepReport> {
    check_step_inputs(dt, cfg)?;
    let map = |m: Vec3| {
        let m_xi = m_n.lerp(m, cfg.xi);
        let w = build_w(effective_field(m_xi, field, p), m_xi, p, dt);
        let image = exp_skew(&w, cfg.eps_angle) * m_n;
        Ok(FixedPointEval {
            image,
            residual: m - image,
        })
    };
    require_converged(fixed_point_solve(map, m_n, cfg.tol, cfg.max_iter)?)
}

pub fn step_backward_euler(
    m_n: Vec3,
    dt: f64,
    cfg: &IntegratorConfig,
    field: &FieldConfig,
    p: &MaterialParams,
) -> Result<StepReport> {
    check_step_inputs(dt, cfg)?;
    let map = |m: Vec3| {
        let lhs = Mat3::IDENTITY - build_w(effective_field(m, field, p), m, p, dt);
        Ok(FixedPointEval {
            image: solve_3x3(&lhs, m_n)?,
            residual: lhs * m - m_n,
        })
    };
    require_converged(fixed_point_solve(map, m_n, cfg.tol, cfg.max_iter)?)
}

/// Backward Euler followed by projection back onto the unit sphere.
///
/// The reported residual belongs to the unprojected solution.
pub fn step_renorm_backward_euler(
    m_n: Vec3,
    dt: f64,
    cfg: &IntegratorConfig,
    field: &FieldConfig,
    p: &MaterialParams,
) -> Result<StepReport> {
    let mut report = step_backward_euler(m_n, dt, cfg, field, p)?;
    let norm = report.m_next.norm();
    report.m_next = report
        .m_next
        .normalized(MIN_RENORM_LENGTH)
        .ok_or(Error::DegenerateNormalization { norm })?;
    Ok(report)
}

/// Midpoint rule. `cayley == false` solves the residual
/// `(I - W^Δt_{n+1/2})·m_{n+1} - m_n`; `cayley == true` solves the
/// norm-preserving `(I - ½W)·m_{n+1} - (I + ½W)·m_n`.
pub fn step_midpoint(
    m_n: Vec3,
    dt: f64,
    cfg: &IntegratorConfig,
    field: &FieldConfig,
    p: &MaterialParams,
    cayley: bool,
) -> Result<StepReport> {
    check_step_inputs(dt, cfg)?;
    let h_n = effective_field(m_n, field, p);
    let map = |m: Vec3| {
        let m_half = m_n.lerp(m, 0.5);
        let h_half = h_n.lerp(effective_field(m, field, p), 0.5);
        let w = build_w(h_half, m_half, p, dt);
        let (lhs, rhs) = if cayley {
            let half = w * 0.5;
            (Mat3::IDENTITY - half, (Mat3::IDENTITY + half) * m_n)
        } else {
            (Mat3::IDENTITY - w, m_n)
        };
        Ok(FixedPointEval {
            image: solve_3x3(&lhs, rhs)?,
            residual: lhs * m - rhs,
        })
    };
    require_converged(fixed_point_solve(map, m_n, cfg.tol, cfg.max_iter)?)
}

/// Advances `m_n` by `dt` with the scheme selected in `cfg`.
///
/// `m_n` is not required to be unit length: the non-preserving schemes are
/// routinely continued from shrunken directors.
pub fn step(
    m_n: Vec3,
    dt: f64,
    cfg: &IntegratorConfig,
    field: &FieldConfig,
    p: &MaterialParams,
) -> Result<StepReport> {
    match cfg.scheme {
        Scheme::ExpUpdate => step_exponential(m_n, dt, cfg, field, p),
        Scheme::BackwardEuler => step_backward_euler(m_n, dt, cfg, field, p),
        Scheme::RenormBackwardEuler => step_renorm_backward_euler(m_n, dt, cfg, field, p),
        Scheme::MidpointPaper => step_midpoint(m_n, dt, cfg, field, p, false),
        Scheme::MidpointCayley => step_midpoint(m_n, dt, cfg, field, p, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{AnisotropyKind, AnisotropyModel};
    use crate::so3::axial_from_skew;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    const H: f64 = 1e6;

    fn z_field() -> FieldConfig {
        FieldConfig::applied(Vec3::new(0.0, 0.0, H))
    }

    fn period(p: &MaterialParams) -> f64 {
        2.0 * PI / (p.beta() * H)
    }

    fn random_vec(rng: &mut StdRng, scale: f64) -> Vec3 {
        Vec3(std::array::from_fn(|_| rng.gen_range(-scale..scale)))
    }

    fn cfg(scheme: Scheme) -> IntegratorConfig {
        IntegratorConfig::default().with_scheme(scheme)
    }

    #[test]
    fn w_without_damping_is_plain_precession() {
        let p = MaterialParams::fe_ga();
        let dt = 1e-13;
        let w = build_w(Vec3::new(0.0, 0.0, H), Vec3::new(0.3, 0.4, 0.5), &p, dt);
        let expected = skew_from_axial(Vec3::new(0.0, 0.0, p.gamma * H * dt));
        assert!((w - expected).max_abs() <= 1e-15 * expected.max_abs());
    }

    #[test]
    fn w_with_parallel_field_has_no_damping_term() {
        let p = MaterialParams::fe_ga().with_alpha(0.7);
        let m = Vec3::new(0.0, 0.6, 0.8);
        let h = m * 3e5;
        let dt = 2e-13;
        let expected = skew_from_axial(h) * (dt * p.beta());
        assert!((build_w(h, m, &p, dt) - expected).max_abs() <= 1e-15 * expected.max_abs());
    }

    #[test]
    fn w_axial_vector_oracle() {
        let mut rng = StdRng::seed_from_u64(20);
        for _ in 0..1000 {
            let p = MaterialParams::fe_ga().with_alpha(rng.gen_range(0.0..2.0));
            let h = random_vec(&mut rng, 1.0);
            let m = random_vec(&mut rng, 1.0);
            let dt = rng.gen_range(0.0..3.0);
            let w = build_w(h, m, &p, dt);
            assert_eq!(w.transpose(), -w);
            let got = axial_from_skew(&w).unwrap();
            let expected = (h - h.cross(m) * p.alpha) * (dt * p.beta());
            assert!((got - expected).max_abs() <= 1e-14);
        }
    }

    #[test]
    fn exponential_quarter_turn() {
        let p = MaterialParams::fe_ga();
        let report = step_exponential(Vec3::E1, period(&p) / 4.0, &cfg(Scheme::ExpUpdate), &z_field(), &p)
            .unwrap();
        assert_eq!(report.iterations, 1);
        // ∂t m = γ H×m with H along +x3 turns x1 toward +x2.
        assert!((report.m_next - Vec3::E2).max_abs() <= 1e-12, "{:?}", report.m_next);
    }

    #[test]
    fn every_scheme_is_a_no_op_for_zero_dt() {
        let p = MaterialParams::fe_ga().with_alpha(0.3);
        let field = FieldConfig {
            h_ext: Vec3::new(1e5, -2e5, 1e6),
            anisotropy: AnisotropyModel::canonical(AnisotropyKind::Cub),
            ..Default::default()
        };
        let m = Vec3::new(0.48, 0.6, 0.64);
        for scheme in Scheme::ALL {
            let report = step(m, 0.0, &cfg(scheme), &field, &p).unwrap();
            assert_eq!(report.m_next, m, "{scheme}");
            assert_eq!(report.iterations, 1, "{scheme}");
        }
    }

    #[test]
    fn constant_w_converges_in_one_iteration() {
        let p = MaterialParams::fe_ga();
        let dt = period(&p) / 7.0;
        for scheme in Scheme::ALL {
            let report = step(Vec3::E1, dt, &cfg(scheme), &z_field(), &p).unwrap();
            assert_eq!(report.iterations, 1, "{scheme}");
            assert!(report.converged);
        }
    }

    #[test]
    fn damped_exponential_step_moves_toward_field() {
        let p = MaterialParams::fe_ga().with_alpha(1.0);
        let dt = period(&p) / 200.0;
        let report = step_exponential(Vec3::E1, dt, &cfg(Scheme::ExpUpdate), &z_field(), &p).unwrap();
        assert!((report.m_next.norm() - 1.0).abs() <= 1e-13);
        assert!(report.m_next[2] > 0.0);
        assert!(report.iterations > 1);
        assert!(report.residual_norm <= 1e-12);
    }

    #[test]
    fn explicit_exponential_is_one_update() {
        let p = MaterialParams::fe_ga().with_alpha(0.5);
        let c = IntegratorConfig { xi: 0.0, ..cfg(Scheme::ExpUpdate) };
        let report = step_exponential(Vec3::E1, period(&p) / 50.0, &c, &z_field(), &p).unwrap();
        assert_eq!(report.iterations, 1);
        let w = build_w(Vec3::new(0.0, 0.0, H), Vec3::E1, &p, period(&p) / 50.0);
        assert_eq!(report.m_next, exp_skew(&w, c.eps_angle) * Vec3::E1);
    }

    #[test]
    fn backward_euler_resolvent_norm() {
        let p = MaterialParams::fe_ga();
        for k in [2usize, 3, 7, 100] {
            let theta = 2.0 * PI / k as f64;
            let dt = period(&p) / k as f64;
            for scheme in [Scheme::BackwardEuler, Scheme::MidpointPaper] {
                let report = step(Vec3::E1, dt, &cfg(scheme), &z_field(), &p).unwrap();
                let expected = 1.0 / (1.0 + theta * theta).sqrt();
                assert!((report.m_next.norm() - expected).abs() <= 1e-12, "{scheme} k={k}");
            }
        }
    }

    #[test]
    fn renormalized_backward_euler() {
        let p = MaterialParams::fe_ga();
        let dt = period(&p) / 10.0;
        let report = step_renorm_backward_euler(Vec3::E1, dt, &cfg(Scheme::RenormBackwardEuler), &z_field(), &p)
            .unwrap();
        assert!((report.m_next.norm() - 1.0).abs() <= 1e-15);
        let angle = report.m_next[1].atan2(report.m_next[0]);
        assert!((angle - (2.0 * PI / 10.0).atan()).abs() <= 1e-12);
        assert_eq!(
            step_renorm_backward_euler(Vec3::E1, 0.0, &cfg(Scheme::RenormBackwardEuler), &z_field(), &p)
                .unwrap()
                .m_next,
            Vec3::E1
        );
    }

    #[test]
    fn renormalizing_a_vanishing_director_fails() {
        let p = MaterialParams::fe_ga();
        let err = step_renorm_backward_euler(Vec3::ZERO, 1e-12, &cfg(Scheme::RenormBackwardEuler), &z_field(), &p)
            .unwrap_err();
        assert!(matches!(err, Error::DegenerateNormalization { .. }));
    }

    #[test]
    fn cayley_midpoint_preserves_norm() {
        let p = MaterialParams::fe_ga();
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..200 {
            let dt = period(&p) * rng.gen_range(0.0..10.0);
            let m = random_vec(&mut rng, 1.0).normalized(1e-3).unwrap_or(Vec3::E1);
            let report = step_midpoint(m, dt, &cfg(Scheme::MidpointCayley), &z_field(), &p, true).unwrap();
            assert!((report.m_next.norm() - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn contractive_map_iteration_count() {
        let c = Vec3::new(0.3, -0.2, 0.9);
        let guess = Vec3::new(1.0, 1.0, 1.0) + c;
        let tol = 1e-12;
        let map = |m: Vec3| {
            let image = (m + c) * 0.5;
            Ok(FixedPointEval { image, residual: m - image })
        };
        let report = fixed_point_solve(map, guess, tol, 200).unwrap();
        assert!(report.converged);
        let distance = (guess - c).norm();
        let predicted = (distance / tol).log2();
        assert!((report.iterations as f64 - predicted).abs() <= 2.0, "{}", report.iterations);
        assert!((report.m_next - c).norm() <= 4.0 * tol);
    }

    #[test]
    fn non_converged_report() {
        let map = |m: Vec3| {
            let image = m * 0.5 + Vec3::E1;
            Ok(FixedPointEval { image, residual: m - image })
        };
        let report = fixed_point_solve(map, Vec3::ZERO, 1e-12, 1).unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 1);
        assert!(report.residual_norm > 1e-12);
    }

    #[test]
    fn stiff_step_reports_no_convergence() {
        let p = MaterialParams::fe_ga().with_alpha(1.0);
        let c = IntegratorConfig { max_iter: 3, ..cfg(Scheme::ExpUpdate) };
        let err = step_exponential(Vec3::E1, 1e-9, &c, &z_field(), &p).unwrap_err();
        assert_eq!(err.code(), "NO_CONVERGENCE");
        if let Error::NoConvergence { iterations, .. } = err {
            assert_eq!(iterations, 3);
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let p = MaterialParams::fe_ga();
        let bad = [
            IntegratorConfig { xi: 1.5, ..Default::default() },
            IntegratorConfig { tol: 0.0, ..Default::default() },
            IntegratorConfig { max_iter: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(step(Vec3::E1, 1e-13, &c, &z_field(), &p).is_err());
        }
        assert!(step(Vec3::E1, -1.0, &IntegratorConfig::default(), &z_field(), &p).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for scheme in Scheme::ALL {
            assert_eq!(scheme.as_str().parse::<Scheme>().unwrap(), scheme);
        }
        assert!("rk4".parse::<Scheme>().is_err());
    }

    #[test]
    fn exponential_norm_over_step_sizes() {
        let mut rng = StdRng::seed_from_u64(22);
        let field = FieldConfig {
            h_ext: Vec3::new(0.0, 0.0, H),
            anisotropy: AnisotropyModel::canonical(AnisotropyKind::Cub),
            ..Default::default()
        };
        for exponent in -15..=-9 {
            let dt = 10f64.powi(exponent);
            for alpha in [0.0, 0.01, 0.1, 1.0] {
                let p = MaterialParams::fe_ga().with_alpha(alpha);
                let m = random_vec(&mut rng, 1.0).normalized(1e-3).unwrap_or(Vec3::E1);
                match step_exponential(m, dt, &cfg(Scheme::ExpUpdate), &field, &p) {
                    Ok(report) => assert!((report.m_next.norm() - 1.0).abs() <= 1e-12),
                    Err(Error::NoConvergence { last_iterate, .. }) => {
                        // Unconverged iterates are still images of a rotation.
                        assert!((last_iterate.norm() - 1.0).abs() <= 1e-12);
                    }
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn damped_energy_is_non_increasing() {
        let p = MaterialParams::fe_ga().with_alpha(0.1);
        let field = z_field();
        let dt = period(&p) / 100.0;
        let mut m = Vec3::new(1.0, 0.0, -0.2).normalized(0.0).unwrap();
        let mut energy = -m.dot(field.h_ext);
        for _ in 0..2000 {
            m = step_exponential(m, dt, &cfg(Scheme::ExpUpdate), &field, &p).unwrap().m_next;
            let next = -m.dot(field.h_ext);
            assert!(next <= energy + 1e-9 * H);
            energy = next;
        }
    }

    #[test]
    fn converged_flag_matches_residual() {
        let p = MaterialParams::fe_ga().with_alpha(0.2);
        let field = FieldConfig {
            h_ext: Vec3::new(2e5, 0.0, 1e6),
            anisotropy: AnisotropyModel::canonical(AnisotropyKind::Cub),
            ..Default::default()
        };
        for scheme in Scheme::ALL {
            let report = step(Vec3::new(0.6, 0.0, 0.8), period(&p) / 20.0, &cfg(scheme), &field, &p).unwrap();
            assert_eq!(report.converged, report.residual_norm <= 1e-12);
        }
    }
}
