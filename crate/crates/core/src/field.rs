//! Magnetic enthalpy and the effective field of a single (point) moment.
//!
//! Only the applied-field and magnetocrystalline anisotropy contributions
//! are modelled; exchange needs spatial gradients and has no meaning for a
//! single moment.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::so3::Vec3;

/// Gyromagnetic ratio `γ₀` of Fe81.3Ga18.7 in 1/(T·s).
pub const GAMMA0_FEGA: f64 = 1.76e11;

/// Vacuum permeability in H/m.
pub const MU0: f64 = 4.0 * PI * 1e-7;

/// Physical constants of the magnetic material, SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    /// First cubic anisotropy constant, J/m³.
    pub k1_cub: f64,
    /// Second cubic anisotropy constant, J/m³.
    pub k2_cub: f64,
    /// Isotropic anisotropy constant, J/m³.
    pub k1_iso: f64,
    /// Transversely isotropic (uniaxial) constant, J/m³.
    pub k1_ti: f64,
    /// Saturation magnetization, A/m.
    pub ms: f64,
    /// Vacuum permeability, H/m.
    pub mu0: f64,
    /// `γ = μ₀γ₀`, m/(A·s).
    pub gamma: f64,
    /// Exchange constant, J/m. Carried for completeness only.
    pub a_exc: f64,
    /// Gilbert damping, dimensionless.
    pub alpha: f64,
}

impl MaterialParams {
    /// Fe81.3Ga18.7 constants with zero damping.
    ///
    /// The material table gives no isotropic or uniaxial constant; both
    /// default to `K₁`.
    pub fn fe_ga() -> Self {
        MaterialParams {
            k1_cub: 2e4,
            k2_cub: -4.5e4,
            k1_iso: 2e4,
            k1_ti: 2e4,
            ms: 1.432e6,
            mu0: MU0,
            gamma: MU0 * GAMMA0_FEGA,
            a_exc: 1e-11,
            alpha: 0.0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// `β = γ / (1 + α²)`.
    pub fn beta(&self) -> f64 {
        self.gamma / (1.0 + self.alpha * self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.ms > 0.0, "Ms must be positive"),
            (self.mu0 > 0.0, "mu0 must be positive"),
            (self.gamma > 0.0, "gamma must be positive"),
            (self.alpha >= 0.0, "alpha must be non-negative"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidArgument(msg.into()));
            }
        }
        let all = [
            self.k1_cub, self.k2_cub, self.k1_iso, self.k1_ti, self.ms, self.mu0, self.gamma,
            self.a_exc, self.alpha,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("material parameters must be finite".into()));
        }
        Ok(())
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        Self::fe_ga()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum AnisotropyKind {
    #[default]
    None,
    Iso,
    Ti,
    Cub,
}

impl AnisotropyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnisotropyKind::None => "none",
            AnisotropyKind::Iso => "iso",
            AnisotropyKind::Ti => "ti",
            AnisotropyKind::Cub => "cub",
        }
    }
}

impl fmt::Display for AnisotropyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnisotropyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(AnisotropyKind::None),
            "iso" => Ok(AnisotropyKind::Iso),
            "ti" => Ok(AnisotropyKind::Ti),
            "cub" => Ok(AnisotropyKind::Cub),
            other => Err(Error::InvalidArgument(format!(
                "unknown anisotropy kind {other:?} (expected none, iso, ti or cub)"
            ))),
        }
    }
}

/// Anisotropy type plus the crystal axes `a₁, a₂, a₃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnisotropyModel {
    kind: AnisotropyKind,
    axes: [Vec3; 3],
}

impl AnisotropyModel {
    pub const AXIS_TOLERANCE: f64 = 1e-12;

    /// Model aligned with the Cartesian basis.
    pub fn canonical(kind: AnisotropyKind) -> Self {
        AnisotropyModel {
            kind,
            axes: [Vec3::E1, Vec3::E2, Vec3::E3],
        }
    }

    pub fn none() -> Self {
        Self::canonical(AnisotropyKind::None)
    }

    /// Builds a model with custom axes, which must be orthonormal.
    pub fn new(kind: AnisotropyKind, axes: [Vec3; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                let dot = axes[i].dot(axes[j]);
                if (dot - expected).abs() > Self::AXIS_TOLERANCE || dot.is_nan() {
                    return Err(Error::InvalidArgument(format!(
                        "anisotropy axes are not orthonormal (a{}·a{} = {dot})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(AnisotropyModel { kind, axes })
    }

    pub fn kind(&self) -> AnisotropyKind {
        self.kind
    }

    pub fn axes(&self) -> [Vec3; 3] {
        self.axes
    }

    fn projections(&self, m: Vec3) -> [f64; 3] {
        self.axes.map(|a| m.dot(a))
    }
}

impl Default for AnisotropyModel {
    fn default() -> Self {
        Self::none()
    }
}

/// Prefactor applied to `-∂H^ani/∂m` when forming the anisotropy field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum AnisotropyScaling {
    /// `1/μ₀`, as printed in the effective-field expression.
    PaperMu0,
    /// `1/(μ₀ Ms)`, which yields a field in A/m.
    #[default]
    Mu0Ms,
}

impl AnisotropyScaling {
    pub fn as_str(self) -> &'static str {
        match self {
            AnisotropyScaling::PaperMu0 => "paper_mu0",
            AnisotropyScaling::Mu0Ms => "mu0_Ms",
        }
    }

    pub fn factor(self, p: &MaterialParams) -> f64 {
        match self {
            AnisotropyScaling::PaperMu0 => 1.0 / p.mu0,
            AnisotropyScaling::Mu0Ms => 1.0 / (p.mu0 * p.ms),
        }
    }
}

impl fmt::Display for AnisotropyScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AnisotropyScaling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_mu0" => Ok(AnisotropyScaling::PaperMu0),
            "mu0_Ms" | "mu0_ms" => Ok(AnisotropyScaling::Mu0Ms),
            other => Err(Error::InvalidArgument(format!(
                "unknown anisotropy scaling {other:?} (expected paper_mu0 or mu0_Ms)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FieldConfig {
    /// Applied field in A/m.
    pub h_ext: Vec3,
    pub anisotropy: AnisotropyModel,
    pub scaling: AnisotropyScaling,
}

impl FieldConfig {
    /// A constant applied field without anisotropy.
    pub fn applied(h_ext: Vec3) -> Self {
        FieldConfig {
            h_ext,
            ..Default::default()
        }
    }

    /// `true` when the effective field does not depend on `m`.
    pub fn is_constant(&self) -> bool {
        self.anisotropy.kind() == AnisotropyKind::None
    }
}

/// Anisotropy enthalpy density in J/m³.
pub fn enthalpy_ani(m: Vec3, model: &AnisotropyModel, p: &MaterialParams) -> f64 {
    let [j1, j2, j3] = model.projections(m);
    match model.kind {
        AnisotropyKind::None => 0.0,
        AnisotropyKind::Iso => 0.5 * p.k1_iso * m.dot(m),
        AnisotropyKind::Ti => 0.5 * p.k1_ti * (1.0 - j1 * j1),
        AnisotropyKind::Cub => {
            let (s1, s2, s3) = (j1 * j1, j2 * j2, j3 * j3);
            p.k1_cub * (s1 * s2 + s2 * s3 + s3 * s1) + p.k2_cub * s1 * s2 * s3
        }
    }
}

/// Ambient gradient `∂H^ani/∂m`, without projection onto the sphere.
pub fn enthalpy_ani_gradient(m: Vec3, model: &AnisotropyModel, p: &MaterialParams) -> Vec3 {
    let j = model.projections(m);
    let [a1, a2, a3] = model.axes;
    match model.kind {
        AnisotropyKind::None => Vec3::ZERO,
        AnisotropyKind::Iso => m * p.k1_iso,
        AnisotropyKind::Ti => a1 * (-p.k1_ti * j[0]),
        AnisotropyKind::Cub => {
            let sq = j.map(|x| x * x);
            let coeff = |i: usize| {
                let (b, c) = (sq[(i + 1) % 3], sq[(i + 2) % 3]);
                2.0 * j[i] * (p.k1_cub * (b + c) + p.k2_cub * b * c)
            };
            a1 * coeff(0) + a2 * coeff(1) + a3 * coeff(2)
        }
    }
}

/// `H^ani = -s ∂H^ani/∂m` with `s` selected by `scaling`.
pub fn anisotropy_field(
    m: Vec3,
    model: &AnisotropyModel,
    p: &MaterialParams,
    scaling: AnisotropyScaling,
) -> Vec3 {
    enthalpy_ani_gradient(m, model, p) * (-scaling.factor(p))
}

/// Effective field `H_ext + H^ani(m)` in A/m.
///
/// `m` need not be exactly unit length; implicit schemes evaluate the field
/// at interpolated states.
pub fn effective_field(m: Vec3, cfg: &FieldConfig, p: &MaterialParams) -> Vec3 {
    cfg.h_ext + anisotropy_field(m, &cfg.anisotropy, p, cfg.scaling)
}

/// Zeeman enthalpy `-½ μ₀ Ms m·H`, dropping the m-independent `-μ₀ H·H`.
pub fn enthalpy_zeeman(m: Vec3, h: Vec3, p: &MaterialParams) -> f64 {
    -0.5 * p.mu0 * p.ms * m.dot(h)
}

/// Zeeman plus anisotropy enthalpy density.
pub fn enthalpy_total(m: Vec3, cfg: &FieldConfig, p: &MaterialParams) -> f64 {
    enthalpy_zeeman(m, cfg.h_ext, p) + enthalpy_ani(m, &cfg.anisotropy, p)
}

/// Unit vector with polar angle `theta` from `x3` and azimuth `phi`.
pub fn spherical_direction(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(st * cp, st * sp, ct)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSample {
    pub theta: f64,
    pub phi: f64,
    pub energy: f64,
}

/// Tabulates the anisotropy enthalpy over the sphere.
///
/// `theta` runs over `n_polar` points spanning `[0, π]` inclusive and `phi`
/// over `n_azimuth` points spanning `[0, 2π)`. Samples are ordered with
/// `theta` outermost.
pub fn energy_surface(
    model: &AnisotropyModel,
    p: &MaterialParams,
    n_polar: usize,
    n_azimuth: usize,
) -> Result<Vec<SurfaceSample>> {
    if n_polar < 2 || n_azimuth < 3 {
        return Err(Error::InvalidArgument(format!(
            "energy surface needs n_polar >= 2 and n_azimuth >= 3 (got {n_polar}, {n_azimuth})"
        )));
    }
    let mut out = Vec::with_capacity(n_polar * n_azimuth);
    for i in 0..n_polar {
        let theta = PI * i as f64 / (n_polar - 1) as f64;
        for j in 0..n_azimuth {
            let phi = 2.0 * PI * j as f64 / n_azimuth as f64;
            let energy = enthalpy_ani(spherical_direction(theta, phi), model, p);
            out.push(SurfaceSample { theta, phi, energy });
        }
    }
    Ok(out)
}
