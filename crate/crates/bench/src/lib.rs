//! Shared fixtures for the criterion benches.

use llg_core::field::{AnisotropyKind, AnisotropyModel};
use llg_core::{ExperimentSpec, FieldConfig, MaterialParams, Scheme, Vec3};

/// Applied field along x3 plus cubic anisotropy, the stiffest point setup.
pub fn cubic_field() -> FieldConfig {
    FieldConfig {
        h_ext: Vec3::new(0.0, 0.0, 1e6),
        anisotropy: AnisotropyModel::canonical(AnisotropyKind::Cub),
        ..Default::default()
    }
}

pub fn damped(alpha: f64) -> MaterialParams {
    MaterialParams::fe_ga().with_alpha(alpha)
}

/// One undamped period in `k` steps.
pub fn rotation(scheme: Scheme, k: usize) -> ExperimentSpec {
    ExperimentSpec::rotation(scheme, k)
}
