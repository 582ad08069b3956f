//! Dense 3-vectors, 3x3 matrices and the closed-form exponential of
//! skew-symmetric matrices.
//!
//! A skew matrix `W` is identified with its axial vector `w` through
//! `W·v = w × v`. For such matrices the Cayley-Hamilton theorem collapses to
//! `W³ = -|w|² W`, so every power series in `W` reduces to a combination of
//! `I`, `W` and `W²`. [`exp_skew`] uses this to evaluate
//! `exp(W) = I + sin(w)/w · W + (1 - cos(w))/w² · W²`, with truncated series
//! below a small-angle threshold.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Tolerance on `max|W + Wᵀ|` accepted by routines that require skew input.
pub const SKEW_TOLERANCE: f64 = 1e-12;

/// Default small-angle threshold for [`exp_skew`].
pub const DEFAULT_EPS_ANGLE: f64 = 1e-4;

/// Determinant magnitude below which [`solve_3x3`] reports a singular system.
pub const SINGULARITY_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);
    pub const E1: Vec3 = Vec3([1.0, 0.0, 0.0]);
    pub const E2: Vec3 = Vec3([0.0, 1.0, 0.0]);
    pub const E3: Vec3 = Vec3([0.0, 0.0, 1.0]);

    pub const fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Vec3([x1, x2, x3])
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        let [a1, a2, a3] = self.0;
        let [b1, b2, b3] = other.0;
        Vec3([a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1])
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn max_abs(self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// Returns `self / |self|`, or `None` when `|self| < min_norm`.
    pub fn normalized(self, min_norm: f64) -> Option<Vec3> {
        let n = self.norm();
        (n >= min_norm).then(|| self * (1.0 / n))
    }

    /// Dyadic product `self ⊗ other`, i.e. the matrix with entries `a_i b_j`.
    pub fn outer(self, other: Vec3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = self.0[i] * other.0[j];
            }
        }
        out
    }

    /// Componentwise linear interpolation `(1 - s)·self + s·other`.
    pub fn lerp(self, other: Vec3, s: f64) -> Vec3 {
        self * (1.0 - s) + other * s
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, rhs: Vec3) {
        *self = *self + rhs;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3(self.0.map(|x| -x))
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3(self.0.map(|x| x * s))
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3(rows)
    }

    pub fn diagonal(d: Vec3) -> Self {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            out.0[i][i] = d.0[i];
        }
        out
    }

    pub fn transpose(&self) -> Mat3 {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| self.0[j][i])))
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// `max|M + Mᵀ|`; zero for an exactly skew-symmetric matrix.
    pub fn skew_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in i..3 {
                worst = worst.max((self.0[i][j] + self.0[j][i]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, rhs: Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] + rhs.0[i][j])
        }))
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.0[i][j] - rhs.0[i][j])
        }))
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        Mat3(self.0.map(|row| row.map(|x| -x)))
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        Mat3(self.0.map(|row| row.map(|x| x * s)))
    }
}

impl Mul<Mat3> for f64 {
    type Output = Mat3;
    fn mul(self, m: Mat3) -> Mat3 {
        m * self
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3(std::array::from_fn(|i| {
            self.0[i][0] * v.0[0] + self.0[i][1] * v.0[1] + self.0[i][2] * v.0[2]
        }))
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j] + self.0[i][2] * rhs.0[2][j]
            })
        }))
    }
}

/// The hat map: the skew matrix `Ω` with `Ω·v = w × v`.
pub fn skew_from_axial(w: Vec3) -> Mat3 {
    let [w1, w2, w3] = w.0;
    Mat3([[0.0, -w3, w2], [w3, 0.0, -w1], [-w2, w1, 0.0]])
}

/// Inverse of [`skew_from_axial`]: `w1 = W32`, `w2 = W13`, `w3 = W21`.
pub fn axial_from_skew(w: &Mat3) -> Result<Vec3> {
    check_skew(w)?;
    Ok(axial_unchecked(w))
}

fn axial_unchecked(w: &Mat3) -> Vec3 {
    Vec3([w.0[2][1], w.0[0][2], w.0[1][0]])
}

fn check_skew(w: &Mat3) -> Result<()> {
    let defect = w.skew_defect();
    if defect > SKEW_TOLERANCE || defect.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "matrix is not skew-symmetric (max|W + Wᵀ| = {defect:e})"
        )));
    }
    Ok(())
}

/// `Ω_[h × m] = m ⊗ h - h ⊗ m`, built entrywise so the result is exactly skew.
pub fn skew_of_cross(h: Vec3, m: Vec3) -> Mat3 {
    m.outer(h) - h.outer(m)
}

/// Cofactor of a skew matrix, `Cof[W] = w ⊗ w`.
pub fn cofactor_skew(w: &Mat3) -> Result<Mat3> {
    let axial = axial_from_skew(w)?;
    Ok(axial.outer(axial))
}

/// Principal invariants of a 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Invariants {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

/// Invariants of a skew matrix: trace and determinant vanish, `I₂ = w·w`.
pub fn invariants_skew(w: &Mat3) -> Invariants {
    let axial = axial_unchecked(w);
    Invariants {
        i1: 0.0,
        i2: axial.dot(axial),
        i3: 0.0,
    }
}

/// Coefficients `(α₁, α₂)` of `exp(W) = I + α₁ W + α₂ W²` for a skew matrix
/// whose axial vector has length `angle`.
///
/// `α₁` switches to its series when `angle < eps`, `α₂` when `angle² < eps`.
pub fn exp_coefficients(angle: f64, eps: f64) -> (f64, f64) {
    let w2 = angle * angle;
    let alpha1 = if angle >= eps {
        angle.sin() / angle
    } else {
        1.0 - w2 / 6.0 + w2 * w2 / 120.0 - w2 * w2 * w2 / 5040.0
    };
    let alpha2 = if w2 >= eps {
        (1.0 - angle.cos()) / w2
    } else {
        0.5 - w2 / 24.0 + w2 * w2 / 720.0
    };
    (alpha1, alpha2)
}

/// Closed-form exponential of a skew-symmetric matrix.
///
/// The result is a rotation about the axial vector `w` by the angle `|w|`.
pub fn exp_skew(w: &Mat3, eps: f64) -> Mat3 {
    let axial = axial_unchecked(w);
    let (alpha1, alpha2) = exp_coefficients(axial.norm(), eps);
    Mat3::IDENTITY + *w * alpha1 + (*w * *w) * alpha2
}

/// Solves `A·x = b` by Gaussian elimination with partial pivoting.
pub fn solve_3x3(a: &Mat3, b: Vec3) -> Result<Vec3> {
    let det = a.det();
    if det.abs() < SINGULARITY_FLOOR || !det.is_finite() {
        return Err(Error::Singular { det });
    }

    let mut m = a.0;
    let mut rhs = b.0;
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if pivot != col {
            m.swap(pivot, col);
            rhs.swap(pivot, col);
        }
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }

    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - tail) / m[row][row];
    }
    Ok(Vec3(x))
}
