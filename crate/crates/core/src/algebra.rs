//! Two-dimensional gamma matrices, spinor values and chiral rotations.
//!
//! The representation is fixed once for the whole crate: `γ⁰ = σ₃`,
//! `γ⁵ = σ₁` and `γ¹ = γ⁰γ⁵`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A plain 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub fn scale(self, s: Complex64) -> Self {
        let m = self.0;
        Mat2::new(s * m[0][0], s * m[0][1], s * m[1][0], s * m[1][1])
    }

    /// Conjugate transpose.
    pub fn adjoint(self) -> Self {
        let m = self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    /// Largest entry magnitude.
    pub fn max_abs(self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(self, s: SpinorSample) -> SpinorSample {
        let m = self.0;
        SpinorSample {
            upper: m[0][0] * s.upper + m[0][1] * s.lower,
            lower: m[1][0] * s.upper + m[1][1] * s.lower,
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

/// Value of a two-component wave function at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinorSample {
    pub upper: Complex64,
    pub lower: Complex64,
}

impl SpinorSample {
    pub const fn new(upper: Complex64, lower: Complex64) -> Self {
        SpinorSample { upper, lower }
    }

    pub fn is_finite(&self) -> bool {
        self.upper.is_finite() && self.lower.is_finite()
    }

    /// `self† other`
    pub fn inner(&self, other: &SpinorSample) -> Complex64 {
        self.upper.conj() * other.upper + self.lower.conj() * other.lower
    }

    pub fn norm_sqr(&self) -> f64 {
        self.upper.norm_sqr() + self.lower.norm_sqr()
    }

    pub fn scale(self, s: Complex64) -> Self {
        SpinorSample::new(s * self.upper, s * self.lower)
    }
}

/// The gamma matrices of the fixed representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaRep {
    pub gamma0: Mat2,
    pub gamma1: Mat2,
    pub gamma5: Mat2,
}

/// `γ⁰ = σ₃`, `γ⁵ = σ₁`, `γ¹ = γ⁰γ⁵ = iσ₂`.
pub fn standard_rep() -> GammaRep {
    let gamma0 = Mat2::new(ONE, ZERO, ZERO, -ONE);
    let gamma5 = Mat2::new(ZERO, ONE, ONE, ZERO);
    GammaRep {
        gamma0,
        gamma1: gamma0 * gamma5,
        gamma5,
    }
}

impl GammaRep {
    /// Largest residual over the defining relations of the algebra.
    pub fn algebra_residual(&self) -> f64 {
        let id = Mat2::identity();
        let (g0, g1, g5) = (self.gamma0, self.gamma1, self.gamma5);
        [
            (g0 * g1 + g1 * g0).max_abs(),
            (g0 * g0 - id).max_abs(),
            (g1 * g1 + id).max_abs(),
            (g0.adjoint() - g0).max_abs(),
            (g1.adjoint() + g1).max_abs(),
            (g5 - g0 * g1).max_abs(),
            (g5.adjoint() - g5).max_abs(),
            (g5 * g5 - id).max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `e^{-iγ⁵θ/2} = cos(θ/2)·I − i·sin(θ/2)·γ⁵`.
pub fn chiral_rotation(theta: f64) -> Mat2 {
    let (s, c) = (0.5 * theta).sin_cos();
    Mat2::identity().scale(c.into()) - standard_rep().gamma5.scale(I * s)
}

/// `e^{iγ⁵θ} = cos θ·I + i·sin θ·γ⁵`, the pseudoscalar mass phase.
pub fn mass_phase(theta: f64) -> Mat2 {
    chiral_rotation(-2.0 * theta)
}

/// Applies `e^{-iγ⁵θ/2}` to a spinor without building the matrix.
#[inline]
pub fn rotate(theta: f64, s: SpinorSample) -> SpinorSample {
    let (sn, c) = (0.5 * theta).sin_cos();
    let mis = Complex64::new(0.0, -sn);
    SpinorSample::new(c * s.upper + mis * s.lower, c * s.lower + mis * s.upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn standard_rep_entries() {
        let g = standard_rep();
        assert_eq!(g.gamma5, Mat2::new(c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)));
        assert_eq!(g.gamma0 * g.gamma0, Mat2::identity());
        // σ₃σ₁ worked by hand: ((0, 1), (−1, 0)).
        assert_eq!(g.gamma1, Mat2::new(c(0., 0.), c(1., 0.), c(-1., 0.), c(0., 0.)));
        assert_eq!((g.gamma5 * g.gamma0 + g.gamma0 * g.gamma5).max_abs(), 0.0);
        assert!(g.algebra_residual() < 1e-14);
    }

    #[test]
    fn rotation_at_zero_is_identity() {
        assert_eq!(chiral_rotation(0.0), Mat2::identity());
    }

    #[test]
    fn rotation_is_unitary() {
        let u = chiral_rotation(0.7);
        assert!((u.adjoint() * u - Mat2::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn rotation_passes_through_gamma0_with_sign_flip() {
        let g0 = standard_rep().gamma0;
        for &t in &[-3.1, -0.2, 0.0, 0.9, 2.5, 7.0] {
            let lhs = chiral_rotation(-t) * g0;
            let rhs = g0 * chiral_rotation(t);
            assert!((lhs - rhs).max_abs() < 1e-14);
        }
    }

    #[test]
    fn mass_phase_matches_cos_sin_form() {
        let g5 = standard_rep().gamma5;
        let t = 1.3_f64;
        let expected = Mat2::identity().scale(t.cos().into()) + g5.scale(I * t.sin());
        assert!((mass_phase(t) - expected).max_abs() < 1e-15);
    }

    #[test]
    fn rotate_matches_matrix() {
        let s = SpinorSample::new(c(0.3, -1.0), c(2.0, 0.5));
        let a = rotate(0.83, s);
        let b = chiral_rotation(0.83).apply(s);
        assert!((a.upper - b.upper).norm() < 1e-15 && (a.lower - b.lower).norm() < 1e-15);
    }
}
