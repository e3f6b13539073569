//! Truncated Fourier⊗spinor discretization: Hamiltonian assembly,
//! diagonalization into mode sets and the chiral map between systems.

use std::f64::consts::PI;
use std::fmt;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::algebra::{rotate, SpinorSample};
use crate::error::{Error, Result};
use crate::potentials::{ramp_lambda, sinc, theta_from_v, wrap, PotentialConfig, RampSpec, ThetaField};
use crate::quadrature::{integrate, Adaptive};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Plane waves `e^{ik_n z}/√L`, `k_n = 2πn/L`, `n = −N..N`, times two spinor
/// components. Coefficient vectors use block layout: all upper components
/// first, then all lower components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierBasis {
    box_len: f64,
    cutoff: usize,
}

impl FourierBasis {
    pub fn new(box_len: f64, cutoff: usize) -> Self {
        FourierBasis { box_len, cutoff }
    }

    pub fn of(cfg: &PotentialConfig) -> Self {
        FourierBasis::new(cfg.box_len, cfg.cutoff)
    }

    pub fn box_len(&self) -> f64 {
        self.box_len
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Number of wavenumbers, `2N + 1`.
    pub fn waves(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        2 * self.waves()
    }

    /// Wavenumber of slot `idx ∈ 0..2N+1`.
    pub fn wavenumber(&self, idx: usize) -> f64 {
        self.q(idx as i64 - self.cutoff as i64)
    }

    /// `2πd/L` for an integer offset `d`.
    pub fn q(&self, d: i64) -> f64 {
        2.0 * PI * d as f64 / self.box_len
    }

    pub fn k_max(&self) -> f64 {
        self.q(self.cutoff as i64)
    }

    /// Smallest split distance the basis can resolve, `4/k_max`.
    pub fn min_split(&self) -> f64 {
        4.0 / self.k_max()
    }
}

/// Fourier coefficients, over offsets `d = −2N..2N`, of the functions
/// multiplying `I`, `σ₁`, `σ₂` and `σ₃` in a local 2×2 operator.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalField {
    pub identity: Vec<Complex64>,
    pub sigma1: Vec<Complex64>,
    pub sigma2: Vec<Complex64>,
    pub sigma3: Vec<Complex64>,
}

impl LocalField {
    pub fn zeros(basis: &FourierBasis) -> Self {
        let len = 4 * basis.cutoff + 1;
        LocalField {
            identity: vec![ZERO; len],
            sigma1: vec![ZERO; len],
            sigma2: vec![ZERO; len],
            sigma3: vec![ZERO; len],
        }
    }

    /// 2×2 block coupling slot `n` to slot `n′` with `d = n − n′`, entries
    /// `[uu, ul, lu, ll]`.
    pub fn block(&self, centre: usize, d: i64) -> [Complex64; 4] {
        let i = (centre as i64 + d) as usize;
        let (id, s1, s2, s3) = (self.identity[i], self.sigma1[i], self.sigma2[i], self.sigma3[i]);
        [id + s3, s1 - I * s2, s1 + I * s2, id - s3]
    }
}

/// Which Hamiltonian a matrix or mode set belongs to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SystemLabel {
    A,
    B,
    General { t: f64 },
}

impl fmt::Display for SystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemLabel::A => write!(f, "A"),
            SystemLabel::B => write!(f, "B"),
            SystemLabel::General { t } => write!(f, "general(t={t})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HamiltonianMatrix {
    pub matrix: Mat<Complex64>,
    pub label: SystemLabel,
    pub basis: FourierBasis,
    /// Mass scale used for the gap test.
    pub mass_scale: f64,
}

impl HamiltonianMatrix {
    /// `max |H − H†|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let h = &self.matrix;
        let n = h.nrows();
        let mut worst = 0.0f64;
        for c in 0..n {
            for r in c..n {
                worst = worst.max((h[(r, c)] - h[(c, r)].conj()).norm());
            }
        }
        worst
    }
}

/// Dense matrix of `σ₁k + L(z)` where `L` is a local field; pass
/// `kinetic = false` to drop the derivative term.
pub fn dense_operator(basis: &FourierBasis, field: &LocalField, kinetic: bool) -> Mat<Complex64> {
    let nw = basis.waves();
    let centre = 2 * basis.cutoff;
    let mut m = Mat::<Complex64>::zeros(2 * nw, 2 * nw);
    for c in 0..nw {
        for r in 0..nw {
            let b = field.block(centre, r as i64 - c as i64);
            m[(r, c)] = b[0];
            m[(r, nw + c)] = b[1];
            m[(nw + r, c)] = b[2];
            m[(nw + r, nw + c)] = b[3];
        }
        if kinetic {
            let k = Complex64::new(basis.wavenumber(c), 0.0);
            m[(c, nw + c)] += k;
            m[(nw + c, c)] += k;
        }
    }
    m
}

/// Precomputed Fourier data for one configuration.
#[derive(Clone, Debug)]
pub struct SpectralModel {
    pub cfg: PotentialConfig,
    pub basis: FourierBasis,
    pub theta: ThetaField,
    v_hat: Vec<Complex64>,
    mass_hat: Vec<Complex64>,
    theta2_hat: Vec<Complex64>,
}

impl SpectralModel {
    pub fn new(cfg: &PotentialConfig) -> Result<Self> {
        cfg.validate()?;
        let basis = FourierBasis::of(cfg);
        let theta = theta_from_v(cfg);
        let offsets = offsets(&basis);
        let l = cfg.box_len;
        let segs = cfg.segments();
        let v_hat = offsets
            .iter()
            .map(|&d| {
                let q = basis.q(d);
                segs.iter()
                    .map(|s| {
                        let h = s.z1 - s.z0;
                        let zm = 0.5 * (s.z0 + s.z1);
                        Complex64::from_polar(s.v * h * sinc(0.5 * q * h), -q * zm)
                    })
                    .sum::<Complex64>()
                    / l
            })
            .collect();
        let mass_hat = match cfg.mass_profile {
            None => offsets
                .iter()
                .map(|&d| if d == 0 { Complex64::new(cfg.m, 0.0) } else { ZERO })
                .collect(),
            Some(_) => offsets.iter().map(|&d| theta.exp_coefficient(0.0, basis.q(d))).collect(),
        };
        let theta2_hat = offsets
            .par_iter()
            .map(|&d| {
                let q = basis.q(d);
                let mut acc = ZERO;
                for s in theta.segments() {
                    let peak = theta.theta2(s.z0).abs().max(theta.theta2(s.z1).abs());
                    let (v, _) = integrate(
                        |z| theta.theta2(z) * Complex64::from_polar(1.0, -q * z),
                        s.z0,
                        s.z1,
                        panels_for(q.abs(), s.z1 - s.z0, peak, q.abs() * s.z0.abs().max(s.z1.abs())),
                        "Fourier coefficient of the theta antiderivative",
                    )?;
                    acc += v;
                }
                Ok(acc / l)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralModel {
            cfg: cfg.clone(),
            basis,
            theta,
            v_hat,
            mass_hat,
            theta2_hat,
        })
    }

    pub fn potential_coefficients(&self) -> &[Complex64] {
        &self.v_hat
    }

    pub fn local_a(&self) -> LocalField {
        let mut f = LocalField::zeros(&self.basis);
        f.identity.clone_from(&self.v_hat);
        f.sigma3.clone_from(&self.mass_hat);
        f
    }

    /// Mass-phase field with coefficients from adaptive quadrature.
    pub fn local_b(&self) -> Result<LocalField> {
        let (cos, sin) = quadrature_trig_coefficients(&self.theta, &self.basis, 1.0)?;
        let mut f = LocalField::zeros(&self.basis);
        f.sigma3 = cos;
        f.sigma2 = sin.into_iter().map(|s| -s).collect();
        Ok(f)
    }

    /// Interpolating field at ramp value `lambda` and `λ″ = lambda_dd`, with
    /// closed-form mass-phase coefficients.
    pub fn local_general(&self, lambda: f64, lambda_dd: f64) -> LocalField {
        let mut f = LocalField::zeros(&self.basis);
        for (i, &d) in offsets(&self.basis).iter().enumerate() {
            let (c, s) = self.theta.trig_coefficients(lambda, self.basis.q(d));
            f.sigma3[i] = c;
            f.sigma2[i] = -s;
            f.identity[i] = (1.0 - lambda) * self.v_hat[i] - 0.5 * lambda_dd * self.theta2_hat[i];
        }
        f
    }

    pub fn local_at(&self, ramp: RampSpec, t: f64) -> LocalField {
        let (lam, _, dd) = ramp_lambda(ramp, t);
        self.local_general(lam, dd)
    }

    fn wrap_matrix(&self, field: &LocalField, label: SystemLabel) -> HamiltonianMatrix {
        HamiltonianMatrix {
            matrix: dense_operator(&self.basis, field, true),
            label,
            basis: self.basis,
            mass_scale: self.cfg.m,
        }
    }

    pub fn hamiltonian_a(&self) -> HamiltonianMatrix {
        self.wrap_matrix(&self.local_a(), SystemLabel::A)
    }

    pub fn hamiltonian_b(&self) -> Result<HamiltonianMatrix> {
        Ok(self.wrap_matrix(&self.local_b()?, SystemLabel::B))
    }

    pub fn hamiltonian_general(&self, ramp: RampSpec, t: f64) -> HamiltonianMatrix {
        self.wrap_matrix(&self.local_at(ramp, t), SystemLabel::General { t })
    }

    /// Truncated matrix of the position-space rotation `e^{−iγ⁵θ(z)/2}`.
    pub fn rotation_matrix(&self) -> Result<Mat<Complex64>> {
        let (cos, sin) = quadrature_trig_coefficients(&self.theta, &self.basis, 0.5)?;
        let mut f = LocalField::zeros(&self.basis);
        f.identity = cos;
        f.sigma1 = sin.into_iter().map(|s| -I * s).collect();
        Ok(dense_operator(&self.basis, &f, false))
    }
}

fn offsets(basis: &FourierBasis) -> Vec<i64> {
    let n = 2 * basis.cutoff as i64;
    (-n..=n).collect()
}

/// Quadrature settings for an integrand of size `magnitude` whose phase
/// reaches `phase` radians; the phase bounds the attainable accuracy.
fn panels_for(freq: f64, width: f64, magnitude: f64, phase: f64) -> Adaptive {
    Adaptive {
        abs_tol: 1e-14 * (magnitude * width).max(1.0) * phase.max(1.0),
        initial_panels: (freq * width / PI).ceil() as usize + 1,
        max_panels: 200_000,
    }
}

/// Coefficients of `M cos(λθ)` and `M sin(λθ)` by adaptive quadrature.
pub fn quadrature_trig_coefficients(
    theta: &ThetaField,
    basis: &FourierBasis,
    lambda: f64,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let offs = offsets(basis);
    let l = theta.box_len();
    let plus: Vec<Complex64> = offs
        .par_iter()
        .map(|&d| {
            let q = basis.q(d);
            let mut acc = ZERO;
            for s in theta.segments() {
                let slope = -2.0 * s.v;
                let freq = (lambda * slope - q).abs();
                let phase = lambda.abs() * theta.theta(s.z0).abs().max(theta.theta(s.z1).abs())
                    + q.abs() * s.z0.abs().max(s.z1.abs());
                let (v, _) = integrate(
                    |z| Complex64::from_polar(s.mass, lambda * theta.theta(z) - q * z),
                    s.z0,
                    s.z1,
                    panels_for(freq, s.z1 - s.z0, s.mass, phase),
                    "mass-phase Fourier coefficient",
                )?;
                acc += v;
            }
            Ok(acc / l)
        })
        .collect::<Result<_>>()?;
    let last = plus.len() - 1;
    let cos = (0..plus.len()).map(|i| 0.5 * (plus[i] + plus[last - i].conj())).collect();
    let sin = (0..plus.len())
        .map(|i| (plus[i] - plus[last - i].conj()) / (2.0 * I))
        .collect();
    Ok((cos, sin))
}

pub fn assemble_a(cfg: &PotentialConfig) -> Result<HamiltonianMatrix> {
    Ok(SpectralModel::new(cfg)?.hamiltonian_a())
}

pub fn assemble_b(cfg: &PotentialConfig) -> Result<HamiltonianMatrix> {
    SpectralModel::new(cfg)?.hamiltonian_b()
}

pub fn assemble_general(cfg: &PotentialConfig, ramp: RampSpec, t: f64) -> Result<HamiltonianMatrix> {
    Ok(SpectralModel::new(cfg)?.hamiltonian_general(ramp, t))
}

/// Bookkeeping attached to a mode set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModeMetadata {
    /// Largest norm fraction lost when re-expanding in the basis.
    pub projection_loss: Option<f64>,
    pub warnings: Vec<String>,
}

/// Eigenmodes sorted by energy. When `frame` is set, mode `i` is
/// `e^{−iγ⁵θ(z)/2}` applied to the Fourier series held in column `i`.
#[derive(Clone, Debug)]
pub struct ModeSet {
    basis: FourierBasis,
    label: SystemLabel,
    energies: Vec<f64>,
    coeffs: Mat<Complex64>,
    frame: Option<ThetaField>,
    pub metadata: ModeMetadata,
}

/// Mode values on a point set: `upper[(p, i)]` is mode `i` at point `p`.
#[derive(Clone, Debug)]
pub struct ModeValues {
    pub upper: Mat<Complex64>,
    pub lower: Mat<Complex64>,
}

impl ModeValues {
    pub fn sample(&self, p: usize, i: usize) -> SpinorSample {
        SpinorSample::new(self.upper[(p, i)], self.lower[(p, i)])
    }
}

/// Sorted eigenvalues only, with the same Hermiticity and gap checks as
/// [`diagonalize`].
pub fn eigenvalues(h: &HamiltonianMatrix) -> Result<Vec<f64>> {
    let residual = h.hermiticity_residual();
    if residual > 1e-12 {
        return Err(Error::NotHermitian { residual });
    }
    let energies = h
        .matrix
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::EigenSolver(format!("{e:?}")))?;
    let min_abs = energies.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
    if min_abs < 1e-8 * h.mass_scale {
        return Err(Error::GapClosed { min_abs });
    }
    Ok(energies)
}

pub fn diagonalize(h: &HamiltonianMatrix) -> Result<ModeSet> {
    let residual = h.hermiticity_residual();
    if residual > 1e-12 {
        return Err(Error::NotHermitian { residual });
    }
    let evd = h
        .matrix
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::EigenSolver(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let n = s.nrows();
    let energies: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let min_abs = energies.iter().fold(f64::INFINITY, |a, e| a.min(e.abs()));
    if min_abs < 1e-8 * h.mass_scale {
        return Err(Error::GapClosed { min_abs });
    }
    let basis = h.basis;
    let nw = basis.waves();
    let mean_k = |col: usize| -> f64 {
        (0..nw)
            .map(|r| basis.wavenumber(r) * (u[(r, col)].norm_sqr() + u[(nw + r, col)].norm_sqr()))
            .sum()
    };
    let mut order: Vec<usize> = (0..n).collect();
    // ties broken by wavenumber content inside clusters of equal energy
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && energies[end] - energies[end - 1] <= 1e-10 * energies[end].abs().max(1.0) {
            end += 1;
        }
        if end - start > 1 {
            let mut keyed: Vec<(f64, usize)> = order[start..end].iter().map(|&c| (mean_k(c), c)).collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (slot, (_, c)) in order[start..end].iter_mut().zip(keyed) {
                *slot = c;
            }
        }
        start = end;
    }
    let mut coeffs = Mat::<Complex64>::zeros(n, n);
    let mut sorted = Vec::with_capacity(n);
    for (j, &c) in order.iter().enumerate() {
        sorted.push(energies[c]);
        let col = u.col(c);
        let mut best = (0usize, -1.0f64);
        for r in 0..n {
            let a = col[r].norm();
            if a > best.1 {
                best = (r, a);
            }
        }
        let phase = col[best.0].conj() / best.1;
        for r in 0..n {
            coeffs[(r, j)] = col[r] * phase;
        }
        coeffs[(best.0, j)] = Complex64::new(best.1, 0.0);
    }
    Ok(ModeSet {
        basis,
        label: h.label,
        energies: sorted,
        coeffs,
        frame: None,
        metadata: ModeMetadata::default(),
    })
}

impl ModeSet {
    pub fn basis(&self) -> &FourierBasis {
        &self.basis
    }

    pub fn label(&self) -> SystemLabel {
        self.label
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.len() == self.basis.dim()
    }

    pub fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::IncompleteModeSet {
                have: self.len(),
                need: self.basis.dim(),
            })
        }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `j = sign(E)`.
    pub fn sign(&self, i: usize) -> i8 {
        if self.energies[i] > 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn coefficients(&self) -> MatRef<'_, Complex64> {
        self.coeffs.as_ref()
    }

    pub fn frame(&self) -> Option<&ThetaField> {
        self.frame.as_ref()
    }

    /// `max |C†C − I|` of the coefficient matrix.
    pub fn gram_residual(&self) -> f64 {
        let n = self.len();
        let mut g = Mat::<Complex64>::zeros(n, n);
        let c = self.coeffs.as_ref();
        matmul(g.as_mut(), Accum::Replace, c.adjoint(), c, Complex64::new(1.0, 0.0), Par::Seq);
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Mode `i` at `z` inside the box.
    pub fn evaluate_mode(&self, i: usize, z: f64) -> Result<SpinorSample> {
        let h = 0.5 * self.basis.box_len;
        if !(z.abs() <= h) {
            return Err(Error::Domain { z, half: h });
        }
        Ok(self.evaluate_periodic(i, z))
    }

    /// Mode `i` at any real `z`, using the periodicity of the box.
    pub fn evaluate_periodic(&self, i: usize, z: f64) -> SpinorSample {
        let nw = self.basis.waves();
        let norm = 1.0 / self.basis.box_len.sqrt();
        let mut s = SpinorSample::new(ZERO, ZERO);
        for r in 0..nw {
            let w = Complex64::from_polar(norm, self.basis.wavenumber(r) * z);
            s.upper += self.coeffs[(r, i)] * w;
            s.lower += self.coeffs[(nw + r, i)] * w;
        }
        match &self.frame {
            Some(th) => rotate(th.theta_periodic(z), s),
            None => s,
        }
    }

    /// All modes at all `points` (periodic continuation outside the box).
    pub fn values_at(&self, points: &[f64]) -> ModeValues {
        const CHUNK: usize = 64;
        let nw = self.basis.waves();
        let nm = self.len();
        let norm = 1.0 / self.basis.box_len.sqrt();
        let cu = self.coeffs.as_ref().subrows(0, nw);
        let cl = self.coeffs.as_ref().subrows(nw, nw);
        let parts: Vec<(Mat<Complex64>, Mat<Complex64>)> = points
            .par_chunks(CHUNK)
            .map(|chunk| {
                let phi = Mat::<Complex64>::from_fn(chunk.len(), nw, |p, r| {
                    Complex64::from_polar(norm, self.basis.wavenumber(r) * chunk[p])
                });
                let mut up = Mat::<Complex64>::zeros(chunk.len(), nm);
                let mut lo = Mat::<Complex64>::zeros(chunk.len(), nm);
                let one = Complex64::new(1.0, 0.0);
                matmul(up.as_mut(), Accum::Replace, phi.as_ref(), cu, one, Par::Seq);
                matmul(lo.as_mut(), Accum::Replace, phi.as_ref(), cl, one, Par::Seq);
                if let Some(th) = &self.frame {
                    for (p, &z) in chunk.iter().enumerate() {
                        let angle = th.theta_periodic(z);
                        for i in 0..nm {
                            let s = rotate(angle, SpinorSample::new(up[(p, i)], lo[(p, i)]));
                            up[(p, i)] = s.upper;
                            lo[(p, i)] = s.lower;
                        }
                    }
                }
                (up, lo)
            })
            .collect();
        let mut upper = Mat::<Complex64>::zeros(points.len(), nm);
        let mut lower = Mat::<Complex64>::zeros(points.len(), nm);
        for (c, (up, lo)) in parts.into_iter().enumerate() {
            let off = c * CHUNK;
            upper.as_mut().subrows_mut(off, up.nrows()).copy_from(&up);
            lower.as_mut().subrows_mut(off, lo.nrows()).copy_from(&lo);
        }
        ModeValues { upper, lower }
    }

    /// Re-expands every mode in the plain Fourier basis using a uniform
    /// grid `oversample` times finer than the basis, recording the lost
    /// norm fraction.
    pub fn project(&self, oversample: usize) -> ModeSet {
        if self.frame.is_none() {
            return self.clone();
        }
        let nw = self.basis.waves();
        let p = (oversample.max(2) * nw).next_power_of_two();
        let l = self.basis.box_len;
        let grid: Vec<f64> = (0..p).map(|j| -0.5 * l + l * j as f64 / p as f64).collect();
        let vals = self.values_at(&grid);
        let fft = FftPlanner::<f64>::new().plan_fft_forward(p);
        let n = self.basis.cutoff as i64;
        let scale = l.sqrt() / p as f64;
        let columns: Vec<(Vec<Complex64>, f64)> = (0..self.len())
            .into_par_iter()
            .map(|i| {
                let mut out = vec![ZERO; 2 * nw];
                for (comp, m) in [&vals.upper, &vals.lower].into_iter().enumerate() {
                    let mut buf: Vec<Complex64> = (0..p).map(|j| m[(j, i)]).collect();
                    fft.process(&mut buf);
                    for r in 0..nw {
                        let d = r as i64 - n;
                        let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        out[comp * nw + r] = buf[d.rem_euclid(p as i64) as usize] * (scale * sign);
                    }
                }
                let kept: f64 = out.iter().map(|c| c.norm_sqr()).sum();
                (out, (1.0 - kept).max(0.0))
            })
            .collect();
        let mut coeffs = Mat::<Complex64>::zeros(2 * nw, self.len());
        let mut worst = 0.0f64;
        for (i, (col, loss)) in columns.into_iter().enumerate() {
            for (r, c) in col.into_iter().enumerate() {
                coeffs[(r, i)] = c;
            }
            worst = worst.max(loss);
        }
        let mut metadata = self.metadata.clone();
        metadata.projection_loss = Some(worst);
        if worst > 1e-6 {
            metadata
                .warnings
                .push(format!("projection onto the basis lost up to {worst:.3e} of a mode's norm"));
        }
        ModeSet {
            basis: self.basis,
            label: self.label,
            energies: self.energies.clone(),
            coeffs,
            frame: None,
            metadata,
        }
    }

    /// Coefficient vector of mode `i` (unframed sets only).
    pub fn coefficient_vector(&self, i: usize) -> Vec<Complex64> {
        self.coeffs.col(i).iter().copied().collect()
    }

    /// Index range of the modes with `j = −1`.
    pub fn negative_count(&self) -> usize {
        self.energies.partition_point(|&e| e < 0.0)
    }
}

/// System-B modes obtained from System-A modes by the local chiral rotation.
pub fn chiral_map_modes(modes_a: &ModeSet, theta: &ThetaField) -> Result<ModeSet> {
    if modes_a.frame.is_some() {
        return Err(Error::InvalidConfig {
            field: "modes",
            reason: "mode set already carries a chiral frame".into(),
        });
    }
    if (theta.box_len() - modes_a.basis.box_len).abs() > 1e-12 {
        return Err(Error::InvalidConfig {
            field: "L",
            reason: "theta field and modes live in different boxes".into(),
        });
    }
    let mut out = modes_a.clone();
    out.label = SystemLabel::B;
    out.frame = Some(theta.clone());
    let jump = theta.seam_jump();
    if jump.abs() > 1e-12 {
        out.metadata
            .warnings
            .push(format!("theta jumps by {jump:.3e} across the box seam"));
    }
    Ok(out)
}

/// Level-by-level comparison of two sorted spectra inside `|E| ≤ window`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumComparison {
    pub max_diff: f64,
    pub compared: usize,
}

pub fn compare_spectra(a: &[f64], b: &[f64], window: f64) -> SpectrumComparison {
    let mut max_diff = 0.0f64;
    let mut compared = 0;
    for (x, y) in a.iter().zip(b) {
        if x.abs() <= window && y.abs() <= window {
            max_diff = max_diff.max((x - y).abs());
            compared += 1;
        }
    }
    SpectrumComparison { max_diff, compared }
}

/// Applies a dense operator to a coefficient vector.
pub fn apply_dense(m: &Mat<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = m.nrows();
    (0..n)
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum())
        .collect()
}

/// Periodic position of `z` inside the box.
pub fn wrap_to_box(basis: &FourierBasis, z: f64) -> f64 {
    wrap(z, basis.box_len)
}
