//! Vacuum charge densities from mode sums, the point-split γ⁵ bilinear,
//! free-field analytics and the anomaly bookkeeping built on them.
//!
//! All densities use the half-commutator convention
//! `ρ = ½(Σ_{E<0} − Σ_{E>0})`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potentials::{PotentialConfig, ThetaField};
use crate::quadrature::{integrate, integrate_real, Adaptive};
use crate::spectral::{ModeSet, ModeValues, SystemLabel};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative tolerance of the anomaly plateau against `V/π`.
pub const PLATEAU_TOL: f64 = 0.05;
/// Relative tolerance of the Capri shift against `−V/π`.
pub const CAPRI_TOL: f64 = 0.10;
/// Tolerance, relative to `|V|/π`, of the bilinear reconstruction.
pub const IDENTITY_TOL: f64 = 0.02;
/// Damping scale used for unregularized sums when none is configured.
pub const DEFAULT_DAMPING: f64 = 5.0;

/// Energy weighting of a mode sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regulator {
    /// Every mode of the truncated basis with unit weight.
    Sharp,
    /// Weight `e^{−(E/Λ)²}`.
    Gaussian(f64),
}

impl Regulator {
    pub fn weight(&self, e: f64) -> f64 {
        match *self {
            Regulator::Sharp => 1.0,
            Regulator::Gaussian(l) => (-(e / l) * (e / l)).exp(),
        }
    }

    pub fn scale(&self) -> Option<f64> {
        match *self {
            Regulator::Sharp => None,
            Regulator::Gaussian(l) => Some(l),
        }
    }

    /// Damping of unregularized sums for a configuration.
    pub fn for_unreg(cfg: &PotentialConfig) -> Self {
        Regulator::Gaussian(cfg.lambda_damp.unwrap_or(DEFAULT_DAMPING))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMeta {
    pub epsilon: Option<f64>,
    pub cutoff: usize,
    pub damping: Option<f64>,
    pub system: SystemLabel,
    pub convention: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityProfile {
    pub z: Vec<f64>,
    pub values: Vec<f64>,
    pub meta: DensityMeta,
}

impl DensityProfile {
    pub fn sup_distance(&self, other: &DensityProfile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn meta(modes: &ModeSet, epsilon: Option<f64>, reg: Regulator) -> DensityMeta {
    DensityMeta {
        epsilon,
        cutoff: modes.basis().cutoff(),
        damping: reg.scale(),
        system: modes.label(),
        convention: "half-commutator",
    }
}

/// `w_m = −sign(E_m)·g(E_m)`.
fn charge_weights(modes: &ModeSet, reg: Regulator) -> Vec<f64> {
    modes
        .energies()
        .iter()
        .map(|&e| -e.signum() * reg.weight(e))
        .collect()
}

/// Weights selecting the filled sea only, `g(E)` for `E < 0`.
fn sea_weights(modes: &ModeSet, reg: Regulator) -> Vec<f64> {
    modes
        .energies()
        .iter()
        .map(|&e| if e < 0.0 { reg.weight(e) } else { 0.0 })
        .collect()
}

fn check_epsilon(modes: &ModeSet, epsilon: f64) -> Result<()> {
    let minimum = modes.basis().min_split();
    if epsilon.abs() < minimum * (1.0 - 1e-12) {
        return Err(Error::EpsilonTooSmall { epsilon, minimum });
    }
    Ok(())
}

/// Unregularized density `½ Σ_m w_m |u_m(z)|²` from precomputed values.
pub fn unreg_from_values(vals: &ModeValues, weights: &[f64]) -> Vec<f64> {
    (0..vals.upper.nrows())
        .into_par_iter()
        .map(|p| {
            0.5 * weights
                .iter()
                .enumerate()
                .map(|(m, w)| w * (vals.upper[(p, m)].norm_sqr() + vals.lower[(p, m)].norm_sqr()))
                .sum::<f64>()
        })
        .collect()
}

pub fn density_unreg(modes: &ModeSet, grid: &[f64], reg: Regulator) -> Result<DensityProfile> {
    modes.require_complete()?;
    let vals = modes.values_at(grid);
    Ok(DensityProfile {
        z: grid.to_vec(),
        values: unreg_from_values(&vals, &charge_weights(modes, reg)),
        meta: meta(modes, None, reg),
    })
}

/// Per-point results of the split sums between values at `z` and `z + ε`.
struct SplitSums {
    density: Vec<f64>,
    residue: f64,
}

fn split_density(v0: &ModeValues, v1: &ModeValues, weights: &[f64]) -> SplitSums {
    let rows: Vec<(f64, f64)> = (0..v0.upper.nrows())
        .into_par_iter()
        .map(|p| {
            let (mut t1, mut t2) = (ZERO, ZERO);
            let mut scale = 0.0;
            for (m, &w) in weights.iter().enumerate() {
                let (a0, b0) = (v0.upper[(p, m)], v0.lower[(p, m)]);
                let (a1, b1) = (v1.upper[(p, m)], v1.lower[(p, m)]);
                let x = a1.conj() * a0 + b1.conj() * b0;
                let y = a0.conj() * a1 + b0.conj() * b1;
                t1 += x * w;
                t2 += y * w;
                scale += w.abs() * x.norm();
            }
            let s = t1 + t2;
            (0.25 * s.re, s.im.abs() / scale.max(f64::MIN_POSITIVE))
        })
        .collect();
    SplitSums {
        density: rows.iter().map(|r| r.0).collect(),
        residue: rows.iter().map(|r| r.1).fold(0.0, f64::max),
    }
}

/// `Σ_m w_m [u†(z+ε)γ⁵u(z) − u†(z)γ⁵u(z+ε)]` per point.
fn split_bilinear(v0: &ModeValues, v1: &ModeValues, weights: &[f64]) -> Vec<Complex64> {
    (0..v0.upper.nrows())
        .into_par_iter()
        .map(|p| {
            let mut acc = ZERO;
            for (m, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let (a0, b0) = (v0.upper[(p, m)], v0.lower[(p, m)]);
                let (a1, b1) = (v1.upper[(p, m)], v1.lower[(p, m)]);
                let fwd = a1.conj() * b0 + b1.conj() * a0;
                let bwd = a0.conj() * b1 + b0.conj() * a1;
                acc += (fwd - bwd) * w;
            }
            acc
        })
        .collect()
}

fn shifted(grid: &[f64], epsilon: f64) -> Vec<f64> {
    grid.iter().map(|z| z + epsilon).collect()
}

/// Point-split density `¼ Σ_m w_m [u†(z+ε)u(z) + u†(z)u(z+ε)]`.
pub fn density_split(modes: &ModeSet, grid: &[f64], epsilon: f64, reg: Regulator) -> Result<DensityProfile> {
    modes.require_complete()?;
    check_epsilon(modes, epsilon)?;
    let v0 = modes.values_at(grid);
    let v1 = modes.values_at(&shifted(grid, epsilon));
    split_profile(modes, &v0, &v1, grid, epsilon, reg)
}

fn split_profile(
    modes: &ModeSet,
    v0: &ModeValues,
    v1: &ModeValues,
    grid: &[f64],
    epsilon: f64,
    reg: Regulator,
) -> Result<DensityProfile> {
    let sums = split_density(v0, v1, &charge_weights(modes, reg));
    if sums.residue > 1e-10 {
        return Err(Error::Window(format!(
            "split density has imaginary residue {:.3e}",
            sums.residue
        )));
    }
    Ok(DensityProfile {
        z: grid.to_vec(),
        values: sums.density,
        meta: meta(modes, Some(epsilon), reg),
    })
}

/// How the two halves of the spectrum enter the bilinear.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BilinearForm {
    /// Sum over the filled sea only.
    Sea,
    /// `½(Σ_{E<0} − Σ_{E>0})`, the half-commutator form; equal to `Sea`
    /// for unit weights on an unrotated complete set.
    HalfCommutator,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilinearSample {
    pub z: f64,
    pub epsilon: f64,
    pub value: Complex64,
}

impl BilinearSample {
    /// `|Re| / |value|`.
    pub fn real_fraction(&self) -> f64 {
        self.value.re.abs() / self.value.norm().max(f64::MIN_POSITIVE)
    }
}

fn bilinear_weights(modes: &ModeSet, reg: Regulator, form: BilinearForm) -> Vec<f64> {
    match form {
        BilinearForm::Sea => sea_weights(modes, reg),
        BilinearForm::HalfCommutator => charge_weights(modes, reg).into_iter().map(|w| 0.5 * w).collect(),
    }
}

/// The γ⁵ two-point bracket summed over the filled sea.
pub fn gamma5_bilinear(modes: &ModeSet, z: f64, epsilon: f64, reg: Regulator) -> Result<BilinearSample> {
    gamma5_bilinear_profile(modes, &[z], epsilon, reg, BilinearForm::Sea).map(|v| v[0])
}

pub fn gamma5_bilinear_profile(
    modes: &ModeSet,
    grid: &[f64],
    epsilon: f64,
    reg: Regulator,
    form: BilinearForm,
) -> Result<Vec<BilinearSample>> {
    modes.require_complete()?;
    check_epsilon(modes, epsilon)?;
    let v0 = modes.values_at(grid);
    let v1 = modes.values_at(&shifted(grid, epsilon));
    let vals = split_bilinear(&v0, &v1, &bilinear_weights(modes, reg, form));
    Ok(grid
        .iter()
        .zip(vals)
        .map(|(&z, value)| BilinearSample { z, epsilon, value })
        .collect())
}

/// `∫ρ dz = ½ Σ_m w_m` for normalized modes.
pub fn total_charge(modes: &ModeSet, reg: Regulator) -> f64 {
    0.5 * charge_weights(modes, reg).iter().sum::<f64>()
}

/// Free plane-wave spinor `w_{j,p}` for `e^{+ipz}` modes, in the form
/// `N(1, p/(E+m))` with `N = √((E+m)/2E)`, evaluated stably for `j = −1`.
pub fn free_spinor(j: i8, p: f64, m: f64) -> (f64, f64) {
    let e = p.hypot(m);
    if j > 0 {
        let n = ((e + m) / (2.0 * e)).sqrt();
        (n, p / (2.0 * e * (e + m)).sqrt())
    } else {
        let upper = p.abs() / (2.0 * e * (e + m)).sqrt();
        let lower = ((e + m) / (2.0 * e)).sqrt();
        (upper, if p < 0.0 { lower } else { -lower })
    }
}

/// `N²_{j,p} = (E+m)/2E` with `E = j√(p²+m²)`.
pub fn free_normalization_sq(j: i8, p: f64, m: f64) -> f64 {
    let e = f64::from(j) * p.hypot(m);
    (e + m) / (2.0 * e)
}

/// Free-field bracket from the analytic sea modes of a periodic box.
pub fn free_bilinear_box(m: f64, box_len: f64, cutoff: usize, epsilon: f64, reg: Regulator) -> Complex64 {
    let n = cutoff as i64;
    let sum: f64 = (-n..=n)
        .map(|i| {
            let p = 2.0 * PI * i as f64 / box_len;
            let (a, b) = free_spinor(-1, p, m);
            let s = 2.0 * a * b;
            let g = reg.weight(-p.hypot(m));
            // e^{−ipε} − e^{+ipε} = −2i sin(pε)
            s * g * (p * epsilon).sin()
        })
        .sum();
    Complex64::new(0.0, -2.0 * sum / box_len)
}

/// Continuum free-field bracket and its massless counterpart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeBilinear {
    pub exact: Complex64,
    pub massless: Complex64,
}

/// `(2i/π)∫₀^∞ (p/√(p²+m²)) sin(pε) e^{−(p/p_max)²} dp` by quadrature.
pub fn free_bilinear_analytic(m: f64, epsilon: f64, p_max: f64) -> Result<FreeBilinear> {
    if !(epsilon > 0.0 && p_max * epsilon >= 20.0) {
        return Err(Error::Window(format!(
            "need p_max·ε ≥ 20, got p_max = {p_max}, ε = {epsilon}"
        )));
    }
    let upper = 7.0 * p_max;
    let opts = Adaptive {
        abs_tol: 1e-11 / epsilon,
        initial_panels: (upper * epsilon / PI).ceil() as usize + 1,
        max_panels: 2_000_000,
    };
    let damp = |p: f64| (-(p / p_max) * (p / p_max)).exp();
    let (exact, _) = integrate_real(
        |p| p / p.hypot(m) * (p * epsilon).sin() * damp(p),
        0.0,
        upper,
        opts,
        "free bilinear integral",
    )?;
    let (massless, _) = integrate_real(|p| (p * epsilon).sin() * damp(p), 0.0, upper, opts, "massless bilinear")?;
    let f = Complex64::new(0.0, 2.0 / PI);
    Ok(FreeBilinear {
        exact: f * exact,
        massless: f * massless,
    })
}

/// `∫₀^∞ e^{ipε} e^{−δp} dp` by quadrature.
pub fn damped_exponential_integral(epsilon: f64, delta: f64) -> Result<Complex64> {
    if !(delta > 0.0 && epsilon > 0.0) {
        return Err(Error::Window(format!("need δ, ε > 0, got δ = {delta}, ε = {epsilon}")));
    }
    let upper = 45.0 / delta;
    let opts = Adaptive {
        abs_tol: 1e-9 / epsilon,
        initial_panels: (upper * epsilon / PI).ceil() as usize + 1,
        max_panels: 20_000_000,
    };
    integrate(
        |p| Complex64::from_polar((-delta * p).exp(), p * epsilon),
        0.0,
        upper,
        opts,
        "damped exponential integral",
    )
    .map(|(v, _)| v)
}

/// Least-squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub max_residual: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    LinearFit {
        intercept,
        slope,
        max_residual,
    }
}

/// The resolvable split window `[4/k_max, 0.5/m]` sampled at `count` points.
pub fn default_epsilons(cfg: &PotentialConfig, count: usize) -> Vec<f64> {
    let lo = 4.0 / cfg.k_max();
    let hi = 0.5 / cfg.m;
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count.max(2) - 1) as f64)
        .collect()
}

/// Uniform grid of `count` points on `[−L/2, L/2)`.
pub fn uniform_grid(cfg: &PotentialConfig, count: usize) -> Vec<f64> {
    let l = cfg.box_len;
    (0..count).map(|i| -0.5 * l + l * i as f64 / count as f64).collect()
}

/// Points whose split interval `[z, z + ε_max]`, widened by `2/k_max` on
/// both sides, avoids every step of the potential.
pub fn smooth_points(cfg: &PotentialConfig, grid: &[f64], eps_max: f64) -> Vec<bool> {
    let pad = 2.0 / cfg.k_max();
    let segs = cfg.segments();
    let steps: Vec<f64> = segs.iter().skip(1).map(|s| s.z0).collect();
    let h = cfg.half_len();
    grid.iter()
        .map(|&z| {
            let (lo, hi) = (z - pad, z + eps_max + pad);
            lo > -h && hi < h && steps.iter().all(|&s| s < lo || s > hi)
        })
        .collect()
}

/// One ε→0 extrapolation compared with its target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointFit {
    pub z: f64,
    pub smooth: bool,
    pub inside_well: bool,
    pub target: f64,
    pub fit: LinearFit,
}

impl PointFit {
    pub fn deviation(&self) -> f64 {
        (self.fit.intercept - self.target).abs()
    }
}

/// Which sums enter the anomaly analysis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnomalySettings {
    /// Weighting of the split densities that are extrapolated.
    pub split: Regulator,
    /// Common weighting of both sides of the reconstruction identity.
    pub identity: Regulator,
    /// Damping of unregularized sums.
    pub unreg: Regulator,
}

impl AnomalySettings {
    pub fn for_config(cfg: &PotentialConfig) -> Self {
        AnomalySettings {
            split: Regulator::Sharp,
            identity: Regulator::Gaussian(0.25 * cfg.k_max()),
            unreg: Regulator::for_unreg(cfg),
        }
    }
}

#[derive(Clone, Debug)]
pub struct AnomalyReport {
    pub epsilons: Vec<f64>,
    /// `ρ_B(z;ε) − ρ_A(z;ε)` per ε.
    pub difference: Vec<DensityProfile>,
    /// Same difference with the identity regulator.
    pub identity_difference: Vec<Vec<f64>>,
    /// `(i/4)·bracket·θ′(z)·ε` per ε.
    pub reconstruction: Vec<Vec<f64>>,
    /// Half-commutator bracket of System A per ε.
    pub bilinear: Vec<Vec<BilinearSample>>,
    pub plateau: Vec<PointFit>,
    pub diagnostics: Vec<String>,
}

impl AnomalyReport {
    /// Points used for pass/fail: smooth and inside the well.
    pub fn well_points(&self) -> impl Iterator<Item = &PointFit> {
        self.plateau.iter().filter(|p| p.smooth && p.inside_well)
    }

    /// Largest plateau deviation over well points, relative to `|V|/π`.
    pub fn plateau_error(&self) -> f64 {
        self.well_points()
            .map(|p| p.deviation() / p.target.abs())
            .fold(0.0, f64::max)
    }

    /// Largest identity mismatch over well points and ε, relative to `|V|/π`.
    pub fn identity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, p) in self.plateau.iter().enumerate() {
            if !(p.smooth && p.inside_well) {
                continue;
            }
            for k in 0..self.epsilons.len() {
                let d = (self.identity_difference[k][i] - self.reconstruction[k][i]).abs();
                worst = worst.max(d / p.target.abs());
            }
        }
        worst
    }
}

fn inside_well(cfg: &PotentialConfig, z: f64) -> bool {
    z.abs() < 0.5 * cfg.a
}

fn validate_window(cfg: &PotentialConfig, eps: &[f64]) -> Result<()> {
    let lo = 4.0 / cfg.k_max();
    if eps.len() < 2 {
        return Err(Error::Window("at least two split distances are needed".into()));
    }
    for &e in eps {
        if e < lo * (1.0 - 1e-12) {
            return Err(Error::EpsilonTooSmall { epsilon: e, minimum: lo });
        }
    }
    Ok(())
}

fn fit_points(
    cfg: &PotentialConfig,
    grid: &[f64],
    eps: &[f64],
    series: &[Vec<f64>],
    offset: &[f64],
    target: impl Fn(f64) -> f64,
    diagnostics: &mut Vec<String>,
    what: &str,
) -> Vec<PointFit> {
    let eps_max = eps.iter().cloned().fold(0.0, f64::max);
    let smooth = smooth_points(cfg, grid, eps_max);
    grid.iter()
        .enumerate()
        .map(|(i, &z)| {
            let ys: Vec<f64> = series.iter().map(|s| s[i] - offset[i]).collect();
            let fit = linear_fit(eps, &ys);
            let t = target(z);
            if smooth[i] && fit.max_residual > PLATEAU_TOL * t.abs().max(1e-3) {
                diagnostics.push(format!(
                    "{what}: no clean plateau at z = {z:.4} (fit residual {:.3e})",
                    fit.max_residual
                ));
            }
            PointFit {
                z,
                smooth: smooth[i],
                inside_well: inside_well(cfg, z),
                target: t,
                fit,
            }
        })
        .collect()
}

/// `ρ_B(z;ε) − ρ_A(z;ε)`, its ε→0 plateau against `V/π` and the
/// reconstruction from the γ⁵ bracket.
pub fn anomaly_difference(
    cfg: &PotentialConfig,
    theta: &ThetaField,
    modes_a: &ModeSet,
    modes_b: &ModeSet,
    grid: &[f64],
    eps: &[f64],
    settings: AnomalySettings,
) -> Result<AnomalyReport> {
    modes_a.require_complete()?;
    modes_b.require_complete()?;
    validate_window(cfg, eps)?;
    let a0 = modes_a.values_at(grid);
    let b0 = modes_b.values_at(grid);
    let wa = charge_weights(modes_a, settings.split);
    let wb = charge_weights(modes_b, settings.split);
    let ia = charge_weights(modes_a, settings.identity);
    let ib = charge_weights(modes_b, settings.identity);
    let bil_w = bilinear_weights(modes_a, settings.identity, BilinearForm::HalfCommutator);
    let mut difference = Vec::new();
    let mut identity_difference = Vec::new();
    let mut reconstruction = Vec::new();
    let mut bilinear = Vec::new();
    let mut series = Vec::new();
    let mut residue = 0.0f64;
    for &e in eps {
        let sh = shifted(grid, e);
        let a1 = modes_a.values_at(&sh);
        let b1 = modes_b.values_at(&sh);
        let ra = split_density(&a0, &a1, &wa);
        let rb = split_density(&b0, &b1, &wb);
        residue = residue.max(ra.residue).max(rb.residue);
        let diff: Vec<f64> = rb.density.iter().zip(&ra.density).map(|(b, a)| b - a).collect();
        let ida = split_density(&a0, &a1, &ia);
        let idb = split_density(&b0, &b1, &ib);
        identity_difference.push(idb.density.iter().zip(&ida.density).map(|(b, a)| b - a).collect());
        let br = split_bilinear(&a0, &a1, &bil_w);
        reconstruction.push(
            grid.iter()
                .zip(&br)
                .map(|(&z, b)| (Complex64::new(0.0, 0.25) * b).re * theta.theta_prime(z) * e)
                .collect(),
        );
        bilinear.push(
            grid.iter()
                .zip(br)
                .map(|(&z, value)| BilinearSample { z, epsilon: e, value })
                .collect(),
        );
        series.push(diff.clone());
        difference.push(DensityProfile {
            z: grid.to_vec(),
            values: diff,
            meta: DensityMeta {
                epsilon: Some(e),
                cutoff: cfg.cutoff,
                damping: settings.split.scale(),
                system: SystemLabel::B,
                convention: "half-commutator",
            },
        });
    }
    if residue > 1e-10 {
        return Err(Error::Window(format!("split density has imaginary residue {residue:.3e}")));
    }
    let mut diagnostics = Vec::new();
    let zeros = vec![0.0; grid.len()];
    let plateau = fit_points(
        cfg,
        grid,
        eps,
        &series,
        &zeros,
        |z| cfg.potential(crate::potentials::wrap(z, cfg.box_len)).unwrap_or(0.0) / PI,
        &mut diagnostics,
        "anomaly difference",
    );
    Ok(AnomalyReport {
        epsilons: eps.to_vec(),
        difference,
        identity_difference,
        reconstruction,
        bilinear,
        plateau,
        diagnostics,
    })
}

#[derive(Clone, Debug)]
pub struct CapriReport {
    pub epsilons: Vec<f64>,
    /// `ρ_A(z;ε→0) − ρ_A,unreg(z)` against `−V/π`.
    pub shift_a: Vec<PointFit>,
    /// `ρ_B(z;ε→0) − ρ_B,unreg(z)` against zero.
    pub shift_b: Vec<PointFit>,
    pub unreg_a: Vec<f64>,
    pub unreg_b: Vec<f64>,
    pub diagnostics: Vec<String>,
}

impl CapriReport {
    /// Worst System-A shift error inside the well, relative to `|V|/π`.
    pub fn shift_a_error(&self) -> f64 {
        self.shift_a
            .iter()
            .filter(|p| p.smooth && p.inside_well)
            .map(|p| p.deviation() / p.target.abs())
            .fold(0.0, f64::max)
    }

    /// Worst System-A shift error at smooth points outside the well, in
    /// units of `scale` (normally `η/π`).
    pub fn shift_a_outside_error(&self, scale: f64) -> f64 {
        self.shift_a
            .iter()
            .filter(|p| p.smooth && !p.inside_well)
            .map(|p| p.deviation() / scale)
            .fold(0.0, f64::max)
    }

    /// Worst System-B shift at smooth points, in units of `scale`.
    pub fn shift_b_error(&self, scale: f64) -> f64 {
        self.shift_b
            .iter()
            .filter(|p| p.smooth)
            .map(|p| p.fit.intercept.abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Shift of the point-split density away from the unregularized one, for
/// both systems.
pub fn capri_check(
    cfg: &PotentialConfig,
    modes_a: &ModeSet,
    modes_b: &ModeSet,
    grid: &[f64],
    eps: &[f64],
    settings: AnomalySettings,
) -> Result<CapriReport> {
    modes_a.require_complete()?;
    modes_b.require_complete()?;
    validate_window(cfg, eps)?;
    let a0 = modes_a.values_at(grid);
    let b0 = modes_b.values_at(grid);
    let unreg_a = unreg_from_values(&a0, &charge_weights(modes_a, settings.unreg));
    let unreg_b = unreg_from_values(&b0, &charge_weights(modes_b, settings.unreg));
    let wa = charge_weights(modes_a, settings.split);
    let wb = charge_weights(modes_b, settings.split);
    let mut sa = Vec::new();
    let mut sb = Vec::new();
    for &e in eps {
        let sh = shifted(grid, e);
        sa.push(split_density(&a0, &modes_a.values_at(&sh), &wa).density);
        sb.push(split_density(&b0, &modes_b.values_at(&sh), &wb).density);
    }
    let mut diagnostics = Vec::new();
    let v_over_pi = |z: f64| cfg.potential(crate::potentials::wrap(z, cfg.box_len)).unwrap_or(0.0) / PI;
    let shift_a = fit_points(cfg, grid, eps, &sa, &unreg_a, |z| -v_over_pi(z), &mut diagnostics, "capri A");
    let shift_b = fit_points(cfg, grid, eps, &sb, &unreg_b, |_| 0.0, &mut diagnostics, "capri B");
    Ok(CapriReport {
        epsilons: eps.to_vec(),
        shift_a,
        shift_b,
        unreg_a,
        unreg_b,
        diagnostics,
    })
}
