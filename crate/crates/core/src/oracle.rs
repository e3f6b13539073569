//! Real-space shooting solver for bound states of the electric system.
//!
//! Solves `u′ = iγ⁵(E − V − mγ⁰)u` on the box, independently of the
//! Fourier discretization.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::SpinorSample;
use crate::error::{Error, Result};
use crate::potentials::{PotentialConfig, Segment};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Generator `M` with `u′ = M u` on a constant piece: `[[0, i(E−V+m)], [i(E−V−m), 0]]`.
fn generator(e: f64, s: &Segment) -> (Complex64, Complex64) {
    (I * (e - s.v + s.mass), I * (e - s.v - s.mass))
}

fn apply_generator(g: (Complex64, Complex64), u: SpinorSample) -> SpinorSample {
    SpinorSample::new(g.0 * u.lower, g.1 * u.upper)
}

/// Exact propagator `e^{M h}` of one constant piece applied to `u`.
pub fn segment_exponential(e: f64, s: &Segment, h: f64, u: SpinorSample) -> SpinorSample {
    let kappa2 = s.mass * s.mass - (e - s.v) * (e - s.v);
    let (c, sk) = if kappa2 > 0.0 {
        let k = kappa2.sqrt();
        ((k * h).cosh(), (k * h).sinh() / k)
    } else if kappa2 < 0.0 {
        let k = (-kappa2).sqrt();
        ((k * h).cos(), (k * h).sin() / k)
    } else {
        (1.0, h)
    };
    let mu = apply_generator(generator(e, s), u);
    SpinorSample::new(c * u.upper + sk * mu.upper, c * u.lower + sk * mu.lower)
}

fn pieces(cfg: &PotentialConfig, z_start: f64, z_end: f64) -> Vec<(Segment, f64, f64)> {
    let segs = cfg.segments();
    let (lo, hi) = if z_start <= z_end { (z_start, z_end) } else { (z_end, z_start) };
    let mut out: Vec<(Segment, f64, f64)> = segs
        .into_iter()
        .filter_map(|s| {
            let a = s.z0.max(lo);
            let b = s.z1.min(hi);
            (b > a).then_some((s, a, b))
        })
        .collect();
    if z_start > z_end {
        out.reverse();
        for p in &mut out {
            std::mem::swap(&mut p.1, &mut p.2);
        }
    }
    out
}

fn check_range(cfg: &PotentialConfig, z: f64) -> Result<()> {
    let h = cfg.half_len();
    if z.abs() <= h * (1.0 + 1e-14) {
        Ok(())
    } else {
        Err(Error::Domain { z, half: h })
    }
}

/// Propagates `u` from `z_start` to `z_end` with the exact piecewise
/// matrix exponential.
pub fn propagate_exact(cfg: &PotentialConfig, e: f64, z_start: f64, z_end: f64, u: SpinorSample) -> Result<SpinorSample> {
    check_range(cfg, z_start)?;
    check_range(cfg, z_end)?;
    Ok(pieces(cfg, z_start, z_end)
        .into_iter()
        .fold(u, |u, (s, a, b)| segment_exponential(e, &s, b - a, u)))
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn dp_step(g: (Complex64, Complex64), u: SpinorSample, h: f64) -> (SpinorSample, f64) {
    let mut k = [SpinorSample::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 7];
    for i in 0..7 {
        let mut y = u;
        for j in 0..i {
            y.upper += k[j].upper * (h * A[i][j]);
            y.lower += k[j].lower * (h * A[i][j]);
        }
        k[i] = apply_generator(g, y);
    }
    let mut hi = u;
    let mut err = SpinorSample::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for i in 0..7 {
        hi.upper += k[i].upper * (h * B5[i]);
        hi.lower += k[i].lower * (h * B5[i]);
        err.upper += k[i].upper * (h * (B5[i] - B4[i]));
        err.lower += k[i].lower * (h * (B5[i] - B4[i]));
    }
    (hi, err.norm_sqr().sqrt())
}

/// Integrates the first-order system from `z_start` to `z_end` with an
/// adaptive Dormand–Prince scheme (local tolerance `1e-12` relative to the
/// solution size), restarting at every potential step.
pub fn integrate_dirac_ode(
    cfg: &PotentialConfig,
    e: f64,
    z_start: f64,
    z_end: f64,
    u_start: SpinorSample,
) -> Result<SpinorSample> {
    check_range(cfg, z_start)?;
    check_range(cfg, z_end)?;
    const TOL: f64 = 1e-12;
    let mut u = u_start;
    for (s, a, b) in pieces(cfg, z_start, z_end) {
        let g = generator(e, &s);
        let span = b - a;
        let dir = span.signum();
        let mut z = a;
        let mut h = dir * (0.01f64).min(span.abs());
        while (b - z) * dir > 0.0 {
            if (z + h - b) * dir > 0.0 {
                h = b - z;
            }
            if h.abs() < 1e-14 * span.abs().max(1.0) {
                return Err(Error::StepUnderflow { z });
            }
            let (next, err) = dp_step(g, u, h);
            let scale = TOL * u.norm_sqr().sqrt().max(1e-300);
            if err <= scale {
                z += h;
                u = next;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * (scale / err).powf(0.2)).clamp(0.2, 5.0) };
            h *= factor;
        }
    }
    Ok(u)
}

/// Eigenvector of the edge-piece generator that decays away from the box
/// interior, at the left or right edge.
fn edge_solution(e: f64, s: &Segment, right: bool) -> SpinorSample {
    let kappa = (s.mass * s.mass - (e - s.v) * (e - s.v)).max(0.0).sqrt();
    let k = if right { -kappa } else { kappa };
    SpinorSample::new(I * (e - s.v + s.mass), Complex64::new(k, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    /// `u(−z) = +γ⁰u(z)`: lower component vanishes at the origin.
    Even,
    /// `u(−z) = −γ⁰u(z)`: upper component vanishes at the origin.
    Odd,
}

/// Bound states found by the shooting scan.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ShootingResult {
    pub energies: Vec<f64>,
    pub match_residuals: Vec<f64>,
    /// Gap of the outer region, `(V_out − m, V_out + m)`.
    pub gap: (f64, f64),
}

struct Shooter {
    cfg: PotentialConfig,
    left: Segment,
    right: Segment,
}

impl Shooter {
    fn new(cfg: &PotentialConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.eta >= cfg.m {
            return Err(Error::UnsupportedRegime { eta: cfg.eta, m: cfg.m });
        }
        let segs = cfg.segments();
        Ok(Shooter {
            cfg: cfg.clone(),
            left: segs[0],
            right: segs[segs.len() - 1],
        })
    }

    fn gap(&self) -> (f64, f64) {
        let lo = (self.left.v - self.left.mass).max(self.right.v - self.right.mass);
        let hi = (self.left.v + self.left.mass).min(self.right.v + self.right.mass);
        (lo, hi)
    }

    fn left_at_origin(&self, e: f64) -> SpinorSample {
        let h = self.cfg.half_len();
        let u = propagate_exact(&self.cfg, e, -h, 0.0, edge_solution(e, &self.left, false));
        u.expect("origin lies inside the box")
    }

    fn right_at_origin(&self, e: f64) -> SpinorSample {
        let h = self.cfg.half_len();
        let u = propagate_exact(&self.cfg, e, h, 0.0, edge_solution(e, &self.right, true));
        u.expect("origin lies inside the box")
    }

    /// Normalized matching determinant; real up to roundoff because the
    /// upper components stay imaginary and the lower ones real.
    fn determinant(&self, e: f64) -> f64 {
        let l = self.left_at_origin(e);
        let r = self.right_at_origin(e);
        let det = l.upper * r.lower - l.lower * r.upper;
        det.im / (l.norm_sqr() * r.norm_sqr()).sqrt()
    }

    fn parity_condition(&self, e: f64, parity: Parity) -> f64 {
        let l = self.left_at_origin(e);
        let n = l.norm_sqr().sqrt();
        match parity {
            Parity::Even => l.lower.re / n,
            Parity::Odd => l.upper.im / n,
        }
    }

    fn scan<F: Fn(f64) -> f64 + Sync>(&self, f: F, points: usize) -> Vec<f64> {
        let (lo, hi) = self.gap();
        let step = (hi - lo) / points as f64;
        let grid: Vec<f64> = (0..points).map(|i| lo + (i as f64 + 0.5) * step).collect();
        let vals: Vec<f64> = grid.par_iter().map(|&e| f(e)).collect();
        let mut roots = Vec::new();
        for i in 0..points.saturating_sub(1) {
            let (fa, fb) = (vals[i], vals[i + 1]);
            if fa == 0.0 {
                roots.push(grid[i]);
            } else if fa * fb < 0.0 {
                roots.push(bisect(&f, grid[i], grid[i + 1], fa));
            }
        }
        roots
    }
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > 1e-12 {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Bound-state energies from a uniform scan of the gap with `points`
/// samples, refined by bisection.
pub fn bound_states_with_resolution(cfg: &PotentialConfig, points: usize) -> Result<ShootingResult> {
    let sh = Shooter::new(cfg)?;
    let energies = sh.scan(|e| sh.determinant(e), points);
    let match_residuals = energies.iter().map(|&e| sh.determinant(e).abs()).collect();
    Ok(ShootingResult {
        energies,
        match_residuals,
        gap: sh.gap(),
    })
}

pub fn bound_states_shooting(cfg: &PotentialConfig) -> Result<ShootingResult> {
    bound_states_with_resolution(cfg, 2000)
}

/// Roots of one parity class (symmetric potentials only).
pub fn bound_states_by_parity(cfg: &PotentialConfig, parity: Parity) -> Result<Vec<f64>> {
    let sh = Shooter::new(cfg)?;
    Ok(sh.scan(|e| sh.parity_condition(e, parity), 2000))
}
