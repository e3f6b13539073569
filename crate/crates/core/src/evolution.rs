//! Crank–Nicolson propagation under the interpolating Hamiltonian and the
//! check of the exact gauge-plus-chiral solution built from the static one.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::algebra::{rotate, SpinorSample};
use crate::error::{Error, Result};
use crate::potentials::{ramp_lambda, RampSpec};
use crate::spectral::{LocalField, SpectralModel};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest admissible `dt·E_bound`.
pub const MAX_PHASE_PER_STEP: f64 = 0.2;

/// Time grid of a propagation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionSchedule {
    pub ramp: RampSpec,
    pub dt: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Store every `stride`-th state in trajectories.
    pub stride: usize,
}

impl EvolutionSchedule {
    /// Starts one time unit before the ramp and stops one unit after it.
    pub fn around(ramp: RampSpec, dt: f64) -> Self {
        EvolutionSchedule {
            ramp,
            dt,
            t_start: -1.0,
            t_end: ramp.t_f + 1.0,
            stride: 1,
        }
    }

    pub fn steps(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    /// Step actually taken: the span divided evenly into [`steps`](Self::steps).
    pub fn effective_dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps() as f64
    }

    pub fn validate(&self, model: &SpectralModel) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidConfig {
                field: "dt",
                reason: format!("must be positive, got {}", self.dt),
            });
        }
        if !(self.t_end > self.t_start) {
            return Err(Error::InvalidConfig {
                field: "t_end",
                reason: format!("must exceed t_start = {}", self.t_start),
            });
        }
        let max = MAX_PHASE_PER_STEP / energy_bound(model, self.ramp);
        if self.dt > max {
            return Err(Error::TimeStep { dt: self.dt, max });
        }
        Ok(())
    }
}

/// Upper bound on `|E|` of every Hamiltonian met along the ramp.
pub fn energy_bound(model: &SpectralModel, ramp: RampSpec) -> f64 {
    let segs = model.theta.segments();
    let v_max = segs.iter().map(|s| s.v.abs()).fold(0.0, f64::max);
    let m_max = segs.iter().map(|s| s.mass).fold(0.0, f64::max);
    let h = 0.5 * model.cfg.box_len;
    let theta2_max = segs
        .iter()
        .flat_map(|s| [s.z0, s.z1])
        .chain([0.0, -h, h])
        .map(|z| model.theta.theta2(z).abs())
        .fold(0.0, f64::max);
    // max |λ″| of the quintic ramp is 10/√3 / t_f²
    let dd_max = 10.0 / 3f64.sqrt() / (ramp.t_f * ramp.t_f);
    model.basis.k_max().hypot(m_max) + 2.0 * v_max + 0.5 * dd_max * theta2_max
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<Complex64>>,
    pub norms: Vec<f64>,
}

impl Trajectory {
    /// Largest `|‖ψ(t)‖ − ‖ψ(t_start)‖|`.
    pub fn norm_drift(&self) -> f64 {
        let n0 = self.norms.first().copied().unwrap_or(0.0);
        self.norms.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max)
    }

    pub fn last(&self) -> Option<&Vec<Complex64>> {
        self.states.last()
    }
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// FFT-transformed Toeplitz kernels of one Hamiltonian plus its 2×2
/// diagonal blocks.
struct Kernels {
    uu: Vec<Complex64>,
    ul: Vec<Complex64>,
    lu: Vec<Complex64>,
    ll: Vec<Complex64>,
    diag: Vec<[Complex64; 4]>,
}

/// Matrix-free application of `σ₁k + L(z)` by FFT convolution.
struct Engine {
    cutoff: usize,
    waves: usize,
    size: usize,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Engine {
    fn new(model: &SpectralModel) -> Self {
        let waves = model.basis.waves();
        let cutoff = model.basis.cutoff();
        let size = (6 * cutoff + 2).next_power_of_two();
        let mut planner = FftPlanner::new();
        Engine {
            cutoff,
            waves,
            size,
            k: (0..waves).map(|r| model.basis.wavenumber(r)).collect(),
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    fn transform(&self, seq: impl Iterator<Item = Complex64>) -> Vec<Complex64> {
        let mut buf = vec![ZERO; self.size];
        for (b, c) in buf.iter_mut().zip(seq) {
            *b = c;
        }
        self.fwd.process(&mut buf);
        buf
    }

    fn kernels(&self, f: &LocalField) -> Kernels {
        let len = f.identity.len();
        let centre = 2 * self.cutoff;
        let block = |i: usize| f.block(centre, i as i64 - centre as i64);
        let blocks: Vec<[Complex64; 4]> = (0..len).map(block).collect();
        let diag = (0..self.waves)
            .map(|r| {
                let b = blocks[centre];
                let k = Complex64::new(self.k[r], 0.0);
                [b[0], b[1] + k, b[2] + k, b[3]]
            })
            .collect();
        Kernels {
            uu: self.transform(blocks.iter().map(|b| b[0])),
            ul: self.transform(blocks.iter().map(|b| b[1])),
            lu: self.transform(blocks.iter().map(|b| b[2])),
            ll: self.transform(blocks.iter().map(|b| b[3])),
            diag,
        }
    }

    /// `H ψ` for a block-layout coefficient vector.
    fn apply(&self, kern: &Kernels, psi: &[Complex64]) -> Vec<Complex64> {
        let nw = self.waves;
        let xu = self.transform(psi[..nw].iter().copied());
        let xl = self.transform(psi[nw..].iter().copied());
        let mut yu: Vec<Complex64> = (0..self.size).map(|i| kern.uu[i] * xu[i] + kern.ul[i] * xl[i]).collect();
        let mut yl: Vec<Complex64> = (0..self.size).map(|i| kern.lu[i] * xu[i] + kern.ll[i] * xl[i]).collect();
        self.inv.process(&mut yu);
        self.inv.process(&mut yl);
        let s = 1.0 / self.size as f64;
        let off = 2 * self.cutoff;
        let mut out = vec![ZERO; 2 * nw];
        for r in 0..nw {
            out[r] = yu[off + r] * s + self.k[r] * psi[nw + r];
            out[nw + r] = yl[off + r] * s + self.k[r] * psi[r];
        }
        out
    }

    /// One implicit-midpoint step `(1 + iτH)ψ′ = (1 − iτH)ψ`, `τ = dt/2`,
    /// solved by block-Jacobi iteration.
    fn step(&self, kern: &Kernels, psi: &[Complex64], dt: f64) -> Result<Vec<Complex64>> {
        let nw = self.waves;
        let tau = I * (0.5 * dt);
        let hpsi = self.apply(kern, psi);
        let rhs: Vec<Complex64> = psi.iter().zip(&hpsi).map(|(p, h)| p - tau * h).collect();
        let rhs_norm = norm(&rhs);
        let inv: Vec<[Complex64; 4]> = kern
            .diag
            .iter()
            .map(|b| {
                let (a, bb, c, d) = (1.0 + tau * b[0], tau * b[1], tau * b[2], 1.0 + tau * b[3]);
                let det = a * d - bb * c;
                [d / det, -bb / det, -c / det, a / det]
            })
            .collect();
        let precondition = |r: &[Complex64]| -> Vec<Complex64> {
            let mut out = vec![ZERO; 2 * nw];
            for n in 0..nw {
                let m = inv[n];
                out[n] = m[0] * r[n] + m[1] * r[nw + n];
                out[nw + n] = m[2] * r[n] + m[3] * r[nw + n];
            }
            out
        };
        let mut phi = precondition(&rhs);
        let mut best = f64::INFINITY;
        for _ in 0..200 {
            let hphi = self.apply(kern, &phi);
            let resid: Vec<Complex64> = (0..2 * nw).map(|i| rhs[i] - phi[i] - tau * hphi[i]).collect();
            let rel = norm(&resid) / rhs_norm.max(f64::MIN_POSITIVE);
            if rel <= 1e-15 || rel >= 0.5 * best {
                best = best.min(rel);
                break;
            }
            best = rel;
            for (p, c) in phi.iter_mut().zip(precondition(&resid)) {
                *p += c;
            }
        }
        if best > 1e-12 {
            return Err(Error::LinearSolve { residual: best });
        }
        Ok(phi)
    }
}

/// Which Hamiltonian drives the propagation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Drive {
    /// `H(t)` of the ramp, evaluated at each half step.
    Ramp,
    /// The static electric Hamiltonian.
    StaticA,
}

/// Step-by-step propagator.
pub struct Propagator<'a> {
    model: &'a SpectralModel,
    schedule: EvolutionSchedule,
    drive: Drive,
    engine: Engine,
    static_kernels: Option<Kernels>,
    dt: f64,
    step: usize,
    state: Vec<Complex64>,
}

impl<'a> Propagator<'a> {
    pub fn new(model: &'a SpectralModel, psi0: &[Complex64], schedule: EvolutionSchedule, drive: Drive) -> Result<Self> {
        schedule.validate(model)?;
        let dim = model.basis.dim();
        if psi0.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: psi0.len(),
            });
        }
        let engine = Engine::new(model);
        let static_kernels = (drive == Drive::StaticA).then(|| engine.kernels(&model.local_a()));
        Ok(Propagator {
            model,
            schedule,
            drive,
            engine,
            static_kernels,
            dt: schedule.effective_dt(),
            step: 0,
            state: psi0.to_vec(),
        })
    }

    pub fn time(&self) -> f64 {
        self.schedule.t_start + self.step as f64 * self.dt
    }

    pub fn state(&self) -> &[Complex64] {
        &self.state
    }

    pub fn finished(&self) -> bool {
        self.step >= self.schedule.steps()
    }

    pub fn advance(&mut self) -> Result<()> {
        let t_mid = self.time() + 0.5 * self.dt;
        let next = match &self.static_kernels {
            Some(k) => self.engine.step(k, &self.state, self.dt)?,
            None => {
                let k = self.engine.kernels(&self.model.local_at(self.schedule.ramp, t_mid));
                self.engine.step(&k, &self.state, self.dt)?
            }
        };
        self.state = next;
        self.step += 1;
        Ok(())
    }

    pub fn drive(&self) -> Drive {
        self.drive
    }

    pub fn run(mut self) -> Result<Trajectory> {
        let mut traj = Trajectory::default();
        let stride = self.schedule.stride.max(1);
        let record = |p: &Propagator, traj: &mut Trajectory| {
            traj.times.push(p.time());
            traj.norms.push(norm(&p.state));
            traj.states.push(p.state.clone());
        };
        record(&self, &mut traj);
        while !self.finished() {
            self.advance()?;
            if self.step % stride == 0 || self.finished() {
                record(&self, &mut traj);
            }
        }
        Ok(traj)
    }
}

pub fn propagate_general(model: &SpectralModel, psi0: &[Complex64], schedule: EvolutionSchedule) -> Result<Trajectory> {
    Propagator::new(model, psi0, schedule, Drive::Ramp)?.run()
}

pub fn propagate_reference(model: &SpectralModel, chi0: &[Complex64], schedule: EvolutionSchedule) -> Result<Trajectory> {
    Propagator::new(model, chi0, schedule, Drive::StaticA)?.run()
}

/// Uniform position grid used to apply local factors to basis states.
pub struct PositionGrid {
    cutoff: usize,
    waves: usize,
    size: usize,
    box_len: f64,
    pub z: Vec<f64>,
    theta: Vec<f64>,
    theta2: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl PositionGrid {
    pub fn new(model: &SpectralModel, oversample: usize) -> Self {
        let waves = model.basis.waves();
        let size = (oversample.max(2) * waves).next_power_of_two();
        let l = model.cfg.box_len;
        let z: Vec<f64> = (0..size).map(|j| -0.5 * l + l * j as f64 / size as f64).collect();
        let mut planner = FftPlanner::new();
        PositionGrid {
            cutoff: model.basis.cutoff(),
            waves,
            size,
            box_len: l,
            theta: z.iter().map(|&x| model.theta.theta(x)).collect(),
            theta2: z.iter().map(|&x| model.theta.theta2(x)).collect(),
            z,
            fwd: planner.plan_fft_forward(size),
            inv: planner.plan_fft_inverse(size),
        }
    }

    fn slot(&self, r: usize) -> (usize, f64) {
        let d = r as i64 - self.cutoff as i64;
        let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        (d.rem_euclid(self.size as i64) as usize, sign)
    }

    /// Samples of both components on the grid.
    pub fn to_grid(&self, psi: &[Complex64]) -> Vec<SpinorSample> {
        let nw = self.waves;
        let mut up = vec![ZERO; self.size];
        let mut lo = vec![ZERO; self.size];
        for r in 0..nw {
            let (i, s) = self.slot(r);
            up[i] = psi[r] * s;
            lo[i] = psi[nw + r] * s;
        }
        self.inv.process(&mut up);
        self.inv.process(&mut lo);
        let s = 1.0 / self.box_len.sqrt();
        up.into_iter()
            .zip(lo)
            .map(|(u, l)| SpinorSample::new(u * s, l * s))
            .collect()
    }

    /// Projection of grid samples onto the basis.
    pub fn from_grid(&self, vals: &[SpinorSample]) -> Vec<Complex64> {
        let nw = self.waves;
        let mut up: Vec<Complex64> = vals.iter().map(|v| v.upper).collect();
        let mut lo: Vec<Complex64> = vals.iter().map(|v| v.lower).collect();
        self.fwd.process(&mut up);
        self.fwd.process(&mut lo);
        let scale = self.box_len.sqrt() / self.size as f64;
        let mut out = vec![ZERO; 2 * nw];
        for r in 0..nw {
            let (i, s) = self.slot(r);
            out[r] = up[i] * (scale * s);
            out[nw + r] = lo[i] * (scale * s);
        }
        out
    }

    /// `P[e^{−if(z,t)} e^{−iγ⁵λ(t)θ(z)/2} χ]` and the lost norm fraction.
    pub fn gauge_rotate(&self, chi: &[Complex64], ramp: RampSpec, t: f64) -> (Vec<Complex64>, f64) {
        let (lam, d1, _) = ramp_lambda(ramp, t);
        if lam == 0.0 && d1 == 0.0 {
            return (chi.to_vec(), 0.0);
        }
        let vals: Vec<SpinorSample> = self
            .to_grid(chi)
            .into_iter()
            .enumerate()
            .map(|(j, v)| {
                let f = -0.5 * d1 * self.theta2[j];
                rotate(lam * self.theta[j], v).scale(Complex64::from_polar(1.0, -f))
            })
            .collect();
        let out = self.from_grid(&vals);
        let before = norm(chi).powi(2);
        let loss = if before > 0.0 { (1.0 - norm(&out).powi(2) / before).max(0.0) } else { 0.0 };
        (out, loss)
    }

    /// `P[e^{+iγ⁵θ(z)/2} ψ]`, the inverse of the full rotation.
    pub fn unrotate(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let vals: Vec<SpinorSample> = self
            .to_grid(psi)
            .into_iter()
            .enumerate()
            .map(|(j, v)| rotate(-self.theta[j], v))
            .collect();
        self.from_grid(&vals)
    }
}

/// `φ(t) = e^{−if} e^{−iγ⁵λθ/2} χ(t)` for every stored state; the largest
/// projection loss is returned alongside.
pub fn reconstruct_phi(
    model: &SpectralModel,
    chi: &Trajectory,
    schedule: EvolutionSchedule,
    oversample: usize,
) -> (Trajectory, f64) {
    let grid = PositionGrid::new(model, oversample);
    let mut out = Trajectory::default();
    let mut worst = 0.0f64;
    for (t, state) in chi.times.iter().zip(&chi.states) {
        let (phi, loss) = grid.gauge_rotate(state, schedule.ramp, *t);
        worst = worst.max(loss);
        out.times.push(*t);
        out.norms.push(norm(&phi));
        out.states.push(phi);
    }
    (out, worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionReport {
    /// `(t, ‖φ_direct(t) − φ_reconstructed(t)‖)` at stored times.
    pub distances: Vec<(f64, f64)>,
    pub max_distance: f64,
    /// `⟨φ_direct(t_end) | e^{−iγ⁵θ/2} χ(t_end)⟩`.
    pub end_overlap: Complex64,
    pub norm_drift_direct: f64,
    pub norm_drift_reference: f64,
    pub max_projection_loss: f64,
    pub final_direct: Vec<Complex64>,
    pub final_reference: Vec<Complex64>,
    pub warnings: Vec<String>,
}

/// Propagates `ψ0` directly and through the static system, compares the
/// direct state with the reconstructed one at every step.
pub fn verify_reconstruction(
    model: &SpectralModel,
    psi0: &[Complex64],
    schedule: EvolutionSchedule,
    oversample: usize,
) -> Result<ReconstructionReport> {
    let grid = PositionGrid::new(model, oversample);
    let mut direct = Propagator::new(model, psi0, schedule, Drive::Ramp)?;
    let mut reference = Propagator::new(model, psi0, schedule, Drive::StaticA)?;
    let n0 = norm(psi0);
    let stride = schedule.stride.max(1);
    let mut distances = Vec::new();
    let (mut max_distance, mut drift_d, mut drift_r, mut worst_loss) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut step = 0usize;
    loop {
        let t = direct.time();
        let (phi, loss) = grid.gauge_rotate(reference.state(), schedule.ramp, t);
        worst_loss = worst_loss.max(loss);
        let d = distance(direct.state(), &phi);
        max_distance = max_distance.max(d);
        drift_d = drift_d.max((norm(direct.state()) - n0).abs());
        drift_r = drift_r.max((norm(reference.state()) - n0).abs());
        if step % stride == 0 || direct.finished() {
            distances.push((t, d));
        }
        if direct.finished() {
            break;
        }
        direct.advance()?;
        reference.advance()?;
        step += 1;
    }
    let (rotated, _) = grid.gauge_rotate(reference.state(), schedule.ramp, direct.time());
    let end_overlap = inner(direct.state(), &rotated);
    let mut warnings = Vec::new();
    if worst_loss > 1e-6 {
        warnings.push(format!("projection of the reconstructed state lost up to {worst_loss:.3e} of its norm"));
    }
    Ok(ReconstructionReport {
        distances,
        max_distance,
        end_overlap,
        norm_drift_direct: drift_d,
        norm_drift_reference: drift_r,
        max_projection_loss: worst_loss,
        final_direct: direct.state().to_vec(),
        final_reference: reference.state().to_vec(),
        warnings,
    })
}

/// `⟨e^{−iγ⁵θ/2} u | ψ⟩` for an A-mode coefficient vector `u`.
pub fn mapped_mode_overlap(model: &SpectralModel, mode_a: &[Complex64], psi: &[Complex64], oversample: usize) -> Complex64 {
    let grid = PositionGrid::new(model, oversample);
    inner(mode_a, &grid.unrotate(psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialConfig;
    use crate::spectral::dense_operator;

    #[test]
    fn fft_matvec_matches_dense() {
        let cfg = PotentialConfig::reference().with_cutoff(20);
        let model = SpectralModel::new(&cfg).unwrap();
        let ramp = RampSpec::new(3.0).unwrap();
        let field = model.local_at(ramp, 1.1);
        let dense = dense_operator(&model.basis, &field, true);
        let engine = Engine::new(&model);
        let kern = engine.kernels(&field);
        let psi: Vec<Complex64> = (0..model.basis.dim())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let a = engine.apply(&kern, &psi);
        let b = crate::spectral::apply_dense(&dense, &psi);
        assert!(distance(&a, &b) < 1e-12 * norm(&b));
    }

    #[test]
    fn grid_round_trip() {
        let model = SpectralModel::new(&PotentialConfig::reference().with_cutoff(16)).unwrap();
        let grid = PositionGrid::new(&model, 4);
        let psi: Vec<Complex64> = (0..model.basis.dim()).map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.3)).collect();
        let back = grid.from_grid(&grid.to_grid(&psi));
        assert!(distance(&psi, &back) < 1e-13);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let model = SpectralModel::new(&PotentialConfig::reference().with_cutoff(64)).unwrap();
        let sched = EvolutionSchedule::around(RampSpec::new(2.0).unwrap(), 0.5);
        let psi = vec![ZERO; model.basis.dim()];
        assert!(matches!(propagate_general(&model, &psi, sched), Err(Error::TimeStep { .. })));
    }
}
