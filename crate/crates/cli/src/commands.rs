//! The five subcommands. Each writes its tables and a manifest into one
//! directory and returns whether every check passed.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Result};
use num_complex::Complex64;
use dirac1d::evolution::{distance, inner, mapped_mode_overlap, propagate_general, verify_reconstruction, EvolutionSchedule};
use dirac1d::oracle::bound_states_shooting;
use dirac1d::potentials::{wrap, PotentialConfig, RampSpec};
use dirac1d::spectral::{chiral_map_modes, compare_spectra, diagonalize, eigenvalues, ModeSet, SpectralModel};
use dirac1d::vacuum::{
    anomaly_difference, capri_check, damped_exponential_integral, density_unreg, free_bilinear_analytic, free_bilinear_box,
    free_normalization_sq, free_spinor, uniform_grid, AnomalySettings, FreeBilinear, Regulator, CAPRI_TOL, IDENTITY_TOL,
    PLATEAU_TOL,
};

use crate::config::RunConfig;
use crate::output::{num, Check, RunDir};

pub const SPECTRUM_TOL: f64 = 1e-3;
pub const ORACLE_TOL: f64 = 1e-4;
pub const MAPPED_TOL: f64 = 1e-10;
pub const INDEPENDENT_TOL: f64 = 1e-3;
pub const SINGULARITY_TOL: f64 = 0.02;
pub const POLE_TOL: f64 = 1e-3;
pub const NORMALIZATION_TOL: f64 = 1e-13;
pub const DISTANCE_TOL: f64 = 1e-4;
pub const NORM_DRIFT_TOL: f64 = 1e-10;
pub const DEFICIT_TOL: f64 = 1e-4;
pub const END_OVERLAP_TOL: f64 = 1e-6;
pub const ORDER_RATIO: (f64, f64) = (3.2, 4.8);

fn row(cells: impl IntoIterator<Item = String>) -> Vec<String> {
    cells.into_iter().collect()
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

fn pair(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn tolerances(list: &[(&str, f64)]) -> Vec<(String, String)> {
    list.iter().map(|(k, v)| (format!("tolerance.{k}"), num(*v))).collect()
}

fn modes(model: &SpectralModel) -> Result<(ModeSet, ModeSet)> {
    let a = diagonalize(&model.hamiltonian_a())?;
    let b = diagonalize(&model.hamiltonian_b()?)?;
    Ok((a, b))
}

/// Spectra of both systems, the shooting oracle and a cutoff sweep.
pub fn spectrum(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let pc = cfg.potential()?;
    let mut out = RunDir::create(dir, "spectrum", cfg)?;
    let window = 0.5 * pc.k_max();
    let model = SpectralModel::new(&pc)?;
    let ea = eigenvalues(&model.hamiltonian_a())?;
    let eb = eigenvalues(&model.hamiltonian_b()?)?;
    out.table(
        "spectrum.csv",
        &["index", "E_A [m]", "E_B [m]", "abs_diff [m]", "in_window"],
        ea.iter().zip(&eb).enumerate().map(|(i, (a, b))| {
            row([i.to_string(), num(*a), num(*b), num((a - b).abs()), flag(a.abs() <= window)])
        }),
    )?;
    let cmp = compare_spectra(&ea, &eb, window);

    let shoot = bound_states_shooting(&pc)?;
    let in_gap: Vec<f64> = ea.iter().copied().filter(|&e| e > shoot.gap.0 && e < shoot.gap.1).collect();
    let oracle_diff = shoot
        .energies
        .iter()
        .zip(&in_gap)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    out.table(
        "oracle.csv",
        &["level", "E_shooting [m]", "match_residual", "E_spectral_A [m]", "abs_diff [m]"],
        shoot.energies.iter().enumerate().map(|(i, &e)| {
            let s = in_gap.get(i).copied().unwrap_or(f64::NAN);
            row([i.to_string(), num(e), num(shoot.match_residuals[i]), num(s), num((e - s).abs())])
        }),
    )?;

    let mut sweep = Vec::new();
    for &n in &cfg.numerics.convergence {
        let m = SpectralModel::new(&cfg.potential_with_cutoff(n)?)?;
        let a = eigenvalues(&m.hamiltonian_a())?;
        let b = eigenvalues(&m.hamiltonian_b()?)?;
        let c = compare_spectra(&a, &b, window);
        let lowest = a.iter().copied().filter(|&e| e > shoot.gap.0 && e < shoot.gap.1).next();
        sweep.push((n, c.compared, c.max_diff, lowest.unwrap_or(f64::NAN)));
    }
    out.table(
        "convergence.csv",
        &["N", "levels_in_window", "max_abs_diff [m]", "lowest_gap_level_A [m]"],
        sweep.iter().map(|&(n, c, d, e)| row([n.to_string(), c.to_string(), num(d), num(e)])),
    )?;

    let checks = [
        Check::at_most("spectrum_match", cmp.max_diff, SPECTRUM_TOL * pc.m),
        Check::at_most("oracle_match", oracle_diff, ORACLE_TOL * pc.m),
        Check::at_most(
            "oracle_level_count",
            (in_gap.len() as f64 - shoot.energies.len() as f64).abs(),
            0.0,
        ),
    ];
    let mut results = vec![
        pair("window", num(window)),
        pair("levels_in_window", cmp.compared),
        pair("bound_states", shoot.energies.len()),
    ];
    results.extend(tolerances(&[("spectrum", SPECTRUM_TOL * pc.m), ("oracle", ORACLE_TOL * pc.m)]));
    out.finish(&checks, &results)
}

/// Unregularized densities of A, of the chiral-mapped A modes and of B.
pub fn density(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let pc = cfg.potential()?;
    let mut out = RunDir::create(dir, "density", cfg)?;
    let model = SpectralModel::new(&pc)?;
    let (a, b) = modes(&model)?;
    let reg = Regulator::for_unreg(&pc);
    let grid = uniform_grid(&pc, cfg.numerics.grid_size);
    let ra = density_unreg(&a, &grid, reg)?;
    let mapped = chiral_map_modes(&a, &model.theta)?;
    let rm = density_unreg(&mapped, &grid, reg)?;
    let rb = density_unreg(&b, &grid, reg)?;
    out.table(
        "density.csv",
        &[
            "z [1/m]",
            "V [m]",
            "rho_A [m]",
            "rho_B_mapped [m]",
            "rho_B_independent [m]",
            "diff_mapped [m]",
            "diff_independent [m]",
        ],
        grid.iter().enumerate().map(|(i, &z)| {
            let v = pc.potential(wrap(z, pc.box_len)).unwrap_or(f64::NAN);
            let (x, y, w) = (ra.values[i], rm.values[i], rb.values[i]);
            row([num(z), num(v), num(x), num(y), num(w), num(y - x), num(w - x)])
        }),
    )?;
    let checks = [
        Check::at_most("mapped_equality", ra.sup_distance(&rm), MAPPED_TOL),
        Check::at_most("independent_equality", ra.sup_distance(&rb), INDEPENDENT_TOL),
    ];
    let mut results = vec![
        pair("Lambda_damp", reg.scale().map_or("none".into(), num)),
        pair("mapped_projection_loss", mapped.metadata.projection_loss.map_or("none".into(), num)),
    ];
    results.extend(tolerances(&[("mapped", MAPPED_TOL), ("independent", INDEPENDENT_TOL)]));
    out.finish(&checks, &results)
}

/// Points across the well plus two outside it.
fn anomaly_grid(pc: &PotentialConfig) -> Vec<f64> {
    let h = 0.5 * pc.a;
    (0..21)
        .map(|i| -h + 2.0 * h * i as f64 / 20.0)
        .chain([-0.2 * pc.box_len, 0.15 * pc.box_len])
        .collect()
}

/// Point-split densities, their ε→0 plateaus, the bracket reconstruction
/// and the shift against unregularized sums.
pub fn anomaly(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let pc = cfg.potential()?;
    let mut out = RunDir::create(dir, "anomaly", cfg)?;
    let model = SpectralModel::new(&pc)?;
    let (a, b) = modes(&model)?;
    let eps = cfg.epsilons(&pc);
    let grid = anomaly_grid(&pc);
    let set = AnomalySettings::for_config(&pc);
    let rep = anomaly_difference(&pc, &model.theta, &a, &b, &grid, &eps, set)?;
    let cap = capri_check(&pc, &a, &b, &grid, &eps, set)?;

    let mut rows = Vec::new();
    for (k, &e) in eps.iter().enumerate() {
        for (i, &z) in grid.iter().enumerate() {
            rows.push(row([
                num(e),
                num(z),
                num(rep.difference[k].values[i]),
                num(rep.identity_difference[k][i]),
                num(rep.reconstruction[k][i]),
            ]));
        }
    }
    out.table(
        "difference.csv",
        &["epsilon [1/m]", "z [1/m]", "rho_B_minus_rho_A [m]", "identity_difference [m]", "reconstruction [m]"],
        rows,
    )?;
    out.table(
        "bilinear.csv",
        &["epsilon [1/m]", "z [1/m]", "re [m]", "im [m]", "eps_times_abs_over_2_over_pi"],
        rep.bilinear.iter().flatten().map(|s| {
            row([num(s.epsilon), num(s.z), num(s.value.re), num(s.value.im), num(s.value.norm() * s.epsilon * PI / 2.0)])
        }),
    )?;
    out.table(
        "plateau.csv",
        &["z [1/m]", "smooth", "inside_well", "V_over_pi [m]", "intercept [m]", "slope [m^2]", "fit_residual [m]", "deviation [m]"],
        rep.plateau.iter().map(|p| {
            row([
                num(p.z),
                flag(p.smooth),
                flag(p.inside_well),
                num(p.target),
                num(p.fit.intercept),
                num(p.fit.slope),
                num(p.fit.max_residual),
                num(p.deviation()),
            ])
        }),
    )?;
    out.table(
        "capri.csv",
        &[
            "z [1/m]",
            "smooth",
            "inside_well",
            "rho_A_unreg [m]",
            "rho_B_unreg [m]",
            "shift_A [m]",
            "target_A [m]",
            "shift_B [m]",
        ],
        cap.shift_a.iter().zip(&cap.shift_b).enumerate().map(|(i, (pa, pb))| {
            row([
                num(pa.z),
                flag(pa.smooth),
                flag(pa.inside_well),
                num(cap.unreg_a[i]),
                num(cap.unreg_b[i]),
                num(pa.fit.intercept),
                num(pa.target),
                num(pb.fit.intercept),
            ])
        }),
    )?;
    let win = free_window(cfg)?;
    out.table("window.csv", &WINDOW_COLUMNS, win.rows())?;
    let well = rep.well_points().count();
    let checks = [
        Check::at_least("well_points", well as f64, 1.0),
        Check::at_most("plateau", rep.plateau_error(), PLATEAU_TOL),
        Check::at_most("reconstruction", rep.identity_error(), IDENTITY_TOL),
        Check::at_most("capri_a", cap.shift_a_error(), CAPRI_TOL),
        Check::at_most("capri_b", cap.shift_b_error(pc.eta / PI), CAPRI_TOL),
        Check::at_most("bilinear_window_constancy", win.spread(), PLATEAU_TOL),
    ];
    let mut results = vec![
        pair("epsilons", eps.iter().map(|&e| num(e)).collect::<Vec<_>>().join(" ")),
        pair("identity_damping", set.identity.scale().map_or("none".into(), num)),
        pair("unreg_damping", set.unreg.scale().map_or("none".into(), num)),
    ];
    for (i, d) in rep.diagnostics.iter().chain(&cap.diagnostics).enumerate() {
        results.push(pair(&format!("diagnostic.{i}"), d));
    }
    results.extend(tolerances(&[("plateau", PLATEAU_TOL), ("reconstruction", IDENTITY_TOL), ("capri", CAPRI_TOL)]));
    out.finish(&checks, &results)
}

/// Time evolution through the ramp compared with the gauge-rotated
/// reference, plus overlaps of the end states with the mapped B mode.
pub fn evolve(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let ev = &cfg.evolution;
    let pc = cfg.potential_with_cutoff(ev.cutoff)?;
    let mut out = RunDir::create(dir, "evolve", cfg)?;
    let model = SpectralModel::new(&pc)?;
    let a = diagonalize(&model.hamiltonian_a())?;
    let first = a
        .energies()
        .iter()
        .position(|&e| e > 0.0)
        .ok_or_else(|| anyhow!("no positive-energy A mode"))?;
    let index = first + ev.mode;
    if index >= a.len() {
        bail!("evolution.mode: {} exceeds the {} positive-energy modes", ev.mode, a.len() - first);
    }
    let energy = a.energies()[index];
    let psi0 = a.coefficient_vector(index);
    let ramp = cfg.ramp()?;
    let mut schedule = EvolutionSchedule::around(ramp, ev.dt);
    schedule.stride = ev.stride;
    let rep = verify_reconstruction(&model, &psi0, schedule, ev.oversample)?;
    out.table(
        "trajectory.csv",
        &["t [1/m]", "distance"],
        rep.distances.iter().map(|&(t, d)| row([num(t), num(d)])),
    )?;

    let end = |dt: f64| -> Result<Vec<_>> {
        let traj = propagate_general(&model, &psi0, EvolutionSchedule::around(ramp, dt))?;
        Ok(traj.last().cloned().unwrap_or_default())
    };
    let (x2, x4) = (end(0.5 * ev.dt)?, end(0.25 * ev.dt)?);
    let ratio = distance(&rep.final_direct, &x2) / distance(&x2, &x4);

    let mut overlaps = vec![(ev.t_f, mapped_mode_overlap(&model, &psi0, &rep.final_direct, ev.oversample))];
    let mut finals = vec![rep.final_direct.clone()];
    for &t_f in &ev.alt_t_f {
        let traj = propagate_general(&model, &psi0, EvolutionSchedule::around(RampSpec::new(t_f)?, ev.dt))?;
        let last = traj.last().cloned().unwrap_or_default();
        overlaps.push((t_f, mapped_mode_overlap(&model, &psi0, &last, ev.oversample)));
        finals.push(last);
    }
    let shape = finals
        .iter()
        .skip(1)
        .map(|f| 1.0 - inner(&finals[0], f).norm())
        .fold(0.0, f64::max);
    out.table(
        "overlaps.csv",
        &["t_f [1/m]", "overlap_re", "overlap_im", "abs_overlap", "deficit"],
        overlaps.iter().map(|&(t, o)| row([num(t), num(o.re), num(o.im), num(o.norm()), num(1.0 - o.norm())])),
    )?;
    let deficit = overlaps.iter().map(|(_, o)| 1.0 - o.norm()).fold(shape, f64::max);
    let drift = rep.norm_drift_direct.max(rep.norm_drift_reference);
    let checks = [
        Check::at_most("max_distance", rep.max_distance, DISTANCE_TOL),
        Check::at_most("norm_drift", drift, NORM_DRIFT_TOL),
        Check::at_least("order_ratio_low", ratio, ORDER_RATIO.0),
        Check::at_most("order_ratio_high", ratio, ORDER_RATIO.1),
        Check::at_most("overlap_deficit", deficit, DEFICIT_TOL),
        Check::at_most("end_overlap_deficit", 1.0 - rep.end_overlap.norm(), END_OVERLAP_TOL),
    ];
    let mut results = vec![
        pair("initial_energy", num(energy)),
        pair("steps", schedule.steps()),
        pair("norm_drift_direct", num(rep.norm_drift_direct)),
        pair("norm_drift_reference", num(rep.norm_drift_reference)),
        pair("max_projection_loss", num(rep.max_projection_loss)),
        pair("end_overlap", num(rep.end_overlap.norm())),
        pair("step_halving_ratio", num(ratio)),
        pair("end_state_deficit", num(shape)),
    ];
    for (i, w) in rep.warnings.iter().enumerate() {
        results.push(pair(&format!("warning.{i}"), w));
    }
    results.extend(tolerances(&[
        ("distance", DISTANCE_TOL),
        ("norm_drift", NORM_DRIFT_TOL),
        ("deficit", DEFICIT_TOL),
        ("end_overlap", END_OVERLAP_TOL),
    ]));
    out.finish(&checks, &results)
}

/// One split distance of the free singularity window.
struct WindowPoint {
    eps: f64,
    law: f64,
    analytic: FreeBilinear,
    boxed: Complex64,
    analytic_dev: f64,
    box_dev: f64,
}

/// Free bracket on `[max(4/k_max, 16/Λ), 0.1/m]` from a box of
/// `numerics.free_cutoff` plane waves damped at `Λ = k_max/4`, and from the
/// continuum integral.
struct FreeWindow {
    lo: f64,
    hi: f64,
    lambda: f64,
    points: Vec<WindowPoint>,
}

const WINDOW_COLUMNS: [&str; 9] = [
    "epsilon [1/m]",
    "law_2_over_pi_eps [m]",
    "analytic_im [m]",
    "massless_im [m]",
    "box_im [m]",
    "box_re [m]",
    "eps_times_box_over_2_over_pi",
    "analytic_rel_dev",
    "box_rel_dev",
];

impl FreeWindow {
    fn worst(&self, f: impl Fn(&WindowPoint) -> f64) -> f64 {
        self.points.iter().map(f).fold(0.0, f64::max)
    }

    /// `(max − min)/mean` of `ε·|bracket|·π/2` over the box sums.
    fn spread(&self) -> f64 {
        let v: Vec<f64> = self.points.iter().map(|w| w.boxed.norm() / w.law).collect();
        let max = v.iter().cloned().fold(f64::MIN, f64::max);
        let min = v.iter().cloned().fold(f64::MAX, f64::min);
        (max - min) / (v.iter().sum::<f64>() / v.len() as f64)
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .map(|w| {
                row([
                    num(w.eps),
                    num(w.law),
                    num(w.analytic.exact.im),
                    num(w.analytic.massless.im),
                    num(w.boxed.im),
                    num(w.boxed.re),
                    num(w.boxed.norm() / w.law),
                    num(w.analytic_dev),
                    num(w.box_dev),
                ])
            })
            .collect()
    }
}

fn free_window(cfg: &RunConfig) -> Result<FreeWindow> {
    let p = &cfg.physics;
    let n = cfg.numerics.free_cutoff;
    let k_max = 2.0 * PI * n as f64 / p.box_len;
    let lambda = 0.25 * k_max;
    let (lo, hi) = ((4.0 / k_max).max(16.0 / lambda), 0.1 / p.m);
    if lo >= hi {
        bail!("numerics.free_cutoff: singularity window [{lo:.4}, {hi:.4}] is empty; raise it");
    }
    let mut points = Vec::new();
    for i in 0..8 {
        let eps = lo * (hi / lo).powf(i as f64 / 7.0);
        let law = 2.0 / (PI * eps);
        let boxed = free_bilinear_box(p.m, p.box_len, n, eps, Regulator::Gaussian(lambda));
        let analytic = free_bilinear_analytic(p.m, eps, 200.0 / eps)?;
        let dev = |v: Complex64| if v.im > 0.0 { (v.norm() / law - 1.0).abs() } else { f64::INFINITY };
        points.push(WindowPoint {
            eps,
            law,
            analytic,
            boxed,
            analytic_dev: dev(analytic.exact),
            box_dev: dev(boxed),
        });
    }
    Ok(FreeWindow { lo, hi, lambda, points })
}

/// Free-field bracket against the `2i/(πε)` law, the damped exponential
/// integral and the plane-wave normalization.
pub fn freefield(cfg: &RunConfig, dir: &Path) -> Result<bool> {
    let p = &cfg.physics;
    let win = free_window(cfg)?;
    let mut out = RunDir::create(dir, "freefield", cfg)?;
    out.table("bilinear.csv", &WINDOW_COLUMNS, win.rows())?;

    let eps = 0.7 / p.m;
    let pole = 1.0 / eps;
    let mut damped = Vec::new();
    for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
        let v = damped_exponential_integral(eps, delta)?;
        let err = (v - Complex64::new(0.0, pole)).norm() / pole;
        damped.push((delta, v, err));
    }
    let pole_err = damped.last().map_or(f64::INFINITY, |d| d.2);
    out.table(
        "damped.csv",
        &["delta [m]", "re [m]", "im [m]", "rel_err_vs_i_over_eps"],
        damped.iter().map(|&(d, v, e)| row([num(d), num(v.re), num(v.im), num(e)])),
    )?;

    let mut worst_norm = 0.0f64;
    let mut norms = Vec::new();
    for k in -8i32..=8 {
        let q = 2.0 * PI * f64::from(k) / p.box_len;
        for j in [1i8, -1] {
            let n2 = free_normalization_sq(j, q, p.m);
            let (u, l) = free_spinor(j, q, p.m);
            let err = (u * u - n2).abs();
            worst_norm = worst_norm.max(err).max((u * u + l * l - 1.0).abs());
            norms.push(row([num(q), j.to_string(), num(f64::from(j) * q.hypot(p.m)), num(n2), num(u * u), num(err)]));
        }
    }
    out.table(
        "normalization.csv",
        &["p [m]", "j", "E [m]", "N_sq", "upper_sq", "abs_diff"],
        norms,
    )?;

    let checks = [
        Check::at_most("box_singularity", win.worst(|w| w.box_dev), SINGULARITY_TOL),
        Check::at_most("analytic_singularity", win.worst(|w| w.analytic_dev), SINGULARITY_TOL),
        Check::at_most("window_constancy", win.spread(), PLATEAU_TOL),
        Check::at_most("damped_pole", pole_err, POLE_TOL),
        Check::at_most("normalization", worst_norm, NORMALIZATION_TOL),
    ];
    let mut results = vec![
        pair("window_low", num(win.lo)),
        pair("window_high", num(win.hi)),
        pair("box_Lambda", num(win.lambda)),
        pair("damped_epsilon", num(eps)),
    ];
    results.extend(tolerances(&[("singularity", SINGULARITY_TOL), ("pole", POLE_TOL), ("normalization", NORMALIZATION_TOL)]));
    out.finish(&checks, &results)
}
