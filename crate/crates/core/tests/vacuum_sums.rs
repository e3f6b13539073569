use std::f64::consts::PI;
use std::sync::OnceLock;

use dirac1d::potentials::*;
use dirac1d::spectral::*;
use dirac1d::vacuum::*;
use num_complex::Complex64;

/// Measured `|bracket|·ε·π/2` of the free field at `mε = 10`.
const SUPPRESSION_AT_TEN: f64 = 1.870085e-4;

struct Sets {
    cfg: PotentialConfig,
    model: SpectralModel,
    a: ModeSet,
}

fn well() -> &'static Sets {
    static SETS: OnceLock<Sets> = OnceLock::new();
    SETS.get_or_init(|| {
        let cfg = PotentialConfig::reference().with_cutoff(64);
        let model = SpectralModel::new(&cfg).unwrap();
        let a = diagonalize(&model.hamiltonian_a()).unwrap();
        Sets { cfg, model, a }
    })
}

fn free_modes(cutoff: usize) -> (PotentialConfig, ModeSet, ModeSet) {
    let cfg = PotentialConfig::reference().with_eta(0.0).with_cutoff(cutoff);
    let model = SpectralModel::new(&cfg).unwrap();
    let a = diagonalize(&model.hamiltonian_a()).unwrap();
    let b = diagonalize(&model.hamiltonian_b().unwrap()).unwrap();
    (cfg, a, b)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn free_field_carries_no_charge() {
    let (cfg, a, _) = free_modes(64);
    let grid = uniform_grid(&cfg, 128);
    for reg in [Regulator::Sharp, Regulator::Gaussian(5.0)] {
        assert!(max_abs(&density_unreg(&a, &grid, reg).unwrap().values) <= 1e-10);
        let eps = 2.0 * a.basis().min_split();
        assert!(max_abs(&density_split(&a, &grid, eps, reg).unwrap().values) <= 1e-10);
    }
}

#[test]
fn free_field_has_no_anomaly_difference() {
    let (cfg, a, b) = free_modes(64);
    let model = SpectralModel::new(&cfg).unwrap();
    let grid = [-3.0, -0.5, 0.0, 1.7, 8.0];
    let eps = default_epsilons(&cfg, 4);
    let rep = anomaly_difference(&cfg, &model.theta, &a, &b, &grid, &eps, AnomalySettings::for_config(&cfg)).unwrap();
    for d in &rep.difference {
        assert!(max_abs(&d.values) <= 1e-10);
    }
}

#[test]
fn mapped_b_reproduces_a_density() {
    let s = well();
    let b = chiral_map_modes(&s.a, &s.model.theta).unwrap();
    let grid = uniform_grid(&s.cfg, 256);
    for reg in [Regulator::Sharp, Regulator::for_unreg(&s.cfg)] {
        let ra = density_unreg(&s.a, &grid, reg).unwrap();
        let rb = density_unreg(&b, &grid, reg).unwrap();
        assert!(ra.sup_distance(&rb) <= 1e-10);
        assert_eq!(rb.meta.system, SystemLabel::B);
        assert_eq!(rb.meta.convention, "half-commutator");
    }
    let reg = Regulator::for_unreg(&s.cfg);
    assert!((total_charge(&s.a, reg) - total_charge(&b, reg)).abs() <= 1e-8);
}

#[test]
fn total_charge_matches_integrated_profile() {
    let s = well();
    let reg = Regulator::for_unreg(&s.cfg);
    // band-limited density integrates exactly on a uniform grid of 4N+2 points
    let grid = uniform_grid(&s.cfg, 512);
    let rho = density_unreg(&s.a, &grid, reg).unwrap();
    let integral: f64 = rho.values.iter().sum::<f64>() * s.cfg.box_len / grid.len() as f64;
    assert!((integral - total_charge(&s.a, reg)).abs() <= 1e-10);
}

#[test]
fn split_below_resolution_is_rejected() {
    let s = well();
    let min = s.a.basis().min_split();
    match density_split(&s.a, &[0.0], 0.5 * min, Regulator::Sharp) {
        Err(dirac1d::Error::EpsilonTooSmall { minimum, .. }) => assert!((minimum - min).abs() < 1e-15),
        other => panic!("expected a resolution error, got {other:?}"),
    }
    assert!(gamma5_bilinear(&s.a, 0.0, 0.5 * min, Regulator::Sharp).is_err());
}

#[test]
fn split_density_is_real() {
    let s = well();
    let b = chiral_map_modes(&s.a, &s.model.theta).unwrap();
    let grid = uniform_grid(&s.cfg, 64);
    let eps = 3.0 * s.a.basis().min_split();
    assert!(density_split(&s.a, &grid, eps, Regulator::Sharp).is_ok());
    assert!(density_split(&b, &grid, eps, Regulator::Gaussian(4.0)).is_ok());
}

#[test]
fn bracket_is_imaginary() {
    let s = well();
    let grid = [-5.0, -1.0, 0.0, 0.3, 1.9, 2.2, 12.0];
    for eps in default_epsilons(&s.cfg, 3) {
        for reg in [Regulator::Sharp, Regulator::Gaussian(5.0)] {
            for p in gamma5_bilinear_profile(&s.a, &grid, eps, reg, BilinearForm::Sea).unwrap() {
                assert!(p.real_fraction() <= 1e-8);
            }
        }
    }
}

#[test]
fn sea_and_half_commutator_forms_agree_for_sharp_sums() {
    let s = well();
    let grid = [-2.5, 0.0, 1.0, 7.0];
    let eps = 2.0 * s.a.basis().min_split();
    let sea = gamma5_bilinear_profile(&s.a, &grid, eps, Regulator::Sharp, BilinearForm::Sea).unwrap();
    let half = gamma5_bilinear_profile(&s.a, &grid, eps, Regulator::Sharp, BilinearForm::HalfCommutator).unwrap();
    for (x, y) in sea.iter().zip(&half) {
        assert!((x.value - y.value).norm() <= 1e-10 * x.value.norm().max(1.0));
    }
}

#[test]
fn free_bracket_is_odd_in_the_split() {
    let (_, a, _) = free_modes(48);
    let eps = 1.5 * a.basis().min_split();
    for z in [-4.0, 0.0, 2.5] {
        let p = gamma5_bilinear(&a, z, eps, Regulator::Sharp).unwrap().value;
        let m = gamma5_bilinear(&a, z, -eps, Regulator::Sharp).unwrap().value;
        assert!((p + m).norm() <= 1e-10);
    }
}

#[test]
fn well_bracket_tracks_free_bracket_at_the_centre() {
    let s = well();
    for eps in default_epsilons(&s.cfg, 6) {
        let w = gamma5_bilinear(&s.a, 0.0, eps, Regulator::Sharp).unwrap().value;
        let f = free_bilinear_box(s.cfg.m, s.cfg.box_len, s.cfg.cutoff, eps, Regulator::Sharp);
        assert!((w.norm() / f.norm() - 1.0).abs() <= 0.05);
    }
}

#[test]
fn box_sum_matches_diagonalized_free_modes() {
    let (cfg, a, _) = free_modes(64);
    let reg = Regulator::Gaussian(0.25 * cfg.k_max());
    for eps in default_epsilons(&cfg, 4) {
        let diag = gamma5_bilinear(&a, 1.0, eps, reg).unwrap().value;
        let boxed = free_bilinear_box(cfg.m, cfg.box_len, cfg.cutoff, eps, reg);
        assert!((diag - boxed).norm() <= 1e-10 * boxed.norm().max(1.0));
    }
}

#[test]
fn bracket_scales_as_inverse_split_on_the_singularity_window() {
    let (l, n) = (40.0, 1usize << 16);
    let k_max = 2.0 * PI * n as f64 / l;
    let lambda = 0.25 * k_max;
    let lo = (4.0 / k_max).max(16.0 / lambda);
    let hi = 0.1;
    for i in 0..8 {
        let eps = lo * (hi / lo).powf(i as f64 / 7.0);
        let v = free_bilinear_box(1.0, l, n, eps, Regulator::Gaussian(lambda));
        assert!((v.norm() * eps * PI / 2.0 - 1.0).abs() <= 0.05);
        assert!(v.im > 0.0);
    }
}

#[test]
fn analytic_bracket_near_the_origin() {
    let eps = 0.01;
    let f = free_bilinear_analytic(1.0, eps, 200.0 / eps).unwrap();
    assert!((f.exact.norm() * eps * PI / 2.0 - 1.0).abs() <= 0.01);
    assert!((f.massless.norm() * eps * PI / 2.0 - 1.0).abs() <= 0.01);
    assert!(f.exact.im > 0.0);
}

#[test]
fn analytic_bracket_is_suppressed_at_large_separation() {
    let f = free_bilinear_analytic(1.0, 10.0, 20.0).unwrap();
    let ratio = f.exact.norm() * 10.0 * PI / 2.0;
    assert!(ratio < 1e-3);
    assert!((ratio / SUPPRESSION_AT_TEN - 1.0).abs() <= 0.01);
}

#[test]
fn damped_exponential_tends_to_pole() {
    let eps = 0.7;
    let target = -1.0 / Complex64::new(0.0, eps);
    let mut last = f64::INFINITY;
    for delta in [1e-2, 1e-3, 1e-4] {
        let v = damped_exponential_integral(eps, delta).unwrap();
        let err = (v - target).norm() / target.norm();
        assert!(err < last);
        last = err;
    }
    assert!(last <= 1e-3);
}

#[test]
fn capri_shift_vanishes_outside_an_uncompensated_well() {
    let cfg = PotentialConfig { compensate: false, ..PotentialConfig::reference().with_cutoff(128) };
    let model = SpectralModel::new(&cfg).unwrap();
    let a = diagonalize(&model.hamiltonian_a()).unwrap();
    let grid = [-12.0, -8.0, -5.0, 5.0, 8.0, 12.0];
    let eps = default_epsilons(&cfg, 6);
    let rep = capri_check(&cfg, &a, &a, &grid, &eps, AnomalySettings::for_config(&cfg)).unwrap();
    assert!(rep.shift_a.iter().all(|p| p.smooth && !p.inside_well));
    assert!(rep.shift_a_outside_error(cfg.eta / PI) <= CAPRI_TOL);
}

#[test]
fn short_window_is_rejected() {
    let s = well();
    let b = chiral_map_modes(&s.a, &s.model.theta).unwrap();
    let set = AnomalySettings::for_config(&s.cfg);
    let r = anomaly_difference(&s.cfg, &s.model.theta, &s.a, &b, &[0.0], &[0.5], set);
    assert!(matches!(r, Err(dirac1d::Error::Window(_))));
    let tiny = 0.1 * s.a.basis().min_split();
    let r = capri_check(&s.cfg, &s.a, &b, &[0.0], &[tiny, 0.4], set);
    assert!(matches!(r, Err(dirac1d::Error::EpsilonTooSmall { .. })));
}
