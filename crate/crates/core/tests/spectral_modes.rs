use dirac1d::evolution::{distance, norm};
use dirac1d::potentials::*;
use dirac1d::quadrature::{integrate_real, Adaptive};
use dirac1d::spectral::*;
use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64;
use proptest::prelude::*;

fn free(cutoff: usize) -> PotentialConfig {
    PotentialConfig::reference().with_eta(0.0).with_cutoff(cutoff)
}

fn bound_index(modes: &ModeSet) -> usize {
    modes.energies().iter().position(|&e| e > 0.5).unwrap()
}

fn product(a: &Mat<Complex64>, b: &Mat<Complex64>) -> Mat<Complex64> {
    let mut out = Mat::<Complex64>::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a.as_ref(), b.as_ref(), Complex64::new(1.0, 0.0), Par::Seq);
    out
}

/// Largest entry of `H_B − R H_A R†` on wavenumbers `|n| ≤ N/2`.
fn conjugation_residual(cutoff: usize) -> f64 {
    let model = SpectralModel::new(&PotentialConfig::reference().with_cutoff(cutoff)).unwrap();
    let r = model.rotation_matrix().unwrap();
    let ha = model.hamiltonian_a().matrix;
    let hb = model.hamiltonian_b().unwrap().matrix;
    let rhr = product(&product(&r, &ha), &r.adjoint().to_owned());
    let nw = model.basis.waves();
    let central = |i: usize| {
        let n = (i % nw) as i64 - cutoff as i64;
        n.unsigned_abs() as usize <= cutoff / 2
    };
    let mut worst = 0.0f64;
    for j in (0..2 * nw).filter(|&j| central(j)) {
        for i in (0..2 * nw).filter(|&i| central(i)) {
            worst = worst.max((hb[(i, j)] - rhr[(i, j)]).norm());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn assemblies_are_hermitian(m in 0.5..2.0f64, r in 0.0..0.95f64, a in 1.0..5.0f64, t in -1.0..4.0f64, comp in any::<bool>()) {
        let cfg = PotentialConfig { m, eta: r * m, a, box_len: 5.0 * a, compensate: comp, ..PotentialConfig::reference().with_cutoff(20) };
        let model = SpectralModel::new(&cfg).unwrap();
        prop_assert!(model.hamiltonian_a().hermiticity_residual() <= 1e-12);
        prop_assert!(model.hamiltonian_b().unwrap().hermiticity_residual() <= 1e-12);
        let h = model.hamiltonian_general(RampSpec::new(3.0).unwrap(), t);
        prop_assert!(h.hermiticity_residual() <= 1e-12);
    }
}

#[test]
fn general_reduces_to_endpoints() {
    let model = SpectralModel::new(&PotentialConfig::reference().with_cutoff(32)).unwrap();
    let ramp = RampSpec::new(5.0).unwrap();
    let a = model.hamiltonian_a().matrix;
    let b = model.hamiltonian_b().unwrap().matrix;
    let before = model.hamiltonian_general(ramp, -1.0).matrix;
    let after = model.hamiltonian_general(ramp, 10.0).matrix;
    let max_diff = |x: &Mat<Complex64>, y: &Mat<Complex64>| {
        let mut w = 0.0f64;
        for j in 0..x.ncols() {
            for i in 0..x.nrows() {
                w = w.max((x[(i, j)] - y[(i, j)]).norm());
            }
        }
        w
    };
    assert!(max_diff(&a, &before) <= 1e-10);
    assert!(max_diff(&b, &after) <= 1e-10);
}

#[test]
fn zero_theta_b_equals_free_a() {
    let model = SpectralModel::new(&free(24)).unwrap();
    let a = model.hamiltonian_a().matrix;
    let b = model.hamiltonian_b().unwrap().matrix;
    assert!(distance(
        &a.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
        &b.col_iter().flat_map(|c| c.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
    ) <= 1e-12);
}

#[test]
fn modes_split_evenly_by_sign() {
    let model = SpectralModel::new(&PotentialConfig::reference().with_cutoff(64)).unwrap();
    let modes = diagonalize(&model.hamiltonian_a()).unwrap();
    assert_eq!(modes.len(), 2 * (2 * 64 + 1));
    assert_eq!(modes.negative_count(), modes.len() / 2);
    for i in 0..modes.len() {
        assert_eq!(f64::from(modes.sign(i)), modes.energies()[i].signum());
    }
    assert!(modes.gram_residual() <= 1e-10);
    assert!(modes.energies().windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn eigenvalue_only_path_matches() {
    let model = SpectralModel::new(&PotentialConfig::reference().with_cutoff(48)).unwrap();
    let h = model.hamiltonian_b().unwrap();
    let full = diagonalize(&h).unwrap();
    let only = eigenvalues(&h).unwrap();
    assert!(full.energies().iter().zip(&only).all(|(a, b)| (a - b).abs() <= 1e-11));
}

#[test]
fn bound_mode_is_normalized_in_position_space() {
    let model = SpectralModel::new(&PotentialConfig::reference().with_cutoff(64)).unwrap();
    let modes = diagonalize(&model.hamiltonian_a()).unwrap();
    let i = bound_index(&modes);
    let opts = Adaptive { abs_tol: 1e-11, initial_panels: 400, ..Adaptive::default() };
    let (total, _) = integrate_real(|z| modes.evaluate_mode(i, z).unwrap().norm_sqr(), -20.0, 20.0, opts, "norm").unwrap();
    assert!((total - 1.0).abs() <= 1e-8);
}

#[test]
fn free_threshold_mode_is_upper_constant() {
    let model = SpectralModel::new(&free(32)).unwrap();
    let modes = diagonalize(&model.hamiltonian_a()).unwrap();
    let i = modes.energies().iter().position(|&e| (e - 1.0).abs() < 1e-12).unwrap();
    let u0 = modes.evaluate_mode(i, 0.0).unwrap();
    for z in [-17.0, -3.3, 4.1, 19.9] {
        let u = modes.evaluate_mode(i, z).unwrap();
        assert!((u.upper - u0.upper).norm() <= 1e-12);
        assert!(u.lower.norm() <= 1e-12);
    }
    assert!((u0.upper.re - 1.0 / 40f64.sqrt()).abs() <= 1e-12);
}

#[test]
fn chiral_map_preserves_pointwise_density() {
    let cfg = PotentialConfig::reference().with_cutoff(64);
    let model = SpectralModel::new(&cfg).unwrap();
    let a = diagonalize(&model.hamiltonian_a()).unwrap();
    let b = chiral_map_modes(&a, &model.theta).unwrap();
    assert_eq!(a.energies(), b.energies());
    let zs: Vec<f64> = (0..100).map(|i| -19.9 + 0.398 * i as f64 + 0.013 * (i as f64).sin()).collect();
    for i in [0, 17, bound_index(&a), a.len() - 1] {
        for &z in &zs {
            let ua = a.evaluate_mode(i, z).unwrap();
            let ub = b.evaluate_mode(i, z).unwrap();
            assert!((ua.norm_sqr() - ub.norm_sqr()).abs() <= 1e-10);
        }
    }
}

#[test]
fn chiral_map_is_unitary_on_the_grid() {
    let cfg = PotentialConfig::reference().with_cutoff(32);
    let model = SpectralModel::new(&cfg).unwrap();
    let a = diagonalize(&model.hamiltonian_a()).unwrap();
    let b = chiral_map_modes(&a, &model.theta).unwrap();
    // products of band-limited modes are resolved exactly by 4N+2 points
    let grid: Vec<f64> = (0..256).map(|j| -20.0 + 40.0 * j as f64 / 256.0).collect();
    let v = b.values_at(&grid);
    let w = 40.0 / 256.0;
    let mut worst = 0.0f64;
    for i in 0..b.len() {
        for j in 0..b.len() {
            let g: Complex64 = (0..grid.len())
                .map(|p| v.upper[(p, i)].conj() * v.upper[(p, j)] + v.lower[(p, i)].conj() * v.lower[(p, j)])
                .sum::<Complex64>()
                * w;
            worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).norm());
        }
    }
    assert!(worst <= 1e-8, "gram residual {worst:e}");
}

#[test]
fn a_modes_have_definite_parity() {
    let model = SpectralModel::new(&PotentialConfig::reference().with_cutoff(64)).unwrap();
    let modes = diagonalize(&model.hamiltonian_a()).unwrap();
    let nw = model.basis.waves();
    let mut worst = 0.0f64;
    for i in 0..modes.len() {
        let u = modes.coefficient_vector(i);
        // u(−z) → γ⁰u(−z) in coefficients: reverse n, flip the lower sign
        let pu: Vec<Complex64> = (0..2 * nw)
            .map(|r| if r < nw { u[nw - 1 - r] } else { -u[2 * nw - 1 - (r - nw)] })
            .collect();
        let overlap: Complex64 = u.iter().zip(&pu).map(|(a, b)| a.conj() * b).sum();
        worst = worst.max(1.0 - overlap.norm());
    }
    assert!(worst <= 1e-8, "parity deficit {worst:e}");
}

/// Residual on `|n| ≤ N/2`; the slots next to the cutoff carry the
/// truncation coupling and do not converge.
#[test]
fn mapped_modes_approach_b_eigenvectors() {
    let mut residuals = Vec::new();
    for cutoff in [64, 128, 256] {
        let model = SpectralModel::new(&PotentialConfig::reference().with_cutoff(cutoff)).unwrap();
        let a = diagonalize(&model.hamiltonian_a()).unwrap();
        let b = chiral_map_modes(&a, &model.theta).unwrap().project(8);
        let hb = model.hamiltonian_b().unwrap().matrix;
        let i = bound_index(&a);
        let u = b.coefficient_vector(i);
        let hu = apply_dense(&hb, &u);
        let e = a.energies()[i];
        let nw = model.basis.waves();
        let r: Vec<Complex64> = hu.iter().zip(&u).map(|(h, x)| h - e * x).collect();
        let central: Vec<Complex64> = r
            .iter()
            .enumerate()
            .filter(|(k, _)| ((k % nw) as i64 - cutoff as i64).unsigned_abs() as usize <= cutoff / 2)
            .map(|(_, x)| *x)
            .collect();
        residuals.push(norm(&central));
    }
    assert!(residuals[0] > residuals[1] && residuals[1] > residuals[2], "{residuals:?}");
}

#[test]
fn rotated_a_approaches_b_on_the_central_block() {
    let r: Vec<f64> = [64, 128, 256].into_iter().map(conjugation_residual).collect();
    assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
}

#[test]
fn lowest_bound_level_is_converged() {
    let level = |cutoff| {
        let model = SpectralModel::new(&PotentialConfig::reference().with_cutoff(cutoff)).unwrap();
        let e = eigenvalues(&model.hamiltonian_a()).unwrap();
        e.into_iter().find(|&x| x > 0.5).unwrap()
    };
    assert!((level(256) - level(512)).abs() < 1e-6);
}
