//! Randomized invariants of the public API.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use proptest::prelude::*;

use qcrit_core::fermion::{Boundary, QuadraticFermionModel, StringProbe};
use qcrit_core::ising::{ground_state_ed, IsingSpec};
use qcrit_core::kitaev::{bogoliubov_solution, winding_number, KitaevParams, MomentumGrid};
use qcrit_core::lmg::{lmg_thermal_state, LmgSpec};
use qcrit_core::qfi::{
    fisher_matrix_su2, k_producibility_bound, mixed_state_qfi, pure_state_qfi, wineland_squeezing, Axis,
    DenseObservable, DickeOperator, Observable, SpectralDecomposition, SpinChainOperator, Staggering, StateMatrix,
};
use qcrit_core::thermal::{
    crossover_temperature, degenerate_ground_qfi, fit_power_law, two_level_law, TwoLevelSpectrum,
};

fn symmetric(n: usize, raw: &[f64]) -> Array2<f64> {
    let a = Array2::from_shape_fn((n, n), |(i, j)| raw[i * n + j]);
    (&a + &a.t()) * 0.5
}

/// A full-rank density matrix `A A† / Tr` from raw entries.
fn density(n: usize, re: &[f64], im: &[f64]) -> Array2<Complex64> {
    let a = Array2::from_shape_fn((n, n), |(i, j)| Complex64::new(re[i * n + j], im[i * n + j]));
    let rho = a.dot(&a.t().mapv(|z| z.conj())) + Array2::<Complex64>::eye(n) * Complex64::new(1e-3, 0.0);
    let tr: Complex64 = rho.diag().sum();
    rho / tr
}

fn decomposition(n: usize, re: &[f64], im: &[f64]) -> SpectralDecomposition {
    SpectralDecomposition::from_density_matrix(density(n, re, im).view(), 0.0).unwrap()
}

fn complex_states(d: &SpectralDecomposition) -> Array2<Complex64> {
    match d.states() {
        StateMatrix::Complex(m) => m.clone(),
        StateMatrix::Real(m) => m.mapv(|x| Complex64::new(x, 0.0)),
    }
}

fn matrix_entries(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    let v = move || prop::collection::vec(-1.0..1.0f64, n * n);
    (v(), v(), v())
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qfi_lies_between_zero_and_the_largest_pure_state_value(
        (n, (re, im, op)) in (2usize..=6).prop_flat_map(|n| (Just(n), matrix_entries(n)))
    ) {
        let d = decomposition(n, &re, &im);
        let obs = DenseObservable::real(symmetric(n, &op)).unwrap();
        let f = mixed_state_qfi(&d, &obs).unwrap();
        let ceiling = (0..d.states().count())
            .map(|k| pure_state_qfi(&d.states().column(k), &obs).unwrap())
            .fold(0.0f64, f64::max);
        prop_assert!(f >= -1e-12, "F = {f}");
        prop_assert!(f <= ceiling + 1e-10, "F = {f} above {ceiling}");
    }

    #[test]
    fn qfi_ignores_global_phases_of_the_states(
        (n, (re, im, op)) in (2usize..=6).prop_flat_map(|n| (Just(n), matrix_entries(n))),
        phases in prop::collection::vec(0.0..std::f64::consts::TAU, 6),
    ) {
        let d = decomposition(n, &re, &im);
        let mut states = complex_states(&d);
        for (k, mut col) in states.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|z| z * Complex64::from_polar(1.0, phases[k]));
        }
        let rotated = SpectralDecomposition::new(d.probabilities().to_vec(), StateMatrix::Complex(states), None).unwrap();
        let obs = DenseObservable::real(symmetric(n, &op)).unwrap();
        let (a, b) = (mixed_state_qfi(&d, &obs).unwrap(), mixed_state_qfi(&rotated, &obs).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn qfi_ignores_the_order_of_equally_weighted_states(
        (n, (re, im, op)) in (3usize..=6).prop_flat_map(|n| (Just(n), matrix_entries(n))),
        seed in any::<u64>(),
    ) {
        let basis = complex_states(&decomposition(n, &re, &im));
        let m = n - 1;
        let mut order: Vec<usize> = (0..m).collect();
        let mut s = seed;
        for i in (1..m).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let pick = |cols: &[usize]| StateMatrix::Complex(basis.select(ndarray::Axis(1), cols));
        let first: Vec<usize> = (0..m).collect();
        let a = SpectralDecomposition::uniform_mixture(pick(&first)).unwrap();
        let b = SpectralDecomposition::uniform_mixture(pick(&order)).unwrap();
        let obs = DenseObservable::real(symmetric(n, &op)).unwrap();
        let (fa, fb) = (mixed_state_qfi(&a, &obs).unwrap(), mixed_state_qfi(&b, &obs).unwrap());
        prop_assert!((fa - fb).abs() <= 1e-10 * fa.abs().max(1.0), "{fa} vs {fb}");
    }

    #[test]
    fn qfi_is_convex_in_the_state(
        (n, (re, im, op)) in (2usize..=5).prop_flat_map(|n| (Just(n), matrix_entries(n))),
        (re2, im2, _) in matrix_entries(5),
        w in 0.05..0.95f64,
    ) {
        let (r1, r2) = (density(n, &re, &im), density(n, &re2[..n * n], &im2[..n * n]));
        let mix = &r1 * Complex64::new(w, 0.0) + &r2 * Complex64::new(1.0 - w, 0.0);
        let obs = DenseObservable::real(symmetric(n, &op)).unwrap();
        let f = |rho: &Array2<Complex64>| {
            mixed_state_qfi(&SpectralDecomposition::from_density_matrix(rho.view(), 0.0).unwrap(), &obs).unwrap()
        };
        let (f1, f2, fm) = (f(&r1), f(&r2), f(&mix));
        prop_assert!(fm <= w * f1 + (1.0 - w) * f2 + 1e-9, "{fm} > {w}·{f1} + (1−{w})·{f2}");
    }

    #[test]
    fn two_level_law_is_exact_for_two_degenerate_levels(
        mu in 1usize..=3,
        nu in 1usize..=3,
        op in prop::collection::vec(-1.0..1.0f64, 36),
        gap in 0.1..3.0f64,
        t in 0.05..5.0f64,
    ) {
        let n = mu + nu;
        let obs = DenseObservable::real(symmetric(n, &op[..n * n])).unwrap();
        let energies: Vec<f64> = (0..n).map(|k| if k < mu { 0.0 } else { gap }).collect();
        let states = StateMatrix::Real(Array2::eye(n));
        let ground = states.select(&(0..mu).collect::<Vec<_>>());
        let f0 = if mu == 1 {
            pure_state_qfi(&ground.column(0), &obs).unwrap()
        } else {
            degenerate_ground_qfi(&ground, &obs).unwrap()
        };
        prop_assume!(f0 > 1e-6);
        let law = two_level_law(&TwoLevelSpectrum::new(f0, gap).with_degeneracies(mu, nu), t).unwrap();
        let exact = mixed_state_qfi(&SpectralDecomposition::thermal(&energies, &states, t).unwrap(), &obs).unwrap();
        prop_assert!((exact - law).abs() <= 1e-8 * law.max(1e-3), "{exact} vs {law}");
    }

    #[test]
    fn squeezing_and_single_axes_stay_below_the_optimal_fisher_value(
        particles in (1usize..=5).prop_map(|h| 2 * h),
        lambda in -2.0..2.0f64,
        delta in -0.3..0.3f64,
        t in 0.02..2.0f64,
    ) {
        let spec = LmgSpec::new(particles, lambda).with_delta(delta);
        let state = lmg_thermal_state(&spec, t).unwrap();
        let ops = Axis::ALL.map(|a| DickeOperator::new(particles, a));
        let refs: [&dyn Observable; 3] = [&ops[0], &ops[1], &ops[2]];
        let fisher = fisher_matrix_su2(&state, refs).unwrap();
        for op in &ops {
            let f = mixed_state_qfi(&state, op).unwrap();
            prop_assert!(f <= fisher.optimal_value + 1e-9 * fisher.optimal_value.max(1.0));
        }
        if let Ok(xi2) = wineland_squeezing(&state, refs, particles) {
            let witness = particles as f64 / xi2;
            prop_assert!(witness <= fisher.optimal_value * (1.0 + 1e-9) + 1e-9, "N/ξ² = {witness} > {}", fisher.optimal_value);
        }
    }

    #[test]
    fn squeezing_witness_is_bounded_on_ising_thermal_states(
        sites in (1usize..=4).prop_map(|h| 2 * h),
        theta in -1.5..1.5f64,
        alpha in 0.0..4.0f64,
        t in 0.05..2.0f64,
    ) {
        let spec = IsingSpec::new(sites, theta, alpha).with_field(-1e-3, false);
        let state = ground_state_ed(&spec).unwrap().thermal(t).unwrap();
        let ops = Axis::ALL.map(|a| SpinChainOperator::collective(sites, a, Staggering::Uniform));
        let refs: [&dyn Observable; 3] = [&ops[0], &ops[1], &ops[2]];
        let fisher = fisher_matrix_su2(&state, refs).unwrap();
        if let Ok(xi2) = wineland_squeezing(&state, refs, sites) {
            let witness = sites as f64 / xi2;
            prop_assert!(witness <= fisher.optimal_value * (1.0 + 1e-9) + 1e-9, "N/ξ² = {witness} > {}", fisher.optimal_value);
        }
    }

    #[test]
    fn producibility_bound_grows_with_block_size(n in 1usize..=60, spread in 0.1..3.0f64) {
        let bounds: Vec<f64> = (1..=n).map(|k| k_producibility_bound(n, k, spread).unwrap()).collect();
        prop_assert!((bounds[0] - n as f64 * spread * spread).abs() <= 1e-12 * bounds[0]);
        prop_assert!(bounds.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn power_law_fit_is_scale_equivariant(
        a in 0.01..100.0f64,
        b in -2.0..2.0f64,
        noise in prop::collection::vec(-0.05..0.05f64, 8),
        scale in 1e-3..1e3f64,
    ) {
        let xs: Vec<f64> = (0..8).map(|i| 8.0 * 1.5f64.powi(i)).collect();
        let ys: Vec<f64> = xs.iter().zip(&noise).map(|(x, e)| a * x.powf(b) * (1.0 + e)).collect();
        let scaled: Vec<f64> = ys.iter().map(|y| y * scale).collect();
        let (f, g) = (fit_power_law(&xs, &ys).unwrap(), fit_power_law(&xs, &scaled).unwrap());
        prop_assert!((g.exponent - f.exponent).abs() <= 1e-10, "{} vs {}", g.exponent, f.exponent);
        prop_assert!((g.prefactor / (scale * f.prefactor) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn crossover_ignores_affine_rescaling_of_the_data(
        gap in 0.2..5.0f64,
        f0 in 0.1..10.0f64,
        scale in 0.01..100.0f64,
        shift in -10.0..10.0f64,
    ) {
        let ts = log_grid(0.02 * gap, 5.0 * gap, 120);
        let fs: Vec<f64> = ts.iter().map(|t| two_level_law(&TwoLevelSpectrum::new(f0, gap), *t).unwrap()).collect();
        let moved: Vec<f64> = fs.iter().map(|f| scale * f + shift).collect();
        let (a, b) = (crossover_temperature(&ts, &fs).unwrap(), crossover_temperature(&ts, &moved).unwrap());
        prop_assert!((a / b - 1.0).abs() <= 1e-8, "{a} vs {b}");
    }

    #[test]
    fn pairing_function_is_odd_on_the_grid(half in 2usize..=64, alpha in 0.0..6.0f64) {
        let grid = MomentumGrid::new(2 * half, alpha).unwrap();
        let l = grid.sites;
        for n in 0..l {
            prop_assert_eq!(grid.pairing[l - 1 - n], -grid.pairing[n]);
        }
    }

    #[test]
    fn bogoliubov_angles_reproduce_the_hamiltonian(
        half in 2usize..=32,
        mu in -3.0..3.0f64,
        pairing in -2.0..2.0f64,
        alpha in 0.0..5.0f64,
    ) {
        let params = KitaevParams::new(1.0, mu, pairing, alpha);
        let grid = MomentumGrid::new(2 * half, alpha).unwrap();
        let sol = bogoliubov_solution(&grid, &params).unwrap();
        for n in 0..grid.sites {
            let (e, th, k) = (sol.energies[n], sol.angles[n], grid.momenta[n]);
            prop_assert!(e >= 0.0);
            prop_assert!((e * th.sin() + 0.5 * pairing * grid.pairing[n]).abs() <= 1e-10);
            prop_assert!((e * th.cos() + (k.cos() + mu)).abs() <= 1e-10);
        }
    }

    #[test]
    fn momentum_energies_equal_real_space_singular_values(
        half in 2usize..=32,
        mu in -3.0..3.0f64,
        pairing in 0.1..2.0f64,
        alpha in 0.0..5.0f64,
    ) {
        let l = 2 * half;
        let params = KitaevParams::new(1.0, mu, pairing, alpha);
        let mut momentum = bogoliubov_solution(&MomentumGrid::new(l, alpha).unwrap(), &params).unwrap().energies;
        let green = QuadraticFermionModel::kitaev(l, &params, Boundary::Antiperiodic).unwrap().diagonalize().unwrap();
        let mut real: Vec<f64> = green.energies.to_vec();
        momentum.sort_by(f64::total_cmp);
        real.sort_by(f64::total_cmp);
        for (a, b) in momentum.iter().zip(&real) {
            prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn string_correlators_are_bounded_and_translation_invariant(
        half in 2usize..=12,
        mu in -3.0..3.0f64,
        pairing in -2.0..2.0f64,
        alpha in 0.0..5.0f64,
        shift in 1usize..4,
    ) {
        let l = 2 * half;
        let params = KitaevParams::new(1.0, mu, pairing, alpha);
        let green = QuadraticFermionModel::kitaev(l, &params, Boundary::Antiperiodic).unwrap().diagonalize().unwrap();
        let shift = shift.min(l - 2);
        for probe in StringProbe::ALL {
            let from_zero = green.string_correlators_from(probe, 0);
            let shifted = green.string_correlators_from(probe, shift);
            prop_assert!(from_zero.iter().all(|c| c.abs() <= 1.0 + 1e-8));
            for (a, b) in from_zero.iter().zip(&shifted) {
                prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn reversing_the_pairing_reverses_the_winding(
        mu in -3.0..3.0f64,
        pairing in 0.2..2.0f64,
        alpha in prop_oneof![0.0..0.95f64, 1.05..4.0f64],
    ) {
        let forward = winding_number(&KitaevParams::new(1.0, mu, pairing, alpha), 256);
        let backward = winding_number(&KitaevParams::new(1.0, mu, -pairing, alpha), 256);
        match (forward, backward) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, -b),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "asymmetric outcome {a:?} vs {b:?}"),
        }
    }
}

#[test]
fn density_helper_has_unit_trace() {
    let re: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
    let im: Vec<f64> = (0..9).map(|i| (i as f64).cos()).collect();
    let rho = density(3, &re, &im);
    let tr: f64 = rho.diag().iter().map(|z| z.re).sum();
    assert!((tr - 1.0).abs() < 1e-14);
    let p: Array1<f64> = Array1::from(decomposition(3, &re, &im).probabilities().to_vec());
    assert!((p.sum() - 1.0).abs() < 1e-12);
}
