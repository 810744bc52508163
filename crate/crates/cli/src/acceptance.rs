//! The fourteen end-to-end acceptance criteria.
//!
//! Every criterion is a list of named checks; it passes when all of its
//! gating checks pass. Informational checks are reported but never gate.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::time::{Duration, Instant};

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcrit_core::fermion::{
    ising_chi_theta, ising_ring_spectrum, nonlocal_qfi, optimal_nonlocal_qfi, pair_sum_qfi, Boundary, FermionFamily,
    QuadraticFermionModel, StringProbe,
};
use qcrit_core::fidelity::{fidelity_susceptibility_numeric, DEFAULT_STEP};
use qcrit_core::ising::{
    ground_state_ed, ground_state_only, optimal_ising_qfi, perturbative_fq_jy, thermal_qfi_ed, Boundary as SpinBoundary,
    IsingSpec,
};
use qcrit_core::kitaev::{
    bogoliubov_solution, chi_alpha_kmin_direct, chi_closed_form, local_qfi, mean_particle_number, pairing_function,
    winding_number, DrivingParameter, KitaevParams, MomentumGrid,
};
use qcrit_core::linalg::{sym_eigh, EigRange};
use qcrit_core::lmg::{
    lmg_entanglement_temperature, lmg_fidelity_susceptibility, lmg_gaps, lmg_ground_qfi, lmg_kmode_thermal_law,
    lmg_thermal_qfi, LmgSpec,
};
use qcrit_core::qfi::{
    fisher_matrix_su2, k_producibility_bound, mixed_state_qfi, pure_state_qfi, wineland_squeezing, Axis, DickeOperator,
    Observable, SpectralDecomposition, SpinChainOperator, Staggering, StateMatrix, StateVector,
};
use qcrit_core::thermal::{
    crossover_temperature, data_collapse, degenerate_ground_qfi, fit_power_law, linear_regression, qc_decay_exponent,
    two_level_law, ScalingCurve, TwoLevelSpectrum,
};
use qcrit_core::QcritError;

/// One measured quantity compared against its target.
#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub detail: String,
    pub passed: bool,
    pub gating: bool,
}

#[derive(Debug, Default)]
pub struct Checks {
    items: Vec<Check>,
}

impl Checks {
    fn push(&mut self, label: impl Into<String>, passed: bool, detail: String) {
        self.items.push(Check { label: label.into(), detail, passed, gating: true });
    }

    fn info(&mut self, label: impl Into<String>, detail: String) {
        self.items.push(Check { label: label.into(), detail, passed: true, gating: false });
    }

    /// `|value/target − 1| ≤ tol`.
    fn rel(&mut self, label: impl Into<String>, value: f64, target: f64, tol: f64) {
        let err = (value / target - 1.0).abs();
        self.push(label, err <= tol, format!("{value:.6} vs {target:.6} (rel {err:.2e}, tol {tol:.0e})"));
    }

    /// `|value − target| ≤ tol`.
    fn abs(&mut self, label: impl Into<String>, value: f64, target: f64, tol: f64) {
        let err = (value - target).abs();
        self.push(label, err <= tol, format!("{value:.6} vs {target:.6} ± {tol}"));
    }

    /// `value ≤ bound`.
    fn at_most(&mut self, label: impl Into<String>, value: f64, bound: f64) {
        self.push(label, value <= bound, format!("{value:.3e} ≤ {bound:.0e}"));
    }

    fn fail(&mut self, label: impl Into<String>, err: impl fmt::Display) {
        self.push(label, false, format!("error: {err}"));
    }

    pub fn items(&self) -> &[Check] {
        &self.items
    }

    pub fn passed(&self) -> bool {
        !self.items.is_empty() && self.items.iter().all(|c| c.passed || !c.gating)
    }
}

/// Outcome of one criterion.
#[derive(Debug)]
pub struct Report {
    pub id: u8,
    pub title: &'static str,
    pub checks: Checks,
    pub elapsed: Duration,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.passed()
    }

    /// The single summary line.
    pub fn headline(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        format!("criterion {:>2} {status}  {} ({:.1} s)", self.id, self.title, self.elapsed.as_secs_f64())
    }

    /// Indented per-check lines.
    pub fn detail_lines(&self) -> Vec<String> {
        self.checks
            .items()
            .iter()
            .map(|c| {
                let mark = match (c.gating, c.passed) {
                    (false, _) => "info",
                    (true, true) => "ok",
                    (true, false) => "FAIL",
                };
                format!("    [{mark:>4}] {}: {}", c.label, c.detail)
            })
            .collect()
    }
}

type Runner = fn(&mut Checks) -> Result<(), QcritError>;

pub const CRITERIA: [(u8, &str, Runner); 14] = [
    (1, "Ising fidelity susceptibility, overlap vs closed form", ising_fidelity),
    (2, "Ising critical QFI scaling from determinants", ising_critical_scaling),
    (3, "Ising limiting cases", ising_limits),
    (4, "Perturbative long-range Ising", perturbative_ising),
    (5, "LMG gaps", lmg_gap_laws),
    (6, "LMG QFI and squeezing", lmg_ground_analytics),
    (7, "LMG criticality", lmg_criticality),
    (8, "LMG thermal laws", lmg_thermal),
    (9, "Universal two-level law and crossovers", two_level_universality),
    (10, "Kitaev analytics", kitaev_analytics),
    (11, "Kitaev winding numbers", kitaev_topology),
    (12, "Kitaev fidelity susceptibilities", kitaev_susceptibilities),
    (13, "Kitaev QFI bounds and exponent map", kitaev_qfi),
    (14, "Spin ED vs free fermions, QFI invariants", oracle_equivalence),
];

/// Runs the selected criteria (all when `ids` is empty), in order.
pub fn run(ids: &[u8]) -> Vec<Report> {
    CRITERIA
        .iter()
        .filter(|(id, _, _)| ids.is_empty() || ids.contains(id))
        .map(|&(id, title, runner)| {
            let start = Instant::now();
            let mut checks = Checks::default();
            if let Err(e) = runner(&mut checks) {
                checks.fail("evaluation", e);
            }
            Report { id, title, checks, elapsed: start.elapsed() }
        })
        .collect()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn as_f64(ns: &[usize]) -> Vec<f64> {
    ns.iter().map(|&n| n as f64).collect()
}

/// Maximizer of a unimodal `f` on `[a, b]` by golden-section search.
fn golden_max(f: impl Fn(f64) -> Result<f64, QcritError>, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64), QcritError> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Root of `f` on a sign-changing bracket.
fn bisect(f: impl Fn(f64) -> Result<f64, QcritError>, mut a: f64, mut b: f64, tol: f64) -> Result<f64, QcritError> {
    let fa = f(a)?;
    if fa * f(b)? > 0.0 {
        return Err(QcritError::Undefined(format!("no sign change on [{a}, {b}]")));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if (f(m)? > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn ising_fidelity(c: &mut Checks) -> Result<(), QcritError> {
    let family = FermionFamily::new(|theta| QuadraticFermionModel::ising_nn(100, theta, Boundary::Antiperiodic));
    let mut worst: f64 = 0.0;
    for i in 0..=24 {
        let theta = -1.2 + 0.1 * i as f64;
        let numeric = fidelity_susceptibility_numeric(&family, theta, DEFAULT_STEP)?.chi;
        worst = worst.max((numeric / ising_chi_theta(100, theta) - 1.0).abs());
    }
    c.at_most("N=100, θ ∈ [−1.2, 1.2]: worst relative disagreement", worst, 1e-3);
    let family = FermionFamily::new(|theta| QuadraticFermionModel::ising_nn(256, theta, Boundary::Antiperiodic));
    let peak = fidelity_susceptibility_numeric(&family, -FRAC_PI_4, DEFAULT_STEP)?.chi;
    c.rel("N=256 peak χ vs N²/8", peak, 256.0 * 256.0 / 8.0, 0.01);
    Ok(())
}

fn ising_critical_scaling(c: &mut Checks) -> Result<(), QcritError> {
    let sizes = [32usize, 64, 128, 256, 512];
    let mut fq = Vec::new();
    for &l in &sizes {
        let green = QuadraticFermionModel::ising_nn(l, -FRAC_PI_4, Boundary::Open)?.diagonalize()?;
        fq.push(pair_sum_qfi(&green, StringProbe::Y, Staggering::Uniform));
    }
    let fit = fit_power_law(&as_f64(&sizes), &fq)?;
    c.abs("open chain prefactor a", fit.prefactor, 0.71, 0.05);
    c.abs("open chain exponent b", fit.exponent, 0.75, 0.05);
    let mut ring = Vec::new();
    for &l in &sizes {
        let green = QuadraticFermionModel::ising_nn(l, -FRAC_PI_4, Boundary::Antiperiodic)?.diagonalize()?;
        ring.push(nonlocal_qfi(&green, StringProbe::Y, Staggering::Uniform));
    }
    let ring_fit = fit_power_law(&as_f64(&sizes), &ring)?;
    c.info("closed ring (a, b)", format!("({:.4}, {:.4})", ring_fit.prefactor, ring_fit.exponent));
    Ok(())
}

fn ising_limits(c: &mut Checks) -> Result<(), QcritError> {
    let n = 10;
    let spec = IsingSpec::new(n, 0.0, f64::INFINITY);
    let f = optimal_ising_qfi(&ground_state_ed(&spec)?, &spec)?.fq_density;
    c.abs("θ = 0: f_Q", f, 1.0, 1e-12);
    for theta in [FRAC_PI_2, -FRAC_PI_2] {
        let spec = IsingSpec::new(n, theta, f64::INFINITY);
        let f = optimal_ising_qfi(&ground_state_ed(&spec)?, &spec)?.fq_density;
        c.abs(format!("θ = {theta:+.4}, ε = 0: f_Q"), f, n as f64, 1e-8);
    }
    Ok(())
}

fn perturbative_ising(c: &mut Checks) -> Result<(), QcritError> {
    let zeta10 = PI.powi(10) / 93555.0;
    let f = perturbative_fq_jy(200, 0.1, 10.0).fq_density;
    c.rel("α = 10, θ = 0.1, N = 200", f, 1.0 + 0.1 * zeta10, 0.01);
    let theta = 0.1;
    let sizes = [100usize, 200, 400, 800, 1600, 3200];
    let xs: Vec<f64> = sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = sizes.iter().map(|&n| perturbative_fq_jy(n, theta, 1.0).fq_density).collect();
    let fit = linear_regression(&xs, &ys)?;
    c.rel("α = 1: slope of f_Q against ln N", fit.slope, theta, 0.15);
    c.info("α = 1: R² of the semilog fit", format!("{:.6}", fit.r_squared));
    Ok(())
}

fn lmg_gap_laws(c: &mut Checks) -> Result<(), QcritError> {
    let (d1, _) = lmg_gaps(&LmgSpec::new(2000, -0.5))?;
    c.rel("Δ₁(Λ = −0.5)", d1, 0.5f64.sqrt(), 0.02);
    let (_, d2) = lmg_gaps(&LmgSpec::new(2000, -1.5))?;
    c.rel("Δ₂(Λ = −1.5)", d2, 1.25f64.sqrt(), 0.02);
    let sizes = [200usize, 400, 700, 1000, 2000, 4000];
    let gaps = sizes.iter().map(|&n| Ok(lmg_gaps(&LmgSpec::new(n, -1.0))?.0)).collect::<Result<Vec<_>, QcritError>>()?;
    let fit = fit_power_law(&as_f64(&sizes), &gaps)?;
    c.abs("Δ₁(Λ = −1) exponent", fit.exponent, -1.0 / 3.0, 0.05);
    Ok(())
}

fn lmg_ground_analytics(c: &mut Checks) -> Result<(), QcritError> {
    let q = lmg_ground_qfi(&LmgSpec::new(1000, -2.0))?;
    c.rel("Λ = −2: f_Q vs N(1 − 1/Λ²)", q.fq_density, 1000.0 * 0.75, 0.02);
    let q = lmg_ground_qfi(&LmgSpec::new(1000, -0.5))?;
    let target = 1.0 / 0.5f64.sqrt();
    c.rel("Λ = −0.5: f_Q vs 1/√(1+Λ)", q.fq_density, target, 0.02);
    match q.xi2_r {
        Some(x) => c.rel("Λ = −0.5: 1/ξ²_R vs 1/√(1+Λ)", 1.0 / x, target, 0.02),
        None => c.push("Λ = −0.5: 1/ξ²_R", false, "squeezing undefined".into()),
    }
    let q = lmg_ground_qfi(&LmgSpec::new(50, 1e6))?;
    c.rel("Λ = 10⁶, N = 50: twin-Fock f_Q vs (N+2)/2", q.fq_density, 26.0, 0.01);
    let sizes = [250usize, 500, 1000, 2000];
    let mut roots = Vec::new();
    for &n in &sizes {
        let xi = |lambda: f64| -> Result<f64, QcritError> {
            let q = lmg_ground_qfi(&LmgSpec::new(n, lambda))?;
            q.xi2_r.map(|x| x - 1.0).ok_or_else(|| QcritError::Undefined("squeezing undefined".into()))
        };
        roots.push(bisect(xi, -1.6, -1.05, 1e-7)?);
    }
    let inv: Vec<f64> = sizes.iter().map(|&n| 1.0 / n as f64).collect();
    let fit = linear_regression(&inv, &roots)?;
    c.info("ξ²_R = 1 roots (N = 250..2000)", format!("{roots:.5?}"));
    c.abs("ξ²_R = 1 root extrapolated to 1/N → 0", fit.intercept, -1.272, 0.01);
    Ok(())
}

fn lmg_criticality(c: &mut Checks) -> Result<(), QcritError> {
    let sizes = [200usize, 300, 500, 700, 1000, 1400, 2000];
    let (mut fq, mut chi, mut shift) = (Vec::new(), Vec::new(), Vec::new());
    for &n in &sizes {
        fq.push(lmg_ground_qfi(&LmgSpec::new(n, -1.0))?.fq_density);
        chi.push(lmg_fidelity_susceptibility(&LmgSpec::new(n, -1.0), 1e-4)?);
        let (argmax, _) = golden_max(|l| lmg_fidelity_susceptibility(&LmgSpec::new(n, l), 1e-4), -1.3, -0.95, 1e-7)?;
        shift.push((-1.0 - argmax).abs());
    }
    let xs = as_f64(&sizes);
    c.abs("f_Q(Λ_c) exponent", fit_power_law(&xs, &fq)?.exponent, 1.0 / 3.0, 0.05);
    c.abs("χ_Λ(Λ_c) exponent", fit_power_law(&xs, &chi)?.exponent, 4.0 / 3.0, 0.07);
    c.abs("peak shift exponent", fit_power_law(&xs, &shift)?.exponent, -2.0 / 3.0, 0.07);
    Ok(())
}

fn lmg_thermal(c: &mut Checks) -> Result<(), QcritError> {
    let spec = LmgSpec::new(2000, -0.5);
    let (d1, _) = lmg_gaps(&spec)?;
    let f0 = lmg_ground_qfi(&spec)?.fq;
    let mut worst: f64 = 0.0;
    for t in log_grid(0.02, d1, 30) {
        let ed = lmg_thermal_qfi(&spec, t)?.fq;
        worst = worst.max((ed / lmg_kmode_thermal_law(f0, d1, t, f64::INFINITY)? - 1.0).abs());
    }
    c.at_most("Λ = −0.5, T ≤ Δ₁: k → ∞ law vs ED", worst, 0.03);

    let lambda: f64 = -1.5;
    let plateau = 2000.0 / (lambda.abs() * (lambda * lambda - 1.0).sqrt());
    let q = lmg_thermal_qfi(&LmgSpec::new(2000, lambda), 0.05)?;
    c.rel("Λ = −1.5 plateau, F_zz", q.fisher.entries[2][2], plateau, 0.05);
    c.info("Λ = −1.5 plateau, optimal eigenvalue", format!("{:.2}", q.fq));

    let sizes = [250usize, 500, 1000, 2000];
    let mut t_max = Vec::new();
    for &n in &sizes {
        let boundary = |l: f64| match lmg_entanglement_temperature(&LmgSpec::new(n, l), 1, 0.01, 5.0) {
            Ok(t) => Ok(t),
            Err(QcritError::Undefined(_)) => Ok(0.0),
            Err(e) => Err(e),
        };
        t_max.push(golden_max(boundary, -1.1, -0.85, 1e-4)?.1);
    }
    let inv_sqrt: Vec<f64> = sizes.iter().map(|&n| (n as f64).powf(-0.5)).collect();
    let fit = linear_regression(&inv_sqrt, &t_max)?;
    c.info("T_max(N), N = 250..2000", format!("{t_max:.5?}"));
    c.rel("T_max extrapolated along N^(−1/2)", fit.intercept, 0.5, 0.02);

    let mut curves = Vec::new();
    for n in [500usize, 1000, 2000] {
        let spec = LmgSpec::new(n, -1.0);
        let ts = log_grid(0.01, 2.0, 50);
        let fs = ts.iter().map(|&t| Ok(lmg_thermal_qfi(&spec, t)?.fq)).collect::<Result<Vec<_>, QcritError>>()?;
        curves.push(ScalingCurve { size: n as f64, ts, fs });
    }
    let collapse = data_collapse(&curves, 4.0 / 3.0, 1.0 / 3.0, 40)?;
    c.at_most("Λ = −1 collapse spread", collapse.spread, 0.05);
    c.at_most("Λ = −1 collapse vs tanh(1/2x)", collapse.deviation_from(|x| (0.5 / x).tanh()), 0.05);

    let big = &curves[2];
    let density: Vec<f64> = big.fs.iter().map(|f| f / 2000.0).collect();
    let decay = qc_decay_exponent(&big.ts, &density, (0.1, 1.0))?;
    c.info(
        "Λ = −1 quantum-critical decay, N = 2000",
        format!("slope {:.3}, f_Q·T → {:.3}", decay.exponent, decay.prefactor),
    );
    Ok(())
}

/// Degeneracies `(μ, ν)` and gap `Δ` of the two lowest distinct levels.
fn lowest_levels(energies: &[f64]) -> (usize, usize, f64) {
    let tol = 1e-8 * energies[0].abs().max(1.0);
    let mu = energies.iter().take_while(|e| (*e - energies[0]).abs() <= tol).count();
    let e1 = energies[mu];
    let nu = energies[mu..].iter().take_while(|e| (*e - e1).abs() <= tol).count();
    (mu, nu, e1 - energies[0])
}

/// Worst relative gap between the thermal QFI and the two-level law for
/// `0 < T ≤ 0.3Δ`, with `(μ, ν)` read off the spectrum.
fn two_level_worst(energies: &[f64], states: &StateMatrix, op: &dyn Observable) -> Result<(usize, usize, f64), QcritError> {
    let (mu, nu, gap) = lowest_levels(energies);
    let ground: Vec<usize> = (0..mu).collect();
    let f0 = if mu == 1 {
        pure_state_qfi(&states.column(0), op)?
    } else {
        degenerate_ground_qfi(&states.select(&ground), op)?
    };
    let law = TwoLevelSpectrum::new(f0, gap).with_degeneracies(mu, nu);
    let mut worst: f64 = 0.0;
    for i in 1..=30 {
        let t = 0.3 * gap * i as f64 / 30.0;
        let exact = mixed_state_qfi(&SpectralDecomposition::thermal(energies, states, t)?, op)?;
        worst = worst.max((exact / two_level_law(&law, t)? - 1.0).abs());
    }
    Ok((mu, nu, worst))
}

fn two_level_universality(c: &mut Checks) -> Result<(), QcritError> {
    let spec = IsingSpec::new(8, -0.3, f64::INFINITY);
    let ed = ground_state_ed(&spec)?;
    let op = SpinChainOperator::collective(8, Axis::Z, Staggering::Uniform);
    let energies = ed.energies.to_vec();
    let (mu, nu, worst) = two_level_worst(&energies, &ed.states(), &op)?;
    c.at_most(format!("Ising θ = −0.3, N = 8, (μ, ν) = ({mu}, {nu})"), worst, 0.05);

    let l = 8;
    let model = QuadraticFermionModel::kitaev_theta(l, 0.0, 100.0)?;
    let eig = sym_eigh(model.fock_hamiltonian()?.view(), EigRange::All)?;
    let states = StateMatrix::Real(eig.vectors);
    let op = SpinChainOperator::collective(l, Axis::X, Staggering::Uniform);
    let (mu, nu, worst) = two_level_worst(&eig.values.to_vec(), &states, &op)?;
    c.push("Kitaev image, L = 8: degeneracies", (mu, nu) == (1, l), format!("(μ, ν) = ({mu}, {nu}), expected (1, {l})"));
    c.at_most("Kitaev image, L = 8: two-level law", worst, 0.05);

    let ts = log_grid(0.05, 5.0, 200);
    let fs = ts.iter().map(|&t| two_level_law(&TwoLevelSpectrum::new(1.0, 1.0), t)).collect::<Result<Vec<_>, QcritError>>()?;
    c.rel("analytic law Δ/T_cross", 1.0 / crossover_temperature(&ts, &fs)?, 2.70, 0.02);

    let spec = IsingSpec::new(10, -0.3, f64::INFINITY);
    let ed = ground_state_ed(&spec)?;
    let op = SpinChainOperator::collective(10, Axis::Z, Staggering::Uniform);
    let ts = log_grid(0.02, 5.0, 80);
    let fs = ts.iter().map(|&t| thermal_qfi_ed(&ed, t, &op)).collect::<Result<Vec<_>, QcritError>>()?;
    c.rel("Ising θ = −0.3, N = 10: Δ₁/T_cross", ed.gap(1) / crossover_temperature(&ts, &fs)?, 2.54, 0.10);

    let spec = LmgSpec::new(2000, -0.5);
    let (d1, _) = lmg_gaps(&spec)?;
    let ts = log_grid(0.05, 5.0, 60);
    let fs = ts.iter().map(|&t| Ok(lmg_thermal_qfi(&spec, t)?.fq)).collect::<Result<Vec<_>, QcritError>>()?;
    c.rel("LMG Λ = −0.5, N = 2000: Δ₁/T_cross", d1 / crossover_temperature(&ts, &fs)?, 2.40, 0.10);
    Ok(())
}

fn kitaev_analytics(c: &mut Checks) -> Result<(), QcritError> {
    let grid = MomentumGrid::new(64, f64::INFINITY)?;
    let worst = grid.momenta.iter().zip(&grid.pairing).map(|(k, f)| (f - 2.0 * k.sin()).abs()).fold(0.0, f64::max);
    c.at_most("f_∞(k) − 2 sin k on the L = 64 grid", worst, 1e-8);
    let grid = MomentumGrid::new(2000, 0.0)?;
    let worst = grid.momenta.iter().zip(&grid.pairing).map(|(k, f)| (f - 1.0 / (0.5 * k).tan()).abs()).fold(0.0, f64::max);
    c.at_most("f_0(k) − cot(k/2) on the L = 2000 grid", worst, 1e-8);
    let n = (2000.0 * (PI / 3.0) / (2.0 * PI) - 0.5).round();
    let k = PI * (2.0 * n + 1.0) / 2000.0;
    c.at_most("f_0 − cot(k/2) at the grid point nearest π/3", (pairing_function(k, 2000, 0.0) - 1.0 / (0.5 * k).tan()).abs(), 1e-8);

    for (alpha, target, name) in [(f64::INFINITY, PI, "A(∞)"), (1.0, FRAC_PI_2, "A(1)"), (0.0, FRAC_PI_4, "A(0)")] {
        let grid = MomentumGrid::new(4000, alpha)?;
        let sol = bogoliubov_solution(&grid, &KitaevParams::new(1.0, 1.0, 1.0, alpha))?;
        c.rel(format!("{name}: L·min ε_k / J at L = 4000"), sol.min_gap() * 4000.0, target, 0.01);
    }

    let l = 64;
    let grid = MomentumGrid::new(l, f64::INFINITY)?;
    let p = KitaevParams::new(1.0, 0.0, 1.0, f64::INFINITY);
    for (mu, target) in [(-1e4, 0.0), (0.0, 0.5 * l as f64), (1e4, l as f64)] {
        let n = mean_particle_number(&grid, &p.with_mu(mu))?;
        c.abs(format!("⟨N⟩ at μ = {mu}"), n, target, 1e-6 * l as f64);
    }
    Ok(())
}

/// Winding number read from the topological phase diagram for `Δ > 0`.
fn reference_winding(mu: f64, alpha: f64) -> f64 {
    if alpha > 1.0 {
        if mu.abs() < 1.0 { 1.0 } else { 0.0 }
    } else if mu < 1.0 {
        -0.5
    } else {
        0.5
    }
}

/// Whether a gap-closing or long-range transition line separates two cells.
fn critical_line_between(a: (f64, f64), b: (f64, f64)) -> bool {
    let crosses = |x: f64, y: f64, line: f64| (x - line) * (y - line) < 0.0;
    let short = a.1 > 1.0 && b.1 > 1.0;
    crosses(a.0, b.0, 1.0) || (short && crosses(a.0, b.0, -1.0)) || crosses(a.1, b.1, 1.0)
}

fn kitaev_topology(c: &mut Checks) -> Result<(), QcritError> {
    let mus = [-3.0, -2.0, -1.5, -0.5, 0.0, 0.5, 1.5, 2.0, 3.0];
    let alphas = [0.0, 0.25, 0.5, 0.75, 1.5, 3.0, f64::INFINITY];
    let mut map = vec![vec![0.0; mus.len()]; alphas.len()];
    let mut mismatches = Vec::new();
    for (r, &alpha) in alphas.iter().enumerate() {
        for (s, &mu) in mus.iter().enumerate() {
            let w = winding_number(&KitaevParams::new(1.0, mu, 1.0, alpha), 4096)?;
            map[r][s] = w;
            if w != reference_winding(mu, alpha) {
                mismatches.push(format!("(μ={mu}, α={alpha}): {w:+} vs {:+}", reference_winding(mu, alpha)));
            }
        }
    }
    let total = mus.len() * alphas.len();
    let shown: Vec<&String> = mismatches.iter().take(4).collect();
    c.push(
        "9×7 map vs the phase diagram",
        mismatches.is_empty(),
        format!("{}/{total} cells agree; first mismatches {shown:?}", total - mismatches.len()),
    );
    let flipped = alphas
        .iter()
        .enumerate()
        .flat_map(|(r, &a)| mus.iter().enumerate().map(move |(s, &m)| (r, s, m, a)))
        .all(|(r, s, mu, alpha)| map[r][s].abs() == reference_winding(mu, alpha).abs());
    c.info("magnitudes |W| agree in every cell", format!("{flipped}"));

    let mut spurious = Vec::new();
    for r in 0..alphas.len() {
        for s in 0..mus.len() {
            let here = (mus[s], alphas[r]);
            for (rr, ss) in [(r + 1, s), (r, s + 1)] {
                if rr < alphas.len() && ss < mus.len() {
                    let there = (mus[ss], alphas[rr]);
                    if map[r][s] != map[rr][ss] && !critical_line_between(here, there) {
                        spurious.push(format!("{here:?}→{there:?}"));
                    }
                }
            }
        }
    }
    c.push("W changes only across critical lines", spurious.is_empty(), format!("{} spurious changes {spurious:?}", spurious.len()));

    let mut unstable = 0;
    for &alpha in &alphas {
        for &mu in &mus {
            let p = KitaevParams::new(1.0, mu, 1.0, alpha);
            let reference = winding_number(&p, 4096)?;
            for l in [1024usize, 2048] {
                if winding_number(&p, l).ok() != Some(reference) {
                    unstable += 1;
                }
            }
        }
    }
    c.push("W unchanged for L ∈ {1024, 2048, 4096}", unstable == 0, format!("{unstable} size-dependent cells"));
    Ok(())
}

fn kitaev_susceptibilities(c: &mut Checks) -> Result<(), QcritError> {
    let sizes = [64usize, 128, 256, 512, 1024];
    let (mut chi_mu, mut chi_delta) = (Vec::new(), Vec::new());
    for &l in &sizes {
        let grid = MomentumGrid::new(l, f64::INFINITY)?;
        let p = KitaevParams::new(1.0, 1.0, 1.0, f64::INFINITY);
        let mut best: f64 = 0.0;
        for i in 0..=2000 {
            let mu = 0.8 + 0.4 * i as f64 / 2000.0;
            best = best.max(chi_closed_form(DrivingParameter::Mu, &grid, &p.with_mu(mu))?);
        }
        chi_mu.push(best);
        let grid = MomentumGrid::new(l, 0.0)?;
        let p = KitaevParams::new(1.0, 2.0, 0.0, 0.0);
        let mut best: f64 = 0.0;
        for i in 0..=200 {
            let delta = -0.05 + 0.1 * i as f64 / 200.0;
            best = best.max(chi_closed_form(DrivingParameter::Pairing, &grid, &p.with_pairing(delta))?);
        }
        let at_zero = chi_closed_form(DrivingParameter::Pairing, &grid, &p)?;
        if at_zero < best {
            c.push(format!("L = {l}: χ_Δ peaks at Δ = 0"), false, format!("{at_zero} < {best}"));
        }
        chi_delta.push(best);
    }
    let xs = as_f64(&sizes);
    c.abs("α = ∞, Δ = J: max_μ χ_μ exponent", fit_power_law(&xs, &chi_mu)?.exponent, 2.0, 0.1);
    c.abs("α = 0, μ = 2J: max_Δ χ_Δ exponent", fit_power_law(&xs, &chi_delta)?.exponent, 2.0, 0.1);

    let sizes = [100usize, 200, 500, 1000, 2000, 5000, 10000];
    let (mut peaks, mut argmax) = (Vec::new(), Vec::new());
    for &l in &sizes {
        let mut best = (0.0, 0.0);
        for i in 0..=120 {
            let alpha = 0.6 + 0.6 * i as f64 / 120.0;
            let v = chi_alpha_kmin_direct(l, &KitaevParams::new(1.0, 2.0, 1.0, alpha))?;
            if v > best.1 {
                best = (alpha, v);
            }
        }
        argmax.push(best.0);
        peaks.push(best.1);
    }
    let log2: Vec<f64> = sizes.iter().map(|&l| (l as f64).ln().powi(2)).collect();
    let fit = linear_regression(&log2, &peaks)?;
    c.push("χ_α(k_min) peak vs (ln L)²: R²", fit.r_squared > 0.95, format!("{:.5} > 0.95", fit.r_squared));
    let approaching = argmax.windows(2).all(|w| w[1] >= w[0]) && argmax.iter().all(|a| *a < 1.0);
    c.push("χ_α(k_min) argmax moves up toward α = 1", approaching, format!("{argmax:.3?}"));
    Ok(())
}

/// `b` from `f_Q − 1 = c L^b`, or zero when `f_Q − 1` vanishes identically.
fn scaling_exponent(sizes: &[usize], fq: &[f64]) -> Result<f64, QcritError> {
    let excess: Vec<f64> = fq.iter().map(|f| f - 1.0).collect();
    if excess.iter().all(|e| e.abs() < 1e-9) {
        return Ok(0.0);
    }
    Ok(fit_power_law(&as_f64(sizes), &excess)?.exponent)
}

fn kitaev_qfi(c: &mut Checks) -> Result<(), QcritError> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let l = 2 * rng.random_range(4..=128usize);
        let alpha = if rng.random_bool(0.1) { f64::INFINITY } else { rng.random_range(0.0..5.0) };
        let p = KitaevParams::new(1.0, rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), alpha);
        let zz = local_qfi(&MomentumGrid::new(l, alpha)?, &p)?.zz;
        worst = worst.max(zz / (2.0 * l as f64));
    }
    c.at_most("max F_zz / 2L over 1000 random points", worst, 1.0);

    let green = QuadraticFermionModel::kitaev(100, &KitaevParams::new(1.0, 0.0, 1.0, f64::INFINITY), Boundary::Antiperiodic)?
        .diagonalize()?;
    let fq = optimal_nonlocal_qfi(&green).fq_density * 100.0;
    c.rel("α = ∞, μ = 0, Δ = J, L = 100: F_Q vs L²", fq, 1e4, 1e-6);

    let sizes = [128usize, 160, 192, 224, 256, 320, 384, 448, 512];
    let inf = f64::INFINITY;
    let cells: [(f64, f64, f64, f64); 20] = [
        (-2.0, 1.0, inf, 0.0),
        (0.5, 1.0, inf, 1.0),
        (2.0, 1.0, inf, 0.0),
        (1.0, 1.0, inf, 0.75),
        (0.5, 0.0, inf, 0.5),
        (-2.0, 1.0, 3.0, 0.0),
        (0.5, 1.0, 3.0, 1.0),
        (2.0, 1.0, 3.0, 0.0),
        (1.0, 1.0, 3.0, 0.75),
        (-2.0, 1.0, 0.5, 0.75),
        (0.5, 1.0, 0.5, 0.75),
        (2.0, 1.0, 0.5, 0.75),
        (1.0, 1.0, 0.5, 0.5),
        (-2.0, 1.0, 0.0, 0.75),
        (0.5, 1.0, 0.0, 0.75),
        (2.0, 1.0, 0.0, 0.75),
        (1.0, 1.0, 0.0, 0.5),
        (0.5, 0.0, 0.0, 0.5),
        (2.0, 0.0, 0.0, 0.0),
        (-2.0, 0.0, 0.0, 0.0),
    ];
    let optimum = |mu: f64, delta: f64, alpha: f64| -> Result<Vec<f64>, QcritError> {
        sizes
            .iter()
            .map(|&l| {
                let model = QuadraticFermionModel::kitaev(l, &KitaevParams::new(1.0, mu, delta, alpha), Boundary::Antiperiodic)?;
                Ok(optimal_nonlocal_qfi(&model.diagonalize()?).fq_density)
            })
            .collect()
    };
    for (mu, delta, alpha, expected) in cells {
        let b = scaling_exponent(&sizes, &optimum(mu, delta, alpha)?)?;
        c.abs(format!("b(μ = {mu}, Δ = {delta}, α = {alpha})"), b, expected, 0.07);
    }
    for mu in [-2.0, 0.5, 2.0] {
        let b = scaling_exponent(&sizes, &optimum(mu, 1.0, 1.0)?)?;
        c.info(format!("b(μ = {mu}, Δ = 1, α = 1), finite-size dominated"), format!("{b:.3}"));
    }
    Ok(())
}

/// `⟨ψ|σ^a_i σ^a_j|ψ⟩` for `a ∈ {x, y}` with bit set meaning spin up.
fn spin_pair(psi: &ndarray::Array1<f64>, i: usize, j: usize, axis: Axis) -> f64 {
    let flip = (1usize << i) | (1usize << j);
    psi.iter()
        .enumerate()
        .map(|(s, a)| {
            let sign = match axis {
                Axis::Y => {
                    let up = |k: usize| if s >> k & 1 == 1 { 1.0 } else { -1.0 };
                    -up(i) * up(j)
                }
                _ => 1.0,
            };
            psi[s ^ flip] * sign * a
        })
        .sum()
}

fn spin_zz(psi: &ndarray::Array1<f64>, i: usize, j: usize) -> f64 {
    let up = |s: usize, k: usize| if s >> k & 1 == 1 { 1.0 } else { -1.0 };
    psi.iter().enumerate().map(|(s, a)| a * a * up(s, i) * up(s, j)).sum()
}

fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> Array2<Complex64> {
    let rank = rng.random_range(1..=3usize);
    let g = Array2::from_shape_fn((dim, rank), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = g.dot(&g.t().mapv(|z| z.conj()));
    let trace: f64 = rho.diag().iter().map(|z| z.re).sum();
    rho / Complex64::new(trace, 0.0)
}

fn oracle_equivalence(c: &mut Checks) -> Result<(), QcritError> {
    let inf = f64::INFINITY;
    let kitaev_points = [(0.4, 0.9, inf), (-1.5, 0.7, 2.0), (1.5, 1.0, 0.5), (0.3, -0.8, 1.3), (2.5, 0.6, 0.0)];
    let (mut spectra, mut correlators, mut fisher) = (0.0f64, 0.0f64, 0.0f64);
    let mut compared = 0;
    for l in [4usize, 6, 8, 10] {
        for &(mu, delta, alpha) in &kitaev_points {
            for boundary in [Boundary::Open, Boundary::Antiperiodic] {
                let model = QuadraticFermionModel::kitaev(l, &KitaevParams::new(1.0, mu, delta, alpha), boundary)?;
                let green = model.diagonalize()?;
                let eig = sym_eigh(model.fock_hamiltonian()?.view(), EigRange::All)?;
                let levels = green.many_body_spectrum(None)?;
                spectra = spectra.max(eig.values.iter().zip(&levels).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
                if eig.values[1] - eig.values[0] < 1e-6 {
                    continue;
                }
                compared += 1;
                let psi = eig.vectors.column(0).to_owned();
                for i in 0..l {
                    for j in i + 1..l {
                        for (probe, axis) in [(StringProbe::X, Axis::X), (StringProbe::Y, Axis::Y)] {
                            let ff = green.string_correlator(probe, i, j)?;
                            correlators = correlators.max((ff - spin_pair(&psi, i, j, axis)).abs());
                        }
                    }
                }
                let state = StateVector::Real(psi);
                for (probe, axis) in [(StringProbe::X, Axis::X), (StringProbe::Y, Axis::Y)] {
                    for stag in [Staggering::Uniform, Staggering::Alternating] {
                        let ed = pure_state_qfi(&state, &SpinChainOperator::collective(l, axis, stag))? / l as f64;
                        let ff = match boundary {
                            Boundary::Open => pair_sum_qfi(&green, probe, stag),
                            _ => nonlocal_qfi(&green, probe, stag),
                        };
                        fisher = fisher.max((ff - ed).abs());
                    }
                }
            }
        }
    }
    for l in [4usize, 6, 8, 10] {
        for theta in [-1.2, -0.6, 0.3, 1.1] {
            let spec = IsingSpec::new(l, theta, inf).with_boundary(SpinBoundary::Periodic);
            let ed = ground_state_ed(&spec)?;
            let ring = ising_ring_spectrum(l, theta)?;
            spectra = spectra.max(ed.energies.iter().zip(&ring).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            let (_, psi) = ground_state_only(&spec)?;
            let StateVector::Real(psi) = psi else { unreachable!("real Hamiltonian") };
            let green = QuadraticFermionModel::ising_nn(l, theta, Boundary::Antiperiodic)?.diagonalize()?;
            let mut sum_zz = 0.0;
            for j in 1..l {
                let ff = green.ising_correlators(0, j)?;
                let zz = spin_zz(&psi, 0, j);
                correlators = correlators
                    .max((ff.zz - zz).abs())
                    .max((ff.xx - spin_pair(&psi, 0, j, Axis::X)).abs())
                    .max((ff.yy - spin_pair(&psi, 0, j, Axis::Y)).abs());
                sum_zz += ff.zz;
            }
            let op = SpinChainOperator::collective(l, Axis::Z, Staggering::Uniform);
            let ed_fq = pure_state_qfi(&StateVector::Real(psi), &op)? / l as f64;
            fisher = fisher.max((1.0 + sum_zz - ed_fq).abs());
            compared += 1;
        }
    }
    c.info("ground states compared", format!("{compared}"));
    c.at_most("many-body spectra, max |ΔE|", spectra, 1e-8);
    c.at_most("string and spin correlators, max deviation", correlators, 1e-8);
    c.at_most("nonlocal f_Q, max deviation", fisher, 1e-8);

    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (mut convexity, mut squeezing, mut ceiling) = (0usize, 0usize, 0usize);
    let mut squeezing_tested = 0usize;
    for _ in 0..200 {
        let n = rng.random_range(4..=12usize);
        let ops = [DickeOperator::new(n, Axis::X), DickeOperator::new(n, Axis::Y), DickeOperator::new(n, Axis::Z)];
        let (r1, r2) = (random_density(&mut rng, n + 1), random_density(&mut rng, n + 1));
        let p: f64 = rng.random_range(0.0..1.0);
        let mix = &r1 * Complex64::new(p, 0.0) + &r2 * Complex64::new(1.0 - p, 0.0);
        let d1 = SpectralDecomposition::from_density_matrix(r1.view(), 1e-14)?;
        let d2 = SpectralDecomposition::from_density_matrix(r2.view(), 1e-14)?;
        let dm = SpectralDecomposition::from_density_matrix(mix.view(), 1e-14)?;
        let (f1, f2, fm) = (mixed_state_qfi(&d1, &ops[0])?, mixed_state_qfi(&d2, &ops[0])?, mixed_state_qfi(&dm, &ops[0])?);
        let scale = (n * n) as f64;
        if fm > p * f1 + (1.0 - p) * f2 + 1e-9 * scale {
            convexity += 1;
        }
        let generators: [&dyn Observable; 3] = [&ops[0], &ops[1], &ops[2]];
        let fmat = fisher_matrix_su2(&d1, generators)?;
        match wineland_squeezing(&d1, generators, n) {
            Ok(xi2) => {
                squeezing_tested += 1;
                if n as f64 / xi2 > fmat.optimal_value + 1e-9 * scale {
                    squeezing += 1;
                }
            }
            Err(QcritError::Undefined(_)) => {}
            Err(e) => return Err(e),
        }
        let bounds = (1..=n).map(|k| k_producibility_bound(n, k, 1.0)).collect::<Result<Vec<_>, QcritError>>()?;
        let monotone = bounds.windows(2).all(|w| w[1] >= w[0]);
        if !monotone || fmat.optimal_value > bounds[n - 1] + 1e-9 * scale {
            ceiling += 1;
        }
    }
    c.push("convexity on 200 random mixtures", convexity == 0, format!("{convexity} violations"));
    c.push(
        "N/ξ²_R ≤ F_Q",
        squeezing == 0 && squeezing_tested > 0,
        format!("{squeezing} violations in {squeezing_tested} states with nonzero mean spin"),
    );
    c.push("producibility bounds monotone in κ and F_Q ≤ N²", ceiling == 0, format!("{ceiling} violations"));
    Ok(())
}
