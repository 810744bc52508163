//! Momentum-space solution of the closed Kitaev chain with variable-range
//! pairing,
//!
//! `H = −(J/2) Σ_j (a†_j a_{j+1} + h.c.) − μ Σ_j (n_j − 1/2)
//!      + (Δ/2) Σ_j Σ_ℓ d_ℓ^{−α} (a_j a_{j+ℓ} + h.c.)`,
//!
//! on the antiperiodic grid `k_n = (2π/L)(n + 1/2)`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{ensure, QcritError, Result};

/// Quasiparticle energies below this fraction of `J` count as a closed gap.
pub const GAP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KitaevParams {
    /// Hopping amplitude `J`.
    pub hopping: f64,
    /// Chemical potential `μ`.
    pub mu: f64,
    /// Pairing amplitude `Δ`.
    pub pairing: f64,
    /// Pairing decay exponent; `f64::INFINITY` is nearest-neighbour pairing.
    pub alpha: f64,
}

impl KitaevParams {
    pub fn new(hopping: f64, mu: f64, pairing: f64, alpha: f64) -> Self {
        Self { hopping, mu, pairing, alpha }
    }

    /// One-parameter cut `J = Δ = 2 cos θ`, `μ = 2 sin θ`.
    pub fn thermic(theta: f64, alpha: f64) -> Self {
        Self::new(2.0 * theta.cos(), 2.0 * theta.sin(), 2.0 * theta.cos(), alpha)
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_pairing(mut self, pairing: f64) -> Self {
        self.pairing = pairing;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.alpha >= 0.0, || format!("alpha = {} must be non-negative", self.alpha))?;
        ensure(
            self.hopping.is_finite() && self.mu.is_finite() && self.pairing.is_finite(),
            || "Kitaev couplings must be finite".into(),
        )
    }
}

/// Ring distance `min(ℓ, L − ℓ)`.
pub fn ring_distance(offset: usize, sites: usize) -> usize {
    offset.min(sites - offset)
}

/// `d^{−α}`, keeping only `d = 1` for infinite `α`.
pub fn pairing_decay(d: usize, alpha: f64) -> f64 {
    if alpha.is_infinite() {
        if d == 1 { 1.0 } else { 0.0 }
    } else {
        (d as f64).powf(-alpha)
    }
}

/// `f_α(k) = Σ_{ℓ=1}^{L−1} sin(kℓ) / d_ℓ^α`.
pub fn pairing_function(k: f64, sites: usize, alpha: f64) -> f64 {
    (1..sites)
        .map(|l| (k * l as f64).sin() * pairing_decay(ring_distance(l, sites), alpha))
        .sum()
}

/// `∂f_α/∂α = −Σ_ℓ ln(d_ℓ) sin(kℓ) / d_ℓ^α`.
pub fn pairing_function_slope(k: f64, sites: usize, alpha: f64) -> f64 {
    (1..sites)
        .map(|l| {
            let d = ring_distance(l, sites);
            -(d as f64).ln() * (k * l as f64).sin() * pairing_decay(d, alpha)
        })
        .sum()
}

/// Antiperiodic momentum grid with the pairing function tabulated on it.
///
/// Sines are read from a table indexed by `(2n + 1)ℓ mod 2L`, so the grid
/// oddness `f(2π − k) = −f(k)` holds bit for bit.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    pub sites: usize,
    pub alpha: f64,
    pub momenta: Vec<f64>,
    pub pairing: Vec<f64>,
    pub pairing_slope: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(sites: usize, alpha: f64) -> Result<Self> {
        ensure(sites >= 2 && sites % 2 == 0, || format!("L = {sites} must be even and ≥ 2"))?;
        ensure(alpha >= 0.0, || format!("alpha = {alpha} must be non-negative"))?;
        let two_l = 2 * sites;
        let half_table: Vec<f64> = (0..=sites)
            .map(|m| if m == 0 || m == sites { 0.0 } else { (PI * m as f64 / sites as f64).sin() })
            .collect();
        let sine = |m: usize| if m <= sites { half_table[m] } else { -half_table[two_l - m] };
        let weights: Vec<(f64, f64)> = (1..sites)
            .map(|l| {
                let d = ring_distance(l, sites);
                let w = pairing_decay(d, alpha);
                (w, -(d as f64).ln() * w)
            })
            .collect();
        let momenta: Vec<f64> = (0..sites).map(|n| PI * (2 * n + 1) as f64 / sites as f64).collect();
        let mut pairing = Vec::with_capacity(sites);
        let mut pairing_slope = Vec::with_capacity(sites);
        for n in 0..sites {
            let step = 2 * n + 1;
            let (mut f, mut df) = (0.0, 0.0);
            let mut m = 0usize;
            for &(w, dw) in &weights {
                m = (m + step) % two_l;
                if w != 0.0 {
                    let s = sine(m);
                    f += s * w;
                    df += s * dw;
                }
            }
            pairing.push(f);
            pairing_slope.push(df);
        }
        Ok(Self { sites, alpha, momenta, pairing, pairing_slope })
    }

    /// Indices `n = 0..L/2` of the half zone `0 < k < π`.
    pub fn half_zone(&self) -> std::ops::Range<usize> {
        0..self.sites / 2
    }

    pub fn k_min(&self) -> f64 {
        self.momenta[0]
    }

    fn check(&self, params: &KitaevParams) -> Result<()> {
        params.validate()?;
        let same = self.alpha == params.alpha || (self.alpha.is_infinite() && params.alpha.is_infinite());
        ensure(same, || format!("grid tabulated for alpha = {}, got {}", self.alpha, params.alpha))
    }

    fn kinetic(&self, params: &KitaevParams, n: usize) -> f64 {
        params.hopping * self.momenta[n].cos() + params.mu
    }

    fn gap_term(&self, params: &KitaevParams, n: usize) -> f64 {
        0.5 * params.pairing * self.pairing[n]
    }
}

/// Quasiparticle energies and Bogoliubov angles on the grid.
#[derive(Debug, Clone)]
pub struct BogoliubovSolution {
    pub momenta: Vec<f64>,
    pub energies: Vec<f64>,
    /// `Θ_k` with `ε sinΘ = −(Δ/2) f` and `ε cosΘ = −(J cos k + μ)`.
    pub angles: Vec<f64>,
    pub pairing: Vec<f64>,
}

impl BogoliubovSolution {
    pub fn min_gap(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmin_gap(&self) -> usize {
        self.energies
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (n, &e)| if e < acc.1 { (n, e) } else { acc })
            .0
    }
}

pub fn bogoliubov_solution(grid: &MomentumGrid, params: &KitaevParams) -> Result<BogoliubovSolution> {
    grid.check(params)?;
    let mut energies = Vec::with_capacity(grid.sites);
    let mut angles = Vec::with_capacity(grid.sites);
    for n in 0..grid.sites {
        let (z, y) = (-grid.kinetic(params, n), -grid.gap_term(params, n));
        energies.push(z.hypot(y));
        angles.push(y.atan2(z));
    }
    Ok(BogoliubovSolution {
        momenta: grid.momenta.clone(),
        energies,
        angles,
        pairing: grid.pairing.clone(),
    })
}

fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI { PI } else { y }
}

/// Winding of the Anderson vector `(h_z, h_y) = (cosΘ_k, sinΘ_k)` across the
/// zone, rounded to the nearest half-integer.
///
/// For `α > 1` the pairing function is continuous through `k = 0` and the
/// closing step from `k_{L−1}` to `k_0 + 2π` completes the loop. For `α < 1`
/// it diverges there, pinning `Θ → ∓ sgn(Δ) π/2` at `k → 0⁺` and `k → 2π⁻`;
/// the open path is then anchored to those limits instead of closed, so the
/// slow `L^{1−α}` approach of the end angles does not spoil the rounding.
/// The line `α = 1` separates the two regimes and is reported as critical.
pub fn winding_number(params: &KitaevParams, sites: usize) -> Result<f64> {
    winding_number_on(&MomentumGrid::new(sites, params.alpha)?, params)
}

/// [`winding_number`] on a tabulated grid.
pub fn winding_number_on(grid: &MomentumGrid, params: &KitaevParams) -> Result<f64> {
    let sites = grid.sites;
    let sol = bogoliubov_solution(grid, params)?;
    let scale = params.hopping.abs().max(f64::MIN_POSITIVE);
    // In the infinite chain the gap closes wherever the pairing vanishes, at
    // k = π when μ = J, and at k = 0 when μ = −J unless f_α diverges there.
    let tol = GAP_TOLERANCE * scale;
    let critical = params.pairing.abs() < tol
        || (params.mu - params.hopping).abs() < tol
        || (params.alpha > 1.0 && (params.mu + params.hopping).abs() < tol)
        || (params.alpha - 1.0).abs() < tol;
    if critical || sol.min_gap() < GAP_TOLERANCE * scale {
        return Err(QcritError::Undefined("winding undefined at criticality (gapless spectrum)".into()));
    }
    let mut total: f64 = sol.angles.windows(2).map(|w| wrap_angle(w[1] - w[0])).sum();
    if params.alpha > 1.0 {
        total += wrap_angle(sol.angles[0] - sol.angles[sites - 1]);
    } else {
        let edge = params.pairing.signum() * FRAC_PI_2;
        total += wrap_angle(sol.angles[0] + edge) + wrap_angle(edge - sol.angles[sites - 1]);
    }
    let turns = total / (2.0 * PI);
    let rounded = (2.0 * turns).round() / 2.0;
    if (turns - rounded).abs() >= 0.1 {
        return Err(QcritError::IllConditioned(format!(
            "winding {turns:.4} is not close to a half-integer; increase L"
        )));
    }
    Ok(rounded + 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DrivingParameter {
    Mu,
    Pairing,
    Alpha,
}

/// Closed-form fidelity susceptibility `Σ_{0<k<π} (½ ∂Θ_k/∂λ)²`.
pub fn chi_closed_form(which: DrivingParameter, grid: &MomentumGrid, params: &KitaevParams) -> Result<f64> {
    grid.check(params)?;
    Ok(grid.half_zone().map(|n| chi_mode(which, grid, params, n)).sum())
}

fn chi_mode(which: DrivingParameter, grid: &MomentumGrid, params: &KitaevParams, n: usize) -> f64 {
    let c = grid.kinetic(params, n);
    mode_susceptibility(which, params, c, grid.pairing[n], grid.pairing_slope[n])
}

fn mode_susceptibility(which: DrivingParameter, params: &KitaevParams, kinetic: f64, f: f64, df: f64) -> f64 {
    let g = 0.5 * params.pairing * f;
    let eps2 = kinetic * kinetic + g * g;
    if eps2 == 0.0 {
        return f64::INFINITY;
    }
    let num = match which {
        DrivingParameter::Mu => (0.25 * params.pairing * f).powi(2),
        DrivingParameter::Pairing => kinetic * kinetic * (0.25 * f).powi(2),
        DrivingParameter::Alpha => kinetic * kinetic * (0.25 * params.pairing * df).powi(2),
    };
    num / (eps2 * eps2)
}

/// Single-mode `χ_α(k_min)`.
pub fn chi_alpha_kmin(grid: &MomentumGrid, params: &KitaevParams) -> Result<f64> {
    grid.check(params)?;
    Ok(chi_mode(DrivingParameter::Alpha, grid, params, 0))
}

/// `χ_α(k_min)` evaluated in `O(L)` without tabulating the whole grid.
pub fn chi_alpha_kmin_direct(sites: usize, params: &KitaevParams) -> Result<f64> {
    params.validate()?;
    ensure(sites >= 2 && sites % 2 == 0, || format!("L = {sites} must be even and ≥ 2"))?;
    let k = PI / sites as f64;
    let f = pairing_function(k, sites, params.alpha);
    let df = pairing_function_slope(k, sites, params.alpha);
    let kinetic = params.hopping * k.cos() + params.mu;
    Ok(mode_susceptibility(DrivingParameter::Alpha, params, kinetic, f, df))
}

/// Diagonal Fisher matrix of the collective local probes `G_x, G_y, G_z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFisher {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
}

pub fn local_qfi(grid: &MomentumGrid, params: &KitaevParams) -> Result<LocalFisher> {
    grid.check(params)?;
    let zz = 2.0
        * (0..grid.sites)
            .map(|n| {
                let c = grid.kinetic(params, n);
                let g = grid.gap_term(params, n);
                let eps2 = c * c + g * g;
                if eps2 == 0.0 { 0.0 } else { g * g / eps2 }
            })
            .sum::<f64>();
    let l = grid.sites as f64;
    Ok(LocalFisher { xx: l, yy: l, zz })
}

/// `⟨N⟩ = Σ_k sin²(Θ_k/2) = ½ Σ_k (1 + (J cos k + μ)/ε_k)`.
pub fn mean_particle_number(grid: &MomentumGrid, params: &KitaevParams) -> Result<f64> {
    grid.check(params)?;
    Ok((0..grid.sites)
        .map(|n| {
            let c = grid.kinetic(params, n);
            let eps = c.hypot(grid.gap_term(params, n));
            if eps == 0.0 { 0.5 } else { 0.5 * (1.0 + c / eps) }
        })
        .sum())
}

/// Vacuum energy `−½ Σ_k ε_k`.
pub fn ground_energy(grid: &MomentumGrid, params: &KitaevParams) -> Result<f64> {
    Ok(-0.5 * bogoliubov_solution(grid, params)?.energies.iter().sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nearest_neighbour_pairing_is_twice_sine() {
        let grid = MomentumGrid::new(64, f64::INFINITY).unwrap();
        for (k, f) in grid.momenta.iter().zip(&grid.pairing) {
            assert_abs_diff_eq!(*f, 2.0 * k.sin(), epsilon = 1e-13);
        }
    }

    #[test]
    fn infinite_range_pairing_is_half_angle_cotangent() {
        let grid = MomentumGrid::new(2000, 0.0).unwrap();
        for (k, f) in grid.momenta.iter().zip(&grid.pairing) {
            let want = 1.0 / (0.5 * k).tan();
            assert!((f - want).abs() <= 1e-8 * want.abs().max(1.0), "k = {k}: {f} vs {want}");
        }
    }

    #[test]
    fn tabulated_and_direct_sums_agree() {
        let grid = MomentumGrid::new(40, 1.3).unwrap();
        for n in [0, 7, 19, 33] {
            let k = grid.momenta[n];
            assert_abs_diff_eq!(grid.pairing[n], pairing_function(k, 40, 1.3), epsilon = 1e-12);
            assert_abs_diff_eq!(grid.pairing_slope[n], pairing_function_slope(k, 40, 1.3), epsilon = 1e-12);
        }
    }

    #[test]
    fn pairing_is_odd_on_the_grid() {
        for alpha in [0.0, 0.7, 1.0, 2.5] {
            let grid = MomentumGrid::new(50, alpha).unwrap();
            for n in 0..50 {
                assert_eq!(grid.pairing[49 - n], -grid.pairing[n]);
            }
        }
    }

    #[test]
    fn angle_definition_holds() {
        let grid = MomentumGrid::new(16, 1.5).unwrap();
        let p = KitaevParams::new(1.0, 0.3, 0.8, 1.5);
        let sol = bogoliubov_solution(&grid, &p).unwrap();
        for n in 0..16 {
            let e = sol.energies[n];
            let th = sol.angles[n];
            assert_abs_diff_eq!(e * th.sin(), -0.5 * p.pairing * grid.pairing[n], epsilon = 1e-12);
            assert_abs_diff_eq!(e * th.cos(), -(p.hopping * grid.momenta[n].cos() + p.mu), epsilon = 1e-12);
        }
    }

    #[test]
    fn particle_number_limits() {
        let grid = MomentumGrid::new(32, f64::INFINITY).unwrap();
        let p = KitaevParams::new(1.0, 0.0, 1.0, f64::INFINITY);
        assert_abs_diff_eq!(mean_particle_number(&grid, &p).unwrap(), 16.0, epsilon = 1e-12);
        assert!(mean_particle_number(&grid, &p.with_mu(-1e3)).unwrap() < 1e-3);
        assert!(mean_particle_number(&grid, &p.with_mu(1e3)).unwrap() > 32.0 - 1e-3);
    }

    #[test]
    fn winding_in_short_range_phases() {
        let p = KitaevParams::new(1.0, 0.5, 1.0, f64::INFINITY);
        assert_eq!(winding_number(&p, 64).unwrap(), 1.0);
        assert_eq!(winding_number(&p.with_pairing(-1.0), 64).unwrap(), -1.0);
        assert_eq!(winding_number(&p.with_mu(2.0), 64).unwrap(), 0.0);
        assert_eq!(winding_number(&p.with_mu(-2.0), 64).unwrap(), 0.0);
    }

    #[test]
    fn winding_is_half_integer_for_long_range_pairing() {
        let p = KitaevParams::new(1.0, 2.0, 1.0, 0.0);
        let w = winding_number(&p, 512).unwrap();
        assert_eq!(w.abs(), 0.5);
        assert_eq!(winding_number(&p.with_pairing(-1.0), 512).unwrap(), -w);
    }

    #[test]
    fn gapless_winding_is_rejected() {
        let p = KitaevParams::new(1.0, 0.5, 0.0, f64::INFINITY);
        assert!(matches!(winding_number(&p, 64), Err(QcritError::Undefined(_))));
        let edge = KitaevParams::new(1.0, -1.0, 1.0, 2.0);
        assert!(matches!(winding_number(&edge, 64), Err(QcritError::Undefined(_))));
        assert!(winding_number(&edge.with_alpha(0.5), 512).is_ok());
        assert!(matches!(winding_number(&edge.with_alpha(1.0), 512), Err(QcritError::Undefined(_))));
    }

    #[test]
    fn direct_single_mode_matches_grid() {
        let p = KitaevParams::new(1.0, 2.0, 1.0, 0.9);
        let grid = MomentumGrid::new(300, 0.9).unwrap();
        let a = chi_alpha_kmin(&grid, &p).unwrap();
        let b = chi_alpha_kmin_direct(300, &p).unwrap();
        assert!((a / b - 1.0).abs() < 1e-10);
    }

    #[test]
    fn local_fisher_bounds() {
        let grid = MomentumGrid::new(32, 0.8).unwrap();
        let p = KitaevParams::new(1.0, 0.4, 0.0, 0.8);
        assert_eq!(local_qfi(&grid, &p).unwrap().zz, 0.0);
        let big = local_qfi(&grid, &p.with_pairing(1e6)).unwrap();
        assert!(big.zz <= 64.0 && big.zz > 63.9);
    }

    #[test]
    fn chi_mu_matches_angle_derivative() {
        let grid = MomentumGrid::new(24, 2.0).unwrap();
        let p = KitaevParams::new(1.0, 0.7, 0.9, 2.0);
        let h = 1e-5;
        let a = bogoliubov_solution(&grid, &p.with_mu(0.7 - h)).unwrap();
        let b = bogoliubov_solution(&grid, &p.with_mu(0.7 + h)).unwrap();
        let fd: f64 = grid
            .half_zone()
            .map(|n| (0.5 * wrap_angle(b.angles[n] - a.angles[n]) / (2.0 * h)).powi(2))
            .sum();
        let chi = chi_closed_form(DrivingParameter::Mu, &grid, &p).unwrap();
        assert_abs_diff_eq!(chi, fd, epsilon = 1e-6 * chi);
    }
}
