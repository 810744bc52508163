//! Lipkin-Meshkov-Glick model in the symmetric Dicke sector
//!
//! `H = (Λ/N) J_z² + δ J_z − J_x` in units of the tunnelling energy, on the
//! basis `|J, m⟩` with `J = N/2`.

use ndarray::{Array1, Array2};

use crate::error::{ensure, QcritError, Result};
use crate::fidelity::GroundStateFamily;
use crate::linalg::{tridiag_eigh, tridiag_eigvals, EigRange};
use crate::qfi::{
    fisher_matrix_su2, k_producibility_bound, wineland_squeezing, Axis, DickeOperator, FisherMatrix, Observable,
    SpectralDecomposition, StateMatrix, StateVector,
};

/// Default number of interior points of the semiclassical grid.
pub const DEFAULT_GRID_POINTS: usize = 2001;
/// Boltzmann weights below this fraction of the largest are dropped.
const WEIGHT_FLOOR: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmgSpec {
    pub particles: usize,
    pub lambda: f64,
    pub delta: f64,
}

impl LmgSpec {
    pub fn new(particles: usize, lambda: f64) -> Self {
        Self { particles, lambda, delta: 0.0 }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.particles >= 2 && self.particles % 2 == 0, || {
            format!("N = {} must be even and ≥ 2", self.particles)
        })?;
        ensure(self.lambda.is_finite() && self.delta.is_finite(), || "Λ and δ must be finite".into())
    }

    pub fn spin(&self) -> f64 {
        self.particles as f64 / 2.0
    }

    fn ladder(&self, i: usize) -> f64 {
        let j = self.spin();
        let m = i as f64 - j;
        (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
    }

    /// Diagonal and off-diagonal of `H` in the `m = −J..=J` basis.
    pub fn tridiagonal(&self) -> (Array1<f64>, Array1<f64>) {
        let n = self.particles;
        let j = self.spin();
        let scale = self.lambda / n as f64;
        let diag = Array1::from_iter((0..=n).map(|i| {
            let m = i as f64 - j;
            scale * m * m + self.delta * m
        }));
        let off = Array1::from_iter((0..n).map(|i| -0.5 * self.ladder(i)));
        (diag, off)
    }
}

pub fn build_lmg(spec: &LmgSpec) -> Result<Array2<f64>> {
    spec.validate()?;
    let (d, e) = spec.tridiagonal();
    let dim = d.len();
    let mut h = Array2::from_diag(&d);
    for i in 0..dim - 1 {
        h[[i, i + 1]] = e[i];
        h[[i + 1, i]] = e[i];
    }
    Ok(h)
}

/// Tridiagonal blocks on `(|m⟩ ± |−m⟩)/√2`; the even block also holds `|0⟩`.
#[derive(Debug, Clone)]
pub struct ParityBlocks {
    pub even: (Array1<f64>, Array1<f64>),
    pub odd: (Array1<f64>, Array1<f64>),
}

pub fn parity_blocks(spec: &LmgSpec) -> Result<ParityBlocks> {
    spec.validate()?;
    ensure(spec.delta == 0.0, || "parity blocks need δ = 0".into())?;
    let (d, e) = spec.tridiagonal();
    let half = spec.particles / 2;
    let even_diag = d.slice(ndarray::s![..=half]).to_owned();
    let mut even_off = e.slice(ndarray::s![..half]).to_owned();
    even_off[half - 1] *= std::f64::consts::SQRT_2;
    let odd_diag = d.slice(ndarray::s![..half]).to_owned();
    let odd_off = e.slice(ndarray::s![..half - 1]).to_owned();
    Ok(ParityBlocks { even: (even_diag, even_off), odd: (odd_diag, odd_off) })
}

fn embed(block: &Array2<f64>, particles: usize, parity: i8) -> Array2<f64> {
    let half = particles / 2;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Array2::<f64>::zeros((particles + 1, block.ncols()));
    for (c, col) in block.columns().into_iter().enumerate() {
        for p in 0..half {
            out[[p, c]] = r * col[p];
            out[[particles - p, c]] = if parity > 0 { r * col[p] } else { -r * col[p] };
        }
        if parity > 0 {
            out[[half, c]] = col[half];
        }
    }
    out
}

/// Lowest eigenpairs, with states as columns in the `m` basis.
#[derive(Debug, Clone)]
pub struct LmgSpectrum {
    pub energies: Vec<f64>,
    pub states: Array2<f64>,
    /// Parity `±1` of each level, known when `δ = 0`.
    pub parities: Option<Vec<i8>>,
}

impl LmgSpectrum {
    pub fn state(&self, k: usize) -> StateVector {
        StateVector::Real(self.states.column(k).to_owned())
    }
}

/// The `count` lowest levels (all when `None`).
pub fn lmg_spectrum(spec: &LmgSpec, count: Option<usize>) -> Result<LmgSpectrum> {
    spec.validate()?;
    let dim = spec.particles + 1;
    let count = count.unwrap_or(dim).clamp(1, dim);
    if spec.delta != 0.0 {
        let (d, e) = spec.tridiagonal();
        let eig = tridiag_eigh(d.view(), e.view(), EigRange::lowest(count))?;
        return Ok(LmgSpectrum { energies: eig.values.to_vec(), states: eig.vectors, parities: None });
    }
    let blocks = parity_blocks(spec)?;
    let mut levels: Vec<(f64, i8, usize)> = Vec::new();
    let mut vectors = Vec::new();
    for (parity, (d, e)) in [(1i8, &blocks.even), (-1i8, &blocks.odd)] {
        let take = count.min(d.len());
        let eig = tridiag_eigh(d.view(), e.view(), EigRange::lowest(take))?;
        let base = vectors.len();
        vectors.push(embed(&eig.vectors, spec.particles, parity));
        levels.extend(eig.values.iter().enumerate().map(|(k, &v)| (v, parity, base * dim + k)));
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    levels.truncate(count);
    let mut states = Array2::<f64>::zeros((dim, levels.len()));
    for (c, &(_, _, key)) in levels.iter().enumerate() {
        let (block, k) = (key / dim, key % dim);
        states.column_mut(c).assign(&vectors[block].column(k));
    }
    Ok(LmgSpectrum {
        energies: levels.iter().map(|l| l.0).collect(),
        states,
        parities: Some(levels.iter().map(|l| l.1).collect()),
    })
}

/// All energies, ascending, without eigenvectors.
pub fn lmg_energies(spec: &LmgSpec) -> Result<Array1<f64>> {
    spec.validate()?;
    let (d, e) = spec.tridiagonal();
    tridiag_eigvals(d.view(), e.view(), EigRange::All)
}

/// `(Δ₁, Δ₂) = (E₁ − E₀, E₂ − E₁)`.
pub fn lmg_gaps(spec: &LmgSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let e = if spec.delta == 0.0 {
        let blocks = parity_blocks(spec)?;
        let mut all: Vec<f64> = Vec::new();
        for (d, off) in [&blocks.even, &blocks.odd] {
            all.extend(tridiag_eigvals(d.view(), off.view(), EigRange::lowest(3.min(d.len())))?);
        }
        all.sort_by(f64::total_cmp);
        all
    } else {
        let (d, off) = spec.tridiagonal();
        tridiag_eigvals(d.view(), off.view(), EigRange::lowest(3))?.to_vec()
    };
    Ok((e[1] - e[0], e[2] - e[1]))
}

/// Ground state; with `δ = 0` the parity-even one.
pub fn lmg_ground_state(spec: &LmgSpec) -> Result<(f64, StateVector)> {
    if spec.delta == 0.0 {
        let blocks = parity_blocks(spec)?;
        let (d, e) = &blocks.even;
        let eig = tridiag_eigh(d.view(), e.view(), EigRange::lowest(1))?;
        let v = embed(&eig.vectors, spec.particles, 1);
        Ok((eig.values[0], StateVector::Real(v.column(0).to_owned())))
    } else {
        let s = lmg_spectrum(spec, Some(1))?;
        Ok((s.energies[0], s.state(0)))
    }
}

fn spin_ops(particles: usize) -> [DickeOperator; 3] {
    [Axis::X, Axis::Y, Axis::Z].map(|a| DickeOperator::new(particles, a))
}

fn dominant_axis(fisher: &FisherMatrix) -> Axis {
    let d = fisher.optimal_direction;
    let k = (0..3).max_by(|&a, &b| d[a].abs().total_cmp(&d[b].abs())).unwrap_or(0);
    [Axis::X, Axis::Y, Axis::Z][k]
}

/// Fisher information and squeezing of a collective-spin state.
#[derive(Debug, Clone, PartialEq)]
pub struct LmgQfi {
    /// Largest eigenvalue of the Fisher matrix, `F_Q`.
    pub fq: f64,
    pub fq_density: f64,
    /// `None` when the mean spin vanishes.
    pub xi2_r: Option<f64>,
    pub axis: Axis,
    pub fisher: FisherMatrix,
}

fn qfi_of(decomp: &SpectralDecomposition, particles: usize) -> Result<LmgQfi> {
    let ops = spin_ops(particles);
    let refs: [&dyn Observable; 3] = [&ops[0], &ops[1], &ops[2]];
    let fisher = fisher_matrix_su2(decomp, refs)?;
    let xi2_r = match wineland_squeezing(decomp, refs, particles) {
        Ok(v) => Some(v),
        Err(QcritError::Undefined(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(LmgQfi {
        fq: fisher.optimal_value,
        fq_density: fisher.optimal_value / particles as f64,
        xi2_r,
        axis: dominant_axis(&fisher),
        fisher,
    })
}

pub fn lmg_ground_qfi(spec: &LmgSpec) -> Result<LmgQfi> {
    let (_, psi) = lmg_ground_state(spec)?;
    qfi_of(&SpectralDecomposition::pure(&psi)?, spec.particles)
}

/// Canonical state at temperature `t`, keeping only levels whose weight
/// exceeds `1e−16` of the ground level.
pub fn lmg_thermal_state(spec: &LmgSpec, t: f64) -> Result<SpectralDecomposition> {
    if !(t > 0.0) {
        return Err(QcritError::Validation(format!("temperature must be positive, got {t}")));
    }
    let all = lmg_energies(spec)?;
    let cutoff = all[0] - t * WEIGHT_FLOOR.ln();
    let count = all.iter().take_while(|&&e| e <= cutoff).count().max(1);
    // A parity doublet may straddle the cutoff; keep both members.
    let count = (count + 1).min(all.len());
    let s = lmg_spectrum(spec, Some(count))?;
    SpectralDecomposition::thermal(&s.energies, &StateMatrix::Real(s.states), t)
}

pub fn lmg_thermal_qfi(spec: &LmgSpec, t: f64) -> Result<LmgQfi> {
    qfi_of(&lmg_thermal_state(spec, t)?, spec.particles)
}

/// `F₀ tanh(Δ/2T) [1 − k (e^{Δ/T} − 1)/(e^{kΔ/T} − 1)]`, the thermal Fisher
/// information of `k` equispaced levels.
pub fn lmg_kmode_thermal_law(f0: f64, delta: f64, t: f64, k: f64) -> Result<f64> {
    ensure(k >= 2.0, || format!("k = {k} must be at least 2"))?;
    ensure(t > 0.0 && delta > 0.0, || "Δ and T must be positive".into())?;
    let x = delta / t;
    let ratio = if k.is_infinite() {
        0.0
    } else if k * x > 700.0 {
        (k.ln() + x.exp_m1().ln() - k * x).exp()
    } else {
        k * x.exp_m1() / (k * x).exp_m1()
    };
    Ok(f0 * (0.5 * x).tanh() * (1.0 - ratio))
}

/// `𝒟_κ`, the `κ`-producible Fisher bound divided by `N`.
pub fn producibility_density(particles: usize, kappa: usize) -> Result<f64> {
    Ok(k_producibility_bound(particles, kappa, 1.0)? / particles as f64)
}

/// Large-`N` temperature below which `(κ+1)`-partite entanglement is
/// witnessed. Fails with `Undefined` where no thermal state is witnessed.
pub fn lmg_entanglement_boundary(lambda: f64, kappa: usize, particles: usize) -> Result<f64> {
    let d = producibility_density(particles, kappa)?;
    let none = || QcritError::Undefined(format!("no thermal entanglement witnessed at Λ = {lambda}, κ = {kappa}"));
    let (gap, arg) = if lambda > 0.0 {
        let g = (1.0 + lambda).sqrt();
        (g, d / g)
    } else if lambda > -1.0 {
        let g = (1.0 + lambda).sqrt();
        (g, d * g)
    } else if lambda == -1.0 {
        return Ok(0.5 / d);
    } else {
        let g = (lambda * lambda - 1.0).sqrt();
        (g, d * lambda.abs() * g)
    };
    if arg >= 1.0 {
        return Err(none());
    }
    Ok(gap / (2.0 * arg.atanh()))
}

/// Temperature at which the thermal `F_Q` falls to `N 𝒟_κ`, by bisection on
/// `[t_lo, t_hi]` to a relative width of `1e-7`.
pub fn lmg_entanglement_temperature(spec: &LmgSpec, kappa: usize, t_lo: f64, t_hi: f64) -> Result<f64> {
    let bound = k_producibility_bound(spec.particles, kappa, 1.0)?;
    let excess = |t: f64| -> Result<f64> { Ok(lmg_thermal_qfi(spec, t)?.fq - bound) };
    let (mut lo, mut hi) = (t_lo, t_hi);
    let (f_lo, f_hi) = (excess(lo)?, excess(hi)?);
    if f_lo <= 0.0 {
        return Err(QcritError::Undefined(format!("no entanglement witnessed at T = {lo}")));
    }
    if f_hi > 0.0 {
        return Err(QcritError::OutOfDomain(format!("still entangled at T = {hi}; widen the bracket")));
    }
    while hi - lo > 1e-7 * hi {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Parity-even ground states as a function of `Λ`.
pub struct LambdaFamily {
    pub base: LmgSpec,
}

impl GroundStateFamily for LambdaFamily {
    fn ground_state(&self, lambda: f64) -> Result<StateVector> {
        Ok(lmg_ground_state(&self.base.with_lambda(lambda))?.1)
    }
}

/// `χ_Λ` by the overlap method with step `d_lambda`.
pub fn lmg_fidelity_susceptibility(spec: &LmgSpec, d_lambda: f64) -> Result<f64> {
    let family = LambdaFamily { base: *spec };
    Ok(crate::fidelity::fidelity_susceptibility_numeric(&family, spec.lambda, d_lambda)?.chi)
}

/// Large-`N` closed form of `χ_Λ`.
pub fn lmg_chi_asymptotic(lambda: f64, particles: usize) -> Result<f64> {
    if lambda > -1.0 {
        Ok(1.0 / (32.0 * (1.0 + lambda).powi(2)))
    } else if lambda < -1.0 {
        Ok(particles as f64 / (4.0 * lambda.abs().powi(3) * (lambda * lambda - 1.0).sqrt()))
    } else {
        Err(QcritError::Undefined("χ_Λ diverges at Λ = −1".into()))
    }
}

/// Largest `|δ|` that still leaves a metastable minimum, `(|Λ|^{2/3} − 1)^{3/2}`.
pub fn metastability_threshold(lambda: f64) -> Result<f64> {
    ensure(lambda <= -1.0, || format!("metastability needs Λ ≤ −1, got {lambda}"))?;
    Ok((lambda.abs().powf(2.0 / 3.0) - 1.0).max(0.0).powf(1.5))
}

/// `φ = 2⟨J_z⟩/N` in the ground state.
pub fn lmg_order_parameter(spec: &LmgSpec) -> Result<f64> {
    let (_, psi) = lmg_ground_state(spec)?;
    let v = match psi {
        StateVector::Real(v) => v,
        StateVector::Complex(_) => unreachable!("Dicke ground states are real"),
    };
    let j = spec.spin();
    let jz: f64 = v.iter().enumerate().map(|(i, a)| a * a * (i as f64 - j)).sum();
    Ok(jz / j)
}

/// Semiclassical potential `V(z) = (Λ/2) z² − √(1 − z²) + δ z`.
pub fn semiclassical_potential(spec: &LmgSpec, z: f64) -> f64 {
    0.5 * spec.lambda * z * z - (1.0 - z * z).max(0.0).sqrt() + spec.delta * z
}

/// `𝓛(Λ)`, which caps the number of levels the semiclassical picture holds.
pub fn level_capacity(lambda: f64) -> f64 {
    if lambda > -1.0 {
        (lambda + 2.0) / (2.0 * (1.0 + lambda).sqrt())
    } else if lambda < -1.0 {
        1.0 / (lambda.abs() * (lambda * lambda - 1.0).sqrt())
    } else {
        f64::INFINITY
    }
}

pub fn semiclassical_level_limit(spec: &LmgSpec) -> usize {
    (spec.spin() * level_capacity(spec.lambda).min(1.0)).floor() as usize
}

#[derive(Debug, Clone)]
pub struct SemiclassicalGrid {
    pub z: Array1<f64>,
    pub potential: Array1<f64>,
    pub energies: Array1<f64>,
    /// Eigenfunctions on the interior points, unit-normalized as vectors.
    pub states: Array2<f64>,
    pub level_limit: usize,
}

/// Lowest `levels` eigenpairs of
/// `(N/2) [−(2/N²) ∂_z √(1−z²) ∂_z + V(z)]` with walls at `z = ±1`.
pub fn semiclassical_solve(spec: &LmgSpec, points: usize, levels: usize) -> Result<SemiclassicalGrid> {
    spec.validate()?;
    ensure(points >= 501 && points % 2 == 1, || format!("grid needs an odd point count ≥ 501, got {points}"))?;
    let level_limit = semiclassical_level_limit(spec);
    ensure(levels >= 1 && levels <= level_limit, || {
        format!("requested {levels} levels but the semiclassical picture holds only n_max = {level_limit}")
    })?;
    let n = spec.particles as f64;
    let h = 2.0 / (points + 1) as f64;
    let z = Array1::from_iter((1..=points).map(|i| -1.0 + i as f64 * h));
    let mass = |x: f64| (1.0 - x * x).max(0.0).sqrt();
    let kin = 2.0 / (n * n * h * h);
    let potential = z.mapv(|x| semiclassical_potential(spec, x));
    let half = 0.5 * n;
    let diag = Array1::from_iter(z.iter().zip(potential.iter()).map(|(&x, &v)| {
        half * (kin * (mass(x - 0.5 * h) + mass(x + 0.5 * h)) + v)
    }));
    let off = Array1::from_iter(z.iter().take(points - 1).map(|&x| -half * kin * mass(x + 0.5 * h)));
    let eig = tridiag_eigh(diag.view(), off.view(), EigRange::lowest(levels))?;
    Ok(SemiclassicalGrid { z, potential, energies: eig.values, states: eig.vectors, level_limit })
}
