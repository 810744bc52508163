//! Quadratic fermion Hamiltonians
//!
//! `H = Σ_ij A_ij c†_i c_j + ½ Σ_ij B_ij (c†_i c†_j + c_j c_i) + offset`
//!
//! diagonalized through the singular value decomposition `A + B = Φᵀ Λ Ψ`.
//! The Green matrix `G_ij = ⟨(c†_i − c_i)(c†_j + c_j)⟩ = −(ΨᵀΦ)_ij` gives every
//! Jordan-Wigner string correlator as a subdeterminant.

use ndarray::{s, Array1, Array2, ArrayView2};

use crate::error::{ensure, QcritError, Result};
use crate::kitaev::{pairing_decay, ring_distance, KitaevParams};
use crate::linalg::{det, leading_minors, svd};
use crate::qfi::Staggering;

/// Largest chain handled by the Fock-space oracle.
pub const MAX_FOCK_SITES: usize = 12;
/// Largest chain whose many-body spectrum is enumerated level by level.
pub const MAX_ENUMERATED_SITES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
    Antiperiodic,
}

impl Boundary {
    fn wrap_sign(self) -> f64 {
        match self {
            Boundary::Open => 0.0,
            Boundary::Periodic => 1.0,
            Boundary::Antiperiodic => -1.0,
        }
    }
}

/// Where a model came from, kept for metadata and offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelOrigin {
    IsingNn { theta: f64 },
    Kitaev(KitaevParams),
    Custom,
}

#[derive(Debug, Clone)]
pub struct QuadraticFermionModel {
    pub sites: usize,
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub offset: f64,
    pub boundary: Boundary,
    pub origin: ModelOrigin,
}

/// Builds `A` and `B` on a chain from a diagonal, a nearest-neighbour hopping
/// and a distance-dependent pairing `p(d)`, with `B_ij = sign(i − j) p(d)`.
///
/// A coupling whose direct offset exceeds `L/2` runs through the seam and
/// picks up the boundary sign; at exactly `L/2` both routes contribute.
fn chain_matrices(
    sites: usize,
    diag: f64,
    hop: f64,
    pair: impl Fn(usize) -> f64,
    boundary: Boundary,
) -> (Array2<f64>, Array2<f64>) {
    let mut a = Array2::<f64>::from_diag_elem(sites, diag);
    let mut b = Array2::<f64>::zeros((sites, sites));
    let seam = boundary.wrap_sign();
    for i in 0..sites {
        for j in i + 1..sites {
            let l = j - i;
            // Across the seam the pair is traversed in reverse order, which
            // flips the antisymmetric pairing once more than the hopping.
            let (d, hop_factor, pair_factor) = match boundary {
                Boundary::Open => (l, 1.0, 1.0),
                _ if 2 * l < sites => (l, 1.0, 1.0),
                _ if 2 * l > sites => (sites - l, seam, -seam),
                _ => (l, 0.0, 0.5 * (1.0 - seam)),
            };
            if d == 1 {
                a[[i, j]] += hop * hop_factor;
                a[[j, i]] += hop * hop_factor;
            }
            let p = pair(d) * pair_factor;
            if p != 0.0 {
                b[[j, i]] += p;
                b[[i, j]] -= p;
            }
        }
    }
    (a, b)
}

impl QuadraticFermionModel {
    pub fn new(a: Array2<f64>, b: Array2<f64>, offset: f64, boundary: Boundary) -> Result<Self> {
        let sites = a.nrows();
        ensure(a.dim() == (sites, sites) && b.dim() == (sites, sites), || "A and B must be square and equal in size".into())?;
        let asym = a.iter().zip(a.t().iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        let bsym = b.iter().zip(b.t().iter()).fold(0.0f64, |m, (x, y)| m.max((x + y).abs()));
        ensure(asym < 1e-12, || format!("A is not symmetric (defect {asym:e})"))?;
        ensure(bsym < 1e-12, || format!("B is not antisymmetric (defect {bsym:e})"))?;
        Ok(Self { sites, a, b, offset, boundary, origin: ModelOrigin::Custom })
    }

    fn check_sites(sites: usize, boundary: Boundary) -> Result<()> {
        ensure(sites >= 2 && sites % 2 == 0, || format!("L = {sites} must be even and ≥ 2"))?;
        ensure(boundary == Boundary::Open || sites >= 4, || "closed chains need L ≥ 4".into())
    }

    /// Jordan-Wigner image of `H = sinθ Σ σ^z_i σ^z_{i+1} + cosθ Σ σ^x_i`
    /// with `σ^x_i = 2 n_i − 1` (unit coupling).
    pub fn ising_nn(sites: usize, theta: f64, boundary: Boundary) -> Result<Self> {
        Self::check_sites(sites, boundary)?;
        let (s, c) = theta.sin_cos();
        let (a, b) = chain_matrices(sites, 2.0 * c, s, |d| if d == 1 { s } else { 0.0 }, boundary);
        Ok(Self {
            sites,
            a,
            b,
            offset: -(sites as f64) * c,
            boundary,
            origin: ModelOrigin::IsingNn { theta },
        })
    }

    pub fn kitaev(sites: usize, params: &KitaevParams, boundary: Boundary) -> Result<Self> {
        Self::check_sites(sites, boundary)?;
        params.validate()?;
        let half = 0.5 * params.pairing;
        let alpha = params.alpha;
        let (a, b) = chain_matrices(sites, -params.mu, -0.5 * params.hopping, |d| half * pairing_decay(d, alpha), boundary);
        Ok(Self {
            sites,
            a,
            b,
            offset: 0.5 * params.mu * sites as f64,
            boundary,
            origin: ModelOrigin::Kitaev(*params),
        })
    }

    /// Closed chain on the `J = Δ = 2 cos θ`, `μ = 2 sin θ` cut.
    pub fn kitaev_theta(sites: usize, theta: f64, alpha: f64) -> Result<Self> {
        Self::kitaev(sites, &KitaevParams::thermic(theta, alpha), Boundary::Antiperiodic)
    }

    pub fn diagonalize(&self) -> Result<GreenMatrix> {
        let m = &self.a + &self.b;
        let (u, sv, vt) = svd(&m)?;
        let l = self.sites;
        // Reverse to ascending singular values.
        let order: Vec<usize> = (0..l).rev().collect();
        let energies = Array1::from_iter(order.iter().map(|&k| sv[k]));
        let phi = Array2::from_shape_fn((l, l), |(k, i)| u[[i, order[k]]]);
        let psi = Array2::from_shape_fn((l, l), |(k, i)| vt[[order[k], i]]);
        let g = -phi.t().dot(&psi);
        let recon = phi.t().dot(&Array2::from_diag(&energies)).dot(&psi);
        let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
        let err = (&recon - &m).iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if err > 1e-8 * scale {
            return Err(QcritError::Decomposition(format!("SVD reconstruction error {err:e}")));
        }
        let vacuum_energy = 0.5 * (self.a.diag().sum() - energies.sum()) + self.offset;
        Ok(GreenMatrix { g, energies, phi, psi, vacuum_energy })
    }

    /// Dense Hamiltonian in the occupation basis (bit `i` set means site `i`
    /// occupied), with Jordan-Wigner ordering signs.
    pub fn fock_hamiltonian(&self) -> Result<Array2<f64>> {
        if self.sites > MAX_FOCK_SITES {
            return Err(QcritError::Capacity {
                requested: self.sites,
                limit: MAX_FOCK_SITES,
                advice: "use the Green-matrix pipeline",
            });
        }
        let l = self.sites;
        let dim = 1usize << l;
        let mut h = Array2::<f64>::from_diag_elem(dim, self.offset);
        for s in 0..dim {
            for i in 0..l {
                for j in 0..l {
                    let aij = self.a[[i, j]];
                    if aij != 0.0 {
                        if let Some((t, sign)) = annihilate(s, j).and_then(|(t, s1)| create(t, i).map(|(u, s2)| (u, s1 * s2))) {
                            h[[t, s]] += aij * sign;
                        }
                    }
                    let bij = 0.5 * self.b[[i, j]];
                    if bij != 0.0 {
                        if let Some((t, sign)) = create(s, j).and_then(|(t, s1)| create(t, i).map(|(u, s2)| (u, s1 * s2))) {
                            h[[t, s]] += bij * sign;
                        }
                        if let Some((t, sign)) = annihilate(s, i).and_then(|(t, s1)| annihilate(t, j).map(|(u, s2)| (u, s1 * s2))) {
                            h[[t, s]] += bij * sign;
                        }
                    }
                }
            }
        }
        Ok(h)
    }
}

fn jw_sign(state: usize, site: usize) -> f64 {
    if (state & ((1usize << site) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 }
}

fn annihilate(state: usize, site: usize) -> Option<(usize, f64)> {
    (state >> site & 1 == 1).then(|| (state ^ (1 << site), jw_sign(state, site)))
}

fn create(state: usize, site: usize) -> Option<(usize, f64)> {
    (state >> site & 1 == 0).then(|| (state | (1 << site), jw_sign(state, site)))
}

/// String operator probed by the nonlocal Fisher information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StringProbe {
    /// `O_x = ½ Σ_j (Π_{l<j} (1 − 2n_l)) (c_j + c†_j)`.
    X,
    /// `O_y = ½ Σ_j (Π_{l<j} (1 − 2n_l)) i(c_j − c†_j)`.
    Y,
}

impl StringProbe {
    pub const ALL: [StringProbe; 2] = [StringProbe::X, StringProbe::Y];

    pub fn label(self) -> &'static str {
        match self {
            StringProbe::X => "x",
            StringProbe::Y => "y",
        }
    }
}

/// Ground-state correlators of the transverse-field Ising chain, named in
/// spin language (`x` is the field direction).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingCorrelators {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
}

#[derive(Debug, Clone)]
pub struct GreenMatrix {
    pub g: Array2<f64>,
    /// Quasiparticle energies `Λ_k`, ascending.
    pub energies: Array1<f64>,
    pub phi: Array2<f64>,
    pub psi: Array2<f64>,
    /// `½ (Tr A − Σ Λ_k) + offset`.
    pub vacuum_energy: f64,
}

impl GreenMatrix {
    pub fn sites(&self) -> usize {
        self.g.nrows()
    }

    /// Fermion parity `(−1)^N` of the quasiparticle vacuum.
    pub fn vacuum_parity(&self) -> i8 {
        let l = self.sites() as i32;
        let d = det(self.g.view()) * if l % 2 == 0 { 1.0 } else { -1.0 };
        if d >= 0.0 { 1 } else { -1 }
    }

    fn string_block(&self, probe: StringProbe, i: usize, j: usize) -> ArrayView2<'_, f64> {
        match probe {
            StringProbe::X => self.g.slice(s![i..j, i + 1..=j]),
            StringProbe::Y => self.g.slice(s![i + 1..=j, i..j]),
        }
    }

    /// `⟨σ_i σ_j⟩` of the Jordan-Wigner spin image, `i < j`.
    pub fn string_correlator(&self, probe: StringProbe, i: usize, j: usize) -> Result<f64> {
        let l = self.sites();
        ensure(i < j && j < l, || format!("need 0 ≤ i < j < {l}, got ({i}, {j})"))?;
        Ok(det(self.string_block(probe, i, j)))
    }

    /// `C(ℓ) = ⟨σ_i σ_{i+ℓ}⟩` for `ℓ = 1..L−i`, from one elimination.
    pub fn string_correlators_from(&self, probe: StringProbe, i: usize) -> Vec<f64> {
        let l = self.sites();
        if i + 1 >= l {
            return Vec::new();
        }
        leading_minors(self.string_block(probe, i, l - 1))
    }

    /// Spin-language correlators of the Ising image, `i < j`.
    pub fn ising_correlators(&self, i: usize, j: usize) -> Result<IsingCorrelators> {
        // The Ising image rotates the spin frame so that the bond axis z
        // carries the `y` string.
        let zz = self.string_correlator(StringProbe::Y, i, j)?;
        let yy = self.string_correlator(StringProbe::X, i, j)?;
        let g = &self.g;
        let xx = g[[i, i]] * g[[j, j]] - g[[j, i]] * g[[i, j]];
        Ok(IsingCorrelators { xx, yy, zz })
    }

    /// Many-body energies `E_vac + Σ_{k∈S} Λ_k`, ascending, optionally
    /// restricted to one fermion parity.
    pub fn many_body_spectrum(&self, parity: Option<i8>) -> Result<Vec<f64>> {
        let l = self.sites();
        if l > MAX_ENUMERATED_SITES {
            return Err(QcritError::Capacity {
                requested: l,
                limit: MAX_ENUMERATED_SITES,
                advice: "enumerate only low-lying levels",
            });
        }
        let vac = self.vacuum_parity();
        let mut levels = Vec::with_capacity(1 << l);
        for mask in 0usize..1 << l {
            let p = if mask.count_ones() % 2 == 0 { vac } else { -vac };
            if parity.is_some_and(|want| want != p) {
                continue;
            }
            let e: f64 = (0..l).filter(|k| mask >> k & 1 == 1).map(|k| self.energies[k]).sum();
            levels.push(self.vacuum_energy + e);
        }
        levels.sort_by(f64::total_cmp);
        Ok(levels)
    }

    /// `|⟨0|0'⟩|` between two quasiparticle vacua on the same chain.
    pub fn vacuum_overlap(&self, other: &GreenMatrix) -> Result<f64> {
        let l = self.sites();
        if other.sites() != l {
            return Err(QcritError::DimensionMismatch { expected: l, found: other.sites() });
        }
        let u = 0.5 * (&self.phi + &self.psi);
        let v = 0.5 * (&self.phi - &self.psi);
        let u2 = 0.5 * (&other.phi + &other.psi);
        let v2 = 0.5 * (&other.phi - &other.psi);
        let m = u.dot(&u2.t()) + v.dot(&v2.t());
        Ok(det(m.view()).abs().sqrt())
    }
}

/// Closed-chain Fisher density `f_Q = 1 + Σ_{ℓ=1}^{L−1} s(ℓ) C(ℓ)` of a
/// string probe, assuming translation invariance.
pub fn nonlocal_qfi(green: &GreenMatrix, probe: StringProbe, staggering: Staggering) -> f64 {
    let corr = green.string_correlators_from(probe, 0);
    1.0 + corr.iter().enumerate().map(|(k, c)| staggering.sign(k + 1) * c).sum::<f64>()
}

/// Fisher density from the full double sum over pairs,
/// `(1/L) [L + 2 Σ_{i<j} s_i s_j C(i, j)]`, valid on any boundary.
pub fn pair_sum_qfi(green: &GreenMatrix, probe: StringProbe, staggering: Staggering) -> f64 {
    let l = green.sites();
    let mut total = l as f64;
    for i in 0..l {
        let corr = green.string_correlators_from(probe, i);
        for (k, c) in corr.iter().enumerate() {
            total += 2.0 * staggering.sign(i) * staggering.sign(i + k + 1) * c;
        }
    }
    total / l as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlocalOptimum {
    pub fq_density: f64,
    pub probe: StringProbe,
    pub staggering: Staggering,
}

/// Largest closed-chain `f_Q` among `O_x, O_y, O_x^(st), O_y^(st)`.
pub fn optimal_nonlocal_qfi(green: &GreenMatrix) -> NonlocalOptimum {
    let mut best = NonlocalOptimum { fq_density: f64::NEG_INFINITY, probe: StringProbe::X, staggering: Staggering::Uniform };
    for probe in StringProbe::ALL {
        let corr = green.string_correlators_from(probe, 0);
        for staggering in [Staggering::Uniform, Staggering::Alternating] {
            let f = 1.0 + corr.iter().enumerate().map(|(k, c)| staggering.sign(k + 1) * c).sum::<f64>();
            if f > best.fq_density {
                best = NonlocalOptimum { fq_density: f, probe, staggering };
            }
        }
    }
    best
}

/// Spectrum of the closed transverse-field Ising ring: even fermion parity
/// from the antiperiodic sector joined with odd parity from the periodic one.
pub fn ising_ring_spectrum(sites: usize, theta: f64) -> Result<Vec<f64>> {
    let even = QuadraticFermionModel::ising_nn(sites, theta, Boundary::Antiperiodic)?.diagonalize()?;
    let odd = QuadraticFermionModel::ising_nn(sites, theta, Boundary::Periodic)?.diagonalize()?;
    let mut levels = even.many_body_spectrum(Some(1))?;
    levels.extend(odd.many_body_spectrum(Some(-1))?);
    levels.sort_by(f64::total_cmp);
    Ok(levels)
}

/// Ground-state family driven by one parameter, with overlaps of
/// quasiparticle vacua standing in for state vectors.
pub struct FermionFamily<F> {
    pub build: F,
}

impl<F> FermionFamily<F>
where
    F: Fn(f64) -> Result<QuadraticFermionModel>,
{
    pub fn new(build: F) -> Self {
        Self { build }
    }
}

impl<F> crate::fidelity::GroundStateFamily for FermionFamily<F>
where
    F: Fn(f64) -> Result<QuadraticFermionModel>,
{
    fn ground_state(&self, lambda: f64) -> Result<crate::qfi::StateVector> {
        let model = (self.build)(lambda)?;
        let h = model.fock_hamiltonian()?;
        let eig = crate::linalg::sym_eigh(h.view(), crate::linalg::EigRange::lowest(1))?;
        Ok(crate::qfi::StateVector::Real(eig.vectors.column(0).to_owned()))
    }

    fn infidelity(&self, a: f64, b: f64) -> Result<f64> {
        let ga = (self.build)(a)?.diagonalize()?;
        let gb = (self.build)(b)?.diagonalize()?;
        Ok(1.0 - ga.vacuum_overlap(&gb)?)
    }
}

/// Closed-form `χ_θ = ¼ Σ_{0<k<π} sin²k / (1 + sin2θ cos k)²` of the
/// nearest-neighbour Ising ring.
pub fn ising_chi_theta(sites: usize, theta: f64) -> f64 {
    let s2 = (2.0 * theta).sin();
    (0..sites / 2)
        .map(|n| {
            let k = std::f64::consts::PI * (2 * n + 1) as f64 / sites as f64;
            let den = 1.0 + s2 * k.cos();
            k.sin().powi(2) / (den * den)
        })
        .sum::<f64>()
        * 0.25
}

/// Ring distance helper re-exported for builders of custom chains.
pub fn chain_distance(i: usize, j: usize, sites: usize, boundary: Boundary) -> usize {
    let l = i.abs_diff(j);
    match boundary {
        Boundary::Open => l,
        _ => ring_distance(l, sites),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::{fidelity_susceptibility_numeric, GroundStateFamily, DEFAULT_STEP};
    use crate::linalg::{sym_eigh, EigRange};
    use crate::qfi::{pure_state_qfi, Axis, SpinChainOperator, StateVector};
    use approx::assert_abs_diff_eq;

    fn fock_ground(model: &QuadraticFermionModel) -> (Array1<f64>, Array2<f64>) {
        let h = model.fock_hamiltonian().unwrap();
        let eig = sym_eigh(h.view(), EigRange::All).unwrap();
        (eig.values, eig.vectors)
    }

    /// `⟨ψ| op_i op_j |ψ⟩` for single-site Majorana-like operators applied in
    /// the occupation basis.
    fn majorana(state: &Array1<f64>, site: usize, kind: char) -> Array1<f64> {
        let mut out = Array1::<f64>::zeros(state.len());
        for s in 0..state.len() {
            let amp = state[s];
            if amp == 0.0 {
                continue;
            }
            if let Some((t, sg)) = create(s, site) {
                out[t] += sg * amp;
            }
            if let Some((t, sg)) = annihilate(s, site) {
                out[t] += if kind == 'A' { sg * amp } else { -sg * amp };
            }
        }
        out
    }

    #[test]
    fn free_paramagnet_has_flat_band_and_minus_identity_green() {
        let m = QuadraticFermionModel::new(Array2::eye(6), Array2::zeros((6, 6)), 0.0, Boundary::Open).unwrap();
        let g = m.diagonalize().unwrap();
        assert!(g.energies.iter().all(|e| (e - 1.0).abs() < 1e-12));
        for ((i, j), v) in g.g.indexed_iter() {
            assert_abs_diff_eq!(*v, if i == j { -1.0 } else { 0.0 }, epsilon = 1e-12);
        }
    }

    #[test]
    fn green_matrix_matches_fock_expectation() {
        let p = KitaevParams::new(1.0, 0.3, 0.7, 1.4);
        for boundary in [Boundary::Open, Boundary::Antiperiodic] {
            let model = QuadraticFermionModel::kitaev(6, &p, boundary).unwrap();
            let green = model.diagonalize().unwrap();
            let (e, v) = fock_ground(&model);
            assert_abs_diff_eq!(e[0], green.vacuum_energy, epsilon = 1e-10);
            let psi = v.column(0).to_owned();
            for i in 0..6 {
                let bi = majorana(&psi, i, 'B');
                for j in 0..6 {
                    let aj = majorana(&psi, j, 'A');
                    assert_abs_diff_eq!(-bi.dot(&aj), green.g[[i, j]], epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn fock_spectrum_is_sum_of_quasiparticle_energies() {
        let model = QuadraticFermionModel::ising_nn(8, -0.6, Boundary::Antiperiodic).unwrap();
        let (e, _) = fock_ground(&model);
        let levels = model.diagonalize().unwrap().many_body_spectrum(None).unwrap();
        for (x, y) in e.iter().zip(&levels) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-9);
        }
    }

    #[test]
    fn string_probes_match_spin_image_in_occupation_basis() {
        let p = KitaevParams::new(1.0, 0.4, 0.9, 2.0);
        let model = QuadraticFermionModel::kitaev(8, &p, Boundary::Antiperiodic).unwrap();
        let green = model.diagonalize().unwrap();
        let (_, v) = fock_ground(&model);
        let psi = StateVector::Real(v.column(0).to_owned());
        for (probe, axis) in [(StringProbe::X, Axis::X), (StringProbe::Y, Axis::Y)] {
            for stag in [Staggering::Uniform, Staggering::Alternating] {
                let op = SpinChainOperator::collective(8, axis, stag);
                let ed = pure_state_qfi(&psi, &op).unwrap() / 8.0;
                assert_abs_diff_eq!(nonlocal_qfi(&green, probe, stag), ed, epsilon = 1e-9);
                assert_abs_diff_eq!(pair_sum_qfi(&green, probe, stag), ed, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn vacuum_overlap_matches_fock_states() {
        let p = KitaevParams::new(1.0, 0.2, 0.8, 0.7);
        let m1 = QuadraticFermionModel::kitaev(6, &p, Boundary::Antiperiodic).unwrap();
        let m2 = QuadraticFermionModel::kitaev(6, &p.with_mu(0.5), Boundary::Antiperiodic).unwrap();
        let (_, v1) = fock_ground(&m1);
        let (_, v2) = fock_ground(&m2);
        let exact = v1.column(0).dot(&v2.column(0)).abs();
        let ov = m1.diagonalize().unwrap().vacuum_overlap(&m2.diagonalize().unwrap()).unwrap();
        assert_abs_diff_eq!(ov, exact, epsilon = 1e-10);
    }

    #[test]
    fn ising_ring_spectrum_unites_parity_sectors() {
        use crate::ising::{ground_state_ed, Boundary as SpinBoundary, IsingSpec};
        for theta in [-0.6, 0.3, 1.1] {
            let ed = ground_state_ed(&IsingSpec::new(8, theta, f64::INFINITY).with_boundary(SpinBoundary::Periodic)).unwrap();
            let ff = ising_ring_spectrum(8, theta).unwrap();
            for (x, y) in ed.energies.iter().zip(&ff) {
                assert_abs_diff_eq!(*x, *y, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn ising_correlators_match_spin_ed() {
        use crate::ising::{ground_state_only, Boundary as SpinBoundary, IsingSpec};
        let n = 8;
        let theta = -0.5;
        let (_, psi) = ground_state_only(&IsingSpec::new(n, theta, f64::INFINITY).with_boundary(SpinBoundary::Periodic)).unwrap();
        let green = QuadraticFermionModel::ising_nn(n, theta, Boundary::Antiperiodic).unwrap().diagonalize().unwrap();
        let v = match &psi {
            StateVector::Real(v) => v.clone(),
            _ => unreachable!(),
        };
        let spin = |s: usize, i: usize| if s >> i & 1 == 1 { 1.0 } else { -1.0 };
        for j in 1..n {
            let zz: f64 = v.iter().enumerate().map(|(s, a)| a * a * spin(s, 0) * spin(s, j)).sum();
            let mut xx = 0.0;
            let mut yy = 0.0;
            for s in 0..v.len() {
                let t = s ^ 1 ^ (1 << j);
                xx += v[s] * v[t];
                // σ^y_0 σ^y_j = −K_0 K_j with K|up⟩ = |down⟩, K|down⟩ = −|up⟩.
                let k0 = if s & 1 == 1 { 1.0 } else { -1.0 };
                let kj = if s >> j & 1 == 1 { 1.0 } else { -1.0 };
                yy -= v[t] * k0 * kj * v[s];
            }
            let c = green.ising_correlators(0, j).unwrap();
            assert_abs_diff_eq!(c.zz, zz, epsilon = 1e-9);
            assert_abs_diff_eq!(c.xx, xx, epsilon = 1e-9);
            assert_abs_diff_eq!(c.yy, yy, epsilon = 1e-9);
        }
    }

    #[test]
    fn kitaev_spectrum_matches_momentum_energies() {
        use crate::kitaev::{bogoliubov_solution, MomentumGrid};
        for alpha in [0.0, 1.0, 2.5, f64::INFINITY] {
            let p = KitaevParams::new(1.0, 0.0, 1.0, alpha);
            let green = QuadraticFermionModel::kitaev(8, &p, Boundary::Antiperiodic).unwrap().diagonalize().unwrap();
            let mut eps = bogoliubov_solution(&MomentumGrid::new(8, alpha).unwrap(), &p).unwrap().energies;
            eps.sort_by(f64::total_cmp);
            for (x, y) in green.energies.iter().zip(&eps) {
                assert_abs_diff_eq!(*x, *y, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn fidelity_from_vacuum_overlaps_matches_fock_states() {
        let family = FermionFamily::new(|theta| QuadraticFermionModel::ising_nn(8, theta, Boundary::Antiperiodic));
        let via_overlap = family.infidelity(0.3, 0.31).unwrap();
        let a = family.ground_state(0.3).unwrap();
        let b = family.ground_state(0.31).unwrap();
        assert_abs_diff_eq!(via_overlap, a.infidelity(&b), epsilon = 1e-12);
        let chi = fidelity_susceptibility_numeric(&family, 0.3, DEFAULT_STEP).unwrap().chi;
        assert!((chi - ising_chi_theta(8, 0.3)).abs() < 1e-3 * chi);
    }

    #[test]
    fn phase_redefinition_swaps_string_probes() {
        let p = KitaevParams::new(1.0, 0.6, 0.8, 1.7);
        let g1 = QuadraticFermionModel::kitaev(16, &p, Boundary::Antiperiodic).unwrap().diagonalize().unwrap();
        let g2 = QuadraticFermionModel::kitaev(16, &p.with_pairing(-0.8), Boundary::Antiperiodic).unwrap().diagonalize().unwrap();
        for stag in [Staggering::Uniform, Staggering::Alternating] {
            assert_abs_diff_eq!(nonlocal_qfi(&g1, StringProbe::X, stag), nonlocal_qfi(&g2, StringProbe::Y, stag), epsilon = 1e-10);
        }
    }
}
