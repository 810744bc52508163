//! Quantum Fisher information, Fisher matrices, multipartite-entanglement
//! bounds and Wineland spin squeezing on spectral decompositions.
//!
//! Every probe used in this crate is either real symmetric or purely
//! imaginary antisymmetric in its computational basis, so an observable is
//! stored as a real matrix-free kernel `K` together with a flag saying
//! whether the operator is `K` or `iK`.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector3};
use ndarray::{s, Array1, Array2, ArrayView2, Axis as NdAxis};
use num_complex::Complex64;

use crate::error::{ensure, QcritError, Result};

/// Probability-pair cutoff below which `(p_k, p_k')` pairs are skipped.
pub const PAIR_CUTOFF: f64 = 1e-14;
/// Boltzmann weights below this fraction of the largest are dropped.
pub const WEIGHT_TRUNCATION: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Staggering {
    Uniform,
    Alternating,
}

impl Staggering {
    pub fn sign(self, site: usize) -> f64 {
        match self {
            Staggering::Alternating if site % 2 == 1 => -1.0,
            _ => 1.0,
        }
    }
}

/// Whether the operator equals its real kernel `K` or `iK`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    RealSymmetric,
    ImaginaryAntisymmetric,
}

/// A Hermitian probe applied matrix-free to blocks of real column vectors.
pub trait Observable: Sync {
    fn dim(&self) -> usize;
    fn kind(&self) -> OperatorKind;
    /// Returns `K · block` for the real kernel `K`.
    fn apply_kernel(&self, block: ArrayView2<f64>) -> Array2<f64>;
    /// Spin axis of a collective operator, used to validate SU(2) triples.
    fn axis(&self) -> Option<Axis> {
        None
    }

    /// Dense complex matrix; intended for small dimensions and tests.
    fn to_matrix(&self) -> Array2<Complex64> {
        let d = self.dim();
        let k = self.apply_kernel(Array2::<f64>::eye(d).view());
        let phase = match self.kind() {
            OperatorKind::RealSymmetric => Complex64::new(1.0, 0.0),
            OperatorKind::ImaginaryAntisymmetric => Complex64::new(0.0, 1.0),
        };
        k.mapv(|v| phase * v)
    }
}

/// A dense observable, mostly useful for oracles and small examples.
#[derive(Debug, Clone)]
pub struct DenseObservable {
    pub kernel: Array2<f64>,
    pub kind: OperatorKind,
}

impl DenseObservable {
    pub fn real(matrix: Array2<f64>) -> Result<Self> {
        check_square(&matrix)?;
        let defect = max_abs_diff(&matrix, &matrix.t().to_owned());
        ensure(defect < 1e-12, || format!("matrix not symmetric ({defect:e})"))?;
        Ok(Self { kernel: matrix, kind: OperatorKind::RealSymmetric })
    }

    /// The operator `i·kernel` for a real antisymmetric kernel.
    pub fn imaginary(kernel: Array2<f64>) -> Result<Self> {
        check_square(&kernel)?;
        let defect = max_abs_diff(&kernel, &(-&kernel.t()));
        ensure(defect < 1e-12, || format!("kernel not antisymmetric ({defect:e})"))?;
        Ok(Self { kernel, kind: OperatorKind::ImaginaryAntisymmetric })
    }
}

fn check_square(m: &Array2<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(QcritError::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    Ok(())
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

impl Observable for DenseObservable {
    fn dim(&self) -> usize {
        self.kernel.nrows()
    }
    fn kind(&self) -> OperatorKind {
        self.kind
    }
    fn apply_kernel(&self, block: ArrayView2<f64>) -> Array2<f64> {
        self.kernel.dot(&block)
    }
}

/// Collective spin operator `Σ_j s_j σ_a^j / 2` on `n` spin-1/2 sites in the
/// σ_z product basis (bit `j` set means spin `j` up).
#[derive(Debug, Clone)]
pub struct SpinChainOperator {
    pub sites: usize,
    pub axis: Axis,
    pub coefficients: Vec<f64>,
}

impl SpinChainOperator {
    pub fn collective(sites: usize, axis: Axis, staggering: Staggering) -> Self {
        let coefficients = (0..sites).map(|j| 0.5 * staggering.sign(j)).collect();
        Self { sites, axis, coefficients }
    }

    pub fn with_coefficients(axis: Axis, coefficients: Vec<f64>) -> Self {
        Self { sites: coefficients.len(), axis, coefficients }
    }
}

impl Observable for SpinChainOperator {
    fn dim(&self) -> usize {
        1 << self.sites
    }

    fn kind(&self) -> OperatorKind {
        match self.axis {
            Axis::Y => OperatorKind::ImaginaryAntisymmetric,
            _ => OperatorKind::RealSymmetric,
        }
    }

    fn axis(&self) -> Option<Axis> {
        Some(self.axis)
    }

    fn apply_kernel(&self, block: ArrayView2<f64>) -> Array2<f64> {
        let dim = self.dim();
        assert_eq!(block.nrows(), dim, "state dimension does not match operator");
        let mut out = Array2::<f64>::zeros(block.raw_dim());
        match self.axis {
            Axis::Z => {
                for s in 0..dim {
                    let diag: f64 = self
                        .coefficients
                        .iter()
                        .enumerate()
                        .map(|(j, c)| if s >> j & 1 == 1 { *c } else { -*c })
                        .sum();
                    out.row_mut(s).scaled_add(diag, &block.row(s));
                }
            }
            Axis::X | Axis::Y => {
                let is_y = self.axis == Axis::Y;
                for s in 0..dim {
                    let src = block.row(s);
                    for (j, &c) in self.coefficients.iter().enumerate() {
                        let t = s ^ (1 << j);
                        // K|up> = |down>, K|down> = -|up> reproduces σ_y = iK.
                        let amp = if is_y && s >> j & 1 == 0 { -c } else { c };
                        out.row_mut(t).scaled_add(amp, &src);
                    }
                }
            }
        }
        out
    }
}

/// Collective spin component in the Dicke basis `|J, m⟩`, `m = -J..=J`.
#[derive(Debug, Clone)]
pub struct DickeOperator {
    pub particles: usize,
    pub axis: Axis,
}

impl DickeOperator {
    pub fn new(particles: usize, axis: Axis) -> Self {
        Self { particles, axis }
    }

    fn ladder(&self, i: usize) -> f64 {
        let j = self.particles as f64 / 2.0;
        let m = i as f64 - j;
        (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
    }
}

impl Observable for DickeOperator {
    fn dim(&self) -> usize {
        self.particles + 1
    }

    fn kind(&self) -> OperatorKind {
        match self.axis {
            Axis::Y => OperatorKind::ImaginaryAntisymmetric,
            _ => OperatorKind::RealSymmetric,
        }
    }

    fn axis(&self) -> Option<Axis> {
        Some(self.axis)
    }

    fn apply_kernel(&self, block: ArrayView2<f64>) -> Array2<f64> {
        let dim = self.dim();
        assert_eq!(block.nrows(), dim, "state dimension does not match operator");
        let j = self.particles as f64 / 2.0;
        let mut out = Array2::<f64>::zeros(block.raw_dim());
        match self.axis {
            Axis::Z => {
                for i in 0..dim {
                    out.row_mut(i).scaled_add(i as f64 - j, &block.row(i));
                }
            }
            Axis::X | Axis::Y => {
                // J_x = (J+ + J-)/2 and J_y = i (J- - J+)/2.
                let up_sign = if self.axis == Axis::Y { -0.5 } else { 0.5 };
                for i in 0..dim - 1 {
                    let c = self.ladder(i);
                    out.row_mut(i + 1).scaled_add(up_sign * c, &block.row(i));
                    out.row_mut(i).scaled_add(0.5 * c, &block.row(i + 1));
                }
            }
        }
        out
    }
}

/// A single normalized state.
#[derive(Debug, Clone, PartialEq)]
pub enum StateVector {
    Real(Array1<f64>),
    Complex(Array1<Complex64>),
}

impl StateVector {
    pub fn dim(&self) -> usize {
        match self {
            StateVector::Real(v) => v.len(),
            StateVector::Complex(v) => v.len(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            StateVector::Real(v) => v.dot(v).sqrt(),
            StateVector::Complex(v) => v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        match (self, other) {
            (StateVector::Real(a), StateVector::Real(b)) => Complex64::new(a.dot(b), 0.0),
            _ => {
                let a = self.to_complex();
                let b = other.to_complex();
                a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
            }
        }
    }

    pub fn to_complex(&self) -> Array1<Complex64> {
        match self {
            StateVector::Real(v) => v.mapv(|x| Complex64::new(x, 0.0)),
            StateVector::Complex(v) => v.clone(),
        }
    }

    /// `1 - |⟨self|other⟩|` evaluated without cancellation as half the squared
    /// distance after aligning the relative phase.
    pub fn infidelity(&self, other: &StateVector) -> f64 {
        let ov = self.inner(other);
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { Complex64::new(1.0, 0.0) };
        let a = self.to_complex();
        let b = other.to_complex();
        let dist: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x * phase - y).norm_sqr()).sum();
        // For normalized states ‖a e^{iφ} − b‖² = 2 − 2|⟨a|b⟩|.
        0.5 * dist
    }
}

impl From<Array1<f64>> for StateVector {
    fn from(v: Array1<f64>) -> Self {
        StateVector::Real(v)
    }
}

impl From<Array1<Complex64>> for StateVector {
    fn from(v: Array1<Complex64>) -> Self {
        StateVector::Complex(v)
    }
}

/// States stored as matrix columns.
#[derive(Debug, Clone, PartialEq)]
pub enum StateMatrix {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

impl StateMatrix {
    pub fn dim(&self) -> usize {
        match self {
            StateMatrix::Real(m) => m.nrows(),
            StateMatrix::Complex(m) => m.nrows(),
        }
    }

    pub fn count(&self) -> usize {
        match self {
            StateMatrix::Real(m) => m.ncols(),
            StateMatrix::Complex(m) => m.ncols(),
        }
    }

    pub fn column(&self, k: usize) -> StateVector {
        match self {
            StateMatrix::Real(m) => StateVector::Real(m.column(k).to_owned()),
            StateMatrix::Complex(m) => StateVector::Complex(m.column(k).to_owned()),
        }
    }

    pub fn select(&self, cols: &[usize]) -> StateMatrix {
        match self {
            StateMatrix::Real(m) => StateMatrix::Real(m.select(NdAxis(1), cols)),
            StateMatrix::Complex(m) => StateMatrix::Complex(m.select(NdAxis(1), cols)),
        }
    }

    fn from_vector(v: &StateVector) -> StateMatrix {
        match v {
            StateVector::Real(v) => StateMatrix::Real(v.clone().insert_axis(NdAxis(1))),
            StateVector::Complex(v) => StateMatrix::Complex(v.clone().insert_axis(NdAxis(1))),
        }
    }

    pub fn orthonormality_defect(&self) -> f64 {
        match self {
            StateMatrix::Real(m) => crate::linalg::orthonormality_defect(m.view()),
            StateMatrix::Complex(m) => {
                let gram = m.t().mapv(|c| c.conj()).dot(m);
                gram.indexed_iter().fold(0.0f64, |acc, ((i, j), g)| {
                    let target = if i == j { 1.0 } else { 0.0 };
                    acc.max((g - target).norm())
                })
            }
        }
    }
}

/// Probabilities and orthonormal states `ρ = Σ_k p_k |k⟩⟨k|`, sorted by
/// descending probability.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    probabilities: Vec<f64>,
    states: StateMatrix,
    energies: Option<Vec<f64>>,
}

impl SpectralDecomposition {
    /// Validates normalization, orthonormality and ordering.
    pub fn new(probabilities: Vec<f64>, states: StateMatrix, energies: Option<Vec<f64>>) -> Result<Self> {
        if probabilities.len() != states.count() {
            return Err(QcritError::DimensionMismatch {
                expected: states.count(),
                found: probabilities.len(),
            });
        }
        ensure(probabilities.iter().all(|p| *p >= 0.0), || "negative probability".into())?;
        let total: f64 = probabilities.iter().sum();
        ensure((total - 1.0).abs() < 1e-12, || format!("probabilities sum to {total}"))?;
        ensure(probabilities.windows(2).all(|w| w[0] >= w[1]), || {
            "probabilities must be sorted descending".into()
        })?;
        let defect = states.orthonormality_defect();
        ensure(defect < 1e-10, || format!("states not orthonormal (defect {defect:e})"))?;
        if let Some(e) = &energies {
            ensure(e.len() == probabilities.len(), || "energy count mismatch".into())?;
        }
        Ok(Self { probabilities, states, energies })
    }

    pub fn pure(state: &StateVector) -> Result<Self> {
        check_normalized(state)?;
        Ok(Self {
            probabilities: vec![1.0],
            states: StateMatrix::from_vector(state),
            energies: None,
        })
    }

    /// Canonical ensemble built from eigenpairs (columns of `states`) at
    /// temperature `t`. Eigenvectors are trusted to be orthonormal.
    pub fn thermal(energies: &[f64], states: &StateMatrix, t: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(QcritError::Validation(format!("temperature must be positive, got {t}")));
        }
        if energies.len() != states.count() {
            return Err(QcritError::DimensionMismatch { expected: states.count(), found: energies.len() });
        }
        let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let mut kept: Vec<(usize, f64)> = energies
            .iter()
            .enumerate()
            .map(|(k, e)| (k, (-(e - e0) / t).exp()))
            .filter(|(_, w)| *w >= WEIGHT_TRUNCATION)
            .collect();
        kept.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let z: f64 = kept.iter().map(|(_, w)| w).sum();
        let cols: Vec<usize> = kept.iter().map(|(k, _)| *k).collect();
        Ok(Self {
            probabilities: kept.iter().map(|(_, w)| w / z).collect(),
            states: states.select(&cols),
            energies: Some(cols.iter().map(|&k| energies[k]).collect()),
        })
    }

    /// Eigendecomposition of a Hermitian, unit-trace density matrix. Weights
    /// below `cutoff` are dropped and the rest renormalized.
    pub fn from_density_matrix(rho: ArrayView2<Complex64>, cutoff: f64) -> Result<Self> {
        let (values, vectors) = crate::linalg::herm_eigh(rho)?;
        let floor = -1e-10 * values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        ensure(values.iter().all(|v| *v >= floor), || "density matrix is not positive semidefinite".into())?;
        let mut kept: Vec<(usize, f64)> =
            values.iter().enumerate().filter(|(_, v)| **v > cutoff).map(|(k, v)| (k, *v)).collect();
        ensure(!kept.is_empty(), || "density matrix has no weight above the cutoff".into())?;
        kept.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let total: f64 = kept.iter().map(|(_, v)| v).sum();
        let cols: Vec<usize> = kept.iter().map(|(k, _)| *k).collect();
        Self::new(
            kept.iter().map(|(_, v)| v / total).collect(),
            StateMatrix::Complex(vectors.select(NdAxis(1), &cols)),
            None,
        )
    }

    /// Equal-weight mixture of the given orthonormal states.
    pub fn uniform_mixture(states: StateMatrix) -> Result<Self> {
        let n = states.count();
        ensure(n > 0, || "empty mixture".into())?;
        Self::new(vec![1.0 / n as f64; n], states, None)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn states(&self) -> &StateMatrix {
        &self.states
    }

    pub fn energies(&self) -> Option<&[f64]> {
        self.energies.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.states.dim()
    }
}

fn check_normalized(state: &StateVector) -> Result<()> {
    let norm = state.norm();
    ensure((norm - 1.0).abs() < 1e-10, || format!("state not normalized (norm {norm})"))
}

/// Operator data restricted to the support of a decomposition.
struct Projected {
    /// `⟨k|O|k'⟩` for the support states.
    elements: Elements,
    /// `O|k⟩` as columns, for second moments.
    applied: StateMatrix,
}

enum Elements {
    Real(Array2<f64>),
    /// Stores `r` with `⟨k|O|k'⟩ = i r`.
    Imag(Array2<f64>),
    Complex(Array2<Complex64>),
}

impl Elements {
    fn value(&self, i: usize, j: usize) -> Complex64 {
        match self {
            Elements::Real(m) => Complex64::new(m[[i, j]], 0.0),
            Elements::Imag(m) => Complex64::new(0.0, m[[i, j]]),
            Elements::Complex(m) => m[[i, j]],
        }
    }

    /// `Re(a_ij · conj(b_ij))`.
    fn re_product(a: &Elements, b: &Elements, i: usize, j: usize) -> f64 {
        match (a, b) {
            (Elements::Real(x), Elements::Real(y)) | (Elements::Imag(x), Elements::Imag(y)) => {
                x[[i, j]] * y[[i, j]]
            }
            (Elements::Real(_), Elements::Imag(_)) | (Elements::Imag(_), Elements::Real(_)) => 0.0,
            _ => (a.value(i, j) * b.value(i, j).conj()).re,
        }
    }
}

fn project(states: &StateMatrix, op: &dyn Observable) -> Result<Projected> {
    if states.dim() != op.dim() {
        return Err(QcritError::DimensionMismatch { expected: op.dim(), found: states.dim() });
    }
    let i = Complex64::new(0.0, 1.0);
    Ok(match states {
        StateMatrix::Real(v) => {
            let kv = op.apply_kernel(v.view());
            let r = v.t().dot(&kv);
            match op.kind() {
                OperatorKind::RealSymmetric => Projected {
                    elements: Elements::Real(r),
                    applied: StateMatrix::Real(kv),
                },
                OperatorKind::ImaginaryAntisymmetric => Projected {
                    elements: Elements::Imag(r),
                    applied: StateMatrix::Complex(kv.mapv(|x| i * x)),
                },
            }
        }
        StateMatrix::Complex(v) => {
            let re = v.mapv(|c| c.re);
            let im = v.mapv(|c| c.im);
            let kre = op.apply_kernel(re.view());
            let kim = op.apply_kernel(im.view());
            let mut ov = Array2::<Complex64>::zeros(v.raw_dim());
            ndarray::Zip::from(&mut ov).and(&kre).and(&kim).for_each(|o, &a, &b| {
                *o = Complex64::new(a, b);
            });
            if op.kind() == OperatorKind::ImaginaryAntisymmetric {
                ov.mapv_inplace(|c| i * c);
            }
            let m = v.t().mapv(|c| c.conj()).dot(&ov);
            Projected { elements: Elements::Complex(m), applied: StateMatrix::Complex(ov) }
        }
    })
}

/// `Re⟨O_a k|O_b k⟩` for each support state `k`.
fn cross_moments(a: &StateMatrix, b: &StateMatrix) -> Vec<f64> {
    match (a, b) {
        (StateMatrix::Real(x), StateMatrix::Real(y)) => x
            .axis_iter(NdAxis(1))
            .zip(y.axis_iter(NdAxis(1)))
            .map(|(u, v)| u.dot(&v))
            .collect(),
        _ => {
            let to_c = |m: &StateMatrix| match m {
                StateMatrix::Real(r) => r.mapv(|x| Complex64::new(x, 0.0)),
                StateMatrix::Complex(c) => c.clone(),
            };
            let (x, y) = (to_c(a), to_c(b));
            x.axis_iter(NdAxis(1))
                .zip(y.axis_iter(NdAxis(1)))
                .map(|(u, v)| u.iter().zip(v.iter()).map(|(p, q)| (p.conj() * q).re).sum())
                .collect()
        }
    }
}

/// `F_ab = 4 Σ_k p_k Re⟨A k|B k⟩ − 8 Σ_{kk'} p_k p_k' /(p_k + p_k') Re(A_kk' B_k'k)`,
/// which equals `2 Σ (p_k − p_k')²/(p_k + p_k') Re(A_kk' B_k'k)` summed over a
/// complete basis while needing only the support states.
fn fisher_entry(p: &[f64], a: &Projected, b: &Projected) -> f64 {
    let moments = cross_moments(&a.applied, &b.applied);
    let first: f64 = p.iter().zip(&moments).map(|(pk, m)| 4.0 * pk * m).sum();
    let n = p.len();
    let mut second = 0.0;
    for k in 0..n {
        for kp in 0..n {
            let sum = p[k] + p[kp];
            if sum < PAIR_CUTOFF {
                continue;
            }
            second += p[k] * p[kp] / sum * Elements::re_product(&a.elements, &b.elements, k, kp);
        }
    }
    first - 8.0 * second
}

/// Matrix elements `⟨k|O|k'⟩` among the columns of `states` and the second
/// moments `⟨k|O²|k⟩`.
pub fn operator_moments(states: &StateMatrix, op: &dyn Observable) -> Result<(Array2<Complex64>, Vec<f64>)> {
    let proj = project(states, op)?;
    let n = states.count();
    let elements = Array2::from_shape_fn((n, n), |(i, j)| proj.elements.value(i, j));
    Ok((elements, cross_moments(&proj.applied, &proj.applied)))
}

/// `4 (⟨O²⟩ − ⟨O⟩²)` for a normalized pure state.
pub fn pure_state_qfi(state: &StateVector, op: &dyn Observable) -> Result<f64> {
    let decomp = SpectralDecomposition::pure(state)?;
    mixed_state_qfi(&decomp, op)
}

/// `2 Σ_{kk'} (p_k − p_k')²/(p_k + p_k') |⟨k|O|k'⟩|²`.
pub fn mixed_state_qfi(decomp: &SpectralDecomposition, op: &dyn Observable) -> Result<f64> {
    let proj = project(&decomp.states, op)?;
    Ok(fisher_entry(&decomp.probabilities, &proj, &proj).max(0.0))
}

/// Variance `⟨O²⟩ − ⟨O⟩²` of an observable in a mixed state.
pub fn variance(decomp: &SpectralDecomposition, op: &dyn Observable) -> Result<f64> {
    let proj = project(&decomp.states, op)?;
    let p = &decomp.probabilities;
    let second: f64 = p.iter().zip(cross_moments(&proj.applied, &proj.applied)).map(|(a, b)| a * b).sum();
    let mean: f64 = p.iter().enumerate().map(|(k, pk)| pk * proj.elements.value(k, k).re).sum();
    Ok(second - mean * mean)
}

/// `Tr(ρ O)`.
pub fn expectation(decomp: &SpectralDecomposition, op: &dyn Observable) -> Result<f64> {
    let proj = project(&decomp.states, op)?;
    Ok(decomp.probabilities.iter().enumerate().map(|(k, pk)| pk * proj.elements.value(k, k).re).sum())
}

/// Symmetric 3×3 Fisher matrix for SU(2) rotations and its top eigenpair.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherMatrix {
    pub entries: [[f64; 3]; 3],
    pub optimal_value: f64,
    pub optimal_direction: [f64; 3],
    /// True when the largest eigenvalue is degenerate.
    pub degenerate: bool,
}

impl FisherMatrix {
    pub fn from_entries(entries: [[f64; 3]; 3]) -> Self {
        let m = Matrix3::from_fn(|i, j| 0.5 * (entries[i][j] + entries[j][i]));
        let eig = SymmetricEigen::new(m);
        let top = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-10 * top.abs().max(1.0);
        let mut candidates: Vec<Vector3<f64>> = Vec::new();
        for (k, &val) in eig.eigenvalues.iter().enumerate() {
            if (top - val).abs() <= tol {
                let v = eig.eigenvectors.column(k).into_owned();
                candidates.push(v);
                candidates.push(-v);
            }
        }
        let degenerate = candidates.len() > 2;
        let best = candidates
            .into_iter()
            .max_by(|a, b| {
                a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])).then(a[2].total_cmp(&b[2]))
            })
            .expect("at least one eigenvector");
        let sym = [[m[(0, 0)], m[(0, 1)], m[(0, 2)]], [m[(1, 0)], m[(1, 1)], m[(1, 2)]], [m[(2, 0)], m[(2, 1)], m[(2, 2)]]];
        Self {
            entries: sym,
            optimal_value: top,
            optimal_direction: [best[0], best[1], best[2]],
            degenerate,
        }
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.entries[0][0], self.entries[1][1], self.entries[2][2]]
    }
}

/// Fisher matrix for the three generators `ops` (one per spin axis).
pub fn fisher_matrix_su2(decomp: &SpectralDecomposition, ops: [&dyn Observable; 3]) -> Result<FisherMatrix> {
    if let [Some(a), Some(b), Some(c)] = ops.map(|o| o.axis()) {
        ensure(a != b && b != c && a != c, || "generators must be three distinct spin axes".into())?;
    }
    let proj = ops.iter().map(|o| project(&decomp.states, *o)).collect::<Result<Vec<_>>>()?;
    let p = &decomp.probabilities;
    let mut entries = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            let v = fisher_entry(p, &proj[a], &proj[b]);
            entries[a][b] = v;
            entries[b][a] = v;
        }
    }
    Ok(FisherMatrix::from_entries(entries))
}

/// Ceiling on the Fisher information of `κ`-producible states of `n` parties,
/// `{⌊n/κ⌋κ² + (n − ⌊n/κ⌋κ)²}·spread²`.
pub fn k_producibility_bound(n: usize, kappa: usize, spread: f64) -> Result<f64> {
    ensure(kappa >= 1 && kappa <= n, || format!("kappa = {kappa} outside [1, {n}]"))?;
    let blocks = n / kappa;
    let rest = n - blocks * kappa;
    Ok(((blocks * kappa * kappa + rest * rest) as f64) * spread * spread)
}

/// Largest `κ < N` certified by `F_Q/N > κ`; zero when nothing is witnessed.
pub fn entanglement_depth(fq_density: f64, n: usize) -> usize {
    if !(fq_density > 1.0) || n < 2 {
        return 0;
    }
    let kappa = fq_density.ceil() as usize - 1;
    kappa.min(n - 1)
}

/// Wineland squeezing parameter `ξ²_R = N min_⊥ (ΔJ_⊥)² / |⟨J⟩|²`.
pub fn wineland_squeezing(
    decomp: &SpectralDecomposition,
    spin_ops: [&dyn Observable; 3],
    particles: usize,
) -> Result<f64> {
    let proj = spin_ops.iter().map(|o| project(&decomp.states, *o)).collect::<Result<Vec<_>>>()?;
    let p = &decomp.probabilities;
    let mean: Vec<f64> = proj
        .iter()
        .map(|pr| p.iter().enumerate().map(|(k, pk)| pk * pr.elements.value(k, k).re).sum())
        .collect();
    let mut cov = Matrix3::<f64>::zeros();
    for a in 0..3 {
        for b in a..3 {
            let m: f64 = p
                .iter()
                .zip(cross_moments(&proj[a].applied, &proj[b].applied))
                .map(|(pk, x)| pk * x)
                .sum();
            let c = m - mean[a] * mean[b];
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }
    let mvec = Vector3::new(mean[0], mean[1], mean[2]);
    let length = mvec.norm();
    if length <= 1e-12 * particles as f64 {
        return Err(QcritError::Undefined("mean spin vanishes; squeezing undefined".into()));
    }
    let n_hat = mvec / length;
    let trial = if n_hat[0].abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (trial - n_hat * n_hat.dot(&trial)).normalize();
    let e2 = n_hat.cross(&e1);
    let block = Matrix2::new(
        e1.dot(&(cov * e1)),
        e1.dot(&(cov * e2)),
        e2.dot(&(cov * e1)),
        e2.dot(&(cov * e2)),
    );
    let (a, b, d) = (block[(0, 0)], 0.5 * (block[(0, 1)] + block[(1, 0)]), block[(1, 1)]);
    let min_var = 0.5 * (a + d) - (0.25 * (a - d).powi(2) + b * b).sqrt();
    Ok(particles as f64 * min_var / (length * length))
}

/// Outcome probabilities at `φ` and `φ ± dφ` for a finite-difference Fisher estimate.
#[derive(Debug, Clone)]
pub struct Likelihood {
    pub at: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub dphi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalFisher {
    pub value: f64,
    /// Outcomes with vanishing probability but nonzero slope, left out of the sum.
    pub excluded: usize,
}

/// `Σ_ε (∂_φ P)²/P` with a central difference for the derivative.
pub fn classical_fisher_information(lik: &Likelihood) -> Result<ClassicalFisher> {
    let n = lik.at.len();
    ensure(lik.plus.len() == n && lik.minus.len() == n, || "outcome sets differ in length".into())?;
    ensure(lik.dphi > 0.0, || "step must be positive".into())?;
    let mut value = 0.0;
    let mut excluded = 0;
    for k in 0..n {
        let slope = (lik.plus[k] - lik.minus[k]) / (2.0 * lik.dphi);
        if lik.at[k] > 0.0 {
            value += slope * slope / lik.at[k];
        } else if slope != 0.0 {
            excluded += 1;
        }
    }
    Ok(ClassicalFisher { value, excluded })
}

/// Columns `lo..hi` of a state matrix, as a standalone matrix.
pub fn slice_states(states: &StateMatrix, lo: usize, hi: usize) -> StateMatrix {
    match states {
        StateMatrix::Real(m) => StateMatrix::Real(m.slice(s![.., lo..hi]).to_owned()),
        StateMatrix::Complex(m) => StateMatrix::Complex(m.slice(s![.., lo..hi]).to_owned()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    /// Product state with every spin along -x.
    fn coherent_minus_x(n: usize) -> StateVector {
        let d = 1 << n;
        let mut v = Array1::<f64>::zeros(d);
        for s in 0..d {
            let flips = (s as u32).count_ones();
            v[s] = if flips % 2 == 0 { 1.0 } else { -1.0 };
        }
        v /= (d as f64).sqrt();
        StateVector::Real(v)
    }

    fn ghz(n: usize) -> StateVector {
        let mut v = Array1::<f64>::zeros(1 << n);
        v[0] = std::f64::consts::FRAC_1_SQRT_2;
        v[(1 << n) - 1] = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::Real(v)
    }

    #[test]
    fn coherent_state_saturates_shot_noise() {
        let jz = SpinChainOperator::collective(4, Axis::Z, Staggering::Uniform);
        assert_abs_diff_eq!(pure_state_qfi(&coherent_minus_x(4), &jz).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn ghz_reaches_heisenberg_limit() {
        let jz = SpinChainOperator::collective(6, Axis::Z, Staggering::Uniform);
        assert_abs_diff_eq!(pure_state_qfi(&ghz(6), &jz).unwrap(), 36.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenstate_has_zero_qfi() {
        let jz = SpinChainOperator::collective(3, Axis::Z, Staggering::Uniform);
        let mut v = Array1::<f64>::zeros(8);
        v[5] = 1.0;
        assert_abs_diff_eq!(pure_state_qfi(&StateVector::Real(v), &jz).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let jz = SpinChainOperator::collective(1, Axis::Z, Staggering::Uniform);
        let v = StateVector::Real(array![1.0, 1.0]);
        assert!(matches!(pure_state_qfi(&v, &jz), Err(QcritError::Validation(_))));
    }

    #[test]
    fn maximally_mixed_state_has_zero_qfi() {
        let jx = SpinChainOperator::collective(3, Axis::X, Staggering::Uniform);
        let d = SpectralDecomposition::uniform_mixture(StateMatrix::Real(Array2::eye(8))).unwrap();
        assert_abs_diff_eq!(mixed_state_qfi(&d, &jx).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_level_thermal_state_follows_tanh_squared() {
        // H = (Δ/2) σ_z, O = σ_x / 2: F_0 = 1.
        let delta = 0.8;
        let states = StateMatrix::Real(array![[0.0, 1.0], [1.0, 0.0]]);
        let energies = [-delta / 2.0, delta / 2.0];
        let op = SpinChainOperator::collective(1, Axis::X, Staggering::Uniform);
        for t in [0.05, 0.3, 1.0, 4.0] {
            let d = SpectralDecomposition::thermal(&energies, &states, t).unwrap();
            let f = mixed_state_qfi(&d, &op).unwrap();
            // Brute force over the 2×2 sum.
            let p = d.probabilities();
            let brute = if p.len() == 2 { 2.0 * 2.0 * (p[0] - p[1]).powi(2) / (p[0] + p[1]) * 0.25 } else { 1.0 };
            assert_abs_diff_eq!(f, brute, epsilon = 1e-12);
            assert_abs_diff_eq!(f, (delta / (2.0 * t)).tanh().powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn dicke_operators_obey_commutation() {
        let n = 4;
        let [jx, jy, jz] = Axis::ALL.map(|a| DickeOperator::new(n, a).to_matrix());
        let comm = jx.dot(&jy) - jy.dot(&jx);
        let i = Complex64::new(0.0, 1.0);
        for (c, z) in comm.iter().zip(jz.iter()) {
            assert!((c - i * z).norm() < 1e-12);
        }
    }

    #[test]
    fn spin_chain_operators_obey_commutation() {
        let n = 3;
        let [jx, jy, jz] = Axis::ALL.map(|a| SpinChainOperator::collective(n, a, Staggering::Uniform).to_matrix());
        let comm = jx.dot(&jy) - jy.dot(&jx);
        let i = Complex64::new(0.0, 1.0);
        for (c, z) in comm.iter().zip(jz.iter()) {
            assert!((c - i * z).norm() < 1e-12);
        }
    }

    #[test]
    fn coherent_state_fisher_matrix_and_squeezing() {
        let n = 4;
        let ops: Vec<SpinChainOperator> =
            Axis::ALL.iter().map(|&a| SpinChainOperator::collective(n, a, Staggering::Uniform)).collect();
        let d = SpectralDecomposition::pure(&coherent_minus_x(n)).unwrap();
        let fm = fisher_matrix_su2(&d, [&ops[0], &ops[1], &ops[2]]).unwrap();
        assert_abs_diff_eq!(fm.optimal_value, n as f64, epsilon = 1e-12);
        assert!(fm.degenerate);
        let xi = wineland_squeezing(&d, [&ops[0], &ops[1], &ops[2]], n).unwrap();
        assert_abs_diff_eq!(xi, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn singlet_fisher_matrix_matches_dense_evaluation() {
        // Singlet (|01⟩ − |10⟩)/√2 has zero collective variance.
        let v = array![0.0, 1.0, -1.0, 0.0] / 2f64.sqrt();
        let ops: Vec<SpinChainOperator> =
            Axis::ALL.iter().map(|&a| SpinChainOperator::collective(2, a, Staggering::Uniform)).collect();
        let d = SpectralDecomposition::pure(&StateVector::Real(v.clone())).unwrap();
        let fm = fisher_matrix_su2(&d, [&ops[0], &ops[1], &ops[2]]).unwrap();
        let vc = v.mapv(|x| Complex64::new(x, 0.0));
        for a in 0..3 {
            for b in 0..3 {
                let ma = ops[a].to_matrix();
                let mb = ops[b].to_matrix();
                let ab = vc.dot(&ma.dot(&mb.dot(&vc)));
                let ba = vc.dot(&mb.dot(&ma.dot(&vc)));
                let ea = vc.dot(&ma.dot(&vc));
                let eb = vc.dot(&mb.dot(&vc));
                let want = 2.0 * (ab + ba).re - 4.0 * (ea * eb).re;
                assert_abs_diff_eq!(fm.entries[a][b], want, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(fm.optimal_value, 0.0, epsilon = 1e-12);
        let err = wineland_squeezing(&d, [&ops[0], &ops[1], &ops[2]], 2).unwrap_err();
        assert!(matches!(err, QcritError::Undefined(_)));
    }

    #[test]
    fn non_orthogonal_axes_rejected() {
        let jx = SpinChainOperator::collective(2, Axis::X, Staggering::Uniform);
        let jz = SpinChainOperator::collective(2, Axis::Z, Staggering::Uniform);
        let d = SpectralDecomposition::pure(&StateVector::Real(array![1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!(fisher_matrix_su2(&d, [&jx, &jx, &jz]).is_err());
    }

    #[test]
    fn producibility_bound_examples() {
        assert_eq!(k_producibility_bound(10, 1, 1.0).unwrap(), 10.0);
        assert_eq!(k_producibility_bound(10, 10, 1.0).unwrap(), 100.0);
        assert_eq!(k_producibility_bound(10, 3, 1.0).unwrap(), 28.0);
        assert!(k_producibility_bound(10, 0, 1.0).is_err());
        assert!(k_producibility_bound(10, 11, 1.0).is_err());
    }

    #[test]
    fn depth_examples() {
        assert_eq!(entanglement_depth(1.0, 10), 0);
        assert_eq!(entanglement_depth(10.0, 10), 9);
        assert_eq!(entanglement_depth(3.2, 100), 3);
    }

    #[test]
    fn classical_fisher_examples() {
        let flat = Likelihood { at: vec![0.4, 0.6], plus: vec![0.4, 0.6], minus: vec![0.4, 0.6], dphi: 1e-3 };
        assert_eq!(classical_fisher_information(&flat).unwrap().value, 0.0);

        let (phi, h) = (0.3, 1e-5);
        let coin = |p: f64| vec![p, 1.0 - p];
        let lik = Likelihood { at: coin(phi), plus: coin(phi + h), minus: coin(phi - h), dphi: h };
        let f = classical_fisher_information(&lik).unwrap().value;
        assert!((f - 1.0 / (phi * (1.0 - phi))).abs() < 1e-6);

        for phi in [0.2, 1.0, 2.5] {
            let p = |x: f64| vec![(x / 2.0).cos().powi(2), (x / 2.0).sin().powi(2)];
            let lik = Likelihood { at: p(phi), plus: p(phi + h), minus: p(phi - h), dphi: h };
            assert!((classical_fisher_information(&lik).unwrap().value - 1.0).abs() < 1e-6);
        }

        let lik = Likelihood { at: vec![0.0, 1.0], plus: vec![0.1, 0.9], minus: vec![0.0, 1.0], dphi: 0.1 };
        assert_eq!(classical_fisher_information(&lik).unwrap().excluded, 1);
    }
}
