//! Model schemas, the spectra each sweep point caches, and the observables
//! evaluated from them.

use std::collections::BTreeMap;
use std::f64::consts::LN_10;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};

use qcrit_core::fermion::{ising_chi_theta, optimal_nonlocal_qfi, Boundary, GreenMatrix, QuadraticFermionModel};
use qcrit_core::ising::{ground_state_ed, ground_state_only, order_parameter, optimal_ising_qfi, EDResult, IsingSpec, MAX_ED_SITES};
use qcrit_core::kitaev::{
    bogoliubov_solution, chi_closed_form, local_qfi, mean_particle_number, winding_number_on, DrivingParameter,
    KitaevParams, MomentumGrid,
};
use qcrit_core::lmg::{lmg_energies, lmg_fidelity_susceptibility, lmg_gaps, lmg_ground_state, lmg_spectrum, LmgSpec};
use qcrit_core::qfi::{
    fisher_matrix_su2, mixed_state_qfi, wineland_squeezing, Axis, DickeOperator, Observable, SpectralDecomposition,
    SpinChainOperator, Staggering, StateMatrix, StateVector,
};
use qcrit_core::{QcritError, Result};

use crate::cache::Spectrum;

/// Boltzmann weights below `10^-16` of the ground level are dropped.
const WEIGHT_DECADES: f64 = 16.0;
const CHI_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    IsingEd,
    IsingFermion,
    Lmg,
    Kitaev,
}

pub struct ParamSpec {
    pub name: &'static str,
    pub default: Option<f64>,
}

pub struct ObservableSpec {
    pub name: &'static str,
    pub thermal: bool,
    pub summary: &'static str,
}

const fn required(name: &'static str) -> ParamSpec {
    ParamSpec { name, default: None }
}

const fn optional(name: &'static str, value: f64) -> ParamSpec {
    ParamSpec { name, default: Some(value) }
}

const fn obs(name: &'static str, summary: &'static str) -> ObservableSpec {
    ObservableSpec { name, thermal: false, summary }
}

const fn thermal(name: &'static str, summary: &'static str) -> ObservableSpec {
    ObservableSpec { name, thermal: true, summary }
}

const ISING_ED_PARAMS: [ParamSpec; 3] = [required("theta"), optional("alpha", f64::INFINITY), optional("eps", 0.0)];
const ISING_FERMION_PARAMS: [ParamSpec; 1] = [required("theta")];
const LMG_PARAMS: [ParamSpec; 2] = [required("lambda"), optional("delta", 0.0)];
const KITAEV_PARAMS: [ParamSpec; 4] =
    [required("mu"), optional("pairing", 1.0), optional("alpha", f64::INFINITY), optional("hopping", 1.0)];

const ISING_ED_OBSERVABLES: [ObservableSpec; 7] = [
    obs("fq_optimal", "largest F_Q/N over collective J_x, J_y, J_z"),
    obs("fq_x", "F_Q[J_x]/N"),
    obs("fq_y", "F_Q[J_y]/N"),
    obs("fq_z", "F_Q[J_z]/N"),
    obs("order_parameter", "2<J_z>/N, staggered for theta > 0"),
    obs("gap", "E_1 - E_0"),
    thermal("thermal_fq", "thermal F_Q[J_z]/N, staggered for theta > 0"),
];
const ISING_FERMION_OBSERVABLES: [ObservableSpec; 3] = [
    obs("fq_nonlocal", "largest F_Q/N over the four string probes, closed ring"),
    obs("chi_theta", "closed-form fidelity susceptibility"),
    obs("gap", "smallest quasiparticle energy"),
];
const LMG_OBSERVABLES: [ObservableSpec; 6] = [
    obs("fq_density", "largest Fisher-matrix eigenvalue over N"),
    obs("xi2", "Wineland squeezing parameter"),
    obs("gap1", "E_1 - E_0"),
    obs("gap2", "E_2 - E_1"),
    obs("chi_lambda", "fidelity susceptibility in Lambda"),
    thermal("thermal_fq_density", "thermal Fisher-matrix maximum over N"),
];
const KITAEV_OBSERVABLES: [ObservableSpec; 8] = [
    obs("fq_nonlocal", "largest F_Q/L over the four string probes, closed chain"),
    obs("fzz_density", "local-probe F_zz/L"),
    obs("winding", "winding number"),
    obs("chi_mu", "closed-form fidelity susceptibility in mu"),
    obs("chi_delta", "closed-form fidelity susceptibility in the pairing"),
    obs("chi_alpha", "closed-form fidelity susceptibility in alpha"),
    obs("particle_density", "<N>/L"),
    obs("gap", "smallest quasiparticle energy"),
];

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::IsingEd, ModelKind::IsingFermion, ModelKind::Lmg, ModelKind::Kitaev];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::IsingEd => "ising_ed",
            ModelKind::IsingFermion => "ising_fermion",
            ModelKind::Lmg => "lmg",
            ModelKind::Kitaev => "kitaev",
        }
    }

    pub fn params(self) -> &'static [ParamSpec] {
        match self {
            ModelKind::IsingEd => &ISING_ED_PARAMS,
            ModelKind::IsingFermion => &ISING_FERMION_PARAMS,
            ModelKind::Lmg => &LMG_PARAMS,
            ModelKind::Kitaev => &KITAEV_PARAMS,
        }
    }

    pub fn observables(self) -> &'static [ObservableSpec] {
        match self {
            ModelKind::IsingEd => &ISING_ED_OBSERVABLES,
            ModelKind::IsingFermion => &ISING_FERMION_OBSERVABLES,
            ModelKind::Lmg => &LMG_OBSERVABLES,
            ModelKind::Kitaev => &KITAEV_OBSERVABLES,
        }
    }

    pub fn observable(self, name: &str) -> Option<&'static ObservableSpec> {
        self.observables().iter().find(|o| o.name == name)
    }

    pub fn check_size(self, n: usize) -> std::result::Result<(), String> {
        match self {
            ModelKind::IsingEd if !(2..=MAX_ED_SITES).contains(&n) => {
                Err(format!("exact diagonalization needs 2 ≤ N ≤ {MAX_ED_SITES}, got {n}"))
            }
            ModelKind::IsingFermion | ModelKind::Kitaev if n < 4 || n % 2 == 1 => {
                Err(format!("chain length must be even and at least 4, got {n}"))
            }
            ModelKind::Lmg if n < 2 => Err(format!("need at least 2 particles, got {n}")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ModelKind::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<&str> = ModelKind::ALL.iter().map(|m| m.name()).collect();
            format!("unknown model '{s}'; expected one of: {}", names.join(", "))
        })
    }
}

/// A spectrum one sweep point needs; the cacheable unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumKind {
    /// Ground state only.
    Ground,
    /// All energies, eigenvectors of the levels populated up to `t_max`.
    Thermal { t_max: f64 },
    /// The lowest three levels' gaps.
    Gaps,
    /// Quasiparticle Green matrix of the closed chain.
    Green,
    /// Pairing function tabulated on the momentum grid.
    Momentum,
}

impl SpectrumKind {
    /// Stable label used in cache keys.
    pub fn tag(&self) -> String {
        match self {
            SpectrumKind::Ground => "ground".into(),
            SpectrumKind::Thermal { t_max } => format!("thermal:{:016x}", t_max.to_bits()),
            SpectrumKind::Gaps => "gaps".into(),
            SpectrumKind::Green => "green".into(),
            SpectrumKind::Momentum => "momentum".into(),
        }
    }

    fn for_observable(model: ModelKind, name: &str, t_max: Option<f64>) -> Option<Self> {
        let thermal = SpectrumKind::Thermal { t_max: t_max.unwrap_or(0.0) };
        match (model, name) {
            (ModelKind::IsingEd, "gap" | "thermal_fq") => Some(thermal),
            (ModelKind::IsingEd, _) => Some(SpectrumKind::Ground),
            (ModelKind::IsingFermion, "chi_theta") => None,
            (ModelKind::IsingFermion, _) => Some(SpectrumKind::Green),
            (ModelKind::Lmg, "fq_density" | "xi2") => Some(SpectrumKind::Ground),
            (ModelKind::Lmg, "gap1" | "gap2") => Some(SpectrumKind::Gaps),
            (ModelKind::Lmg, "thermal_fq_density") => Some(thermal),
            (ModelKind::Lmg, _) => None,
            (ModelKind::Kitaev, "fq_nonlocal") => Some(SpectrumKind::Green),
            (ModelKind::Kitaev, _) => Some(SpectrumKind::Momentum),
        }
    }

    /// The distinct spectra behind `observables`. A full Ising spectrum
    /// also serves the ground-state observables.
    pub fn required(model: ModelKind, observables: &[String], t_max: Option<f64>) -> Vec<SpectrumKind> {
        let mut kinds: Vec<SpectrumKind> = Vec::new();
        for o in observables {
            if let Some(k) = Self::for_observable(model, o, t_max) {
                if !kinds.contains(&k) {
                    kinds.push(k);
                }
            }
        }
        if model == ModelKind::IsingEd && kinds.iter().any(|k| matches!(k, SpectrumKind::Thermal { .. })) {
            kinds.retain(|k| *k != SpectrumKind::Ground);
        }
        kinds
    }
}

/// One parameter point of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    pub model: ModelKind,
    pub params: BTreeMap<String, f64>,
    pub size: usize,
}

/// A computed value and a free-form note such as the optimal probe.
#[derive(Debug, Clone, PartialEq)]
pub struct Value {
    pub value: f64,
    pub info: String,
}

impl Value {
    fn plain(value: f64) -> Self {
        Value { value, info: String::new() }
    }
}

impl ModelPoint {
    fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    fn ising(&self) -> IsingSpec {
        IsingSpec::new(self.size, self.param("theta"), self.param("alpha")).with_field(self.param("eps"), false)
    }

    fn lmg(&self) -> LmgSpec {
        LmgSpec::new(self.size, self.param("lambda")).with_delta(self.param("delta"))
    }

    fn kitaev(&self) -> KitaevParams {
        KitaevParams::new(self.param("hopping"), self.param("mu"), self.param("pairing"), self.param("alpha"))
    }

    fn fermion_model(&self) -> Result<QuadraticFermionModel> {
        match self.model {
            ModelKind::IsingFermion => QuadraticFermionModel::ising_nn(self.size, self.param("theta"), Boundary::Antiperiodic),
            _ => QuadraticFermionModel::kitaev(self.size, &self.kitaev(), Boundary::Antiperiodic),
        }
    }

    /// Computes a spectrum from scratch.
    pub fn spectrum(&self, kind: SpectrumKind) -> Result<Spectrum> {
        let mut s = Spectrum::default();
        match (self.model, kind) {
            (ModelKind::IsingEd, SpectrumKind::Ground) => {
                let (e, psi) = ground_state_only(&self.ising())?;
                s.insert_vector("energies", &[e]);
                s.insert_matrix("states", column(psi)?);
            }
            (ModelKind::IsingEd, SpectrumKind::Thermal { t_max }) => {
                let ed = ground_state_ed(&self.ising())?;
                let keep = populated_levels(ed.energies.as_slice().unwrap_or(&[]), t_max);
                s.insert_vector("energies", &ed.energies.to_vec());
                s.insert_matrix("states", ed.eigenvectors.slice(ndarray::s![.., ..keep]).to_owned());
            }
            (ModelKind::Lmg, SpectrumKind::Ground) => {
                let (e, psi) = lmg_ground_state(&self.lmg())?;
                s.insert_vector("energies", &[e]);
                s.insert_matrix("states", column(psi)?);
            }
            (ModelKind::Lmg, SpectrumKind::Thermal { t_max }) => {
                let spec = self.lmg();
                let all = lmg_energies(&spec)?;
                let keep = populated_levels(all.as_slice().unwrap_or(&[]), t_max);
                let low = lmg_spectrum(&spec, Some(keep))?;
                s.insert_vector("energies", &low.energies);
                s.insert_matrix("states", low.states);
            }
            (ModelKind::Lmg, SpectrumKind::Gaps) => {
                let (d1, d2) = lmg_gaps(&self.lmg())?;
                s.insert_vector("gaps", &[d1, d2]);
            }
            (ModelKind::IsingFermion | ModelKind::Kitaev, SpectrumKind::Green) => {
                let green = self.fermion_model()?.diagonalize()?;
                s.insert_matrix("g", green.g);
                s.insert_vector("energies", &green.energies.to_vec());
                s.insert_matrix("phi", green.phi);
                s.insert_matrix("psi", green.psi);
                s.insert_vector("vacuum_energy", &[green.vacuum_energy]);
            }
            (ModelKind::Kitaev, SpectrumKind::Momentum) => {
                let grid = MomentumGrid::new(self.size, self.param("alpha"))?;
                s.insert_vector("momenta", &grid.momenta);
                s.insert_vector("pairing", &grid.pairing);
                s.insert_vector("pairing_slope", &grid.pairing_slope);
            }
            (model, kind) => {
                return Err(QcritError::Validation(format!("model {model} has no {} spectrum", kind.tag())));
            }
        }
        Ok(s)
    }

    /// Evaluates `observable` from the cached spectra, at `temperature` for
    /// thermal observables.
    pub fn evaluate(
        &self,
        observable: &str,
        spectra: &[(SpectrumKind, Spectrum)],
        temperature: Option<f64>,
    ) -> Result<Value> {
        let find = |pred: fn(&SpectrumKind) -> bool| {
            spectra
                .iter()
                .find(|(k, _)| pred(k))
                .map(|(_, s)| s)
                .ok_or_else(|| QcritError::Validation(format!("no spectrum available for {observable}")))
        };
        let any_dense = |k: &SpectrumKind| matches!(k, SpectrumKind::Ground | SpectrumKind::Thermal { .. });
        let n = self.size as f64;
        let t = || temperature.ok_or_else(|| QcritError::Validation(format!("{observable} needs a temperature")));
        match (self.model, observable) {
            (ModelKind::IsingEd, "gap") => {
                let e = find(|k| matches!(k, SpectrumKind::Thermal { .. }))?.vector("energies")?;
                Ok(Value::plain(e[1] - e[0]))
            }
            (ModelKind::IsingEd, "thermal_fq") => {
                let s = find(|k| matches!(k, SpectrumKind::Thermal { .. }))?;
                let (energies, states) = populated(s)?;
                let stag = if self.param("theta") > 0.0 { Staggering::Alternating } else { Staggering::Uniform };
                let op = SpinChainOperator::collective(self.size, Axis::Z, stag);
                let decomp = SpectralDecomposition::thermal(&energies, &StateMatrix::Real(states), t()?)?;
                Ok(Value::plain(mixed_state_qfi(&decomp, &op)? / n))
            }
            (ModelKind::IsingEd, name) => {
                let s = find(any_dense)?;
                let ed = EDResult {
                    energies: Array1::from(s.vector("energies")?),
                    eigenvectors: s.matrix("states")?,
                    parities: None,
                };
                let spec = self.ising();
                if name == "order_parameter" {
                    return Ok(Value::plain(order_parameter(&ed, &spec)?));
                }
                let best = optimal_ising_qfi(&ed, &spec)?;
                let stag = staggering_label(best.staggering);
                Ok(match name {
                    "fq_x" => Value { value: best.per_axis[0], info: stag.into() },
                    "fq_y" => Value { value: best.per_axis[1], info: stag.into() },
                    "fq_z" => Value { value: best.per_axis[2], info: stag.into() },
                    _ => Value { value: best.fq_density, info: format!("axis={} {stag}", best.axis.label()) },
                })
            }
            (ModelKind::IsingFermion, "chi_theta") => Ok(Value::plain(ising_chi_theta(self.size, self.param("theta")))),
            (ModelKind::IsingFermion | ModelKind::Kitaev, "fq_nonlocal") => {
                let green = green_matrix(find(|k| *k == SpectrumKind::Green)?)?;
                let best = optimal_nonlocal_qfi(&green);
                Ok(Value {
                    value: best.fq_density,
                    info: format!("probe={} {}", best.probe.label(), staggering_label(best.staggering)),
                })
            }
            (ModelKind::IsingFermion, _) => {
                let green = green_matrix(find(|k| *k == SpectrumKind::Green)?)?;
                Ok(Value::plain(green.energies.iter().copied().fold(f64::INFINITY, f64::min)))
            }
            (ModelKind::Lmg, "gap1" | "gap2") => {
                let g = find(|k| *k == SpectrumKind::Gaps)?.vector("gaps")?;
                Ok(Value::plain(if observable == "gap1" { g[0] } else { g[1] }))
            }
            (ModelKind::Lmg, "chi_lambda") => Ok(Value::plain(lmg_fidelity_susceptibility(&self.lmg(), CHI_STEP)?)),
            (ModelKind::Lmg, name) => {
                let thermal = name == "thermal_fq_density";
                let s = if thermal {
                    find(|k| matches!(k, SpectrumKind::Thermal { .. }))?
                } else {
                    find(|k| *k == SpectrumKind::Ground)?
                };
                let (energies, states) = populated(s)?;
                let states = StateMatrix::Real(states);
                let decomp = if thermal {
                    SpectralDecomposition::thermal(&energies, &states, t()?)?
                } else {
                    SpectralDecomposition::pure(&states.column(0))?
                };
                let ops = [Axis::X, Axis::Y, Axis::Z].map(|a| DickeOperator::new(self.size, a));
                let refs: [&dyn Observable; 3] = [&ops[0], &ops[1], &ops[2]];
                if name == "xi2" {
                    return Ok(Value::plain(wineland_squeezing(&decomp, refs, self.size)?));
                }
                Ok(Value::plain(fisher_matrix_su2(&decomp, refs)?.optimal_value / n))
            }
            (ModelKind::Kitaev, name) => {
                let s = find(|k| *k == SpectrumKind::Momentum)?;
                let params = self.kitaev();
                let grid = MomentumGrid {
                    sites: self.size,
                    alpha: params.alpha,
                    momenta: s.vector("momenta")?,
                    pairing: s.vector("pairing")?,
                    pairing_slope: s.vector("pairing_slope")?,
                };
                let value = match name {
                    "fzz_density" => local_qfi(&grid, &params)?.zz / n,
                    "winding" => winding_number_on(&grid, &params)?,
                    "chi_mu" => chi_closed_form(DrivingParameter::Mu, &grid, &params)?,
                    "chi_delta" => chi_closed_form(DrivingParameter::Pairing, &grid, &params)?,
                    "chi_alpha" => chi_closed_form(DrivingParameter::Alpha, &grid, &params)?,
                    "particle_density" => mean_particle_number(&grid, &params)? / n,
                    _ => bogoliubov_solution(&grid, &params)?.min_gap(),
                };
                Ok(Value::plain(value))
            }
        }
    }
}

/// Number of lowest levels whose Boltzmann weight at `t_max` exceeds the
/// truncation floor, plus one so a split doublet stays together.
fn populated_levels(energies: &[f64], t_max: f64) -> usize {
    if energies.is_empty() {
        return 0;
    }
    let cutoff = energies[0] + t_max * WEIGHT_DECADES * LN_10;
    (energies.iter().take_while(|&&e| e <= cutoff).count() + 1).min(energies.len())
}

/// Energies paired with the stored eigenvectors.
fn populated(s: &Spectrum) -> Result<(Vec<f64>, Array2<f64>)> {
    let states = s.matrix("states")?;
    let mut energies = s.vector("energies")?;
    energies.truncate(states.ncols());
    Ok((energies, states))
}

fn column(psi: StateVector) -> Result<Array2<f64>> {
    match psi {
        StateVector::Real(v) => Ok(v.insert_axis(ndarray::Axis(1))),
        StateVector::Complex(_) => Err(QcritError::Decomposition("expected a real ground state".into())),
    }
}

fn green_matrix(s: &Spectrum) -> Result<GreenMatrix> {
    Ok(GreenMatrix {
        g: s.matrix("g")?,
        energies: Array1::from(s.vector("energies")?),
        phi: s.matrix("phi")?,
        psi: s.matrix("psi")?,
        vacuum_energy: s.vector("vacuum_energy")?[0],
    })
}

fn staggering_label(s: Staggering) -> &'static str {
    match s {
        Staggering::Uniform => "uniform",
        Staggering::Alternating => "staggered",
    }
}
