//! Universal thermal laws, crossover temperatures and finite-size fits.

use crate::error::{ensure, QcritError, Result};
use crate::qfi::{operator_moments, Observable, StateMatrix};

/// Minimum number of samples accepted by any fit.
pub const MIN_FIT_SAMPLES: usize = 5;
/// Minimum number of samples for locating a crossover.
pub const MIN_CROSSOVER_SAMPLES: usize = 20;

/// Lowest two levels of a spectrum as seen by the thermal Fisher information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelSpectrum {
    pub f0: f64,
    pub delta: f64,
    pub ground_degeneracy: usize,
    pub excited_degeneracy: usize,
}

impl TwoLevelSpectrum {
    pub fn new(f0: f64, delta: f64) -> Self {
        Self { f0, delta, ground_degeneracy: 1, excited_degeneracy: 1 }
    }

    pub fn with_degeneracies(mut self, ground: usize, excited: usize) -> Self {
        self.ground_degeneracy = ground;
        self.excited_degeneracy = excited;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.f0 >= 0.0, || format!("F0 = {} must be non-negative", self.f0))?;
        ensure(self.delta > 0.0, || format!("Δ = {} must be positive", self.delta))?;
        ensure(self.ground_degeneracy >= 1 && self.excited_degeneracy >= 1, || "degeneracies must be ≥ 1".into())
    }
}

/// `F₀ tanh²(Δ/2T) μ(1 + e^{−Δ/T}) / (μ + ν e^{−Δ/T})`.
pub fn two_level_law(spec: &TwoLevelSpectrum, t: f64) -> Result<f64> {
    spec.validate()?;
    ensure(t > 0.0, || format!("temperature must be positive, got {t}"))?;
    let x = spec.delta / t;
    let b = (-x).exp();
    let (mu, nu) = (spec.ground_degeneracy as f64, spec.excited_degeneracy as f64);
    Ok(spec.f0 * (0.5 * x).tanh().powi(2) * mu * (1.0 + b) / (mu + nu * b))
}

/// Fisher information of the equal mixture of `μ` degenerate ground states,
/// `(4/μ) Σ_n [⟨n|O²|n⟩ − Σ_m |⟨n|O|m⟩|²]`.
pub fn degenerate_ground_qfi(states: &StateMatrix, op: &dyn Observable) -> Result<f64> {
    let mu = states.count();
    ensure(mu >= 2, || format!("need at least two degenerate states, got {mu}"))?;
    let defect = states.orthonormality_defect();
    ensure(defect < 1e-10, || format!("states not orthonormal (defect {defect:e})"))?;
    let (elements, second) = operator_moments(states, op)?;
    let total: f64 = (0..mu)
        .map(|n| second[n] - (0..mu).map(|m| elements[[n, m]].norm_sqr()).sum::<f64>())
        .sum();
    Ok(4.0 * total / mu as f64)
}

/// Natural cubic spline through `(x_i, y_i)` with strictly increasing `x`.
#[derive(Debug, Clone)]
pub struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        ensure(n >= 3 && y.len() == n, || "spline needs at least three matching samples".into())?;
        ensure(x.windows(2).all(|w| w[1] > w[0]), || "spline abscissae must increase strictly".into())?;
        let mut m = vec![0.0; n];
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        // Thomas algorithm for interior second derivatives.
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
        }
        for i in 1..k {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (0..k).rev() {
            let upper = if i + 1 < k { h[i + 1] * m[i + 2] } else { 0.0 };
            m[i + 1] = (rhs[i] - upper) / diag[i];
        }
        Ok(Self { x: x.to_vec(), y: y.to_vec(), m })
    }

    fn segment(&self, t: f64) -> usize {
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p => (p - 1).min(self.x.len() - 2),
        }
    }

    /// Value, first and second derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a.powi(3) - a) * m0 + (b.powi(3) - b) * m1) * h * h / 6.0;
        let d1 = (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2 = a * m0 + b * m1;
        (v, d1, d2)
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }
}

/// Inflection temperature of a sampled decay `F(T)`.
///
/// The spline runs in `y = ln T`, where `∂²F/∂T² = (s'' − s')/T²`; on each
/// segment `s'' − s'` is a quadratic in `y` whose roots are found exactly.
/// Among several inflections the steepest one wins.
pub fn crossover_temperature(ts: &[f64], fs: &[f64]) -> Result<f64> {
    ensure(ts.len() >= MIN_CROSSOVER_SAMPLES, || {
        format!("need at least {MIN_CROSSOVER_SAMPLES} samples, got {}", ts.len())
    })?;
    ensure(ts.iter().all(|&t| t > 0.0), || "temperatures must be positive".into())?;
    let ys: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let spline = NaturalSpline::new(&ys, fs)?;
    let curvature = |y: f64| {
        let (_, d1, d2) = spline.eval(y);
        d2 - d1
    };
    let mut best: Option<(f64, f64)> = None;
    for w in ys.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Sample the quadratic at three points and solve it in local coordinates.
        let mid = 0.5 * (a + b);
        let (ga, gm, gb) = (curvature(a), curvature(mid), curvature(b));
        let u = b - a;
        let c2 = 2.0 * (ga - 2.0 * gm + gb) / (u * u);
        let c1 = (gb - ga) / u - c2 * u;
        let c0 = ga;
        let mut roots = Vec::new();
        if c2.abs() < 1e-14 * (c1.abs() + c0.abs()).max(1e-300) {
            if c1 != 0.0 {
                roots.push(-c0 / c1);
            }
        } else {
            let disc = c1 * c1 - 4.0 * c2 * c0;
            if disc >= 0.0 {
                let s = disc.sqrt();
                roots.push((-c1 - s) / (2.0 * c2));
                roots.push((-c1 + s) / (2.0 * c2));
            }
        }
        for r in roots {
            if !(0.0..u).contains(&r) && !(r == u && b == *ys.last().unwrap_or(&b)) {
                continue;
            }
            let y = a + r;
            // Only genuine sign changes count.
            let eps = 1e-6 * u;
            if curvature(y - eps).signum() == curvature(y + eps).signum() {
                continue;
            }
            let (_, d1, _) = spline.eval(y);
            let slope = (d1 / y.exp()).abs();
            if best.is_none_or(|(_, s)| slope > s) {
                best = Some((y, slope));
            }
        }
    }
    best.map(|(y, _)| y.exp())
        .ok_or_else(|| QcritError::Undefined("no crossover in range: ∂²F/∂T² keeps its sign".into()))
}

/// Ordinary least squares `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_sigma: f64,
    pub intercept_sigma: f64,
    pub r_squared: f64,
    pub rms: f64,
}

pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return Err(QcritError::InsufficientData(format!("linear fit needs ≥ 3 paired samples, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    ensure(sxx > 0.0, || "abscissae are all equal".into())?;
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let s2 = sse / (nf - 2.0);
    Ok(LinearFit {
        slope,
        intercept,
        slope_sigma: (s2 / sxx).sqrt(),
        intercept_sigma: (s2 * (1.0 / nf + mx * mx / sxx)).sqrt(),
        r_squared: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
        rms: (sse / nf).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `y = a x^b + c`, with `c = 0` unless an offset was fitted.
    Power,
    /// `y = a e^{−x/x₀}`.
    Exponential,
}

/// Result of a fit with one-sigma estimates from the linearized problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    /// `a`.
    pub prefactor: f64,
    pub prefactor_sigma: f64,
    /// `b` for power laws, `x₀` for exponentials.
    pub exponent: f64,
    pub exponent_sigma: f64,
    pub offset: f64,
    /// Root-mean-square residual in the data's own units.
    pub rms: f64,
    pub r_squared: f64,
    pub x_range: (f64, f64),
}

impl FitResult {
    /// Evaluates the fit, refusing abscissae beyond twice the sampled range
    /// unless `extrapolate` is set.
    pub fn predict(&self, x: f64, extrapolate: bool) -> Result<f64> {
        let (lo, hi) = self.x_range;
        if !extrapolate && (x > 2.0 * hi || x < 0.5 * lo) {
            return Err(QcritError::OutOfDomain(format!(
                "x = {x} lies beyond twice the fitted range [{lo}, {hi}]"
            )));
        }
        Ok(match self.model {
            FitModel::Power => self.prefactor * x.powf(self.exponent) + self.offset,
            FitModel::Exponential => self.prefactor * (-x / self.exponent).exp(),
        })
    }

    /// Residual RMS relative to the mean absolute data value.
    pub fn relative_rms(&self, ys: &[f64]) -> f64 {
        let scale = ys.iter().map(|y| y.abs()).sum::<f64>() / ys.len().max(1) as f64;
        self.rms / scale
    }
}

fn check_series(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(QcritError::DimensionMismatch { expected: xs.len(), found: ys.len() });
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(QcritError::InsufficientData(format!(
            "fits need at least {MIN_FIT_SAMPLES} samples, got {}",
            xs.len()
        )));
    }
    Ok(())
}

fn range(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// `y = a x^b` by linear regression of `ln y` on `ln x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    check_series(xs, ys)?;
    ensure(xs.iter().chain(ys).all(|&v| v > 0.0), || "power-law fits need positive data".into())?;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let lin = linear_regression(&lx, &ly)?;
    let a = lin.intercept.exp();
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a * x.powf(lin.slope)).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    Ok(FitResult {
        model: FitModel::Power,
        prefactor: a,
        prefactor_sigma: a * lin.intercept_sigma,
        exponent: lin.slope,
        exponent_sigma: lin.slope_sigma,
        offset: 0.0,
        rms,
        r_squared: lin.r_squared,
        x_range: range(xs),
    })
}

/// `y = c + a x^b`; the offset is chosen by golden-section search on the
/// log-log residual within `offset_bounds`.
pub fn fit_power_law_with_offset(xs: &[f64], ys: &[f64], offset_bounds: (f64, f64)) -> Result<FitResult> {
    check_series(xs, ys)?;
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = offset_bounds.1.min(ymin - 1e-12 * ymin.abs().max(1.0));
    let lo = offset_bounds.0;
    ensure(lo < hi, || "offset bracket is empty below the data minimum".into())?;
    let cost = |c: f64| -> f64 {
        let shifted: Vec<f64> = ys.iter().map(|y| y - c).collect();
        fit_power_law(xs, &shifted).map(|f| f.rms).unwrap_or(f64::INFINITY)
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c1 = b - g * (b - a);
    let mut c2 = a + g * (b - a);
    let (mut f1, mut f2) = (cost(c1), cost(c2));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
        if f1 < f2 {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - g * (b - a);
            f1 = cost(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + g * (b - a);
            f2 = cost(c2);
        }
    }
    let c = 0.5 * (a + b);
    let shifted: Vec<f64> = ys.iter().map(|y| y - c).collect();
    let mut fit = fit_power_law(xs, &shifted)?;
    fit.offset = c;
    Ok(fit)
}

/// `y = a e^{−x/x₀}` by regression of `ln y` on `x`.
pub fn fit_exponential(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    check_series(xs, ys)?;
    ensure(ys.iter().all(|&v| v > 0.0), || "exponential fits need positive data".into())?;
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let lin = linear_regression(xs, &ly)?;
    ensure(lin.slope != 0.0, || "data show no exponential trend".into())?;
    let a = lin.intercept.exp();
    let x0 = -1.0 / lin.slope;
    let rms = (xs.iter().zip(ys).map(|(x, y)| (y - a * (-x / x0).exp()).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    Ok(FitResult {
        model: FitModel::Exponential,
        prefactor: a,
        prefactor_sigma: a * lin.intercept_sigma,
        exponent: x0,
        exponent_sigma: lin.slope_sigma / (lin.slope * lin.slope),
        offset: 0.0,
        rms,
        r_squared: lin.r_squared,
        x_range: range(xs),
    })
}

/// Power-law decay `F ≈ A T^p` inside a caller-chosen window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayExponent {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// Difference between the log-log slopes of the two window halves.
    pub curvature: f64,
}

/// Minimum decades the window must span.
pub const MIN_WINDOW_DECADES: f64 = 0.5;
/// Largest slope drift between the two halves of an accepted window.
pub const MAX_SLOPE_DRIFT: f64 = 0.1;

pub fn qc_decay_exponent(ts: &[f64], fs: &[f64], window: (f64, f64)) -> Result<DecayExponent> {
    let (lo, hi) = window;
    ensure(lo > 0.0 && hi > lo, || format!("invalid window [{lo}, {hi}]"))?;
    if (hi / lo).log10() < MIN_WINDOW_DECADES {
        return Err(QcritError::InsufficientData(format!(
            "window [{lo}, {hi}] spans less than half a decade"
        )));
    }
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(fs)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, f)| (t.ln(), f.ln()))
        .collect();
    if pts.len() < 2 * MIN_FIT_SAMPLES.max(3) {
        return Err(QcritError::InsufficientData(format!("only {} samples inside the window", pts.len())));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let all = linear_regression(&xs, &ys)?;
    let h = xs.len() / 2;
    let first = linear_regression(&xs[..h], &ys[..h])?;
    let second = linear_regression(&xs[h..], &ys[h..])?;
    let curvature = second.slope - first.slope;
    if curvature.abs() > MAX_SLOPE_DRIFT {
        return Err(QcritError::IllConditioned(format!(
            "log-log slope drifts from {:.3} to {:.3}; no power law in the window",
            first.slope, second.slope
        )));
    }
    Ok(DecayExponent { exponent: all.slope, prefactor: all.intercept.exp(), r_squared: all.r_squared, curvature })
}

/// One curve `F(T)` of a family at size `size`.
#[derive(Debug, Clone)]
pub struct ScalingCurve {
    pub size: f64,
    pub ts: Vec<f64>,
    pub fs: Vec<f64>,
}

/// Spread of rescaled curves `F N^{−a}` against `T N^{b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseResult {
    pub grid: Vec<f64>,
    /// Rescaled curves interpolated on `grid`, one row per size.
    pub values: Vec<Vec<f64>>,
    /// RMS of the deviation from the pointwise mean, relative to the mean.
    pub spread: f64,
}

impl CollapseResult {
    /// RMS relative deviation of every rescaled curve from `reference`.
    pub fn deviation_from(&self, reference: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for row in &self.values {
            for (x, v) in self.grid.iter().zip(row) {
                let r = reference(*x);
                acc += ((v - r) / r).powi(2);
                count += 1;
            }
        }
        (acc / count as f64).sqrt()
    }
}

fn interp_log(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let p = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[p - 1].ln(), xs[p].ln());
    let w = (x.ln() - x0) / (x1 - x0);
    ys[p - 1] * (1.0 - w) + ys[p] * w
}

pub fn data_collapse(curves: &[ScalingCurve], value_exponent: f64, scale_exponent: f64, grid_points: usize) -> Result<CollapseResult> {
    if curves.len() < 3 {
        return Err(QcritError::InsufficientData(format!("collapse needs ≥ 3 sizes, got {}", curves.len())));
    }
    let rescaled: Vec<(Vec<f64>, Vec<f64>)> = curves
        .iter()
        .map(|c| {
            let sx = c.size.powf(scale_exponent);
            let sy = c.size.powf(-value_exponent);
            (c.ts.iter().map(|t| t * sx).collect(), c.fs.iter().map(|f| f * sy).collect())
        })
        .collect();
    for (xs, _) in &rescaled {
        ensure(xs.len() >= 2 && xs.windows(2).all(|w| w[1] > w[0]), || {
            "each curve needs increasing temperatures".into()
        })?;
    }
    let lo = rescaled.iter().map(|(x, _)| x[0]).fold(f64::NEG_INFINITY, f64::max);
    let hi = rescaled.iter().map(|(x, _)| *x.last().expect("non-empty")).fold(f64::INFINITY, f64::min);
    if !(hi > lo * 1.05) {
        return Err(QcritError::InsufficientData(format!(
            "rescaled abscissae overlap only on [{lo}, {hi}]"
        )));
    }
    let n = grid_points.max(2);
    let grid: Vec<f64> = (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect();
    let values: Vec<Vec<f64>> = rescaled.iter().map(|(xs, ys)| grid.iter().map(|&x| interp_log(xs, ys, x)).collect()).collect();
    let mut acc = 0.0;
    for i in 0..n {
        let mean = values.iter().map(|r| r[i]).sum::<f64>() / values.len() as f64;
        for r in &values {
            acc += ((r[i] - mean) / mean).powi(2);
        }
    }
    let spread = (acc / (n * values.len()) as f64).sqrt();
    Ok(CollapseResult { grid, values, spread })
}
