//! Ground-state fidelity susceptibility from finite overlaps.

use crate::error::{QcritError, Result};
use crate::qfi::StateVector;

/// Default finite step in the driving parameter.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Allowed relative disagreement between step `h` and `h/2`.
pub const RICHARDSON_TOL: f64 = 1e-2;

/// A family of ground states `|ψ₀(λ)⟩`.
pub trait GroundStateFamily {
    fn ground_state(&self, lambda: f64) -> Result<StateVector>;

    /// `1 − |⟨ψ₀(a)|ψ₀(b)⟩|`.
    fn infidelity(&self, a: f64, b: f64) -> Result<f64> {
        let pa = self.ground_state(a)?;
        let pb = self.ground_state(b)?;
        Ok(pa.infidelity(&pb))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    /// `2 [1 − |⟨ψ₀(λ − h/2)|ψ₀(λ + h/2)⟩|] / h²`.
    pub chi: f64,
    /// Same with step `h/2`.
    pub chi_half: f64,
    /// Richardson combination `(4 χ_{h/2} − χ_h)/3`.
    pub extrapolated: f64,
}

impl FidelityEstimate {
    pub fn relative_disagreement(&self) -> f64 {
        let scale = self.chi.abs().max(self.chi_half.abs());
        if scale < 1e-8 {
            0.0
        } else {
            (self.chi - self.chi_half).abs() / scale
        }
    }
}

fn chi_at<F: GroundStateFamily + ?Sized>(family: &F, lambda: f64, h: f64) -> Result<f64> {
    let d = family.infidelity(lambda - h / 2.0, lambda + h / 2.0)?;
    if d > 0.5 {
        return Err(QcritError::IllConditioned(format!(
            "overlap collapsed across [{}, {}]; a level crossing is likely",
            lambda - h / 2.0,
            lambda + h / 2.0
        )));
    }
    Ok(2.0 * d / (h * h))
}

/// Numerical fidelity susceptibility with a step-halving consistency check.
pub fn fidelity_susceptibility_numeric<F: GroundStateFamily + ?Sized>(
    family: &F,
    lambda: f64,
    step: f64,
) -> Result<FidelityEstimate> {
    if !(step > 0.0) {
        return Err(QcritError::Validation(format!("step must be positive, got {step}")));
    }
    let chi = chi_at(family, lambda, step)?;
    let chi_half = chi_at(family, lambda, step / 2.0)?;
    let est = FidelityEstimate { chi, chi_half, extrapolated: (4.0 * chi_half - chi) / 3.0 };
    if est.relative_disagreement() > RICHARDSON_TOL {
        return Err(QcritError::IllConditioned(format!(
            "step halving changed χ from {chi} to {chi_half} at λ = {lambda}"
        )));
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    struct Spin(f64);

    impl GroundStateFamily for Spin {
        // (cos(cλ/2), sin(cλ/2)) has χ = c²/4.
        fn ground_state(&self, lambda: f64) -> Result<StateVector> {
            let a = self.0 * lambda / 2.0;
            Ok(StateVector::Real(array![a.cos(), a.sin()]))
        }
    }

    struct Constant;

    impl GroundStateFamily for Constant {
        fn ground_state(&self, _lambda: f64) -> Result<StateVector> {
            Ok(StateVector::Real(array![0.6, 0.8]))
        }
    }

    #[test]
    fn rotating_spinor_has_quarter_rate_squared() {
        let est = fidelity_susceptibility_numeric(&Spin(3.0), 0.2, DEFAULT_STEP).unwrap();
        assert_abs_diff_eq!(est.chi, 9.0 / 4.0, epsilon = 1e-6);
    }

    #[test]
    fn constant_family_has_zero_susceptibility() {
        let est = fidelity_susceptibility_numeric(&Constant, 0.0, DEFAULT_STEP).unwrap();
        assert!(est.chi.abs() < 1e-8);
    }

    #[test]
    fn orthogonal_jump_is_flagged() {
        struct Jump;
        impl GroundStateFamily for Jump {
            fn ground_state(&self, lambda: f64) -> Result<StateVector> {
                Ok(StateVector::Real(if lambda < 0.0 { array![1.0, 0.0] } else { array![0.0, 1.0] }))
            }
        }
        assert!(matches!(
            fidelity_susceptibility_numeric(&Jump, 0.0, 1e-3),
            Err(QcritError::IllConditioned(_))
        ));
    }
}
