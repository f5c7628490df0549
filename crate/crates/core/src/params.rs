//! Model constants, validation and the uniform steady state.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::linalg::Mat2;

/// The seven physical constants of the model plus the domain length.
///
/// Values are nondimensional. Derived thresholds are never cached here;
/// sweep `chi` by building a new value with [`ModelParams::with_chi`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Cell diffusivity.
    pub d1: f64,
    /// Chemical diffusivity.
    pub d2: f64,
    /// Chemotactic sensitivity.
    pub chi: f64,
    /// Logistic growth rate.
    pub mu: f64,
    /// Carrying capacity, strictly inside the crowding capacity 1.
    pub u_c: f64,
    /// Chemical production rate.
    pub alpha: f64,
    /// Chemical degradation rate.
    pub beta: f64,
    /// Length `l` of the interval `[0, l]`.
    pub domain_length: f64,
}

impl ModelParams {
    pub fn with_chi(&self, chi: f64) -> ModelParams {
        ModelParams { chi, ..*self }
    }

    pub fn with_mu(&self, mu: f64) -> ModelParams {
        ModelParams { mu, ..*self }
    }

    /// `u_c (1 - u_c)`, the volume-filling factor at the uniform state.
    #[inline]
    pub fn crowding(&self) -> f64 {
        self.u_c * (1.0 - self.u_c)
    }

    /// Reaction Jacobian `K` at the uniform state.
    pub fn kinetics(&self) -> Mat2 {
        Mat2::new(-self.mu, 0.0, self.alpha, -self.beta)
    }

    /// Diffusion-taxis matrix `D^chi` for the given sensitivity.
    pub fn diffusion(&self, chi: f64) -> Mat2 {
        Mat2::new(self.d1, -chi * self.crowding(), 0.0, self.d2)
    }

    /// `K - k² D^chi`, the linear operator restricted to one cosine mode.
    pub fn mode_operator(&self, k_sq: f64, chi: f64) -> Mat2 {
        self.kinetics().sub(&self.diffusion(chi).scale(k_sq))
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<ValidatedParams, ParamError> {
        let mut violations = Vec::new();
        let mut check = |ok: bool, field: &'static str, message: &'static str| {
            if !ok {
                violations.push(ParamViolation { field, message: String::from(message) });
            }
        };
        check(self.d1 > 0.0 && self.d1.is_finite(), "d1", "d1 must be positive");
        check(self.d2 > 0.0 && self.d2.is_finite(), "d2", "d2 must be positive");
        check(self.chi >= 0.0 && self.chi.is_finite(), "chi", "chi must be non-negative");
        check(self.mu >= 0.0 && self.mu.is_finite(), "mu", "mu must be non-negative");
        check(self.u_c > 0.0 && self.u_c < 1.0, "u_c", "u_c must lie in (0,1)");
        check(self.alpha > 0.0 && self.alpha.is_finite(), "alpha", "alpha must be positive");
        check(self.beta > 0.0 && self.beta.is_finite(), "beta", "beta must be positive");
        check(
            self.domain_length > 0.0 && self.domain_length.is_finite(),
            "domain_length",
            "domain_length must be positive",
        );
        if violations.is_empty() {
            Ok(ValidatedParams { params: *self, no_kc: self.mu == 0.0 })
        } else {
            Err(ParamError { violations })
        }
    }
}

/// Parameters that passed [`ModelParams::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidatedParams {
    params: ModelParams,
    no_kc: bool,
}

impl ValidatedParams {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Set when `mu = 0`: there is no finite critical wavenumber and every
    /// `k_c`-based analysis must start from the discrete minimum instead.
    pub fn no_kc(&self) -> bool {
        self.no_kc
    }
}

impl Deref for ValidatedParams {
    type Target = ModelParams;
    fn deref(&self) -> &ModelParams {
        &self.params
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamViolation {
    pub field: &'static str,
    pub message: String,
}

/// Aggregate of every violated parameter bound.
#[derive(Clone, Debug, PartialEq, Serialize, thiserror::Error)]
pub struct ParamError {
    pub violations: Vec<ParamViolation>,
}

impl ParamError {
    pub fn has_field(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid model parameters: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str(&v.message)?;
        }
        Ok(())
    }
}

/// Spatially constant equilibrium `(u_bar, v_bar)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformSteadyState {
    pub u_bar: f64,
    pub v_bar: f64,
}

/// The extinct state, the only other uniform equilibrium.
pub const TRIVIAL_STATE: UniformSteadyState = UniformSteadyState { u_bar: 0.0, v_bar: 0.0 };

/// The nontrivial uniform state `(u_c, alpha u_c / beta)`.
pub fn uniform_steady_state(p: &ModelParams) -> UniformSteadyState {
    UniformSteadyState { u_bar: p.u_c, v_bar: p.alpha * p.u_c / p.beta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::fig2;

    #[test]
    fn steady_state_values() {
        let s = uniform_steady_state(&fig2());
        assert_eq!(s.u_bar, 0.2);
        assert!((s.v_bar - 36.0 * 0.2 / 34.0).abs() < 1e-15);
        assert!((s.v_bar - 0.211_764_705_882_352_9).abs() < 1e-15);

        let sym = ModelParams { alpha: 10.0, beta: 10.0, u_c: 0.5, ..fig2() };
        let s = uniform_steady_state(&sym);
        assert_eq!((s.u_bar, s.v_bar), (0.5, 0.5));
    }

    #[test]
    fn steady_state_zeroes_kinetics() {
        for p in [fig2(), ModelParams { alpha: 3.3, beta: 0.7, u_c: 0.9, mu: 4.0, ..fig2() }] {
            let s = uniform_steady_state(&p);
            let growth = p.mu * s.u_bar * (1.0 - s.u_bar / p.u_c);
            let chem = p.alpha * s.u_bar - p.beta * s.v_bar;
            assert!(growth.abs() < 1e-15 && chem.abs() < 1e-14);
        }
    }

    #[test]
    fn validation_reports_every_violation() {
        assert!(fig2().validate().is_ok());

        let err = ModelParams { u_c: 1.2, ..fig2() }.validate().unwrap_err();
        assert!(err.has_field("u_c"));
        assert!(err.to_string().contains("u_c must lie in (0,1)"));

        let err = ModelParams { d1: 0.0, ..fig2() }.validate().unwrap_err();
        assert!(err.to_string().contains("d1 must be positive"));

        let err = ModelParams { d1: -1.0, beta: 0.0, chi: -0.1, ..fig2() }.validate().unwrap_err();
        assert_eq!(err.violations.len(), 3);
    }

    #[test]
    fn zero_growth_is_accepted_but_flagged() {
        let v = ModelParams { mu: 0.0, ..fig2() }.validate().unwrap();
        assert!(v.no_kc());
        assert!(!fig2().validate().unwrap().no_kc());
    }
}
