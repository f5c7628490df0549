//! Reference parameter sets shared by unit tests.

use crate::params::ModelParams;

/// Supercritical set on `l = 2 pi`.
pub(crate) fn fig2() -> ModelParams {
    ModelParams {
        d1: 0.2,
        d2: 0.6,
        chi: 0.0,
        mu: 0.5,
        u_c: 0.2,
        alpha: 36.0,
        beta: 34.0,
        domain_length: 2.0 * core::f64::consts::PI,
    }
}

/// Subcritical set on `l = 20`.
pub(crate) fn fig3() -> ModelParams {
    ModelParams {
        d1: 0.3,
        d2: 1.0,
        chi: 0.0,
        mu: 0.5,
        u_c: 0.5,
        alpha: 10.0,
        beta: 10.0,
        domain_length: 20.0,
    }
}
