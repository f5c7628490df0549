// Float intrinsics for `no_std`.

pub(crate) use libm::{ceil, copysign, cos, fabs as abs, log as ln, pow, sqrt};

pub(crate) const PI: f64 = core::f64::consts::PI;

#[inline]
pub(crate) fn sq(x: f64) -> f64 {
    x * x
}

/// `x^(1/4)` for non-negative `x`.
#[inline]
pub(crate) fn fourth_root(x: f64) -> f64 {
    sqrt(sqrt(x))
}
