//! Thin libm wrappers so the crate produces the same bits on every target.
//!
//! Core's intrinsic float methods are not available under `no_std`, and the
//! host libm is allowed to differ between platforms anyway. Routing every
//! transcendental through `libm` keeps seeded experiment output byte-stable.

pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

pub fn powf(x: f64, p: f64) -> f64 {
    libm::pow(x, p)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

pub fn max(a: f64, b: f64) -> f64 {
    if a > b {
        a
    } else {
        b
    }
}

pub fn min(a: f64, b: f64) -> f64 {
    if a < b {
        a
    } else {
        b
    }
}
