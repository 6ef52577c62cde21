//! Thin `libm` wrappers so the numerics read the same with or without `std`.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}
#[inline]
pub fn hypot3(x: [f64; 3]) -> f64 {
    sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
}

pub const PI: f64 = core::f64::consts::PI;

/// Largest absolute value, ignoring nothing: a NaN propagates.
pub fn sup_abs(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut m = 0.0f64;
    for x in xs {
        let a = abs(x);
        if a.is_nan() {
            return f64::NAN;
        }
        if a > m {
            m = a;
        }
    }
    m
}
