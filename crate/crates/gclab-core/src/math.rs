//! Float helpers that work with and without `std`.
//!
//! Transcendentals route through `libm` when `std` is off; the two builds
//! may differ in the last ulp, which is far below every tolerance used by
//! the claim suite.

#[cfg(feature = "std")]
#[inline]
pub fn ln(x: f64) -> f64 {
    x.ln()
}

#[cfg(not(feature = "std"))]
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[cfg(feature = "std")]
#[inline]
pub fn exp(x: f64) -> f64 {
    x.exp()
}

#[cfg(not(feature = "std"))]
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[cfg(feature = "std")]
#[inline]
pub fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[cfg(feature = "std")]
#[inline]
pub fn floor(x: f64) -> f64 {
    x.floor()
}

#[cfg(not(feature = "std"))]
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Integer power by binary exponentiation, identical on both builds.
/// `powi(0.0, 0) == 1.0`, matching the `0^0 := 1` convention used by the
/// first-visit payoff `γ^(T-1)` at `γ = 0`, `T = 1`.
pub fn powi(x: f64, mut n: u32) -> f64 {
    let mut base = x;
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}

/// Floor that snaps to the nearest integer when within `1e-9`, so that
/// reciprocals like `1.0 / (1.0 / 7.0)` land on 7 rather than 6.
pub fn floor_snapped(x: f64) -> f64 {
    let nearest = floor(x + 0.5);
    if (x - nearest).abs() < 1e-9 {
        nearest
    } else {
        floor(x)
    }
}

/// `x · ln x` with the `0 · ln 0 := 0` convention.
#[inline]
pub fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * ln(x)
    }
}

/// Sup-norm distance between two equally sized slices.
pub fn sup_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut d = 0.0_f64;
    for (x, y) in a.iter().zip(b.iter()) {
        d = d.max((x - y).abs());
    }
    d
}
