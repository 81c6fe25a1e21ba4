//! Thin wrappers over `libm` so the rest of the crate reads like std float code.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub(crate) fn powi(x: f64, k: i32) -> f64 {
    libm::pow(x, k as f64)
}

#[inline]
pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

/// `|x|^(p-1) x`, the odd power nonlinearity.
#[inline]
pub(crate) fn signed_pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        libm::copysign(libm::pow(x.abs(), p), x)
    }
}

/// Γ(k/2) for a positive integer k, by the half-integer recursion.
pub(crate) fn gamma_half(k: usize) -> f64 {
    debug_assert!(k > 0);
    let (mut g, mut x) = if k % 2 == 0 {
        (1.0, 1.0)
    } else {
        (sqrt(core::f64::consts::PI), 0.5)
    };
    let target = k as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_half_values() {
        let pi = core::f64::consts::PI;
        assert_eq!(gamma_half(2), 1.0);
        assert_eq!(gamma_half(4), 1.0);
        assert_eq!(gamma_half(6), 2.0);
        assert!((gamma_half(1) - sqrt(pi)).abs() < 1e-15);
        assert!((gamma_half(3) - 0.5 * sqrt(pi)).abs() < 1e-15);
        assert!((gamma_half(5) - 0.75 * sqrt(pi)).abs() < 1e-15);
    }

    #[test]
    fn signed_pow_is_odd() {
        assert_eq!(signed_pow(-2.0, 3.0), -8.0);
        assert_eq!(signed_pow(0.0, 5.0), 0.0);
        assert!((signed_pow(2.0, 2.5) - powf(2.0, 2.5)).abs() < 1e-14);
    }
}
