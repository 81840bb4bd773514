//! Gauss–Legendre nodes and weights on [-1, 1].

/// 8-point Gauss–Legendre nodes.
pub const GL8_X: [f64; 8] = [
    -0.9602898564975362,
    -0.7966664774136267,
    -0.5255324099163290,
    -0.1834346424956498,
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975362,
];

/// 8-point Gauss–Legendre weights.
pub const GL8_W: [f64; 8] = [
    0.1012285362903763,
    0.2223810344533745,
    0.3137066458778873,
    0.3626837833783620,
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];

/// 4-point Gauss–Legendre nodes.
pub const GL4_X: [f64; 4] = [
    -0.8611363115940526,
    -0.3399810435848563,
    0.3399810435848563,
    0.8611363115940526,
];

/// 4-point Gauss–Legendre weights.
pub const GL4_W: [f64; 4] = [
    0.3478548451374538,
    0.6521451548625461,
    0.6521451548625461,
    0.3478548451374538,
];

/// Integrates `f` over [a, b] with the 8-point rule.
pub fn gauss8(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += GL8_W[i] * f(mid + half * GL8_X[i]);
    }
    half * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        assert!((GL8_W.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!((GL4_W.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_on_polynomials() {
        // GL-8 is exact through degree 15
        let f = |x: f64| x.powi(14) + 3.0 * x.powi(7) + x;
        let got = gauss8(f, 0.0, 1.0);
        let expect = 1.0 / 15.0 + 3.0 / 8.0 + 0.5;
        assert!((got - expect).abs() < 1e-13);
    }

    #[test]
    fn smooth_integrand() {
        let got = gauss8(|x| x.exp(), 0.0, 1.0);
        assert!((got - (std::f64::consts::E - 1.0)).abs() < 1e-10);
    }
}
