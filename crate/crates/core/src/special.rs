//! Special functions needed by the oracles and the photon statistics.

use crate::scalar::Real;

/// Bessel function of the first kind `J_n(x)` for integer order.
///
/// Evaluates `(1/pi) * int_0^pi cos(n t - x sin t) dt` with the trapezoidal
/// rule. The integrand is smooth and periodic, so the rule converges
/// geometrically once the node count exceeds `|x| + |n|`.
pub fn bessel_j<T: Real>(n: i32, x: T) -> T {
    let nodes = (x.abs().as_f64() + f64::from(n.unsigned_abs())).ceil() as usize + 64;
    let h = T::PI() / T::from_count(nodes);
    let order = T::lit(f64::from(n));
    let integrand = |t: T| (order * t - x * t.sin()).cos();
    let mut acc = T::lit(0.5) * (integrand(T::zero()) + integrand(T::PI()));
    for k in 1..nodes {
        acc = acc + integrand(h * T::from_count(k));
    }
    acc * h / T::PI()
}

/// `ln(n!)` by direct summation.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    (2..=n).map(|k| T::from_count(k).ln()).sum()
}

/// Poisson probability `e^{-mean} mean^n / n!`, evaluated in log space.
pub fn poisson<T: Real>(mean: T, n: usize) -> T {
    if mean == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    (T::from_count(n) * mean.ln() - mean - ln_factorial::<T>(n)).exp()
}
