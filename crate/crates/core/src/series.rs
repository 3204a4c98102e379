//! Power-series kernels shared by the constructors.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coefficients of `exp(g(x))` through `x^K`, where `g` has `K + 1` known coefficients.
///
/// Uses `k a(k) = Σ_{j=1}^{k} j g_j a(k - j)`, which follows from `F' = g' F`.
pub fn exp_series(g: &[f64]) -> Vec<f64> {
    let Some(&g0) = g.first() else {
        return Vec::new();
    };
    let mut a = Vec::with_capacity(g.len());
    a.push(g0.exp());
    for k in 1..g.len() {
        let sum: f64 = (1..=k).map(|j| j as f64 * g[j] * a[k - j]).sum();
        a.push(sum / k as f64);
    }
    a
}

/// Coefficients `(-1)^k C(ν, k)` of `(1 - x)^ν` for `ν ∈ (0, 1]`, `k = 0..=K`.
///
/// For non-integer `ν` the magnitudes come from log-gamma, so large `k`
/// neither overflows nor accumulates ratio error.
pub fn one_minus_x_pow(nu: f64, last: usize) -> Result<Vec<f64>> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Domain(format!("exponent {nu} is not in (0, 1]")));
    }
    let mut c = vec![0.0; last + 1];
    c[0] = 1.0;
    if last == 0 {
        return Ok(c);
    }
    if nu == 1.0 {
        c[1] = -1.0;
        return Ok(c);
    }
    // For k >= 1: (-1)^k C(ν, k) = -ν Γ(k - ν) / (Γ(1 - ν) Γ(k + 1)).
    let base = nu.ln() - ln_gamma(1.0 - nu);
    for (k, ck) in c.iter_mut().enumerate().skip(1) {
        let k = k as f64;
        *ck = -(base + ln_gamma(k - nu) - ln_gamma(k + 1.0)).exp();
    }
    Ok(c)
}

/// Multiplies a truncated series by `1 + q x` in place.
pub fn mul_linear<T: Scalar>(a: &mut [T], q: &T) {
    for k in (1..a.len()).rev() {
        let shifted = q.clone() * a[k - 1].clone();
        a[k] = a[k].clone() + shifted;
    }
}

/// Multiplies a truncated series by `1 / (1 - p x)` in place.
pub fn div_linear<T: Scalar>(a: &mut [T], p: &T) {
    for k in 1..a.len() {
        let carried = p.clone() * a[k - 1].clone();
        a[k] = a[k].clone() + carried;
    }
}

/// `e^c b^k / k!` for `k = 0..=K`.
pub fn poisson_series(b: f64, c: f64, last: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(last + 1);
    a.push(c.exp());
    for k in 1..=last {
        let prev = a[k - 1];
        a.push(prev * b / k as f64);
    }
    a
}

/// `ln C(n, k)` through log-gamma.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_of_linear_is_poisson() {
        let mut g = vec![0.0; 12];
        g[0] = -2.0;
        g[1] = 2.0;
        let a = exp_series(&g);
        let p = poisson_series(2.0, -2.0, 11);
        for k in 0..12 {
            assert_relative_eq!(a[k], p[k], max_relative = 1e-15);
        }
    }

    #[test]
    fn square_root_coefficients() {
        // (1 - x)^{1/2} = 1 - x/2 - x^2/8 - x^3/16 - 5x^4/128 - ...
        let c = one_minus_x_pow(0.5, 4).unwrap();
        let want = [1.0, -0.5, -0.125, -0.0625, -5.0 / 128.0];
        for (got, want) in c.iter().zip(want) {
            assert_relative_eq!(*got, want, max_relative = 1e-13);
        }
        assert!(one_minus_x_pow(1.5, 3).is_err());
        assert_eq!(one_minus_x_pow(1.0, 3).unwrap(), vec![1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn linear_factors_invert_each_other() {
        let mut a = vec![1.0, 0.0, 0.0, 0.0, 0.0];
        div_linear(&mut a, &0.5);
        assert_eq!(a, vec![1.0, 0.5, 0.25, 0.125, 0.0625]);
        mul_linear(&mut a, &-0.5);
        assert_eq!(a, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn log_binomial() {
        assert_relative_eq!(ln_binomial(10.0, 3.0).exp(), 120.0, max_relative = 1e-12);
    }
}
