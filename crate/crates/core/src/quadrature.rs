//! Quadrature helpers: rule container, double-exponential integration on
//! [-1, 1] for endpoint-singular integrands, and compensated summation.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut s = NeumaierSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.add(w * f(*x));
        }
        s.value()
    }
}

/// Kahan-Babuska-Neumaier compensated accumulator. Order of `add` calls
/// fully determines the result.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut s = NeumaierSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

/// Tanh-sinh integration of g over [-1, 1].
///
/// The integrand is called as `g(x, 1 + x, 1 - x)` with the last two
/// arguments computed without cancellation, so algebraic or logarithmic
/// endpoint singularities can be evaluated accurately. Levels halve the step
/// until two successive estimates agree to `tol` (relative to the magnitude
/// of the integral, with an absolute floor of `tol`).
pub fn tanh_sinh(g: impl Fn(f64, f64, f64) -> f64, tol: f64, max_level: u32) -> Result<f64> {
    use std::f64::consts::FRAC_PI_2;
    const T_MAX: f64 = 4.5;

    let node = |t: f64| -> Option<(f64, f64, f64, f64)> {
        let u = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * u.abs()).exp();
        // 1 - |x| = 2e/(1+e), with x = tanh(u)
        let small = 2.0 * e / (1.0 + e);
        if small == 0.0 {
            return None;
        }
        let big = 2.0 / (1.0 + e);
        let (opx, omx) = if u >= 0.0 { (big, small) } else { (small, big) };
        let x = if u >= 0.0 { 1.0 - small } else { small - 1.0 };
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu);
        Some((x, opx, omx, w))
    };

    let mut h = 1.0;
    let mut sum = NeumaierSum::default();
    // level 0: integer t
    let n0 = T_MAX as i64;
    for i in -n0..=n0 {
        if let Some((x, a, b, w)) = node(i as f64) {
            sum.add(w * g(x, a, b));
        }
    }
    let mut prev = h * sum.value();
    for level in 1..=max_level {
        h /= 2.0;
        let count = (T_MAX / h) as i64;
        for i in (-count..=count).filter(|i| i % 2 != 0) {
            if let Some((x, a, b, w)) = node(i as f64 * h) {
                sum.add(w * g(x, a, b));
            }
        }
        let cur = h * sum.value();
        if !cur.is_finite() {
            return Err(Error::Convergence(format!(
                "tanh-sinh produced a non-finite value at level {level}"
            )));
        }
        if level >= 3 && (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Convergence(format!(
        "tanh-sinh did not reach tolerance {tol:e} within {max_level} levels"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_cancellation() {
        let v = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(v, 2.0);
    }

    #[test]
    fn tanh_sinh_smooth() {
        let v = tanh_sinh(|x, _, _| x.exp(), 1e-14, 10).unwrap();
        let exact = 1f64.exp() - (-1f64).exp();
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        // integral of (1+x)^{-1/2} is 2 sqrt 2
        let v = tanh_sinh(|_, a, _| a.powf(-0.5), 1e-13, 12).unwrap();
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        // integral of log(1+x) is 2 ln 2 - 2
        let v = tanh_sinh(|_, a, _| a.ln(), 1e-13, 12).unwrap();
        assert!((v - (2.0 * 2f64.ln() - 2.0)).abs() < 1e-12);
        // integral of (1-x^2)^{-1/2} is pi
        let v = tanh_sinh(|_, a, b| (a * b).powf(-0.5), 1e-13, 12).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-12);
    }
}
