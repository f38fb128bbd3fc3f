//! Gegenbauer polynomials in the normalization P_0 = 1, P_1 = 2 lambda x,
//! orthogonal for the weight (1 - x^2)^(lambda - 1/2) on [-1, 1].

use std::f64::consts::PI;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{q, q_to_f64, qi, RationalPoly, Q};
use crate::quadrature::QuadratureRule;
use crate::special::{gamma, gamma_ratio};

fn check_lambda(lambda: &Q) -> Result<()> {
    if *lambda <= q(-1, 2) {
        return Err(Error::Domain(format!("Gegenbauer parameter must exceed -1/2, got {lambda}")));
    }
    if lambda.is_zero() {
        // P_1 = 2 lambda x vanishes and the recurrence degenerates
        return Err(Error::Domain("Gegenbauer parameter 0 is degenerate in this normalization".into()));
    }
    Ok(())
}

/// Exact P^lambda_k by the three-term recurrence.
pub fn gegenbauer_poly(lambda: &Q, k: usize) -> Result<RationalPoly> {
    Ok(GegenbauerBasis::new(lambda.clone(), k)?.polys.pop().unwrap())
}

#[derive(Clone, Debug)]
pub struct GegenbauerBasis {
    pub lambda: Q,
    pub max_degree: usize,
    pub polys: Vec<RationalPoly>,
}

impl GegenbauerBasis {
    pub fn new(lambda: Q, max_degree: usize) -> Result<Self> {
        check_lambda(&lambda)?;
        let two_x = RationalPoly::monomial(qi(2), 1);
        let mut polys = vec![RationalPoly::one()];
        if max_degree >= 1 {
            polys.push(RationalPoly::monomial(&lambda * qi(2), 1));
        }
        for k in 2..=max_degree {
            let kq = qi(k as i64);
            let a = (&kq + &lambda - qi(1)) / &kq;
            let b = (&kq + &lambda * qi(2) - qi(2)) / &kq;
            let next = &(&two_x * &polys[k - 1]).scale(&a) - &polys[k - 2].scale(&b);
            polys.push(next);
        }
        Ok(GegenbauerBasis {
            lambda,
            max_degree,
            polys,
        })
    }

    /// Basis with lambda = (n-1)/2, the zonal family on S^n.
    pub fn for_sphere(n: u32, max_degree: usize) -> Result<Self> {
        Self::new(q(n as i64 - 1, 2), max_degree)
    }

    pub fn poly(&self, k: usize) -> &RationalPoly {
        &self.polys[k]
    }

    pub fn lambda_f64(&self) -> f64 {
        q_to_f64(&self.lambda)
    }

    pub fn norm_sq(&self, k: usize) -> f64 {
        norm_sq(self.lambda_f64(), k)
    }
}

/// The Rodrigues representation, available exactly when lambda - 1/2 is a
/// nonnegative integer. Agrees with the recurrence normalization.
pub fn rodrigues(lambda: &Q, k: usize) -> Result<RationalPoly> {
    check_lambda(lambda)?;
    let m = lambda - q(1, 2);
    if !m.is_integer() || m.is_negative() {
        return Err(Error::Domain(format!(
            "Rodrigues form is polynomial only for lambda - 1/2 in N, got lambda = {lambda}"
        )));
    }
    let m: u32 = m.to_integer().try_into().unwrap();
    let kq = k as i64;
    // (-2)^k / k! * (lambda)_k / (k + 2 lambda)_k
    let mut pre = Q::one();
    for j in 0..kq {
        pre *= qi(-2) * (lambda + qi(j)) / (qi(j + 1) * (qi(kq + j) + lambda * qi(2)));
    }
    let inner = RationalPoly::one_minus_x2_pow(k as u32 + m).derivative(k);
    let reduced = inner.div_exact(&RationalPoly::one_minus_x2_pow(m))?;
    Ok(reduced.scale(&pre))
}

/// Squared L2 norm under (1-x^2)^(lambda-1/2):
/// 2^(1-2 lambda) pi Gamma(k+2 lambda) / (Gamma(lambda)^2 (k+lambda) k!).
pub fn norm_sq(lambda: f64, k: usize) -> f64 {
    let kf = k as f64;
    let g = gamma(lambda).expect("lambda is not a pole");
    2f64.powf(1.0 - 2.0 * lambda) * PI * gamma_ratio(kf + 2.0 * lambda, kf + 1.0).unwrap()
        / (g * g * (kf + lambda))
}

/// P^lambda_k(1) = (2 lambda)_k / k!.
pub fn value_at_one(lambda: f64, k: usize) -> f64 {
    let kf = k as f64;
    if 2.0 * lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    gamma_ratio(kf + 2.0 * lambda, kf + 1.0).unwrap() / gamma(2.0 * lambda).unwrap()
}

/// Values P^lambda_0(x), ..., P^lambda_kmax(x) by the float recurrence.
pub fn eval_all(lambda: f64, kmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax >= 1 {
        out.push(2.0 * lambda * x);
    }
    for k in 2..=kmax {
        let kf = k as f64;
        let v = (2.0 * (kf + lambda - 1.0) * x * out[k - 1] - (kf + 2.0 * lambda - 2.0) * out[k - 2]) / kf;
        out.push(v);
    }
    out
}

pub fn eval(lambda: f64, k: usize, x: f64) -> f64 {
    // two-term rolling recurrence
    if k == 0 {
        return 1.0;
    }
    let (mut p0, mut p1) = (1.0, 2.0 * lambda * x);
    for j in 2..=k {
        let jf = j as f64;
        let p2 = (2.0 * (jf + lambda - 1.0) * x * p1 - (jf + 2.0 * lambda - 2.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// (P_k(x), P_{k-1}(x), P_k'(x)) for k >= 1 and |x| < 1.
fn eval_with_derivative(lambda: f64, k: usize, x: f64) -> (f64, f64, f64) {
    let pk = eval(lambda, k, x);
    let pkm1 = eval(lambda, k - 1, x);
    // (1-x^2) P_k' = -k x P_k + (k + 2 lambda - 1) P_{k-1}
    let kf = k as f64;
    let d = (-kf * x * pk + (kf + 2.0 * lambda - 1.0) * pkm1) / (1.0 - x * x);
    (pk, pkm1, d)
}

/// Gauss rule for the weight (1-x^2)^(lambda - 1/2), lambda given exactly.
pub fn gauss_jacobi_rule(lambda: &Q, count: usize) -> Result<QuadratureRule> {
    check_lambda(lambda)?;
    gauss_gegenbauer(q_to_f64(lambda), count)
}

/// Gauss rule for the weight (1-x^2)^(lambda - 1/2). Nodes are found by
/// Newton iteration with deflation from Chebyshev starting points.
pub fn gauss_gegenbauer(lambda: f64, count: usize) -> Result<QuadratureRule> {
    const TOL: f64 = 1e-15;
    const MAX_ITER: usize = 100;
    if count == 0 {
        return Err(Error::Domain("quadrature needs at least one node".into()));
    }
    if !(lambda > -0.5) || lambda == 0.0 {
        return Err(Error::Domain(format!("invalid Gegenbauer parameter {lambda}")));
    }
    let n = count;
    let half = n / 2;
    let mut pos: Vec<f64> = Vec::with_capacity(half);
    // roots are symmetric; find the positive ones, largest first
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let (p, _, dp) = eval_with_derivative(lambda, n, x);
            // deflate by the roots already found, including mirrored ones
            let defl: f64 = pos.iter().map(|r| 1.0 / (x - r) + 1.0 / (x + r)).sum();
            let step = p / (dp - p * defl);
            x -= step;
            if step.abs() <= TOL * x.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !(x > 0.0 && x < 1.0) {
            return Err(Error::Convergence(format!(
                "Gauss-Gegenbauer node {i} of {n} (lambda = {lambda}) did not converge"
            )));
        }
        pos.push(x);
    }
    let mut nodes: Vec<f64> = pos.iter().map(|x| -x).collect();
    if n % 2 == 1 {
        nodes.push(0.0);
    }
    nodes.extend(pos.iter().rev());

    let nf = n as f64;
    let ratio = 2.0 * (lambda + nf - 1.0) / nf;
    let h = norm_sq(lambda, n - 1);
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, pm1, dp) = eval_with_derivative(lambda, n, x);
            h * ratio / (pm1 * dp)
        })
        .collect::<Vec<_>>();
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::Convergence(format!(
            "Gauss-Gegenbauer rule with {n} nodes produced a nonpositive weight"
        )));
    }
    Ok(QuadratureRule { nodes, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::weighted_moment_exact;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn poly_examples() {
        assert_eq!(gegenbauer_poly(&q(1, 2), 0).unwrap(), RationalPoly::one());
        for lam in [q(1, 2), q(3, 7), qi(2), q(-1, 4)] {
            assert_eq!(
                gegenbauer_poly(&lam, 1).unwrap(),
                RationalPoly::monomial(&lam * qi(2), 1)
            );
        }
        assert_eq!(
            gegenbauer_poly(&q(1, 2), 2).unwrap(),
            RationalPoly::new(vec![q(-1, 2), qi(0), q(3, 2)])
        );
        assert!(gegenbauer_poly(&q(-1, 2), 2).is_err());
        assert!(gegenbauer_poly(&qi(0), 2).is_err());
    }

    #[test]
    fn exact_degrees() {
        let b = GegenbauerBasis::new(q(3, 2), 15).unwrap();
        for (k, p) in b.polys.iter().enumerate() {
            assert_eq!(p.degree(), Some(k));
        }
    }

    #[test]
    fn recurrence_matches_rodrigues() {
        for m in 0..=3i64 {
            let lam = q(2 * m + 1, 2);
            let b = GegenbauerBasis::new(lam.clone(), 12).unwrap();
            for k in 0..=12 {
                assert_eq!(&rodrigues(&lam, k).unwrap(), b.poly(k), "lambda={lam} k={k}");
            }
        }
        assert!(rodrigues(&qi(1), 3).is_err());
    }

    #[test]
    fn norm_examples() {
        assert!(rel(norm_sq(0.5, 1), 2.0 / 3.0) < 1e-14);
        assert!(rel(norm_sq(0.5, 0), 2.0) < 1e-14);
        assert!(rel(norm_sq(1.0, 1), PI / 2.0) < 1e-14);
    }

    #[test]
    fn norm_matches_exact_integral() {
        // for half-integer lambda the weight is a polynomial and the norm is rational
        for m in 0..=3u32 {
            let lam = q(2 * m as i64 + 1, 2);
            let b = GegenbauerBasis::new(lam.clone(), 10).unwrap();
            for k in 0..=10 {
                let sq = b.poly(k) * b.poly(k);
                let exact = q_to_f64(&sq.weighted_integral(m));
                assert!(rel(b.norm_sq(k), exact) < 1e-13, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn rule_examples() {
        let r = gauss_jacobi_rule(&q(1, 2), 1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-14);
        let r = gauss_jacobi_rule(&q(1, 2), 2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + s).abs() < 1e-15 && (r.nodes[1] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-14 && (r.weights[1] - 1.0).abs() < 1e-14);
    }

    fn beta_moment(lambda: f64, m: u32) -> f64 {
        // integral of x^m (1-x^2)^(lambda-1/2) = B((m+1)/2, lambda+1/2) for even m
        if m % 2 == 1 {
            return 0.0;
        }
        let a = (m as f64 + 1.0) / 2.0;
        let b = lambda + 0.5;
        gamma(a).unwrap() * gamma(b).unwrap() / gamma(a + b).unwrap()
    }

    #[test]
    fn rule_exactness() {
        for lam in [q(1, 2), qi(1), q(3, 2), qi(2), q(-1, 4), q(7, 3)] {
            let lf = q_to_f64(&lam);
            for count in [1usize, 2, 3, 5, 8, 13, 20] {
                let r = gauss_jacobi_rule(&lam, count).unwrap();
                let total: f64 = r.weights.iter().sum();
                assert!(rel(total, beta_moment(lf, 0)) < 1e-12, "lam={lam} count={count}");
                for m in 0..(2 * count as u32) {
                    let v = r.integrate(|x| x.powi(m as i32));
                    let want = beta_moment(lf, m);
                    assert!((v - want).abs() <= 1e-12 * want.abs().max(1e-3), "lam={lam} n={count} m={m}");
                }
            }
        }
    }

    #[test]
    fn rule_count8_quartic() {
        for m in 0..4u32 {
            let lam = q(2 * m as i64 + 1, 2);
            let r = gauss_jacobi_rule(&lam, 8).unwrap();
            let v = r.integrate(|x| x.powi(4));
            let want = q_to_f64(&weighted_moment_exact(4, m));
            assert!(rel(v, want) < 1e-12);
        }
    }

    #[test]
    fn large_rule() {
        let r = gauss_gegenbauer(1.5, 120).unwrap();
        let total: f64 = r.weights.iter().sum();
        assert!(rel(total, beta_moment(1.5, 0)) < 1e-12);
        assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn orthogonality() {
        for lam in [0.5, 1.0, 1.5, 2.0] {
            let r = gauss_gegenbauer(lam, 14).unwrap();
            for k in 0..=12 {
                for l in (k + 1)..=12 {
                    let v = r.integrate(|x| eval(lam, k, x) * eval(lam, l, x));
                    assert!(v.abs() <= 1e-10, "lam={lam} k={k} l={l} v={v}");
                }
            }
        }
    }

    #[test]
    fn generating_function() {
        let (x, t) = (0.3f64, 0.2f64);
        for lam in [0.5, 1.0, 1.5, 2.5, 0.25] {
            let ps = eval_all(lam, 30, x);
            let s: f64 = ps.iter().enumerate().map(|(k, p)| p * t.powi(k as i32)).sum();
            let want = (1.0 - 2.0 * t * x + t * t).powf(-lam);
            assert!((s - want).abs() < 1e-10);
        }
    }

    #[test]
    fn value_at_one_matches() {
        for lam in [0.5, 1.0, 1.5, 2.0, 3.5] {
            for k in 0..25 {
                assert!(rel(eval(lam, k, 1.0), value_at_one(lam, k)) < 1e-12);
            }
        }
    }

    #[test]
    fn float_eval_matches_exact() {
        let b = GegenbauerBasis::new(q(3, 2), 12).unwrap();
        for k in 0..=12 {
            for x in [-0.9, -0.3, 0.0, 0.41, 0.77] {
                let e = b.poly(k).eval_f64(x);
                assert!((eval(1.5, k, x) - e).abs() < 1e-11 * e.abs().max(1.0));
            }
        }
    }
}
