//! The critical operator P_n on functions of x = x_{n+1} alone, n even:
//! P_n u = (-1)^(n/2) [(1-x^2)^(n/2) u']^(n-1), in exact arithmetic.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{qi, radial_laplacian, ExactCaps, RationalFn, RationalPoly, Q};
use crate::report::ResidualReport;

fn check_even(n: u32) -> Result<()> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::Domain(format!(
            "the axial identity needs an even dimension n >= 2, got {n}"
        )));
    }
    Ok(())
}

/// Axially symmetric function, a polynomial in x = x_{n+1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxialFunction {
    pub poly: RationalPoly,
}

impl AxialFunction {
    pub fn new(poly: RationalPoly, caps: &ExactCaps) -> Result<Self> {
        poly.check_caps(caps)?;
        Ok(AxialFunction { poly })
    }
}

/// [(1-x^2)^(n/2) u']^(n-1), without the sign.
pub fn axial_q(u: &RationalPoly, n: u32) -> Result<RationalPoly> {
    check_even(n)?;
    let inner = &RationalPoly::one_minus_x2_pow(n / 2) * &u.derivative(1);
    Ok(inner.derivative(n as usize - 1))
}

fn parity_sign(n: u32) -> Q {
    if (n / 2) % 2 == 0 {
        qi(1)
    } else {
        qi(-1)
    }
}

pub fn axial_pn(u: &RationalPoly, n: u32) -> Result<RationalPoly> {
    Ok(axial_q(u, n)?.scale(&parity_sign(n)))
}

/// u_k = (1-x^2)^(-(n-2)/2) d^k/dx^k (1-x^2)^(k+(n-2)/2); the division is
/// checked to be exact.
pub fn u_k_family(n: u32, k: u32) -> Result<RationalPoly> {
    check_even(n)?;
    let m = (n - 2) / 2;
    let d = RationalPoly::one_minus_x2_pow(k + m).derivative(k as usize);
    d.div_exact(&RationalPoly::one_minus_x2_pow(m))
}

/// Exact integral of p against d mu = (1-x^2)^((n-2)/2) dx.
fn integrate_mu(p: &RationalPoly, n: u32) -> Q {
    p.weighted_integral((n - 2) / 2)
}

/// Integral of (Q u_k) u_l d mu; zero for k != l.
pub fn verify_orthogonality(n: u32, k: u32, l: u32) -> Result<Q> {
    let uk = u_k_family(n, k)?;
    let ul = u_k_family(n, l)?;
    Ok(integrate_mu(&(&axial_q(&uk, n)? * &ul), n))
}

/// (-1)^(n/2) (k+n-1)! / (k-1)!
pub fn expected_q_eigenvalue(n: u32, k: u32) -> Q {
    let f: BigInt = (k..=k + n - 1).map(BigInt::from).product();
    Q::from_integer(f) * parity_sign(n)
}

/// Rayleigh quotient of Q on u_k and its predicted value.
pub fn verify_eigenvalue(n: u32, k: u32) -> Result<(Q, Q)> {
    if k == 0 {
        return Err(Error::Domain("eigenvalue check needs k >= 1".into()));
    }
    let uk = u_k_family(n, k)?;
    let num = integrate_mu(&(&axial_q(&uk, n)? * &uk), n);
    let den = integrate_mu(&(&uk * &uk), n);
    if den.is_zero() {
        return Err(Error::Domain(format!("u_{k} has zero norm")));
    }
    Ok((num / den, expected_q_eigenvalue(n, k)))
}

/// P_n u_k - |lambda_k| u_k, which must be the zero polynomial.
pub fn eigen_identity_defect(n: u32, k: u32) -> Result<RationalPoly> {
    let uk = u_k_family(n, k)?;
    let lam = expected_q_eigenvalue(n, k) * parity_sign(n);
    Ok(&axial_pn(&uk, n)? - &uk.scale(&lam))
}

/// (-1)^(n/2) Delta^(n/2) log(1+r^2) + (n-1)! 2^n / (1+r^2)^n as an exact
/// rational function of r; zero when the flat identity holds.
pub fn flat_radial_identity(n: u32) -> Result<RationalFn> {
    check_even(n)?;
    let one_plus_r2 = RationalPoly::from_i64(&[1, 0, 1]);
    // first derivative of log(1+r^2), then Delta = G' + (n-1) G / r
    let g = RationalFn::new(RationalPoly::from_i64(&[0, 2]), one_plus_r2.clone())?;
    let g_over_r = RationalFn::new(RationalPoly::from_i64(&[2]), one_plus_r2.clone())?;
    let mut lap = &g.derivative() + &g_over_r.scale(&qi(n as i64 - 1));
    for _ in 1..n / 2 {
        lap = radial_laplacian(&lap, n)?;
    }
    let fact: BigInt = (1..n).map(BigInt::from).product::<BigInt>() * (BigInt::one() << n as usize);
    let target = RationalFn::new(
        RationalPoly::constant(-Q::from_integer(fact)),
        one_plus_r2.pow(n),
    )?;
    Ok(&lap.scale(&parity_sign(n)) - &target)
}

/// The flat identity as an exact report: the largest numerator coefficient
/// of the residual, which must be zero.
pub fn flat_identity_report(n: u32) -> Result<ResidualReport> {
    use num_traits::Signed;
    let f = flat_radial_identity(n)?;
    let worst = f
        .numer()
        .coeffs()
        .iter()
        .max_by(|a, b| a.abs().cmp(&b.abs()))
        .cloned()
        .unwrap_or_else(Q::zero);
    Ok(ResidualReport::exact(format!("flat_radial_identity[n={n}]"), worst, Q::zero())
        .with("n", n)
        .with("residual", f.to_string()))
}

/// (1/(n+1)) P_n u(x) - (n-1)! (e^(n u(x)) - 1) at each sample.
pub fn meanfield_residual(u: &RationalPoly, n: u32, xs: &[f64]) -> Result<Vec<f64>> {
    let pu = axial_pn(u, n)?;
    let fact: f64 = (1..n).map(|j| j as f64).product();
    xs.iter()
        .map(|&x| {
            if !(-1.0..=1.0).contains(&x) {
                return Err(Error::Domain(format!("sample x = {x} outside [-1, 1]")));
            }
            Ok(pu.eval_f64(x) / (n as f64 + 1.0) - fact * (n as f64 * u.eval_f64(x)).exp_m1())
        })
        .collect()
}

/// Every exact axial check for one even n and degrees up to kmax.
pub fn axial_reports(n: u32, kmax: u32) -> Result<Vec<ResidualReport>> {
    let mut out = Vec::new();
    for k in 0..=kmax {
        for l in 0..=kmax {
            if k != l {
                let v = verify_orthogonality(n, k, l)?;
                out.push(
                    ResidualReport::exact(format!("axial_orthogonality[n={n},k={k},l={l}]"), v, Q::zero())
                        .with("n", n)
                        .with("k", k)
                        .with("l", l),
                );
            }
        }
    }
    for k in 1..=kmax {
        let (c, e) = verify_eigenvalue(n, k)?;
        out.push(
            ResidualReport::exact(format!("axial_eigenvalue[n={n},k={k}]"), c, e)
                .with("n", n)
                .with("k", k),
        );
        let d = eigen_identity_defect(n, k)?;
        let max_coeff = d.coeffs().iter().cloned().max_by(|a, b| {
            use num_traits::Signed;
            a.abs().cmp(&b.abs())
        });
        out.push(
            ResidualReport::exact(
                format!("axial_eigen_polynomial[n={n},k={k}]"),
                max_coeff.unwrap_or_else(Q::zero),
                Q::zero(),
            )
            .with("n", n)
            .with("k", k)
            .with("defect", d.to_string()),
        );
    }
    Ok(out)
}
