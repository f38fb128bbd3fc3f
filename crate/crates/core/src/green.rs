//! Green functions of the GJMS family on the round sphere: closed forms,
//! truncated spectral series, and the moment identities that tie the two
//! together.
//!
//! Points are parametrized by x = -P.Q, so x = 1 is the antipode of the pole
//! and x = -1 the pole itself; the chord satisfies |P-Q|^2 = 2(1+x).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gegenbauer;
use crate::quadrature::{tanh_sinh, NeumaierSum};
use crate::report::ResidualReport;
use crate::special::{factorial, gamma, gamma_ratio, ln_abs_gamma, pochhammer, sphere_volume};
use crate::spectrum::{
    eigenvalue, funk_hecke_coeff, kernel_status, near_pole, validate_order, KernelStatus,
    OperatorOrder, SIGMA_GUARD,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenSpec {
    pub n: u32,
    pub order: OperatorOrder,
}

impl GreenSpec {
    pub fn new(n: u32, order: OperatorOrder) -> Result<Self> {
        let order = validate_order(n, order)?;
        if kernel_status(n, order)? == KernelStatus::NontrivialKernel {
            return Err(Error::KernelObstruction(format!(
                "P_{} on S^{n} has kernel beyond the constants; no Green function exists",
                match order {
                    OperatorOrder::Integer { k } => (2 * k).to_string(),
                    o => format!("(2*{})", o.sigma(n)),
                }
            )));
        }
        Ok(GreenSpec { n, order })
    }

    pub fn critical(n: u32) -> Result<Self> {
        Self::new(n, OperatorOrder::Critical)
    }

    pub fn power(n: u32, sigma: f64) -> Result<Self> {
        Self::new(n, OperatorOrder::Fractional { sigma })
    }

    pub fn is_critical(&self) -> bool {
        self.order == OperatorOrder::Critical
    }

    pub fn sigma(&self) -> f64 {
        self.order.sigma(self.n)
    }

    pub fn lambda(&self) -> f64 {
        (self.n as f64 - 1.0) / 2.0
    }

    /// First degree in the spectral sum (constants are dropped in the critical case).
    pub fn first_degree(&self) -> u32 {
        if self.is_critical() {
            1
        } else {
            0
        }
    }

    /// Multiplier of the closed form: c_n or c_{n,sigma}.
    pub fn constant(&self) -> Result<f64> {
        if self.is_critical() {
            Ok(const_critical(self.n))
        } else {
            const_power(self.n, self.sigma())
        }
    }

    /// Spectral coefficient c_{k,n} / lambda_k.
    pub fn series_coeff(&self, k: u32) -> Result<f64> {
        Ok(funk_hecke_coeff(self.n, k) / eigenvalue(self.n, self.order, k)?)
    }

    pub fn label(&self) -> String {
        format!("n={},{}", self.n, self.order.label())
    }
}

/// c_n = 1 / (2^(n-1) pi^(n/2) Gamma(n/2)).
pub fn const_critical(n: u32) -> f64 {
    let h = n as f64 / 2.0;
    1.0 / (2f64.powi(n as i32 - 1) * PI.powf(h) * gamma(h).unwrap())
}

/// c_n = 2 / ((n-1)! |S^n|).
pub fn const_critical_alt(n: u32) -> f64 {
    2.0 / (factorial(n - 1) * sphere_volume(n))
}

/// c_{n,sigma} = Gamma(n/2 - sigma) / (2^(2 sigma) pi^(n/2) Gamma(sigma)), sign preserved.
pub fn const_power(n: u32, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    if let Some(m) = near_pole(n, sigma, SIGMA_GUARD) {
        // Gamma(n/2 - sigma) sits at (or next to) its pole -m
        return Err(Error::Pole(0.0 - m as f64));
    }
    let h = n as f64 / 2.0;
    Ok(gamma(h - sigma)? / (4f64.powf(sigma) * PI.powf(h) * gamma(sigma)?))
}

/// c_{n,k} for the integer order 2k, written as in the integer-order statement.
pub fn const_integer(n: u32, k: u32) -> Result<f64> {
    if 2 * k == n {
        return Err(Error::Pole(0.0));
    }
    let h = n as f64 / 2.0;
    let kf = k as f64;
    let num = gamma(h - kf)?;
    Ok(num / (2f64.powi(2 * k as i32) * PI.powf(h) * gamma(kf)?))
}

/// c_{n,sigma} through log-Gamma, as an independent route to const_power.
pub fn const_power_log_route(n: u32, sigma: f64) -> Result<f64> {
    let h = n as f64 / 2.0;
    let (la, sa) = ln_abs_gamma(h - sigma)?;
    let (lb, sb) = ln_abs_gamma(sigma)?;
    Ok(sa * sb * (la - lb - sigma * 4f64.ln() - h * PI.ln()).exp())
}

/// The constant of the closed form with two independent evaluations and
/// their relative disagreement.
pub fn constant_report(spec: &GreenSpec) -> Result<ResidualReport> {
    let (value, alt, routes) = if spec.is_critical() {
        (const_critical(spec.n), const_critical_alt(spec.n), ["gamma", "factorial_volume"])
    } else {
        let s = spec.sigma();
        let alt = match spec.order {
            OperatorOrder::Integer { k } => const_integer(spec.n, k)?,
            _ => const_power_log_route(spec.n, s)?,
        };
        (const_power(spec.n, s)?, alt, ["gamma", "log_gamma"])
    };
    let rel = ((value - alt) / value).abs();
    Ok(ResidualReport::real(format!("constant[{}]", spec.label()), rel, 0.0, 1e-12)
        .with("n", spec.n)
        .with("order", spec.order)
        .with("constant", value)
        .with("alternate", alt)
        .with("routes", routes))
}

pub fn chord_sq_from_inner(x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    Ok(2.0 * (1.0 + x))
}

/// Closed-form Green function at chord distance |P-Q| (critical: additive constant 0).
pub fn green_closed(spec: &GreenSpec, chord: f64) -> Result<f64> {
    if !(chord > 0.0) || chord > 2.0 + 1e-15 {
        return Err(Error::Domain(format!("chord must lie in (0, 2], got {chord}")));
    }
    if spec.is_critical() {
        Ok(-const_critical(spec.n) * chord.ln())
    } else {
        Ok(const_power(spec.n, spec.sigma())? * chord.powf(2.0 * spec.sigma() - spec.n as f64))
    }
}

/// Closed form as a function of x = -P.Q.
pub fn green_closed_x(spec: &GreenSpec, x: f64) -> Result<f64> {
    green_closed(spec, chord_sq_from_inner(x)?.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Acceleration {
    None,
    CesaroAveraging,
    EulerTransform,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub max_terms: usize,
    pub acceleration: Acceleration,
    pub target_tol: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            max_terms: 4000,
            acceleration: Acceleration::CesaroAveraging,
            target_tol: 1e-3,
        }
    }
}

/// Iterated Cesaro means use this many levels.
pub const CESARO_LEVELS: usize = 3;
/// Neighbour-averaging rounds in the Euler transform.
pub const EULER_ROUNDS: usize = 24;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SeriesValue {
    pub value: f64,
    pub error_estimate: f64,
    pub terms: usize,
}

fn check_x(spec: &GreenSpec, x: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    if spec.is_critical() && x <= -1.0 {
        return Err(Error::SingularPoint(
            "the critical series diverges at the coincidence point x = -1".into(),
        ));
    }
    Ok(())
}

/// Terms c_{k,n}/lambda_k (-1)^k P_k(x) for k = first..first+count, in ascending k.
pub fn series_terms(spec: &GreenSpec, x: f64, count: usize) -> Result<Vec<f64>> {
    check_x(spec, x)?;
    let k0 = spec.first_degree() as usize;
    let p = gegenbauer::eval_all(spec.lambda(), k0 + count, x);
    (k0..k0 + count)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            Ok(spec.series_coeff(k as u32)? * sign * p[k])
        })
        .collect()
}

/// Partial sums S_0..S_{K-1} with compensated accumulation in ascending k.
fn partial_sums(terms: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::default();
    terms
        .iter()
        .map(|t| {
            acc.add(*t);
            acc.value()
        })
        .collect()
}

/// Running means: out[m] = mean(v[0..=m]).
fn running_means(v: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::default();
    v.iter()
        .enumerate()
        .map(|(m, x)| {
            acc.add(*x);
            acc.value() / (m + 1) as f64
        })
        .collect()
}

/// Accelerated value after each prefix length: out[K-1] is the estimate
/// using the first K terms.
fn accelerated_prefixes(sums: &[f64], acc: Acceleration) -> Vec<f64> {
    match acc {
        Acceleration::None => sums.to_vec(),
        Acceleration::CesaroAveraging => {
            let mut v = sums.to_vec();
            for _ in 0..CESARO_LEVELS {
                v = running_means(&v);
            }
            v
        }
        Acceleration::EulerTransform => (1..=sums.len()).map(|k| euler_tail(&sums[..k])).collect(),
    }
}

/// Repeated averaging of neighbouring partial sums at the tail, which is the
/// Euler (E,1) transform applied to the last block of the series.
fn euler_tail(sums: &[f64]) -> f64 {
    let r = EULER_ROUNDS.min(sums.len() - 1);
    let mut v: Vec<f64> = sums[sums.len() - 1 - r..].to_vec();
    for _ in 0..r {
        v = v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    }
    v[0]
}

/// Accelerated values at each checkpoint K (number of terms), from one pass.
pub fn series_sweep(spec: &GreenSpec, x: f64, checkpoints: &[usize], acc: Acceleration) -> Result<Vec<f64>> {
    let kmax = checkpoints.iter().copied().max().unwrap_or(0);
    if kmax == 0 {
        return Err(Error::Domain("checkpoints must be positive".into()));
    }
    let sums = partial_sums(&series_terms(spec, x, kmax)?);
    let out = match acc {
        Acceleration::EulerTransform => checkpoints.iter().map(|&k| euler_tail(&sums[..k])).collect(),
        _ => {
            let pre = accelerated_prefixes(&sums, acc);
            checkpoints.iter().map(|&k| pre[k - 1]).collect()
        }
    };
    Ok(out)
}

/// Accelerated partial sum with K = cfg.max_terms terms and the error
/// estimate |M(K) - M(K/2)|. A growing estimate above the tolerance is
/// reported as divergence.
pub fn series_partial(spec: &GreenSpec, x: f64, cfg: &SeriesConfig) -> Result<SeriesValue> {
    let k = cfg.max_terms;
    if k == 0 {
        return Err(Error::Domain("max_terms must be at least 1".into()));
    }
    let sums = partial_sums(&series_terms(spec, x, k)?);
    let at = |m: usize| -> f64 {
        match cfg.acceleration {
            Acceleration::EulerTransform => euler_tail(&sums[..m]),
            _ => accelerated_prefixes(&sums[..m], cfg.acceleration)[m - 1],
        }
    };
    let value = at(k);
    if !value.is_finite() {
        return Err(Error::Divergence(format!("non-finite partial sum at x = {x}")));
    }
    if k < 8 {
        return Ok(SeriesValue {
            value,
            error_estimate: f64::INFINITY,
            terms: k,
        });
    }
    let half = at(k / 2);
    let quarter = at(k / 4);
    let e1 = (value - half).abs();
    let e0 = (half - quarter).abs();
    if e1 > e0 && e1 > cfg.target_tol {
        return Err(Error::Divergence(format!(
            "series at x = {x}: error estimate grew from {e0:.3e} to {e1:.3e} between K = {} and K = {k}",
            k / 2
        )));
    }
    Ok(SeriesValue {
        value,
        error_estimate: e1,
        terms: k,
    })
}

/// Least-squares additive constant c minimizing sum (s_i - g_i - c)^2, and
/// the largest remaining deviation.
pub fn fit_additive_constant(series: &[f64], closed: &[f64]) -> (f64, f64) {
    let n = series.len() as f64;
    let c = series.iter().zip(closed).map(|(s, g)| s - g).sum::<f64>() / n;
    let dev = series
        .iter()
        .zip(closed)
        .map(|(s, g)| (s - g - c).abs())
        .fold(0.0, f64::max);
    (c, dev)
}

/// Term counts at which convergence is recorded by default.
pub const DEFAULT_CHECKPOINTS: [usize; 9] = [100, 200, 500, 1000, 2000, 5000, 10_000, 20_000, 50_000];

/// Accelerated error |series - closed| at each checkpoint for every x. In the
/// critical case one additive constant, fitted at each checkpoint over all x,
/// is removed first.
pub fn series_errors(
    spec: &GreenSpec,
    xs: &[f64],
    checkpoints: &[usize],
    acc: Acceleration,
) -> Result<Vec<Vec<f64>>> {
    if xs.is_empty() || checkpoints.is_empty() {
        return Err(Error::Domain("need at least one x and one checkpoint".into()));
    }
    let sweeps = xs
        .iter()
        .map(|&x| series_sweep(spec, x, checkpoints, acc))
        .collect::<Result<Vec<_>>>()?;
    let closed = xs
        .iter()
        .map(|&x| green_closed_x(spec, x))
        .collect::<Result<Vec<_>>>()?;
    let mut errors = vec![vec![0.0; checkpoints.len()]; xs.len()];
    for j in 0..checkpoints.len() {
        let col: Vec<f64> = sweeps.iter().map(|s| s[j]).collect();
        let shift = if spec.is_critical() {
            fit_additive_constant(&col, &closed).0
        } else {
            0.0
        };
        for i in 0..xs.len() {
            errors[i][j] = (col[i] - closed[i] - shift).abs();
        }
    }
    Ok(errors)
}

/// Convergence reports: final error per x against `tol`, and one monotonicity
/// report per x over the checkpoints with K >= 100.
pub fn series_convergence_reports(
    spec: &GreenSpec,
    xs: &[f64],
    checkpoints: &[usize],
    acc: Acceleration,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    let errors = series_errors(spec, xs, checkpoints, acc)?;
    let kmax = *checkpoints.last().unwrap();
    let mut out = Vec::new();
    for (x, err) in xs.iter().zip(&errors) {
        out.push(
            ResidualReport::real(format!("series_vs_closed[{},x={x}]", spec.label()), *err.last().unwrap(), 0.0, tol)
                .with("n", spec.n)
                .with("order", spec.order)
                .with("x", x)
                .with("K", kmax)
                .with("acceleration", acc)
                .with("additive_constant_removed", spec.is_critical()),
        );
        let tail: Vec<(usize, f64)> = checkpoints
            .iter()
            .copied()
            .zip(err.iter().copied())
            .filter(|(k, _)| *k >= 100)
            .collect();
        // largest increase between consecutive checkpoints, with a roundoff floor
        let rise = tail
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .fold(0.0, f64::max);
        out.push(
            ResidualReport::real(format!("series_monotone[{},x={x}]", spec.label()), rise, 0.0, 1e-12)
                .with("n", spec.n)
                .with("order", spec.order)
                .with("x", x)
                .with("checkpoints", checkpoints)
                .with("errors", err),
        );
    }
    Ok(out)
}

/// (-2)^k/k! Gamma(k+lambda) Gamma(k+2 lambda) / (Gamma(lambda) Gamma(2k+2 lambda))
/// with lambda = (n-1)/2.
pub fn rodrigues_prefactor(n: u32, k: u32) -> f64 {
    let lam = (n as f64 - 1.0) / 2.0;
    let kf = k as f64;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * 2f64.powi(k as i32) / factorial(k) * gamma_ratio(kf + lam, lam).unwrap()
        * gamma_ratio(kf + 2.0 * lam, 2.0 * kf + 2.0 * lam).unwrap()
}

/// Closed form of the integral of log(1+x) P_k(x) (1-x^2)^((n-2)/2), k >= 1.
pub fn moment_closed_log(n: u32, k: u32) -> f64 {
    assert!(k >= 1, "log moment needs k >= 1");
    let kf = k as f64;
    let nf = n as f64;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    -2.0 * PI.sqrt() * gamma_ratio(nf / 2.0, (nf - 1.0) / 2.0).unwrap() * sign / (kf * (kf + nf - 1.0))
}

/// The same log moment assembled from the Rodrigues prefactor and the
/// Beta-integral value of the differentiated weight.
pub fn moment_closed_log_product(n: u32, k: u32) -> f64 {
    let kf = k as f64;
    let h = n as f64 / 2.0;
    let inner = -gamma(kf).unwrap() * 2f64.powf(kf + n as f64 - 1.0) * gamma(h).unwrap()
        * gamma_ratio(kf + h, kf + n as f64).unwrap();
    rodrigues_prefactor(n, k) * inner
}

/// Closed form of the integral of (1+x)^(sigma-n/2) P_k(x) (1-x^2)^((n-2)/2).
pub fn moment_closed_pow(n: u32, sigma: f64, k: u32) -> f64 {
    let kf = k as f64;
    let h = n as f64 / 2.0;
    let poch = pochhammer(h - sigma, k);
    let beta = 2f64.powf(sigma + kf + h - 1.0) * gamma(sigma).unwrap() * gamma_ratio(kf + h, sigma + kf + h).unwrap();
    rodrigues_prefactor(n, k) * poch * beta
}

/// The power moment after the duplication-formula simplification.
pub fn moment_closed_pow_simplified(n: u32, sigma: f64, k: u32) -> Result<f64> {
    let kf = k as f64;
    let nf = n as f64;
    let h = nf / 2.0;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let pre = 2f64.powf(sigma - h + 1.0) * PI.sqrt() * gamma(sigma)?
        / (gamma((nf - 1.0) / 2.0)? * gamma(h - sigma)?);
    let tail = gamma_ratio(kf + nf - 1.0, kf + 1.0)? * gamma_ratio(kf + h - sigma, kf + h + sigma)?;
    Ok(pre * sign * tail)
}

const ORACLE_TOL: f64 = 1e-14;
const ORACLE_LEVELS: u32 = 14;

/// Quadrature value of the log moment (independent of the closed form).
pub fn moment_quad_log(n: u32, k: u32) -> Result<f64> {
    let lam = (n as f64 - 1.0) / 2.0;
    let e = (n as f64 - 2.0) / 2.0;
    tanh_sinh(
        |x, a, b| a.ln() * gegenbauer::eval(lam, k as usize, x) * (a * b).powf(e),
        ORACLE_TOL,
        ORACLE_LEVELS,
    )
}

/// Quadrature value of the power moment; the integrand is written as
/// (1+x)^(sigma-1) (1-x)^((n-2)/2) P_k(x).
pub fn moment_quad_pow(n: u32, sigma: f64, k: u32) -> Result<f64> {
    let lam = (n as f64 - 1.0) / 2.0;
    let e = (n as f64 - 2.0) / 2.0;
    tanh_sinh(
        |x, a, b| a.powf(sigma - 1.0) * b.powf(e) * gegenbauer::eval(lam, k as usize, x),
        ORACLE_TOL,
        ORACLE_LEVELS,
    )
}

/// Both sides of the inner-product identity for degree k:
/// lhs = (c_{k,n}/lambda_k)(-1)^k |P_k|^2 from the series,
/// rhs = the closed form integrated against P_k.
pub fn coefficient_sides(spec: &GreenSpec, k: u32) -> Result<(f64, f64)> {
    if spec.is_critical() && k == 0 {
        return Err(Error::Domain("critical coefficient matching starts at k = 1".into()));
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let lhs = spec.series_coeff(k)? * sign * gegenbauer::norm_sq(spec.lambda(), k as usize);
    let rhs = if spec.is_critical() {
        // -c_n log|P-Q| = -(c_n/2) log(1+x) + const, and constants are orthogonal to P_k
        -0.5 * const_critical(spec.n) * moment_closed_log(spec.n, k)
    } else {
        let s = spec.sigma();
        // c |P-Q|^(2s-n) = c 2^(s-n/2) (1+x)^(s-n/2)
        const_power(spec.n, s)? * 2f64.powf(s - spec.n as f64 / 2.0) * moment_closed_pow(spec.n, s, k)
    };
    Ok((lhs, rhs))
}

pub fn coefficient_match(spec: &GreenSpec, k: u32) -> Result<ResidualReport> {
    let (lhs, rhs) = coefficient_sides(spec, k)?;
    Ok(ResidualReport::real(format!("coefficient_match[{},k={k}]", spec.label()), (lhs - rhs).abs(), 0.0, 1e-9)
        .with("n", spec.n)
        .with("order", spec.order)
        .with("k", k)
        .with("series_side", lhs)
        .with("closed_side", rhs))
}

/// Closed-form moment against its quadrature oracle.
pub fn moment_oracle_check(spec: &GreenSpec, k: u32) -> Result<ResidualReport> {
    let (closed, quad) = if spec.is_critical() {
        (moment_closed_log(spec.n, k), moment_quad_log(spec.n, k)?)
    } else {
        let s = spec.sigma();
        (moment_closed_pow(spec.n, s, k), moment_quad_pow(spec.n, s, k)?)
    };
    Ok(ResidualReport::real(format!("moment_oracle[{},k={k}]", spec.label()), closed - quad, 0.0, 1e-10)
        .with("n", spec.n)
        .with("order", spec.order)
        .with("k", k)
        .with("closed", closed)
        .with("quadrature", quad))
}
