//! Spectra of the GJMS family on the round sphere S^n.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{binomial, q, qi, Q};
use crate::special::{gamma_ratio, sphere_volume};

/// Width of the exclusion zone around sigma = n/2 + m.
pub const SIGMA_GUARD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorOrder {
    /// P_n, order equal to the dimension.
    Critical,
    /// P_{2k}.
    Integer { k: u32 },
    /// P_{2 sigma}.
    Fractional { sigma: f64 },
}

impl OperatorOrder {
    /// Half the order, i.e. sigma with the operator of order 2 sigma.
    pub fn sigma(&self, n: u32) -> f64 {
        match *self {
            OperatorOrder::Critical => n as f64 / 2.0,
            OperatorOrder::Integer { k } => k as f64,
            OperatorOrder::Fractional { sigma } => sigma,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            OperatorOrder::Critical => "critical".into(),
            OperatorOrder::Integer { k } => format!("k={k}"),
            OperatorOrder::Fractional { sigma } => format!("sigma={sigma}"),
        }
    }
}

/// If sigma sits within `guard` of n/2 + m for some m >= 0, returns m.
pub fn near_pole(n: u32, sigma: f64, guard: f64) -> Option<u32> {
    let d = sigma - n as f64 / 2.0;
    if d < -guard {
        return None;
    }
    let m = d.round().max(0.0);
    ((d - m).abs() <= guard).then_some(m as u32)
}

/// Validates an order against n and brings it to canonical form:
/// Integer k with 2k = n becomes Critical.
pub fn validate_order(n: u32, order: OperatorOrder) -> Result<OperatorOrder> {
    if n < 2 {
        return Err(Error::Domain(format!("sphere dimension must be at least 2, got {n}")));
    }
    match order {
        OperatorOrder::Critical => Ok(order),
        OperatorOrder::Integer { k } => {
            if k == 0 {
                return Err(Error::Domain("operator order must be positive".into()));
            }
            if 2 * k == n {
                Ok(OperatorOrder::Critical)
            } else {
                Ok(order)
            }
        }
        OperatorOrder::Fractional { sigma } => {
            if !(sigma > 0.0) || !sigma.is_finite() {
                return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
            }
            if near_pole(n, sigma, SIGMA_GUARD).is_some() {
                return Err(Error::InvalidSigma {
                    n,
                    sigma,
                    guard: SIGMA_GUARD,
                });
            }
            Ok(order)
        }
    }
}

/// Gamma(l+n)/Gamma(l), the eigenvalue of P_n on degree-l harmonics.
pub fn eig_critical(n: u32, l: u32) -> f64 {
    if l == 0 {
        return 0.0;
    }
    gamma_ratio(l as f64 + n as f64, l as f64).unwrap()
}

/// Gamma(k + n/2 + sigma) / Gamma(k + n/2 - sigma).
///
/// sigma exactly equal to n/2 + m is allowed only where the ratio is finite
/// and nonzero (k > m); where it vanishes the operator has kernel in degree
/// k and a `KernelObstruction` is returned. Values merely close to such a
/// point are rejected as ill-conditioned.
pub fn eig_fractional(n: u32, sigma: f64, k: u32) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let h = n as f64 / 2.0;
    if let Some(m) = near_pole(n, sigma, SIGMA_GUARD) {
        let exact = sigma == h + m as f64;
        if !exact {
            return Err(Error::InvalidSigma {
                n,
                sigma,
                guard: SIGMA_GUARD,
            });
        }
        if k <= m {
            return Err(Error::KernelObstruction(format!(
                "P_(2 sigma) with sigma = {sigma} annihilates degree-{k} harmonics on S^{n}"
            )));
        }
    }
    let kf = k as f64;
    gamma_ratio(kf + h + sigma, kf + h - sigma)
}

/// Eigenvalue of P_{2k} from the factorization
/// prod_{i=1}^{k} (mu_j + (n/2+i-1)(n/2-i)), mu_j = j(j+n-1), in exact arithmetic.
pub fn eig_product_exact(n: u32, k: u32, j: u32) -> Q {
    let mu = qi(j as i64 * (j as i64 + n as i64 - 1));
    (1..=k as i64)
        .map(|i| &mu + q((n as i64 + 2 * i - 2) * (n as i64 - 2 * i), 4))
        .fold(Q::one(), |a, b| a * b)
}

pub fn eig_product_form(n: u32, k: u32, j: u32) -> f64 {
    crate::exact::q_to_f64(&eig_product_exact(n, k, j))
}

/// Eigenvalue of the operator on degree-k harmonics.
pub fn eigenvalue(n: u32, order: OperatorOrder, k: u32) -> Result<f64> {
    match validate_order(n, order)? {
        OperatorOrder::Critical => Ok(eig_critical(n, k)),
        OperatorOrder::Integer { k: kk } => {
            let v = eig_product_exact(n, kk, k);
            if num_traits::Zero::is_zero(&v) {
                return Err(Error::KernelObstruction(format!(
                    "P_{} annihilates degree-{k} harmonics on S^{n}",
                    2 * kk
                )));
            }
            Ok(crate::exact::q_to_f64(&v))
        }
        OperatorOrder::Fractional { sigma } => eig_fractional(n, sigma, k),
    }
}

/// N_k = (n+2k-1) Gamma(n+k-1) / (Gamma(n) Gamma(k+1)), exactly.
pub fn harmonic_dim(n: u32, k: u32) -> BigUint {
    assert!(n >= 2, "harmonic_dim needs n >= 2");
    // (n+2k-1)/(n-1) * C(n+k-2, k)
    let c = binomial((n + k - 2) as u64, k as u64);
    let num = c * (n + 2 * k - 1);
    let (quot, rem) = num_integer::Integer::div_rem(&num, &num_bigint::BigInt::from(n - 1));
    debug_assert!(num_traits::Zero::is_zero(&rem));
    quot.to_biguint().unwrap()
}

/// c_{k,n} = (n+2k-1) / ((n-1)|S^n|).
pub fn funk_hecke_coeff(n: u32, k: u32) -> f64 {
    (n + 2 * k - 1) as f64 / ((n - 1) as f64 * sphere_volume(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KernelStatus {
    TrivialKernel,
    ConstantsOnly,
    NontrivialKernel,
}

/// Degrees j at which factor i of the product vanishes:
/// 4 j (j+n-1) = (2i-n)(2i+n-2).
fn vanishing_degree(n: u32, i: u32) -> Option<u32> {
    let rhs = (2 * i as i64 - n as i64) * (2 * i as i64 + n as i64 - 2);
    if rhs < 0 || rhs % 4 != 0 {
        return None;
    }
    let target = rhs / 4;
    // j(j+n-1) is increasing in j
    let mut j: i64 = 0;
    loop {
        let v = j * (j + n as i64 - 1);
        if v == target {
            return Some(j as u32);
        }
        if v > target {
            return None;
        }
        j += 1;
    }
}

pub fn kernel_status(n: u32, order: OperatorOrder) -> Result<KernelStatus> {
    match validate_order(n, order)? {
        OperatorOrder::Critical => Ok(KernelStatus::ConstantsOnly),
        OperatorOrder::Fractional { .. } => Ok(KernelStatus::TrivialKernel),
        OperatorOrder::Integer { k } => {
            let zeros: Vec<u32> = (1..=k).filter_map(|i| vanishing_degree(n, i)).collect();
            if zeros.iter().any(|&j| j >= 1) {
                Ok(KernelStatus::NontrivialKernel)
            } else if zeros.contains(&0) {
                Ok(KernelStatus::ConstantsOnly)
            } else {
                Ok(KernelStatus::TrivialKernel)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumEntry {
    pub degree: u32,
    pub eigenvalue: f64,
    pub multiplicity: BigUint,
}

/// Eigenvalues with multiplicities for degrees 0..=kmax. Degrees in the
/// kernel carry eigenvalue 0.
pub fn spectrum(n: u32, order: OperatorOrder, kmax: u32) -> Result<Vec<SpectrumEntry>> {
    let order = validate_order(n, order)?;
    (0..=kmax)
        .map(|k| {
            let eigenvalue = match eigenvalue(n, order, k) {
                Ok(v) => v,
                Err(Error::KernelObstruction(_)) => 0.0,
                Err(e) => return Err(e),
            };
            Ok(SpectrumEntry {
                degree: k,
                eigenvalue,
                multiplicity: harmonic_dim(n, k),
            })
        })
        .collect()
}
