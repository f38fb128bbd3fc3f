//! Univariate polynomials and rational functions over the rationals.
//!
//! Both types are kept canonical (no trailing zeros, reduced fractions with
//! monic denominators) so that `==` is mathematical equality.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Small-integer rational constructor.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Best-effort conversion; falls back to a ratio of scaled big integers.
pub fn q_to_f64(x: &Q) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = x.numer().bits() as i64;
    let d = x.denom().bits() as i64;
    let shift = (n - d - 60).max(0) as u64;
    let shift_d = (d - n - 60).max(0) as u64;
    let num = (x.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let den = (x.denom() >> shift_d).to_f64().unwrap_or(f64::NAN);
    num / den * 2f64.powi(shift as i32 - shift_d as i32)
}

/// Limits on the size of exact objects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactCaps {
    pub max_degree: usize,
    pub max_bits: u64,
}

impl Default for ExactCaps {
    fn default() -> Self {
        ExactCaps {
            max_degree: 64,
            max_bits: 1 << 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    coeffs: Vec<Q>,
}

impl RationalPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RationalPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| qi(c)).collect())
    }

    pub fn zero() -> Self {
        RationalPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial x.
    pub fn x() -> Self {
        Self::monomial(Q::one(), 1)
    }

    pub fn monomial(c: Q, k: usize) -> Self {
        let mut v = vec![Q::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// (1 - x^2)^p
    pub fn one_minus_x2_pow(p: u32) -> Self {
        Self::from_i64(&[1, 0, -1]).pow(p)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.coeffs.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn derivative(&self, order: usize) -> Self {
        if order == 0 {
            return self.clone();
        }
        if self.coeffs.len() <= order {
            return Self::zero();
        }
        let coeffs = (order..self.coeffs.len())
            .map(|k| {
                // k (k-1) ... (k-order+1)
                let f: BigInt = ((k - order + 1)..=k).map(BigInt::from).product();
                &self.coeffs[k] * Q::from_integer(f)
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs
            .iter()
            .rev()
            .fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + q_to_f64(c))
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(q_to_f64).collect()
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// p(q(x))
    pub fn compose(&self, inner: &Self) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * inner) + &Self::constant(c.clone()))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let l = self.leading().recip();
        self.scale(&l)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.coeffs.len() - 1;
        let lead_inv = d.leading().recip();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![Q::zero(); r.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &r[i + dd] * &lead_inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        r.truncate(dd);
        (Self::new(quot), Self::new(r))
    }

    pub fn div_exact(&self, d: &Self) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::InexactDivision("division by the zero polynomial".into()));
        }
        let (quot, rem) = self.div_rem(d);
        if !rem.is_zero() {
            return Err(Error::InexactDivision(format!(
                "({self}) / ({d}) leaves remainder {rem}"
            )));
        }
        Ok(quot)
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let mut a = a.clone();
        let mut b = b.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    /// Multiplicity of the root x = 0.
    pub fn zero_root_order(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Largest bit length among numerators and denominators.
    pub fn max_bits(&self) -> u64 {
        self.coeffs
            .iter()
            .map(|c| c.numer().bits().max(c.denom().bits()))
            .max()
            .unwrap_or(0)
    }

    pub fn check_caps(&self, caps: &ExactCaps) -> Result<()> {
        if let Some(d) = self.degree() {
            if d > caps.max_degree {
                return Err(Error::DegreeCap {
                    degree: d,
                    cap: caps.max_degree,
                });
            }
        }
        let bits = self.max_bits();
        if bits > caps.max_bits {
            return Err(Error::BitCap {
                bits,
                cap: caps.max_bits,
            });
        }
        Ok(())
    }

    /// Exact integral of this polynomial against (1-x^2)^p on [-1, 1].
    pub fn weighted_integral(&self, p: u32) -> Q {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(m, c)| m % 2 == 0 && !c.is_zero())
            .map(|(m, c)| c * weighted_moment_exact(m as u32, p))
            .fold(Q::zero(), |a, b| a + b)
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = k == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{a}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "{}x", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}x^{k}", if show_coeff { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

impl Add for &RationalPoly {
    type Output = RationalPoly;
    fn add(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &RationalPoly {
    type Output = RationalPoly;
    fn sub(self, rhs: &RationalPoly) -> RationalPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        RationalPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &RationalPoly {
    type Output = RationalPoly;
    fn mul(self, rhs: &RationalPoly) -> RationalPoly {
        if self.is_zero() || rhs.is_zero() {
            return RationalPoly::zero();
        }
        let mut out = vec![Q::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RationalPoly::new(out)
    }
}

impl Neg for &RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        RationalPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($t:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr for $t {
            type Output = $t;
            fn $m(self, rhs: $t) -> $t { (&self).$m(&rhs) }
        }
    )*};
}
forward_owned!(RationalPoly, Add add, Sub sub, Mul mul);

impl Neg for RationalPoly {
    type Output = RationalPoly;
    fn neg(self) -> RationalPoly {
        -&self
    }
}

/// num / den with gcd(num, den) = 1 and den monic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFn {
    num: RationalPoly,
    den: RationalPoly,
}

impl RationalFn {
    pub fn new(num: RationalPoly, den: RationalPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Domain("rational function with zero denominator".into()));
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: RationalPoly, den: RationalPoly) -> Self {
        if num.is_zero() {
            return RationalFn {
                num,
                den: RationalPoly::one(),
            };
        }
        let g = RationalPoly::gcd(&num, &den);
        let (num, den) = if g.degree() == Some(0) {
            (num, den)
        } else {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        let l = den.leading().recip();
        RationalFn {
            num: num.scale(&l),
            den: den.scale(&l),
        }
    }

    pub fn from_poly(p: RationalPoly) -> Self {
        RationalFn {
            num: p,
            den: RationalPoly::one(),
        }
    }

    pub fn zero() -> Self {
        Self::from_poly(RationalPoly::zero())
    }

    pub fn numer(&self) -> &RationalPoly {
        &self.num
    }

    pub fn denom(&self) -> &RationalPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn derivative(&self) -> Self {
        // (n'd - nd') / d^2
        let n = &(&self.num.derivative(1) * &self.den) - &(&self.num * &self.den.derivative(1));
        Self::reduce(n, &self.den * &self.den)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::reduce(self.num.scale(c), self.den.clone())
    }

    pub fn eval(&self, x: &Q) -> Result<Q> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(Error::SingularPoint(format!("pole of rational function at {x}")));
        }
        Ok(self.num.eval(x) / d)
    }

    /// Order of the pole at 0 (0 if regular there).
    pub fn pole_order_at_zero(&self) -> usize {
        self.den.zero_root_order()
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::Domain("division by the zero rational function".into()));
        }
        Ok(Self::reduce(&self.num * &rhs.den, &self.den * &rhs.num))
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl Add for &RationalFn {
    type Output = RationalFn;
    fn add(self, rhs: &RationalFn) -> RationalFn {
        if self.den == rhs.den {
            return RationalFn::reduce(&self.num + &rhs.num, self.den.clone());
        }
        RationalFn::reduce(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RationalFn {
    type Output = RationalFn;
    fn sub(self, rhs: &RationalFn) -> RationalFn {
        self + &(-rhs)
    }
}

impl Mul for &RationalFn {
    type Output = RationalFn;
    fn mul(self, rhs: &RationalFn) -> RationalFn {
        RationalFn::reduce(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Neg for &RationalFn {
    type Output = RationalFn;
    fn neg(self) -> RationalFn {
        RationalFn {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

forward_owned!(RationalFn, Add add, Sub sub, Mul mul);

/// Binomial coefficient as a big integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Exact value of the integral of x^m (1-x^2)^p over [-1, 1].
pub fn weighted_moment_exact(m: u32, p: u32) -> Q {
    if m % 2 == 1 {
        return Q::zero();
    }
    (0..=p)
        .map(|j| {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let c = binomial(p as u64, j as u64) * sign * 2;
            Q::new(c, BigInt::from(m + 2 * j + 1))
        })
        .fold(Q::zero(), |a, b| a + b)
}

/// F'' + (n-1) F'/r for a radial function F(r) in R^n.
///
/// Fails when the input is regular at r = 0 but the result acquires a pole
/// of odd order there, which happens exactly when F is not an even function
/// near the origin (not smooth as a function on R^n).
pub fn radial_laplacian(f: &RationalFn, n: u32) -> Result<RationalFn> {
    if n == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let over_r = RationalFn::reduce(
        d1.num.scale(&qi(n as i64 - 1)),
        &d1.den * &RationalPoly::x(),
    );
    let out = &d2 + &over_r;
    let order = out.pole_order_at_zero();
    if f.pole_order_at_zero() == 0 && order % 2 == 1 {
        return Err(Error::SingularPoint(format!(
            "radial Laplacian of {f} has a pole of order {order} at r = 0"
        )));
    }
    Ok(out)
}
