//! Power-series solution f = sum a_n t^n, t = |x|^2, of the rotationally
//! symmetric surface Green equation 2 eta H / rho + 4 eta^2 / rho^2 = -4 c0,
//! in exact arithmetic over Q(sqrt c0).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{binomial, q, qi, Q};
use crate::report::ResidualReport;

/// p + q sqrt(d) with a fixed radicand d that is not a rational square
/// (d = 1 stands for the rational case and then q is always 0).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd {
    pub p: Q,
    pub q: Q,
    pub d: Q,
}

fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Q::new(rn, rd))
    } else {
        None
    }
}

impl Surd {
    pub fn rational(p: Q, d: &Q) -> Self {
        Surd { p, q: Q::zero(), d: d.clone() }
    }

    pub fn zero(d: &Q) -> Self {
        Self::rational(Q::zero(), d)
    }

    /// sqrt(c) in the field generated by it.
    pub fn sqrt_of(c: &Q) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::Domain(format!("c0 must be positive, got {c}")));
        }
        Ok(match rational_sqrt(c) {
            Some(r) => Surd::rational(r, &qi(1)),
            None => Surd { p: Q::zero(), q: qi(1), d: c.clone() },
        })
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Q> {
        self.q.is_zero().then_some(&self.p)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Surd { p: &self.p * c, q: &self.q * c, d: self.d.clone() }
    }

    pub fn inverse(&self) -> Result<Self> {
        // 1/(p + q r) = (p - q r) / (p^2 - q^2 d), nonzero since d is not a square
        let norm = &self.p * &self.p - &self.q * &self.q * &self.d;
        if norm.is_zero() {
            return Err(Error::Domain("division by zero in Q(sqrt c0)".into()));
        }
        Ok(Surd { p: &self.p / &norm, q: -&self.q / &norm, d: self.d.clone() })
    }

    pub fn to_f64(&self) -> f64 {
        use crate::exact::q_to_f64;
        q_to_f64(&self.p) + q_to_f64(&self.q) * q_to_f64(&self.d).sqrt()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            write!(f, "{}", self.p)
        } else if self.p.is_zero() {
            write!(f, "{}*sqrt({})", self.q, self.d)
        } else {
            write!(f, "{} + {}*sqrt({})", self.p, self.q, self.d)
        }
    }
}

impl<'a> Add<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn add(self, o: &Surd) -> Surd {
        Surd { p: &self.p + &o.p, q: &self.q + &o.q, d: self.d.clone() }
    }
}

impl<'a> Sub<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn sub(self, o: &Surd) -> Surd {
        Surd { p: &self.p - &o.p, q: &self.q - &o.q, d: self.d.clone() }
    }
}

impl<'a> Mul<&'a Surd> for &'a Surd {
    type Output = Surd;
    fn mul(self, o: &Surd) -> Surd {
        Surd {
            p: &self.p * &o.p + &self.q * &o.q * &self.d,
            q: &self.p * &o.q + &self.q * &o.p,
            d: self.d.clone(),
        }
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd { p: -&self.p, q: -&self.q, d: self.d.clone() }
    }
}

/// Truncated power series over Q(sqrt c0).
type Series = Vec<Surd>;

fn mul_series(a: &[Surd], b: &[Surd], len: usize, zero: &Surd) -> Series {
    (0..len)
        .map(|m| {
            let mut acc = zero.clone();
            for i in 0..=m.min(a.len().saturating_sub(1)) {
                if m - i < b.len() {
                    acc = &acc + &(&a[i] * &b[m - i]);
                }
            }
            acc
        })
        .collect()
}

/// The coefficient series A, B, C, D of
/// t + f^2 = t A, f - 2t f' = -t B, f' + t f'' + 2t f'^3 = C, 1 + 4t f'^2 = D,
/// through degree len - 1, from a[k] = a_{k+1}.
fn blocks(a: &[Surd], len: usize, zero: &Surd) -> [Series; 4] {
    let d = &zero.d;
    let coef = |k: usize| -> Surd {
        // a_k, k >= 1
        if k >= 1 && k <= a.len() {
            a[k - 1].clone()
        } else {
            zero.clone()
        }
    };
    let one = Surd::rational(qi(1), d);
    let mut big_a = Vec::with_capacity(len);
    let mut big_b = Vec::with_capacity(len);
    let mut big_c = Vec::with_capacity(len);
    let mut big_d = Vec::with_capacity(len);
    for n in 0..len {
        big_a.push(if n == 0 {
            one.clone()
        } else {
            let mut s = zero.clone();
            for k in 1..=n {
                s = &s + &(&coef(k) * &coef(n + 1 - k));
            }
            s
        });
        big_b.push(coef(n + 1).scale(&qi(2 * n as i64 + 1)));
        let mut c = coef(n + 1).scale(&qi(((n + 1) * (n + 1)) as i64));
        if n >= 1 {
            for k in 0..n {
                for l in 0..n - k {
                    let p = n - 1 - k - l;
                    let w = qi(2 * ((k + 1) * (l + 1) * (p + 1)) as i64);
                    c = &c + &(&(&coef(k + 1) * &coef(l + 1)) * &coef(p + 1)).scale(&w);
                }
            }
        }
        big_c.push(c);
        big_d.push(if n == 0 {
            one.clone()
        } else {
            let mut s = zero.clone();
            for k in 0..n {
                let l = n - 1 - k;
                s = &s + &(&coef(k + 1) * &coef(l + 1)).scale(&qi(4 * ((k + 1) * (l + 1)) as i64));
            }
            s
        });
    }
    [big_a, big_b, big_c, big_d]
}

/// E = -2 A B C + B^2 D + c0 A^2 D^2, through degree len - 1.
fn equation_series(a: &[Surd], c0: &Q, len: usize, zero: &Surd) -> Series {
    let [ba, bb, bc, bd] = blocks(a, len, zero);
    let abc = mul_series(&mul_series(&ba, &bb, len, zero), &bc, len, zero);
    let bbd = mul_series(&mul_series(&bb, &bb, len, zero), &bd, len, zero);
    let ad = mul_series(&ba, &bd, len, zero);
    let aadd = mul_series(&ad, &ad, len, zero);
    (0..len)
        .map(|m| &(&abc[m].scale(&qi(-2)) + &bbd[m]) + &aadd[m].scale(c0))
        .collect()
}

/// a_1 .. a_N with a_1 = +sqrt(c0).
pub fn series_rigidity_solve(c0: &Q, big_n: usize) -> Result<Vec<Surd>> {
    if big_n == 0 {
        return Err(Error::Domain("N must be positive".into()));
    }
    let a1 = Surd::sqrt_of(c0)?;
    let zero = Surd::zero(&a1.d);
    let mut a = vec![a1.clone()];
    for n in 1..big_n {
        // E_n is linear in a_{n+1} with slope -2 (n+1)^2 a_1
        let trial: Vec<Surd> = a.iter().cloned().chain([zero.clone()]).collect();
        let rest = equation_series(&trial, c0, n + 1, &zero).pop().unwrap();
        let slope = a1.scale(&qi(-2 * ((n + 1) * (n + 1)) as i64));
        a.push(&(-&rest) * &slope.inverse()?);
    }
    Ok(a)
}

/// a_1 .. a_N as rationals; fails when sqrt(c0) is irrational.
pub fn series_rigidity_solve_rational(c0: &Q, big_n: usize) -> Result<Vec<Q>> {
    series_rigidity_solve(c0, big_n)?
        .into_iter()
        .map(|s| {
            s.as_rational()
                .cloned()
                .ok_or_else(|| Error::Domain(format!("sqrt({c0}) is irrational; use the surd form")))
        })
        .collect()
}

/// Coefficients t^0 .. t^{N+1} of
/// 2(f' + t f'' + 2t f'^3)(f - 2t f')(t + f^2) + (f - 2t f')^2 (1 + 4t f'^2)
///   + c0 (t + f^2)^2 (1 + 4t f'^2)^2
/// for the truncated f = sum_{k<=N} a_k t^k, computed by direct series
/// arithmetic on f; all of them vanish for a solution.
pub fn back_substitution(c0: &Q, a: &[Surd]) -> Vec<Surd> {
    let big_n = a.len();
    let len = big_n + 2;
    let d = a.first().map(|s| s.d.clone()).unwrap_or_else(|| qi(1));
    let zero = Surd::zero(&d);
    let r = |x: i64| Surd::rational(qi(x), &d);
    let mut f = vec![zero.clone(); len];
    for (k, ak) in a.iter().enumerate() {
        if k + 1 < len {
            f[k + 1] = ak.clone();
        }
    }
    let deriv = |s: &Series| -> Series {
        (0..len)
            .map(|m| if m + 1 < len { s[m + 1].scale(&qi(m as i64 + 1)) } else { zero.clone() })
            .collect()
    };
    let shift = |s: &Series| -> Series {
        (0..len).map(|m| if m == 0 { zero.clone() } else { s[m - 1].clone() }).collect()
    };
    let add = |x: &Series, y: &Series| -> Series { x.iter().zip(y).map(|(u, v)| u + v).collect() };
    let scale = |x: &Series, c: i64| -> Series { x.iter().map(|u| u.scale(&qi(c))).collect() };
    let mul = |x: &Series, y: &Series| mul_series(x, y, len, &zero);

    let f1 = deriv(&f);
    let f2 = deriv(&f1);
    let mut t = vec![zero.clone(); len];
    t[1] = r(1);
    let mut one = vec![zero.clone(); len];
    one[0] = r(1);

    let f1_cubed = mul(&mul(&f1, &f1), &f1);
    let c_part = add(&add(&f1, &shift(&f2)), &shift(&scale(&f1_cubed, 2)));
    let b_part = add(&f, &scale(&shift(&f1), -2));
    let a_part = add(&t, &mul(&f, &f));
    let d_part = add(&one, &shift(&scale(&mul(&f1, &f1), 4)));

    let first = scale(&mul(&mul(&c_part, &b_part), &a_part), 2);
    let second = mul(&mul(&b_part, &b_part), &d_part);
    let ad = mul(&a_part, &d_part);
    let third: Series = mul(&ad, &ad).iter().map(|s| s.scale(c0)).collect();
    add(&add(&first, &second), &third)
}

/// Taylor coefficients of (1 - sqrt(1 - 4 c0 t)) / (2 sqrt c0), the sphere
/// of radius 1/(2 sqrt c0).
pub fn sphere_series(c0: &Q, big_n: usize) -> Result<Vec<Surd>> {
    let root = Surd::sqrt_of(c0)?;
    let inv_root = root.inverse()?;
    // -binom(1/2, m) (-1)^m = |binom(1/2, m)| for m >= 1: C(2m, m) / ((2m - 1) 4^m)
    Ok((1..=big_n)
        .map(|m| {
            let central = Q::from_integer(binomial(2 * m as u64, m as u64));
            let coeff = central / Q::from_integer(BigInt::from(2 * m as i64 - 1) * (BigInt::one() << (2 * m)));
            let four_c0_m = Q::from_integer(BigInt::one() << (2 * m)) * num_traits::pow(c0.clone(), m);
            inv_root.scale(&(coeff * four_c0_m * q(1, 2)))
        })
        .collect())
}

pub fn rigidity_reports(c0: &Q, big_n: usize) -> Result<Vec<ResidualReport>> {
    let a = series_rigidity_solve(c0, big_n)?;
    let oracle = sphere_series(c0, big_n)?;
    let mut out = Vec::new();
    for (i, (x, y)) in a.iter().zip(&oracle).enumerate() {
        let diff = x - y;
        let mut r = match (diff.as_rational(), x.as_rational(), y.as_rational()) {
            (Some(_), Some(xv), Some(yv)) => ResidualReport::exact(format!("a[{}]", i + 1), xv.clone(), yv.clone()),
            _ => {
                let mut r = ResidualReport::exact(format!("a[{}]", i + 1), diff.q.clone(), Q::zero());
                r.pass = diff.is_zero();
                r.with("surd_value", x.to_string()).with("surd_target", y.to_string())
            }
        };
        r = r.with("c0", c0.to_string()).with("N", big_n).with("oracle", "sphere_taylor");
        out.push(r);
    }
    let resid = back_substitution(c0, &a);
    for (deg, e) in resid.iter().enumerate().skip(2).take(big_n) {
        let mut r = ResidualReport::exact(format!("back_substitution[degree={}]", deg - 2), e.p.clone(), Q::zero());
        r.pass = e.is_zero();
        if !e.q.is_zero() {
            r = r.with("surd_value", e.to_string());
        }
        out.push(r.with("c0", c0.to_string()).with("N", big_n));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(v: &[Surd]) -> Vec<Q> {
        v.iter().map(|s| s.as_rational().unwrap().clone()).collect()
    }

    #[test]
    fn unit_sphere_coefficients() {
        let a = series_rigidity_solve(&q(1, 4), 4).unwrap();
        assert_eq!(rat(&a), vec![q(1, 2), q(1, 8), q(1, 16), q(5, 128)]);
        let a = series_rigidity_solve(&qi(1), 2).unwrap();
        assert_eq!(rat(&a), vec![qi(1), qi(1)]);
    }

    #[test]
    fn binomial_oracle_through_twelve() {
        // coefficients of 1 - sqrt(1 - t): (-1)^{m+1} binom(1/2, m)
        let mut want = Vec::new();
        let mut b = qi(1);
        for m in 1..=12i64 {
            b = b * (q(1, 2) - qi(m - 1)) / qi(m);
            want.push(if m % 2 == 1 { b.clone() } else { -b.clone() });
        }
        assert_eq!(series_rigidity_solve_rational(&q(1, 4), 12).unwrap(), want);
    }

    #[test]
    fn oracle_agreement_several_c0() {
        for c0 in [q(1, 4), qi(1), qi(4), q(9, 16), qi(2), q(1, 3), q(5, 7)] {
            let a = series_rigidity_solve(&c0, 8).unwrap();
            assert_eq!(a, sphere_series(&c0, 8).unwrap(), "c0={c0}");
        }
    }

    #[test]
    fn irrational_root_stays_pure() {
        let a = series_rigidity_solve(&qi(2), 6).unwrap();
        assert!(a.iter().all(|s| s.p.is_zero() && !s.q.is_zero()));
        assert!(series_rigidity_solve_rational(&qi(2), 3).is_err());
        assert!((a[0].to_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn back_substitution_vanishes() {
        for c0 in [q(1, 4), qi(3)] {
            let a = series_rigidity_solve(&c0, 12).unwrap();
            let e = back_substitution(&c0, &a);
            assert!(e.iter().take(14).all(Surd::is_zero), "c0={c0}");
        }
        // a perturbed coefficient shows up at the matching degree
        let mut a = series_rigidity_solve(&q(1, 4), 6).unwrap();
        a[3] = &a[3] + &Surd::rational(q(1, 1000), &qi(1));
        let e = back_substitution(&q(1, 4), &a);
        let first_bad = e.iter().position(|s| !s.is_zero()).unwrap();
        assert_eq!(first_bad, 3 + 2);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(series_rigidity_solve(&qi(0), 3).is_err());
        assert!(series_rigidity_solve(&qi(-1), 3).is_err());
        assert!(series_rigidity_solve(&qi(1), 0).is_err());
    }

    #[test]
    fn reports_pass() {
        assert!(rigidity_reports(&q(1, 4), 8).unwrap().iter().all(|r| r.pass));
        assert!(rigidity_reports(&qi(2), 5).unwrap().iter().all(|r| r.pass));
    }
}
