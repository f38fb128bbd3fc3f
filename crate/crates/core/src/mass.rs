//! The inverted metric rho^{-2} g in the coordinates y = x/|x|^2 and its
//! mass flux through coordinate spheres |y| = r.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gegenbauer::gauss_gegenbauer;
use crate::quadrature::neumaier_sum;
use crate::report::ResidualReport;
use crate::special::sphere_volume;
use crate::surface::GraphSurface;

/// Relative step of the radial difference quotient.
pub const RADIAL_STEP: f64 = 1e-4;
/// Values below this are treated as exactly zero by the decay fit.
pub const ZERO_FLOOR: f64 = 1e-12;

fn inverted_point(s: &GraphSurface, y: &[f64]) -> Result<Vec<f64>> {
    let r2: f64 = y.iter().map(|v| v * v).sum();
    if !(r2 > 0.0) {
        return Err(Error::SingularPoint("y = 0 has no preimage".into()));
    }
    let x: Vec<f64> = y.iter().map(|v| v / r2).collect();
    if !s.contains(&x) {
        return Err(Error::ChartExit(format!("|y| = {} maps outside the chart", r2.sqrt())));
    }
    Ok(x)
}

/// rho(x)^{-2} J^T g(x) J at x = y/|y|^2, J = (I - 2 yhat yhat^T)/|y|^2.
pub fn inverted_metric(s: &GraphSurface, y: &[f64]) -> Result<DMatrix<f64>> {
    let n = s.dim();
    let x = inverted_point(s, y)?;
    let mut p = vec![0.0; n];
    let f = s.value_grad(&x, &mut p)?;
    let r2: f64 = y.iter().map(|v| v * v).sum();
    let rho = 1.0 / r2 + f * f;
    let g = DMatrix::from_fn(n, n, |a, b| if a == b { 1.0 } else { 0.0 } + p[a] * p[b]);
    let j = DMatrix::from_fn(n, n, |a, b| {
        (if a == b { 1.0 } else { 0.0 } - 2.0 * y[a] * y[b] / r2) / r2
    });
    Ok(j.transpose() * g * j / (rho * rho))
}

/// (h_rr - tr h, n h_rr - tr h) for h = g_hat - I at y = r omega, in a form
/// free of the 1 - 1 cancellation.
fn flux_parts(s: &GraphSurface, omega: &[f64], r: f64, buf: &mut [f64], x: &mut [f64]) -> Result<(f64, f64)> {
    let n = omega.len();
    for (xi, w) in x.iter_mut().zip(omega) {
        *xi = w / r;
    }
    let f = s.value_grad(x, buf)?;
    let q = r * r * f * f;
    let radial: f64 = buf.iter().zip(omega).map(|(p, w)| p * w).sum();
    let grad_sq: f64 = buf.iter().map(|p| p * p).sum();
    let den = (1.0 + q) * (1.0 + q);
    let nf = n as f64;
    Ok((
        ((nf - 1.0) * q * (2.0 + q) + radial * radial - grad_sq) / den,
        (nf * radial * radial - grad_sq) / den,
    ))
}

/// Mass integrand at y = r omega, including the r^{n-1} area factor.
pub fn mass_density(s: &GraphSurface, omega: &[f64], r: f64) -> Result<f64> {
    let n = omega.len();
    let mut buf = vec![0.0; n];
    let mut x = vec![0.0; n];
    let h = r * RADIAL_STEP;
    let mut a = |rr: f64| flux_parts(s, omega, rr, &mut buf, &mut x).map(|v| v.0);
    let (p1, m1, p2, m2) = (a(r + h)?, a(r - h)?, a(r + 2.0 * h)?, a(r - 2.0 * h)?);
    let dr = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    let (_, b) = flux_parts(s, omega, r, &mut buf, &mut x)?;
    Ok((dr + b / r) * r.powi(n as i32 - 1))
}

/// Product Gauss rule on the unit sphere S^{n-1} in R^n: Gauss-Gegenbauer in
/// the polar coordinate of each level, trapezoid on the final circle.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(n: usize, order: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("sphere rule needs n >= 2, got {n}")));
        }
        if order == 0 {
            return Err(Error::Domain("quadrature order must be positive".into()));
        }
        if n == 2 {
            let m = 2 * order;
            let step = 2.0 * std::f64::consts::PI / m as f64;
            let points = (0..m).map(|j| {
                let t = (j as f64 + 0.5) * step;
                vec![t.cos(), t.sin()]
            });
            return Ok(SphereRule { points: points.collect(), weights: vec![step; m] });
        }
        // S^{n-1}: omega = (t, sqrt(1-t^2) omega'), dA = (1-t^2)^{(n-3)/2} dt dA'
        let inner = SphereRule::new(n - 1, order)?;
        let rule = gauss_gegenbauer((n as f64 - 2.0) / 2.0, order)?;
        let mut points = Vec::with_capacity(rule.len() * inner.points.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
            let c = (1.0 - t * t).sqrt();
            for (p, wp) in inner.points.iter().zip(&inner.weights) {
                let mut v = Vec::with_capacity(n);
                v.push(*t);
                v.extend(p.iter().map(|u| c * u));
                points.push(v);
                weights.push(wt * wp);
            }
        }
        Ok(SphereRule { points, weights })
    }

    pub fn rotated(&self, q: &DMatrix<f64>) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| (q * nalgebra::DVector::from_column_slice(p)).iter().cloned().collect())
            .collect();
        SphereRule { points, weights: self.weights.clone() }
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> Result<f64> + Sync) -> Result<f64> {
        let vals: Vec<f64> = self
            .points
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(p, w)| f(p).map(|v| v * w))
            .collect::<Result<_>>()?;
        Ok(neumaier_sum(vals))
    }
}

/// Size of the order-doubling change treated as resolved at radius r.
pub fn resolution_tolerance(n: usize, r: f64) -> f64 {
    10.0 * 1e-6 * sphere_volume(n as u32 - 1) * r.powi(n as i32 - 6)
}

#[derive(Clone, Debug)]
pub struct MassEstimate {
    pub r: f64,
    pub order: usize,
    pub value: f64,
    /// Same integral with half the order.
    pub coarse: f64,
    pub under_resolved: bool,
}

fn check_mass_dim(s: &GraphSurface) -> Result<()> {
    if !(3..=5).contains(&s.dim()) {
        return Err(Error::Domain(format!("mass estimates cover n in 3..=5, got {}", s.dim())));
    }
    Ok(())
}

pub fn mass_with_rule(s: &GraphSurface, r: f64, rule: &SphereRule) -> Result<f64> {
    rule.integrate(|w| mass_density(s, w, r))
}

pub fn mass_estimate(s: &GraphSurface, r: f64, order: usize) -> Result<MassEstimate> {
    check_mass_dim(s)?;
    if !(r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    let n = s.dim();
    let value = mass_with_rule(s, r, &SphereRule::new(n, order)?)?;
    let coarse = mass_with_rule(s, r, &SphereRule::new(n, (order / 2).max(1))?)?;
    Ok(MassEstimate {
        r,
        order,
        value,
        coarse,
        under_resolved: (value - coarse).abs() > resolution_tolerance(n, r),
    })
}

#[derive(Clone, Debug)]
pub struct DecayFit {
    pub estimates: Vec<MassEstimate>,
    /// Least-squares slope of log|m| against log r; None when every value is
    /// below the zero floor.
    pub exponent: Option<f64>,
    pub extrapolated_mass: f64,
    pub monotone: bool,
    pub predicted_exponent: Option<f64>,
}

impl DecayFit {
    pub fn exact_zero(&self) -> bool {
        self.exponent.is_none() && self.extrapolated_mass == 0.0
    }
}

/// Whether the chart origin is umbilic, which is when the decay law applies.
pub fn origin_umbilic(s: &GraphSurface) -> Result<bool> {
    let h = s.jet(&vec![0.0; s.dim()])?.hess;
    let n = s.dim();
    let mean = h.trace() / n as f64;
    Ok((h - DMatrix::identity(n, n) * mean).amax() <= 1e-12 * mean.abs().max(1.0))
}

pub fn decay_fit(s: &GraphSurface, radii: &[f64], order: usize) -> Result<DecayFit> {
    if radii.len() < 3 || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("decay fit needs at least three increasing radii".into()));
    }
    let estimates = radii.iter().map(|&r| mass_estimate(s, r, order)).collect::<Result<Vec<_>>>()?;
    let m: Vec<f64> = estimates.iter().map(|e| e.value).collect();
    let predicted = origin_umbilic(s)?.then(|| s.dim() as f64 - 6.0);
    if m.iter().all(|v| v.abs() < ZERO_FLOOR) {
        return Ok(DecayFit { estimates, exponent: None, extrapolated_mass: 0.0, monotone: true, predicted_exponent: predicted });
    }
    let monotone = m.windows(2).all(|w| w[1].abs() <= w[0].abs());
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = m.iter().map(|v| v.abs().ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    // Richardson on the two largest radii, with the known leading order when
    // the decay law applies and the fitted one otherwise
    let rate = predicted.unwrap_or(slope);
    let (r1, r2) = (radii[radii.len() - 2], radii[radii.len() - 1]);
    let (m1, m2) = (m[m.len() - 2], m[m.len() - 1]);
    let (a, b) = (r1.powf(rate), r2.powf(rate));
    let extrapolated = (m2 * a - m1 * b) / (a - b);
    Ok(DecayFit { estimates, exponent: Some(slope), extrapolated_mass: extrapolated, monotone, predicted_exponent: predicted })
}

/// r^2 (g_hat_rr - sum_a g_hat_aa + n - 1) at y = r e_1.
pub fn trace_invariant(s: &GraphSurface, r: f64) -> Result<f64> {
    let n = s.dim();
    let mut y = vec![0.0; n];
    y[0] = r;
    let g = inverted_metric(s, &y)?;
    Ok(r * r * (g[(0, 0)] - g.trace() + (n as f64 - 1.0)))
}

pub fn mass_reports(s: &GraphSurface, radii: &[f64], order: usize) -> Result<Vec<ResidualReport>> {
    Ok(fit_reports(s, &decay_fit(s, radii, order)?))
}

/// Reports for an already computed decay fit.
pub fn fit_reports(s: &GraphSurface, fit: &DecayFit) -> Vec<ResidualReport> {
    let n = s.dim();
    let mut out = Vec::new();
    for e in &fit.estimates {
        let mut r = ResidualReport::real(format!("mass_estimate[r={}]", e.r), e.value, 0.0, f64::INFINITY)
            .with("r", e.r)
            .with("quad_order", e.order)
            .with("coarse", e.coarse)
            .with("under_resolved", e.under_resolved);
        r.pass = !e.under_resolved && e.value.is_finite();
        out.push(r.with("surface", s.label()).with("n", n));
    }
    match (fit.exponent, fit.predicted_exponent) {
        (None, _) => {
            out.push(ResidualReport::real("extrapolated_mass", 0.0, 0.0, 0.0).with("exact_zero", true));
        }
        (Some(p), Some(want)) => {
            out.push(ResidualReport::real("decay_exponent", p, want, 0.3).with("monotone", fit.monotone));
            out.push(ResidualReport::real("extrapolated_mass", fit.extrapolated_mass, 0.0, 1e-4));
        }
        (Some(p), None) => {
            let mut r = ResidualReport::real("decay_exponent", p, f64::NAN, f64::INFINITY).with("prediction", "none");
            r.pass = p.is_finite();
            out.push(r.with("monotone", fit.monotone));
        }
    }
    out.into_iter().map(|r| r.with("surface", s.label()).with("n", n)).collect()
}
