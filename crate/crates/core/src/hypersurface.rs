//! Extrinsic geometry of graph hypersurfaces at a point: fundamental forms,
//! support function, chord square, and the residuals of the identities a
//! round sphere satisfies.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::report::ResidualReport;
use crate::surface::{GraphSurface, Jet};

#[derive(Clone, Debug)]
pub struct CurvatureData {
    pub metric: DMatrix<f64>,
    pub inverse_metric: DMatrix<f64>,
    pub second_form: DMatrix<f64>,
    pub mean_curvature: f64,
    pub second_form_norm_sq: f64,
    /// Scalar curvature from the graph formula in f's derivatives.
    pub scalar: f64,
    pub eta: f64,
    pub rho: f64,
}

impl CurvatureData {
    /// R - (H^2 - |II|^2)
    pub fn gauss_defect(&self) -> f64 {
        self.scalar - (self.mean_curvature.powi(2) - self.second_form_norm_sq)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalData {
    pub kappas: Vec<f64>,
}

impl PrincipalData {
    pub fn new(kappas: Vec<f64>) -> Self {
        PrincipalData { kappas }
    }

    pub fn umbilic(n: usize, c: f64) -> Self {
        PrincipalData { kappas: vec![c; n] }
    }

    pub fn n(&self) -> usize {
        self.kappas.len()
    }

    pub fn mean(&self) -> f64 {
        self.kappas.iter().sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.kappas.iter().map(|k| k * k).sum()
    }

    pub fn scalar(&self) -> f64 {
        self.mean().powi(2) - self.norm_sq()
    }

    /// Ric(e_d, e_d) = H kappa_d - kappa_d^2
    pub fn ricci(&self, d: usize) -> f64 {
        self.mean() * self.kappas[d] - self.kappas[d] * self.kappas[d]
    }
}

fn weight(p: &DVector<f64>) -> f64 {
    (1.0 + p.norm_squared()).sqrt()
}

fn inverse_metric(p: &DVector<f64>) -> DMatrix<f64> {
    let w2 = 1.0 + p.norm_squared();
    DMatrix::identity(p.len(), p.len()) - p * p.transpose() / w2
}

fn curvature_from_jet(x: &[f64], j: &Jet) -> CurvatureData {
    let n = x.len();
    let p = &j.grad;
    let d = &j.hess;
    let w = weight(p);
    let w2 = w * w;
    let metric = DMatrix::identity(n, n) + p * p.transpose();
    let g_inv = inverse_metric(p);
    let h = d / w;
    let gh = &g_inv * &h;
    let mean = gh.trace();
    let norm_sq = (&gh * &gh).trace();

    let lap = d.trace();
    let dp = d * p;
    let pdp = p.dot(&dp);
    let scalar = (lap * lap - d.norm_squared()) / w2 - 2.0 * (lap * pdp - dp.norm_squared()) / (w2 * w2);

    let xv = DVector::from_column_slice(x);
    CurvatureData {
        metric,
        inverse_metric: g_inv,
        second_form: h,
        mean_curvature: mean,
        second_form_norm_sq: norm_sq,
        scalar,
        eta: (j.f - xv.dot(p)) / w,
        rho: xv.norm_squared() + j.f * j.f,
    }
}

pub fn curvature_at(s: &GraphSurface, x: &[f64]) -> Result<CurvatureData> {
    Ok(curvature_from_jet(x, &s.jet(x)?))
}

/// Principal curvatures, the eigenvalues of g^{-1/2} h g^{-1/2}, ascending.
pub fn principal_curvatures(s: &GraphSurface, x: &[f64]) -> Result<PrincipalData> {
    let j = s.jet(x)?;
    let n = x.len();
    let p = &j.grad;
    let p2 = p.norm_squared();
    let mut root = DMatrix::identity(n, n);
    if p2 > 0.0 {
        let w = (1.0 + p2).sqrt();
        root += p * p.transpose() * ((1.0 / w - 1.0) / p2);
    }
    let shape = &root * (&j.hess / (1.0 + p2).sqrt()) * &root;
    let shape = (&shape + shape.transpose()) * 0.5;
    let mut k: Vec<f64> = SymmetricEigen::new(shape).eigenvalues.iter().cloned().collect();
    k.sort_by(|a, b| a.total_cmp(b));
    Ok(PrincipalData { kappas: k })
}

fn rho_gradient(x: &[f64], j: &Jet) -> DVector<f64> {
    DVector::from_iterator(x.len(), x.iter().zip(j.grad.iter()).map(|(xa, pa)| 2.0 * xa + 2.0 * j.f * pa))
}

/// Laplace-Beltrami of rho from f's derivatives via the graph Christoffel
/// symbols f_ab f_c / W^2.
pub fn laplacian_rho_assembled(s: &GraphSurface, x: &[f64]) -> Result<f64> {
    let j = s.jet(x)?;
    let n = x.len();
    let p = &j.grad;
    let w2 = 1.0 + p.norm_squared();
    let drho = rho_gradient(x, &j);
    let pd = p.dot(&drho);
    let hess_rho = DMatrix::from_fn(n, n, |a, b| {
        let delta = if a == b { 2.0 } else { 0.0 };
        delta + 2.0 * p[a] * p[b] + 2.0 * j.f * j.hess[(a, b)] - j.hess[(a, b)] * pd / w2
    });
    Ok((inverse_metric(p).component_mul(&hess_rho)).sum())
}

/// Laplace-Beltrami of rho in divergence form, the divergence taken by a
/// fourth-order central difference of step h.
pub fn laplacian_rho_fd(s: &GraphSurface, x: &[f64], h: f64) -> Result<f64> {
    let n = x.len();
    let flux = |y: &[f64], a: usize| -> Result<f64> {
        let j = s.jet(y)?;
        let w = weight(&j.grad);
        Ok(w * (inverse_metric(&j.grad) * rho_gradient(y, &j))[a])
    };
    let mut div = 0.0;
    for a in 0..n {
        let mut y = x.to_vec();
        let mut at = |off: f64| -> Result<f64> {
            y[a] = x[a] + off;
            flux(&y, a)
        };
        let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
        div += (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    }
    Ok(div / weight(&s.jet(x)?.grad))
}

pub const FD_STEP: f64 = 1e-3;

/// The gradient identity and both evaluations of the Laplacian identity.
pub fn identity_residuals(s: &GraphSurface, x: &[f64]) -> Result<[ResidualReport; 3]> {
    let j = s.jet(x)?;
    let c = curvature_from_jet(x, &j);
    let drho = rho_gradient(x, &j);
    let grad_sq = (drho.transpose() * &c.inverse_metric * &drho)[(0, 0)];
    let n = x.len() as f64;
    let target = 2.0 * n + 2.0 * c.eta * c.mean_curvature;
    let meta = |r: ResidualReport| r.with("surface", s.label()).with("x", x);
    Ok([
        meta(ResidualReport::real(
            "grad_rho_identity",
            grad_sq - (4.0 * c.rho - 4.0 * c.eta * c.eta),
            0.0,
            1e-10,
        )),
        meta(ResidualReport::real(
            "laplacian_rho_identity[assembled]",
            laplacian_rho_assembled(s, x)? - target,
            0.0,
            1e-10,
        )),
        meta(
            ResidualReport::real(
                "laplacian_rho_identity[finite_difference]",
                laplacian_rho_fd(s, x, FD_STEP)? - target,
                0.0,
                1e-8,
            )
            .with("h", FD_STEP),
        ),
    ])
}

fn nonzero_point(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::SingularPoint("the base point x = 0".into()));
    }
    Ok(())
}

/// 2 eta H / rho + 4 eta^2 / rho^2 + c on a surface in R^3.
pub fn green_residual_surface(s: &GraphSurface, x: &[f64], c: f64) -> Result<f64> {
    if s.dim() != 2 {
        return Err(Error::Domain(format!("surface residual needs n = 2, got {}", s.dim())));
    }
    Ok(surface_green_part(s, x)? + c)
}

fn surface_green_part(s: &GraphSurface, x: &[f64]) -> Result<f64> {
    nonzero_point(x)?;
    let d = curvature_at(s, x)?;
    let q = d.eta / d.rho;
    Ok(2.0 * q * d.mean_curvature + 4.0 * q * q)
}

/// n eta^2/rho^2 + eta H / rho + R / (4(n-1)) for n >= 3.
pub fn green_residual_conformal(s: &GraphSurface, x: &[f64]) -> Result<f64> {
    let n = s.dim();
    if n < 3 {
        return Err(Error::Domain(format!("conformal residual needs n >= 3, got {n}")));
    }
    nonzero_point(x)?;
    let d = curvature_at(s, x)?;
    let q = d.eta / d.rho;
    Ok(n as f64 * q * q + q * d.mean_curvature + d.scalar / (4.0 * (n as f64 - 1.0)))
}

/// The constant c minimizing max |2 eta H/rho + 4 eta^2/rho^2 + c| over the
/// points, and that minimal value.
pub fn best_surface_constant(s: &GraphSurface, points: &[Vec<f64>]) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in points {
        let v = surface_green_part(s, x)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((-(lo + hi) / 2.0, (hi - lo) / 2.0))
}

/// `count` seeded points uniformly distributed in the ball of radius `r`,
/// restricted to the chart.
pub fn sample_points(s: &GraphSurface, r: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = s.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-r..r)).collect();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 < r * r && r2 > 1e-6 * r * r && s.contains(&x) {
            out.push(x);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct RayLimits {
    pub values: [f64; 3],
    pub targets: [f64; 3],
    pub error_estimates: [f64; 3],
}

pub const RAY_T0: f64 = 1e-2;
pub const RAY_LEVELS: usize = 6;

/// Neville extrapolation to t = 0; returns the value and the change from the
/// previous tableau diagonal.
pub fn extrapolate_to_zero(ts: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = ts.len();
    let mut p = ys.to_vec();
    let mut prev_diag = p[0];
    let mut est = f64::INFINITY;
    for level in 1..m {
        for i in (level..m).rev() {
            let (ti, tj) = (ts[i], ts[i - level]);
            p[i] = (ti * p[i - 1] - tj * p[i]) / (ti - tj);
        }
        est = (p[level] - prev_diag).abs();
        prev_diag = p[level];
    }
    (prev_diag, est)
}

/// Limits of eta/rho, g(grad rho, grad phi)/rho and |grad phi|^2/rho along
/// t -> (tv, f(tv)), phi = f - x.grad f, with their closed forms.
pub fn ray_limits(s: &GraphSurface, v: &[f64]) -> Result<RayLimits> {
    let n = s.dim();
    if v.len() != n {
        return Err(Error::Domain(format!("direction has {} entries, expected {n}", v.len())));
    }
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("direction must be a unit vector, |v| = {norm}")));
    }
    let ts: Vec<f64> = (0..RAY_LEVELS).map(|i| RAY_T0 / 2f64.powi(i as i32)).collect();
    let mut series = [Vec::new(), Vec::new(), Vec::new()];
    for &t in &ts {
        let x: Vec<f64> = v.iter().map(|a| a * t).collect();
        let j = s.jet(&x)?;
        let c = curvature_from_jet(&x, &j);
        let drho = rho_gradient(&x, &j);
        let dphi = -(&j.hess * DVector::from_column_slice(&x));
        let gi = &c.inverse_metric;
        series[0].push(c.eta / c.rho);
        series[1].push((drho.transpose() * gi * &dphi)[(0, 0)] / c.rho);
        series[2].push((dphi.transpose() * gi * &dphi)[(0, 0)] / c.rho);
    }
    let mut values = [0.0; 3];
    let mut errs = [0.0; 3];
    for i in 0..3 {
        let (val, e) = extrapolate_to_zero(&ts, &series[i]);
        if !val.is_finite() {
            return Err(Error::Convergence(format!("ray extrapolation produced {val}")));
        }
        values[i] = val;
        errs[i] = e;
    }
    let h0 = s.jet(&vec![0.0; n])?.hess;
    let vv = DVector::from_column_slice(v);
    let hv = &h0 * &vv;
    let iivv = vv.dot(&hv);
    Ok(RayLimits {
        values,
        targets: [-iivv / 2.0, -2.0 * iivv, hv.norm_squared()],
        error_estimates: errs,
    })
}

/// H^2 - n |II|^2
pub fn umbilic_defect(k: &PrincipalData) -> f64 {
    k.mean().powi(2) - k.n() as f64 * k.norm_sq()
}

pub fn paneitz_trace_residual(k: &PrincipalData) -> Result<f64> {
    let n = k.n();
    if n < 3 || n == 4 {
        return Err(Error::Domain(format!(
            "traced identity is defined for n >= 3, n != 4 (got {n}); use the 4d variant for n = 4"
        )));
    }
    let nf = n as f64;
    let (h, ii) = (k.mean(), k.norm_sq());
    Ok(2.0 * (nf - 1.0) * ii - (3.0 * nf - 8.0) / (nf - 2.0) * h * h
        + (nf * nf - 2.0 * nf - 4.0) / ((nf - 1.0) * (nf - 2.0)) * k.scalar())
}

pub fn paneitz_trace_residual_4d(k: &PrincipalData) -> Result<f64> {
    if k.n() != 4 {
        return Err(Error::Domain(format!("4d identity needs four curvatures, got {}", k.n())));
    }
    let (h, ii) = (k.mean(), k.norm_sq());
    Ok(-24.0 * ii + 8.0 * h * h - 8.0 * k.scalar() / 3.0)
}

fn check_direction(k: &PrincipalData, d: usize) -> Result<()> {
    if d >= k.n() {
        return Err(Error::Domain(format!("direction index {d} out of range for n = {}", k.n())));
    }
    Ok(())
}

/// The untraced identity along the principal direction e_d (0-based).
pub fn paneitz_direction_residual(k: &PrincipalData, d: usize) -> Result<f64> {
    let n = k.n();
    if n < 3 {
        return Err(Error::Domain(format!("directional identity needs n >= 3, got {n}")));
    }
    check_direction(k, d)?;
    let nf = n as f64;
    let (h, kd) = (k.mean(), k.kappas[d]);
    Ok(2.0 * nf * kd * kd - 2.0 * kd * kd - 4.0 * h * kd
        + h * h / (nf - 2.0)
        + (nf - 6.0) / ((nf - 1.0) * (nf - 2.0)) * k.scalar()
        + 4.0 / (nf - 2.0) * k.ricci(d))
}

/// (n-2) II(v,v)^2 - (2 Ric(v,v) - R/(n-1)) along e_d (0-based).
pub fn chord_coefficient_identity(k: &PrincipalData, d: usize) -> Result<f64> {
    let n = k.n();
    if n < 3 {
        return Err(Error::Domain(format!("chord identity needs n >= 3, got {n}")));
    }
    check_direction(k, d)?;
    let nf = n as f64;
    let kd = k.kappas[d];
    Ok((nf - 2.0) * kd * kd - (2.0 * k.ricci(d) - k.scalar() / (nf - 1.0)))
}

/// Identity and Green residuals on a point grid, plus ray limits along the
/// coordinate axes.
pub fn surface_suite(s: &GraphSurface, points: &[Vec<f64>], c: Option<f64>) -> Result<Vec<ResidualReport>> {
    let n = s.dim();
    let mut out = Vec::new();
    let mut worst = [0.0f64; 3];
    let mut worst_green = 0.0f64;
    let mut worst_gauss = 0.0f64;
    for x in points {
        for (w, r) in worst.iter_mut().zip(identity_residuals(s, x)?) {
            *w = w.max(r.value.as_f64().abs());
        }
        worst_gauss = worst_gauss.max(curvature_at(s, x)?.gauss_defect().abs());
        if n == 2 {
            if let Some(c) = c {
                worst_green = worst_green.max(green_residual_surface(s, x, c)?.abs());
            }
        } else {
            worst_green = worst_green.max(green_residual_conformal(s, x)?.abs());
        }
    }
    let meta = |r: ResidualReport| r.with("surface", s.label()).with("n", n).with("points", points.len());
    out.push(meta(ResidualReport::real("max_grad_rho_identity", worst[0], 0.0, 1e-10)));
    out.push(meta(ResidualReport::real("max_laplacian_rho_identity[assembled]", worst[1], 0.0, 1e-10)));
    out.push(meta(
        ResidualReport::real("max_laplacian_rho_identity[finite_difference]", worst[2], 0.0, 1e-8).with("h", FD_STEP),
    ));
    out.push(meta(ResidualReport::real("max_gauss_equation_defect", worst_gauss, 0.0, 1e-10)));
    if n == 2 {
        match c {
            Some(c) => out.push(meta(ResidualReport::real("max_green_residual_surface", worst_green, 0.0, 1e-10).with("c", c))),
            None => {
                let (cb, spread) = best_surface_constant(s, points)?;
                out.push(meta(
                    ResidualReport::real("min_over_c_max_green_residual_surface", spread, 0.0, 1e-10).with("best_c", cb),
                ));
            }
        }
    } else {
        out.push(meta(ResidualReport::real("max_green_residual_conformal", worst_green, 0.0, 1e-10)));
    }
    for a in 0..n {
        let mut v = vec![0.0; n];
        v[a] = 1.0;
        let lim = ray_limits(s, &v)?;
        let names = ["eta_over_rho", "grad_rho_grad_phi_over_rho", "grad_phi_sq_over_rho"];
        for i in 0..3 {
            out.push(
                meta(ResidualReport::real(format!("ray_limit[{}]", names[i]), lim.values[i], lim.targets[i], 1e-6))
                    .with("direction", a),
            );
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_examples() {
        let plane = GraphSurface::plane(2).unwrap();
        let d = curvature_at(&plane, &[0.3, 0.4]).unwrap();
        assert_eq!((d.mean_curvature, d.second_form_norm_sq, d.scalar, d.eta), (0.0, 0.0, 0.0, 0.0));
        assert!((d.rho - 0.25).abs() < 1e-16);

        let s = GraphSurface::sphere(2, 1.0).unwrap();
        let d = curvature_at(&s, &[0.6, 0.0]).unwrap();
        assert!((d.mean_curvature - 2.0).abs() < 1e-14);
        assert!((d.eta + 0.2).abs() < 1e-15);
        assert!((d.rho - 0.4).abs() < 1e-15);

        let p = GraphSurface::paraboloid(vec![1.0, 2.0]).unwrap();
        let d = curvature_at(&p, &[0.0, 0.0]).unwrap();
        assert_eq!(d.mean_curvature, 3.0);
        assert_eq!(d.second_form_norm_sq, 5.0);
        assert_eq!(d.scalar, 4.0);
    }

    #[test]
    fn metric_inverse_and_gauss() {
        let e = GraphSurface::ellipsoid(vec![1.0, 1.4, 2.0], 0.8).unwrap();
        for x in sample_points(&e, 0.8, 50, 3) {
            let d = curvature_at(&e, &x).unwrap();
            let id = &d.metric * &d.inverse_metric - DMatrix::identity(3, 3);
            assert!(id.amax() < 1e-12);
            assert!(d.gauss_defect().abs() < 1e-10);
            let k = principal_curvatures(&e, &x).unwrap();
            assert!((k.mean() - d.mean_curvature).abs() < 1e-10);
            assert!((k.norm_sq() - d.second_form_norm_sq).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_support_and_chord() {
        for r in [1.0, 2.0, 0.5] {
            for n in [2, 3, 4] {
                let s = GraphSurface::sphere(n, r).unwrap();
                for x in sample_points(&s, 0.9 * r, 40, 5) {
                    let j = s.jet(&x).unwrap();
                    let d = curvature_at(&s, &x).unwrap();
                    assert!((d.eta + j.f).abs() < 1e-12);
                    assert!((d.rho - 2.0 * r * j.f).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identities_on_examples() {
        let plane = GraphSurface::plane(2).unwrap();
        for r in identity_residuals(&plane, &[0.3, 0.4]).unwrap() {
            assert!(r.value.as_f64().abs() < 1e-12);
        }
        let s = GraphSurface::sphere(2, 1.0).unwrap();
        for r in identity_residuals(&s, &[0.6, 0.0]).unwrap() {
            assert!(r.value.as_f64().abs() < 1e-10, "{}", r.name);
        }
        let e = GraphSurface::ellipsoid(vec![1.0, 2.0], 1.0).unwrap();
        for x in sample_points(&e, 0.8, 30, 9) {
            for r in identity_residuals(&e, &x).unwrap() {
                assert!(r.pass, "{} {:?}", r.name, r.value);
            }
        }
    }

    #[test]
    fn green_residual_examples() {
        let s = GraphSurface::sphere(2, 1.0).unwrap();
        assert!(green_residual_surface(&s, &[0.6, 0.0], 1.0).unwrap().abs() < 1e-14);
        assert!(green_residual_surface(&s, &[0.1, 0.1], 1.0).unwrap().abs() < 1e-12);
        assert!(matches!(green_residual_surface(&s, &[0.0, 0.0], 1.0), Err(Error::SingularPoint(_))));

        let s3 = GraphSurface::sphere(3, 1.0).unwrap();
        assert!(green_residual_conformal(&s3, &[0.5, 0.0, 0.0]).unwrap().abs() < 1e-12);
        let p3 = GraphSurface::plane(3).unwrap();
        assert_eq!(green_residual_conformal(&p3, &[0.5, 0.1, 0.0]).unwrap(), 0.0);
        let cyl = GraphSurface::paraboloid(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(green_residual_conformal(&cyl, &[0.2, 0.0, 0.0]).unwrap().abs() > 1e-4);

        let e = GraphSurface::ellipsoid(vec![1.0, 2.0], 1.0).unwrap();
        let (_, spread) = best_surface_constant(&e, &sample_points(&e, 0.8, 100, 1)).unwrap();
        assert!(spread > 1e-3);
    }

    #[test]
    fn ray_limit_examples() {
        let s = GraphSurface::sphere(2, 1.0).unwrap();
        let l = ray_limits(&s, &[1.0, 0.0]).unwrap();
        assert_eq!(l.targets, [-0.5, -2.0, 1.0]);
        for i in 0..3 {
            assert!((l.values[i] - l.targets[i]).abs() < 1e-6);
        }
        let p = GraphSurface::paraboloid(vec![1.0, 2.0]).unwrap();
        let l = ray_limits(&p, &[0.0, 1.0]).unwrap();
        assert_eq!(l.targets, [-1.0, -4.0, 4.0]);
        for i in 0..3 {
            assert!((l.values[i] - l.targets[i]).abs() < 1e-6);
        }
        let f = ray_limits(&GraphSurface::plane(2).unwrap(), &[0.6, 0.8]).unwrap();
        assert_eq!(f.values, [0.0; 3]);
        assert!(ray_limits(&s, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn neville_polynomial_exact() {
        let ts = [0.1, 0.05, 0.025, 0.0125];
        let ys: Vec<f64> = ts.iter().map(|t| 2.0 - 3.0 * t + t * t).collect();
        let (v, _) = extrapolate_to_zero(&ts, &ys);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn trace_identity_examples() {
        assert_eq!(umbilic_defect(&PrincipalData::new(vec![1.0, 1.0, 1.0])), 0.0);
        assert_eq!(umbilic_defect(&PrincipalData::new(vec![1.0, 2.0])), -1.0);
        assert_eq!(paneitz_trace_residual_4d(&PrincipalData::new(vec![1.0, 1.0, 1.0, 2.0])).unwrap(), -16.0);
        assert_eq!(paneitz_trace_residual_4d(&PrincipalData::umbilic(4, 0.0)).unwrap(), 0.0);
        let k = PrincipalData::new(vec![1.0, 1.0, 1.0, 1.0, 2.0]);
        assert!((chord_coefficient_identity(&k, 4).unwrap() - 3.0).abs() < 1e-14);
        assert!(paneitz_trace_residual(&PrincipalData::umbilic(4, 1.0)).is_err());
        assert!(paneitz_trace_residual(&PrincipalData::umbilic(5, 0.7)).unwrap().abs() < 1e-14);
        assert!(paneitz_trace_residual(&PrincipalData::new(vec![1.0, 1.0, 2.0])).unwrap().abs() > 1e-3);
    }

    #[test]
    fn traced_identity_is_multiple_of_umbilic_defect() {
        for n in [3usize, 5, 6, 7] {
            let nf = n as f64;
            let factor = (2.0 * nf * nf - 9.0 * nf + 12.0) / ((nf - 1.0) * (nf - 2.0));
            let k = PrincipalData::new((0..n).map(|i| 0.3 + 0.17 * i as f64 * i as f64).collect());
            let lhs = paneitz_trace_residual(&k).unwrap();
            assert!((lhs + factor * umbilic_defect(&k)).abs() < 1e-12 * lhs.abs().max(1.0), "n={n}");
        }
    }

    #[test]
    fn umbilic_zero_set() {
        for c in [0.5, 1.0, 2.0] {
            for n in [3usize, 5, 6] {
                let k = PrincipalData::umbilic(n, c);
                assert!(paneitz_trace_residual(&k).unwrap().abs() < 1e-12);
                for d in 0..n {
                    assert!(paneitz_direction_residual(&k, d).unwrap().abs() < 1e-12);
                    assert!(chord_coefficient_identity(&k, d).unwrap().abs() < 1e-12);
                }
            }
            assert!(paneitz_trace_residual_4d(&PrincipalData::umbilic(4, c)).unwrap().abs() < 1e-12);
        }
    }
}
