//! Unit-speed geodesics from the base point of a graph hypersurface and the
//! quartic coefficient of the chord square along them.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::report::ResidualReport;
use crate::surface::GraphSurface;

/// Drift of |x'|^2 + (grad f . x')^2 from 1 that aborts an integration.
pub const DRIFT_ABORT: f64 = 1e-6;
pub const DEFAULT_SAMPLES: usize = 4096;
/// A dyadic length, so straight lines are integrated without rounding.
pub const DEFAULT_R_MAX: f64 = 0.25;
pub const CUTS: [f64; 3] = [0.05, 0.1, 0.2];
pub const CONDITION_LIMIT: f64 = 1e8;
/// Window of the unconstrained Taylor fit for rho'(0) and rho''(0).
pub const TAYLOR_CUT: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSample {
    pub r: f64,
    pub rho: f64,
    /// |r u0|^2 for the rounded unit direction u0, the flat part of rho.
    pub base: f64,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct GeodesicTrace {
    pub samples: Vec<GeodesicSample>,
    pub max_drift: f64,
}

fn speed_defect(p: &DVector<f64>, v: &DVector<f64>) -> f64 {
    v.norm_squared() + p.dot(v).powi(2) - 1.0
}

/// x'' = -grad f (x'^T Hess f x') / (1 + |grad f|^2), classical RK4 with
/// fixed step r_max / samples. The state is the deviation y from the straight
/// line t u0, so a flat graph is integrated without roundoff.
pub fn geodesic_shoot(s: &GraphSurface, v: &[f64], r_max: f64, samples: usize) -> Result<GeodesicTrace> {
    let n = s.dim();
    if v.len() != n {
        return Err(Error::Domain(format!("direction has {} entries, expected {n}", v.len())));
    }
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(Error::Domain("direction must be nonzero".into()));
    }
    if !(r_max > 0.0) || samples == 0 {
        return Err(Error::Domain("r_max and samples must be positive".into()));
    }
    // grad f(0) = 0, so the unit-speed condition is |x'| = 1 at the start
    let u0 = DVector::from_iterator(n, v.iter().map(|a| a / norm));
    let accel = |t: f64, y: &DVector<f64>, w: &DVector<f64>| -> Result<DVector<f64>> {
        let x = &u0 * t + y;
        let u = &u0 + w;
        let j = s.jet(x.as_slice())?;
        let quad = u.dot(&(&j.hess * &u));
        let w2 = 1.0 + j.grad.norm_squared();
        Ok(&j.grad * (-quad / w2))
    };
    let h = r_max / samples as f64;
    let mut y = DVector::zeros(n);
    let mut w = DVector::zeros(n);
    let mut out = Vec::with_capacity(samples + 1);
    out.push(GeodesicSample { r: 0.0, rho: 0.0, base: 0.0, x: vec![0.0; n] });
    let mut max_drift = 0.0f64;
    for i in 1..=samples {
        let t = (i - 1) as f64 * h;
        let k1w = accel(t, &y, &w)?;
        let k1y = w.clone();
        let y2 = &y + &k1y * (h / 2.0);
        let w2 = &w + &k1w * (h / 2.0);
        let k2w = accel(t + h / 2.0, &y2, &w2)?;
        let y3 = &y + &w2 * (h / 2.0);
        let w3 = &w + &k2w * (h / 2.0);
        let k3w = accel(t + h / 2.0, &y3, &w3)?;
        let y4 = &y + &w3 * h;
        let w4 = &w + &k3w * h;
        let k4w = accel(t + h, &y4, &w4)?;
        y += (&k1y + &w2 * 2.0 + &w3 * 2.0 + &w4) * h / 6.0;
        w += (&k1w + &k2w * 2.0 + &k3w * 2.0 + &k4w) * h / 6.0;
        let r = i as f64 * h;
        let line = &u0 * r;
        let x = &line + &y;
        let mut grad = vec![0.0; n];
        let f = s.value_grad(x.as_slice(), &mut grad)?;
        let drift = speed_defect(&DVector::from_vec(grad), &(&u0 + &w)).abs();
        max_drift = max_drift.max(drift);
        if drift > DRIFT_ABORT {
            return Err(Error::Convergence(format!("unit-speed drift {drift:e} at r = {r} exceeds {DRIFT_ABORT:e}")));
        }
        out.push(GeodesicSample {
            r,
            rho: x.norm_squared() + f * f,
            base: line.norm_squared(),
            x: x.as_slice().to_vec(),
        });
    }
    Ok(GeodesicTrace { samples: out, max_drift })
}

fn within(samples: &[GeodesicSample], r_cut: f64) -> Vec<&GeodesicSample> {
    samples.iter().filter(|s| s.r > 0.0 && s.r <= r_cut * (1.0 + 1e-12)).collect()
}

/// Least-squares c4 in rho - |r u0|^2 = c4 r^4 over samples with r <= r_cut.
pub fn quartic_fit(samples: &[GeodesicSample], r_cut: f64) -> Result<f64> {
    let pts = within(samples, r_cut);
    if pts.len() < 3 {
        return Err(Error::Domain(format!("only {} samples below r_cut = {r_cut}", pts.len())));
    }
    let (mut num, mut den) = (0.0, 0.0);
    for s in pts {
        let r4 = s.r.powi(4);
        num += (s.rho - s.base) * r4;
        den += r4 * r4;
    }
    Ok(num / den)
}

#[derive(Clone, Debug)]
pub struct TaylorFit {
    /// rho(0), rho'(0), rho''(0)/2, rho'''(0)/6, rho''''(0)/24
    pub coeffs: [f64; 5],
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// Unconstrained degree-4 least-squares fit of rho(r) on r <= r_cut, in the
/// scaled variable r / r_cut.
pub fn taylor_fit(samples: &[GeodesicSample], r_cut: f64) -> Result<TaylorFit> {
    let pts: Vec<&GeodesicSample> = samples.iter().filter(|s| s.r <= r_cut * (1.0 + 1e-12)).collect();
    if pts.len() < 5 {
        return Err(Error::Domain(format!("only {} samples below r_cut = {r_cut}", pts.len())));
    }
    let a = DMatrix::from_fn(pts.len(), 5, |i, j| (pts[i].r / r_cut).powi(j as i32));
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|s| s.rho));
    let svd = a.svd(true, true);
    let sv = &svd.singular_values;
    let condition = sv.max() / sv.min();
    let sol = svd.solve(&b, 0.0).map_err(|e| Error::Domain(e.to_string()))?;
    let mut coeffs = [0.0; 5];
    for j in 0..5 {
        coeffs[j] = sol[j] / r_cut.powi(j as i32);
    }
    Ok(TaylorFit { coeffs, condition, ill_conditioned: condition > CONDITION_LIMIT })
}

#[derive(Clone, Debug)]
pub struct ChordCheck {
    pub c4_by_cut: Vec<(f64, f64)>,
    /// Richardson combination of the two smallest cuts.
    pub c4: f64,
    pub target: f64,
    pub second_form: f64,
    pub max_drift: f64,
    pub taylor: TaylorFit,
}

pub fn chord_expansion(s: &GraphSurface, v: &[f64], r_max: f64, samples: usize) -> Result<ChordCheck> {
    let trace = geodesic_shoot(s, v, r_max, samples)?;
    let cuts: Vec<f64> = CUTS.iter().cloned().filter(|c| *c <= r_max * (1.0 + 1e-12)).collect();
    if cuts.len() < 2 {
        return Err(Error::Domain(format!("r_max = {r_max} is below the fitting window")));
    }
    let c4_by_cut = cuts
        .iter()
        .map(|&c| quartic_fit(&trace.samples, c).map(|v| (c, v)))
        .collect::<Result<Vec<_>>>()?;
    // the r^6 contamination scales with r_cut^2 and the cuts double
    let c4 = (4.0 * c4_by_cut[0].1 - c4_by_cut[1].1) / 3.0;
    let n = s.dim();
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let vv = DVector::from_iterator(n, v.iter().map(|a| a / norm));
    let hess = s.jet(&vec![0.0; n])?.hess;
    let ii = vv.dot(&(&hess * &vv));
    Ok(ChordCheck {
        c4_by_cut,
        c4,
        target: -ii * ii / 12.0,
        second_form: ii,
        max_drift: trace.max_drift,
        taylor: taylor_fit(&trace.samples, TAYLOR_CUT.min(cuts[0]))?,
    })
}

/// |c4 + II(v,v)^2 / 12| as a report.
pub fn chord_expansion_check(s: &GraphSurface, v: &[f64], tolerance: f64) -> Result<ResidualReport> {
    let r_max = DEFAULT_R_MAX.min(0.9 * s.radius());
    let c = chord_expansion(s, v, r_max, DEFAULT_SAMPLES)?;
    Ok(ResidualReport::real("chord_expansion", (c.c4 - c.target).abs(), 0.0, tolerance)
        .with("surface", s.label())
        .with("v", v)
        .with("c4", c.c4)
        .with("c4_target", c.target)
        .with("second_form", c.second_form)
        .with("c4_by_cut", &c.c4_by_cut)
        .with("max_drift", c.max_drift)
        .with("rho_prime_0", c.taylor.coeffs[1])
        .with("rho_second_0", 2.0 * c.taylor.coeffs[2])
        .with("fit_condition", c.taylor.condition))
}
