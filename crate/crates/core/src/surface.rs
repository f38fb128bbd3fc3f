//! Graph hypersurfaces x_{n+1} = f(x) over a ball in R^n, with analytic
//! derivatives through third order.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};

/// f and its derivatives at one point; `third[g][(a, b)]` is f_{abg}.
#[derive(Clone, Debug)]
pub struct Jet {
    pub f: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    pub third: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub powers: Vec<u32>,
    pub coeff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceKind {
    Plane,
    Sphere { radius: f64 },
    /// Lower cap of sum x_a^2/a_a^2 + (z-c)^2/c^2 = 1.
    Ellipsoid { axes: Vec<f64>, height: f64 },
    /// f = sum k_a x_a^2 / 2
    Paraboloid { curvatures: Vec<f64> },
    Polynomial { terms: Vec<Monomial> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphSurface {
    n: usize,
    kind: SurfaceKind,
    radius: f64,
}

fn surface_err(msg: impl Into<String>) -> Error {
    Error::Surface(msg.into())
}

impl GraphSurface {
    pub fn plane(n: usize) -> Result<Self> {
        Self::build(n, SurfaceKind::Plane, None)
    }

    pub fn sphere(n: usize, radius: f64) -> Result<Self> {
        Self::build(n, SurfaceKind::Sphere { radius }, None)
    }

    pub fn ellipsoid(axes: Vec<f64>, height: f64) -> Result<Self> {
        Self::build(axes.len(), SurfaceKind::Ellipsoid { axes, height }, None)
    }

    pub fn paraboloid(curvatures: Vec<f64>) -> Result<Self> {
        Self::build(curvatures.len(), SurfaceKind::Paraboloid { curvatures }, None)
    }

    pub fn polynomial(n: usize, terms: Vec<Monomial>, radius: Option<f64>) -> Result<Self> {
        Self::build(n, SurfaceKind::Polynomial { terms }, radius)
    }

    fn build(n: usize, kind: SurfaceKind, radius: Option<f64>) -> Result<Self> {
        if n == 0 {
            return Err(surface_err("dimension must be positive"));
        }
        let natural = match &kind {
            SurfaceKind::Plane | SurfaceKind::Paraboloid { .. } | SurfaceKind::Polynomial { .. } => {
                f64::INFINITY
            }
            SurfaceKind::Sphere { radius } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(surface_err(format!("sphere radius must be positive, got {radius}")));
                }
                *radius
            }
            SurfaceKind::Ellipsoid { axes, height } => {
                if axes.iter().chain([height]).any(|a| !(*a > 0.0 && a.is_finite())) {
                    return Err(surface_err("ellipsoid semi-axes must be positive"));
                }
                axes.iter().cloned().fold(f64::INFINITY, f64::min)
            }
        };
        match &kind {
            SurfaceKind::Paraboloid { curvatures } if curvatures.iter().any(|k| !k.is_finite()) => {
                return Err(surface_err("paraboloid curvatures must be finite"));
            }
            SurfaceKind::Polynomial { terms } => {
                for t in terms {
                    if t.powers.len() != n {
                        return Err(surface_err(format!(
                            "monomial has {} exponents, expected {n}",
                            t.powers.len()
                        )));
                    }
                    let deg: u32 = t.powers.iter().sum();
                    if deg < 2 && t.coeff != 0.0 {
                        return Err(surface_err(
                            "f(0) = 0 and grad f(0) = 0 are required: terms of degree 0 or 1 are not allowed",
                        ));
                    }
                    if !t.coeff.is_finite() {
                        return Err(surface_err("monomial coefficient must be finite"));
                    }
                }
            }
            _ => {}
        }
        let radius = match radius {
            Some(r) if r > 0.0 => r.min(natural),
            Some(r) => return Err(surface_err(format!("chart radius must be positive, got {r}"))),
            None => natural,
        };
        Ok(GraphSurface { n, kind, radius })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    /// Radius of the chart ball.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            SurfaceKind::Plane => "plane",
            SurfaceKind::Sphere { .. } => "sphere",
            SurfaceKind::Ellipsoid { .. } => "ellipsoid",
            SurfaceKind::Paraboloid { .. } => "paraboloid",
            SurfaceKind::Polynomial { .. } => "custom",
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.n {
            return false;
        }
        let r2: f64 = x.iter().map(|v| v * v).sum();
        if r2 >= self.radius * self.radius {
            return false;
        }
        match &self.kind {
            SurfaceKind::Ellipsoid { axes, .. } => {
                x.iter().zip(axes).map(|(v, a)| (v / a) * (v / a)).sum::<f64>() < 1.0
            }
            _ => true,
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Domain(format!("point has {} coordinates, expected {}", x.len(), self.n)));
        }
        if !self.contains(x) {
            return Err(Error::ChartExit(format!("{x:?} is outside the chart of the {}", self.label())));
        }
        Ok(())
    }

    /// Axes of the ellipsoid that the built-in closed forms share.
    fn ellipsoid_axes(&self) -> Option<(std::borrow::Cow<'_, [f64]>, f64)> {
        match &self.kind {
            SurfaceKind::Sphere { radius } => Some((vec![*radius; self.n].into(), *radius)),
            SurfaceKind::Ellipsoid { axes, height } => Some((axes.as_slice().into(), *height)),
            _ => None,
        }
    }

    /// f(x) and grad f(x) without second derivatives.
    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> Result<f64> {
        self.check(x)?;
        if let SurfaceKind::Sphere { radius } = self.kind {
            let s = x.iter().map(|v| v * v).sum::<f64>() / (radius * radius);
            let w = (1.0 - s).sqrt();
            for (g, v) in grad.iter_mut().zip(x) {
                *g = v / (radius * w);
            }
            return Ok(radius * s / (1.0 + w));
        }
        if let Some((axes, c)) = self.ellipsoid_axes() {
            let s: f64 = x.iter().zip(axes.iter()).map(|(v, a)| v * v / (a * a)).sum();
            let w = (1.0 - s).sqrt();
            for ((g, v), a) in grad.iter_mut().zip(x).zip(axes.iter()) {
                *g = c * v / (a * a) / w;
            }
            return Ok(c * s / (1.0 + w));
        }
        match &self.kind {
            SurfaceKind::Plane => {
                grad.iter_mut().for_each(|g| *g = 0.0);
                Ok(0.0)
            }
            SurfaceKind::Paraboloid { curvatures } => {
                let mut f = 0.0;
                for ((g, v), k) in grad.iter_mut().zip(x).zip(curvatures) {
                    *g = k * v;
                    f += 0.5 * k * v * v;
                }
                Ok(f)
            }
            SurfaceKind::Polynomial { terms } => {
                let j = self.polynomial_jet(terms, x, false);
                grad.copy_from_slice(j.grad.as_slice());
                Ok(j.f)
            }
            _ => unreachable!(),
        }
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet> {
        self.check(x)?;
        let n = self.n;
        if let Some((axes, c)) = self.ellipsoid_axes() {
            let a2: Vec<f64> = axes.iter().map(|a| a * a).collect();
            let u: Vec<f64> = x.iter().zip(&a2).map(|(v, a)| v / a).collect();
            let s: f64 = x.iter().zip(&u).map(|(v, w)| v * w).sum();
            let w = (1.0 - s).sqrt();
            let (w3, w5) = (w * w * w, w * w * w * w * w);
            let grad = DVector::from_iterator(n, u.iter().map(|v| c * v / w));
            let hess = DMatrix::from_fn(n, n, |a, b| {
                let d = if a == b { 1.0 / (a2[a] * w) } else { 0.0 };
                c * (d + u[a] * u[b] / w3)
            });
            let third = (0..n)
                .map(|g| {
                    DMatrix::from_fn(n, n, |a, b| {
                        let mut t = 0.0;
                        if a == b {
                            t += u[g] / a2[a];
                        }
                        if a == g {
                            t += u[b] / a2[a];
                        }
                        if b == g {
                            t += u[a] / a2[b];
                        }
                        c * (t / w3 + 3.0 * u[a] * u[b] * u[g] / w5)
                    })
                })
                .collect();
            return Ok(Jet { f: c * s / (1.0 + w), grad, hess, third });
        }
        match &self.kind {
            SurfaceKind::Plane => Ok(Jet {
                f: 0.0,
                grad: DVector::zeros(n),
                hess: DMatrix::zeros(n, n),
                third: vec![DMatrix::zeros(n, n); n],
            }),
            SurfaceKind::Paraboloid { curvatures } => Ok(Jet {
                f: x.iter().zip(curvatures).map(|(v, k)| 0.5 * k * v * v).sum(),
                grad: DVector::from_iterator(n, x.iter().zip(curvatures).map(|(v, k)| k * v)),
                hess: DMatrix::from_diagonal(&DVector::from_column_slice(curvatures)),
                third: vec![DMatrix::zeros(n, n); n],
            }),
            SurfaceKind::Polynomial { terms } => Ok(self.polynomial_jet(terms, x, true)),
            _ => unreachable!(),
        }
    }

    fn polynomial_jet(&self, terms: &[Monomial], x: &[f64], full: bool) -> Jet {
        let n = self.n;
        let mut jet = Jet {
            f: 0.0,
            grad: DVector::zeros(n),
            hess: DMatrix::zeros(n, n),
            third: vec![DMatrix::zeros(n, n); if full { n } else { 0 }],
        };
        // derivative of prod x_i^{p_i} with multi-index d
        let deriv = |p: &[u32], d: &[u32]| -> f64 {
            let mut v = 1.0;
            for i in 0..n {
                if d[i] > p[i] {
                    return 0.0;
                }
                let falling: u32 = (p[i] - d[i] + 1..=p[i]).product();
                v *= falling as f64 * x[i].powi((p[i] - d[i]) as i32);
            }
            v
        };
        let mut d = vec![0u32; n];
        for t in terms {
            jet.f += t.coeff * deriv(&t.powers, &d);
            for a in 0..n {
                d[a] += 1;
                jet.grad[a] += t.coeff * deriv(&t.powers, &d);
                if full {
                    for b in 0..n {
                        d[b] += 1;
                        jet.hess[(a, b)] += t.coeff * deriv(&t.powers, &d);
                        for g in 0..n {
                            d[g] += 1;
                            jet.third[g][(a, b)] += t.coeff * deriv(&t.powers, &d);
                            d[g] -= 1;
                        }
                        d[b] -= 1;
                    }
                }
                d[a] -= 1;
            }
        }
        jet
    }

    /// Largest symmetry defect of the Hessian and third-derivative tensor
    /// over the given points.
    pub fn symmetry_defect(&self, points: &[Vec<f64>]) -> Result<f64> {
        let n = self.n;
        let mut worst = 0.0f64;
        for x in points {
            let j = self.jet(x)?;
            for a in 0..n {
                for b in 0..n {
                    worst = worst.max((j.hess[(a, b)] - j.hess[(b, a)]).abs());
                    for g in 0..n {
                        let t = j.third[g][(a, b)];
                        worst = worst
                            .max((t - j.third[g][(b, a)]).abs())
                            .max((t - j.third[a][(g, b)]).abs())
                            .max((t - j.third[b][(a, g)]).abs());
                    }
                }
            }
        }
        Ok(worst)
    }

    pub fn from_json(doc: &Json) -> Result<Self> {
        let kind = doc
            .get("kind")
            .and_then(Json::as_str)
            .ok_or_else(|| surface_err("missing string field \"kind\""))?;
        let dim = doc.get("dim").map(|d| {
            d.as_u64()
                .filter(|v| *v > 0)
                .map(|v| v as usize)
                .ok_or_else(|| surface_err("\"dim\" must be a positive integer"))
        });
        let dim = dim.transpose()?;
        let empty = json!({});
        let params = doc.get("params").unwrap_or(&empty);
        let num = |key: &str| -> Result<f64> {
            params
                .get(key)
                .and_then(Json::as_f64)
                .ok_or_else(|| surface_err(format!("{kind}: missing numeric param \"{key}\"")))
        };
        let list = |key: &str| -> Result<Vec<f64>> {
            params
                .get(key)
                .and_then(Json::as_array)
                .ok_or_else(|| surface_err(format!("{kind}: missing array param \"{key}\"")))?
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| surface_err(format!("{kind}: \"{key}\" must hold numbers"))))
                .collect()
        };
        let need_dim = || dim.ok_or_else(|| surface_err(format!("{kind}: \"dim\" is required")));
        let check_dim = |len: usize| -> Result<()> {
            match dim {
                Some(d) if d != len => Err(surface_err(format!("{kind}: dim {d} does not match {len} parameters"))),
                _ => Ok(()),
            }
        };
        let chart = params.get("chart_radius").and_then(Json::as_f64);
        let s = match kind {
            "plane" => Self::build(need_dim()?, SurfaceKind::Plane, chart)?,
            "sphere" => Self::build(need_dim()?, SurfaceKind::Sphere { radius: num("radius")? }, chart)?,
            "ellipsoid" => {
                let axes = list("axes")?;
                check_dim(axes.len())?;
                let height = num("height")?;
                Self::build(axes.len(), SurfaceKind::Ellipsoid { axes, height }, chart)?
            }
            "paraboloid" => {
                let curvatures = list("curvatures")?;
                check_dim(curvatures.len())?;
                Self::build(curvatures.len(), SurfaceKind::Paraboloid { curvatures }, chart)?
            }
            "custom" => {
                let n = need_dim()?;
                let terms = params
                    .get("terms")
                    .and_then(Json::as_array)
                    .ok_or_else(|| surface_err("custom: missing array param \"terms\""))?
                    .iter()
                    .map(|t| {
                        let powers = t
                            .get("powers")
                            .and_then(Json::as_array)
                            .ok_or_else(|| surface_err("custom: term needs \"powers\""))?
                            .iter()
                            .map(|p| {
                                p.as_u64()
                                    .map(|v| v as u32)
                                    .ok_or_else(|| surface_err("custom: powers must be nonnegative integers"))
                            })
                            .collect::<Result<Vec<_>>>()?;
                        let coeff = t
                            .get("coeff")
                            .and_then(Json::as_f64)
                            .ok_or_else(|| surface_err("custom: term needs numeric \"coeff\""))?;
                        Ok(Monomial { powers, coeff })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::build(n, SurfaceKind::Polynomial { terms }, chart)?
            }
            other => return Err(surface_err(format!("unknown surface kind \"{other}\""))),
        };
        Ok(s)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Json {
        let mut params = match &self.kind {
            SurfaceKind::Plane => json!({}),
            SurfaceKind::Sphere { radius } => json!({ "radius": radius }),
            SurfaceKind::Ellipsoid { axes, height } => json!({ "axes": axes, "height": height }),
            SurfaceKind::Paraboloid { curvatures } => json!({ "curvatures": curvatures }),
            SurfaceKind::Polynomial { terms } => json!({
                "terms": terms.iter().map(|t| json!({"powers": t.powers, "coeff": t.coeff})).collect::<Vec<_>>()
            }),
        };
        if self.radius.is_finite() && matches!(self.kind, SurfaceKind::Polynomial { .. }) {
            params["chart_radius"] = json!(self.radius);
        }
        json!({ "kind": self.label(), "params": params, "dim": self.n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(s: &GraphSurface) -> Vec<Vec<f64>> {
        let n = s.dim();
        let r = s.radius().min(1.0) * 0.6;
        (0..12)
            .map(|i| (0..n).map(|a| r * ((i * (a + 2)) as f64 * 0.71 + a as f64).sin() / (n as f64).sqrt()).collect())
            .filter(|x: &Vec<f64>| s.contains(x))
            .collect()
    }

    fn fd_check(s: &GraphSurface) {
        // central differences of each derivative against the next one
        let h = 1e-5;
        let n = s.dim();
        for x in samples(s) {
            let j = s.jet(&x).unwrap();
            let mut g = vec![0.0; n];
            assert!((s.value_grad(&x, &mut g).unwrap() - j.f).abs() < 1e-14);
            for a in 0..n {
                assert!((g[a] - j.grad[a]).abs() < 1e-13);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[a] += h;
                xm[a] -= h;
                let (jp, jm) = (s.jet(&xp).unwrap(), s.jet(&xm).unwrap());
                assert!(((jp.f - jm.f) / (2.0 * h) - j.grad[a]).abs() < 1e-8);
                for b in 0..n {
                    assert!(((jp.grad[b] - jm.grad[b]) / (2.0 * h) - j.hess[(a, b)]).abs() < 1e-7);
                    for c in 0..n {
                        let fd = (jp.hess[(b, c)] - jm.hess[(b, c)]) / (2.0 * h);
                        assert!((fd - j.third[a][(b, c)]).abs() < 1e-6, "{:?}", s.kind());
                    }
                }
            }
        }
    }

    #[test]
    fn derivatives_against_differences() {
        fd_check(&GraphSurface::sphere(2, 1.0).unwrap());
        fd_check(&GraphSurface::sphere(3, 2.0).unwrap());
        fd_check(&GraphSurface::ellipsoid(vec![1.0, 2.0], 1.0).unwrap());
        fd_check(&GraphSurface::ellipsoid(vec![1.0, 1.5, 2.0], 0.7).unwrap());
        fd_check(&GraphSurface::paraboloid(vec![1.0, 2.0]).unwrap());
        let terms = vec![
            Monomial { powers: vec![2, 0], coeff: 0.5 },
            Monomial { powers: vec![1, 2], coeff: -0.3 },
            Monomial { powers: vec![0, 4], coeff: 0.25 },
        ];
        fd_check(&GraphSurface::polynomial(2, terms, None).unwrap());
    }

    #[test]
    fn sphere_closed_form() {
        let s = GraphSurface::sphere(2, 1.0).unwrap();
        let j = s.jet(&[0.6, 0.0]).unwrap();
        assert!((j.f - 0.2).abs() < 1e-15);
        assert!((j.grad[0] - 0.75).abs() < 1e-15);
        let j0 = s.jet(&[0.0, 0.0]).unwrap();
        assert_eq!(j0.f, 0.0);
        assert_eq!(j0.hess, DMatrix::identity(2, 2));
    }

    #[test]
    fn symmetric_tensors() {
        let s = GraphSurface::ellipsoid(vec![1.0, 1.3, 2.0], 1.5).unwrap();
        assert!(s.symmetry_defect(&samples(&s)).unwrap() < 1e-10);
    }

    #[test]
    fn chart_exit() {
        let s = GraphSurface::sphere(2, 1.0).unwrap();
        assert!(matches!(s.jet(&[1.0, 0.0]), Err(Error::ChartExit(_))));
        let e = GraphSurface::ellipsoid(vec![1.0, 2.0], 1.0).unwrap();
        assert!(e.contains(&[0.0, 0.99]));
        assert!(!e.contains(&[0.9, 0.9]));
    }

    #[test]
    fn base_point_enforced() {
        let bad = vec![Monomial { powers: vec![1, 0], coeff: 1.0 }];
        assert!(GraphSurface::polynomial(2, bad, None).is_err());
        assert!(GraphSurface::sphere(2, -1.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let docs = [
            r#"{"kind":"sphere","params":{"radius":2.0},"dim":3}"#,
            r#"{"kind":"ellipsoid","params":{"axes":[1.0,2.0],"height":1.0},"dim":2}"#,
            r#"{"kind":"paraboloid","params":{"curvatures":[1.0,2.0]}}"#,
            r#"{"kind":"plane","dim":4}"#,
            r#"{"kind":"custom","params":{"terms":[{"powers":[2,0],"coeff":0.5},{"powers":[0,3],"coeff":1.0}],"chart_radius":0.5},"dim":2}"#,
        ];
        for d in docs {
            let s = GraphSurface::from_json_str(d).unwrap();
            let back = GraphSurface::from_json(&s.to_json()).unwrap();
            assert_eq!(s, back);
        }
        assert!(GraphSurface::from_json_str(r#"{"kind":"torus","dim":2}"#).is_err());
        assert!(GraphSurface::from_json_str(r#"{"kind":"ellipsoid","params":{"axes":[1,2],"height":1},"dim":3}"#).is_err());
        assert!(GraphSurface::from_json_str(r#"{"kind":"sphere","dim":2}"#).is_err());
    }
}
