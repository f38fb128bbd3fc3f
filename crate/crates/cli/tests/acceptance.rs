//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails. Reference values are computed here, apart from
//! the library code paths they check.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use spherical_green_core::axial::{axial_pn, flat_radial_identity, u_k_family, verify_eigenvalue, verify_orthogonality};
use spherical_green_core::exact::{q, qi, Q};
use spherical_green_core::geodesic::chord_expansion_check;
use spherical_green_core::green::{
    coefficient_match, const_critical, const_integer, const_power, moment_oracle_check, series_sweep, Acceleration,
    GreenSpec, DEFAULT_CHECKPOINTS,
};
use spherical_green_core::hypersurface::{
    best_surface_constant, chord_coefficient_identity, green_residual_conformal, green_residual_surface,
    paneitz_direction_residual, paneitz_trace_residual, paneitz_trace_residual_4d, ray_limits, sample_points,
    PrincipalData,
};
use spherical_green_core::mass::decay_fit;
use spherical_green_core::rigidity::{back_substitution, series_rigidity_solve};
use spherical_green_core::spectrum::{kernel_status, KernelStatus, OperatorOrder};
use spherical_green_core::surface::GraphSurface;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

/// Gamma(m/2) for integer m != 0, -2, -4, ... from Gamma(1/2) = sqrt(pi),
/// Gamma(1) = 1 and the functional equation.
fn gamma_half(m: i32) -> f64 {
    let (mut z, mut g) = if m % 2 == 0 { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = m as f64 / 2.0;
    while z < target {
        g *= z;
        z += 1.0;
    }
    while z > target {
        z -= 1.0;
        g /= z;
    }
    g
}

fn c1_constants() -> Outcome {
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let mut worst = 0.0f64;
    worst = worst.max(rel(const_critical(2), 1.0 / (2.0 * PI)));
    worst = worst.max(rel(const_critical(4), 1.0 / (8.0 * PI * PI)));
    worst = worst.max(rel(const_power(3, 1.0).map_err(|e| e.to_string())?, 1.0 / (4.0 * PI)));
    for (n, k) in [(5u32, 1u32), (5, 2), (3, 2), (7, 3)] {
        let want = gamma_half(n as i32 - 2 * k as i32)
            / (4f64.powi(k as i32) * PI.powf(n as f64 / 2.0) * gamma_half(2 * k as i32));
        worst = worst.max(rel(const_power(n, k as f64).map_err(|e| e.to_string())?, want));
        worst = worst.max(rel(const_integer(n, k).map_err(|e| e.to_string())?, want));
    }
    ensure(worst <= 1e-12, format!("worst relative error {worst:.2e}"))?;
    Ok(format!("worst relative error {worst:.2e}"))
}

fn c2_coefficients() -> Outcome {
    let mut specs = Vec::new();
    for n in 2..=5u32 {
        specs.push(GreenSpec::critical(n).map_err(|e| e.to_string())?);
        for sigma in [0.5, 1.0, 1.5, 2.0] {
            // sigma = n/2 is the critical case and sigma > n/2 at a pole is excluded
            if let Ok(s) = GreenSpec::power(n, sigma) {
                if s.sigma() != n as f64 / 2.0 {
                    specs.push(s);
                }
            }
        }
    }
    let (mut worst_match, mut worst_moment, mut count) = (0.0f64, 0.0f64, 0);
    for s in &specs {
        for k in s.first_degree()..=12 {
            let m = coefficient_match(s, k).map_err(|e| e.to_string())?;
            let o = moment_oracle_check(s, k).map_err(|e| e.to_string())?;
            worst_match = worst_match.max(m.value.as_f64().abs());
            worst_moment = worst_moment.max(o.value.as_f64().abs());
            count += 1;
        }
    }
    let detail = format!(
        "{} orders, {count} degrees, inner products {worst_match:.2e}, moments {worst_moment:.2e}",
        specs.len()
    );
    ensure(worst_match <= 1e-9 && worst_moment <= 1e-10, detail.clone())?;
    Ok(detail)
}

fn monotone_after_100(errs: &[f64]) -> bool {
    let idx: Vec<usize> = (0..DEFAULT_CHECKPOINTS.len()).filter(|&i| DEFAULT_CHECKPOINTS[i] >= 100).collect();
    idx.windows(2).all(|w| errs[w[1]] <= errs[w[0]])
}

fn c3_series() -> Outcome {
    let acc = Acceleration::CesaroAveraging;
    let xs: [f64; 3] = [0.0, 0.5, 1.0];
    let s = GreenSpec::power(3, 1.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for &x in &xs {
        let closed = 1.0 / (4.0 * PI * (2.0 * (1.0 + x)).sqrt());
        let sweep = series_sweep(&s, x, &DEFAULT_CHECKPOINTS, acc).map_err(|e| e.to_string())?;
        let errs: Vec<f64> = sweep.iter().map(|v| (v - closed).abs()).collect();
        ensure(monotone_after_100(&errs), format!("n=3 sigma=1 x={x}: errors not monotone {errs:?}"))?;
        worst = worst.max(*errs.last().unwrap());
    }
    let c = GreenSpec::critical(2).map_err(|e| e.to_string())?;
    let sweeps = xs
        .iter()
        .map(|&x| series_sweep(&c, x, &DEFAULT_CHECKPOINTS, acc))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let c2 = 1.0 / (2.0 * PI);
    let mut worst_diff = 0.0f64;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let want = -(c2 / 2.0) * ((1.0 + xs[j]).ln() - (1.0 + xs[i]).ln());
        let errs: Vec<f64> = (0..DEFAULT_CHECKPOINTS.len())
            .map(|t| (sweeps[j][t] - sweeps[i][t] - want).abs())
            .collect();
        ensure(monotone_after_100(&errs), format!("critical pair ({i},{j}): errors not monotone {errs:?}"))?;
        worst_diff = worst_diff.max(*errs.last().unwrap());
    }
    let detail = format!("power {worst:.2e}, critical differences {worst_diff:.2e} at K=50000");
    ensure(worst <= 1e-3 && worst_diff <= 1e-3, detail.clone())?;
    Ok(detail)
}

/// Gamma(k+n)/Gamma(k) = k (k+1) ... (k+n-1).
fn rising(k: u32, n: u32) -> Q {
    (k..k + n).fold(qi(1), |acc, j| acc * qi(j as i64))
}

fn c4_axial() -> Outcome {
    let mut checks = 0;
    for n in [2u32, 4, 6, 8] {
        let sign = if (n / 2) % 2 == 0 { qi(1) } else { qi(-1) };
        for k in 0..=8u32 {
            for l in 0..=8u32 {
                if k != l {
                    let v = verify_orthogonality(n, k, l).map_err(|e| e.to_string())?;
                    ensure(v == qi(0), format!("orthogonality n={n} k={k} l={l}: {v}"))?;
                    checks += 1;
                }
            }
            if k == 0 {
                continue;
            }
            let want = &sign * rising(k, n);
            let (got, expected) = verify_eigenvalue(n, k).map_err(|e| e.to_string())?;
            ensure(got == want && expected == want, format!("eigenvalue n={n} k={k}: {got} vs {want}"))?;
            let u = u_k_family(n, k).map_err(|e| e.to_string())?;
            let pu = axial_pn(&u, n).map_err(|e| e.to_string())?;
            ensure(pu == u.scale(&rising(k, n)), format!("P_n u_k n={n} k={k} is not the eigen-multiple"))?;
            checks += 2;
        }
    }
    Ok(format!("{checks} exact identities"))
}

fn c5_flat() -> Outcome {
    for n in [2u32, 4, 6, 8] {
        let f = flat_radial_identity(n).map_err(|e| e.to_string())?;
        ensure(f.is_zero(), format!("n={n}: residual {f}"))?;
    }
    Ok("zero for n = 2, 4, 6, 8".into())
}

fn c6_sphere_residuals() -> Outcome {
    let mut worst = 0.0f64;
    for radius in [1.0, 2.0] {
        for n in 2..=4usize {
            let s = GraphSurface::sphere(n, radius).map_err(|e| e.to_string())?;
            for x in sample_points(&s, 0.5 * radius, 100, 11) {
                let r = if n == 2 {
                    green_residual_surface(&s, &x, 1.0 / (radius * radius))
                } else {
                    green_residual_conformal(&s, &x)
                }
                .map_err(|e| e.to_string())?;
                worst = worst.max(r.abs());
            }
        }
    }
    ensure(worst <= 1e-10, format!("sphere residual {worst:.2e}"))?;
    let mut ellipsoid = Vec::new();
    for axes in [vec![1.0, 2.0], vec![1.0, 1.0, 2.0], vec![1.0, 1.0, 1.0, 2.0]] {
        let s = GraphSurface::ellipsoid(axes, 1.0).map_err(|e| e.to_string())?;
        let pts = sample_points(&s, 0.5, 100, 11);
        let m = if s.dim() == 2 {
            // no constant c fits: the best one still leaves this much
            best_surface_constant(&s, &pts).map_err(|e| e.to_string())?.1
        } else {
            pts.iter()
                .map(|x| green_residual_conformal(&s, x).map(f64::abs))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?
                .into_iter()
                .fold(0.0, f64::max)
        };
        ellipsoid.push(m);
    }
    let detail = format!("sphere max {worst:.2e}, ellipsoid max (n=2,3,4) {ellipsoid:.3?}");
    ensure(ellipsoid.iter().all(|m| *m > 1e-3), detail.clone())?;
    Ok(detail)
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter().map(|a| a / n).collect()
}

fn c7_ray_limits() -> Outcome {
    let dirs = [
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        unit(&[1.0, 1.0, 1.0]),
        unit(&[1.0, -2.0, 0.5]),
    ];
    // second fundamental form at the origin, diagonal in each case
    let cases = [
        (GraphSurface::sphere(3, 1.0), [1.0, 1.0, 1.0]),
        (GraphSurface::paraboloid(vec![1.0, 2.0, 3.0]), [1.0, 2.0, 3.0]),
        (GraphSurface::ellipsoid(vec![1.0, 1.0, 2.0], 1.0), [1.0, 1.0, 0.25]),
    ];
    let mut worst = 0.0f64;
    for (s, ii) in cases {
        let s = s.map_err(|e| e.to_string())?;
        for v in &dirs {
            let iivv: f64 = (0..3).map(|a| ii[a] * v[a] * v[a]).sum();
            let ii2vv: f64 = (0..3).map(|a| ii[a] * ii[a] * v[a] * v[a]).sum();
            let want = [-iivv / 2.0, -2.0 * iivv, ii2vv];
            let got = ray_limits(&s, v).map_err(|e| e.to_string())?;
            for i in 0..3 {
                worst = worst.max((got.values[i] - want[i]).abs());
            }
        }
    }
    ensure(worst <= 1e-6, format!("worst deviation {worst:.2e}"))?;
    Ok(format!("worst deviation {worst:.2e}"))
}

fn trace_residuals(k: &PrincipalData) -> Result<Vec<f64>, String> {
    let n = k.n();
    let mut out = Vec::new();
    if n == 4 {
        out.push(paneitz_trace_residual_4d(k).map_err(|e| e.to_string())?);
    } else {
        out.push(paneitz_trace_residual(k).map_err(|e| e.to_string())?);
    }
    for d in 0..n {
        out.push(paneitz_direction_residual(k, d).map_err(|e| e.to_string())?);
        out.push(chord_coefficient_identity(k, d).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn c8_traces() -> Outcome {
    let mut worst_umbilic = 0.0f64;
    let mut least_generic = f64::INFINITY;
    for n in [3usize, 4, 5, 6] {
        for c in [0.5, 1.0, 2.0] {
            for r in trace_residuals(&PrincipalData::umbilic(n, c))? {
                worst_umbilic = worst_umbilic.max(r.abs());
            }
        }
        let mut kappas = vec![1.0; n];
        kappas[n - 1] = 1.5;
        let generic = trace_residuals(&PrincipalData::new(kappas))?;
        // traced identity, then the last direction for each directional identity
        for r in [generic[0], generic[generic.len() - 2], generic[generic.len() - 1]] {
            least_generic = least_generic.min(r.abs());
        }
    }
    let four = paneitz_trace_residual_4d(&PrincipalData::new(vec![1.0, 1.0, 1.0, 2.0])).map_err(|e| e.to_string())?;
    let detail = format!("umbilic {worst_umbilic:.2e}, non-umbilic min {least_generic:.3}, 4d example {four}");
    ensure(worst_umbilic <= 1e-12 && least_generic >= 1e-3 && four == -16.0, detail.clone())?;
    Ok(detail)
}

fn c9_rigidity() -> Outcome {
    let a = series_rigidity_solve(&q(1, 4), 12).map_err(|e| e.to_string())?;
    // 1 - sqrt(1-t) = sum_m C(2m,m) / ((2m-1) 4^m) t^m
    let mut central: i64 = 1;
    for (i, ai) in a.iter().enumerate() {
        let m = i as i64 + 1;
        central = central * (2 * m) * (2 * m - 1) / (m * m);
        let want = q(central, (2 * m - 1) * 4i64.pow(m as u32));
        ensure(ai.as_rational() == Some(&want), format!("a[{m}] = {ai}, expected {want}"))?;
    }
    let resid = back_substitution(&q(1, 4), &a);
    ensure(resid.len() >= 12, "back-substitution too short")?;
    ensure(resid.iter().all(|e| e.is_zero()), "nonzero back-substitution residual")?;
    Ok(format!("12 coefficients exact, residual zero through degree {}", resid.len() - 1))
}

fn c10_mass() -> Outcome {
    let radii = [20.0, 40.0, 80.0, 160.0];
    let mut parts = Vec::new();
    for n in 3..=5usize {
        let s = GraphSurface::sphere(n, 1.0).map_err(|e| e.to_string())?;
        let fit = decay_fit(&s, &radii, 32).map_err(|e| e.to_string())?;
        let p = fit.exponent.ok_or("no exponent")?;
        let detail = format!("n={n}: exponent {p:.4}, mass {:.2e}", fit.extrapolated_mass);
        ensure((p - (n as f64 - 6.0)).abs() <= 0.3 && fit.extrapolated_mass.abs() <= 1e-4, detail.clone())?;
        parts.push(detail);
    }
    let plane = decay_fit(&GraphSurface::plane(4).map_err(|e| e.to_string())?, &radii, 32).map_err(|e| e.to_string())?;
    ensure(plane.exact_zero(), "plane mass is not exactly zero")?;
    parts.push("plane exact 0".into());
    Ok(parts.join("; "))
}

fn c11_chord() -> Outcome {
    let sphere = GraphSurface::sphere(2, 1.0).map_err(|e| e.to_string())?;
    let para = GraphSurface::paraboloid(vec![1.0, 2.0]).map_err(|e| e.to_string())?;
    let plane = GraphSurface::plane(2).map_err(|e| e.to_string())?;
    let check = |s: &GraphSurface, v: &[f64], ii: f64| -> Result<f64, String> {
        let r = chord_expansion_check(s, v, 1.0).map_err(|e| e.to_string())?;
        let c4 = r.metadata["c4"].as_f64().ok_or("missing c4")?;
        Ok((c4 + ii * ii / 12.0).abs())
    };
    let e_sphere = check(&sphere, &[1.0, 0.0], 1.0)?;
    let e_p1 = check(&para, &[1.0, 0.0], 1.0)?;
    let e_p2 = check(&para, &[0.0, 1.0], 2.0)?;
    let e_plane = check(&plane, &unit(&[1.0, 1.0]), 0.0)?;
    let detail = format!("sphere {e_sphere:.2e}, paraboloid {e_p1:.2e} / {e_p2:.2e}, plane {e_plane:e}");
    ensure(e_sphere <= 1e-4 && e_p1 <= 1e-3 && e_p2 <= 1e-3 && e_plane == 0.0, detail.clone())?;
    Ok(detail)
}

fn c12_kernel() -> Outcome {
    for (n, k) in [(4u32, 3u32), (6, 4)] {
        let st = kernel_status(n, OperatorOrder::Integer { k }).map_err(|e| e.to_string())?;
        ensure(st == KernelStatus::NontrivialKernel, format!("n={n} k={k}: {st:?}"))?;
    }
    let out = Command::new(env!("CARGO_BIN_EXE_spherical-green"))
        .args(["constants", "--n", "4", "--k", "3"])
        .output()
        .map_err(|e| e.to_string())?;
    let stderr = String::from_utf8_lossy(&out.stderr);
    ensure(!out.status.success(), "CLI exited with status 0")?;
    ensure(stderr.contains("kernel obstruction"), format!("CLI message: {stderr}"))?;
    Ok(format!("nontrivial kernels found, CLI exit {:?}", out.status.code()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 12] = [
        ("constants table", c1_constants, 1),
        ("coefficient matching", c2_coefficients, 30),
        ("series convergence", c3_series, 60),
        ("exact axial identities", c4_axial, 30),
        ("flat radial identity", c5_flat, 5),
        ("sphere residuals", c6_sphere_residuals, 10),
        ("ray limits", c7_ray_limits, 10),
        ("trace identities", c8_traces, 1),
        ("series rigidity", c9_rigidity, 5),
        ("mass decay", c10_mass, 120),
        ("chord expansion", c11_chord, 20),
        ("kernel obstruction", c12_kernel, 1),
    ];
    let mut failures = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let over = took > Duration::from_secs(*budget);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the {budget}s budget")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("{status} criterion {:>2} {name} ({:.2}s): {detail}", i + 1, took.as_secs_f64());
    }
    println!("{}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
