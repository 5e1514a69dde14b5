//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use adsweyl::cone_metric::{ConeMetric, Geometry};
use adsweyl::fixtures::*;
use adsweyl::fuchsian::build_genus2;
use adsweyl::projective::{minkowski_length, transition_derivative_probe};
use adsweyl::solver::*;
use adsweyl::surfaces::*;

type Outcome = Result<String, String>;

fn metric(c: &VertexConfig) -> Result<ConeMetric, String> {
    let s = convex_boundary_auto(c, 5, 3, 9).map_err(|e| e.to_string())?;
    intrinsic_metric(&s).map_err(|e| e.to_string())
}

fn hull(c: &VertexConfig) -> Result<HullSurface, String> {
    convex_boundary_auto(c, 5, 3, 9).map_err(|e| e.to_string())
}

fn check(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn gauss_bonnet() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let n = 1 + k % 4;
        for g in [Geometry::Euclidean, Geometry::Hyperbolic] {
            let m = random_metric(&mut rng, n, g).map_err(|e| e.to_string())?;
            let total = m.curvature().total();
            // κ = 2π − angle, so hyperbolic area enters with a minus sign
            let err = match g {
                Geometry::Euclidean => total + 4.0 * PI,
                Geometry::Hyperbolic => total - m.area() + 4.0 * PI,
            };
            worst = worst.max(err.abs());
        }
    }
    check(worst < 1e-9, format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e}"))
}

fn transition_derivative() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ts = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let (mut worst_err, mut worst_slope) = (0.0f64, f64::INFINITY);
    let mut done = 0;
    while done < 20 {
        let u = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let w = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        if minkowski_length(&(u - w)).map_or(true, |d| d < 0.3) {
            continue;
        }
        let r = transition_derivative_probe(&u, &w, &ts).map_err(|e| e.to_string())?;
        worst_err = worst_err.max(r.errors[4]);
        worst_slope = worst_slope.min(r.slope.unwrap_or(f64::INFINITY));
        done += 1;
    }
    check(
        worst_err < 1e-4 && worst_slope >= 1.9,
        format!("error at 1e-3 {worst_err:e}, min slope {worst_slope}"),
    )?;
    Ok(format!(
        "error at t=1e-3 {worst_err:.2e}, min slope {worst_slope:.3}"
    ))
}

fn area_formula() -> Outcome {
    let rep = build_genus2(&[2.0, 2.0, 2.0, 0.0, 0.0, 0.0]).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for r in [0.3, 0.6, 1.2, PI / 2.0 - 0.01] {
        let a = fuchsian_level_area(&rep, r, 1_000_000, 3);
        let expected = 4.0 * PI * r.sin().powi(2);
        worst = worst.max((a / expected - 1.0).abs());
    }
    check(worst < 0.01, format!("max relative error {worst:e}"))?;
    Ok(format!("max relative error {worst:.2e}"))
}

fn forward_concavity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    for k in 0..20 {
        let c = random_ads_config(&mut rng, 1 + k % 3).map_err(|e| e.to_string())?;
        let s = convex_boundary_auto(&c, 5, 3, 8).map_err(|e| e.to_string())?;
        let m = intrinsic_metric(&s).map_err(|e| e.to_string())?;
        worst = worst.max(
            m.curvature()
                .kappa
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max),
        );
        check(
            m.is_strict(),
            format!("instance {k} is not strictly concave"),
        )?;
    }
    Ok(format!("largest curvature {worst:.4}"))
}

fn minkowski_roundtrip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = SolveOptions::default();
    let (mut worst_res, mut worst_scale) = (0.0f64, 0.0f64);
    for k in 0..10 {
        let truth = random_minkowski_config(&mut rng, 1 + k % 3).map_err(|e| e.to_string())?;
        let Ambient::Minkowski { rep, .. } = &truth.geometry else {
            unreachable!()
        };
        let target = metric(&truth)?;
        let x = MinkowskiGauge::new(rep, Side::FutureConvex)
            .coords(&truth)
            .map_err(|e| e.to_string())?;
        let x0: Vec<f64> = x
            .iter()
            .map(|v| v + 0.05 * v.abs().max(0.1) * rng.gen_range(-1.0..1.0))
            .collect();
        let sol = solve_minkowski_from(rep, &target, &x0, &opts)
            .map_err(|e| format!("instance {k}: {e}"))?;
        let scale = target.max_length();
        worst_res = worst_res.max(sol.residual / scale);
        check(
            sol.residual < 1e-8 * scale,
            format!("instance {k}: residual {:e}", sol.residual),
        )?;
        check(
            hull(&sol.config)?.same_celluation(&hull(&truth)?),
            format!("instance {k}: celluation changed"),
        )?;
        let base: Vec<f64> = sol
            .coeffs
            .iter()
            .copied()
            .chain(sol.points.iter().flat_map(|p| p.iter().copied()))
            .collect();
        for lambda in [0.5, 2.0] {
            let xl: Vec<f64> = x0.iter().map(|v| v * lambda).collect();
            let s = solve_minkowski_from(rep, &target.scale(lambda), &xl, &opts)
                .map_err(|e| format!("instance {k}, scale {lambda}: {e}"))?;
            let got: Vec<f64> = s
                .coeffs
                .iter()
                .copied()
                .chain(s.points.iter().flat_map(|p| p.iter().copied()))
                .collect();
            let want: Vec<f64> = base.iter().map(|v| v * lambda).collect();
            let d = max_diff(&got, &want);
            worst_scale = worst_scale.max(d);
            check(
                d < 1e-6,
                format!("instance {k}: scaling by {lambda} off by {d:e}"),
            )?;
        }
    }
    Ok(format!(
        "max residual/scale {worst_res:.2e}, max scaling deviation {worst_scale:.2e}"
    ))
}

fn ads_realization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = SolveOptions::default();
    let (mut worst_res, mut worst_sv) = (0.0f64, f64::INFINITY);
    for k in 0..5 {
        let truth = random_ads_config(&mut rng, 1 + k % 3).map_err(|e| e.to_string())?;
        let Ambient::AdS { left, .. } = &truth.geometry else {
            unreachable!()
        };
        let target = metric(&truth)?;
        let sol = solve_ads(left, &target, &opts).map_err(|e| format!("instance {k}: {e}"))?;
        let scale = target.max_length();
        worst_res = worst_res.max(sol.residual / scale);
        worst_sv = worst_sv.min(sol.trace.min_sv_ratio());
        check(
            sol.residual < 1e-7 * scale,
            format!("instance {k}: residual {:e}", sol.residual),
        )?;
        check(
            sol.trace.min_sv_ratio() >= 1e-6,
            format!("instance {k}: sv ratio {:e}", sol.trace.min_sv_ratio()),
        )?;
    }
    Ok(format!(
        "max residual/scale {worst_res:.2e}, min singular-value ratio {worst_sv:.2e}"
    ))
}

fn pair_realization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SolveOptions::default();
    let mut worst_res = 0.0f64;
    for (k, (np, nm)) in [(1, 1), (2, 1), (2, 2)].into_iter().enumerate() {
        let (p, m) = random_pair_config(&mut rng, np, nm).map_err(|e| e.to_string())?;
        let (tp, tm) = (metric(&p)?, metric(&m)?);
        let sol = solve_pair(&tp, &tm, &PairStart::default(), &opts)
            .map_err(|e| format!("instance {k}: {e}"))?;
        let scale = tp.max_length().max(tm.max_length());
        worst_res = worst_res.max(sol.residual / scale);
        check(
            sol.residual < 1e-7 * scale,
            format!("instance {k}: residual {:e}", sol.residual),
        )?;
    }
    let (p, m) = symmetric_pair_config(
        &[2.1, 1.9, 2.0, 0.2, -0.1, 0.1],
        &[(0.0, 0.0), (0.5, 0.3)],
        0.3,
    )
    .map_err(|e| e.to_string())?;
    let sol = solve_pair(&metric(&p)?, &metric(&m)?, &PairStart::default(), &opts)
        .map_err(|e| format!("symmetric: {e}"))?;
    let gap = sol.spectrum_gap();
    check(gap < 1e-6, format!("symmetric spectrum gap {gap:e}"))?;
    Ok(format!(
        "max residual/scale {worst_res:.2e}, symmetric spectrum gap {gap:.2e}"
    ))
}

fn subdivision() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..5 {
        let c0 = random_minkowski_config(&mut rng, 1 + k % 3).map_err(|e| e.to_string())?;
        let r = transition_check(&c0, &[0.05, 0.025], 8, 3).map_err(|e| e.to_string())?;
        for s in &r.steps {
            check(
                s.subdivision == Some(true),
                format!(
                    "fixture {k} at t = {}: {:?} {:?}",
                    s.t, s.subdivision, s.error
                ),
            )?;
        }
    }
    Ok("5 fixtures at t = 0.05, 0.025".into())
}

fn uniqueness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = SolveOptions::default();
    let mut spread = 0.0f64;
    for k in 0..3 {
        let c = random_ads_config(&mut rng, 1 + k % 2).map_err(|e| e.to_string())?;
        let Ambient::AdS { left, .. } = &c.geometry else {
            unreachable!()
        };
        let r = probe_uniqueness_ads(left, &metric(&c)?.scale(0.1), 8, 100 + k as u64, &opts);
        spread = spread.max(r.spread);
        check(
            r.unique(),
            format!(
                "AdS fixture {k}: {} clusters, converged {}",
                r.clusters, r.all_converged
            ),
        )?;
    }
    let (p, m) = random_pair_config(&mut rng, 1, 1).map_err(|e| e.to_string())?;
    let r = probe_uniqueness_pair(
        &metric(&p)?.scale(0.1),
        &metric(&m)?.scale(0.1),
        &PairStart::default(),
        8,
        200,
        &opts,
    );
    spread = spread.max(r.spread);
    check(
        r.unique(),
        format!(
            "pair fixture: {} clusters, converged {}",
            r.clusters, r.all_converged
        ),
    )?;
    Ok(format!("single cluster on 4 fixtures, max spread {spread:.2e} (membership in the uniqueness set is not tested)"))
}

fn flip_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let sorted = |m: &ConeMetric| {
        let mut a = m.cone_angles();
        a.sort_by(f64::total_cmp);
        a
    };
    let (mut done, mut worst) = (0, 0.0f64);
    while done < 100 {
        let g = if done % 2 == 0 {
            Geometry::Euclidean
        } else {
            Geometry::Hyperbolic
        };
        let m = random_metric(&mut rng, 1 + done % 4, g).map_err(|e| e.to_string())?;
        let e = rng.gen_range(0..m.lengths.len());
        let Ok(f) = m.flip(e) else { continue };
        let back = f.flip(e).map_err(|err| err.to_string())?;
        worst = worst.max(max_diff(&sorted(&m), &sorted(&f)));
        // flips keep edge indices; marked-edge matching is ambiguous on non-concave metrics
        let same = (0..m.lengths.len()).all(|i| m.tri.same_edge(i, &back.tri, i));
        check(same, "flip is not involutive on the triangulation".into())?;
        let d = max_diff(&m.lengths, &back.lengths);
        check(d < 1e-9, format!("flip twice changes lengths by {d:e}"))?;
        done += 1;
    }
    check(worst < 1e-9, format!("angle multiset changed by {worst:e}"))?;
    Ok(format!("max angle change {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("Gauss-Bonnet", gauss_bonnet, Duration::from_secs(1)),
        (
            "transition derivative",
            transition_derivative,
            Duration::from_secs(1),
        ),
        ("level-surface area", area_formula, Duration::from_secs(120)),
        (
            "forward concavity",
            forward_concavity,
            Duration::from_secs(300),
        ),
        (
            "Minkowski roundtrip",
            minkowski_roundtrip,
            Duration::from_secs(600),
        ),
        (
            "AdS realization",
            ads_realization,
            Duration::from_secs(1800),
        ),
        (
            "pair realization",
            pair_realization,
            Duration::from_secs(2700),
        ),
        (
            "subdivision at small t",
            subdivision,
            Duration::from_secs(600),
        ),
        ("uniqueness probe", uniqueness, Duration::from_secs(1800)),
        ("flip invariance", flip_invariance, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let (verdict, detail) = match (&out, took <= *budget) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over time budget {budget:?}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict} {name}: {detail} [{:.2?}]",
            i + 1,
            took
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
