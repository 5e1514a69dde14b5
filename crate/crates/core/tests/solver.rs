use nalgebra::Vector3;
use rand::rngs::StdRng;
use rand::SeedableRng;

use adsweyl::cone_metric::{ConeMetric, Geometry};
use adsweyl::fixtures::{random_ads_config, random_metric, random_minkowski_config};
use adsweyl::fuchsian::Cocycle;
use adsweyl::projective::loglog_slope;
use adsweyl::solver::{
    jacobian_minkowski, residual, solve_minkowski, MinkowskiGauge, SolveOptions, SolveTrace,
};
use adsweyl::surfaces::{convex_boundary_auto, intrinsic_metric, Ambient, VertexConfig};
use adsweyl::Error;

fn metric(c: &VertexConfig) -> ConeMetric {
    intrinsic_metric(&convex_boundary_auto(c, 5, 3, 8).unwrap()).unwrap()
}

fn mink_parts(c: &VertexConfig) -> (Cocycle, Vec<Vector3<f64>>) {
    let Ambient::Minkowski { tau, .. } = &c.geometry else {
        panic!("not Minkowski")
    };
    (tau.clone(), c.minkowski_points())
}

#[test]
fn residual_vanishes_on_own_metric() {
    let mut rng = StdRng::seed_from_u64(31);
    let opts = SolveOptions::default();
    for c in [
        random_minkowski_config(&mut rng, 2).unwrap(),
        random_ads_config(&mut rng, 2).unwrap(),
    ] {
        let m = metric(&c);
        let r = residual(&c, &m, &opts).unwrap();
        assert!(r.norm() < 1e-12 * m.max_length().max(1.0), "{}", r.norm());
        assert_eq!(r.values.len(), m.lengths.len());
        assert_eq!(r.flips, 0);
    }
}

#[test]
fn minkowski_residual_is_homogeneous() {
    let mut rng = StdRng::seed_from_u64(32);
    let c = random_minkowski_config(&mut rng, 2).unwrap();
    let m = metric(&c);
    let (tau, pts) = mink_parts(&c);
    for lambda in [0.5, 3.0] {
        let scaled = VertexConfig::minkowski(
            tau.scaled(lambda),
            pts.iter().map(|p| p * lambda).collect(),
            c.side,
        )
        .unwrap();
        let r = residual(&scaled, &m.scale(lambda), &SolveOptions::default()).unwrap();
        assert!(r.norm() < 1e-10 * lambda * m.max_length(), "{}", r.norm());
    }
}

#[test]
fn residual_grows_linearly_under_perturbation() {
    let mut rng = StdRng::seed_from_u64(33);
    let c = random_minkowski_config(&mut rng, 1).unwrap();
    let m = metric(&c);
    let (tau, pts) = mink_parts(&c);
    let dir = Vector3::new(0.3, -0.5, 0.2);
    let eps = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let norms: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let moved = vec![pts[0] + dir * e];
            let c2 = VertexConfig::minkowski(tau.clone(), moved, c.side).unwrap();
            residual(&c2, &m, &SolveOptions::default()).unwrap().norm()
        })
        .collect();
    let slope = loglog_slope(&eps, &norms).unwrap();
    assert!((slope - 1.0).abs() < 0.1, "{slope} from {norms:?}");
}

#[test]
fn coboundary_shift_is_a_gauge_symmetry() {
    let mut rng = StdRng::seed_from_u64(34);
    let c = random_minkowski_config(&mut rng, 2).unwrap();
    let m = metric(&c);
    let (tau, pts) = mink_parts(&c);
    let x = Vector3::new(0.2, -0.1, 0.05);
    // conjugating by the translation x changes τ by −(ρx − x)
    let shifted = VertexConfig::minkowski(
        tau.add(&Cocycle::coboundary(&tau.base, &x).scaled(-1.0)),
        pts.iter().map(|p| p + x).collect(),
        c.side,
    )
    .unwrap();
    let r = residual(&shifted, &m, &SolveOptions::default()).unwrap();
    assert!(r.norm() < 1e-9 * m.max_length(), "{}", r.norm());

    let gauge = MinkowskiGauge::new(&tau.base, c.side);
    let (a, b) = (gauge.coords(&c).unwrap(), gauge.coords(&shifted).unwrap());
    let d = a
        .iter()
        .zip(&b)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    assert!(d < 1e-9, "{d}");
    let back = gauge.coords(&gauge.config(&a).unwrap()).unwrap();
    let d = a
        .iter()
        .zip(&back)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max);
    assert!(d < 1e-10, "{d}");
}

#[test]
fn jacobian_is_nondegenerate_at_a_solution() {
    let mut rng = StdRng::seed_from_u64(35);
    let c = random_minkowski_config(&mut rng, 1).unwrap();
    let m = metric(&c);
    let (tau, _) = mink_parts(&c);
    let opts = SolveOptions::default();
    let x = MinkowskiGauge::new(&tau.base, c.side).coords(&c).unwrap();
    let (j, sv) = jacobian_minkowski(&tau.base, &x, &m, &opts).unwrap();
    assert_eq!(j.ncols(), x.len());
    assert_eq!(j.nrows(), m.lengths.len());
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(min / max > 1e-6, "{sv:?}");

    // central differences agree with a coarser forward difference to first order
    let coarse = SolveOptions {
        fd_step: 1e-4,
        ..opts.clone()
    };
    let (j2, _) = jacobian_minkowski(&tau.base, &x, &m, &coarse).unwrap();
    let diff = (&j - &j2).abs().max();
    assert!(diff < 1e-3 * j.abs().max(), "{diff}");
}

#[test]
fn minkowski_solve_recovers_random_target() {
    let mut rng = StdRng::seed_from_u64(36);
    let c = random_minkowski_config(&mut rng, 1).unwrap();
    let m = metric(&c);
    let (tau, _) = mink_parts(&c);
    let sol = solve_minkowski(&tau.base, &m, &SolveOptions::default()).unwrap();
    assert!(sol.residual < 1e-9 * m.max_length(), "{}", sol.residual);
    let r = residual(&sol.config, &m, &SolveOptions::default()).unwrap();
    assert!(r.norm() < 1e-8 * m.max_length());
    for line in sol.trace.to_jsonl().lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn geometry_mismatch_is_rejected() {
    let mut rng = StdRng::seed_from_u64(37);
    let hyperbolic = random_metric(&mut rng, 1, Geometry::Hyperbolic).unwrap();
    let c = random_minkowski_config(&mut rng, 1).unwrap();
    let (tau, _) = mink_parts(&c);
    let err = solve_minkowski(&tau.base, &hyperbolic, &SolveOptions::default()).unwrap_err();
    assert!(
        matches!(
            err.error,
            Error::InvalidInput(_) | Error::InfeasibleTarget(_)
        ),
        "{err}"
    );
}

#[test]
fn options_reject_unknown_fields() {
    assert!(serde_json::from_str::<SolveOptions>(r#"{"tol": 1e-9}"#).is_ok());
    assert!(serde_json::from_str::<SolveOptions>(r#"{"tolerance": 1e-9}"#).is_err());
}

#[test]
fn empty_trace_has_infinite_ratio() {
    let t: SolveTrace = serde_json::from_str(r#"{"steps": [], "verdict": "Diverged"}"#).unwrap();
    assert!(t.min_sv_ratio().is_infinite());
    assert_eq!(t.to_jsonl().lines().count(), 1);
}
