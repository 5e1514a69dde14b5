//! Generators for test and benchmark configurations.

use nalgebra::{Vector3, Vector4};
use rand::Rng;

use crate::cone_metric::{ConeMetric, Geometry, MarkedTriangulation};
use crate::error::{Error, Result};
use crate::fuchsian::{build_genus2, fn_tangent_matrix, Cocycle};
use crate::projective::ProjPoint;
use crate::surfaces::{convex_boundary_auto, convex_position, ConvexPosition, Side, VertexConfig};

/// Hull radius used when validating generated configurations.
pub const FIXTURE_RADIUS: usize = 8;
const ATTEMPTS: usize = 40;

/// Point of the hyperboloid of the given radius above (a, b).
pub fn hyperboloid_point(a: f64, b: f64, radius: f64) -> Vector3<f64> {
    Vector3::new(a, b, (radius * radius + a * a + b * b).sqrt())
}

/// One point at the apex and the rest on a ring, all on the hyperboloid of the given radius.
pub fn template_points(n: usize, radius: f64) -> Vec<Vector3<f64>> {
    let ring = 0.6f64;
    (0..n)
        .map(|k| {
            if k == 0 {
                return Vector3::new(0.0, 0.0, radius);
            }
            let th = 2.0 * std::f64::consts::PI * (k - 1) as f64 / (n - 1) as f64 + 0.3;
            let r = radius * ring.sinh();
            hyperboloid_point(r * th.cos(), r * th.sin(), radius)
        })
        .collect()
}

/// Fenchel–Nielsen coordinates near the reference point.
pub fn random_fn_coords<R: Rng>(rng: &mut R) -> [f64; 6] {
    std::array::from_fn(|i| {
        if i < 3 {
            rng.gen_range(1.8..2.4)
        } else {
            rng.gen_range(-0.3..0.3)
        }
    })
}

fn random_direction<R: Rng>(rng: &mut R, size: f64) -> [f64; 6] {
    std::array::from_fn(|_| rng.gen_range(-size..size))
}

/// Points (a, b) in a disk, with the first one at the origin.
fn random_disk<R: Rng>(rng: &mut R, n: usize, r: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            if k == 0 {
                return (0.0, 0.0);
            }
            let th = 2.0 * std::f64::consts::PI * (k - 1) as f64 / (n - 1) as f64
                + rng.gen_range(-0.4..0.4);
            let rr = r * rng.gen_range(0.6..1.0);
            (rr * th.cos(), rr * th.sin())
        })
        .collect()
}

fn strict(c: &VertexConfig) -> bool {
    convex_position(c, FIXTURE_RADIUS) == ConvexPosition::Strict
        && convex_boundary_auto(c, 5, 3, FIXTURE_RADIUS).is_ok()
}

/// Strict future-convex Minkowski configuration with a cocycle from a Fenchel–Nielsen path.
pub fn random_minkowski_config<R: Rng>(rng: &mut R, n: usize) -> Result<VertexConfig> {
    for _ in 0..ATTEMPTS {
        let fnc = random_fn_coords(rng);
        let rep = build_genus2(&fnc)?;
        let delta = random_direction(rng, 0.6);
        let d = fn_tangent_matrix(&fnc)?;
        let v = d * nalgebra::DVector::from_column_slice(&delta);
        let tau = Cocycle::from_vector(&rep, v.as_slice());
        let pts = random_disk(rng, n, 1.0)
            .into_iter()
            .map(|(a, b)| hyperboloid_point(a, b, 2.0))
            .collect();
        let c = VertexConfig::minkowski(tau, pts, Side::FutureConvex)?;
        if strict(&c) {
            return Ok(c);
        }
    }
    Err(Error::InvalidInput(
        "no strict Minkowski configuration found".into(),
    ))
}

fn chart_points(disk: &[(f64, f64)], s: f64, future: bool) -> Vec<ProjPoint> {
    disk.iter()
        .map(|&(a, b)| {
            let y = hyperboloid_point(a, b, 1.0) * s;
            let y3 = if future { y[2] } else { -y[2] };
            ProjPoint(Vector4::new(y[0], y[1], y3, 1.0))
        })
        .collect()
}

/// Strict future-convex AdS configuration near the diagonal with left holonomy FN(c).
pub fn random_ads_config<R: Rng>(rng: &mut R, n: usize) -> Result<VertexConfig> {
    for _ in 0..ATTEMPTS {
        let c = random_fn_coords(rng);
        let delta = random_direction(rng, 0.3);
        let left = build_genus2(&c)?;
        let right = build_genus2(&std::array::from_fn(|i| c[i] + delta[i]))?;
        let s = rng.gen_range(0.3..0.6);
        let pts = chart_points(&random_disk(rng, n, 0.9), s, true);
        let cfg = VertexConfig::ads(left, right, pts, Side::FutureConvex)?;
        if strict(&cfg) {
            return Ok(cfg);
        }
    }
    Err(Error::InvalidInput(
        "no strict AdS configuration found".into(),
    ))
}

/// Future- and past-convex configurations sharing the holonomy FN(c ∓ δ/2).
pub fn random_pair_config<R: Rng>(
    rng: &mut R,
    n_plus: usize,
    n_minus: usize,
) -> Result<(VertexConfig, VertexConfig)> {
    for _ in 0..ATTEMPTS {
        let c = random_fn_coords(rng);
        let delta = random_direction(rng, 0.3);
        let left = build_genus2(&std::array::from_fn(|i| c[i] - delta[i] / 2.0))?;
        let right = build_genus2(&std::array::from_fn(|i| c[i] + delta[i] / 2.0))?;
        let plus = chart_points(
            &random_disk(rng, n_plus, 0.9),
            rng.gen_range(0.3..0.5),
            true,
        );
        let minus = chart_points(
            &random_disk(rng, n_minus, 0.9),
            rng.gen_range(0.3..0.5),
            false,
        );
        let p = VertexConfig::ads(left.clone(), right.clone(), plus, Side::FutureConvex)?;
        let m = VertexConfig::ads(left, right, minus, Side::PastConvex)?;
        if strict(&p) && strict(&m) {
            return Ok((p, m));
        }
    }
    Err(Error::InvalidInput(
        "no strict pair configuration found".into(),
    ))
}

/// Fuchsian pair whose past points are the point reflections of the future ones through o.
pub fn symmetric_pair_config(
    fnc: &[f64; 6],
    disk: &[(f64, f64)],
    s: f64,
) -> Result<(VertexConfig, VertexConfig)> {
    let rep = build_genus2(fnc)?;
    let plus = chart_points(disk, s, true);
    let minus: Vec<ProjPoint> = plus
        .iter()
        .map(|p| ProjPoint(Vector4::new(-p.0[0], -p.0[1], -p.0[2], p.0[3])))
        .collect();
    let p = VertexConfig::ads(rep.clone(), rep.clone(), plus, Side::FutureConvex)?;
    let m = VertexConfig::ads(rep.clone(), rep, minus, Side::PastConvex)?;
    Ok((p, m))
}

/// Octagon triangulation refined by random splits up to n vertices, then scrambled by flips.
pub fn random_triangulation<R: Rng>(
    rng: &mut R,
    n: usize,
    flips: usize,
) -> Result<MarkedTriangulation> {
    let mut t = MarkedTriangulation::octagon();
    while t.n_vertices < n {
        let k = rng.gen_range(0..t.triangles.len());
        t = t.split(k)?;
    }
    for _ in 0..flips {
        let e = rng.gen_range(0..t.edges.len());
        if let Ok(f) = t.flip(e) {
            t = f;
        }
    }
    Ok(t)
}

/// Random metric with edge lengths in [1, 1.2], which satisfy every triangle inequality.
pub fn random_metric<R: Rng>(rng: &mut R, n: usize, geometry: Geometry) -> Result<ConeMetric> {
    let tri = random_triangulation(rng, n, 10)?;
    let lengths = (0..tri.edges.len())
        .map(|_| 1.0 + 0.2 * rng.gen::<f64>())
        .collect();
    ConeMetric::new(tri, lengths, geometry)
}
