//! Area of the level sets of the timelike distance to o, Fuchsian case.

use nalgebra::{Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::fuchsian::{linear_part, FuchsianRep, GroupBall};
use crate::projective::bilinear;

/// Largest ball radius tried when sizing the Dirichlet domain.
const MAX_BALL_RADIUS: f64 = 12.0;

/// Point at timelike distance r from o above the hyperboloid point with polar coordinates (s, θ).
fn level_point(r: f64, s: f64, th: f64) -> Vector4<f64> {
    let (c, sn) = (r.cos(), r.sin());
    Vector4::new(
        sn * s.sinh() * th.cos(),
        sn * s.sinh() * th.sin(),
        sn * s.cosh(),
        c,
    )
}

/// Induced area element of (s, θ) ↦ level_point, by central differences.
fn area_element(r: f64, s: f64, th: f64) -> f64 {
    let h = 1e-5;
    let ds = (level_point(r, s + h, th) - level_point(r, s - h, th)) / (2.0 * h);
    let dt = (level_point(r, s, th + h) - level_point(r, s, th - h)) / (2.0 * h);
    let (e, f, g) = (bilinear(&ds, &ds), bilinear(&ds, &dt), bilinear(&dt, &dt));
    (e * g - f * f).max(0.0).sqrt()
}

/// Translates of i that cut out its Dirichlet domain, nearest first, and the domain radius.
fn dirichlet_centers(rep: &FuchsianRep) -> (Vec<Vector3<f64>>, f64) {
    let z0 = Vector3::new(0.0, 0.0, 1.0);
    let mut radius = 5.0;
    loop {
        let b = GroupBall::geometric(&[rep], &[z0], radius, 3.0);
        let mut centers: Vec<Vector3<f64>> = b
            .matrices(rep)
            .iter()
            .skip(1)
            .map(|m| linear_part(m) * z0)
            .collect();
        centers.sort_by(|a, b| a[2].total_cmp(&b[2]));
        // pilot grid in polar coordinates for the farthest point of the domain
        let (n, s_max) = (240, radius / 2.0 + 1.0);
        let mut far: f64 = 0.0;
        for i in 0..n {
            let s = s_max * (i as f64 + 0.5) / n as f64;
            for j in 0..n {
                let th = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                let y = Vector3::new(s.sinh() * th.cos(), s.sinh() * th.sin(), s.cosh());
                if in_domain(&y, &centers) {
                    far = far.max(s + s_max / n as f64);
                }
            }
        }
        let needed = 2.0 * far + 0.5;
        if needed <= radius || radius >= MAX_BALL_RADIUS {
            return (centers, far + 0.25);
        }
        radius = needed.min(MAX_BALL_RADIUS);
    }
}

/// Closer to i than to every translate: −⟨y, i⟩ ≤ −⟨y, g·i⟩.
fn in_domain(y: &Vector3<f64>, centers: &[Vector3<f64>]) -> bool {
    !centers
        .iter()
        .any(|c| y[2] * c[2] - y[0] * c[0] - y[1] * c[1] < y[2])
}

/// Monte Carlo area of {x : timelike distance to o = r} modulo the diagonal action of ρ.
///
/// Samples are uniform in hyperbolic area on a disk about i containing its Dirichlet
/// domain and are kept when they lie in that domain.
pub fn fuchsian_level_area(rep: &FuchsianRep, r: f64, samples: usize, seed: u64) -> f64 {
    let (centers, disk_radius) = dirichlet_centers(rep);
    let cosh_max = disk_radius.cosh();
    let disk_area = 2.0 * std::f64::consts::PI * (cosh_max - 1.0);
    let chunks = 64usize;
    let per = samples.div_ceil(chunks);
    let total: f64 = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut acc = 0.0;
            for _ in 0..per {
                let u: f64 = rng.gen();
                let th: f64 = rng.gen::<f64>() * 2.0 * std::f64::consts::PI;
                let s = (1.0 + u * (cosh_max - 1.0)).acosh();
                let y = Vector3::new(s.sinh() * th.cos(), s.sinh() * th.sin(), s.cosh());
                if !in_domain(&y, &centers) {
                    continue;
                }
                // density of the uniform hyperbolic sample in (s, θ) is sinh s / disk_area
                acc += area_element(r, s, th) / s.sinh().max(1e-300);
            }
            acc
        })
        .sum();
    disk_area * total / (per * chunks) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::build_genus2;

    #[test]
    fn right_angle_level_has_full_area() {
        let rep = build_genus2(&[2.0, 2.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        let a = fuchsian_level_area(&rep, std::f64::consts::FRAC_PI_2, 400_000, 1);
        assert!((a / (4.0 * std::f64::consts::PI) - 1.0).abs() < 0.01, "{a}");
    }

    #[test]
    fn twisted_surface_has_full_area() {
        for fnc in [
            [2.2, 2.0, 1.8, 0.3, -0.2, 0.1],
            [1.5, 3.0, 1.0, 0.3, -1.0, 2.0],
        ] {
            let rep = build_genus2(&fnc).unwrap();
            let a = fuchsian_level_area(&rep, std::f64::consts::FRAC_PI_2, 200_000, 2);
            assert!(
                (a / (4.0 * std::f64::consts::PI) - 1.0).abs() < 0.02,
                "{fnc:?} {a}"
            );
        }
    }
}
