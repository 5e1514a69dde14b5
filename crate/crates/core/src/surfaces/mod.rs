//! Equivariant vertex configurations and their convex hull boundaries.

mod area;
mod boundary;
mod obj;
mod transition;

use std::sync::Arc;

use nalgebra::{Matrix4, Vector2, Vector3, Vector4};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fuchsian::{ball, fixed_points, Cocycle, FuchsianRep, GroupBall, Word};
use crate::projective::{boundary_point, classify, isom_matrix, PointClass, ProjPoint};

pub use area::fuchsian_level_area;
pub use boundary::{
    convex_boundary, convex_boundary_auto, convex_position, intrinsic_metric, ConvexPosition,
    HullFace, HullSurface, Label,
};
pub use obj::to_obj;
pub use transition::{
    is_subdivision, minkowski_to_ads, transition_check, TransitionReport, TransitionStep,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    FutureConvex,
    PastConvex,
}

#[derive(Debug, Clone)]
pub enum Ambient {
    AdS {
        left: FuchsianRep,
        right: FuchsianRep,
    },
    Minkowski {
        rep: FuchsianRep,
        tau: Cocycle,
    },
}

/// One lift per marked point, in homogeneous coordinates (x₄ = 1 in the Minkowski case).
#[derive(Debug, Clone)]
pub struct VertexConfig {
    pub geometry: Ambient,
    pub points: Vec<Vector4<f64>>,
    pub side: Side,
}

impl VertexConfig {
    pub fn ads(
        left: FuchsianRep,
        right: FuchsianRep,
        points: Vec<ProjPoint>,
        side: Side,
    ) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if classify(p) != PointClass::AdS {
                return Err(Error::InvalidInput(format!(
                    "marked point {i} is not in AdS"
                )));
            }
        }
        let points = points.iter().map(|p| p.normalized().0).collect();
        Ok(VertexConfig {
            geometry: Ambient::AdS { left, right },
            points,
            side,
        })
    }

    pub fn minkowski(tau: Cocycle, points: Vec<Vector3<f64>>, side: Side) -> Result<Self> {
        if points.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidInput("non-finite Minkowski point".into()));
        }
        let rep = tau.base.clone();
        let points = points
            .iter()
            .map(|p| Vector4::new(p[0], p[1], p[2], 1.0))
            .collect();
        Ok(VertexConfig {
            geometry: Ambient::Minkowski { rep, tau },
            points,
            side,
        })
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn is_ads(&self) -> bool {
        matches!(self.geometry, Ambient::AdS { .. })
    }

    /// Minkowski coordinates of the marked points (Minkowski configurations only).
    pub fn minkowski_points(&self) -> Vec<Vector3<f64>> {
        self.points
            .iter()
            .map(|x| Vector3::new(x[0], x[1], x[2]) / x[3])
            .collect()
    }

    /// Homogeneous matrix of a group element.
    pub fn element_matrix(&self, w: &Word) -> Matrix4<f64> {
        match &self.geometry {
            Ambient::AdS { left, right } => isom_matrix(&left.evaluate(w), &right.evaluate(w)),
            Ambient::Minkowski { tau, .. } => tau.affine_matrix(w),
        }
    }

    /// Homogeneous matrices of all elements of a ball.
    pub fn ball_matrices(&self, b: &GroupBall) -> Vec<Matrix4<f64>> {
        match &self.geometry {
            Ambient::AdS { left, right } => {
                let l = b.matrices(left);
                let r = b.matrices(right);
                l.iter()
                    .zip(&r)
                    .map(|(gl, gr)| isom_matrix(gl, gr))
                    .collect()
            }
            Ambient::Minkowski { tau, .. } => tau.ball_matrices(b),
        }
    }

    /// Same configuration moved by a global isometry (AdS: (g_l, g_r); Minkowski: affine 4×4).
    pub fn transformed(&self, m: &Matrix4<f64>) -> VertexConfig {
        let mut out = self.clone();
        out.points = self.points.iter().map(|x| m * x).collect();
        out
    }

    /// Lifted distance between marked point a and h·(marked point b).
    pub fn edge_length(&self, a: usize, b: usize, h: &Word) -> Result<f64> {
        let pa = self.points[a];
        let pb = self.element_matrix(h) * self.points[b];
        match &self.geometry {
            Ambient::AdS { .. } => crate::projective::ads_distance(&ProjPoint(pa), &ProjPoint(pb))
                .ok_or_else(|| {
                    Error::NonSpacelikeFace(format!("edge ({a},{b},{h}) is not spacelike"))
                }),
            Ambient::Minkowski { .. } => {
                let d = Vector3::new(pb[0], pb[1], pb[2]) / pb[3]
                    - Vector3::new(pa[0], pa[1], pa[2]) / pa[3];
                crate::projective::minkowski_length(&d).ok_or_else(|| {
                    Error::NonSpacelikeFace(format!("edge ({a},{b},{h}) is not spacelike"))
                })
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitPoint {
    pub id: usize,
    /// Index of the group element in the orbit's ball.
    pub elem: usize,
    pub lift: Vector4<f64>,
}

#[derive(Debug, Clone)]
pub struct Orbit {
    pub ball: Arc<GroupBall>,
    pub max_len: usize,
    pub points: Vec<OrbitPoint>,
}

impl Orbit {
    pub fn word(&self, p: &OrbitPoint) -> &Word {
        &self.ball.words[p.elem]
    }
}

/// Images of the marked points under all elements of word length ≤ L.
pub fn orbit(c: &VertexConfig, max_len: usize) -> Orbit {
    let b = ball(max_len);
    let mats = c.ball_matrices(&b);
    let points = (0..c.points.len())
        .flat_map(|id| (0..b.len()).map(move |e| (id, e)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(id, elem)| OrbitPoint {
            id,
            elem,
            lift: mats[elem] * c.points[id],
        })
        .collect();
    Orbit {
        ball: b,
        max_len,
        points,
    }
}

#[derive(Debug, Clone)]
pub struct LimitSample {
    pub point: ProjPoint,
    pub word: Word,
    /// Attracting fixed lines of the left and right images.
    pub left: Vector2<f64>,
    pub right: Vector2<f64>,
}

#[derive(Debug, Clone)]
pub struct LimitSetSample {
    pub points: Vec<LimitSample>,
    pub truncation: usize,
    /// Words whose image was not hyperbolic.
    pub skipped: Vec<Word>,
}

fn line_angle(v: &Vector2<f64>) -> f64 {
    let a = v[1].atan2(v[0]);
    if a < 0.0 {
        a + std::f64::consts::PI
    } else {
        a
    }
}

/// Attracting fixed-point pairs of all non-trivial elements with word length ≤ L.
pub fn limit_set_sample(left: &FuchsianRep, right: &FuchsianRep, max_len: usize) -> LimitSetSample {
    let b = ball(max_len);
    let ml = b.matrices(left);
    let mr = b.matrices(right);
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for i in 1..b.len() {
        match (fixed_points(&ml[i]), fixed_points(&mr[i])) {
            (Ok((l, _)), Ok((r, _))) => points.push(LimitSample {
                point: boundary_point(&l, &r),
                word: b.words[i].clone(),
                left: l,
                right: r,
            }),
            _ => skipped.push(b.words[i].clone()),
        }
    }
    LimitSetSample {
        points,
        truncation: max_len,
        skipped,
    }
}

impl LimitSetSample {
    /// Whether the samples lie on the graph of an orientation-preserving circle map,
    /// i.e. the right angles are cyclically increasing in the order of the left angles.
    pub fn is_achronal(&self) -> bool {
        let mut pairs: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|s| (line_angle(&s.left), line_angle(&s.right)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let tol = 1e-9;
        pairs.dedup_by(|a, b| (a.0 - b.0).abs() < tol && (a.1 - b.1).abs() < tol);
        if pairs.len() < 3 {
            return true;
        }
        let n = pairs.len();
        let mut descents = 0;
        for i in 0..n {
            let (l0, r0) = pairs[i];
            let (l1, r1) = pairs[(i + 1) % n];
            if (l1 - l0).abs() < tol && i + 1 < n {
                // two samples with the same left point must share the right point
                if (r1 - r0).abs() > tol {
                    return false;
                }
                continue;
            }
            if r1 < r0 - tol {
                descents += 1;
            }
        }
        descents <= 1
    }

    /// Lifts with signs propagated along the left-angle order.
    pub fn consistent_lifts(&self) -> Vec<Vector4<f64>> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| {
            line_angle(&self.points[a].left).total_cmp(&line_angle(&self.points[b].left))
        });
        let mut out = vec![Vector4::zeros(); self.points.len()];
        let mut prev: Option<Vector4<f64>> = None;
        for i in idx {
            let mut x = self.points[i].point.0;
            x /= x.norm();
            if let Some(p) = prev {
                if p.dot(&x) < 0.0 {
                    x = -x;
                }
            }
            out[i] = x;
            prev = Some(x);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::build_genus2;
    use crate::projective::co_minkowski_chart;

    fn rep() -> FuchsianRep {
        build_genus2(&[2.2, 2.0, 1.8, 0.3, -0.2, 0.1]).unwrap()
    }

    #[test]
    fn orbit_radius_zero_is_the_input() {
        let r = rep();
        let c = VertexConfig::minkowski(
            Cocycle::zero(&r),
            vec![Vector3::new(0.1, 0.0, 1.0)],
            Side::FutureConvex,
        )
        .unwrap();
        let o = orbit(&c, 0);
        assert_eq!(o.points.len(), 1);
        assert!(o.word(&o.points[0]).is_empty());
        assert_eq!(orbit(&c, 1).points.len(), 9);
    }

    #[test]
    fn orbit_is_equivariant() {
        let r = rep();
        let r2 = build_genus2(&[2.0, 2.1, 1.9, 0.0, 0.4, -0.3]).unwrap();
        let p = ProjPoint::from_coords([0.1, 0.05, 0.2, 1.0]).unwrap();
        let c = VertexConfig::ads(r, r2, vec![p], Side::FutureConvex).unwrap();
        let o = orbit(&c, 2);
        for l in [1i8, -2, 3, -4] {
            let g = c.element_matrix(&Word::gen(l));
            for q in o.points.iter().filter(|q| o.word(q).len() <= 1) {
                let moved = g * q.lift;
                let w = Word::gen(l).mul(o.word(q));
                let expect = c.element_matrix(&w) * c.points[q.id];
                assert!(ProjPoint(moved).proj_eq(&ProjPoint(expect), 1e-10));
                let i = o.ball.index_of(&w).unwrap();
                let target = o
                    .points
                    .iter()
                    .find(|p| p.elem == i && p.id == q.id)
                    .unwrap();
                assert!(ProjPoint(moved).proj_eq(&ProjPoint(target.lift), 1e-9));
            }
        }
    }

    #[test]
    fn diagonal_limit_set_lies_on_core_circle() {
        let r = rep();
        let s = limit_set_sample(&r, &r, 3);
        assert_eq!(s.points.len(), 456);
        for p in &s.points {
            assert_eq!(classify(&p.point), PointClass::BoundaryAdS);
            let x = p.point.0;
            assert!(x[3].abs() / x.norm() < 1e-9);
            let z = co_minkowski_chart(&p.point).unwrap();
            assert!((z[0] * z[0] + z[1] * z[1] - 1.0).abs() < 1e-9);
        }
        assert!(s.is_achronal());
    }

    #[test]
    fn limit_samples_nest_and_are_achronal() {
        let l = rep();
        let r = build_genus2(&[2.0, 2.1, 1.9, 0.0, 0.4, -0.3]).unwrap();
        let s3 = limit_set_sample(&l, &r, 3);
        let s4 = limit_set_sample(&l, &r, 4);
        assert!(s3.is_achronal() && s4.is_achronal());
        for p in &s3.points {
            assert!(s4.points.iter().any(|q| q.point.proj_eq(&p.point, 1e-9)));
        }
    }

    #[test]
    fn achronality_detects_reversal() {
        let l = rep();
        let s = limit_set_sample(&l, &l, 2);
        let mut bad = s.clone();
        for p in &mut bad.points {
            p.right = Vector2::new(p.right[0], -p.right[1]);
        }
        assert!(!bad.is_achronal());
    }
}
