//! Boundary surfaces of orbit hulls, extracted vertex by vertex.
//!
//! The hull is never built globally. Around each fundamental vertex p a
//! candidate set C (p and its nearest chart neighbours) is grown until every
//! hull face of C at p has all other points of the cloud on its inner side.
//! Those faces are then the faces of the infinite hull at p. Faces of all
//! stars are translated to a canonical frame and deduplicated.

use nalgebra::{Matrix4, Vector3, Vector4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{limit_set_sample, Ambient, Side, VertexConfig};
use crate::cone_metric::{ConeMetric, Geometry, MarkedTriangulation};
use crate::error::{Error, Result};
use crate::fuchsian::{elem_eq, linear_part, reference_rep, GroupBall, Word};
use crate::hull::{convex_hull_about, Hull};
use crate::projective::{complement_basis, flip_q, future_field, ProjPlane};

/// Number of nearest neighbours seeding a star.
const STAR_SEED: usize = 48;
/// Star size at which the extraction gives up.
const MAX_STAR: usize = 2000;
/// Hyperbolic displacement radius per truncation level.
const RADIUS_PER_LEVEL: f64 = 1.0;
/// Extra displacement explored by the breadth-first ball construction.
const BFS_SLACK: f64 = 3.0;
/// Star vertices must stay this far inside the truncation radius.
const STABILITY_MARGIN: f64 = 1.0;
/// Relative tolerance for "on or beyond a face plane".
const PLANE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label {
    pub id: usize,
    pub word: Word,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullFace {
    /// Boundary cycle; the frame is the one where the first vertex sits at the identity.
    pub vertices: Vec<Label>,
    /// Supporting plane covector in the same frame; the hull lies on its negative side.
    pub plane: Vector4<f64>,
    pub spacelike: bool,
}

#[derive(Debug, Clone)]
pub struct HullSurface {
    pub side: Side,
    pub max_len: usize,
    pub limit_len: usize,
    /// Faces of the quotient celluation, one per orbit of faces.
    pub faces: Vec<HullFace>,
    /// Faces around each fundamental vertex, in the common frame (vertex i at the identity).
    pub stars: Vec<Vec<HullFace>>,
    pub config: VertexConfig,
    pub(crate) chart: Chart,
}

impl HullSurface {
    /// SHA-256 of the face celluation; independent of the words chosen for group elements
    /// and of the orientation of the boundary cycles.
    pub fn celluation_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let (a, b) = (0.137f64, -0.291f64);
        let z = Vector3::new(a, b, (1.0 + a * a + b * b).sqrt());
        let key = |w: &Word| {
            let y = linear_part(&reference_rep().evaluate(w)) * z;
            ((y[0] * 1e6).round() as i64, (y[1] * 1e6).round() as i64)
        };
        let mut faces: Vec<Vec<(usize, (i64, i64))>> = self
            .faces
            .iter()
            .map(|f| {
                let m = f.vertices.len();
                // cycle orientation follows the chart, so both directions are candidates
                (0..2 * m)
                    .map(|k| {
                        let at = |i: usize| {
                            if k < m {
                                &f.vertices[(k + i) % m]
                            } else {
                                &f.vertices[(k + m - i) % m]
                            }
                        };
                        let inv = at(0).word.inverse();
                        (0..m)
                            .map(|i| (at(i).id, key(&inv.mul(&at(i).word))))
                            .collect::<Vec<_>>()
                    })
                    .min()
                    .expect("nonempty face")
            })
            .collect();
        faces.sort();
        let mut h = Sha256::new();
        for f in &faces {
            for (id, (x, y)) in f {
                h.update(format!("{id}:{x}:{y};"));
            }
            h.update(b"|");
        }
        hex::encode(h.finalize())
    }

    pub fn boundary_flags(&self) -> Vec<bool> {
        self.faces.iter().map(|f| f.spacelike).collect()
    }

    /// Whether both surfaces have the same quotient faces (up to translation).
    pub fn same_celluation(&self, other: &HullSurface) -> bool {
        let matches = |reverse: bool| {
            self.faces.iter().all(|f| {
                let mut v = f.vertices.clone();
                if reverse {
                    v.reverse();
                }
                other.faces.iter().any(|g| same_face(&v, &g.vertices))
            })
        };
        self.faces.len() == other.faces.len() && (matches(false) || matches(true))
    }

    /// Fan triangulation of the quotient celluation.
    pub fn triangulation(&self) -> Result<MarkedTriangulation> {
        let mut tris = Vec::new();
        for f in &self.faces {
            let v = &f.vertices;
            for j in 1..v.len() - 1 {
                tris.push((
                    [v[0].id, v[j].id, v[j + 1].id],
                    [v[0].word.clone(), v[j].word.clone(), v[j + 1].word.clone()],
                ));
            }
        }
        MarkedTriangulation::from_corners(self.config.n_points(), &tris).map_err(|e| match e {
            Error::InvalidTriangulation(m) => Error::QuotientError(m),
            Error::SelfGluedEdge(e) => Error::QuotientError(format!("edge {e} is glued to itself")),
            other => other,
        })
    }

    pub fn chart_coords(&self, x: &Vector4<f64>) -> Option<Vector3<f64>> {
        self.chart.coords(&self.chart.reflect(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConvexPosition {
    NotConvex,
    Convex,
    Strict,
}

/// Affine chart {ℓ > 0}: x ↦ (uᵢ·x / ℓ(x)), applied after the optional time reversal.
#[derive(Debug, Clone)]
pub(crate) struct Chart {
    covector: Vector4<f64>,
    basis: [Vector4<f64>; 3],
    reversed: bool,
}

impl Chart {
    fn minkowski(reversed: bool) -> Chart {
        Chart {
            covector: Vector4::w(),
            basis: [Vector4::x(), Vector4::y(), Vector4::z()],
            reversed,
        }
    }

    fn through(p_hat: &Vector4<f64>, reversed: bool) -> Chart {
        let c = -flip_q(p_hat);
        let c = c / c.norm();
        Chart {
            covector: c,
            basis: complement_basis(&c),
            reversed,
        }
    }

    pub(crate) fn reflect(&self, x: &Vector4<f64>) -> Vector4<f64> {
        if self.reversed {
            Vector4::new(x[0], x[1], -x[2], x[3])
        } else {
            *x
        }
    }

    pub(crate) fn coords(&self, x: &Vector4<f64>) -> Option<Vector3<f64>> {
        let l = self.covector.dot(x);
        if l.abs() <= 1e-12 * x.norm() {
            return None;
        }
        Some(
            Vector3::new(
                self.basis[0].dot(x),
                self.basis[1].dot(x),
                self.basis[2].dot(x),
            ) / l,
        )
    }

    /// Projective covector of the chart plane n·z = off.
    fn covector_of(&self, n: &Vector3<f64>, off: f64) -> Vector4<f64> {
        self.basis[0] * n[0] + self.basis[1] * n[1] + self.basis[2] * n[2] - self.covector * off
    }

    /// Lift with ℓ = 1.
    fn unit_lift(&self, x: &Vector4<f64>) -> Vector4<f64> {
        x / self.covector.dot(x)
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Orbit { id: usize, elem: usize },
    Limit,
}

/// Direction in the hyperboloid model used to measure how far an element moves a marked point.
fn center_of(c: &VertexConfig, x: &Vector4<f64>) -> Vector3<f64> {
    let mut y = Vector3::new(x[0], x[1], x[2]) / x[3];
    if c.side == Side::PastConvex {
        y[2] = -y[2];
    }
    let n = y[2] * y[2] - y[0] * y[0] - y[1] * y[1];
    if y[2] > 0.0 && n > 1e-12 * y.norm_squared() {
        y / n.sqrt()
    } else {
        Vector3::z()
    }
}

/// Group elements used for the hull at truncation level L (displacement radius L).
pub(crate) fn hull_ball(c: &VertexConfig, level: usize) -> GroupBall {
    let centers: Vec<Vector3<f64>> = c.points.iter().map(|x| center_of(c, x)).collect();
    let reps: Vec<&crate::fuchsian::FuchsianRep> = match &c.geometry {
        Ambient::AdS { left, right } => vec![left, right],
        Ambient::Minkowski { rep, .. } => vec![rep],
    };
    GroupBall::geometric(&reps, &centers, level as f64 * RADIUS_PER_LEVEL, BFS_SLACK)
}

struct Cloud {
    coords: Vec<Vector3<f64>>,
    /// Reflected lifts with ℓ = 1.
    lifts: Vec<Vector4<f64>>,
    nodes: Vec<Node>,
    ball: GroupBall,
    ads: bool,
    chart: Chart,
}

impl Cloud {
    fn build(c: &VertexConfig, level: usize, limit_len: usize, with_limit: bool) -> Result<Cloud> {
        let reversed = c.side == Side::PastConvex;
        let b = hull_ball(c, level);
        let mats = c.ball_matrices(&b);
        let mut limit_lifts = Vec::new();
        let chart = match &c.geometry {
            Ambient::Minkowski { .. } => Chart::minkowski(reversed),
            Ambient::AdS { left, right } => {
                let s = limit_set_sample(left, right, limit_len.max(1));
                let tmp = Chart::minkowski(reversed);
                limit_lifts = s
                    .consistent_lifts()
                    .iter()
                    .map(|x| tmp.reflect(x))
                    .collect();
                let mut m = Vector4::zeros();
                for x in &limit_lifts {
                    m += x;
                }
                if m.norm() < 1e-9 * limit_lifts.len() as f64 {
                    return Err(Error::DegenerateCone);
                }
                Chart::through(&(m / m.norm()), reversed)
            }
        };
        let mut coords = Vec::new();
        let mut lifts = Vec::new();
        let mut nodes = Vec::new();
        for id in 0..c.n_points() {
            for (elem, m) in mats.iter().enumerate() {
                let x = chart.reflect(&(m * c.points[id]));
                let z = chart.coords(&x).ok_or(Error::ChartOverflow(0.0))?;
                coords.push(z);
                lifts.push(chart.unit_lift(&x));
                nodes.push(Node::Orbit { id, elem });
            }
        }
        if with_limit {
            for x in &limit_lifts {
                if let Some(z) = chart.coords(x) {
                    coords.push(z);
                    lifts.push(chart.unit_lift(x));
                    nodes.push(Node::Limit);
                }
            }
        }
        Ok(Cloud {
            coords,
            lifts,
            nodes,
            ball: b,
            ads: c.is_ads(),
            chart,
        })
    }

    fn fundamental(&self, id: usize) -> usize {
        id * self.ball.len()
    }
}

struct Star {
    members: Vec<usize>,
    /// None if p is not a vertex of the local hull.
    hull: Option<Hull>,
}

fn grow_star(cloud: &Cloud, pidx: usize) -> Result<Star> {
    let p = cloud.coords[pidx];
    let n = cloud.coords.len();
    let mut others: Vec<usize> = (0..n).filter(|&j| j != pidx).collect();
    let k = STAR_SEED.min(others.len());
    let dist = |j: &usize| (cloud.coords[*j] - p).norm_squared();
    if k < others.len() {
        others.select_nth_unstable_by(k, |a, b| dist(a).total_cmp(&dist(b)));
    }
    let mut members = vec![pidx];
    members.extend_from_slice(&others[..k]);
    let mut inside = vec![false; n];
    for &m in &members {
        inside[m] = true;
    }
    loop {
        let pts: Vec<Vector3<f64>> = members.iter().map(|&j| cloud.coords[j]).collect();
        let hull = convex_hull_about(&pts, &p)?;
        let at_p = hull.faces_at(0);
        if at_p.is_empty() {
            return Ok(Star {
                members,
                hull: None,
            });
        }
        let extent = pts.iter().map(|q| (q - p).norm()).fold(0.0f64, f64::max);
        let tol = PLANE_TOL * extent;
        let planes: Vec<(Vector3<f64>, f64)> = at_p
            .iter()
            .map(|&f| (hull.faces[f].normal, hull.faces[f].offset))
            .collect();
        let mut add: Vec<usize> = (0..n)
            .filter(|&j| {
                !inside[j]
                    && planes
                        .iter()
                        .any(|(nrm, off)| nrm.dot(&cloud.coords[j]) - off > -tol)
            })
            .collect();
        if add.is_empty() {
            return Ok(Star {
                members,
                hull: Some(hull),
            });
        }
        // nearest violators first keeps one-sided seeds from pulling in the whole cloud
        if add.len() > STAR_SEED {
            add.select_nth_unstable_by(STAR_SEED, |a, b| dist(a).total_cmp(&dist(b)));
            add.truncate(STAR_SEED);
        }
        if members.len() + add.len() > MAX_STAR {
            return Err(Error::UnstableHull(format!(
                "star does not close within {MAX_STAR} points"
            )));
        }
        for j in add {
            inside[j] = true;
            members.push(j);
        }
    }
}

/// Face of a star in the common frame, still carrying cloud indices.
struct StarFace {
    cycle: Vec<usize>,
    plane: Vector4<f64>,
    spacelike: bool,
    future_ok: bool,
}

fn star_faces(cloud: &Cloud, star: &Star) -> Vec<StarFace> {
    let hull = star.hull.as_ref().expect("vertex star");
    hull.polygons_at(0)
        .into_iter()
        .map(|pi| {
            let poly = &hull.polygons[pi];
            let cycle: Vec<usize> = poly.vertices.iter().map(|&v| star.members[v]).collect();
            let plane = cloud.chart.covector_of(&poly.normal, poly.offset);
            let spacelike = if cloud.ads {
                ProjPlane(plane).is_spacelike()
            } else {
                plane[0] * plane[0] + plane[1] * plane[1] < plane[2] * plane[2] * (1.0 - 1e-12)
            };
            let mut centroid = Vector4::zeros();
            for &j in &cycle {
                centroid += cloud.lifts[j];
            }
            let t = if cloud.ads {
                future_field(&centroid)
            } else {
                Vector4::z()
            };
            // the hull must lie to the future of each face: T points to the negative side
            let future_ok = plane.dot(&t) < 0.0;
            StarFace {
                cycle,
                plane,
                spacelike,
                future_ok,
            }
        })
        .collect()
}

fn labels_of(cloud: &Cloud, cycle: &[usize]) -> Result<Vec<(usize, usize)>> {
    cycle
        .iter()
        .map(|&j| match cloud.nodes[j] {
            Node::Orbit { id, elem } => Ok((id, elem)),
            Node::Limit => Err(Error::UnstableHull(
                "a face at a fundamental vertex reaches the limit set".into(),
            )),
        })
        .collect()
}

/// Rotation and frame of a face cycle with the apex (lowest id, then smallest relative words) first.
fn normalize_face(cycle: &[(usize, Word)]) -> (usize, Vec<Label>) {
    let m = cycle.len();
    let min_id = cycle.iter().map(|c| c.0).min().expect("nonempty face");
    let mut best: Option<(usize, Vec<Label>)> = None;
    for k in (0..m).filter(|&k| cycle[k].0 == min_id) {
        let wk_inv = cycle[k].1.inverse();
        let labels: Vec<Label> = (0..m)
            .map(|i| {
                let (id, w) = &cycle[(k + i) % m];
                Label {
                    id: *id,
                    word: wk_inv.mul(w),
                }
            })
            .collect();
        let key = |ls: &[Label]| {
            ls.iter()
                .map(|l| (l.id, l.word.len(), l.word.clone()))
                .collect::<Vec<_>>()
        };
        if best.as_ref().map_or(true, |(_, b)| key(&labels) < key(b)) {
            best = Some((k, labels));
        }
    }
    best.expect("nonempty face")
}

/// Whether two label cycles describe the same face up to translation and rotation.
fn same_face(a: &[Label], b: &[Label]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let m = a.len();
    (0..m).any(|r| {
        if (0..m).any(|i| a[i].id != b[(i + r) % m].id) {
            return false;
        }
        let g = b[r].word.mul(&a[0].word.inverse());
        (1..m).all(|i| elem_eq(&g.mul(&a[i].word), &b[(i + r) % m].word))
    })
}

fn build_surface(c: &VertexConfig, level: usize, limit_len: usize) -> Result<HullSurface> {
    let cloud = Cloud::build(c, level, limit_len, true)?;
    let b = &cloud.ball;
    let radius = level as f64 * RADIUS_PER_LEVEL;
    let mut raw: Vec<(Vec<(usize, Word)>, StarFace)> = Vec::new();
    let mut star_out = Vec::with_capacity(c.n_points());
    for id in 0..c.n_points() {
        let star = grow_star(&cloud, cloud.fundamental(id))?;
        if star.hull.is_none() {
            return Err(Error::NotConvex(format!(
                "marked point {id} is not a vertex of the hull"
            )));
        }
        let faces = star_faces(&cloud, &star);
        if faces.len() < 3 {
            return Err(Error::QuotientError(format!(
                "marked point {id} lies in only {} faces",
                faces.len()
            )));
        }
        let mut this_star = Vec::with_capacity(faces.len());
        for f in faces {
            if !f.future_ok {
                return Err(Error::NotConvex(format!(
                    "a face at marked point {id} is not on the {:?} side",
                    c.side
                )));
            }
            if !f.spacelike {
                return Err(Error::NonSpacelikeFace(format!(
                    "face at marked point {id}"
                )));
            }
            let labels = labels_of(&cloud, &f.cycle)?;
            if labels
                .iter()
                .any(|&(_, e)| b.reach[e] > radius - STABILITY_MARGIN)
            {
                return Err(Error::UnstableHull(format!(
                    "star of marked point {id} reaches the truncation radius"
                )));
            }
            let cycle: Vec<(usize, Word)> = labels
                .iter()
                .map(|&(i, e)| (i, b.words[e].clone()))
                .collect();
            this_star.push(HullFace {
                vertices: cycle
                    .iter()
                    .map(|(i, w)| Label {
                        id: *i,
                        word: w.clone(),
                    })
                    .collect(),
                plane: cloud.chart.reflect(&f.plane),
                spacelike: f.spacelike,
            });
            raw.push((cycle, f));
        }
        star_out.push(this_star);
    }
    // one face per orbit; each must be seen once from every vertex occurrence
    let mut faces: Vec<(HullFace, usize)> = Vec::new();
    for (cycle, f) in &raw {
        let (k, labels) = normalize_face(cycle);
        match faces
            .iter_mut()
            .find(|(h, _)| same_face(&h.vertices, &labels))
        {
            Some((_, n)) => *n += 1,
            None => {
                let m: Matrix4<f64> = c.element_matrix(&cycle[k].1);
                let plane = m.transpose() * cloud.chart.reflect(&f.plane);
                faces.push((
                    HullFace {
                        vertices: labels,
                        plane,
                        spacelike: f.spacelike,
                    },
                    1,
                ));
            }
        }
    }
    if let Some((h, n)) = faces.iter().find(|(h, n)| *n != h.vertices.len()) {
        return Err(Error::UnstableHull(format!(
            "stars disagree on a face with {} vertices (seen {n} times)",
            h.vertices.len()
        )));
    }
    let mut faces: Vec<HullFace> = faces.into_iter().map(|(h, _)| h).collect();
    faces.sort_by(|a, b| {
        let key = |f: &HullFace| {
            f.vertices
                .iter()
                .map(|l| (l.id, l.word.len(), l.word.clone()))
                .collect::<Vec<_>>()
        };
        key(a).cmp(&key(b))
    });
    let surface = HullSurface {
        side: c.side,
        max_len: level,
        limit_len,
        faces,
        stars: star_out,
        config: c.clone(),
        chart: cloud.chart,
    };
    surface.triangulation()?;
    Ok(surface)
}

/// Boundary surface on the configuration's side, from the orbit of radius L and
/// (AdS only) limit samples of radius `limit_len`.
pub fn convex_boundary(c: &VertexConfig, max_len: usize, limit_len: usize) -> Result<HullSurface> {
    if max_len == 0 {
        return Err(Error::InvalidInput("orbit radius must be positive".into()));
    }
    build_surface(c, max_len, limit_len)
}

/// Retries with larger orbit radii while the hull is unstable, up to `max_radius`.
pub fn convex_boundary_auto(
    c: &VertexConfig,
    start: usize,
    limit_len: usize,
    max_radius: usize,
) -> Result<HullSurface> {
    let mut last = Error::UnstableHull("no radius tried".into());
    for l in start.max(1)..=max_radius {
        match convex_boundary(c, l, limit_len) {
            Err(e @ Error::UnstableHull(_)) => last = e,
            other => return other,
        }
    }
    Err(last)
}

/// Signed distance of p beyond the hull of the other points (positive outside).
fn excess(cloud: &Cloud, star: &Star, pidx: usize) -> Result<f64> {
    let rest: Vec<Vector3<f64>> = star.members[1..].iter().map(|&j| cloud.coords[j]).collect();
    let p = cloud.coords[pidx];
    let h = convex_hull_about(&rest, &p)?;
    Ok(h.faces
        .iter()
        .map(|f| f.normal.dot(&p) - f.offset)
        .fold(f64::NEG_INFINITY, f64::max))
}

fn vertex_position(cloud: &Cloud, id: usize) -> Result<ConvexPosition> {
    let pidx = cloud.fundamental(id);
    let star = grow_star(cloud, pidx)?;
    let extent = star
        .members
        .iter()
        .map(|&j| (cloud.coords[j] - cloud.coords[pidx]).norm())
        .fold(0.0f64, f64::max);
    let tol = PLANE_TOL * extent;
    let sigma = excess(cloud, &star, pidx)?;
    if star.hull.is_none() || sigma <= tol {
        return Ok(if sigma < -tol {
            ConvexPosition::NotConvex
        } else {
            ConvexPosition::Convex
        });
    }
    if star_faces(cloud, &star).iter().any(|f| !f.future_ok) {
        return Ok(ConvexPosition::NotConvex);
    }
    Ok(ConvexPosition::Strict)
}

/// Worst per-vertex verdict of hull membership against the truncated orbit.
pub fn convex_position(c: &VertexConfig, max_len: usize) -> ConvexPosition {
    let Ok(cloud) = Cloud::build(c, max_len.max(1), 2, false) else {
        return ConvexPosition::NotConvex;
    };
    (0..c.n_points())
        .into_par_iter()
        .map(|id| vertex_position(&cloud, id).unwrap_or(ConvexPosition::NotConvex))
        .collect::<Vec<_>>()
        .into_iter()
        .min()
        .unwrap_or(ConvexPosition::NotConvex)
}

/// Intrinsic cone-metric of the surface on its fan triangulation.
pub fn intrinsic_metric(s: &HullSurface) -> Result<ConeMetric> {
    let tri = s.triangulation()?;
    let lengths = tri
        .edges
        .iter()
        .map(|e| s.config.edge_length(e.ends[0], e.ends[1], &e.word))
        .collect::<Result<Vec<f64>>>()?;
    let geometry = if s.config.is_ads() {
        Geometry::Hyperbolic
    } else {
        Geometry::Euclidean
    };
    ConeMetric::new(tri, lengths, geometry)
}
