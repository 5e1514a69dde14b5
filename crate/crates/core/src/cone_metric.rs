//! Cone-metrics on the marked genus-2 surface in edge-length charts.
//!
//! Triangles carry corner words: corner i of a triangle is the lift
//! corners[i]·ṽ_{verts[i]} of its vertex in a frame common to the triangle.
//! An edge (a, b, h) is the segment from ṽ_a to h·ṽ_b; (a, b, h) and
//! (b, a, h⁻¹) describe the same edge. Side i of a triangle is opposite
//! corner i and runs from corner i+1 to corner i+2 (indices mod 3).

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fuchsian::{elem_eq, linear_part, reference_rep, Word};

/// Clamp bound for acos arguments.
const ACOS_CLAMP: f64 = 1.0 - 1e-14;
/// Tolerance for concavity / strictness of curvatures.
pub const KAPPA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    Hyperbolic,
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub ends: [usize; 2],
    pub word: Word,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub verts: [usize; 3],
    pub corners: [Word; 3],
    /// Edge on side i (opposite corner i).
    pub edges: [usize; 3],
    /// Whether side i runs along its edge's orientation.
    pub forward: [bool; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedTriangulation {
    pub n_vertices: usize,
    pub edges: Vec<Edge>,
    pub triangles: Vec<Triangle>,
}

/// Endpoints and relative word of side s of a triangle, from corner s+1 to corner s+2.
fn side_key(verts: &[usize; 3], corners: &[Word; 3], s: usize) -> (usize, usize, Word) {
    let j = (s + 1) % 3;
    let k = (s + 2) % 3;
    (verts[j], verts[k], corners[j].inverse().mul(&corners[k]))
}

/// Whether the directed segment (a, b, h) is the edge forwards (`Some(true)`), backwards, or neither.
fn match_edge(e: &Edge, a: usize, b: usize, h: &Word) -> Option<bool> {
    if e.ends == [a, b] && elem_eq(&e.word, h) {
        return Some(true);
    }
    if e.ends == [b, a] && elem_eq(&e.word, &h.inverse()) {
        return Some(false);
    }
    None
}

/// Ends and a rounded image of a fixed point under the reference holonomy of the word.
pub type EdgeKey = (usize, usize, i64, i64);

fn edge_key(e: &Edge) -> EdgeKey {
    let (a, b) = (0.137f64, -0.291f64);
    let z = nalgebra::Vector3::new(a, b, (1.0 + a * a + b * b).sqrt());
    let key = |w: &Word| {
        let y = linear_part(&reference_rep().evaluate(w)) * z;
        ((y[0] * 1e6).round() as i64, (y[1] * 1e6).round() as i64)
    };
    let [a, b] = e.ends;
    let k = match a.cmp(&b) {
        std::cmp::Ordering::Less => key(&e.word),
        std::cmp::Ordering::Greater => key(&e.word.inverse()),
        std::cmp::Ordering::Equal => key(&e.word).min(key(&e.word.inverse())),
    };
    (a.min(b), a.max(b), k.0, k.1)
}

impl MarkedTriangulation {
    /// Builds edges by matching triangle sides and validates the surface.
    pub fn from_corners(n_vertices: usize, tris: &[([usize; 3], [Word; 3])]) -> Result<Self> {
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangles = Vec::with_capacity(tris.len());
        for (verts, corners) in tris {
            let mut te = [0usize; 3];
            let mut tf = [true; 3];
            for s in 0..3 {
                let (a, b, h) = side_key(verts, corners, s);
                let found = edges
                    .iter()
                    .enumerate()
                    .find_map(|(i, e)| match_edge(e, a, b, &h).map(|f| (i, f)));
                match found {
                    Some((i, f)) => {
                        te[s] = i;
                        tf[s] = f;
                    }
                    None => {
                        edges.push(Edge {
                            ends: [a, b],
                            word: h,
                        });
                        te[s] = edges.len() - 1;
                        tf[s] = true;
                    }
                }
            }
            triangles.push(Triangle {
                verts: *verts,
                corners: corners.clone(),
                edges: te,
                forward: tf,
            });
        }
        let t = MarkedTriangulation {
            n_vertices,
            edges,
            triangles,
        };
        t.validate()?;
        Ok(t)
    }

    /// Sides (triangle, side) on which each edge occurs.
    pub fn occurrences(&self) -> Vec<Vec<(usize, usize)>> {
        let mut occ = vec![Vec::new(); self.edges.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for s in 0..3 {
                occ[tri.edges[s]].push((t, s));
            }
        }
        occ
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn validate(&self) -> Result<()> {
        if self.euler_characteristic() != -2 {
            return Err(Error::InvalidTriangulation(format!(
                "Euler characteristic {} (V={}, E={}, F={})",
                self.euler_characteristic(),
                self.n_vertices,
                self.edges.len(),
                self.triangles.len()
            )));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            for s in 0..3 {
                let (a, b, h) = side_key(&tri.verts, &tri.corners, s);
                let e = self.edges.get(tri.edges[s]).ok_or_else(|| {
                    Error::InvalidTriangulation(format!("triangle {t} references missing edge"))
                })?;
                if match_edge(e, a, b, &h) != Some(tri.forward[s]) {
                    return Err(Error::InvalidTriangulation(format!(
                        "triangle {t} side {s} does not match its edge"
                    )));
                }
            }
        }
        for (e, o) in self.occurrences().iter().enumerate() {
            if o.len() != 2 {
                return Err(Error::InvalidTriangulation(format!(
                    "edge {e} lies on {} sides",
                    o.len()
                )));
            }
            let f: Vec<bool> = o
                .iter()
                .map(|&(t, s)| self.triangles[t].forward[s])
                .collect();
            if f[0] == f[1] {
                return Err(Error::InvalidTriangulation(format!(
                    "edge {e} is glued without orientation reversal"
                )));
            }
        }
        for v in 0..self.n_vertices {
            let corners: usize = self
                .triangles
                .iter()
                .map(|t| t.verts.iter().filter(|&&x| x == v).count())
                .sum();
            if corners == 0 {
                return Err(Error::InvalidTriangulation(format!(
                    "vertex {v} has no corners"
                )));
            }
            let cycle = self.link_cycle(v)?;
            if cycle.len() != corners {
                return Err(Error::InvalidTriangulation(format!(
                    "link of vertex {v} is not a single cycle ({} of {corners} corners)",
                    cycle.len()
                )));
            }
        }
        Ok(())
    }

    /// Corners (triangle, index) around a vertex, in rotation order.
    pub fn link_cycle(&self, v: usize) -> Result<Vec<(usize, usize)>> {
        let occ = self.occurrences();
        let start = self
            .triangles
            .iter()
            .enumerate()
            .find_map(|(t, tri)| tri.verts.iter().position(|&x| x == v).map(|i| (t, i)))
            .ok_or_else(|| Error::InvalidTriangulation(format!("vertex {v} missing")))?;
        let mut out = vec![start];
        let (mut t, mut i) = start;
        loop {
            // side from corner i to corner i+1 is side i+2
            let s = (i + 2) % 3;
            let e = self.triangles[t].edges[s];
            let &(t2, s2) = occ[e]
                .iter()
                .find(|&&o| o != (t, s))
                .ok_or_else(|| Error::InvalidTriangulation(format!("edge {e} has one side")))?;
            // the neighbour traverses the edge backwards, so our corner i is its corner s2+2
            let i2 = (s2 + 2) % 3;
            if self.triangles[t2].verts[i2] != v {
                return Err(Error::InvalidTriangulation(format!(
                    "inconsistent gluing at edge {e}"
                )));
            }
            if (t2, i2) == start {
                break;
            }
            if out.len() > 3 * self.triangles.len() {
                return Err(Error::InvalidTriangulation(format!(
                    "link of vertex {v} does not close"
                )));
            }
            out.push((t2, i2));
            t = t2;
            i = i2;
        }
        Ok(out)
    }

    /// Combinatorial flip of edge e. Returns the new triangulation; the new diagonal keeps index e.
    pub fn flip(&self, e: usize) -> Result<MarkedTriangulation> {
        let (tri, _) = self.flip_data(e)?;
        Ok(tri)
    }

    /// Flip plus the quad description ((T1, c0), (T2, d0)).
    fn flip_data(&self, e: usize) -> Result<(MarkedTriangulation, [(usize, usize); 2])> {
        let occ = self.occurrences();
        let o = occ
            .get(e)
            .ok_or_else(|| Error::InvalidInput(format!("no edge {e}")))?;
        let (t1, s1) = o[0];
        let (t2, s2) = o[1];
        if t1 == t2 {
            return Err(Error::SelfGluedEdge(e));
        }
        let a = &self.triangles[t1];
        let b = &self.triangles[t2];
        let c = |k: usize| (s1 + k) % 3;
        let d = |k: usize| (s2 + k) % 3;
        // T1 side runs c1 → c2, T2 side runs d1 → d2 = c2 → c1
        let h = a.corners[c(2)].mul(&b.corners[d(1)].inverse());
        let gd0 = h.mul(&b.corners[d(0)]);
        let new_word = a.corners[c(0)].inverse().mul(&gd0);
        let mut edges = self.edges.clone();
        edges[e] = Edge {
            ends: [a.verts[c(0)], b.verts[d(0)]],
            word: new_word,
        };
        let n1 = Triangle {
            verts: [a.verts[c(0)], a.verts[c(1)], b.verts[d(0)]],
            corners: [
                a.corners[c(0)].clone(),
                a.corners[c(1)].clone(),
                gd0.clone(),
            ],
            edges: [b.edges[d(1)], e, a.edges[c(2)]],
            forward: [b.forward[d(1)], false, a.forward[c(2)]],
        };
        let n2 = Triangle {
            verts: [a.verts[c(0)], b.verts[d(0)], a.verts[c(2)]],
            corners: [a.corners[c(0)].clone(), gd0, a.corners[c(2)].clone()],
            edges: [b.edges[d(2)], a.edges[c(1)], e],
            forward: [b.forward[d(2)], a.forward[c(1)], true],
        };
        // an arc homotopic to another one only through a marked point has the same label
        let (ends, word) = (edges[e].ends, &edges[e].word);
        if (0..edges.len())
            .any(|i| i != e && match_edge(&edges[i], ends[0], ends[1], word).is_some())
        {
            return Err(Error::InvalidTriangulation(format!(
                "flipping edge {e} duplicates a marked edge"
            )));
        }
        // two corners at the same lift: the triangle does not embed in the universal cover
        for t in [&n1, &n2] {
            for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                if t.verts[i] == t.verts[j] && elem_eq(&t.corners[i], &t.corners[j]) {
                    return Err(Error::InvalidTriangulation(format!(
                        "flipping edge {e} folds a triangle onto itself"
                    )));
                }
            }
        }
        let mut triangles = self.triangles.clone();
        triangles[t1] = n1;
        triangles[t2] = n2;
        Ok((
            MarkedTriangulation {
                n_vertices: self.n_vertices,
                edges,
                triangles,
            },
            [(t1, c(0)), (t2, d(0))],
        ))
    }

    /// Same triangulation with edge (t, k) (side k of triangle t) renamed to `id(t, k)`.
    fn renumbered(&self, id: impl Fn(usize, usize) -> usize) -> Result<MarkedTriangulation> {
        let n = self.edges.len();
        let mut map = vec![usize::MAX; n];
        for (t, tr) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (old, new) = (tr.edges[k], id(t, k));
                if new >= n || (map[old] != usize::MAX && map[old] != new) {
                    return Err(Error::InvalidTriangulation(format!(
                        "edge ids disagree with the corner labels at triangle {t}"
                    )));
                }
                map[old] = new;
            }
        }
        let mut edges = self.edges.clone();
        for (old, &new) in map.iter().enumerate() {
            edges[new] = self.edges[old].clone();
        }
        let mut seen = map.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != n {
            return Err(Error::InvalidTriangulation(
                "edge ids are not a permutation".into(),
            ));
        }
        let mut triangles = self.triangles.clone();
        for t in &mut triangles {
            t.edges = t.edges.map(|e| map[e]);
        }
        Ok(MarkedTriangulation {
            n_vertices: self.n_vertices,
            edges,
            triangles,
        })
    }

    /// Whether edge i of `self` and edge j of `other` are the same marked arc.
    pub fn same_edge(&self, i: usize, other: &MarkedTriangulation, j: usize) -> bool {
        let e = &other.edges[j];
        match_edge(&self.edges[i], e.ends[0], e.ends[1], &e.word).is_some()
    }

    /// For each edge of `self`, the index of the same marked edge in `other`.
    pub fn edge_map(&self, other: &MarkedTriangulation) -> Vec<Option<usize>> {
        (0..self.edges.len())
            .map(|i| (0..other.edges.len()).find(|&j| self.same_edge(i, other, j)))
            .collect()
    }

    /// Hashable keys identifying marked edges up to orientation.
    pub fn edge_keys(&self) -> Vec<EdgeKey> {
        self.edges.iter().map(edge_key).collect()
    }

    /// Number of edges of `self` that do not occur in `other`.
    pub fn mismatch(&self, other: &MarkedTriangulation) -> usize {
        self.edge_map(other).iter().filter(|m| m.is_none()).count()
    }

    /// Octagon fan triangulation with one vertex: corners are prefixes of the relator.
    pub fn octagon() -> MarkedTriangulation {
        let rel = Word::relator();
        let prefix = |k: usize| Word(rel.0[..k].to_vec()).reduced();
        let tris: Vec<([usize; 3], [Word; 3])> = (1..7)
            .map(|k| ([0, 0, 0], [Word::identity(), prefix(k), prefix(k + 1)]))
            .collect();
        MarkedTriangulation::from_corners(1, &tris).expect("octagon triangulation")
    }

    /// Inserts a new vertex inside triangle t (lifted at the triangle's identity frame).
    pub fn split(&self, t: usize) -> Result<MarkedTriangulation> {
        let tri = self
            .triangles
            .get(t)
            .ok_or_else(|| Error::InvalidInput(format!("no triangle {t}")))?;
        let nv = self.n_vertices;
        let mut tris: Vec<([usize; 3], [Word; 3])> = self
            .triangles
            .iter()
            .map(|x| (x.verts, x.corners.clone()))
            .collect();
        tris.remove(t);
        for k in 0..3 {
            let j = (k + 1) % 3;
            tris.push((
                [tri.verts[k], tri.verts[j], nv],
                [
                    tri.corners[k].clone(),
                    tri.corners[j].clone(),
                    Word::identity(),
                ],
            ));
        }
        MarkedTriangulation::from_corners(nv + 1, &tris)
    }
}

/// Angles of a triangle with sides a, b, c (angle i opposite side i), plus a clamping flag.
pub fn triangle_angles_checked(
    a: f64,
    b: f64,
    c: f64,
    geometry: Geometry,
) -> Result<([f64; 3], bool)> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) || !(a < b + c && b < a + c && c < a + b) {
        return Err(Error::DegenerateTriangle(a, b, c));
    }
    let mut clamped = false;
    let mut ang = |x: f64, y: f64, z: f64| -> f64 {
        // angle opposite x
        let cos = match geometry {
            Geometry::Euclidean => (y * y + z * z - x * x) / (2.0 * y * z),
            Geometry::Hyperbolic => (y.cosh() * z.cosh() - x.cosh()) / (y.sinh() * z.sinh()),
        };
        if cos.abs() > ACOS_CLAMP {
            clamped = true;
        }
        cos.clamp(-ACOS_CLAMP, ACOS_CLAMP).acos()
    };
    let out = [ang(a, b, c), ang(b, c, a), ang(c, a, b)];
    Ok((out, clamped))
}

pub fn triangle_angles(a: f64, b: f64, c: f64, geometry: Geometry) -> Result<[f64; 3]> {
    triangle_angles_checked(a, b, c, geometry).map(|(x, _)| x)
}

/// Length of the third side opposite an angle between sides a and b.
pub fn law_of_cosines(a: f64, b: f64, angle: f64, geometry: Geometry) -> f64 {
    match geometry {
        Geometry::Euclidean => (a * a + b * b - 2.0 * a * b * angle.cos()).max(0.0).sqrt(),
        Geometry::Hyperbolic => (a.cosh() * b.cosh() - a.sinh() * b.sinh() * angle.cos())
            .max(1.0)
            .acosh(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeMetric {
    pub tri: MarkedTriangulation,
    pub lengths: Vec<f64>,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureVector {
    pub kappa: Vec<f64>,
}

impl CurvatureVector {
    pub fn total(&self) -> f64 {
        self.kappa.iter().sum()
    }
}

impl ConeMetric {
    pub fn new(tri: MarkedTriangulation, lengths: Vec<f64>, geometry: Geometry) -> Result<Self> {
        if lengths.len() != tri.edges.len() {
            return Err(Error::InvalidInput(format!(
                "{} lengths for {} edges",
                lengths.len(),
                tri.edges.len()
            )));
        }
        let m = ConeMetric {
            tri,
            lengths,
            geometry,
        };
        for t in 0..m.tri.triangles.len() {
            m.angles_of(t)?;
        }
        Ok(m)
    }

    pub fn side_lengths(&self, t: usize) -> [f64; 3] {
        self.tri.triangles[t].edges.map(|e| self.lengths[e])
    }

    pub fn angles_of(&self, t: usize) -> Result<[f64; 3]> {
        let [a, b, c] = self.side_lengths(t);
        triangle_angles(a, b, c, self.geometry)
    }

    /// Total angle at each vertex.
    pub fn cone_angles(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.tri.n_vertices];
        for (t, tri) in self.tri.triangles.iter().enumerate() {
            let ang = self.angles_of(t).expect("validated metric");
            for i in 0..3 {
                out[tri.verts[i]] += ang[i];
            }
        }
        out
    }

    pub fn curvature(&self) -> CurvatureVector {
        CurvatureVector {
            kappa: self.cone_angles().iter().map(|a| 2.0 * PI - a).collect(),
        }
    }

    /// Σ (π − angle sum) over triangles; zero for Euclidean metrics.
    pub fn area(&self) -> f64 {
        match self.geometry {
            Geometry::Euclidean => (0..self.tri.triangles.len())
                .map(|t| {
                    let [a, b, c] = self.side_lengths(t);
                    let s = (a + b + c) / 2.0;
                    (s * (s - a) * (s - b) * (s - c)).max(0.0).sqrt()
                })
                .sum(),
            Geometry::Hyperbolic => (0..self.tri.triangles.len())
                .map(|t| {
                    PI - self
                        .angles_of(t)
                        .expect("validated metric")
                        .iter()
                        .sum::<f64>()
                })
                .sum(),
        }
    }

    pub fn is_concave(&self) -> bool {
        self.curvature().kappa.iter().all(|&k| k <= KAPPA_TOL)
    }

    pub fn is_strict(&self) -> bool {
        self.curvature().kappa.iter().all(|&k| k < -KAPPA_TOL)
    }

    pub fn scale(&self, t: f64) -> ConeMetric {
        ConeMetric {
            tri: self.tri.clone(),
            lengths: self.lengths.iter().map(|l| l * t).collect(),
            geometry: self.geometry,
        }
    }

    pub fn euclidean_limit(&self) -> ConeMetric {
        ConeMetric {
            tri: self.tri.clone(),
            lengths: self.lengths.clone(),
            geometry: Geometry::Euclidean,
        }
    }

    pub fn max_length(&self) -> f64 {
        self.lengths.iter().copied().fold(0.0, f64::max)
    }

    /// Flip of edge e with the new diagonal length from the cosine law.
    pub fn flip(&self, e: usize) -> Result<ConeMetric> {
        let (tri, [(t1, c0), (t2, d0)]) = self.tri.flip_data(e)?;
        let a1 = self.angles_of(t1)?;
        let a2 = self.angles_of(t2)?;
        // angles at the diagonal's endpoints: c1 ≡ d2 and c2 ≡ d1
        let at_c1 = a1[(c0 + 1) % 3] + a2[(d0 + 2) % 3];
        let at_c2 = a1[(c0 + 2) % 3] + a2[(d0 + 1) % 3];
        if at_c1 >= PI || at_c2 >= PI {
            return Err(Error::NonConvexQuad(e));
        }
        // sides at c1: c1–c0 is side c0+2 of T1, c1–d0 is side d0+1 of T2
        let l_c1c0 = self.lengths[self.tri.triangles[t1].edges[(c0 + 2) % 3]];
        let l_c1d0 = self.lengths[self.tri.triangles[t2].edges[(d0 + 1) % 3]];
        let mut lengths = self.lengths.clone();
        lengths[e] = law_of_cosines(l_c1c0, l_c1d0, at_c1, self.geometry);
        ConeMetric::new(tri, lengths, self.geometry)
    }

    /// Max relative edge difference (relative to the smaller length).
    pub fn distance(&self, other: &ConeMetric) -> Result<f64> {
        if self.geometry != other.geometry
            || self.tri.n_vertices != other.tri.n_vertices
            || self.tri.triangles.len() != other.tri.triangles.len()
            || self.tri.edges.len() != other.tri.edges.len()
            || self
                .tri
                .triangles
                .iter()
                .zip(&other.tri.triangles)
                .any(|(a, b)| a.edges != b.edges || a.verts != b.verts)
        {
            return Err(Error::CombinatoricsMismatch);
        }
        Ok(self
            .lengths
            .iter()
            .zip(&other.lengths)
            .map(|(a, b)| (a - b).abs() / a.min(*b))
            .fold(0.0, f64::max))
    }

    /// Structured text (TOML) form with 17 significant digits.
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let g = match self.geometry {
            Geometry::Hyperbolic => "hyperbolic",
            Geometry::Euclidean => "euclidean",
        };
        let _ = writeln!(s, "geometry = \"{g}\"");
        let _ = writeln!(s, "vertices = {}", self.tri.n_vertices);
        for t in &self.tri.triangles {
            let _ = writeln!(s, "\n[[triangle]]");
            let _ = writeln!(
                s,
                "vertices = [{}, {}, {}]",
                t.verts[0], t.verts[1], t.verts[2]
            );
            let _ = writeln!(
                s,
                "edges = [{}, {}, {}]",
                t.edges[0], t.edges[1], t.edges[2]
            );
            let _ = writeln!(
                s,
                "corners = [\"{}\", \"{}\", \"{}\"]",
                t.corners[0], t.corners[1], t.corners[2]
            );
        }
        let mut seen: Vec<([usize; 2], usize)> = Vec::new();
        for (i, e) in self.tri.edges.iter().enumerate() {
            let key = [e.ends[0].min(e.ends[1]), e.ends[0].max(e.ends[1])];
            let occurrence = seen.iter().filter(|(k, _)| *k == key).count();
            seen.push((key, i));
            let _ = writeln!(s, "\n[[edge]]");
            let _ = writeln!(s, "id = {i}");
            let _ = writeln!(s, "endpoints = [{}, {}]", key[0], key[1]);
            let _ = writeln!(s, "occurrence = {occurrence}");
            let _ = writeln!(s, "length = {:.16e}", self.lengths[i]);
            let _ = writeln!(s, "from = {}", e.ends[0]);
            let _ = writeln!(s, "word = \"{}\"", e.word);
        }
        s
    }

    pub fn from_toml(text: &str) -> Result<ConeMetric> {
        #[derive(Deserialize)]
        struct FileTri {
            vertices: [usize; 3],
            corners: [String; 3],
            edges: Option<[usize; 3]>,
        }
        #[derive(Deserialize)]
        struct FileEdge {
            id: usize,
            length: f64,
        }
        #[derive(Deserialize)]
        struct File {
            geometry: String,
            vertices: usize,
            triangle: Vec<FileTri>,
            edge: Vec<FileEdge>,
        }
        let f: File = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let geometry = match f.geometry.to_ascii_lowercase().as_str() {
            "hyperbolic" => Geometry::Hyperbolic,
            "euclidean" => Geometry::Euclidean,
            other => return Err(Error::Parse(format!("unknown geometry '{other}'"))),
        };
        let mut tris = Vec::with_capacity(f.triangle.len());
        for t in &f.triangle {
            let corners = [
                Word::parse(&t.corners[0])?,
                Word::parse(&t.corners[1])?,
                Word::parse(&t.corners[2])?,
            ];
            tris.push((t.vertices, corners));
        }
        let mut tri = MarkedTriangulation::from_corners(f.vertices, &tris)?;
        if f.triangle.iter().all(|t| t.edges.is_some()) {
            tri = tri.renumbered(|t, k| f.triangle[t].edges.map(|e| e[k]).unwrap_or_default())?;
        }
        if f.edge.len() != tri.edges.len() {
            return Err(Error::Parse(format!(
                "{} edge records for {} edges",
                f.edge.len(),
                tri.edges.len()
            )));
        }
        let mut lengths = vec![f64::NAN; tri.edges.len()];
        for e in &f.edge {
            *lengths
                .get_mut(e.id)
                .ok_or_else(|| Error::Parse(format!("edge id {} out of range", e.id)))? = e.length;
        }
        ConeMetric::new(tri, lengths, geometry)
    }
}
