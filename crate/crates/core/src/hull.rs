//! Incremental 3D convex hull with exact orientation on quantized coordinates.
//!
//! Input coordinates are snapped to a grid of step 2⁻⁴⁰·M around a center,
//! M being a power of two bounding the extent. Differences of grid
//! coordinates stay below 2⁴¹, so the orientation determinant is exact in i128.

use std::collections::{HashMap, HashSet};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRID_BITS: i32 = 40;

/// Relative tolerance for merging coplanar triangles.
pub const COPLANAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Grid([i64; 3]);

fn orient(a: &Grid, b: &Grid, c: &Grid, d: &Grid) -> i32 {
    let u = [
        (b.0[0] - a.0[0]) as i128,
        (b.0[1] - a.0[1]) as i128,
        (b.0[2] - a.0[2]) as i128,
    ];
    let v = [
        (c.0[0] - a.0[0]) as i128,
        (c.0[1] - a.0[1]) as i128,
        (c.0[2] - a.0[2]) as i128,
    ];
    let w = [
        (d.0[0] - a.0[0]) as i128,
        (d.0[1] - a.0[1]) as i128,
        (d.0[2] - a.0[2]) as i128,
    ];
    let det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
        + u[2] * (v[0] * w[1] - v[1] * w[0]);
    det.signum() as i32
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullTriangle {
    /// Counterclockwise seen from outside.
    pub vertices: [usize; 3],
    /// Unit outward normal, from the input coordinates.
    pub normal: Vector3<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HullPolygon {
    /// Boundary cycle, counterclockwise seen from outside.
    pub vertices: Vec<usize>,
    pub triangles: Vec<usize>,
    pub normal: Vector3<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hull {
    pub faces: Vec<HullTriangle>,
    pub polygons: Vec<HullPolygon>,
}

impl Hull {
    /// Sorted indices of points that are hull vertices.
    pub fn vertex_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.faces.iter().flat_map(|f| f.vertices).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Triangles incident to a vertex.
    pub fn faces_at(&self, v: usize) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&i| self.faces[i].vertices.contains(&v))
            .collect()
    }

    /// Polygons incident to a vertex.
    pub fn polygons_at(&self, v: usize) -> Vec<usize> {
        (0..self.polygons.len())
            .filter(|&i| self.polygons[i].vertices.contains(&v))
            .collect()
    }
}

/// Hull with the grid centered at the bounding-box midpoint.
pub fn convex_hull(points: &[Vector3<f64>]) -> Result<Hull> {
    if points.is_empty() {
        return Err(Error::DegenerateInput("empty point set".into()));
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    convex_hull_about(points, &((lo + hi) / 2.0))
}

/// Hull with the grid centered at `center` (a point equal to the center is represented exactly).
pub fn convex_hull_about(points: &[Vector3<f64>], center: &Vector3<f64>) -> Result<Hull> {
    if points.len() < 4 {
        return Err(Error::DegenerateInput(format!("{} points", points.len())));
    }
    if points.iter().any(|p| !p.iter().all(|x| x.is_finite())) {
        return Err(Error::DegenerateInput("non-finite coordinate".into()));
    }
    let extent = points
        .iter()
        .map(|p| (p - center).amax())
        .fold(0.0f64, f64::max);
    if extent == 0.0 {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let m = 2f64.powi(extent.log2().ceil() as i32);
    let scale = 2f64.powi(GRID_BITS) / m;
    let grid: Vec<Grid> = points
        .iter()
        .map(|p| {
            let d = (p - center) * scale;
            Grid([
                d[0].round() as i64,
                d[1].round() as i64,
                d[2].round() as i64,
            ])
        })
        .collect();
    let tris = incremental(&grid)?;
    let faces: Vec<HullTriangle> = tris
        .iter()
        .map(|t| {
            let [a, b, c] = *t;
            let n = (points[b] - points[a]).cross(&(points[c] - points[a]));
            let n = n / n.norm();
            HullTriangle {
                vertices: *t,
                normal: n,
                offset: n.dot(&points[a]),
            }
        })
        .collect();
    let polygons = merge_coplanar(points, &faces, m);
    Ok(Hull { faces, polygons })
}

fn incremental(grid: &[Grid]) -> Result<Vec<[usize; 3]>> {
    let mut seen: HashSet<Grid> = HashSet::new();
    let order: Vec<usize> = (0..grid.len()).filter(|&i| seen.insert(grid[i])).collect();
    let i0 = order[0];
    let i1 = *order
        .iter()
        .find(|&&i| grid[i] != grid[i0])
        .ok_or_else(|| Error::DegenerateInput("all points coincide".into()))?;
    let collinear = |i: usize| {
        let u = sub(&grid[i1], &grid[i0]);
        let v = sub(&grid[i], &grid[i0]);
        u[1] * v[2] - u[2] * v[1] == 0
            && u[2] * v[0] - u[0] * v[2] == 0
            && u[0] * v[1] - u[1] * v[0] == 0
    };
    let i2 = *order
        .iter()
        .find(|&&i| !collinear(i))
        .ok_or_else(|| Error::DegenerateInput("collinear points".into()))?;
    let i3 = *order
        .iter()
        .find(|&&i| orient(&grid[i0], &grid[i1], &grid[i2], &grid[i]) != 0)
        .ok_or_else(|| Error::DegenerateInput("coplanar points".into()))?;
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let (a, b) = if orient(&grid[i0], &grid[i1], &grid[i2], &grid[i3]) > 0 {
        (i2, i1)
    } else {
        (i1, i2)
    };
    // (i0, a, b) sees i3 on its negative side
    faces.push([i0, a, b]);
    faces.push([i0, i3, a]);
    faces.push([a, i3, b]);
    faces.push([b, i3, i0]);
    for &p in &order {
        if p == i0 || p == i1 || p == i2 || p == i3 {
            continue;
        }
        let visible: Vec<bool> = faces
            .iter()
            .map(|f| orient(&grid[f[0]], &grid[f[1]], &grid[f[2]], &grid[p]) > 0)
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut vis_edges: HashSet<(usize, usize)> = HashSet::new();
        for (f, &v) in faces.iter().zip(&visible) {
            if v {
                for k in 0..3 {
                    vis_edges.insert((f[k], f[(k + 1) % 3]));
                }
            }
        }
        let mut next: Vec<[usize; 3]> = Vec::with_capacity(faces.len() + 4);
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for (f, &v) in faces.iter().zip(&visible) {
            if v {
                for k in 0..3 {
                    let (u, w) = (f[k], f[(k + 1) % 3]);
                    if !vis_edges.contains(&(w, u)) {
                        horizon.push((u, w));
                    }
                }
            } else {
                next.push(*f);
            }
        }
        for (u, w) in horizon {
            next.push([u, w, p]);
        }
        faces = next;
    }
    Ok(faces)
}

fn sub(a: &Grid, b: &Grid) -> [i128; 3] {
    [
        (a.0[0] - b.0[0]) as i128,
        (a.0[1] - b.0[1]) as i128,
        (a.0[2] - b.0[2]) as i128,
    ]
}

fn merge_coplanar(
    points: &[Vector3<f64>],
    faces: &[HullTriangle],
    extent: f64,
) -> Vec<HullPolygon> {
    let tol = COPLANAR_TOL * extent;
    let mut edge_face: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, f) in faces.iter().enumerate() {
        for k in 0..3 {
            edge_face.insert((f.vertices[k], f.vertices[(k + 1) % 3]), i);
        }
    }
    let mut parent: Vec<usize> = (0..faces.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut j = i;
        while parent[j] != r {
            let n = parent[j];
            parent[j] = r;
            j = n;
        }
        r
    }
    for (i, f) in faces.iter().enumerate() {
        for k in 0..3 {
            let (u, w) = (f.vertices[k], f.vertices[(k + 1) % 3]);
            let Some(&j) = edge_face.get(&(w, u)) else {
                continue;
            };
            if j <= i {
                continue;
            }
            let g = &faces[j];
            let off_j = g.vertices.iter().find(|v| !f.vertices.contains(v));
            let off_i = f.vertices.iter().find(|v| !g.vertices.contains(v));
            let flat = match (off_i, off_j) {
                (Some(&a), Some(&b)) => {
                    (g.normal.dot(&points[a]) - g.offset).abs() <= tol
                        && (f.normal.dot(&points[b]) - f.offset).abs() <= tol
                }
                _ => true,
            };
            if flat {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_group: HashMap<usize, usize> = HashMap::new();
    for i in 0..faces.len() {
        let r = find(&mut parent, i);
        let g = *root_group.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
        .into_iter()
        .map(|tris| {
            let mut edges: HashSet<(usize, usize)> = HashSet::new();
            for &t in &tris {
                let f = &faces[t].vertices;
                for k in 0..3 {
                    edges.insert((f[k], f[(k + 1) % 3]));
                }
            }
            let mut succ: HashMap<usize, usize> = HashMap::new();
            for &(u, w) in &edges {
                if !edges.contains(&(w, u)) {
                    succ.insert(u, w);
                }
            }
            let start = *succ.keys().min().expect("polygon boundary");
            let mut cycle = vec![start];
            let mut cur = succ[&start];
            while cur != start && cycle.len() <= succ.len() {
                cycle.push(cur);
                cur = succ[&cur];
            }
            let mut normal = Vector3::zeros();
            for &t in &tris {
                normal += faces[t].normal;
            }
            let normal = normal / normal.norm();
            let offset =
                cycle.iter().map(|&v| normal.dot(&points[v])).sum::<f64>() / cycle.len() as f64;
            HullPolygon {
                vertices: cycle,
                triangles: tris,
                normal,
                offset,
            }
        })
        .collect()
}
