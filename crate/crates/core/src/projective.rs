//! Projective model of AdS³ and Minkowski space inside ℝP³.
//!
//! Points are homogeneous 4-vectors, the quadratic form is
//! q(x) = x₁² + x₂² − x₃² − x₄², and AdS³ is the projectivized region q < 0.
//! The Minkowski chart is x₄ = 1 around the base point o = [0:0:0:1].
//!
//! The isometry group G × G acts through the Mat(2) identification
//! x ↦ (x₁+x₃, x₂+x₄; x₂−x₄, x₃−x₁) (det = −q) by X ↦ g_l · X · g_rᵀ.
//! The diagonal subgroup fixes o, whose matrix is J = (0, 1; −1, 0).
//! Boundary points are rank-one matrices v wᵀ and are parameterized by
//! the pair (image line, row line) = ([v], [w]).
//!
//! Time orientation: the future at o is increasing x₃ (increasing y₃ in
//! the Minkowski chart). The global future field on the quadric is
//! T(x) = (0, 0, x₄, −x₃).

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector2, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for projective equality and null tests.
pub const PROJ_TOL: f64 = 1e-10;
/// Tolerance for causal classification.
pub const CAUSAL_TOL: f64 = 1e-9;

/// Diagonal of the Gram matrix of q.
pub const Q_DIAG: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

pub fn quadratic_form(x: &Vector4<f64>) -> f64 {
    x[0] * x[0] + x[1] * x[1] - x[2] * x[2] - x[3] * x[3]
}

pub fn bilinear(x: &Vector4<f64>, y: &Vector4<f64>) -> f64 {
    x[0] * y[0] + x[1] * y[1] - x[2] * y[2] - x[3] * y[3]
}

/// Q·x, turning a point into the covector of its dual plane (and back).
pub fn flip_q(x: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(x[0], x[1], -x[2], -x[3])
}

/// Restriction of q to the Minkowski chart directions: y₁² + y₂² − y₃².
pub fn minkowski_form(y: &Vector3<f64>) -> f64 {
    y[0] * y[0] + y[1] * y[1] - y[2] * y[2]
}

pub fn minkowski_bilinear(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a[0] * b[0] + a[1] * b[1] - a[2] * b[2]
}

/// Minkowski length of a spacelike vector, `None` when it is not spacelike.
pub fn minkowski_length(y: &Vector3<f64>) -> Option<f64> {
    let n = minkowski_form(y);
    if n > CAUSAL_TOL * y.norm_squared() {
        Some(n.sqrt())
    } else {
        None
    }
}

/// Future-pointing timelike field on the quadric.
pub fn future_field(x: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(0.0, 0.0, x[3], -x[2])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjPoint(pub Vector4<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjPlane(pub Vector4<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Causality {
    Spacelike(f64),
    Timelike(f64),
    Lightlike,
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointClass {
    AdS,
    BoundaryAdS,
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleParam(f64);

impl RescaleParam {
    pub fn new(t: f64) -> Result<Self> {
        if t > 0.0 && t.is_finite() {
            Ok(RescaleParam(t))
        } else {
            Err(Error::InvalidInput(format!(
                "rescale parameter must be positive, got {t}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl ProjPoint {
    pub fn new(lift: Vector4<f64>) -> Result<Self> {
        if lift.norm() == 0.0 || !lift.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput(
                "projective point needs a finite nonzero lift".into(),
            ));
        }
        Ok(ProjPoint(lift))
    }

    pub fn from_coords(x: [f64; 4]) -> Result<Self> {
        Self::new(Vector4::from(x))
    }

    pub fn lift(&self) -> &Vector4<f64> {
        &self.0
    }

    /// Projective equality with relative tolerance.
    pub fn proj_eq(&self, other: &ProjPoint, tol: f64) -> bool {
        let a = self.0 / self.0.norm();
        let b = other.0 / other.0.norm();
        (a - b).norm() <= tol || (a + b).norm() <= tol
    }

    /// Canonical lift: q = −1 and x₄ > 0 for AdS points, unit Euclidean norm for others.
    pub fn normalized(&self) -> ProjPoint {
        let x = self.0;
        let qx = quadratic_form(&x);
        let mut y = if qx < -PROJ_TOL * x.norm_squared() {
            x / (-qx).sqrt()
        } else {
            x / x.norm()
        };
        let sign_ref = if y[3].abs() > PROJ_TOL * y.norm() {
            y[3]
        } else {
            *y.iter()
                .find(|v| v.abs() > PROJ_TOL * y.norm())
                .unwrap_or(&1.0)
        };
        if sign_ref < 0.0 {
            y = -y;
        }
        ProjPoint(y)
    }
}

pub fn classify(p: &ProjPoint) -> PointClass {
    let x = p.0 / p.0.norm();
    let qx = quadratic_form(&x);
    if qx < -PROJ_TOL {
        PointClass::AdS
    } else if qx <= PROJ_TOL {
        PointClass::BoundaryAdS
    } else {
        PointClass::Exterior
    }
}

pub fn minkowski_chart(p: &ProjPoint) -> Result<Vector3<f64>> {
    let x = p.0;
    let rel = x[3].abs() / x.norm();
    if rel < PROJ_TOL {
        return Err(Error::ChartOverflow(rel));
    }
    Ok(Vector3::new(x[0] / x[3], x[1] / x[3], x[2] / x[3]))
}

pub fn from_minkowski_chart(y: &Vector3<f64>) -> ProjPoint {
    ProjPoint(Vector4::new(y[0], y[1], y[2], 1.0))
}

/// Co-Minkowski chart z = (x₁, x₂, x₄)/x₃, centered at the dual plane o*.
pub fn co_minkowski_chart(p: &ProjPoint) -> Result<Vector3<f64>> {
    let x = p.0;
    let rel = x[2].abs() / x.norm();
    if rel < PROJ_TOL {
        return Err(Error::ChartOverflow(rel));
    }
    Ok(Vector3::new(x[0] / x[2], x[1] / x[2], x[3] / x[2]))
}

/// Dual plane p* = {x : b(p, x) = 0}.
pub fn dual_point(p: &ProjPoint) -> ProjPlane {
    ProjPlane(flip_q(&p.0))
}

/// Dual point of a plane.
pub fn dual_plane(pl: &ProjPlane) -> ProjPoint {
    ProjPoint(flip_q(&pl.0))
}

impl ProjPlane {
    pub fn new(covector: Vector4<f64>) -> Result<Self> {
        if covector.norm() == 0.0 {
            return Err(Error::InvalidInput("plane covector must be nonzero".into()));
        }
        Ok(ProjPlane(covector))
    }

    pub fn contains(&self, p: &ProjPoint, tol: f64) -> bool {
        self.0.dot(&p.0).abs() <= tol * self.0.norm() * p.0.norm()
    }

    /// Spacelike for AdS: the dual point lies in AdS.
    pub fn is_spacelike(&self) -> bool {
        classify(&dual_plane(self)) == PointClass::AdS
    }
}

/// Generators of the dual cone C* = {y : b(y, x) ≥ 0 for all x ∈ C} of the cone
/// spanned by the given lifts. Returns dual points (lifts), one per facet of C.
pub fn dual_cone(lifts: &[Vector4<f64>]) -> Result<Vec<Vector4<f64>>> {
    if lifts.len() < 4 {
        return Err(Error::DegenerateInput("need at least 4 generators".into()));
    }
    let unit: Vec<Vector4<f64>> = lifts.iter().map(|x| x / x.norm()).collect();
    let mut m = Vector4::zeros();
    for u in &unit {
        m += u;
    }
    if m.norm() < PROJ_TOL || unit.iter().any(|u| u.dot(&m) <= PROJ_TOL) {
        return Err(Error::DegenerateCone);
    }
    let m = m / m.norm();
    let basis = complement_basis(&m);
    let pts: Vec<Vector3<f64>> = unit
        .iter()
        .map(|u| {
            let s = u.dot(&m);
            Vector3::new(
                basis[0].dot(u) / s,
                basis[1].dot(u) / s,
                basis[2].dot(u) / s,
            )
        })
        .collect();
    let hull = crate::hull::convex_hull(&pts)?;
    let mut out = Vec::with_capacity(hull.faces.len());
    for face in &hull.faces {
        let a = unit[face.vertices[0]];
        let b = unit[face.vertices[1]];
        let c = unit[face.vertices[2]];
        let mut n = cross4(&a, &b, &c);
        // orient so that all generators satisfy n·x ≥ 0
        let s: f64 = unit.iter().map(|u| n.dot(u)).sum();
        if s < 0.0 {
            n = -n;
        }
        out.push(flip_q(&(n / n.norm())));
    }
    Ok(out)
}

/// Orthonormal basis of the Euclidean complement of a unit 4-vector.
pub fn complement_basis(m: &Vector4<f64>) -> [Vector4<f64>; 3] {
    let mut basis: Vec<Vector4<f64>> = Vec::with_capacity(3);
    for i in 0..4 {
        let mut e = Vector4::zeros();
        e[i] = 1.0;
        let mut v = e - m * m.dot(&e);
        for b in &basis {
            v -= b * b.dot(&v);
        }
        if v.norm() > 1e-6 {
            basis.push(v / v.norm());
        }
        if basis.len() == 3 {
            break;
        }
    }
    [basis[0], basis[1], basis[2]]
}

/// Euclidean normal covector to the 3-space spanned by a, b, c.
pub fn cross4(a: &Vector4<f64>, b: &Vector4<f64>, c: &Vector4<f64>) -> Vector4<f64> {
    let minor = |i: usize, j: usize, k: usize| {
        Matrix3::new(a[i], a[j], a[k], b[i], b[j], b[k], c[i], c[j], c[k]).determinant()
    };
    Vector4::new(
        minor(1, 2, 3),
        -minor(0, 2, 3),
        minor(0, 1, 3),
        -minor(0, 1, 2),
    )
}

/// Causal relation and distance between two AdS points.
pub fn ads_relation(p: &ProjPoint, q: &ProjPoint) -> Causality {
    if classify(p) != PointClass::AdS || classify(q) != PointClass::AdS {
        return Causality::Undefined;
    }
    let x = p.normalized().0;
    let mut y = q.normalized().0;
    if bilinear(&x, &y) > 0.0 {
        y = -y;
    }
    let d = x - y;
    let dn = d.norm_squared();
    if dn <= (PROJ_TOL * PROJ_TOL) {
        return Causality::Spacelike(0.0);
    }
    // q(x − y) = −2 − 2 b(x, y); using the difference keeps short distances accurate
    let qd = quadratic_form(&d);
    if qd > CAUSAL_TOL * dn {
        Causality::Spacelike(2.0 * (qd.sqrt() / 2.0).asinh())
    } else if qd < -CAUSAL_TOL * dn {
        let s = ((-qd).sqrt() / 2.0).min(1.0);
        Causality::Timelike(2.0 * s.asin())
    } else {
        Causality::Lightlike
    }
}

/// Spacelike AdS distance, `None` when the pair is not spacelike.
pub fn ads_distance(p: &ProjPoint, q: &ProjPoint) -> Option<f64> {
    match ads_relation(p, q) {
        Causality::Spacelike(d) => Some(d),
        _ => None,
    }
}

/// Mat(2) image of a lift.
pub fn to_mat(x: &Vector4<f64>) -> Matrix2<f64> {
    Matrix2::new(x[0] + x[2], x[1] + x[3], x[1] - x[3], x[2] - x[0])
}

/// Inverse of [`to_mat`].
pub fn from_mat(m: &Matrix2<f64>) -> Vector4<f64> {
    Vector4::new(
        (m[(0, 0)] - m[(1, 1)]) / 2.0,
        (m[(0, 1)] + m[(1, 0)]) / 2.0,
        (m[(0, 0)] + m[(1, 1)]) / 2.0,
        (m[(0, 1)] - m[(1, 0)]) / 2.0,
    )
}

/// Canonical unit representative of a line in ℝ².
pub fn normalize_line(v: &Vector2<f64>) -> Vector2<f64> {
    let u = v / v.norm();
    if u[0] < -PROJ_TOL || (u[0].abs() <= PROJ_TOL && u[1] < 0.0) {
        -u
    } else {
        u
    }
}

/// ∂AdS³ ≅ ℝP¹ × ℝP¹: (image line, row line) of the rank-one matrix.
pub fn boundary_param(p: &ProjPoint) -> Result<(Vector2<f64>, Vector2<f64>)> {
    let m = to_mat(&(p.0 / p.0.norm()));
    let nrm = m.norm();
    let rel = m.determinant().abs() / (nrm * nrm);
    if nrm == 0.0 || rel > PROJ_TOL {
        return Err(Error::RankError(rel));
    }
    let c0 = m.column(0).into_owned();
    let c1 = m.column(1).into_owned();
    let image = if c0.norm() >= c1.norm() { c0 } else { c1 };
    let r0 = m.row(0).transpose();
    let r1 = m.row(1).transpose();
    let row = if r0.norm() >= r1.norm() { r0 } else { r1 };
    Ok((normalize_line(&image), normalize_line(&row)))
}

/// Inverse of [`boundary_param`].
pub fn boundary_point(image: &Vector2<f64>, row: &Vector2<f64>) -> ProjPoint {
    let a = image * row.transpose();
    ProjPoint(from_mat(&a)).normalized()
}

/// 4×4 matrix of X ↦ g_l X g_rᵀ in homogeneous coordinates.
pub fn isom_matrix(gl: &Matrix2<f64>, gr: &Matrix2<f64>) -> Matrix4<f64> {
    let mut out = Matrix4::zeros();
    for i in 0..4 {
        let mut e = Vector4::zeros();
        e[i] = 1.0;
        let img = from_mat(&(gl * to_mat(&e) * gr.transpose()));
        out.set_column(i, &img);
    }
    out
}

pub fn isom_action(gl: &Matrix2<f64>, gr: &Matrix2<f64>, p: &ProjPoint) -> ProjPoint {
    ProjPoint(from_mat(&(gl * to_mat(&p.0) * gr.transpose())))
}

/// g_t = diag(1/t, 1/t, 1/t, 1): homothety from o with coefficient 1/t.
pub fn rescale(t: RescaleParam, p: &ProjPoint) -> ProjPoint {
    let s = 1.0 / t.0;
    ProjPoint(Vector4::new(p.0[0] * s, p.0[1] * s, p.0[2] * s, p.0[3]))
}

/// Action of g_t* = diag(1, 1, 1, 1/t) on planes, so that dual ∘ rescale = rescale_dual ∘ dual.
pub fn rescale_dual(t: RescaleParam, pl: &ProjPlane) -> ProjPlane {
    // covectors transform by the inverse transpose of g_t*
    ProjPlane(Vector4::new(pl.0[0], pl.0[1], pl.0[2], pl.0[3] * t.0))
}

/// Geodesic exponential at o of a tangent vector given in chart coordinates.
pub fn exp_o(v: &Vector3<f64>) -> ProjPoint {
    let n = minkowski_form(v);
    let e4 = Vector4::new(0.0, 0.0, 0.0, 1.0);
    let dir = Vector4::new(v[0], v[1], v[2], 0.0);
    if n > 0.0 {
        let r = n.sqrt();
        ProjPoint(e4 * r.cosh() + dir * (r.sinh() / r))
    } else if n < 0.0 {
        let r = (-n).sqrt();
        ProjPoint(e4 * r.cos() + dir * (r.sin() / r))
    } else {
        ProjPoint(e4 + dir)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeReport {
    pub minkowski_distance: f64,
    pub t: Vec<f64>,
    pub ratios: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of log(error) against log(t); `None` when errors vanish.
    pub slope: Option<f64>,
}

/// d_A(exp_o(t u), exp_o(t w))/t against the Minkowski distance of u and w.
pub fn transition_derivative_probe(
    u: &Vector3<f64>,
    w: &Vector3<f64>,
    t_list: &[f64],
) -> Result<ProbeReport> {
    let diff = u - w;
    let d0 = if diff.norm() == 0.0 {
        0.0
    } else {
        minkowski_length(&diff).ok_or_else(|| {
            Error::InvalidInput("probe directions must be in spacelike relation".into())
        })?
    };
    let mut ratios = Vec::with_capacity(t_list.len());
    let mut errors = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let p = exp_o(&(u * t));
        let q = exp_o(&(w * t));
        let d = match ads_relation(&p, &q) {
            Causality::Spacelike(d) => d,
            other => {
                return Err(Error::InvalidInput(format!("pair at t = {t} is {other:?}")));
            }
        };
        ratios.push(d / t);
        errors.push((d / t - d0).abs());
    }
    let slope = loglog_slope(t_list, &errors);
    Ok(ProbeReport {
        minkowski_distance: d0,
        t: t_list.to_vec(),
        ratios,
        errors,
        slope,
    })
}

/// Least-squares slope of log(y) against log(x) over entries with y > 0.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(x: [f64; 4]) -> ProjPoint {
        ProjPoint::from_coords(x).unwrap()
    }

    #[test]
    fn quadratic_form_basics() {
        assert_eq!(quadratic_form(&Vector4::new(1.0, 0.0, 0.0, 0.0)), 1.0);
        assert_eq!(quadratic_form(&Vector4::new(0.0, 0.0, 0.0, 1.0)), -1.0);
        assert_eq!(quadratic_form(&Vector4::new(1.0, 1.0, 1.0, 1.0)), 0.0);
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&pt([0.0, 0.0, 0.0, 1.0])), PointClass::AdS);
        assert_eq!(classify(&pt([1.0, 1.0, 1.0, 1.0])), PointClass::BoundaryAdS);
        assert_eq!(classify(&pt([1.0, 0.0, 0.0, 0.0])), PointClass::Exterior);
    }

    #[test]
    fn chart_examples() {
        let y = minkowski_chart(&pt([1.0, 2.0, 3.0, 2.0])).unwrap();
        assert_eq!(y, Vector3::new(0.5, 1.0, 1.5));
        assert_eq!(
            minkowski_chart(&pt([0.0, 0.0, 0.0, 1.0])).unwrap(),
            Vector3::zeros()
        );
        assert!(matches!(
            minkowski_chart(&pt([1.0, 0.0, 0.0, 0.0])),
            Err(Error::ChartOverflow(_))
        ));
    }

    #[test]
    fn dual_of_base_point_is_horizontal_plane() {
        let pl = dual_point(&pt([0.0, 0.0, 0.0, 1.0]));
        // b(x, e4) = −x4, so the plane is {x4 = 0}
        assert!(pl.contains(&pt([0.3, -0.2, 1.0, 0.0]), 1e-12));
        assert!(!pl.contains(&pt([0.0, 0.0, 0.0, 1.0]), 1e-12));
    }

    #[test]
    fn dual_of_boundary_point_is_tangent_plane() {
        let p = pt([1.0, 0.0, 1.0, 0.0]);
        let pl = dual_point(&p);
        let grad = Vector4::new(2.0, 0.0, -2.0, 0.0);
        let c = pl.0;
        let cos = c.dot(&grad) / (c.norm() * grad.norm());
        assert!((cos.abs() - 1.0).abs() < 1e-12);
        assert!(pl.contains(&p, 1e-12));
    }

    #[test]
    fn ads_relation_examples() {
        let o = pt([0.0, 0.0, 0.0, 1.0]);
        let s = pt([1f64.sinh(), 0.0, 0.0, 1f64.cosh()]);
        match ads_relation(&o, &s) {
            Causality::Spacelike(d) => assert!((d - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let t = pt([0.0, 0.0, 0.5f64.sin(), 0.5f64.cos()]);
        match ads_relation(&o, &t) {
            Causality::Timelike(d) => assert!((d - 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert_eq!(ads_relation(&o, &o), Causality::Spacelike(0.0));
        let l = pt([0.1, 0.0, 0.1, 1.0]);
        assert_eq!(ads_relation(&o, &l), Causality::Lightlike);
    }

    #[test]
    fn boundary_param_examples() {
        let (im, row) = boundary_param(&pt([1.0, 0.0, 1.0, 0.0])).unwrap();
        assert!((im - Vector2::new(1.0, 0.0)).norm() < 1e-12);
        assert!((row - Vector2::new(1.0, 0.0)).norm() < 1e-12);
        assert!(matches!(
            boundary_param(&pt([0.0, 0.0, 0.0, 1.0])),
            Err(Error::RankError(_))
        ));
    }

    #[test]
    fn diagonal_boundary_pairs_lie_on_base_dual_plane() {
        for k in 0..12 {
            let a = k as f64 * PI / 12.0;
            let v = Vector2::new(a.cos(), a.sin());
            let p = boundary_point(&v, &v);
            assert!(p.0[3].abs() < 1e-12);
            let z = co_minkowski_chart(&p);
            if let Ok(z) = z {
                assert!((z[0] * z[0] + z[1] * z[1] - 1.0).abs() < 1e-9);
            }
            assert!(dual_point(&pt([0.0, 0.0, 0.0, 1.0])).contains(&p, 1e-12));
        }
    }

    #[test]
    fn diagonal_action_fixes_base_point() {
        let g = Matrix2::new(2.0, 1.0, 3.0, 2.0);
        let o = pt([0.0, 0.0, 0.0, 1.0]);
        assert!(isom_action(&g, &g, &o).proj_eq(&o, 1e-12));
        let h = Matrix2::new(1.0, 1.0, 0.0, 1.0);
        assert!(!isom_action(&g, &h, &o).proj_eq(&o, 1e-6));
    }

    #[test]
    fn rescale_examples() {
        let t = RescaleParam::new(0.5).unwrap();
        let p = rescale(t, &from_minkowski_chart(&Vector3::new(1.0, 0.0, 0.0)));
        assert!((minkowski_chart(&p).unwrap() - Vector3::new(2.0, 0.0, 0.0)).norm() < 1e-15);
        let one = RescaleParam::new(1.0).unwrap();
        let q = pt([0.3, 0.1, 0.2, 1.0]);
        assert_eq!(rescale(one, &q), q);
        assert!(RescaleParam::new(0.0).is_err());
    }

    #[test]
    fn probe_examples() {
        let u = Vector3::new(1.0, 0.0, 0.0);
        let w = Vector3::new(-1.0, 0.0, 0.0);
        let ts = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        let r = transition_derivative_probe(&u, &w, &ts).unwrap();
        assert!((r.minkowski_distance - 2.0).abs() < 1e-15);
        assert!((r.ratios[4] - 2.0).abs() < 1e-5);
        let g = transition_derivative_probe(
            &Vector3::new(0.8, 0.3, 0.4),
            &Vector3::new(-0.2, 0.5, -0.1),
            &ts,
        )
        .unwrap();
        assert!((g.ratios[4] - g.minkowski_distance).abs() < 1e-4);
        assert!(g.slope.unwrap() >= 1.9, "{:?}", g.slope);
        let same = transition_derivative_probe(&u, &u, &ts).unwrap();
        assert!(same.ratios.iter().all(|r| *r == 0.0));
        assert!(same.slope.is_none());
    }

    #[test]
    fn exp_stays_on_quadric() {
        for v in [
            Vector3::new(0.3, 0.2, 0.1),
            Vector3::new(0.1, 0.0, 0.5),
            Vector3::new(0.2, 0.0, 0.2),
        ] {
            let p = exp_o(&v);
            assert!((quadratic_form(&p.0) + 1.0).abs() < 1e-12);
        }
    }
}
