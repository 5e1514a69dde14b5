//! 𝔰𝔩₂-valued cocycles, the Minkowski affine action, and H¹ coordinates.
//!
//! The identification ψ: 𝔰𝔩₂ → ℝ^{2,1} sends X to the Minkowski coordinates of
//! the symmetric matrix J Xᵀ (J = (0, 1; −1, 0)). For X = (a, b; c, −a) this is
//! ψ(X) = ((b+c)/2, −a, (b−c)/2), with −det X = y₁² + y₂² − y₃² and
//! ψ(g X g⁻¹) = A(g) ψ(X) for the linear part A(g): S ↦ g S gᵀ.

use nalgebra::{DMatrix, Matrix2, Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use super::{inverse_sl2, linear_part, FuchsianRep, Word};

pub fn psi(x: &Matrix2<f64>) -> Vector3<f64> {
    let (a, b, c) = (x[(0, 0)], x[(0, 1)], x[(1, 0)]);
    Vector3::new((b + c) / 2.0, -a, (b - c) / 2.0)
}

pub fn psi_inv(y: &Vector3<f64>) -> Matrix2<f64> {
    Matrix2::new(-y[1], y[0] + y[2], y[0] - y[2], y[1])
}

/// Traceless part of a 2×2 matrix.
pub fn traceless(x: &Matrix2<f64>) -> Matrix2<f64> {
    x - Matrix2::identity() * (x.trace() / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cocycle {
    /// Values on a₁, b₁, a₂, b₂ (traceless).
    pub values: [Matrix2<f64>; 4],
    pub base: FuchsianRep,
}

impl Cocycle {
    pub fn zero(base: &FuchsianRep) -> Self {
        Cocycle {
            values: [Matrix2::zeros(); 4],
            base: base.clone(),
        }
    }

    /// From ψ-coordinates of the four generator values.
    pub fn from_vector(base: &FuchsianRep, v: &[f64]) -> Self {
        assert_eq!(v.len(), 12);
        let values =
            std::array::from_fn(|i| psi_inv(&Vector3::new(v[3 * i], v[3 * i + 1], v[3 * i + 2])));
        Cocycle {
            values,
            base: base.clone(),
        }
    }

    pub fn to_vector(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for i in 0..4 {
            let y = psi(&self.values[i]);
            out[3 * i..3 * i + 3].copy_from_slice(y.as_slice());
        }
        out
    }

    /// Coboundary γ ↦ Ad_{ρ(γ)} x − x for x ∈ 𝔰𝔩₂ given in ψ-coordinates.
    pub fn coboundary(base: &FuchsianRep, x: &Vector3<f64>) -> Self {
        let xm = psi_inv(x);
        let values = std::array::from_fn(|i| {
            let g = base.gens[i];
            g * xm * inverse_sl2(&g) - xm
        });
        Cocycle {
            values,
            base: base.clone(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Cocycle {
            values: self.values.map(|v| v * s),
            base: self.base.clone(),
        }
    }

    pub fn add(&self, other: &Cocycle) -> Self {
        Cocycle {
            values: std::array::from_fn(|i| self.values[i] + other.values[i]),
            base: self.base.clone(),
        }
    }

    fn letter_value(&self, l: i8) -> Matrix2<f64> {
        let i = (l.unsigned_abs() - 1) as usize;
        if l > 0 {
            self.values[i]
        } else {
            let gi = inverse_sl2(&self.base.gens[i]);
            -(gi * self.values[i] * self.base.gens[i])
        }
    }

    /// Extended value τ(w) via τ(γ₁γ₂) = τ(γ₁) + Ad_{ρ(γ₁)} τ(γ₂).
    pub fn evaluate(&self, w: &Word) -> Matrix2<f64> {
        let mut m = Matrix2::identity();
        let mut t = Matrix2::zeros();
        for &l in &w.0 {
            t += m * self.letter_value(l) * inverse_sl2(&m);
            m *= self.base.generator(l);
        }
        t
    }

    /// Norm of τ(relator), relative to the size of the values.
    pub fn relator_residual(&self) -> f64 {
        let scale = self.values.iter().map(|v| v.amax()).fold(1e-300, f64::max);
        self.evaluate(&Word::relator()).amax() / scale.max(1.0)
    }

    /// Affine Minkowski action p ↦ A(ρ(w)) p + ψ(τ(w)).
    pub fn affine_action(&self, w: &Word, p: &Vector3<f64>) -> Vector3<f64> {
        linear_part(&self.base.evaluate(w)) * p + psi(&self.evaluate(w))
    }

    /// Homogeneous 4×4 matrix of the affine action of w.
    pub fn affine_matrix(&self, w: &Word) -> Matrix4<f64> {
        affine_matrix(
            &linear_part(&self.base.evaluate(w)),
            &psi(&self.evaluate(w)),
        )
    }

    /// Affine matrices of all ball elements, computed along the ball's parent tree.
    pub fn ball_matrices(&self, ball: &super::GroupBall) -> Vec<Matrix4<f64>> {
        let gens: Vec<Matrix4<f64>> = [1i8, -1, 2, -2, 3, -3, 4, -4]
            .iter()
            .map(|&l| {
                affine_matrix(
                    &linear_part(&self.base.generator(l)),
                    &psi(&self.letter_value(l)),
                )
            })
            .collect();
        let idx = |l: i8| ((l.unsigned_abs() as usize - 1) * 2) + usize::from(l < 0);
        let mut out = Vec::with_capacity(ball.len());
        out.push(Matrix4::identity());
        for i in 1..ball.len() {
            let m = out[ball.parent[i]] * gens[idx(ball.letter[i])];
            out.push(m);
        }
        out
    }
}

pub fn affine_matrix(a: &Matrix3<f64>, t: &Vector3<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(a);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(t);
    m
}

/// τ(γ) = d/dt ρ_t(γ) ρ₀(γ)⁻¹ at t = 0, by Richardson-extrapolated central differences.
pub fn cocycle_from_path<F>(path: F, h: f64) -> Cocycle
where
    F: Fn(f64) -> FuchsianRep,
{
    let base = path(0.0);
    let d = |h: f64| -> [Matrix2<f64>; 4] {
        let p = path(h);
        let m = path(-h);
        std::array::from_fn(|i| (p.gens[i] - m.gens[i]) / (2.0 * h))
    };
    let d1 = d(h);
    let d2 = d(h / 2.0);
    let values = std::array::from_fn(|i| {
        let deriv = (d2[i] * 4.0 - d1[i]) / 3.0;
        traceless(&(deriv * inverse_sl2(&base.gens[i])))
    });
    Cocycle { values, base }
}

/// 3×12 matrix of τ ↦ ψ(τ(relator)) in ψ-coordinates.
pub fn relator_map(base: &FuchsianRep) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(3, 12);
    for j in 0..12 {
        let mut v = [0.0; 12];
        v[j] = 1.0;
        let t = Cocycle::from_vector(base, &v);
        let y = psi(&t.evaluate(&Word::relator()));
        for i in 0..3 {
            m[(i, j)] = y[i];
        }
    }
    m
}

/// 12×3 matrix of x ↦ coboundary(x) in ψ-coordinates.
pub fn coboundary_map(base: &FuchsianRep) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(12, 3);
    for j in 0..3 {
        let mut x = Vector3::zeros();
        x[j] = 1.0;
        let v = Cocycle::coboundary(base, &x).to_vector();
        for i in 0..12 {
            m[(i, j)] = v[i];
        }
    }
    m
}

/// Orthonormal basis (12 × 6) of cocycles orthogonal to coboundaries.
pub fn h1_basis(base: &FuchsianRep) -> DMatrix<f64> {
    let r = relator_map(base);
    let b = coboundary_map(base);
    // constraints: relator map (3 rows) and orthogonality to coboundaries (3 rows)
    let mut c = DMatrix::zeros(6, 12);
    c.view_mut((0, 0), (3, 12)).copy_from(&r);
    c.view_mut((3, 0), (3, 12)).copy_from(&b.transpose());
    null_space(&c, 6)
}

/// Orthonormal basis of the null space of `m`, of the given dimension.
pub fn null_space(m: &DMatrix<f64>, dim: usize) -> DMatrix<f64> {
    let n = m.ncols();
    let mtm = m.transpose() * m;
    let eig = nalgebra::SymmetricEigen::new(mtm);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut out = DMatrix::zeros(n, dim);
    for (k, &i) in idx.iter().take(dim).enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        // deterministic sign
        let piv = v.iamax();
        if v[piv] < 0.0 {
            v = -v;
        }
        out.set_column(k, &v);
    }
    out
}

/// Decompose τ = Σ cᵢ hᵢ + coboundary(x) in the min-norm basis; returns (c, x).
pub fn h1_decompose(tau: &Cocycle, basis: &DMatrix<f64>) -> (Vec<f64>, Vector3<f64>) {
    let b = coboundary_map(&tau.base);
    let v = nalgebra::DVector::from_row_slice(&tau.to_vector());
    let mut a = DMatrix::zeros(12, basis.ncols() + 3);
    a.view_mut((0, 0), (12, basis.ncols())).copy_from(basis);
    a.view_mut((0, basis.ncols()), (12, 3)).copy_from(&b);
    let sol = a.svd(true, true).solve(&v, 1e-12).expect("svd solve");
    let k = basis.ncols();
    (
        sol.rows(0, k).iter().copied().collect(),
        Vector3::new(sol[k], sol[k + 1], sol[k + 2]),
    )
}

pub fn cocycle_from_h1(base: &FuchsianRep, basis: &DMatrix<f64>, coeffs: &[f64]) -> Cocycle {
    let v = basis * nalgebra::DVector::from_column_slice(coeffs);
    Cocycle::from_vector(base, v.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::{build_genus2, fenchel_nielsen::pants_curves, twist};

    fn rep() -> FuchsianRep {
        build_genus2(&[2.2, 2.0, 1.8, 0.3, -0.2, 0.1]).unwrap()
    }

    #[test]
    fn psi_is_equivariant_and_isometric() {
        let x = Matrix2::new(0.3, 1.2, -0.7, -0.3);
        let g = Matrix2::new(2.0, 1.0, 3.0, 2.0);
        let lhs = psi(&(g * x * inverse_sl2(&g)));
        let rhs = linear_part(&g) * psi(&x);
        assert!((lhs - rhs).norm() < 1e-12);
        let y = psi(&x);
        assert!((y[0] * y[0] + y[1] * y[1] - y[2] * y[2] + x.determinant()).abs() < 1e-12);
        assert!((psi_inv(&y) - x).amax() < 1e-15);
    }

    #[test]
    fn constant_path_gives_zero() {
        let r = rep();
        let t = cocycle_from_path(|_| r.clone(), 1e-5);
        assert!(t.values.iter().all(|v| v.amax() < 1e-12));
    }

    #[test]
    fn conjugation_path_gives_coboundary() {
        let r = rep();
        let x = Vector3::new(0.2, -0.4, 0.1);
        let xm = psi_inv(&x);
        let t = cocycle_from_path(
            |s| {
                let g = (xm * s).exp();
                r.conjugate(&g)
            },
            1e-5,
        );
        // d/ds (g ρ g⁻¹) ρ⁻¹ = x − Ad x, the coboundary of −x
        let cob = Cocycle::coboundary(&r, &(-x));
        for (a, b) in t.values.iter().zip(&cob.values) {
            assert!((a - b).amax() < 1e-7);
        }
    }

    #[test]
    fn twist_path_satisfies_cocycle_condition() {
        let r = rep();
        let k = pants_curves()[2].clone();
        let t = cocycle_from_path(|s| twist(&r, &k, s).unwrap(), 1e-5);
        assert!(t.relator_residual() < 1e-6);
        let w1 = Word::new(&[1, 3, -2]);
        let w2 = Word::new(&[4, 4, -1]);
        let lhs = t.evaluate(&w1.mul(&w2));
        let rm = r.evaluate(&w1);
        let rhs = t.evaluate(&w1) + rm * t.evaluate(&w2) * inverse_sl2(&rm);
        assert!((lhs - rhs).amax() < 1e-6 * rhs.amax().max(1.0));
    }

    #[test]
    fn h1_has_dimension_six() {
        let r = rep();
        let basis = h1_basis(&r);
        let rm = relator_map(&r);
        assert!((&rm * &basis).amax() < 1e-9);
        assert!((coboundary_map(&r).transpose() * &basis).amax() < 1e-9);
        let gram = basis.transpose() * &basis;
        assert!((gram - DMatrix::identity(6, 6)).amax() < 1e-9);
        let eig = nalgebra::SymmetricEigen::new(rm.transpose() * &rm);
        let top = eig.eigenvalues.amax();
        let zeros = eig
            .eigenvalues
            .iter()
            .filter(|v| v.abs() < 1e-12 * top)
            .count();
        assert_eq!(zeros, 9);
    }

    #[test]
    fn decomposition_roundtrip() {
        let r = rep();
        let basis = h1_basis(&r);
        let c = [0.1, -0.2, 0.3, 0.05, 0.0, -0.1];
        let x = Vector3::new(0.3, 0.1, -0.2);
        let tau = cocycle_from_h1(&r, &basis, &c).add(&Cocycle::coboundary(&r, &x));
        let (c2, x2) = h1_decompose(&tau, &basis);
        for (a, b) in c.iter().zip(&c2) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((x - x2).norm() < 1e-10);
    }
}
