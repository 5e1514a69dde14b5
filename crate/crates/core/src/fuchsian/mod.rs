//! Genus-2 surface-group representations into PSL(2, ℝ).

pub mod cocycle;
pub mod fenchel_nielsen;
pub mod group;
pub mod word;

use nalgebra::{Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use cocycle::Cocycle;
pub use fenchel_nielsen::{build_genus2, fn_tangent_matrix, twist};
pub use group::{ball, elem_eq, reference_rep, GroupBall};
pub use word::Word;

/// Tolerance for "hyperbolic" classification of |tr| − 2.
pub const HYPERBOLIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuchsianRep {
    /// Images of a₁, b₁, a₂, b₂.
    pub gens: [Matrix2<f64>; 4],
    /// Fenchel–Nielsen coordinates (ℓ_{a1}, ℓ_{a2}, ℓ_K, θ_{a1}, θ_{a2}, θ_K) when built from them.
    pub fn_coords: Option<[f64; 6]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscretenessReport {
    pub relator_error: f64,
    pub min_abs_trace: f64,
    pub short_relations: usize,
    pub passed: bool,
}

impl FuchsianRep {
    /// Rep from explicit matrices; checks determinants and the relator.
    pub fn from_matrices(gens: [Matrix2<f64>; 4]) -> Result<Self> {
        for (i, g) in gens.iter().enumerate() {
            if (g.determinant() - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "generator {i} has det {}",
                    g.determinant()
                )));
            }
        }
        let rep = FuchsianRep {
            gens,
            fn_coords: None,
        };
        let err = rep.relator_error();
        if err > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "relator evaluates to ±I only within {err:e}"
            )));
        }
        Ok(rep)
    }

    pub fn generator(&self, letter: i8) -> Matrix2<f64> {
        let g = self.gens[(letter.unsigned_abs() - 1) as usize];
        if letter > 0 {
            g
        } else {
            inverse_sl2(&g)
        }
    }

    pub fn evaluate(&self, w: &Word) -> Matrix2<f64> {
        let mut m = Matrix2::identity();
        for &l in &w.0 {
            m *= self.generator(l);
        }
        m
    }

    /// ‖ρ(relator) ∓ I‖ (max-entry norm, best sign).
    pub fn relator_error(&self) -> f64 {
        let r = self.evaluate(&Word::relator());
        let id = Matrix2::identity();
        (r - id).amax().min((r + id).amax())
    }

    pub fn translation_length(&self, w: &Word) -> Result<f64> {
        translation_length(&self.evaluate(w))
    }

    pub fn fixed_points(&self, w: &Word) -> Result<(Vector2<f64>, Vector2<f64>)> {
        fixed_points(&self.evaluate(w))
    }

    /// g ρ g⁻¹ (drops provenance coordinates).
    pub fn conjugate(&self, g: &Matrix2<f64>) -> FuchsianRep {
        let gi = g.try_inverse().expect("invertible conjugator");
        FuchsianRep {
            gens: self.gens.map(|m| g * m * gi),
            fn_coords: None,
        }
    }

    /// Trace and short-relation heuristics.
    pub fn discreteness_report(&self) -> DiscretenessReport {
        let mut min_tr = f64::INFINITY;
        let mut short = 0;
        let letters: [i8; 8] = [1, -1, 2, -2, 3, -3, 4, -4];
        let mut stack: Vec<(Matrix2<f64>, i8, usize)> =
            letters.iter().map(|&l| (self.generator(l), l, 1)).collect();
        while let Some((m, last, len)) = stack.pop() {
            if len <= 3 {
                min_tr = min_tr.min(m.trace().abs());
            }
            let id = Matrix2::identity();
            if (m - id).amax().min((m + id).amax()) < 1e-6 {
                short += 1;
            }
            if len < 6 {
                for &l in &letters {
                    if l != -last {
                        stack.push((m * self.generator(l), l, len + 1));
                    }
                }
            }
        }
        let relator_error = self.relator_error();
        DiscretenessReport {
            relator_error,
            min_abs_trace: min_tr,
            short_relations: short,
            passed: relator_error < 1e-8 && min_tr > 2.0 + HYPERBOLIC_TOL && short == 0,
        }
    }
}

pub fn inverse_sl2(g: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)])
}

pub fn translation_length(m: &Matrix2<f64>) -> Result<f64> {
    let t = m.trace().abs();
    if t <= 2.0 + HYPERBOLIC_TOL {
        return Err(Error::NotHyperbolic(t));
    }
    Ok(2.0 * (t / 2.0).acosh())
}

/// Eigenvalues of a hyperbolic SL(2) matrix, larger modulus first.
fn eigenvalues(m: &Matrix2<f64>) -> Result<(f64, f64)> {
    let t = m.trace();
    if t.abs() <= 2.0 + HYPERBOLIC_TOL {
        return Err(Error::NotHyperbolic(t.abs()));
    }
    let s = (t * t - 4.0).sqrt();
    let big = if t > 0.0 {
        (t + s) / 2.0
    } else {
        (t - s) / 2.0
    };
    Ok((big, 1.0 / big))
}

fn eigenvector(m: &Matrix2<f64>, lambda: f64) -> Vector2<f64> {
    let v1 = Vector2::new(m[(0, 1)], lambda - m[(0, 0)]);
    let v2 = Vector2::new(lambda - m[(1, 1)], m[(1, 0)]);
    let v = if v1.norm() >= v2.norm() { v1 } else { v2 };
    v / v.norm()
}

/// (attracting, repelling) fixed lines in ℝP¹.
pub fn fixed_points(m: &Matrix2<f64>) -> Result<(Vector2<f64>, Vector2<f64>)> {
    let (big, small) = eigenvalues(m)?;
    Ok((
        crate::projective::normalize_line(&eigenvector(m, big)),
        crate::projective::normalize_line(&eigenvector(m, small)),
    ))
}

/// Eigenvector matrix (attracting column first) with det = 1.
pub fn eigenframe(m: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    let (big, small) = eigenvalues(m)?;
    let mut f = Matrix2::from_columns(&[eigenvector(m, big), eigenvector(m, small)]);
    if f.determinant() < 0.0 {
        f.set_column(1, &(-f.column(1)));
    }
    Ok(f / f.determinant().sqrt())
}

/// Translation by `w` along the axis of m, towards its attracting end.
pub fn axis_translation(m: &Matrix2<f64>, w: f64) -> Result<Matrix2<f64>> {
    let f = eigenframe(m)?;
    let d = Matrix2::new((w / 2.0).exp(), 0.0, 0.0, (-w / 2.0).exp());
    Ok(f * d * inverse_sl2(&f))
}

/// Hyperboloid point (y₁, y₂, y₃), y₃ > 0, as the positive definite matrix (y₃+y₁, y₂; y₂, y₃−y₁).
pub fn sym_of(y: &Vector3<f64>) -> Matrix2<f64> {
    Matrix2::new(y[2] + y[0], y[1], y[1], y[2] - y[0])
}

pub fn vec_of_sym(s: &Matrix2<f64>) -> Vector3<f64> {
    Vector3::new(
        (s[(0, 0)] - s[(1, 1)]) / 2.0,
        (s[(0, 1)] + s[(1, 0)]) / 2.0,
        (s[(0, 0)] + s[(1, 1)]) / 2.0,
    )
}

/// SO(2,1) image of g acting by S ↦ g S gᵀ on (y₁, y₂, y₃).
pub fn linear_part(g: &Matrix2<f64>) -> nalgebra::Matrix3<f64> {
    let mut out = nalgebra::Matrix3::zeros();
    for i in 0..3 {
        let mut e = Vector3::zeros();
        e[i] = 1.0;
        out.set_column(i, &vec_of_sym(&(g * sym_of(&e) * g.transpose())));
    }
    out
}
