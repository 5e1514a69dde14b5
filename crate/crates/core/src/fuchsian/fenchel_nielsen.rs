//! Fenchel–Nielsen construction for the pants decomposition {a₁, a₂, K = [a₁, b₁]}.
//!
//! Each one-holed torus is built with a₁ diagonal and b₁ a hyperbolic along
//! the real axis, with the boundary length fixed by the trace of the
//! commutator. The second torus is conjugated so that its commutator is the
//! inverse of the first, and slid along K until the perpendicular feet of
//! a₁ and a₂ on K coincide. Twists are then applied as exact flows.

use nalgebra::Matrix2;

use super::{axis_translation, eigenframe, inverse_sl2, FuchsianRep, Word};
use crate::error::{Error, Result};

/// The three pants curves, in the order of the length coordinates.
pub fn pants_curves() -> [Word; 3] {
    [Word::new(&[1]), Word::new(&[3]), Word::new(&[1, 2, -1, -2])]
}

fn one_holed_torus(la: f64, lk: f64) -> (Matrix2<f64>, Matrix2<f64>) {
    let a = Matrix2::new((la / 2.0).exp(), 0.0, 0.0, (-la / 2.0).exp());
    // tr[a, b] = 2 − 4 sinh²(la/2) sinh²(m/2) = −2 cosh(lk/2)
    let m2 = ((lk / 4.0).cosh() / (la / 2.0).sinh()).asinh();
    let b = Matrix2::new(m2.cosh(), m2.sinh(), m2.sinh(), m2.cosh());
    (a, b)
}

fn commutator(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix2<f64> {
    a * b * inverse_sl2(a) * inverse_sl2(b)
}

/// Position of the perpendicular foot of the axis of `g` on the axis of the frame,
/// as the signed log-height in the frame coordinates (axis = imaginary half-line).
fn foot(frame_inv: &Matrix2<f64>, g: &Matrix2<f64>) -> Result<(f64, f64)> {
    let (p, q) = super::fixed_points(g)?;
    let p = frame_inv * p;
    let q = frame_inv * q;
    let (x, y) = (p[0] / p[1], q[0] / q[1]);
    let prod = x * y;
    if !(prod > 0.0) {
        return Err(Error::ConstructionError(
            "pants curve crosses the gluing curve".into(),
        ));
    }
    Ok((0.5 * prod.ln(), x.signum()))
}

pub fn build_genus2(fn_coords: &[f64; 6]) -> Result<FuchsianRep> {
    let [l1, l2, lk, t1, t2, tk] = *fn_coords;
    if !(l1 > 0.0 && l2 > 0.0 && lk > 0.0) || fn_coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConstructionError(format!(
            "lengths must be positive and finite: {fn_coords:?}"
        )));
    }
    let (a1, b1) = one_holed_torus(l1, lk);
    let (a2p, b2p) = one_holed_torus(l2, lk);
    let k1 = commutator(&a1, &b1);
    let k2p = commutator(&a2p, &b2p);
    let target = inverse_sl2(&k1);
    let c0 = eigenframe(&target)? * inverse_sl2(&eigenframe(&k2p)?);
    let frame = eigenframe(&k1)?;
    let frame_inv = inverse_sl2(&frame);
    let (h1, s1) = foot(&frame_inv, &a1)?;
    let a2c = c0 * a2p * inverse_sl2(&c0);
    let (h2, s2) = foot(&frame_inv, &a2c)?;
    if s1 == s2 {
        return Err(Error::ConstructionError(
            "both tori lie on the same side of the gluing curve".into(),
        ));
    }
    // z ↦ μ z in the frame moves the foot of a₂ onto the height of the foot of a₁
    let mu = (h1 - h2).exp();
    let slide = frame * Matrix2::new(mu.sqrt(), 0.0, 0.0, 1.0 / mu.sqrt()) * frame_inv;
    let c = slide * c0;
    let ci = inverse_sl2(&c);
    let a2 = c * a2p * ci;
    let b2 = c * b2p * ci;
    // recenter so that K runs along the imaginary axis with the common foot at i
    let g = inverse_sl2(&(frame * Matrix2::new((h1 / 2.0).exp(), 0.0, 0.0, (-h1 / 2.0).exp())));
    let gi = inverse_sl2(&g);
    let gens = [a1, b1, a2, b2].map(|m| {
        let m = g * m * gi;
        m / m.determinant().sqrt()
    });
    let base = FuchsianRep {
        gens,
        fn_coords: Some([l1, l2, lk, 0.0, 0.0, 0.0]),
    };
    let [ca1, ca2, ck] = pants_curves();
    let r = twist(&base, &ca1, t1)?;
    let r = twist(&r, &ca2, t2)?;
    twist(&r, &ck, tk)
}

/// Twist of weight `weight` along one of the pants curves.
pub fn twist(rep: &FuchsianRep, curve: &Word, weight: f64) -> Result<FuchsianRep> {
    let curves = pants_curves();
    let which = curves
        .iter()
        .position(|c| c == curve)
        .ok_or_else(|| Error::UnsupportedCurve(curve.to_string()))?;
    let mut gens = rep.gens;
    if weight != 0.0 {
        let t = axis_translation(&rep.evaluate(curve), weight)?;
        match which {
            0 => gens[1] *= t,
            1 => gens[3] *= t,
            _ => {
                let ti = inverse_sl2(&t);
                gens[2] = t * gens[2] * ti;
                gens[3] = t * gens[3] * ti;
            }
        }
        gens = gens.map(|g| g / g.determinant().sqrt());
    }
    let fn_coords = rep.fn_coords.map(|mut c| {
        c[3 + which] += weight;
        c
    });
    Ok(FuchsianRep { gens, fn_coords })
}

/// 12 × 6 matrix of d/dδ of the cocycle of s ↦ FN(c + sδ), in ψ-coordinates.
pub fn fn_tangent_matrix(fn_coords: &[f64; 6]) -> Result<nalgebra::DMatrix<f64>> {
    build_genus2(fn_coords)?;
    let h = 1e-4
        * fn_coords[..3]
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
    let mut m = nalgebra::DMatrix::zeros(12, 6);
    for k in 0..6 {
        let path = |s: f64| {
            let mut c = *fn_coords;
            c[k] += s;
            build_genus2(&c).expect("coordinates near a valid point")
        };
        let v = super::cocycle::cocycle_from_path(path, h).to_vector();
        for i in 0..12 {
            m[(i, k)] = v[i];
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::word::reduced_words;

    #[test]
    fn relator_holds() {
        let r = build_genus2(&[2.0, 2.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(r.relator_error() < 1e-10, "{}", r.relator_error());
        for fnc in [
            [1.5, 3.0, 1.0, 0.3, -1.0, 2.0],
            [2.2, 2.0, 1.8, 0.3, -0.2, 0.1],
        ] {
            let r = build_genus2(&fnc).unwrap();
            assert!(r.relator_error() < 1e-9, "{}", r.relator_error());
            for g in &r.gens {
                assert!((g.determinant() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pants_lengths_match() {
        let fnc = [1.3, 2.1, 0.9, 0.4, -0.3, 0.7];
        let r = build_genus2(&fnc).unwrap();
        for (c, l) in pants_curves().iter().zip(&fnc[..3]) {
            assert!((r.translation_length(c).unwrap() - l).abs() < 1e-9);
        }
    }

    #[test]
    fn twist_zero_is_identity() {
        let r = build_genus2(&[2.0, 2.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        for c in pants_curves() {
            assert_eq!(twist(&r, &c, 0.0).unwrap().gens, r.gens);
        }
        assert!(matches!(
            twist(&r, &Word::new(&[2]), 1.0),
            Err(Error::UnsupportedCurve(_))
        ));
    }

    #[test]
    fn twist_is_additive_on_spectra() {
        let r = build_genus2(&[1.5, 2.5, 1.2, 0.0, 0.0, 0.0]).unwrap();
        let words: Vec<Word> = reduced_words(4).into_iter().skip(1).step_by(7).collect();
        for c in pants_curves() {
            let two = twist(&twist(&r, &c, 0.4).unwrap(), &c, 0.9).unwrap();
            let one = twist(&r, &c, 1.3).unwrap();
            for w in &words {
                let a = two.translation_length(w).unwrap();
                let b = one.translation_length(w).unwrap();
                assert!((a - b).abs() < 1e-8);
            }
            assert!(
                (one.translation_length(&c).unwrap() - r.translation_length(&c).unwrap()).abs()
                    < 1e-9
            );
        }
    }

    #[test]
    fn twist_matches_construction() {
        let base = build_genus2(&[1.5, 2.5, 1.2, 0.0, 0.0, 0.0]).unwrap();
        let direct = build_genus2(&[1.5, 2.5, 1.2, 0.3, 0.2, -0.4]).unwrap();
        let [c1, c2, ck] = pants_curves();
        let t = twist(
            &twist(&twist(&base, &c1, 0.3).unwrap(), &c2, 0.2).unwrap(),
            &ck,
            -0.4,
        )
        .unwrap();
        for (a, b) in t.gens.iter().zip(&direct.gens) {
            assert!((a - b).amax() < 1e-10);
        }
    }

    #[test]
    fn discreteness_heuristic_passes() {
        let r = build_genus2(&[2.0, 2.0, 2.0, 0.0, 0.0, 0.0]).unwrap();
        let rep = r.discreteness_report();
        assert!(rep.passed, "{rep:?}");
    }
}
