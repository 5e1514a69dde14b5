//! Rescaled AdS configurations converging to a Minkowski configuration.

use nalgebra::{Vector3, Vector4};
use serde::{Deserialize, Serialize};

use super::{convex_boundary, intrinsic_metric, Ambient, HullSurface, VertexConfig};
use crate::error::{Error, Result};
use crate::fuchsian::cocycle::h1_decompose;
use crate::fuchsian::{build_genus2, elem_eq, fn_tangent_matrix};
use crate::projective::{loglog_slope, ProjPoint};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionStep {
    pub t: f64,
    pub subdivision: Option<bool>,
    /// (AdS length)/(t · Minkowski length) per edge of the Minkowski triangulation.
    pub ratios: Vec<f64>,
    pub max_ratio_error: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionReport {
    pub steps: Vec<TransitionStep>,
    /// Log-log slope of the maximal ratio error against t.
    pub slope: Option<f64>,
    /// Once the subdivision holds it keeps holding as t decreases.
    pub monotone: bool,
}

/// Fenchel–Nielsen direction δ and base-point shift x with τ = τ_FN(δ) + coboundary(x).
fn fn_direction(c0: &VertexConfig) -> Result<([f64; 6], [f64; 6], Vector3<f64>)> {
    let Ambient::Minkowski { rep, tau } = &c0.geometry else {
        return Err(Error::InvalidInput(
            "transition needs a Minkowski configuration".into(),
        ));
    };
    let fnc = rep.fn_coords.ok_or_else(|| {
        Error::InvalidInput("holonomy must carry Fenchel–Nielsen coordinates".into())
    })?;
    let d = fn_tangent_matrix(&fnc)?;
    let (delta, x) = h1_decompose(tau, &d);
    Ok((fnc, std::array::from_fn(|i| delta[i]), x))
}

/// AdS configuration at parameter t: holonomy FN(c ∓ tδ/2) and chart points t·(y + x).
pub fn minkowski_to_ads(c0: &VertexConfig, t: f64) -> Result<VertexConfig> {
    let (fnc, delta, x) = fn_direction(c0)?;
    let left = build_genus2(&std::array::from_fn(|i| fnc[i] - t * delta[i] / 2.0))?;
    let right = build_genus2(&std::array::from_fn(|i| fnc[i] + t * delta[i] / 2.0))?;
    let pts = c0
        .minkowski_points()
        .iter()
        .map(|y| {
            let z = (y + x) * t;
            ProjPoint(Vector4::new(z[0], z[1], z[2], 1.0))
        })
        .collect();
    VertexConfig::ads(left, right, pts, c0.side)
}

/// Whether every face of `fine` is, up to translation, a sub-cell of a face of `coarse`.
pub fn is_subdivision(fine: &HullSurface, coarse: &HullSurface) -> bool {
    fine.faces.iter().all(|a| {
        coarse.faces.iter().any(|m| {
            let a0 = &a.vertices[0];
            m.vertices.iter().filter(|l| l.id == a0.id).any(|anchor| {
                let g = anchor.word.mul(&a0.word.inverse());
                a.vertices.iter().all(|l| {
                    let moved = g.mul(&l.word);
                    m.vertices
                        .iter()
                        .any(|ml| ml.id == l.id && elem_eq(&ml.word, &moved))
                })
            })
        })
    })
}

pub fn transition_check(
    c0: &VertexConfig,
    t_list: &[f64],
    max_len: usize,
    limit_len: usize,
) -> Result<TransitionReport> {
    let mink = convex_boundary(c0, max_len, 0)?;
    let mink_metric = intrinsic_metric(&mink)?;
    let mut steps = Vec::new();
    for &t in t_list {
        let ads = minkowski_to_ads(c0, t)?;
        let ratios = mink_metric
            .tri
            .edges
            .iter()
            .zip(&mink_metric.lengths)
            .map(|(e, l)| {
                ads.edge_length(e.ends[0], e.ends[1], &e.word)
                    .map(|d| d / (t * l))
            })
            .collect::<Result<Vec<f64>>>()?;
        let max_ratio_error = ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
        let (subdivision, error) = match convex_boundary(&ads, max_len, limit_len) {
            Ok(s) => (Some(is_subdivision(&s, &mink)), None),
            Err(e) => (None, Some(e.to_string())),
        };
        steps.push(TransitionStep {
            t,
            subdivision,
            ratios,
            max_ratio_error,
            error,
        });
    }
    let mut order: Vec<usize> = (0..steps.len()).collect();
    order.sort_by(|&a, &b| steps[b].t.total_cmp(&steps[a].t));
    let mut seen_true = false;
    let mut monotone = true;
    for &i in &order {
        match steps[i].subdivision {
            Some(true) => seen_true = true,
            _ if seen_true => monotone = false,
            _ => {}
        }
    }
    let ts: Vec<f64> = steps.iter().map(|s| s.t).collect();
    let errs: Vec<f64> = steps.iter().map(|s| s.max_ratio_error).collect();
    Ok(TransitionReport {
        slope: loglog_slope(&ts, &errs),
        steps,
        monotone,
    })
}
