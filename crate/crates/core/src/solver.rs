//! Inversion of the intrinsic-metric maps.
//!
//! All three problems are square least-squares systems in gauge-fixed
//! coordinates, solved by Levenberg–Marquardt. A solve runs in two phases:
//! first the chord lengths of the target's marked edges are matched (no hull
//! needed), then the true residual (hull, intrinsic metric, flip alignment) is
//! driven to zero. The AdS problems are written in blow-up coordinates
//! (holonomy FN(c + sδ), chart points s·y) and continued in s from s₀ to 1.

use nalgebra::{DMatrix, DVector, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone_metric::{ConeMetric, EdgeKey, Geometry, MarkedTriangulation};
use crate::error::{Error, Result};
use crate::fixtures::template_points;
use crate::fuchsian::cocycle::{cocycle_from_h1, h1_basis, h1_decompose};
use crate::fuchsian::{ball, build_genus2, fn_tangent_matrix, Cocycle, FuchsianRep};
use crate::projective::ProjPoint;
use crate::surfaces::{
    convex_boundary_auto, intrinsic_metric, Ambient, HullSurface, Side, VertexConfig,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Stopping tolerance on the max edge residual, relative to the target scale.
    pub tol: f64,
    pub fd_step: f64,
    pub lambda0: f64,
    pub max_flips: usize,
    pub hull_radius: usize,
    pub max_hull_radius: usize,
    pub limit_len: usize,
    pub s0: f64,
    pub s0_floor: f64,
    pub s_step: f64,
    pub s_floor: f64,
    pub side: Side,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iter: 200,
            tol: 1e-11,
            fd_step: 1e-6,
            lambda0: 1e-3,
            max_flips: 20,
            hull_radius: 5,
            max_hull_radius: 9,
            limit_len: 3,
            s0: 0.05,
            s0_floor: 1e-3,
            s_step: 0.05,
            s_floor: 1e-4,
            side: Side::FutureConvex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Converged,
    Diverged,
    CelluationJump,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceStep {
    pub s: f64,
    pub params: Vec<f64>,
    pub residual_norm: f64,
    pub condition: f64,
    /// Smallest over largest singular value of the Jacobian.
    pub sv_ratio: f64,
    pub celluation_hash: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveTrace {
    pub steps: Vec<TraceStep>,
    pub verdict: Verdict,
}

impl SolveTrace {
    fn new() -> Self {
        SolveTrace {
            steps: Vec::new(),
            verdict: Verdict::Diverged,
        }
    }

    /// One JSON record per step, then a final record with the verdict.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            out.push_str(&serde_json::to_string(s).expect("serializable step"));
            out.push('\n');
        }
        out.push_str(&serde_json::json!({ "verdict": self.verdict }).to_string());
        out.push('\n');
        out
    }

    /// Smallest singular-value ratio over the recorded steps.
    pub fn min_sv_ratio(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.sv_ratio)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Solver failure together with the trace recorded so far.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct SolveError {
    pub error: Error,
    pub trace: SolveTrace,
}

pub type SolveResult<T> = std::result::Result<T, SolveError>;

fn fail<T>(error: Error, mut trace: SolveTrace) -> SolveResult<T> {
    trace.verdict = match error {
        Error::CelluationJump(_) => Verdict::CelluationJump,
        _ => Verdict::Diverged,
    };
    Err(SolveError { error, trace })
}

/// Edge lengths of the hull triangulation carried to the target triangulation by flips.
#[derive(Debug, Clone)]
struct Alignment {
    base: MarkedTriangulation,
    flips: Vec<usize>,
    /// Edge i of the (possibly flipped) target is edge map[i] after the flips.
    map: Vec<usize>,
    /// Target lengths in the common triangulation.
    target: Vec<f64>,
}

impl Alignment {
    fn chord(target: &ConeMetric) -> Self {
        Alignment {
            base: target.tri.clone(),
            flips: Vec::new(),
            map: (0..target.lengths.len()).collect(),
            target: target.lengths.clone(),
        }
    }

    fn lengths(&self, c: &VertexConfig, geometry: Geometry) -> Result<Vec<f64>> {
        let l = self
            .base
            .edges
            .iter()
            .map(|e| c.edge_length(e.ends[0], e.ends[1], &e.word))
            .collect::<Result<Vec<f64>>>()?;
        let l = if self.flips.is_empty() {
            l
        } else {
            let mut m = ConeMetric::new(self.base.clone(), l, geometry)?;
            for &e in &self.flips {
                m = m.flip(e)?;
            }
            m.lengths
        };
        Ok(self.map.iter().map(|&j| l[j]).collect())
    }
}

/// Perturbed chord starts tried when the unperturbed one does not lead to a convex solution.
const CHORD_RESTARTS: usize = 48;
const CHORD_RESTART_SIZE: f64 = 0.1;
const CHORD_RESTART_SEED: u64 = 0x5eed;

/// Node budget of the flip search.
const ALIGN_NODES: usize = 3000;

/// Best-first search over flip sequences, ordered by flips made plus target edges still missing.
/// The missing count never overestimates the flips left, so the first aligned state is a shortest one.
fn toward(metric: &ConeMetric, target: &ConeMetric, max_flips: usize) -> Result<Alignment> {
    use std::cmp::Reverse;
    use std::collections::{BinaryHeap, HashSet};
    let want: HashSet<EdgeKey> = target.tri.edge_keys().into_iter().collect();
    let missing = |keys: &[EdgeKey]| want.len() - keys.iter().filter(|k| want.contains(k)).count();
    let state = |keys: &[EdgeKey]| {
        let mut k = keys.to_vec();
        k.sort_unstable();
        k
    };
    let keys = metric.tri.edge_keys();
    let mut nodes: Vec<(ConeMetric, Vec<usize>, Vec<EdgeKey>)> =
        vec![(metric.clone(), Vec::new(), keys.clone())];
    let mut seen = HashSet::from([state(&keys)]);
    let mut heap = BinaryHeap::from([Reverse((missing(&keys), missing(&keys), 0usize))]);
    let mut expanded = 0;
    while let Some(Reverse((_, h, id))) = heap.pop() {
        if h == 0 {
            let (cur, flips, _) = &nodes[id];
            let map = target
                .tri
                .edge_map(&cur.tri)
                .into_iter()
                .collect::<Option<Vec<usize>>>();
            if let Some(map) = map {
                return Ok(Alignment {
                    base: metric.tri.clone(),
                    flips: flips.clone(),
                    map,
                    target: target.lengths.clone(),
                });
            }
            continue;
        }
        expanded += 1;
        if expanded > ALIGN_NODES {
            break;
        }
        let (cur, flips, keys) = nodes[id].clone();
        if flips.len() >= max_flips {
            continue;
        }
        for e in (0..keys.len()).filter(|&e| !want.contains(&keys[e])) {
            let Ok(f) = cur.flip(e) else { continue };
            let fk = f.tri.edge_keys();
            if !seen.insert(state(&fk)) {
                continue;
            }
            let m = missing(&fk);
            let mut fl = flips.clone();
            fl.push(e);
            heap.push(Reverse((fl.len() + m, m, nodes.len())));
            nodes.push((f, fl, fk));
        }
    }
    Err(Error::AlignmentFailure(max_flips))
}

/// Triangulations reachable by at most `max_flips` valid flips, keyed by their edge sets,
/// with a shortest flip sequence to each.
fn reachable(
    m: &ConeMetric,
    max_flips: usize,
) -> std::collections::HashMap<Vec<EdgeKey>, Vec<usize>> {
    use std::collections::{HashMap, VecDeque};
    let sorted = |mut k: Vec<EdgeKey>| {
        k.sort_unstable();
        k
    };
    let mut out = HashMap::from([(sorted(m.tri.edge_keys()), Vec::new())]);
    let mut queue = VecDeque::from([(m.clone(), Vec::new())]);
    while let Some((cur, flips)) = queue.pop_front() {
        if flips.len() >= max_flips || out.len() >= ALIGN_NODES {
            continue;
        }
        for e in 0..cur.tri.edges.len() {
            let Ok(f) = cur.flip(e) else { continue };
            let k = sorted(f.tri.edge_keys());
            if out.contains_key(&k) {
                continue;
            }
            let mut fl: Vec<usize> = flips.clone();
            fl.push(e);
            out.insert(k, fl.clone());
            queue.push_back((f, fl));
        }
    }
    out
}

/// Flips the hull metric onto the target triangulation, or failing that, flips both
/// onto a common triangulation with the fewest flips in total.
fn align(metric: &ConeMetric, target: &ConeMetric, max_flips: usize) -> Result<Alignment> {
    if let Ok(a) = toward(metric, target, max_flips) {
        return Ok(a);
    }
    let ours = reachable(metric, max_flips);
    let theirs = reachable(target, max_flips);
    let best = ours
        .iter()
        .filter_map(|(k, f)| theirs.get(k).map(|g| (f.len() + g.len(), f, g)))
        .min_by(|a, b| {
            a.0.cmp(&b.0)
                .then_with(|| a.1.cmp(b.1))
                .then_with(|| a.2.cmp(b.2))
        })
        .ok_or(Error::AlignmentFailure(max_flips))?;
    let (_, flips, tflips) = best;
    let mut cur = metric.clone();
    for &e in flips {
        cur = cur.flip(e)?;
    }
    let mut t = target.clone();
    for &e in tflips {
        t = t.flip(e)?;
    }
    let map = t
        .tri
        .edge_map(&cur.tri)
        .into_iter()
        .collect::<Option<Vec<usize>>>()
        .ok_or(Error::AlignmentFailure(max_flips))?;
    Ok(Alignment {
        base: metric.tri.clone(),
        flips: flips.clone(),
        map,
        target: t.lengths,
    })
}

#[derive(Debug, Clone)]
pub struct Residual {
    /// Achieved minus target length, per edge of the common triangulation.
    pub values: Vec<f64>,
    pub target: ConeMetric,
    /// Target lengths in the common triangulation (the target's own unless it had to be flipped).
    pub target_lengths: Vec<f64>,
    pub target_flips: bool,
    pub config: VertexConfig,
    pub surface: HullSurface,
    pub flips: usize,
}

impl Residual {
    pub fn norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn evaluate(
    c: &VertexConfig,
    target: &ConeMetric,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, Alignment, HullSurface)> {
    let surface = convex_boundary_auto(c, opts.hull_radius, opts.limit_len, opts.max_hull_radius)?;
    let metric = intrinsic_metric(&surface)?;
    if metric.geometry != target.geometry || metric.tri.n_vertices != target.tri.n_vertices {
        return Err(Error::CombinatoricsMismatch);
    }
    let al = align(&metric, target, opts.max_flips)?;
    let values = al
        .lengths(c, metric.geometry)?
        .iter()
        .zip(&al.target)
        .map(|(a, b)| a - b)
        .collect();
    Ok((values, al, surface))
}

/// Intrinsic metric of the hull, flip-aligned to the target triangulation, minus the target.
pub fn residual(c: &VertexConfig, target: &ConeMetric, opts: &SolveOptions) -> Result<Residual> {
    let (values, al, surface) = evaluate(c, target, opts)?;
    Ok(Residual {
        values,
        target: target.clone(),
        target_flips: al.target != target.lengths,
        target_lengths: al.target,
        config: c.clone(),
        surface,
        flips: al.flips.len(),
    })
}

type Builder<'a> = Box<dyn Fn(&[f64]) -> Result<Vec<VertexConfig>> + Sync + 'a>;

/// Configurations depending on parameters, matched against targets with a common weight.
struct Problem<'a> {
    build: Builder<'a>,
    targets: Vec<ConeMetric>,
    weight: f64,
    s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Chord,
    Intrinsic,
}

#[derive(Clone)]
struct Point {
    x: Vec<f64>,
    r: Vec<f64>,
    aligns: Vec<Alignment>,
    hash: String,
}

impl Problem<'_> {
    fn local(&self, x: &[f64], aligns: &[Alignment]) -> Result<Vec<f64>> {
        let cs = (self.build)(x)?;
        let mut out = Vec::new();
        for ((c, t), al) in cs.iter().zip(&self.targets).zip(aligns) {
            let l = al.lengths(c, t.geometry)?;
            out.extend(l.iter().zip(&al.target).map(|(a, b)| (a - b) * self.weight));
        }
        Ok(out)
    }

    fn point(&self, x: &[f64], phase: Phase, opts: &SolveOptions) -> Result<Point> {
        match phase {
            Phase::Chord => {
                let aligns: Vec<Alignment> = self.targets.iter().map(Alignment::chord).collect();
                let r = self.local(x, &aligns)?;
                Ok(Point {
                    x: x.to_vec(),
                    r,
                    aligns,
                    hash: String::new(),
                })
            }
            Phase::Intrinsic => {
                let cs = (self.build)(x)?;
                let mut r = Vec::new();
                let mut aligns = Vec::new();
                let mut hashes = Vec::new();
                for (c, t) in cs.iter().zip(&self.targets) {
                    let (v, al, s) = evaluate(c, t, opts)?;
                    r.extend(v.iter().map(|v| v * self.weight));
                    aligns.push(al);
                    hashes.push(s.celluation_hash());
                }
                Ok(Point {
                    x: x.to_vec(),
                    r,
                    aligns,
                    hash: hashes.join("+"),
                })
            }
        }
    }

    fn jacobian(&self, p: &Point, h: f64) -> Result<DMatrix<f64>> {
        let n = p.x.len();
        let cols: Vec<Result<Vec<f64>>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let hj = h * p.x[j].abs().max(1.0);
                let mut xp = p.x.clone();
                let mut xm = p.x.clone();
                xp[j] += hj;
                xm[j] -= hj;
                let fp = self.local(&xp, &p.aligns)?;
                let fm = self.local(&xm, &p.aligns)?;
                Ok(fp
                    .iter()
                    .zip(&fm)
                    .map(|(a, b)| (a - b) / (2.0 * hj))
                    .collect())
            })
            .collect();
        let mut jac = DMatrix::zeros(p.r.len(), n);
        for (j, c) in cols.into_iter().enumerate() {
            jac.set_column(j, &DVector::from_vec(c?));
        }
        Ok(jac)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// (condition number, smallest/largest singular value).
fn conditioning(j: &DMatrix<f64>) -> (f64, f64) {
    let sv = j.clone().svd(false, false).singular_values;
    let (lo, hi) = (sv.min(), sv.max());
    if hi <= 0.0 {
        return (f64::INFINITY, 0.0);
    }
    (if lo > 0.0 { hi / lo } else { f64::INFINITY }, lo / hi)
}

struct LmOutcome {
    point: Point,
    converged: bool,
    condition: f64,
}

/// Levenberg–Marquardt with Marquardt scaling and the gain-ratio damping update.
fn levenberg_marquardt(
    prob: &Problem,
    x0: &[f64],
    phase: Phase,
    tol: f64,
    opts: &SolveOptions,
    trace: &mut SolveTrace,
) -> Result<LmOutcome> {
    let mut p = prob.point(x0, phase, opts)?;
    let mut mu = opts.lambda0;
    let mut nu = 2.0;
    let mut last = (f64::INFINITY, 0.0);
    for _ in 0..opts.max_iter {
        let j = prob.jacobian(&p, opts.fd_step)?;
        last = conditioning(&j);
        if phase == Phase::Intrinsic {
            trace.steps.push(TraceStep {
                s: prob.s,
                params: p.x.clone(),
                residual_norm: max_abs(&p.r) / prob.weight,
                condition: last.0,
                sv_ratio: last.1,
                celluation_hash: p.hash.clone(),
            });
        }
        if max_abs(&p.r) <= tol {
            return Ok(LmOutcome {
                point: p,
                converged: true,
                condition: last.0,
            });
        }
        let r = DVector::from_column_slice(&p.r);
        let a = j.transpose() * &j;
        let g = j.transpose() * r;
        let dmax = a.diagonal().max().max(1e-300);
        let d = a.diagonal().map(|v| v.max(1e-12 * dmax));
        let f0 = 0.5 * p.r.iter().map(|v| v * v).sum::<f64>();
        let mut accepted = false;
        for _ in 0..40 {
            let mut m = a.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += mu * d[i];
            }
            let Some(step) = m.cholesky().map(|c| c.solve(&(-&g))) else {
                mu *= nu;
                nu *= 2.0;
                continue;
            };
            let xn: Vec<f64> = p.x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let xnorm = p.x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if step.norm() <= 1e-15 * (xnorm + 1e-15) {
                return Ok(LmOutcome {
                    converged: max_abs(&p.r) <= tol,
                    point: p,
                    condition: last.0,
                });
            }
            let predicted = 0.5 * step.dot(&(step.component_mul(&d) * mu - &g));
            if let Ok(pn) = prob.point(&xn, phase, opts) {
                let f1 = 0.5 * pn.r.iter().map(|v| v * v).sum::<f64>();
                let rho = (f0 - f1) / predicted.max(1e-300);
                if rho > 0.0 {
                    mu *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
                    nu = 2.0;
                    p = pn;
                    accepted = true;
                    break;
                }
            }
            mu *= nu;
            nu *= 2.0;
        }
        if !accepted {
            break;
        }
    }
    Ok(LmOutcome {
        converged: max_abs(&p.r) <= tol,
        point: p,
        condition: last.0,
    })
}

/// Chord phase (when it converges) followed by the intrinsic phase.
fn solve_stage(
    prob: &Problem,
    x0: &[f64],
    tol: f64,
    opts: &SolveOptions,
    trace: &mut SolveTrace,
) -> Result<LmOutcome> {
    let mut last = Error::Diverged("no start evaluated".into());
    let mut rng = ChaCha8Rng::seed_from_u64(CHORD_RESTART_SEED);
    for k in 0..=CHORD_RESTARTS {
        let start: Vec<f64> = if k == 0 {
            x0.to_vec()
        } else {
            let size = CHORD_RESTART_SIZE * (1 + (k - 1) / 6) as f64;
            x0.iter()
                .map(|v| v + size * v.abs().max(1.0) * rng.gen_range(-1.0..1.0))
                .collect()
        };
        let mut scratch = SolveTrace::new();
        let mut starts = Vec::new();
        if let Ok(c) = levenberg_marquardt(prob, &start, Phase::Chord, tol, opts, &mut scratch) {
            if c.converged {
                starts.push(c.point.x);
            }
        }
        if k == 0 {
            starts.push(x0.to_vec());
        }
        for x in starts {
            match levenberg_marquardt(prob, &x, Phase::Intrinsic, tol, opts, trace) {
                Ok(o) if o.converged => return Ok(o),
                Ok(o) => {
                    last = Error::Diverged(format!(
                        "residual {:e} after {} iterations",
                        max_abs(&o.point.r),
                        opts.max_iter
                    ))
                }
                Err(e) => last = e,
            }
        }
    }
    Err(last)
}

// ---------------------------------------------------------------- Minkowski

/// Gauge-fixed Minkowski coordinates: min-norm cocycle coefficients and points.
#[derive(Debug, Clone)]
pub struct MinkowskiGauge {
    pub rep: FuchsianRep,
    /// 12 × 6 orthonormal basis of cocycles orthogonal to coboundaries.
    pub basis: DMatrix<f64>,
    pub side: Side,
}

impl MinkowskiGauge {
    pub fn new(rep: &FuchsianRep, side: Side) -> Self {
        MinkowskiGauge {
            rep: rep.clone(),
            basis: h1_basis(rep),
            side,
        }
    }

    pub fn config(&self, x: &[f64]) -> Result<VertexConfig> {
        let tau = cocycle_from_h1(&self.rep, &self.basis, &x[..6]);
        let pts = x[6..]
            .chunks(3)
            .map(|c| Vector3::new(c[0], c[1], c[2]))
            .collect();
        VertexConfig::minkowski(tau, pts, self.side)
    }

    /// Coordinates of a configuration with the same holonomy, after removing the coboundary part.
    pub fn coords(&self, c: &VertexConfig) -> Result<Vec<f64>> {
        let Ambient::Minkowski { tau, .. } = &c.geometry else {
            return Err(Error::InvalidInput(
                "expected a Minkowski configuration".into(),
            ));
        };
        let (a, shift) = h1_decompose(tau, &self.basis);
        let mut x = a;
        for p in c.minkowski_points() {
            x.extend((p + shift).iter());
        }
        Ok(x)
    }

    /// Fuchsian start: zero cocycle and template points with the target's area.
    pub fn identity_start(&self, target: &ConeMetric) -> Result<Vec<f64>> {
        let n = target.tri.n_vertices;
        let template = |radius: f64| -> Vec<Vector3<f64>> {
            let flip = if self.side == Side::PastConvex {
                -1.0
            } else {
                1.0
            };
            template_points(n, radius)
                .into_iter()
                .map(|p| Vector3::new(p[0], p[1], flip * p[2]))
                .collect()
        };
        let unit = VertexConfig::minkowski(Cocycle::zero(&self.rep), template(1.0), self.side)?;
        let area = intrinsic_metric(&convex_boundary_auto(&unit, 5, 0, 10)?)?.area();
        let radius = (target.area() / area).sqrt();
        let mut x = vec![0.0; 6];
        for p in template(radius) {
            x.extend(p.iter());
        }
        Ok(x)
    }
}

#[derive(Debug, Clone)]
pub struct MinkowskiSolution {
    pub tau: Cocycle,
    pub coeffs: Vec<f64>,
    pub points: Vec<Vector3<f64>>,
    pub config: VertexConfig,
    pub residual: f64,
    pub trace: SolveTrace,
}

fn check_target(target: &ConeMetric, geometry: Geometry) -> Result<()> {
    if target.geometry != geometry {
        return Err(Error::InfeasibleTarget(format!(
            "expected a {geometry:?} metric"
        )));
    }
    if !target.is_strict() {
        return Err(Error::InfeasibleTarget(
            "metric is not strictly concave".into(),
        ));
    }
    if geometry == Geometry::Euclidean
        && (target.curvature().total() + 4.0 * std::f64::consts::PI).abs() > 1e-8
    {
        return Err(Error::InfeasibleTarget(
            "curvatures do not sum to -4π".into(),
        ));
    }
    Ok(())
}

/// Minkowski realization of a Euclidean target, started from the Fuchsian configuration.
pub fn solve_minkowski(
    rep: &FuchsianRep,
    target: &ConeMetric,
    opts: &SolveOptions,
) -> SolveResult<MinkowskiSolution> {
    let gauge = MinkowskiGauge::new(rep, opts.side);
    match gauge.identity_start(target) {
        Ok(x0) => solve_minkowski_from(rep, target, &x0, opts),
        Err(e) => fail(e, SolveTrace::new()),
    }
}

/// Minkowski realization of a Euclidean target from gauge-fixed start coordinates.
pub fn solve_minkowski_from(
    rep: &FuchsianRep,
    target: &ConeMetric,
    x0: &[f64],
    opts: &SolveOptions,
) -> SolveResult<MinkowskiSolution> {
    let mut trace = SolveTrace::new();
    if let Err(e) = check_target(target, Geometry::Euclidean) {
        return fail(e, trace);
    }
    let gauge = MinkowskiGauge::new(rep, opts.side);
    if x0.len() != 6 + 3 * target.tri.n_vertices {
        return fail(
            Error::InvalidInput("start has the wrong dimension".into()),
            trace,
        );
    }
    let g = &gauge;
    let prob = Problem {
        build: Box::new(move |x| Ok(vec![g.config(x)?])),
        targets: vec![target.clone()],
        weight: 1.0,
        s: 1.0,
    };
    let scale = target.max_length();
    match solve_stage(&prob, x0, opts.tol * scale, opts, &mut trace) {
        Ok(o) => {
            trace.verdict = Verdict::Converged;
            let x = o.point.x;
            let config = gauge.config(&x).expect("accepted point");
            let Ambient::Minkowski { tau, .. } = &config.geometry else {
                unreachable!()
            };
            Ok(MinkowskiSolution {
                tau: tau.clone(),
                coeffs: x[..6].to_vec(),
                points: config.minkowski_points(),
                residual: max_abs(&o.point.r),
                config,
                trace,
            })
        }
        Err(e) => fail(e, trace),
    }
}

// ---------------------------------------------------------------- AdS

fn chart_point(y: &[f64], s: f64) -> ProjPoint {
    ProjPoint(Vector4::new(s * y[0], s * y[1], s * y[2], 1.0))
}

fn shifted(c: &[f64; 6], d: &[f64], t: f64) -> [f64; 6] {
    std::array::from_fn(|i| c[i] + t * d[i])
}

fn fn_coords_of(rep: &FuchsianRep) -> Result<[f64; 6]> {
    rep.fn_coords.ok_or_else(|| {
        Error::InvalidInput("holonomy must be given in Fenchel–Nielsen coordinates".into())
    })
}

/// Blow-up coordinates (δ, y) of a Minkowski solution with holonomy FN(c).
fn blow_up_start(c: &[f64; 6], m: &MinkowskiSolution) -> Result<Vec<f64>> {
    let (delta, shift) = h1_decompose(&m.tau, &fn_tangent_matrix(c)?);
    let mut x = delta;
    for p in &m.points {
        x.extend((p + shift).iter());
    }
    Ok(x)
}

#[derive(Debug, Clone)]
pub struct AdsSolution {
    pub right: FuchsianRep,
    pub right_fn: [f64; 6],
    pub points: Vec<ProjPoint>,
    pub config: VertexConfig,
    pub residual: f64,
    /// Condition number of the first AdS corrector Jacobian and of the Minkowski solve.
    pub initial_condition: f64,
    pub minkowski_condition: f64,
    pub trace: SolveTrace,
}

impl AdsSolution {
    /// Gauge-fixed coordinates: right Fenchel–Nielsen coordinates and chart points.
    pub fn coords(&self) -> Vec<f64> {
        let mut x = self.right_fn.to_vec();
        for p in &self.points {
            let v = p.0 / p.0[3];
            x.extend([v[0], v[1], v[2]]);
        }
        x
    }
}

/// Continuation in s from `s0` to 1. Returns the final point and the first accepted outcome.
fn continuation<'a, F>(
    make: F,
    x0: Vec<f64>,
    opts: &SolveOptions,
    trace: &mut SolveTrace,
) -> Result<(Point, f64)>
where
    F: Fn(f64) -> Problem<'a>,
{
    let mut s0 = opts.s0;
    let (mut x, first_cond) = loop {
        let prob = make(s0);
        let scale = prob.weight
            * prob
                .targets
                .iter()
                .map(|t| t.max_length())
                .fold(0.0, f64::max);
        match solve_stage(&prob, &x0, opts.tol * scale, opts, trace) {
            Ok(o) => break (o.point.x, o.condition),
            Err(e) => {
                s0 /= 2.0;
                if s0 < opts.s0_floor {
                    return Err(e);
                }
            }
        }
    };
    let mut s = s0;
    let mut prev: Option<(f64, Vec<f64>)> = None;
    let mut ds = opts.s_step;
    let mut last = None;
    while s < 1.0 {
        let sn = (s + ds).min(1.0);
        let pred: Vec<f64> = match &prev {
            Some((sp, xp)) => x
                .iter()
                .zip(xp)
                .map(|(a, b)| a + (a - b) * (sn - s) / (s - sp))
                .collect(),
            None => x.clone(),
        };
        let prob = make(sn);
        let scale = prob.weight
            * prob
                .targets
                .iter()
                .map(|t| t.max_length())
                .fold(0.0, f64::max);
        match solve_stage(&prob, &pred, opts.tol * scale, opts, trace) {
            Ok(o) => {
                prev = Some((s, std::mem::replace(&mut x, o.point.x.clone())));
                s = sn;
                ds = (ds * 1.5).min(0.25);
                last = Some(o.point);
            }
            Err(_) => {
                ds /= 2.0;
                if ds < opts.s_floor {
                    return Err(Error::CelluationJump(s));
                }
            }
        }
    }
    let p = match last {
        Some(p) => p,
        None => make(1.0).point(&x, Phase::Intrinsic, opts)?,
    };
    Ok((p, first_cond))
}

struct AdsGauge {
    left: FuchsianRep,
    c: [f64; 6],
    side: Side,
}

impl AdsGauge {
    fn config(&self, x: &[f64], s: f64) -> Result<VertexConfig> {
        let right = build_genus2(&shifted(&self.c, &x[..6], s))?;
        let pts = x[6..].chunks(3).map(|y| chart_point(y, s)).collect();
        VertexConfig::ads(self.left.clone(), right, pts, self.side)
    }
}

/// AdS realization: right holonomy and points realizing `target` with the given left holonomy.
pub fn solve_ads(
    left: &FuchsianRep,
    target: &ConeMetric,
    opts: &SolveOptions,
) -> SolveResult<AdsSolution> {
    solve_ads_perturbed(left, target, None, opts)
}

/// As [`solve_ads`], with the Minkowski start perturbed by a seeded amount (for multistart probes).
pub fn solve_ads_perturbed(
    left: &FuchsianRep,
    target: &ConeMetric,
    perturb: Option<(u64, f64)>,
    opts: &SolveOptions,
) -> SolveResult<AdsSolution> {
    let mut trace = SolveTrace::new();
    if let Err(e) = check_target(target, Geometry::Hyperbolic) {
        return fail(e, trace);
    }
    let c = match fn_coords_of(left) {
        Ok(c) => c,
        Err(e) => return fail(e, trace),
    };
    let left = match build_genus2(&c) {
        Ok(l) => l,
        Err(e) => return fail(e, trace),
    };
    let limit = target.euclidean_limit();
    let mink_opts = SolveOptions {
        side: opts.side,
        ..opts.clone()
    };
    let gauge = MinkowskiGauge::new(&left, opts.side);
    let mut x0 = match gauge.identity_start(&limit) {
        Ok(x) => x,
        Err(e) => return fail(e, trace),
    };
    if let Some((seed, size)) = perturb {
        perturb_start(&mut x0, seed, size);
    }
    let mink = {
        let g = &gauge;
        let prob = Problem {
            build: Box::new(move |x| Ok(vec![g.config(x)?])),
            targets: vec![limit.clone()],
            weight: 1.0,
            s: 0.0,
        };
        match solve_stage(
            &prob,
            &x0,
            mink_opts.tol * limit.max_length(),
            &mink_opts,
            &mut trace,
        ) {
            Ok(o) => o,
            Err(e) => return fail(e, trace),
        }
    };
    let cfg = gauge.config(&mink.point.x).expect("accepted point");
    let Ambient::Minkowski { tau, .. } = &cfg.geometry else {
        unreachable!()
    };
    let msol = MinkowskiSolution {
        tau: tau.clone(),
        coeffs: mink.point.x[..6].to_vec(),
        points: cfg.minkowski_points(),
        config: cfg.clone(),
        residual: max_abs(&mink.point.r),
        trace: SolveTrace::new(),
    };
    let start = match blow_up_start(&c, &msol) {
        Ok(x) => x,
        Err(e) => return fail(e, trace),
    };
    let ag = AdsGauge {
        left: left.clone(),
        c,
        side: opts.side,
    };
    let make = |s: f64| {
        let g = &ag;
        Problem {
            build: Box::new(move |x| Ok(vec![g.config(x, s)?])),
            targets: vec![target.scale(s)],
            weight: 1.0 / s,
            s,
        }
    };
    match continuation(make, start, opts, &mut trace) {
        Ok((p, first_cond)) => {
            trace.verdict = Verdict::Converged;
            let config = ag.config(&p.x, 1.0).expect("accepted point");
            let Ambient::AdS { right, .. } = &config.geometry else {
                unreachable!()
            };
            Ok(AdsSolution {
                right: right.clone(),
                right_fn: shifted(&c, &p.x[..6], 1.0),
                points: config.points.iter().map(|x| ProjPoint(*x)).collect(),
                residual: max_abs(&p.r),
                initial_condition: first_cond,
                minkowski_condition: mink.condition,
                config,
                trace,
            })
        }
        Err(e) => fail(e, trace),
    }
}

fn perturb_start(x: &mut [f64], seed: u64, size: f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = x[6..].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
    for v in x.iter_mut() {
        *v += size * scale * rng.gen_range(-1.0..1.0);
    }
}

// ---------------------------------------------------------------- pairs

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairStart {
    /// Fenchel–Nielsen coordinates of the blow-up base.
    pub c: [f64; 6],
}

impl Default for PairStart {
    fn default() -> Self {
        PairStart {
            c: [2.0, 2.0, 2.0, 0.0, 0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone)]
pub struct PairSolution {
    pub left: FuchsianRep,
    pub right: FuchsianRep,
    pub left_fn: [f64; 6],
    pub right_fn: [f64; 6],
    pub plus: VertexConfig,
    pub minus: VertexConfig,
    pub residual: f64,
    pub trace: SolveTrace,
}

impl PairSolution {
    pub fn coords(&self) -> Vec<f64> {
        let mut x: Vec<f64> = self.left_fn.iter().chain(&self.right_fn).copied().collect();
        for c in [&self.plus, &self.minus] {
            for p in &c.points {
                let v = p / p[3];
                x.extend([v[0], v[1], v[2]]);
            }
        }
        x
    }

    /// Largest difference of left and right translation lengths over words of length ≤ 3.
    pub fn spectrum_gap(&self) -> f64 {
        ball(3)
            .words
            .iter()
            .skip(1)
            .filter_map(|w| {
                Some(
                    (self.left.translation_length(w).ok()?
                        - self.right.translation_length(w).ok()?)
                    .abs(),
                )
            })
            .fold(0.0, f64::max)
    }
}

struct PairGauge {
    n_plus: usize,
}

impl PairGauge {
    fn configs(&self, x: &[f64], s: f64) -> Result<(VertexConfig, VertexConfig)> {
        let c: [f64; 6] = std::array::from_fn(|i| x[i]);
        let d = &x[6..12];
        let left = build_genus2(&shifted(&c, d, -s / 2.0))?;
        let right = build_genus2(&shifted(&c, d, s / 2.0))?;
        let split = 12 + 3 * self.n_plus;
        let plus = x[12..split].chunks(3).map(|y| chart_point(y, s)).collect();
        let minus = x[split..].chunks(3).map(|y| chart_point(y, s)).collect();
        Ok((
            VertexConfig::ads(left.clone(), right.clone(), plus, Side::FutureConvex)?,
            VertexConfig::ads(left, right, minus, Side::PastConvex)?,
        ))
    }
}

/// Two-sided AdS realization: holonomy pair and points realizing `plus` (future) and `minus` (past).
pub fn solve_pair(
    plus: &ConeMetric,
    minus: &ConeMetric,
    start: &PairStart,
    opts: &SolveOptions,
) -> SolveResult<PairSolution> {
    solve_pair_perturbed(plus, minus, start, None, opts)
}

/// Blow-up start from separate future and past Minkowski solves with holonomy FN(c):
/// the Fenchel–Nielsen direction is the mean of the two.
fn pair_start(
    plus: &ConeMetric,
    minus: &ConeMetric,
    c: &[f64; 6],
    opts: &SolveOptions,
) -> Result<Vec<f64>> {
    let rep = build_genus2(c)?;
    let d = fn_tangent_matrix(c)?;
    let mut delta = [0.0; 6];
    let mut points: Vec<f64> = Vec::new();
    for (t, side) in [(plus, Side::FutureConvex), (minus, Side::PastConvex)] {
        let o = SolveOptions {
            side,
            ..opts.clone()
        };
        let m = solve_minkowski(&rep, &t.euclidean_limit(), &o).map_err(|e| e.error)?;
        let (dl, shift) = h1_decompose(&m.tau, &d);
        for i in 0..6 {
            delta[i] += dl[i] / 2.0;
        }
        for p in &m.points {
            points.extend((p + shift).iter());
        }
    }
    let mut x: Vec<f64> = c.iter().chain(&delta).copied().collect();
    x.extend(points);
    Ok(x)
}

pub fn solve_pair_perturbed(
    plus: &ConeMetric,
    minus: &ConeMetric,
    start: &PairStart,
    perturb: Option<(u64, f64)>,
    opts: &SolveOptions,
) -> SolveResult<PairSolution> {
    let mut trace = SolveTrace::new();
    for t in [plus, minus] {
        if let Err(e) = check_target(t, Geometry::Hyperbolic) {
            return fail(e, trace);
        }
    }
    let mut x0 = match pair_start(plus, minus, &start.c, opts) {
        Ok(x) => x,
        Err(e) => return fail(e, trace),
    };
    if let Some((seed, size)) = perturb {
        // c in absolute units, the blow-up direction and points relative to their size
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = x0[6..].iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-3);
        for (i, v) in x0.iter_mut().enumerate() {
            let unit = if i < 6 { 1.0 } else { scale };
            *v += size * unit * rng.gen_range(-1.0..1.0);
        }
    }
    let pg = PairGauge {
        n_plus: plus.tri.n_vertices,
    };
    let make = |s: f64| {
        let g = &pg;
        Problem {
            build: Box::new(move |x| {
                let (a, b) = g.configs(x, s)?;
                Ok(vec![a, b])
            }),
            targets: vec![plus.scale(s), minus.scale(s)],
            weight: 1.0 / s,
            s,
        }
    };
    match continuation(make, x0, opts, &mut trace) {
        Ok((p, _)) => {
            trace.verdict = Verdict::Converged;
            let (a, b) = pg.configs(&p.x, 1.0).expect("accepted point");
            let Ambient::AdS { left, right } = &a.geometry else {
                unreachable!()
            };
            let c: [f64; 6] = std::array::from_fn(|i| p.x[i]);
            Ok(PairSolution {
                left: left.clone(),
                right: right.clone(),
                left_fn: shifted(&c, &p.x[6..12], -0.5),
                right_fn: shifted(&c, &p.x[6..12], 0.5),
                plus: a,
                minus: b,
                residual: max_abs(&p.r),
                trace,
            })
        }
        Err(e) => fail(e, trace),
    }
}

// ---------------------------------------------------------------- multistart

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeRun {
    pub seed: u64,
    pub coords: Option<Vec<f64>>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub runs: Vec<ProbeRun>,
    /// Clusters of converged runs under single linkage at `threshold` (max-coordinate distance).
    pub clusters: usize,
    pub threshold: f64,
    /// Largest coordinate distance between converged runs.
    pub spread: f64,
    pub all_converged: bool,
}

impl UniquenessReport {
    fn from_runs(runs: Vec<ProbeRun>, threshold: f64) -> Self {
        let pts: Vec<&Vec<f64>> = runs.iter().filter_map(|r| r.coords.as_ref()).collect();
        let dist = |a: &Vec<f64>, b: &Vec<f64>| {
            a.iter()
                .zip(b)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
        };
        let mut label: Vec<usize> = (0..pts.len()).collect();
        let find = |label: &mut Vec<usize>, mut i: usize| {
            while label[i] != i {
                i = label[i];
            }
            i
        };
        let mut spread = 0.0f64;
        for i in 0..pts.len() {
            for j in 0..i {
                let d = dist(pts[i], pts[j]);
                spread = spread.max(d);
                if d <= threshold {
                    let (a, b) = (find(&mut label, i), find(&mut label, j));
                    label[a] = b;
                }
            }
        }
        let clusters = (0..pts.len()).filter(|&i| find(&mut label, i) == i).count();
        let all_converged = runs.iter().all(|r| r.coords.is_some());
        UniquenessReport {
            runs,
            clusters,
            threshold,
            spread,
            all_converged,
        }
    }

    /// Every run converged and all solutions form one cluster.
    pub fn unique(&self) -> bool {
        self.all_converged && self.clusters == 1
    }
}

/// Size of the random start perturbation in multistart probes.
pub const PROBE_PERTURBATION: f64 = 0.1;
pub const PROBE_THRESHOLD: f64 = 1e-4;

pub fn probe_uniqueness_ads(
    left: &FuchsianRep,
    target: &ConeMetric,
    runs: usize,
    seed: u64,
    opts: &SolveOptions,
) -> UniquenessReport {
    let runs: Vec<ProbeRun> = (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let seed = seed.wrapping_add(k);
            match solve_ads_perturbed(left, target, Some((seed, PROBE_PERTURBATION)), opts) {
                Ok(s) => ProbeRun {
                    seed,
                    coords: Some(s.coords()),
                    residual: Some(s.residual),
                    error: None,
                },
                Err(e) => ProbeRun {
                    seed,
                    coords: None,
                    residual: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    UniquenessReport::from_runs(runs, PROBE_THRESHOLD)
}

pub fn probe_uniqueness_pair(
    plus: &ConeMetric,
    minus: &ConeMetric,
    start: &PairStart,
    runs: usize,
    seed: u64,
    opts: &SolveOptions,
) -> UniquenessReport {
    let runs: Vec<ProbeRun> = (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let seed = seed.wrapping_add(k);
            match solve_pair_perturbed(plus, minus, start, Some((seed, PROBE_PERTURBATION)), opts) {
                Ok(s) => ProbeRun {
                    seed,
                    coords: Some(s.coords()),
                    residual: Some(s.residual),
                    error: None,
                },
                Err(e) => ProbeRun {
                    seed,
                    coords: None,
                    residual: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    UniquenessReport::from_runs(runs, PROBE_THRESHOLD)
}

/// Finite-difference Jacobian of the residual in the Minkowski gauge, with singular values.
pub fn jacobian_minkowski(
    rep: &FuchsianRep,
    x: &[f64],
    target: &ConeMetric,
    opts: &SolveOptions,
) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let gauge = MinkowskiGauge::new(rep, opts.side);
    let g = &gauge;
    let prob = Problem {
        build: Box::new(move |x| Ok(vec![g.config(x)?])),
        targets: vec![target.clone()],
        weight: 1.0,
        s: 1.0,
    };
    let p = prob.point(x, Phase::Intrinsic, opts)?;
    let j = prob.jacobian(&p, opts.fd_step)?;
    let sv = j
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    Ok((j, sv))
}
