use std::fmt::Write as _;

use anyhow::Result;
use serde_json::{json, Value};

use adsweyl::cone_metric::{ConeMetric, Geometry};
use adsweyl::fuchsian::{ball, FuchsianRep};
use adsweyl::solver::{self, PairStart, SolveOptions, SolveTrace};
use adsweyl::surfaces::{
    convex_boundary, fuchsian_level_area, intrinsic_metric, to_obj, transition_check, VertexConfig,
};

use crate::config::{Command, ConfigError, RunConfig};
use crate::output::{f17, f17_list, OutputDir};
use crate::plot::{Plot, Series};

pub fn dispatch(cmd: Command, cfg: &RunConfig, out: &mut OutputDir, seed: u64) -> Result<Value> {
    match cmd {
        Command::Forward => forward(cfg, out),
        Command::Inverse => inverse(cfg, out),
        Command::InversePair => inverse_pair(cfg, out),
        Command::Transition => transition(cfg, out),
        Command::AreaCheck => area_check(cfg, out, seed),
        Command::ProbeUniqueness => probe(cfg, out, seed),
    }
}

fn forward(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let spec = cfg.section(&cfg.forward, "forward")?;
    let c = spec.configuration.build()?;
    let surface = convex_boundary(&c, spec.radius, spec.limit_len)?;
    let m = intrinsic_metric(&surface)?;
    let kappa = m.curvature().kappa;
    let mut csv = String::from("vertex,cone_angle,kappa\n");
    for (v, (a, k)) in m.cone_angles().iter().zip(&kappa).enumerate() {
        let _ = writeln!(csv, "{v},{},{}", f17(*a), f17(*k));
    }
    out.write("metric.toml", &m.to_toml())?;
    out.write("surface.obj", &to_obj(&surface))?;
    out.write("curvature.csv", &csv)?;
    Ok(json!({
        "geometry": format!("{:?}", m.geometry),
        "faces": surface.faces.len(),
        "celluation_hash": surface.celluation_hash(),
        "max_kappa": kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "strictly_concave": m.is_strict(),
    }))
}

fn rep_toml(s: &mut String, name: &str, rep: &FuchsianRep, fn_coords: Option<&[f64; 6]>) {
    let _ = writeln!(s, "\n[{name}]");
    if let Some(c) = fn_coords.or(rep.fn_coords.as_ref()) {
        let _ = writeln!(s, "fn = {}", f17_list(c));
    }
    let rows: Vec<String> = rep
        .gens
        .iter()
        .map(|g| f17_list(&[g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]]))
        .collect();
    let _ = writeln!(s, "matrices = [{}]", rows.join(", "));
}

fn points_toml(s: &mut String, table: &str, c: &VertexConfig) {
    for (i, p) in c.points.iter().enumerate() {
        let _ = writeln!(s, "\n[[{table}]]\nid = {i}");
        if c.is_ads() {
            let _ = writeln!(s, "coords = {}", f17_list(p.as_slice()));
        } else {
            let _ = writeln!(
                s,
                "coords = {}",
                f17_list(&[p[0] / p[3], p[1] / p[3], p[2] / p[3]])
            );
        }
    }
}

fn residual_csv(
    c: &VertexConfig,
    target: &ConeMetric,
    opts: &SolveOptions,
) -> Result<(String, f64)> {
    let r = solver::residual(c, target, opts)?;
    let mut csv = String::from("edge,target_length,achieved_length,difference\n");
    for (i, (t, d)) in r.target_lengths.iter().zip(&r.values).enumerate() {
        let _ = writeln!(csv, "{i},{},{},{}", f17(*t), f17(t + d), f17(*d));
    }
    Ok((csv, r.norm()))
}

/// Keeps the trace of a failed solve before surfacing its error.
fn solved<T>(
    out: &mut OutputDir,
    r: solver::SolveResult<T>,
    trace: impl Fn(&T) -> &SolveTrace,
) -> Result<T> {
    match r {
        Ok(v) => {
            out.write("trace.jsonl", &trace(&v).to_jsonl())?;
            Ok(v)
        }
        Err(e) => {
            out.write("trace.jsonl", &e.trace.to_jsonl())?;
            Err(e.into())
        }
    }
}

fn inverse(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let spec = cfg.section(&cfg.inverse, "inverse")?;
    let target = cfg.metric(&spec.target)?;
    let opts = SolveOptions {
        side: spec.side.side(),
        ..cfg.solver.clone()
    };
    let mut sol = String::new();
    let (config, residual, verdicts) = match target.geometry {
        Geometry::Euclidean => {
            let rep = spec
                .rep
                .as_ref()
                .ok_or_else(|| ConfigError("a Euclidean target needs `rep`".into()))?
                .build()?;
            let s = solved(out, solver::solve_minkowski(&rep, &target, &opts), |s| {
                &s.trace
            })?;
            let _ = writeln!(
                sol,
                "geometry = \"minkowski\"\nresidual = {}",
                f17(s.residual)
            );
            let _ = writeln!(sol, "h1_coefficients = {}", f17_list(&s.coeffs));
            let _ = writeln!(sol, "cocycle = {}", f17_list(&s.tau.to_vector()));
            rep_toml(&mut sol, "rep", &rep, None);
            (
                s.config,
                s.residual,
                json!({ "solver": "minkowski", "iterations": s.trace.steps.len() }),
            )
        }
        Geometry::Hyperbolic => {
            let left = spec
                .left
                .as_ref()
                .ok_or_else(|| ConfigError("a hyperbolic target needs `left`".into()))?
                .build()?;
            let s = solved(out, solver::solve_ads(&left, &target, &opts), |s| &s.trace)?;
            let _ = writeln!(sol, "geometry = \"ads\"\nresidual = {}", f17(s.residual));
            rep_toml(&mut sol, "left", &left, None);
            rep_toml(&mut sol, "right", &s.right, Some(&s.right_fn));
            (
                s.config,
                s.residual,
                json!({
                    "solver": "ads",
                    "initial_condition": s.initial_condition,
                    "minkowski_condition": s.minkowski_condition,
                    "min_sv_ratio": s.trace.min_sv_ratio(),
                }),
            )
        }
    };
    points_toml(&mut sol, "point", &config);
    let (csv, norm) = residual_csv(&config, &target, &opts)?;
    out.write("solution.toml", &sol)?;
    out.write("residual.csv", &csv)?;
    let mut v = verdicts;
    v["verdict"] = json!("Converged");
    v["residual"] = json!(residual.max(norm));
    v["scale"] = json!(target.max_length());
    Ok(v)
}

fn spectra(left: &FuchsianRep, right: &FuchsianRep) -> (String, f64) {
    let mut csv = String::from("word,left_length,right_length,difference\n");
    let mut gap = 0.0f64;
    for w in ball(3).words.iter().skip(1) {
        let (Ok(a), Ok(b)) = (left.translation_length(w), right.translation_length(w)) else {
            continue;
        };
        gap = gap.max((a - b).abs());
        let _ = writeln!(csv, "{w},{},{},{}", f17(a), f17(b), f17(a - b));
    }
    (csv, gap)
}

fn inverse_pair(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let spec = cfg.section(&cfg.inverse_pair, "inverse_pair")?;
    let (plus, minus) = (cfg.metric(&spec.plus)?, cfg.metric(&spec.minus)?);
    let start = spec
        .start_fn
        .map_or_else(PairStart::default, |c| PairStart { c });
    let opts = cfg.solver.clone();
    let s = solved(out, solver::solve_pair(&plus, &minus, &start, &opts), |s| {
        &s.trace
    })?;
    let mut sol = String::new();
    let _ = writeln!(sol, "geometry = \"ads\"\nresidual = {}", f17(s.residual));
    rep_toml(&mut sol, "left", &s.left, Some(&s.left_fn));
    rep_toml(&mut sol, "right", &s.right, Some(&s.right_fn));
    points_toml(&mut sol, "plus", &s.plus);
    points_toml(&mut sol, "minus", &s.minus);
    let (rp, np) = residual_csv(&s.plus, &plus, &opts)?;
    let (rm, nm) = residual_csv(&s.minus, &minus, &opts)?;
    let (sp, gap) = spectra(&s.left, &s.right);
    out.write("solution.toml", &sol)?;
    out.write("residual_plus.csv", &rp)?;
    out.write("residual_minus.csv", &rm)?;
    out.write("spectra.csv", &sp)?;
    Ok(json!({
        "verdict": "Converged",
        "residual": s.residual.max(np).max(nm),
        "scale": plus.max_length().max(minus.max_length()),
        "spectrum_gap": gap,
    }))
}

fn transition(cfg: &RunConfig, out: &mut OutputDir) -> Result<Value> {
    let spec = cfg.section(&cfg.transition, "transition")?;
    let c0 = spec.configuration.build()?;
    let report = transition_check(&c0, &spec.t, spec.radius, spec.limit_len)?;
    let slope = report.slope;
    let mut csv = String::from("t,subdivision,max_ratio_error,local_slope,slope,error\n");
    let mut prev: Option<(f64, f64)> = None;
    let fmt_opt = |x: Option<f64>| x.map_or(String::new(), f17);
    for s in &report.steps {
        let local = prev.and_then(|(t, e)| {
            (e > 0.0 && s.max_ratio_error > 0.0)
                .then(|| (s.max_ratio_error / e).ln() / (s.t / t).ln())
        });
        prev = Some((s.t, s.max_ratio_error));
        let verdict = s.subdivision.map_or("error".to_string(), |b| b.to_string());
        let err = s.error.clone().unwrap_or_default().replace(',', ";");
        let _ = writeln!(
            csv,
            "{},{verdict},{},{},{},{err}",
            f17(s.t),
            f17(s.max_ratio_error),
            fmt_opt(local),
            fmt_opt(slope)
        );
    }
    let plot = Plot {
        title: "edge-length ratio error".into(),
        x_label: "t".into(),
        y_label: "max |ratio - 1|".into(),
        log_x: true,
        log_y: true,
        series: vec![Series {
            label: format!(
                "slope {}",
                slope.map_or("n/a".into(), |s| format!("{s:.3}"))
            ),
            points: report
                .steps
                .iter()
                .map(|s| (s.t, s.max_ratio_error))
                .collect(),
            color: "steelblue",
        }],
    };
    out.write("transition.csv", &csv)?;
    out.write("transition.svg", &plot.to_svg())?;
    Ok(json!({
        "slope": slope,
        "monotone": report.monotone,
        "subdivision": report.steps.iter().map(|s| json!({ "t": s.t, "holds": s.subdivision })).collect::<Vec<_>>(),
    }))
}

fn area_check(cfg: &RunConfig, out: &mut OutputDir, seed: u64) -> Result<Value> {
    let spec = cfg.section(&cfg.area_check, "area_check")?;
    let rep = spec.rep.build()?;
    let mut csv = String::from("r,monte_carlo_area,formula_area,relative_error\n");
    let (mut mc, mut formula) = (Vec::new(), Vec::new());
    let mut worst = 0.0f64;
    for &r in &spec.r {
        if !(r > 0.0 && r < std::f64::consts::FRAC_PI_2 + 1e-12) {
            return Err(ConfigError(format!("radius {r} outside (0, π/2]")).into());
        }
        let a = fuchsian_level_area(&rep, r, spec.samples, seed);
        // genus 2 and a Fuchsian pair: −2π sin²(r)·χ with χ = −2
        let f = 4.0 * std::f64::consts::PI * r.sin().powi(2);
        worst = worst.max((a / f - 1.0).abs());
        let _ = writeln!(csv, "{},{},{},{}", f17(r), f17(a), f17(f), f17(a / f - 1.0));
        mc.push((r, a));
        formula.push((r, f));
    }
    let plot = Plot {
        title: "area of the level surface".into(),
        x_label: "r".into(),
        y_label: "area".into(),
        log_x: false,
        log_y: false,
        series: vec![
            Series {
                label: "Monte Carlo".into(),
                points: mc,
                color: "steelblue",
            },
            Series {
                label: "4π sin²(r)".into(),
                points: formula,
                color: "firebrick",
            },
        ],
    };
    out.write("area.csv", &csv)?;
    out.write("area.svg", &plot.to_svg())?;
    Ok(json!({ "samples": spec.samples, "max_relative_error": worst }))
}

fn probe(cfg: &RunConfig, out: &mut OutputDir, seed: u64) -> Result<Value> {
    let spec = cfg.section(&cfg.probe_uniqueness, "probe_uniqueness")?;
    let opts = cfg.solver.clone();
    let report = match (&spec.target, &spec.plus, &spec.minus) {
        (Some(t), None, None) => {
            let left = spec
                .left
                .as_ref()
                .ok_or_else(|| ConfigError("a single target needs `left`".into()))?
                .build()?;
            let target = cfg.metric(t)?.scale(spec.scale);
            solver::probe_uniqueness_ads(&left, &target, spec.runs, seed, &opts)
        }
        (None, Some(p), Some(m)) => {
            let start = spec
                .start_fn
                .map_or_else(PairStart::default, |c| PairStart { c });
            let (p, m) = (
                cfg.metric(p)?.scale(spec.scale),
                cfg.metric(m)?.scale(spec.scale),
            );
            solver::probe_uniqueness_pair(&p, &m, &start, spec.runs, seed, &opts)
        }
        _ => {
            return Err(
                ConfigError("give either `target` or both `plus` and `minus`".into()).into(),
            )
        }
    };
    out.write(
        "probe.json",
        &format!("{:#}\n", serde_json::to_value(&report)?),
    )?;
    Ok(json!({
        "unique": report.unique(),
        "clusters": report.clusters,
        "spread": report.spread,
        "all_converged": report.all_converged,
        "note": "agreement of multistart runs; membership of the target in the uniqueness set is not tested",
    }))
}
