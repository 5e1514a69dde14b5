use std::path::{Path, PathBuf};

use nalgebra::{DVector, Matrix2, Vector3, Vector4};
use serde::Deserialize;

use adsweyl::cone_metric::ConeMetric;
use adsweyl::fuchsian::{build_genus2, fn_tangent_matrix, Cocycle, FuchsianRep};
use adsweyl::projective::ProjPoint;
use adsweyl::solver::SolveOptions;
use adsweyl::surfaces::{Side, VertexConfig};

/// Malformed or inconsistent run configuration.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Forward,
    Inverse,
    InversePair,
    Transition,
    AreaCheck,
    ProbeUniqueness,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Forward => "forward",
            Command::Inverse => "inverse",
            Command::InversePair => "inverse-pair",
            Command::Transition => "transition",
            Command::AreaCheck => "area-check",
            Command::ProbeUniqueness => "probe-uniqueness",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolveOptions,
    pub forward: Option<ForwardSpec>,
    pub inverse: Option<InverseSpec>,
    pub inverse_pair: Option<PairSpec>,
    pub transition: Option<TransitionSpec>,
    pub area_check: Option<AreaSpec>,
    pub probe_uniqueness: Option<ProbeSpec>,
    /// Directory of the config file; relative input paths resolve against it.
    #[serde(skip)]
    pub base: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<(RunConfig, toml::Value), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let echo: toml::Value = toml::from_str(&text).map_err(|e| ConfigError(e.to_string()))?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, echo))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn metric(&self, p: &Path) -> Result<ConeMetric, ConfigError> {
        let path = self.resolve(p);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        ConeMetric::from_toml(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn section<'a, T>(&self, s: &'a Option<T>, name: &str) -> Result<&'a T, ConfigError> {
        s.as_ref()
            .ok_or_else(|| ConfigError(format!("missing [{name}] section")))
    }
}

/// A holonomy given by Fenchel–Nielsen coordinates or by generator matrices [a, b, c, d].
/// When both are present the coordinates win.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepSpec {
    #[serde(rename = "fn")]
    pub fn_coords: Option<[f64; 6]>,
    pub matrices: Option<[[f64; 4]; 4]>,
}

impl RepSpec {
    pub fn build(&self) -> Result<FuchsianRep, ConfigError> {
        match (&self.fn_coords, &self.matrices) {
            (Some(c), _) => build_genus2(c).map_err(|e| ConfigError(e.to_string())),
            (None, Some(m)) => {
                let gens = m.map(|g| Matrix2::new(g[0], g[1], g[2], g[3]));
                FuchsianRep::from_matrices(gens).map_err(|e| ConfigError(e.to_string()))
            }
            (None, None) => bad("a holonomy needs `fn` or `matrices`"),
        }
    }
}

/// Cocycle as a Fenchel–Nielsen direction or as raw generator values (12 numbers).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSpec {
    pub fn_direction: Option<[f64; 6]>,
    pub vector: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideSpec {
    #[default]
    Future,
    Past,
}

impl SideSpec {
    pub fn side(self) -> Side {
        match self {
            SideSpec::Future => Side::FutureConvex,
            SideSpec::Past => Side::PastConvex,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometrySpec {
    Ads,
    Minkowski,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigurationSpec {
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub side: SideSpec,
    pub left: Option<RepSpec>,
    pub right: Option<RepSpec>,
    pub rep: Option<RepSpec>,
    pub cocycle: Option<CocycleSpec>,
    /// Homogeneous (x₁, x₂, x₃, x₄) for AdS, (y₁, y₂, y₃) for Minkowski.
    pub points: Vec<Vec<f64>>,
}

impl ConfigurationSpec {
    pub fn build(&self) -> Result<VertexConfig, ConfigError> {
        let side = self.side.side();
        let geo = |e: adsweyl::Error| ConfigError(e.to_string());
        match self.geometry {
            GeometrySpec::Ads => {
                let (Some(l), Some(r)) = (&self.left, &self.right) else {
                    return bad("an AdS configuration needs `left` and `right`");
                };
                let pts = self
                    .points
                    .iter()
                    .map(|p| match p.as_slice() {
                        [a, b, c, d] => Ok(ProjPoint(Vector4::new(*a, *b, *c, *d))),
                        _ => bad("AdS points have four coordinates"),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                VertexConfig::ads(l.build()?, r.build()?, pts, side).map_err(geo)
            }
            GeometrySpec::Minkowski => {
                let Some(rs) = &self.rep else {
                    return bad("a Minkowski configuration needs `rep`");
                };
                let rep = rs.build()?;
                let tau = match &self.cocycle {
                    None => Cocycle::zero(&rep),
                    Some(CocycleSpec {
                        fn_direction: Some(d),
                        vector: None,
                    }) => {
                        let Some(c) = rep.fn_coords else {
                            return bad("`fn_direction` needs a holonomy given by `fn`");
                        };
                        let m = fn_tangent_matrix(&c).map_err(geo)?;
                        let v = m * DVector::from_column_slice(d);
                        Cocycle::from_vector(&rep, v.as_slice())
                    }
                    Some(CocycleSpec {
                        fn_direction: None,
                        vector: Some(v),
                    }) if v.len() == 12 => Cocycle::from_vector(&rep, v),
                    _ => return bad("a cocycle needs `fn_direction` (6) or `vector` (12)"),
                };
                let pts = self
                    .points
                    .iter()
                    .map(|p| match p.as_slice() {
                        [a, b, c] => Ok(Vector3::new(*a, *b, *c)),
                        _ => bad("Minkowski points have three coordinates"),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                VertexConfig::minkowski(tau, pts, side).map_err(geo)
            }
        }
    }
}

fn default_radius() -> usize {
    5
}

fn default_limit() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardSpec {
    pub configuration: ConfigurationSpec,
    #[serde(default = "default_radius")]
    pub radius: usize,
    #[serde(default = "default_limit")]
    pub limit_len: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSpec {
    pub target: PathBuf,
    /// Left holonomy for hyperbolic targets.
    pub left: Option<RepSpec>,
    /// Linear holonomy for Euclidean targets.
    pub rep: Option<RepSpec>,
    #[serde(default)]
    pub side: SideSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub plus: PathBuf,
    pub minus: PathBuf,
    /// Fenchel–Nielsen coordinates of the blow-up base.
    pub start_fn: Option<[f64; 6]>,
}

fn default_ts() -> Vec<f64> {
    vec![0.1, 0.05, 0.025]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionSpec {
    pub configuration: ConfigurationSpec,
    #[serde(default = "default_ts")]
    pub t: Vec<f64>,
    #[serde(default = "default_transition_radius")]
    pub radius: usize,
    #[serde(default = "default_limit")]
    pub limit_len: usize,
}

fn default_transition_radius() -> usize {
    8
}

fn default_rs() -> Vec<f64> {
    vec![0.3, 0.6, 1.2, std::f64::consts::FRAC_PI_2 - 0.01]
}

fn default_samples() -> usize {
    1_000_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaSpec {
    pub rep: RepSpec,
    #[serde(default = "default_rs")]
    pub r: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_runs() -> usize {
    8
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// Single hyperbolic target with `left`, or a pair `plus`/`minus`.
    pub target: Option<PathBuf>,
    pub left: Option<RepSpec>,
    pub plus: Option<PathBuf>,
    pub minus: Option<PathBuf>,
    pub start_fn: Option<[f64; 6]>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Targets are scaled by this factor before probing.
    #[serde(default = "default_scale")]
    pub scale: f64,
}
